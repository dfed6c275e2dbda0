#include "srtrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "srtrl/errors.hpp"

namespace srtrl {

namespace {

using nlohmann::json;

template <typename T>
T param(const json& p, const char* key) {
    return p.at(key).get<T>();
}

struct LossOut {
    double loss = 0.0;
    Vec dl_dy;
    int correct = -1;
};

LossOut compute_loss(const StreamTask& task, const StreamStep& step, const Vec& y) {
    LossOut out;
    if (task.loss == LossKind::mse) {
        const Vec diff = y - step.target;
        const double o = static_cast<double>(y.size());
        out.loss = diff.squaredNorm() / o;
        out.dl_dy = 2.0 * diff / o;
        return out;
    }
    const double top = y.maxCoeff();
    const Vec e = (y.array() - top).exp().matrix();
    const double z = e.sum();
    out.dl_dy = e / z;
    out.loss = -(y[step.target_class] - top - std::log(z));
    out.dl_dy[step.target_class] -= 1.0;
    Index arg = 0;
    y.maxCoeff(&arg);
    out.correct = arg == step.target_class ? 1 : 0;
    return out;
}

json engine_json(const EngineEntry& e) {
    json ej = {{"variant", std::string(to_string(e.spec.kind))}, {"label", e.label()}};
    if (e.spec.kind == EngineKind::sparse_rtrl) {
        ej["k"] = e.spec.k;
        ej["strategy"] = std::string(to_string(e.spec.strategy));
    }
    if (e.spec.kind == EngineKind::traces) ej["lambda"] = e.spec.lambda;
    if (e.spec.kind == EngineKind::tbptt) ej["window"] = e.spec.window;
    ej["freeze_after_shift"] = e.freeze_after_shift;
    return ej;
}

json run_metadata(const ExperimentConfig& cfg, const EngineEntry& e, const StreamTask& task) {
    const Index n = cfg.model.n;
    json meta = {
        {"task", task.metadata},
        {"init", cfg.model.kind == "rnn"
                     ? "W_hh ~ N(0,1/n), W_ih ~ N(0,1/m), W_out ~ N(0,1/n), biases 0"
                     : "gate weights ~ N(0,1/(n+m)), W_out ~ N(0,1/n), biases 0"},
        {"h0", "zeros"},
        {"loss_normalization", task.loss == LossKind::mse ? "mean over outputs, dL/dy = 2(y-t)/o"
                                                          : "softmax cross-entropy"},
        {"window_len", cfg.diagnostics.window},
        {"sd_ddof", 1},
        {"spectral_block", "j_whh (n, n^2)"},
        {"r95", "sigma^2 mass"},
        {"rng", "mt19937_64, splitmix64 substreams init/mask/task/uoro"},
    };
    if (e.spec.kind == EngineKind::sparse_rtrl) {
        json sel = {{"strategy", std::string(to_string(e.spec.strategy))},
                    {"k", e.spec.k},
                    {"tie_break", "lower column index"},
                    {"self_inclusion", self_inclusion_policy(e.spec.strategy, e.spec.k, n)},
                    {"recompute_period", recompute_period(e.spec.strategy)}};
        if (e.spec.strategy == Strategy::ring) sel["odd_k"] = "extra neighbour clockwise";
        if (e.spec.strategy == Strategy::dynamic) sel["score"] = "|W_hh[i,l]| * ||J[l,:]||_2";
        meta["selection"] = sel;
    }
    if (e.spec.kind == EngineKind::uoro) meta["uoro_eps"] = kUoroEps;
    return meta;
}

std::optional<Step> first_shift(const StreamTask& task) {
    if (task.shift_points.empty()) return std::nullopt;
    return task.shift_points.front();
}

bool snapshot_due(const ExperimentConfig& cfg, const StreamTask& task, Step t) {
    const Index every = cfg.diagnostics.spectral_every;
    if (every > 0 && t % every == 0) return true;
    if (every > 0 || cfg.diagnostics.jacobian_dump)
        return std::find(task.shift_points.begin(), task.shift_points.end(), t) != task.shift_points.end();
    return false;
}

void take_spectrum(RunRecord& rec, const RowMat& block, Step t) {
    try {
        auto s = spectral_analysis(block);
        s.t = t;
        rec.spectra.push_back(std::move(s));
    } catch (const UndefinedGapError&) {
        // All-zero sensitivity (first step): no spectrum to report.
    }
}

void optimizer_step(const OptimizerSpec& opt, Vec& theta, const Vec& grad, AdamState& adam) {
    if (opt.kind == "sgd") {
        sgd_step(theta, grad, opt.sgd_lr);
    } else {
        adam_step(theta, grad, adam, opt.adam);
    }
}

void run_rnn(const ExperimentConfig& cfg, const EngineEntry& entry, std::uint64_t seed,
             const StreamTask& task, RunRecord& rec) {
    const Index n = cfg.model.n;
    const Index m = task.input_dim;
    Rng init_rng = make_rng(seed, RngStream::init);
    RnnParams params = RnnParams::init(n, m, task.output_dim, init_rng);
    RnnGradientEngine engine(entry.spec, n, m, make_rng(seed, RngStream::mask),
                             make_rng(seed, RngStream::uoro));
    const bool has_shadow = cfg.diagnostics.cosine_reference && entry.spec.kind != EngineKind::full_rtrl;
    std::optional<RnnGradientEngine> shadow;
    if (has_shadow)
        shadow.emplace(EngineSpec{}, n, m, make_rng(seed, RngStream::mask), make_rng(seed, RngStream::uoro));
    const bool spectral = engine.jacobian() != nullptr;

    Vec theta = params.flat();
    AdamState adam = AdamState::zeros(theta.size());
    Vec h = Vec::Zero(n);
    const auto freeze_at = first_shift(task);

    for (Step t = 0; t < task.length(); ++t) {
        const StreamStep& step = task.steps[static_cast<std::size_t>(t)];
        const RnnForward fwd = rnn_forward(params, h, step.x);
        engine.observe(params, h, step.x, fwd.h, t);
        if (shadow) shadow->observe(params, h, step.x, fwd.h, t);

        if (spectral && snapshot_due(cfg, task, t)) {
            if (cfg.diagnostics.spectral_every > 0) take_spectrum(rec, engine.jacobian()->whh(), t);
            if (cfg.diagnostics.jacobian_dump) rec.jacobians.emplace_back(t, *engine.jacobian());
        }

        StepLog log;
        log.t = t;
        log.loss_active = step.loss_active;
        if (step.loss_active) {
            const LossOut loss = compute_loss(task, step, fwd.y);
            if (!std::isfinite(loss.loss)) throw DivergenceError("non-finite loss", t);
            log.loss = loss.loss;
            if (loss.correct >= 0) rec.correct.push_back(loss.correct);

            const ParamGradient g = engine.gradient(params, loss.dl_dy, fwd.h);
            log.grad_norm = g.norm();
            if (cfg.diagnostics.cosine_reference) {
                if (shadow) {
                    const auto c = gradient_cosine(g, shadow->gradient(params, loss.dl_dy, fwd.h));
                    log.cos_ref = c.cosine;
                    rec.magnitude_ratio.push_back(c.magnitude_ratio);
                } else {
                    log.cos_ref = gradient_cosine(g, g).cosine;
                    rec.magnitude_ratio.push_back(1.0);
                }
            }
            const bool frozen = entry.freeze_after_shift && freeze_at && t >= *freeze_at;
            if (!frozen) {
                optimizer_step(cfg.optimizer, theta, g.flat(), adam);
                if (!theta.allFinite()) throw DivergenceError("non-finite parameters", t);
                params.set_flat(theta);
            }
        }
        rec.log.push_back(log);
        h = fwd.h;
    }
    if (cfg.diagnostics.jacobian_dump && spectral && (rec.jacobians.empty() || rec.jacobians.back().first != task.length() - 1))
        rec.jacobians.emplace_back(task.length() - 1, *engine.jacobian());
}

void run_lstm(const ExperimentConfig& cfg, const EngineEntry& entry, std::uint64_t seed,
              const StreamTask& task, RunRecord& rec) {
    const Index n = cfg.model.n;
    const Index m = task.input_dim;
    Rng init_rng = make_rng(seed, RngStream::init);
    LstmParams params = LstmParams::init(n, m, task.output_dim, init_rng);
    LstmGradientEngine engine(entry.spec, n, m, make_rng(seed, RngStream::mask));

    Vec theta = params.flat();
    AdamState adam = AdamState::zeros(theta.size());
    Vec h = Vec::Zero(n);
    Vec c = Vec::Zero(n);
    const auto freeze_at = first_shift(task);

    for (Step t = 0; t < task.length(); ++t) {
        const StreamStep& step = task.steps[static_cast<std::size_t>(t)];
        const LstmForward fwd = lstm_forward(params, h, c, step.x);
        engine.observe(params, h, c, step.x, fwd, t);

        StepLog log;
        log.t = t;
        log.loss_active = step.loss_active;
        if (step.loss_active) {
            const LossOut loss = compute_loss(task, step, fwd.y);
            if (!std::isfinite(loss.loss)) throw DivergenceError("non-finite loss", t);
            log.loss = loss.loss;
            if (loss.correct >= 0) rec.correct.push_back(loss.correct);
            const ParamGradient g = engine.gradient(params, loss.dl_dy, fwd.h);
            log.grad_norm = g.norm();
            const bool frozen = entry.freeze_after_shift && freeze_at && t >= *freeze_at;
            if (!frozen) {
                optimizer_step(cfg.optimizer, theta, g.flat(), adam);
                if (!theta.allFinite()) throw DivergenceError("non-finite parameters", t);
                params.set_flat(theta);
            }
        }
        rec.log.push_back(log);
        h = fwd.h;
        c = fwd.c;
    }
}

std::string cell_stem(const RunRecord& r) {
    return r.task + "_" + r.engine + "_" + std::to_string(r.seed);
}

}  // namespace

StreamTask make_task(const TaskSpec& spec, std::uint64_t seed) {
    const json& p = spec.params;
    try {
        if (spec.kind == "sine_shift")
            return sine_shift(param<Step>(p, "length"), param<Step>(p, "shift"), param<double>(p, "f1"),
                              param<double>(p, "f2"));
        if (spec.kind == "multi_sine")
            return multi_sine(param<std::vector<double>>(p, "frequencies"), param<Step>(p, "length"));
        if (spec.kind == "lorenz")
            return lorenz_stream(param<Step>(p, "length"), param<Step>(p, "shift"), param<double>(p, "rho1"),
                                 param<double>(p, "rho2"), param<double>(p, "dt"), param<Step>(p, "burn_in"));
        if (spec.kind == "copy")
            return copy_task(param<Index>(p, "episodes"), param<Index>(p, "delay"), param<Index>(p, "alphabet"),
                             param<Index>(p, "symbols"), seed);
        if (spec.kind == "adding")
            return adding_problem(param<Index>(p, "sequences"), param<Index>(p, "seq_length"), seed);
        if (spec.kind == "csv") {
            CsvPreprocess pre;
            if (p.contains("pca_components") && !p.at("pca_components").is_null())
                pre.pca_components = param<Index>(p, "pca_components");
            pre.zscore_inputs = p.value("zscore_inputs", false);
            pre.zscore_targets = p.value("zscore_targets", false);
            return csv_stream(param<std::string>(p, "path"), param<std::vector<std::string>>(p, "input_cols"),
                              param<std::vector<std::string>>(p, "target_cols"), param<Step>(p, "split_step"),
                              pre);
        }
    } catch (const json::exception& e) {
        throw ConfigError("task: " + std::string(e.what()));
    } catch (const ContractViolation& e) {
        throw ConfigError("task: " + std::string(e.what()));
    }
    throw ConfigError("task.kind: unknown task '" + spec.kind + "'");
}

RunRecord run_single(const ExperimentConfig& cfg, const EngineEntry& engine, std::uint64_t seed,
                     const StreamTask* task) {
    StreamTask local;
    if (!task) {
        local = make_task(cfg.task, seed);
        task = &local;
    }
    RunRecord rec;
    rec.task = task->name;
    rec.engine = engine.label();
    rec.seed = seed;
    rec.shift_points = task->shift_points;
    rec.length = task->length();
    rec.config = cfg.to_json();
    rec.config["engines"] = json::array({engine_json(engine)});
    rec.config["seeds"] = json::array({seed});
    rec.config.erase("output_dir");  // keeps summaries independent of where they land
    rec.metadata = run_metadata(cfg, engine, *task);
    rec.log.reserve(static_cast<std::size_t>(task->length()));
    try {
        if (cfg.model.kind == "lstm") {
            run_lstm(cfg, engine, seed, *task, rec);
        } else {
            run_rnn(cfg, engine, seed, *task, rec);
        }
    } catch (const DivergenceError& e) {
        rec.diverged = true;
        rec.diverged_step = e.step();
        rec.diverged_reason = e.what();
    }
    return rec;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    const char* root = std::getenv("SRTRL_OUTPUT_ROOT");
    const std::filesystem::path base = root && *root ? root : "runs";
    return base / (cfg.name.empty() ? std::string("experiment") : cfg.name);
}

void write_record(const std::filesystem::path& dir, const RunRecord& record, Index window_len) {
    std::filesystem::create_directories(dir);
    const auto stem = cell_stem(record);
    {
        std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
        write_step_log_csv(csv, record);
        if (!csv) throw std::runtime_error("cannot write " + (dir / (stem + ".csv")).string());
    }
    {
        std::ofstream js(dir / (stem + ".json"), std::ios::binary);
        js << summary_json(record, window_len).dump(2) << '\n';
        if (!js) throw std::runtime_error("cannot write " + (dir / (stem + ".json")).string());
    }
    if (!record.jacobians.empty()) {
        std::ofstream bin(dir / (stem + "_jac.bin"), std::ios::binary);
        for (const auto& [step, j] : record.jacobians) write_jacobian_snapshot(bin, j, step);
    }
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    std::vector<StreamTask> tasks;
    tasks.reserve(cfg.seeds.size());
    for (auto seed : cfg.seeds) tasks.push_back(make_task(cfg.task, seed));

    const std::size_t per_engine = cfg.seeds.size();
    const std::size_t cells = cfg.engines.size() * per_engine;
    std::vector<RunRecord> records(cells);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells; i = next++) {
            const auto& engine = cfg.engines[i / per_engine];
            const auto s = i % per_engine;
            records[i] = run_single(cfg, engine, cfg.seeds[s], &tasks[s]);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs.value_or(cfg.jobs),
                                                          static_cast<unsigned>(cells)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (opts.write_outputs) {
        const auto dir = resolve_output_dir(cfg);
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "config.json", std::ios::binary) << cfg.to_json().dump(2) << '\n';
        for (const auto& r : records) write_record(dir, r, cfg.diagnostics.window);
    }
    return records;
}

// Report

namespace {

struct Loaded {
    std::string task;
    std::string engine;
    std::uint64_t seed = 0;
    std::optional<Index> k;
    Index n = 0;
    bool diverged = false;
    bool frozen = false;
    std::optional<double> pre;
    std::optional<double> post;  // first post-shift window, else final
    std::optional<double> accuracy;
};

std::optional<double> num(const json& j) {
    if (j.is_number()) return j.get<double>();
    return std::nullopt;
}

std::optional<Loaded> load_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error&) {
        return std::nullopt;
    }
    if (!j.is_object() || !j.contains("engine") || !j.contains("seed") || !j.contains("post_shift_mse"))
        return std::nullopt;
    Loaded l;
    l.task = j.at("task").get<std::string>();
    l.engine = j.at("engine").get<std::string>();
    l.seed = j.at("seed").get<std::uint64_t>();
    l.diverged = j.at("diverged").get<bool>();
    l.pre = num(j.at("pre_shift_mse"));
    const auto& post = j.at("post_shift_mse");
    l.post = !post.empty() ? num(post.front()) : num(j.at("final_mse"));
    l.accuracy = num(j.at("accuracy"));
    const auto& cfg = j.at("config");
    l.n = cfg.at("model").at("n").get<Index>();
    const auto& e = cfg.at("engines").at(0);
    const auto variant = e.at("variant").get<std::string>();
    if (variant == "sparse-rtrl") l.k = e.at("k").get<Index>();
    if (variant == "full-rtrl") l.k = l.n;
    if (variant == "traces" && e.value("lambda", 0.0) == 0.0) l.k = 0;
    l.frozen = e.value("freeze_after_shift", false);
    return l;
}

bool is_floor(const Loaded& l) {
    return !l.frozen && (l.engine == "traces" || (l.engine.rfind("sparse-rtrl-k0-", 0) == 0));
}

bool is_ceiling(const Loaded& l) {
    return !l.frozen && (l.engine == "full-rtrl" ||
                         l.engine.rfind("sparse-rtrl-k" + std::to_string(l.n) + "-", 0) == 0);
}

void fill_stats(const std::vector<double>& v, std::optional<double>& mean, std::optional<double>& sd) {
    if (v.empty()) return;
    const auto d = seed_dispersion(v);
    mean = d.mean;
    sd = d.sd;
}

std::string cell(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<ReportRow> build_report(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError(dir.string() + ": not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<Loaded> all;
    for (const auto& f : files)
        if (auto l = load_summary(f)) all.push_back(std::move(*l));
    if (all.empty()) throw ConfigError(dir.string() + ": no run summaries found");

    // (task, seed) -> reference values
    std::map<std::pair<std::string, std::uint64_t>, const Loaded*> floor, ceiling, frozen;
    for (const auto& l : all) {
        const auto key = std::make_pair(l.task, l.seed);
        if (is_floor(l) && !floor.count(key)) floor[key] = &l;
        if (is_ceiling(l) && !ceiling.count(key)) ceiling[key] = &l;
        if (l.frozen && !frozen.count(key)) frozen[key] = &l;
    }

    std::map<std::pair<std::string, std::string>, std::vector<const Loaded*>> groups;
    for (const auto& l : all) groups[{l.task, l.engine}].push_back(&l);

    std::vector<ReportRow> rows;
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
        ReportRow row;
        row.task = key.first;
        row.engine = key.second;
        row.k = members.front()->k;
        row.seeds = static_cast<Index>(members.size());
        std::vector<double> mse, rec, bci, acc;
        for (const auto* l : members) {
            row.seed_ids.push_back(l->seed);
            if (l->diverged) ++row.diverged;
            const auto mse_l = l->diverged ? std::nullopt : l->post;
            row.per_seed_mse.push_back(mse_l);
            if (mse_l) mse.push_back(*mse_l);
            if (l->accuracy) acc.push_back(*l->accuracy);

            std::optional<double> r;
            const auto fk = floor.find({l->task, l->seed});
            const auto ck = ceiling.find({l->task, l->seed});
            if (mse_l && fk != floor.end() && ck != ceiling.end() && !fk->second->diverged &&
                !ck->second->diverged && fk->second->post && ck->second->post) {
                try {
                    r = gap_recovery(*fk->second->post, *mse_l, *ck->second->post);
                } catch (const UndefinedGapError&) {
                }
            }
            row.per_seed_recovery.push_back(r);
            if (r) rec.push_back(*r);

            const auto fz = frozen.find({l->task, l->seed});
            if (mse_l && fz != frozen.end() && fz->second->post && fz->second->pre) {
                try {
                    bci.push_back(bci_recovery(*fz->second->post, *mse_l, *fz->second->pre));
                } catch (const UndefinedGapError&) {
                }
            }
        }
        fill_stats(mse, row.mse_mean, row.mse_sd);
        fill_stats(rec, row.recovery_mean, row.recovery_sd);
        fill_stats(bci, row.bci_mean, row.bci_sd);
        fill_stats(acc, row.acc_mean, row.acc_sd);
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (a.task != b.task) return a.task < b.task;
        const Index ka = a.k.value_or(std::numeric_limits<Index>::max());
        const Index kb = b.k.value_or(std::numeric_limits<Index>::max());
        if (ka != kb) return ka < kb;
        return a.engine < b.engine;
    });
    return rows;
}

void write_report(const std::filesystem::path& dir, const std::vector<ReportRow>& rows) {
    std::ofstream csv(dir / "report.csv", std::ios::binary);
    csv << "task,engine,k,seeds,diverged,mse_mean,mse_sd,recovery_mean,recovery_sd,bci_mean,bci_sd,"
           "acc_mean,acc_sd\n";
    json out = json::array();
    for (const auto& r : rows) {
        csv << r.task << ',' << r.engine << ',' << (r.k ? std::to_string(*r.k) : "") << ',' << r.seeds << ','
            << r.diverged << ',' << cell(r.mse_mean) << ',' << cell(r.mse_sd) << ',' << cell(r.recovery_mean)
            << ',' << cell(r.recovery_sd) << ',' << cell(r.bci_mean) << ',' << cell(r.bci_sd) << ','
            << cell(r.acc_mean) << ',' << cell(r.acc_sd) << '\n';
        json per_seed = json::array();
        for (std::size_t i = 0; i < r.seed_ids.size(); ++i)
            per_seed.push_back({{"seed", r.seed_ids[i]},
                                {"mse", opt_json(r.per_seed_mse[i])},
                                {"recovery", opt_json(r.per_seed_recovery[i])}});
        out.push_back({{"task", r.task},
                       {"engine", r.engine},
                       {"k", r.k ? json(*r.k) : json(nullptr)},
                       {"seeds", r.seeds},
                       {"diverged", r.diverged},
                       {"mse_mean", opt_json(r.mse_mean)},
                       {"mse_sd", opt_json(r.mse_sd)},
                       {"recovery_mean", opt_json(r.recovery_mean)},
                       {"recovery_sd", opt_json(r.recovery_sd)},
                       {"bci_mean", opt_json(r.bci_mean)},
                       {"bci_sd", opt_json(r.bci_sd)},
                       {"acc_mean", opt_json(r.acc_mean)},
                       {"acc_sd", opt_json(r.acc_sd)},
                       {"per_seed", per_seed}});
    }
    std::ofstream(dir / "report.json", std::ios::binary) << out.dump(2) << '\n';
}

std::string format_report(const std::vector<ReportRow>& rows) {
    auto fmt = [](const std::optional<double>& v, const char* spec) {
        if (!v) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, spec, *v);
        return std::string(buf);
    };
    const bool any_bci = std::any_of(rows.begin(), rows.end(), [](auto& r) { return r.bci_mean.has_value(); });
    const bool any_acc = std::any_of(rows.begin(), rows.end(), [](auto& r) { return r.acc_mean.has_value(); });
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %-28s %5s %5s %4s %12s %12s %9s %8s", "task", "engine", "k", "seeds",
                  "div", "mse_mean", "mse_sd", "recovery", "rec_sd");
    os << line << (any_bci ? "       bci   bci_sd" : "") << (any_acc ? "      acc   acc_sd" : "") << '\n';
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-10s %-28s %5s %5lld %4lld %12s %12s %9s %8s", r.task.c_str(),
                      r.engine.c_str(), r.k ? std::to_string(*r.k).c_str() : "-",
                      static_cast<long long>(r.seeds), static_cast<long long>(r.diverged),
                      fmt(r.mse_mean, "%.4e").c_str(), fmt(r.mse_sd, "%.2e").c_str(),
                      fmt(r.recovery_mean, "%.1f%%").c_str(), fmt(r.recovery_sd, "%.1f").c_str());
        os << line;
        if (any_bci) {
            std::snprintf(line, sizeof line, " %9s %8s", fmt(r.bci_mean, "%.1f%%").c_str(),
                          fmt(r.bci_sd, "%.1f").c_str());
            os << line;
        }
        if (any_acc) {
            std::snprintf(line, sizeof line, " %8s %8s", fmt(r.acc_mean, "%.3f").c_str(),
                          fmt(r.acc_sd, "%.3f").c_str());
            os << line;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace srtrl
