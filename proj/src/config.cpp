#include <fstream>
#include <set>
#include <sstream>

#include "srtrl/errors.hpp"
#include "srtrl/harness.hpp"

namespace srtrl {

namespace {

using nlohmann::json;

// Strict view over one JSON object: every key must be consumed.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return fallback;
        return convert<T>(key);
    }

    template <typename T>
    T require(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": required");
        return convert<T>(key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [key, _] : j_.items())
            if (!seen_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
    }

    std::string path(const std::string& key) const { return path_ + "." + key; }

private:
    template <typename T>
    T convert(const std::string& key) const {
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError("");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw ConfigError("");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw ConfigError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError("");
            }
            return v.get<T>();
        } catch (const std::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong type");
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

const std::map<std::string, std::set<std::string>>& task_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"sine_shift", {"length", "shift", "f1", "f2"}},
        {"multi_sine", {"length", "frequencies"}},
        {"lorenz", {"length", "shift", "rho1", "rho2", "dt", "burn_in"}},
        {"copy", {"episodes", "delay", "alphabet", "symbols"}},
        {"adding", {"sequences", "seq_length"}},
        {"csv", {"path", "input_cols", "target_cols", "split_step", "pca_components", "zscore_inputs",
                 "zscore_targets"}},
    };
    return keys;
}

json task_defaults(const std::string& kind) {
    if (kind == "sine_shift") return {{"length", 2000}, {"shift", 1000}, {"f1", 0.1}, {"f2", 0.3}};
    if (kind == "multi_sine") return {{"length", 4000}, {"frequencies", {0.1, 0.3, 0.05, 0.2}}};
    if (kind == "lorenz")
        return {{"length", 4000}, {"shift", 2000}, {"rho1", 28.0}, {"rho2", 20.0}, {"dt", 0.01}, {"burn_in", 1000}};
    if (kind == "copy") return {{"episodes", 300}, {"delay", 5}, {"alphabet", 8}, {"symbols", 5}};
    if (kind == "adding") return {{"sequences", 100}, {"seq_length", 50}};
    if (kind == "csv")
        return {{"pca_components", nullptr}, {"zscore_inputs", false}, {"zscore_targets", false}};
    return json::object();
}

TaskSpec parse_task(const json& j) {
    Fields f(j, "task");
    TaskSpec t;
    t.kind = f.require<std::string>("kind");
    const auto it = task_keys().find(t.kind);
    if (it == task_keys().end()) throw ConfigError("task.kind: unknown task '" + t.kind + "'");
    t.params = task_defaults(t.kind);
    for (const auto& key : it->second) {
        if (!f.has(key)) continue;
        t.params[key] = f.raw(key);
    }
    f.finish();
    if (t.kind == "csv")
        for (const char* key : {"path", "input_cols", "target_cols", "split_step"})
            if (!t.params.contains(key)) throw ConfigError(std::string("task.") + key + ": required");
    // Validate numeric layout early by building a tiny throwaway instance.
    const auto& p = t.params;
    auto positive = [&](const char* key) {
        if (!p.at(key).is_number_integer() || p.at(key).get<Step>() <= 0)
            throw ConfigError(std::string("task.") + key + ": must be a positive integer");
    };
    if (t.kind == "sine_shift" || t.kind == "lorenz") {
        positive("length");
        positive("shift");
        if (p.at("shift").get<Step>() >= p.at("length").get<Step>())
            throw ConfigError("task.shift: must be smaller than task.length");
    }
    if (t.kind == "multi_sine") positive("length");
    if (t.kind == "copy") positive("episodes");
    if (t.kind == "adding") positive("sequences");
    return t;
}

EngineEntry parse_engine(const json& j, const std::string& path) {
    Fields f(j, path);
    EngineEntry e;
    const auto variant = f.require<std::string>("variant");
    try {
        e.spec.kind = parse_engine_kind(variant);
    } catch (const ContractViolation&) {
        throw ConfigError(path + ".variant: unknown variant '" + variant + "'");
    }
    e.spec.k = f.get<Index>("k", 0);
    const auto strategy = f.get<std::string>("strategy", "ring");
    try {
        e.spec.strategy = parse_strategy(strategy);
    } catch (const ContractViolation&) {
        throw ConfigError(path + ".strategy: unknown strategy '" + strategy + "'");
    }
    e.spec.lambda = f.get<double>("lambda", variant == "traces-decay" ? 0.9 : 0.0);
    e.spec.window = f.get<Index>("window", 1);
    e.freeze_after_shift = f.get<bool>("freeze_after_shift", false);
    f.finish();
    if (e.spec.kind == EngineKind::sparse_rtrl && !j.contains("k"))
        throw ConfigError(path + ".k: required for sparse-rtrl");
    if (e.spec.k < 0) throw ConfigError(path + ".k: must be non-negative");
    if (e.spec.lambda < 0.0 || e.spec.lambda > 1.0) throw ConfigError(path + ".lambda: must lie in [0, 1]");
    if (e.spec.window < 1) throw ConfigError(path + ".window: must be at least 1");
    return e;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    Fields f(j, "config");
    ExperimentConfig cfg;
    const int version = f.get<int>("version", kConfigVersion);
    if (version != kConfigVersion)
        throw ConfigError("config.version: unsupported version " + std::to_string(version));
    cfg.name = f.get<std::string>("name", "");
    if (!j.contains("task")) throw ConfigError("config.task: required");
    cfg.task = parse_task(f.raw("task"));

    if (j.contains("model")) {
        Fields m(f.raw("model"), "model");
        cfg.model.kind = m.get<std::string>("kind", "rnn");
        cfg.model.n = m.get<Index>("n", 64);
        m.finish();
    }
    if (cfg.model.kind != "rnn" && cfg.model.kind != "lstm")
        throw ConfigError("model.kind: expected 'rnn' or 'lstm'");
    if (cfg.model.n < 1) throw ConfigError("model.n: must be positive");

    if (!j.contains("engines") || !j.at("engines").is_array() || j.at("engines").empty())
        throw ConfigError("config.engines: expected a non-empty array");
    const auto& engines = f.raw("engines");
    for (std::size_t i = 0; i < engines.size(); ++i) {
        const std::string path = "engines[" + std::to_string(i) + "]";
        auto e = parse_engine(engines[i], path);
        if (e.spec.kind == EngineKind::sparse_rtrl && e.spec.k > cfg.model.n)
            throw ConfigError(path + ".k: k=" + std::to_string(e.spec.k) + " exceeds model.n=" +
                              std::to_string(cfg.model.n));
        if (cfg.model.kind == "lstm") {
            if (e.spec.kind == EngineKind::uoro || e.spec.kind == EngineKind::tbptt)
                throw ConfigError(path + ".variant: not available for the lstm model");
            if (e.spec.kind == EngineKind::traces && e.spec.lambda != 0.0)
                throw ConfigError(path + ".lambda: decayed traces are not available for the lstm model");
        }
        cfg.engines.push_back(e);
    }

    if (j.contains("optimizer")) {
        Fields o(f.raw("optimizer"), "optimizer");
        cfg.optimizer.kind = o.get<std::string>("kind", "adam");
        const double lr = o.get<double>("lr", cfg.optimizer.kind == "sgd" ? 0.01 : 1e-3);
        cfg.optimizer.adam.lr = lr;
        cfg.optimizer.sgd_lr = lr;
        cfg.optimizer.adam.beta1 = o.get<double>("beta1", 0.9);
        cfg.optimizer.adam.beta2 = o.get<double>("beta2", 0.999);
        cfg.optimizer.adam.eps = o.get<double>("eps", 1e-8);
        o.finish();
        if (cfg.optimizer.kind != "adam" && cfg.optimizer.kind != "sgd")
            throw ConfigError("optimizer.kind: expected 'adam' or 'sgd'");
        if (!(lr > 0.0)) throw ConfigError("optimizer.lr: must be positive");
    }

    if (j.contains("seeds")) {
        cfg.seeds = f.get<std::vector<std::uint64_t>>("seeds", {});
        if (cfg.seeds.empty()) throw ConfigError("config.seeds: must not be empty");
    } else {
        f.get<int>("seeds", 0);
    }
    cfg.output_dir = f.get<std::string>("output_dir", "");

    if (j.contains("diagnostics")) {
        Fields d(f.raw("diagnostics"), "diagnostics");
        cfg.diagnostics.cosine_reference = d.get<bool>("cosine_reference", false);
        cfg.diagnostics.spectral_every = d.get<Index>("spectral_every", 0);
        cfg.diagnostics.jacobian_dump = d.get<bool>("jacobian_dump", false);
        cfg.diagnostics.window = d.get<Index>("window", kDefaultWindow);
        d.finish();
        if (cfg.diagnostics.window < 1) throw ConfigError("diagnostics.window: must be positive");
        if (cfg.diagnostics.spectral_every < 0)
            throw ConfigError("diagnostics.spectral_every: must be non-negative");
        if (cfg.model.kind == "lstm" && (cfg.diagnostics.cosine_reference || cfg.diagnostics.jacobian_dump))
            throw ConfigError("diagnostics: cosine_reference and jacobian_dump need the rnn model");
    }
    const int jobs = f.get<int>("jobs", 1);
    if (jobs < 1) throw ConfigError("config.jobs: must be at least 1");
    cfg.jobs = static_cast<unsigned>(jobs);
    f.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    json engines_j = json::array();
    for (const auto& e : engines) {
        json ej = {{"variant", std::string(to_string(e.spec.kind))}};
        if (e.spec.kind == EngineKind::sparse_rtrl) {
            ej["k"] = e.spec.k;
            ej["strategy"] = std::string(to_string(e.spec.strategy));
        }
        if (e.spec.kind == EngineKind::traces) ej["lambda"] = e.spec.lambda;
        if (e.spec.kind == EngineKind::tbptt) ej["window"] = e.spec.window;
        if (e.freeze_after_shift) ej["freeze_after_shift"] = true;
        engines_j.push_back(ej);
    }
    json opt = {{"kind", optimizer.kind}};
    if (optimizer.kind == "adam") {
        opt["lr"] = optimizer.adam.lr;
        opt["beta1"] = optimizer.adam.beta1;
        opt["beta2"] = optimizer.adam.beta2;
        opt["eps"] = optimizer.adam.eps;
    } else {
        opt["lr"] = optimizer.sgd_lr;
    }
    json task_j = task.params;
    task_j["kind"] = task.kind;
    return {
        {"version", kConfigVersion},
        {"name", name},
        {"task", task_j},
        {"model", {{"kind", model.kind}, {"n", model.n}}},
        {"engines", engines_j},
        {"optimizer", opt},
        {"seeds", seeds},
        {"output_dir", output_dir.string()},
        {"diagnostics",
         {{"cosine_reference", diagnostics.cosine_reference},
          {"spectral_every", diagnostics.spectral_every},
          {"jacobian_dump", diagnostics.jacobian_dump},
          {"window", diagnostics.window}}},
        {"jobs", jobs},
    };
}

SweepParam parse_sweep_param(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
        throw ConfigError("--param: expected key=v1,v2,...");
    SweepParam p{text.substr(0, eq), {}};
    static const std::set<std::string> keys{"k", "strategy", "lambda", "window", "lr", "n"};
    if (!keys.count(p.key)) throw ConfigError("--param: unknown sweep key '" + p.key + "'");
    std::istringstream is(text.substr(eq + 1));
    std::string v;
    while (std::getline(is, v, ','))
        if (!v.empty()) p.values.push_back(v);
    if (p.values.empty()) throw ConfigError("--param: no values for '" + p.key + "'");
    return p;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg,
                                           const std::vector<SweepParam>& params) {
    std::vector<json> configs{cfg.to_json()};
    for (const auto& p : params) {
        std::vector<json> next;
        for (const auto& base : configs) {
            if (p.key == "lr" || p.key == "n") {
                for (const auto& v : p.values) {
                    json c = base;
                    if (p.key == "lr") c["optimizer"]["lr"] = std::stod(v);
                    else c["model"]["n"] = std::stoll(v);
                    next.push_back(c);
                }
                continue;
            }
            json c = base;
            json engines = json::array();
            for (const auto& e : base["engines"]) {
                const std::string variant = e["variant"];
                const bool applies = (p.key == "k" || p.key == "strategy") ? variant == "sparse-rtrl"
                                     : p.key == "lambda"                      ? variant == "traces"
                                                                              : variant == "tbptt";
                if (!applies) {
                    engines.push_back(e);
                    continue;
                }
                for (const auto& v : p.values) {
                    json ev = e;
                    if (p.key == "strategy") ev[p.key] = v;
                    else if (p.key == "lambda") ev[p.key] = std::stod(v);
                    else ev[p.key] = std::stoll(v);
                    engines.push_back(ev);
                }
            }
            c["engines"] = engines;
            next.push_back(c);
        }
        configs = std::move(next);
    }
    std::vector<ExperimentConfig> out;
    for (const auto& c : configs) out.push_back(parse_config(c));
    return out;
}

}  // namespace srtrl
