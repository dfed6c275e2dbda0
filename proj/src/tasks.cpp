#include "srtrl/tasks.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "srtrl/errors.hpp"

namespace srtrl {

namespace {

Vec scalar(double v) {
    Vec out(1);
    out[0] = v;
    return out;
}

Vec to_vec(const Vec3& s) {
    Vec out(3);
    out << s[0], s[1], s[2];
    return out;
}

}  // namespace

StreamTask sine_shift(Step length, Step shift, double f1, double f2) {
    if (length <= 0 || shift <= 0 || shift >= length)
        throw ContractViolation("sine_shift: need 0 < shift < length");
    StreamTask task;
    task.name = "sine";
    task.input_dim = 1;
    task.output_dim = 1;
    task.shift_points = {shift};
    // Closed-form phase; summing increments would drift by ~1e-12 over 1000 steps.
    std::vector<double> s(static_cast<std::size_t>(length + 1));
    for (Step t = 0; t <= length; ++t) {
        const double phase = t <= shift ? f1 * static_cast<double>(t)
                                        : f1 * static_cast<double>(shift) + f2 * static_cast<double>(t - shift);
        s[static_cast<std::size_t>(t)] = std::sin(phase);
    }
    for (Step t = 0; t < length; ++t)
        task.steps.push_back({scalar(s[t]), scalar(s[t + 1]), -1, true});
    task.metadata = {{"task", "sine_shift"}, {"length", length}, {"shift", shift},
                     {"f1", f1},         {"f2", f2},          {"phase_continuous", true},
                     {"input", "x_t = s_t, target = s_{t+1}"}};
    return task;
}

StreamTask multi_sine(std::vector<double> frequencies, Step length) {
    const auto regimes = static_cast<Step>(frequencies.size());
    if (regimes < 1 || length < regimes) throw ContractViolation("multi_sine: bad regime layout");
    StreamTask task;
    task.name = "multisine";
    task.input_dim = 1;
    task.output_dim = 1;
    const Step regime_len = length / regimes;
    for (Step r = 1; r < regimes; ++r) task.shift_points.push_back(r * regime_len);
    std::vector<double> s(static_cast<std::size_t>(length + 1));
    double base = 0.0;  // phase at the start of the current regime
    Step start = 0;
    for (Step t = 0; t <= length; ++t) {
        const Step r = std::min(t / regime_len, regimes - 1);
        if (r > 0 && t == r * regime_len) {
            base += frequencies[static_cast<std::size_t>(r - 1)] * static_cast<double>(t - start);
            start = t;
        }
        s[static_cast<std::size_t>(t)] =
            std::sin(base + frequencies[static_cast<std::size_t>(r)] * static_cast<double>(t - start));
    }
    for (Step t = 0; t < length; ++t)
        task.steps.push_back({scalar(s[t]), scalar(s[t + 1]), -1, true});
    task.metadata = {{"task", "multi_sine"}, {"length", length}, {"frequencies", frequencies},
                     {"shift_points", task.shift_points}, {"phase_continuous", true}};
    return task;
}

Vec3 lorenz_derivative(const Vec3& s, const LorenzParams& p) {
    return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1], s[0] * s[1] - p.beta * s[2]};
}

Vec3 rk4_step(const Vec3& s, double dt, const LorenzParams& p) {
    auto axpy = [](const Vec3& a, double h, const Vec3& b) {
        return Vec3{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]};
    };
    const Vec3 k1 = lorenz_derivative(s, p);
    const Vec3 k2 = lorenz_derivative(axpy(s, dt / 2, k1), p);
    const Vec3 k3 = lorenz_derivative(axpy(s, dt / 2, k2), p);
    const Vec3 k4 = lorenz_derivative(axpy(s, dt, k3), p);
    Vec3 out{};
    for (int d = 0; d < 3; ++d) out[d] = s[d] + dt / 6.0 * (k1[d] + 2 * k2[d] + 2 * k3[d] + k4[d]);
    return out;
}

StreamTask lorenz_stream(Step length, Step shift, double rho1, double rho2, double dt, Step burn_in) {
    if (length <= 0 || shift <= 0 || shift >= length)
        throw ContractViolation("lorenz_stream: need 0 < shift < length");
    LorenzParams p;
    p.rho = rho1;
    Vec3 s{1.0, 1.0, 1.0};
    for (Step t = 0; t < burn_in; ++t) s = rk4_step(s, dt, p);

    std::vector<Vec3> traj(static_cast<std::size_t>(length + 1));
    traj[0] = s;
    for (Step t = 1; t <= length; ++t) {
        p.rho = t <= shift ? rho1 : rho2;
        traj[static_cast<std::size_t>(t)] = rk4_step(traj[static_cast<std::size_t>(t - 1)], dt, p);
    }

    Mat pre(shift, 3);
    for (Step t = 0; t < shift; ++t)
        for (int d = 0; d < 3; ++d) pre(t, d) = traj[static_cast<std::size_t>(t)][d];
    Vec mean, sd;
    column_stats(pre, mean, sd);

    StreamTask task;
    task.name = "lorenz";
    task.input_dim = 3;
    task.output_dim = 3;
    task.shift_points = {shift};
    auto norm = [&](const Vec3& v) { return Vec((to_vec(v) - mean).cwiseQuotient(sd)); };
    for (Step t = 0; t < length; ++t)
        task.steps.push_back({norm(traj[static_cast<std::size_t>(t)]),
                              norm(traj[static_cast<std::size_t>(t + 1)]), -1, true});
    task.metadata = {{"task", "lorenz"},
                     {"length", length},
                     {"shift", shift},
                     {"rho1", rho1},
                     {"rho2", rho2},
                     {"sigma", 10.0},
                     {"beta", 8.0 / 3.0},
                     {"dt", dt},
                     {"integrator", "rk4"},
                     {"initial_state", {1.0, 1.0, 1.0}},
                     {"burn_in", burn_in},
                     {"normalization", "z-score with pre-shift trajectory statistics (ddof=1)"},
                     {"mean", {mean[0], mean[1], mean[2]}},
                     {"sd", {sd[0], sd[1], sd[2]}}};
    return task;
}

StreamTask copy_task(Index episodes, Index delay, Index alphabet, Index symbols, std::uint64_t seed) {
    if (episodes < 1 || delay < 0 || alphabet < 1 || symbols < 1)
        throw ContractViolation("copy_task: bad layout");
    Rng rng = make_rng(seed, RngStream::task);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(alphabet) - 1);
    const Index width = alphabet + 2;
    const Index blank = alphabet;
    const Index recall = alphabet + 1;

    StreamTask task;
    task.name = "copy";
    task.input_dim = width;
    task.output_dim = alphabet;
    task.loss = LossKind::cross_entropy;
    auto onehot = [&](Index at) {
        Vec v = Vec::Zero(width);
        v[at] = 1.0;
        return v;
    };
    for (Index e = 0; e < episodes; ++e) {
        std::vector<int> shown(static_cast<std::size_t>(symbols));
        for (auto& s : shown) s = pick(rng);
        for (int s : shown) task.steps.push_back({onehot(s), Vec(), -1, false});
        for (Index d = 0; d < delay; ++d) task.steps.push_back({onehot(blank), Vec(), -1, false});
        for (int s : shown) task.steps.push_back({onehot(recall), Vec(), s, true});
    }
    task.metadata = {{"task", "copy"},     {"episodes", episodes}, {"delay", delay},
                     {"alphabet", alphabet}, {"symbols", symbols},  {"episode_length", 2 * symbols + delay},
                     {"tokens", "one-hot symbols, then blank, then recall marker"}};
    return task;
}

StreamTask adding_problem(Index sequences, Index seq_length, std::uint64_t seed) {
    if (sequences < 1 || seq_length < 2) throw ContractViolation("adding_problem: bad layout");
    Rng rng = make_rng(seed, RngStream::task);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Index half = seq_length / 2;
    std::uniform_int_distribution<Index> first(0, half - 1);
    std::uniform_int_distribution<Index> second(half, seq_length - 1);

    StreamTask task;
    task.name = "adding";
    task.input_dim = 2;
    task.output_dim = 1;
    for (Index q = 0; q < sequences; ++q) {
        std::vector<double> values(static_cast<std::size_t>(seq_length));
        for (auto& v : values) v = unif(rng);
        const Index a = first(rng);
        const Index b = second(rng);
        const double sum = values[static_cast<std::size_t>(a)] + values[static_cast<std::size_t>(b)];
        for (Index t = 0; t < seq_length; ++t) {
            Vec x(2);
            x << values[static_cast<std::size_t>(t)], (t == a || t == b) ? 1.0 : 0.0;
            const bool last = t == seq_length - 1;
            task.steps.push_back({x, last ? scalar(sum) : scalar(0.0), -1, last});
        }
    }
    task.metadata = {{"task", "adding"},
                     {"sequences", sequences},
                     {"seq_length", seq_length},
                     {"markers", "one uniformly in each half"}};
    return task;
}

void column_stats(const Mat& block, Vec& mean, Vec& sd) {
    if (block.rows() < 2) throw ContractViolation("column_stats: need at least two rows");
    mean = block.colwise().mean().transpose();
    const Mat centered = block.rowwise() - mean.transpose();
    sd = (centered.colwise().squaredNorm().transpose() / static_cast<double>(block.rows() - 1))
             .cwiseSqrt();
    for (Index c = 0; c < sd.size(); ++c)
        if (sd[c] == 0.0) sd[c] = 1.0;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t lead = 0;
        while (lead < cell.size() && cell[lead] == ' ') ++lead;
        out.push_back(cell.substr(lead));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path.string(), 0);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("missing header", 0);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    table.header = split_csv_line(line);
    std::vector<std::vector<double>> rows;
    Index row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != table.header.size())
            throw IngestionError("expected " + std::to_string(table.header.size()) + " fields, got " +
                                     std::to_string(cells.size()),
                                 row);
        std::vector<double> values;
        for (const auto& c : cells) {
            double v = 0.0;
            const auto* end = c.data() + c.size();
            auto [ptr, ec] = std::from_chars(c.data(), end, v);
            if (ec != std::errc() || ptr != end || c.empty())
                throw IngestionError("non-numeric field '" + c + "'", row);
            values.push_back(v);
        }
        rows.push_back(std::move(values));
    }
    table.rows.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.rows(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return table;
}

StreamTask csv_stream(const std::filesystem::path& path, const std::vector<std::string>& input_cols,
                      const std::vector<std::string>& target_cols, Step split_step,
                      const CsvPreprocess& pre, CsvTransform* fitted) {
    const CsvTable table = read_csv(path);
    auto column = [&](const std::string& name) {
        for (std::size_t c = 0; c < table.header.size(); ++c)
            if (table.header[c] == name) return static_cast<Index>(c);
        throw IngestionError("unknown column '" + name + "'", 0);
    };
    const Index rows = table.rows.rows();
    if (input_cols.empty() || target_cols.empty())
        throw ContractViolation("csv_stream: need input and target columns");
    if (split_step < 0 || split_step > rows) throw ContractViolation("csv_stream: split_step out of range");

    Mat inputs(rows, static_cast<Index>(input_cols.size()));
    Mat targets(rows, static_cast<Index>(target_cols.size()));
    for (std::size_t c = 0; c < input_cols.size(); ++c)
        inputs.col(static_cast<Index>(c)) = table.rows.col(column(input_cols[c]));
    for (std::size_t c = 0; c < target_cols.size(); ++c)
        targets.col(static_cast<Index>(c)) = table.rows.col(column(target_cols[c]));

    const bool needs_fit = pre.pca_components || pre.zscore_inputs || pre.zscore_targets;
    if (needs_fit && split_step < 2)
        throw ContractViolation("csv_stream: preprocessing needs at least two pre-split rows");

    CsvTransform tf;
    if (pre.pca_components) {
        const Index keep = *pre.pca_components;
        if (keep < 1 || keep > inputs.cols()) throw ContractViolation("csv_stream: bad PCA component count");
        const Mat fit = inputs.topRows(split_step);
        tf.input_mean = fit.colwise().mean().transpose();
        const Mat centered = fit.rowwise() - tf.input_mean.transpose();
        const Mat cov = centered.transpose() * centered / static_cast<double>(split_step - 1);
        Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
        // Eigen sorts ascending; take the trailing columns in descending order.
        tf.components = eig.eigenvectors().rightCols(keep).rowwise().reverse();
        const Vec ev = eig.eigenvalues().cwiseMax(0.0);
        const double total = ev.sum();
        tf.explained_variance_ratio = ev.tail(keep).reverse() / (total > 0.0 ? total : 1.0);
        inputs = (inputs.rowwise() - tf.input_mean.transpose()) * tf.components;
    }
    if (pre.zscore_inputs) {
        column_stats(inputs.topRows(split_step), tf.z_mean, tf.z_sd);
        inputs = (inputs.rowwise() - tf.z_mean.transpose()).array().rowwise() / tf.z_sd.transpose().array();
    }
    if (pre.zscore_targets) {
        column_stats(targets.topRows(split_step), tf.target_mean, tf.target_sd);
        targets = (targets.rowwise() - tf.target_mean.transpose()).array().rowwise() /
                  tf.target_sd.transpose().array();
    }

    StreamTask task;
    task.name = path.stem().string();
    task.input_dim = inputs.cols();
    task.output_dim = targets.cols();
    if (split_step > 0 && split_step < rows) task.shift_points = {split_step};
    for (Index r = 0; r < rows; ++r)
        task.steps.push_back({inputs.row(r).transpose(), targets.row(r).transpose(), -1, true});
    task.metadata = {{"task", "csv"},
                     {"path", path.string()},
                     {"input_cols", input_cols},
                     {"target_cols", target_cols},
                     {"split_step", split_step},
                     {"pca_components", pre.pca_components ? nlohmann::json(*pre.pca_components)
                                                           : nlohmann::json(nullptr)},
                     {"zscore_inputs", pre.zscore_inputs},
                     {"zscore_targets", pre.zscore_targets},
                     {"fit_block", "rows before split_step; applied unchanged afterwards"}};
    if (fitted) *fitted = std::move(tf);
    return task;
}

}  // namespace srtrl
