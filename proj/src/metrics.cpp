#include "srtrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/SVD>

#include "srtrl/errors.hpp"

namespace srtrl {

double windowed_mean(std::span<const StepLog> log, Step window_end, Index window_len) {
    if (window_len < 1) throw ContractViolation("windowed_mse: window_len must be positive");
    double sum = 0.0;
    Index count = 0;
    for (auto it = log.rbegin(); it != log.rend() && count < window_len; ++it) {
        if (it->t >= window_end || !it->loss_active) continue;
        sum += it->loss;
        ++count;
    }
    if (count == 0) throw UndefinedGapError("windowed_mse: no loss-active step in window");
    return sum / static_cast<double>(count);
}

double windowed_mse(const RunRecord& record, Step window_end, Index window_len) {
    if (record.diverged && record.diverged_step < window_end)
        throw UndefinedGapError("windowed_mse: run diverged before the window end");
    return windowed_mean(record.log, window_end, window_len);
}

double gap_recovery(double mse_0, double mse_k, double mse_n) {
    if (!(mse_0 > 0.0) || !(mse_k > 0.0) || !(mse_n > 0.0))
        throw UndefinedGapError("gap_recovery: MSE values must be positive");
    const double denom = std::log(mse_0) - std::log(mse_n);
    if (denom == 0.0 || !std::isfinite(denom)) throw UndefinedGapError("gap_recovery: degenerate gap");
    return (std::log(mse_0) - std::log(mse_k)) / denom * 100.0;
}

double bci_recovery(double mse_frozen_b, double mse_method_b, double mse_frozen_a) {
    const double denom = mse_frozen_b - mse_frozen_a;
    if (denom == 0.0 || !std::isfinite(denom)) throw UndefinedGapError("bci_recovery: degenerate gap");
    return (mse_frozen_b - mse_method_b) / denom * 100.0;
}

CosineResult vector_cosine(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ContractViolation("gradient_cosine: size mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    CosineResult r;
    if (nb > 0.0) r.magnitude_ratio = na / nb;
    if (na > 0.0 && nb > 0.0) r.cosine = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    return r;
}

CosineResult gradient_cosine(const ParamGradient& g1, const ParamGradient& g2) {
    return vector_cosine(g1.recurrent, g2.recurrent);
}

SpectralSnapshot spectral_analysis(const RowMat& block) {
    if (block.rows() == 0 || block.cols() < block.rows())
        throw ContractViolation("spectral_analysis: expected a wide (n, P) block");
    if (!block.allFinite()) throw ContractViolation("spectral_analysis: non-finite Jacobian");
    if (block.cwiseAbs().maxCoeff() == 0.0)
        throw UndefinedGapError("spectral_analysis: all-zero Jacobian has no spectrum");
    Eigen::BDCSVD<Mat> svd(Mat(block.transpose()));
    SpectralSnapshot s;
    s.singular_values = svd.singularValues();
    const Vec sq = s.singular_values.cwiseAbs2();
    const double total = sq.sum();
    double cum = 0.0;
    s.r95 = sq.size();
    for (Index r = 0; r < sq.size(); ++r) {
        cum += sq[r];
        if (cum >= 0.95 * total * (1.0 - 1e-12)) {
            s.r95 = r + 1;
            break;
        }
    }
    const double top = s.singular_values[0];
    const double bottom = s.singular_values[s.singular_values.size() - 1];
    if (bottom <= 0.0 || top / bottom > kCondSentinel) {
        s.ill_conditioned = true;
        s.cond = std::numeric_limits<double>::infinity();
    } else {
        s.cond = top / bottom;
    }
    return s;
}

SpectralSnapshot spectral_analysis(const JacobianState& j) { return spectral_analysis(RowMat(j.whh())); }

Dispersion seed_dispersion(std::span<const double> values) {
    if (values.empty()) throw ContractViolation("seed_dispersion: no values");
    Dispersion d;
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (*lo == *hi) d.mean = *lo;
        double ss = 0.0;
        for (double v : values) ss += (v - d.mean) * (v - d.mean);
        d.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        if (d.mean != 0.0) d.cv = *d.sd / std::abs(d.mean);
    }
    return d;
}

namespace {

std::optional<double> try_window(const RunRecord& r, Step end, Index len) {
    try {
        return windowed_mse(r, end, len);
    } catch (const UndefinedGapError&) {
        return std::nullopt;
    }
}

std::optional<double> mean_finite(const std::vector<StepLog>& log, Step from, Step to) {
    double sum = 0.0;
    Index count = 0;
    for (const auto& s : log) {
        if (s.t < from || s.t >= to || !std::isfinite(s.cos_ref)) continue;
        sum += s.cos_ref;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

nlohmann::json opt(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string fmt_double(double v) {
    if (!std::isfinite(v)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunSummary summarize(const RunRecord& record, Index window_len) {
    RunSummary s;
    const Step end = record.length;
    const auto& shifts = record.shift_points;
    if (!shifts.empty()) s.pre_shift_mse = try_window(record, shifts.front(), window_len);
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        const Step until = i + 1 < shifts.size() ? shifts[i + 1] : end;
        s.post_shift_mse.push_back(try_window(record, until, window_len));
    }
    s.final_mse = try_window(record, end, window_len);

    if (!record.correct.empty() && !(record.diverged)) {
        const auto take = std::min<std::size_t>(record.correct.size(), static_cast<std::size_t>(window_len));
        double hits = 0.0;
        for (std::size_t i = record.correct.size() - take; i < record.correct.size(); ++i)
            hits += record.correct[i];
        s.accuracy = hits / static_cast<double>(take);
    }

    const Step first_shift = shifts.empty() ? end : shifts.front();
    const Step post_end = shifts.size() > 1 ? shifts[1] : end;
    s.cos_pre = mean_finite(record.log, 0, first_shift);
    if (!shifts.empty()) s.cos_post = mean_finite(record.log, first_shift, post_end);

    std::vector<double> ratios;
    for (double r : record.magnitude_ratio)
        if (std::isfinite(r)) ratios.push_back(r);
    if (!ratios.empty()) {
        auto mid = ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2);
        std::nth_element(ratios.begin(), mid, ratios.end());
        s.magnitude_ratio_median = *mid;
    }
    return s;
}

void write_step_log_csv(std::ostream& os, const RunRecord& record) {
    os << "t,loss,loss_active,cos_ref,grad_norm\n";
    for (const auto& s : record.log) {
        os << s.t << ',' << fmt_double(s.loss) << ',' << (s.loss_active ? 1 : 0) << ','
           << fmt_double(s.cos_ref) << ',' << fmt_double(s.grad_norm) << '\n';
    }
}

std::vector<StepLog> read_step_log_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "t,loss,loss_active,cos_ref,grad_norm")
        throw IngestionError("step log: unexpected header", 0);
    std::vector<StepLog> out;
    Index row = 0;
    while (std::getline(is, line)) {
        ++row;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 5) throw IngestionError("step log: expected 5 fields", row);
        auto num = [&](const std::string& c) { return c.empty() ? kNaN : std::stod(c); };
        out.push_back({std::stoll(f[0]), num(f[1]), f[2] == "1", num(f[3]), num(f[4])});
    }
    return out;
}

nlohmann::json summary_json(const RunRecord& record, Index window_len) {
    const RunSummary s = summarize(record, window_len);
    nlohmann::json post = nlohmann::json::array();
    for (const auto& v : s.post_shift_mse) post.push_back(opt(v));
    nlohmann::json spectra = nlohmann::json::array();
    for (const auto& sp : record.spectra) {
        spectra.push_back({{"t", sp.t},
                           {"singular_values", std::vector<double>(sp.singular_values.begin(),
                                                                   sp.singular_values.end())},
                           {"r95", sp.r95},
                           {"cond", sp.ill_conditioned ? nlohmann::json(nullptr) : nlohmann::json(sp.cond)},
                           {"ill_conditioned", sp.ill_conditioned}});
    }
    nlohmann::json out = {
        {"task", record.task},
        {"engine", record.engine},
        {"seed", record.seed},
        {"length", record.length},
        {"shift_points", record.shift_points},
        {"window_len", window_len},
        {"pre_shift_mse", opt(s.pre_shift_mse)},
        {"post_shift_mse", post},
        {"final_mse", opt(s.final_mse)},
        {"accuracy", opt(s.accuracy)},
        {"cosine", {{"pre_shift_mean", opt(s.cos_pre)},
                    {"post_shift_mean", opt(s.cos_post)},
                    {"magnitude_ratio_median", opt(s.magnitude_ratio_median)}}},
        {"diverged", record.diverged},
        {"diverged_step", record.diverged ? nlohmann::json(record.diverged_step) : nlohmann::json(nullptr)},
        {"diverged_reason", record.diverged ? nlohmann::json(record.diverged_reason) : nlohmann::json(nullptr)},
        {"spectral", spectra},
        {"config", record.config},
        {"metadata", record.metadata},
    };
    return out;
}

}  // namespace srtrl
