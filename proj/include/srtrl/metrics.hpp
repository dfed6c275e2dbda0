#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "srtrl/engines.hpp"
#include "srtrl/tensor_core.hpp"
#include "srtrl/types.hpp"

namespace srtrl {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr Index kDefaultWindow = 200;
/// Condition numbers above this are reported as ill-conditioned.
inline constexpr double kCondSentinel = 1e12;

struct StepLog {
    Step t = 0;
    double loss = kNaN;
    bool loss_active = false;
    double cos_ref = kNaN;    // cosine to the shadow full-RTRL gradient
    double grad_norm = kNaN;  // norm of the applied gradient
};

struct SpectralSnapshot {
    Step t = 0;
    Vec singular_values;
    Index r95 = 0;
    double cond = kNaN;  // +inf when ill-conditioned
    bool ill_conditioned = false;
};

/// Everything one (task, engine, seed) run produced.
struct RunRecord {
    std::string task;
    std::string engine;
    std::uint64_t seed = 0;
    std::vector<StepLog> log;
    std::vector<Step> shift_points;
    Step length = 0;
    bool diverged = false;
    Step diverged_step = -1;
    std::string diverged_reason;
    std::vector<SpectralSnapshot> spectra;
    std::vector<double> magnitude_ratio;   // |g| / |g_ref| per step when cosine is on
    std::vector<int> correct;              // per loss-active step, classification only
    std::vector<std::pair<Step, JacobianState>> jacobians;  // only when dumps are requested
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json metadata = nlohmann::json::object();
};

/// Mean loss over the last `window_len` loss-active steps with t < window_end.
/// Throws UndefinedGapError when no step qualifies.
double windowed_mse(const RunRecord& record, Step window_end, Index window_len = kDefaultWindow);

/// Same over a bare log.
double windowed_mean(std::span<const StepLog> log, Step window_end, Index window_len);

/// Log-scale gap recovery in percent:
/// (log mse_0 - log mse_k) / (log mse_0 - log mse_n) * 100.
double gap_recovery(double mse_0, double mse_k, double mse_n);

/// Share of the drift-induced degradation recovered, in percent:
/// (frozen_B - method_B) / (frozen_B - frozen_A) * 100.
double bci_recovery(double mse_frozen_b, double mse_method_b, double mse_frozen_a);

struct CosineResult {
    double cosine = kNaN;
    double magnitude_ratio = kNaN;  // |g1| / |g2|
};

/// Cosine over the flattened recurrent block. NaN when either side is zero.
CosineResult gradient_cosine(const ParamGradient& g1, const ParamGradient& g2);
CosineResult vector_cosine(const Vec& a, const Vec& b);

/// Singular values of the j_whh block (n, n²); r95 is the smallest r whose
/// leading squared singular values hold 95% of the total; cond = s_1 / s_n.
/// Throws UndefinedGapError for an all-zero Jacobian.
SpectralSnapshot spectral_analysis(const JacobianState& j);
SpectralSnapshot spectral_analysis(const RowMat& block);

struct Dispersion {
    double mean = kNaN;
    std::optional<double> sd;  // sample sd (ddof = 1); undefined for one value
    std::optional<double> cv;  // sd / |mean|
};

Dispersion seed_dispersion(std::span<const double> values);

/// Window-derived summary of a run.
struct RunSummary {
    std::optional<double> pre_shift_mse;
    std::vector<std::optional<double>> post_shift_mse;  // one per shift point
    std::optional<double> final_mse;
    std::optional<double> accuracy;
    std::optional<double> cos_pre;
    std::optional<double> cos_post;
    std::optional<double> magnitude_ratio_median;
};

RunSummary summarize(const RunRecord& record, Index window_len = kDefaultWindow);

/// `t,loss,loss_active,cos_ref,grad_norm`; absent values are empty fields.
void write_step_log_csv(std::ostream& os, const RunRecord& record);
std::vector<StepLog> read_step_log_csv(std::istream& is);

nlohmann::json summary_json(const RunRecord& record, Index window_len = kDefaultWindow);

}  // namespace srtrl
