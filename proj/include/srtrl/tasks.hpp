#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "srtrl/rng.hpp"
#include "srtrl/types.hpp"

namespace srtrl {

enum class LossKind { mse, cross_entropy };

struct StreamStep {
    Vec x;
    Vec target;            // regression target (empty for classification)
    int target_class = -1;  // classification target, -1 if regression
    bool loss_active = true;
};

/// A fully materialised online stream with declared distribution shifts.
struct StreamTask {
    std::string name;
    std::vector<StreamStep> steps;
    std::vector<Step> shift_points;
    Index input_dim = 0;
    Index output_dim = 0;
    LossKind loss = LossKind::mse;
    nlohmann::json metadata = nlohmann::json::object();

    Step length() const { return static_cast<Step>(steps.size()); }
};

/// Next-step prediction of a phase-continuous sine: s_t = sin(phi_t), phi
/// advancing by f1 per step before `shift` and by f2 from then on.
/// x_t = s_t, target_t = s_{t+1}.
StreamTask sine_shift(Step length = 2000, Step shift = 1000, double f1 = 0.1, double f2 = 0.3);

/// Piecewise-frequency sine with equal-length regimes.
StreamTask multi_sine(std::vector<double> frequencies = {0.1, 0.3, 0.05, 0.2}, Step length = 4000);

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
};

using Vec3 = std::array<double, 3>;

Vec3 lorenz_derivative(const Vec3& s, const LorenzParams& p);
Vec3 rk4_step(const Vec3& s, double dt, const LorenzParams& p);

/// Lorenz trajectory integrated with RK4, rho switching at `shift`. States
/// are z-scored per dimension with the pre-shift trajectory statistics; x_t
/// is the state at t, target the state at t+1. The integration starts at
/// (1, 1, 1) and discards `burn_in` steps.
StreamTask lorenz_stream(Step length = 4000, Step shift = 2000, double rho1 = 28.0,
                         double rho2 = 20.0, double dt = 0.01, Step burn_in = 1000);

/// Continuous stream of copy episodes. Each episode shows `symbols` one-hot
/// tokens, then `delay` blank steps, then `symbols` recall steps on which the
/// network must emit the shown tokens in order. Input width is alphabet + 2
/// (blank, recall marker); loss is cross-entropy on recall steps only.
StreamTask copy_task(Index episodes, Index delay = 5, Index alphabet = 8, Index symbols = 5,
                     std::uint64_t seed = 0);

/// Adding problem, streamed sequence after sequence. x_t = (value ~ U(0,1),
/// marker); one marker in each half of the sequence; the target (sum of the
/// two marked values) is scored on the final step only.
StreamTask adding_problem(Index sequences, Index seq_length = 50, std::uint64_t seed = 0);

struct CsvPreprocess {
    std::optional<Index> pca_components;  // fit on rows before split_step
    bool zscore_inputs = false;           // after PCA, with pre-split statistics
    bool zscore_targets = false;
};

/// Fitted transform; everything is estimated on the pre-split block and then
/// applied unchanged to the whole stream.
struct CsvTransform {
    Vec input_mean;
    Mat components;          // (input_dim, kept) PCA basis, empty if no PCA
    Vec explained_variance_ratio;
    Vec z_mean, z_sd;        // input z-score after projection
    Vec target_mean, target_sd;
};

struct CsvTable {
    std::vector<std::string> header;
    Mat rows;
};

CsvTable read_csv(const std::filesystem::path& path);

StreamTask csv_stream(const std::filesystem::path& path, const std::vector<std::string>& input_cols,
                      const std::vector<std::string>& target_cols, Step split_step,
                      const CsvPreprocess& pre = {}, CsvTransform* fitted = nullptr);

/// Column-wise z-score statistics with sample standard deviation (ddof = 1).
void column_stats(const Mat& block, Vec& mean, Vec& sd);

}  // namespace srtrl
