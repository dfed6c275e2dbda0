#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>

#include "srtrl/lstm.hpp"
#include "srtrl/rng.hpp"
#include "srtrl/rnn.hpp"
#include "srtrl/selection.hpp"
#include "srtrl/tensor_core.hpp"

namespace srtrl {

/// Gradient over the recurrent block plus the readout, in the same order as
/// the model's flat parameter vector.
struct ParamGradient {
    Vec recurrent;
    RowMat w_out;
    Vec b_out;

    Vec flat() const;
    double norm() const;

    static ParamGradient zeros(Index recurrent_size, Index o, Index n);
};

/// dL/dtheta = (dL/dy · W_out) J for the recurrent block; the readout
/// gradient (dL/dy ⊗ h, dL/dy) is exact and local.
ParamGradient assemble_gradient(const Vec& dl_dy, const RowMat& w_out, const Vec& h,
                                const RowMat& j);

/// J~_t = lambda D_t J~_{t-1} + D_t B_t; lambda = 0 drops the history term.
void traces_step_into(const RowMat& prev, const ImmediateDerivs& b, double lambda, RowMat& out);
RowMat traces_step(const RowMat& prev, const ImmediateDerivs& b, double lambda);

/// Rank-1 factors of the UORO estimate J ≈ s aᵀ.
struct UoroState {
    Vec s;  // (n)
    Vec a;  // (P)

    static UoroState zeros(Index n, Index p) { return {Vec::Zero(n), Vec::Zero(p)}; }
    RowMat estimate() const { return s * a.transpose(); }
};

inline constexpr double kUoroEps = 1e-7;

/// One UORO update with a Rademacher probe nu:
///   s' = rho0 (D W_hh s) + rho1 nu,   a' = a / rho0 + (nuᵀ D B) / rho1,
/// rho0 = sqrt((|a| + eps) / (|D W_hh s| + eps)),
/// rho1 = sqrt((|nuᵀ D B| + eps) / (|nu| + eps)).
/// A probe term that is exactly zero is dropped from both factors.
UoroState uoro_step(const UoroState& state, const Mat& w_hh, const ImmediateDerivs& b, Rng& rng,
                    Step step = -1);

struct RnnTransition {
    Vec h_prev;
    Vec x;
    Vec h;
};

/// Reverse-mode gradient of the current loss through the stored transitions
/// (oldest first, the last one is the current step), using the current
/// parameters.
ParamGradient tbptt_grad(std::span<const RnnTransition> window, const RnnParams& p,
                         const Vec& dl_dy);

enum class EngineKind { full_rtrl, sparse_rtrl, traces, uoro, tbptt };

std::string_view to_string(EngineKind k);
EngineKind parse_engine_kind(std::string_view name);

struct EngineSpec {
    EngineKind kind = EngineKind::full_rtrl;
    Index k = 0;                       // sparse-rtrl
    Strategy strategy = Strategy::ring;  // sparse-rtrl
    double lambda = 0.0;               // traces
    Index window = 1;                  // tbptt

    /// Stable identifier used in file names, e.g. "sparse-rtrl-k4-ring".
    std::string label() const;
};

/// Uniform online interface over every gradient method for the vanilla RNN.
class RnnGradientEngine {
public:
    RnnGradientEngine(const EngineSpec& spec, Index n, Index m, Rng mask_rng, Rng uoro_rng);

    void reset();

    /// Advances the sensitivity state with the transition the forward pass
    /// just produced under parameters `p`.
    void observe(const RnnParams& p, const Vec& h_prev, const Vec& x, const Vec& h, Step t);

    /// Gradient of the current-step loss given dL/dy.
    ParamGradient gradient(const RnnParams& p, const Vec& dl_dy, const Vec& h) const;

    /// Exact or masked sensitivity (RTRL variants and traces), else null.
    const RowMat* sensitivity() const;
    const JacobianState* jacobian() const;
    const PropagationMask* mask() const;
    const EngineSpec& spec() const { return spec_; }

private:
    EngineSpec spec_;
    Index n_;
    Index m_;
    std::optional<MaskSelector> selector_;
    JacobianState j_;
    JacobianState scratch_;
    UoroState uoro_;
    Rng uoro_rng_;
    std::deque<RnnTransition> buffer_;
};

/// Forward-mode engine for the LSTM: full, sparse, or traces (k = 0).
class LstmGradientEngine {
public:
    LstmGradientEngine(const EngineSpec& spec, Index n, Index m, Rng mask_rng);

    void reset();
    void observe(const LstmParams& p, const Vec& h_prev, const Vec& c_prev, const Vec& x,
                 const LstmForward& fwd, Step t);
    ParamGradient gradient(const LstmParams& p, const Vec& dl_dy, const Vec& h) const;

    const LstmJacobianState& jacobian() const { return j_; }
    const PropagationMask& mask() const;
    const EngineSpec& spec() const { return spec_; }

private:
    EngineSpec spec_;
    Index n_;
    Index m_;
    MaskSelector selector_;
    LstmJacobianState j_;
    LstmJacobianState next_;
    LstmScratch scratch_;
};

}  // namespace srtrl
