#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

#include "srtrl/rng.hpp"
#include "srtrl/tensor_core.hpp"
#include "srtrl/types.hpp"

namespace srtrl {

/// Gate order used in parameter layout, checkpoints and Jacobian columns.
enum class Gate : int { input = 0, forget = 1, cell = 2, output = 3 };
inline constexpr int kGateCount = 4;

/// LSTM without peepholes. Each gate acts on z = [h_prev; x]:
/// i, f, o = sigmoid(W z + b), g = tanh(W_g z + b_g),
/// c = f ⊙ c_prev + i ⊙ g, h = o ⊙ tanh(c).
struct LstmParams {
    std::array<RowMat, kGateCount> w;  // each (n, n + m)
    std::array<Vec, kGateCount> b;     // each (n)
    RowMat w_out;                      // (o, n)
    Vec b_out;                         // (o)

    Index n() const { return w[0].rows(); }
    Index m() const { return w[0].cols() - w[0].rows(); }
    Index o() const { return w_out.rows(); }

    /// Recurrent parameters per gate: W_g row-major, then b_g.
    Index gate_param_count() const { return n() * (n() + m() + 1); }
    Index recurrent_size() const { return kGateCount * gate_param_count(); }
    Index size() const { return recurrent_size() + o() * n() + o(); }

    static LstmParams zeros(Index n, Index m, Index o);
    /// Gate weights ~ N(0, 1/(n+m)), W_out ~ N(0, 1/n), biases zero.
    static LstmParams init(Index n, Index m, Index o, Rng& rng);

    Vec flat() const;
    void set_flat(const Vec& theta);
    bool all_finite() const;
};

struct LstmForward {
    Vec i, f, g, o;  // gate activations
    Vec c;
    Vec h;
    Vec y;
};

LstmForward lstm_forward(const LstmParams& p, const Vec& h_prev, const Vec& c_prev, const Vec& x);

/// Sensitivities of h and c to every recurrent LSTM parameter, (n, P) each.
struct LstmJacobianState {
    RowMat jh;
    RowMat jc;

    LstmJacobianState() = default;
    LstmJacobianState(Index n, Index p) : jh(RowMat::Zero(n, p)), jc(RowMat::Zero(n, p)) {}
    bool all_finite() const { return jh.allFinite() && jc.allFinite(); }
};

/// Reusable per-step buffers for lstm_rtrl_step_into.
struct LstmScratch {
    std::array<Mat, kGateCount> w_hh;   // recurrent slices W_g[:, :n]
    std::array<RowMat, kGateCount> da;  // d a_g / d theta
};

/// One forward-mode step. The mask gates only the W_g,hh · J^h_{t-1}
/// contractions; the diagonal cell path f ⊙ J^c_{t-1} and every immediate
/// derivative are exact.
void lstm_rtrl_step_into(const LstmJacobianState& prev, const LstmParams& p,
                         const PropagationMask& mask, const Vec& h_prev, const Vec& c_prev,
                         const Vec& x, const LstmForward& fwd, LstmJacobianState& out,
                         LstmScratch& scratch, Step step = -1);

LstmJacobianState lstm_rtrl_step(const LstmJacobianState& prev, const LstmParams& p,
                                 const PropagationMask& mask, const Vec& h_prev, const Vec& c_prev,
                                 const Vec& x, const LstmForward& fwd, Step step = -1);

/// Checkpoint header {"model":"lstm","n","m","o","seed","gates":["input","forget","cell","output"]}
/// followed by flat little-endian float64 parameters.
void write_lstm_checkpoint(std::ostream& os, const LstmParams& p, std::uint64_t seed);
LstmParams read_lstm_checkpoint(std::istream& is, std::uint64_t* seed = nullptr);

}  // namespace srtrl
