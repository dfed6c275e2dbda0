#pragma once

#include <cstdint>
#include <iosfwd>

#include "srtrl/rng.hpp"
#include "srtrl/tensor_core.hpp"
#include "srtrl/types.hpp"

namespace srtrl {

/// Vanilla tanh RNN with a linear readout. Weight matrices are row-major so
/// that their flat views match the Jacobian's column layout.
struct RnnParams {
    RowMat w_hh;   // (n, n)
    RowMat w_ih;   // (n, m)
    Vec b_h;       // (n)
    RowMat w_out;  // (o, n)
    Vec b_out;     // (o)

    Index n() const { return w_hh.rows(); }
    Index m() const { return w_ih.cols(); }
    Index o() const { return w_out.rows(); }

    static RnnParams zeros(Index n, Index m, Index o);
    /// W_hh ~ N(0, 1/n), W_ih ~ N(0, 1/m), W_out ~ N(0, 1/n), biases zero.
    static RnnParams init(Index n, Index m, Index o, Rng& rng);

    /// Recurrent parameters flattened in Jacobian column order.
    Vec recurrent_flat() const;
    /// Recurrent block followed by W_out (row-major) and b_out.
    Vec flat() const;
    void set_flat(const Vec& theta);
    Index size() const { return rnn_param_count(n(), m()) + o() * n() + o(); }

    bool all_finite() const;
    void validate() const;
};

struct RnnForward {
    Vec h;
    Vec y;
    Vec pre;
};

/// h = tanh(W_hh h_prev + W_ih x + b_h), y = W_out h + b_out.
RnnForward rnn_forward(const RnnParams& p, const Vec& h_prev, const Vec& x);

/// d = 1 - h², B_t carried as (h_prev, x).
ImmediateDerivs immediate_derivs(const Vec& h, const Vec& h_prev, const Vec& x);

/// Checkpoint: one line of JSON header {"model":"rnn","n","m","o","seed"},
/// then the flat parameter vector as little-endian float64 in field order
/// w_hh, w_ih, b_h, w_out, b_out.
void write_rnn_checkpoint(std::ostream& os, const RnnParams& p, std::uint64_t seed);
RnnParams read_rnn_checkpoint(std::istream& is, std::uint64_t* seed = nullptr);

}  // namespace srtrl
