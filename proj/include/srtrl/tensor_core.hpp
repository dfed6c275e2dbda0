#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "srtrl/types.hpp"

namespace srtrl {

/// Number of recurrent parameters of a vanilla RNN: W_hh, W_ih and b_h.
constexpr Index rnn_param_count(Index n, Index m) { return n * n + n * m + n; }

/// Forward-mode sensitivity of the hidden state to the recurrent parameters.
///
/// Stored as one row-major (n, P) matrix whose column blocks are the three
/// parameter groups in order: W_hh flattened row-major (column j*n+k is
/// W_hh[j,k]), W_ih flattened row-major, then b_h. Row i holds
/// d h^(i) / d theta.
class JacobianState {
public:
    JacobianState() = default;
    JacobianState(Index n, Index m);

    Index n() const { return n_; }
    Index m() const { return m_; }
    Index cols() const { return sens_.cols(); }

    RowMat& data() { return sens_; }
    const RowMat& data() const { return sens_; }

    auto whh() { return sens_.leftCols(n_ * n_); }
    auto whh() const { return sens_.leftCols(n_ * n_); }
    auto wih() { return sens_.middleCols(n_ * n_, n_ * m_); }
    auto wih() const { return sens_.middleCols(n_ * n_, n_ * m_); }
    auto bh() { return sens_.rightCols(n_); }
    auto bh() const { return sens_.rightCols(n_); }

    void set_zero() { sens_.setZero(); }
    bool all_finite() const { return sens_.allFinite(); }

private:
    Index n_ = 0;
    Index m_ = 0;
    RowMat sens_;
};

/// Binary (n, n) selection of which recurrent paths carry sensitivity.
/// Every row selects exactly k distinct columns; the supports are kept as
/// sorted index lists so contraction can gather instead of multiplying by
/// zero.
class PropagationMask {
public:
    PropagationMask() = default;
    /// `support` holds n rows of k column indices each.
    PropagationMask(Index n, std::vector<std::vector<Index>> support);

    static PropagationMask all_ones(Index n);
    static PropagationMask all_zeros(Index n);

    Index n() const { return n_; }
    Index k() const { return k_; }
    bool dense() const { return k_ == n_; }
    bool empty() const { return k_ == 0; }

    std::span<const Index> row(Index i) const {
        return {support_.data() + i * k_, static_cast<std::size_t>(k_)};
    }
    bool selects(Index i, Index l) const;

    /// Expanded 0/1 matrix.
    Mat matrix() const;
    std::vector<std::vector<Index>> rows() const;

    friend bool operator==(const PropagationMask&, const PropagationMask&) = default;

private:
    Index n_ = 0;
    Index k_ = 0;
    std::vector<Index> support_;  // n * k, row-major, sorted per row
};

/// out = (W ⊙ M) J. Rows outside the support are never touched, so the cost is
/// proportional to k·n·P. `step` tags a divergence error with the stream index.
void masked_contract_into(const Mat& w, const PropagationMask& mask, const RowMat& j,
                          RowMat& out, Step step = -1);

RowMat masked_contract(const Mat& w, const PropagationMask& mask, const RowMat& j,
                       Step step = -1);

/// Diagonal of D_t together with the compact form of B_t. Row i of the
/// expanded B_t is h_prev in the W_hh block of weight row i, x in the W_ih
/// block of weight row i, and 1 at bias i.
struct ImmediateDerivs {
    Vec d;
    Vec h_prev;
    Vec x;

    Index n() const { return d.size(); }
    Index m() const { return x.size(); }

    /// Dense (n, P) B_t. Intended for tests and diagnostics.
    RowMat expand_b() const;
};

/// Adds B_t into `j` in place (only the n·(n+m+1) structural nonzeros).
void add_immediate(RowMat& j, const ImmediateDerivs& b);

/// J_t = D_t ((W_hh ⊙ M) J_{t-1} + B_t). The same masked W_hh multiplies all
/// three parameter groups; B_t is never masked.
void rtrl_step_into(const JacobianState& prev, const Mat& w_hh, const PropagationMask& mask,
                    const ImmediateDerivs& b, JacobianState& out, Step step = -1);

JacobianState rtrl_step(const JacobianState& prev, const Mat& w_hh, const PropagationMask& mask,
                        const ImmediateDerivs& b, Step step = -1);

/// Binary snapshot: "JAC1", then n, m, step as little-endian int64, then the
/// j_whh, j_wih and j_bh blocks as row-major little-endian float64.
void write_jacobian_snapshot(std::ostream& os, const JacobianState& j, Step step);
JacobianState read_jacobian_snapshot(std::istream& is, Step* step = nullptr);

}  // namespace srtrl
