#include "srtrl/tensor_core.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <istream>
#include <ostream>
#include <string>

#include "srtrl/errors.hpp"

namespace srtrl {

JacobianState::JacobianState(Index n, Index m)
    : n_(n), m_(m), sens_(RowMat::Zero(n, rnn_param_count(n, m))) {
    if (n <= 0 || m < 0) throw ContractViolation("JacobianState: n must be positive and m non-negative");
}

PropagationMask::PropagationMask(Index n, std::vector<std::vector<Index>> support) : n_(n) {
    if (static_cast<Index>(support.size()) != n)
        throw ContractViolation("PropagationMask: expected " + std::to_string(n) + " rows");
    k_ = n == 0 ? 0 : static_cast<Index>(support.front().size());
    if (k_ > n) throw ContractViolation("PropagationMask: k exceeds n");
    support_.reserve(static_cast<std::size_t>(n * k_));
    for (auto& row : support) {
        if (static_cast<Index>(row.size()) != k_)
            throw ContractViolation("PropagationMask: every row must select exactly k columns");
        std::sort(row.begin(), row.end());
        if (std::adjacent_find(row.begin(), row.end()) != row.end())
            throw ContractViolation("PropagationMask: duplicate column in a row");
        for (Index l : row) {
            if (l < 0 || l >= n) throw ContractViolation("PropagationMask: column index out of range");
            support_.push_back(l);
        }
    }
}

PropagationMask PropagationMask::all_ones(Index n) {
    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(n));
    for (auto& r : rows)
        for (Index l = 0; l < n; ++l) r.push_back(l);
    return PropagationMask(n, std::move(rows));
}

PropagationMask PropagationMask::all_zeros(Index n) {
    return PropagationMask(n, std::vector<std::vector<Index>>(static_cast<std::size_t>(n)));
}

bool PropagationMask::selects(Index i, Index l) const {
    auto r = row(i);
    return std::binary_search(r.begin(), r.end(), l);
}

Mat PropagationMask::matrix() const {
    Mat out = Mat::Zero(n_, n_);
    for (Index i = 0; i < n_; ++i)
        for (Index l : row(i)) out(i, l) = 1.0;
    return out;
}

std::vector<std::vector<Index>> PropagationMask::rows() const {
    std::vector<std::vector<Index>> out;
    out.reserve(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i) {
        auto r = row(i);
        out.emplace_back(r.begin(), r.end());
    }
    return out;
}

void masked_contract_into(const Mat& w, const PropagationMask& mask, const RowMat& j,
                          RowMat& out, Step step) {
    const Index n = w.rows();
    if (w.cols() != n || mask.n() != n || j.rows() != n)
        throw ContractViolation("masked_contract: shape mismatch");
    if (!w.allFinite() || !j.allFinite())
        throw DivergenceError("masked_contract: non-finite input", step);

    out.resize(n, j.cols());
    if (mask.dense()) {
        out.noalias() = w * j;
        return;
    }
    out.setZero();
    if (mask.empty()) return;
    for (Index i = 0; i < n; ++i) {
        auto dst = out.row(i);
        for (Index l : mask.row(i)) dst.noalias() += w(i, l) * j.row(l);
    }
}

RowMat masked_contract(const Mat& w, const PropagationMask& mask, const RowMat& j, Step step) {
    RowMat out;
    masked_contract_into(w, mask, j, out, step);
    return out;
}

RowMat ImmediateDerivs::expand_b() const {
    RowMat b = RowMat::Zero(n(), rnn_param_count(n(), m()));
    add_immediate(b, *this);
    return b;
}

void add_immediate(RowMat& j, const ImmediateDerivs& b) {
    const Index n = b.n();
    const Index m = b.m();
    if (b.h_prev.size() != n || j.rows() != n || j.cols() != rnn_param_count(n, m))
        throw ContractViolation("add_immediate: shape mismatch");
    const Index wih0 = n * n;
    const Index bh0 = n * n + n * m;
    for (Index i = 0; i < n; ++i) {
        j.row(i).segment(i * n, n) += b.h_prev.transpose();
        if (m > 0) j.row(i).segment(wih0 + i * m, m) += b.x.transpose();
        j(i, bh0 + i) += 1.0;
    }
}

void rtrl_step_into(const JacobianState& prev, const Mat& w_hh, const PropagationMask& mask,
                    const ImmediateDerivs& b, JacobianState& out, Step step) {
    if (prev.n() != b.n() || prev.m() != b.m())
        throw ContractViolation("rtrl_step: derivative shapes do not match the Jacobian");
    if (out.n() != prev.n() || out.m() != prev.m()) out = JacobianState(prev.n(), prev.m());
    masked_contract_into(w_hh, mask, prev.data(), out.data(), step);
    add_immediate(out.data(), b);
    out.data().array().colwise() *= b.d.array();
    if (!out.all_finite()) throw DivergenceError("rtrl_step: non-finite Jacobian", step);
}

JacobianState rtrl_step(const JacobianState& prev, const Mat& w_hh, const PropagationMask& mask,
                        const ImmediateDerivs& b, Step step) {
    JacobianState out(prev.n(), prev.m());
    rtrl_step_into(prev, w_hh, mask, b, out, step);
    return out;
}

namespace {

constexpr std::array<char, 4> kMagic{'J', 'A', 'C', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> bytes{};
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffU);
    os.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> bytes{};
    if (!is.read(reinterpret_cast<char*>(bytes.data()), 8))
        throw ContractViolation("jacobian snapshot: truncated");
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[b];
    return v;
}

template <typename Block>
void put_block(std::ostream& os, const Block& block) {
    for (Index r = 0; r < block.rows(); ++r)
        for (Index c = 0; c < block.cols(); ++c) put_u64(os, std::bit_cast<std::uint64_t>(block(r, c)));
}

template <typename Block>
void get_block(std::istream& is, Block&& block) {
    for (Index r = 0; r < block.rows(); ++r)
        for (Index c = 0; c < block.cols(); ++c) block(r, c) = std::bit_cast<double>(get_u64(is));
}

}  // namespace

void write_jacobian_snapshot(std::ostream& os, const JacobianState& j, Step step) {
    os.write(kMagic.data(), 4);
    put_u64(os, static_cast<std::uint64_t>(j.n()));
    put_u64(os, static_cast<std::uint64_t>(j.m()));
    put_u64(os, static_cast<std::uint64_t>(step));
    put_block(os, j.whh());
    put_block(os, j.wih());
    put_block(os, j.bh());
}

JacobianState read_jacobian_snapshot(std::istream& is, Step* step) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), 4) || magic != kMagic)
        throw ContractViolation("jacobian snapshot: bad magic");
    const auto n = static_cast<Index>(get_u64(is));
    const auto m = static_cast<Index>(get_u64(is));
    const auto s = static_cast<Step>(get_u64(is));
    JacobianState j(n, m);
    get_block(is, j.whh());
    get_block(is, j.wih());
    get_block(is, j.bh());
    if (step) *step = s;
    return j;
}

}  // namespace srtrl
