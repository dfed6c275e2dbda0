#include "srtrl/rnn.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "srtrl/errors.hpp"
#include "srtrl/io_detail.hpp"

namespace srtrl {

RnnParams RnnParams::zeros(Index n, Index m, Index o) {
    return RnnParams{RowMat::Zero(n, n), RowMat::Zero(n, m), Vec::Zero(n), RowMat::Zero(o, n),
                     Vec::Zero(o)};
}

RnnParams RnnParams::init(Index n, Index m, Index o, Rng& rng) {
    RnnParams p = zeros(n, m, o);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s_hh = 1.0 / std::sqrt(static_cast<double>(n));
    const double s_ih = m > 0 ? 1.0 / std::sqrt(static_cast<double>(m)) : 0.0;
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k) p.w_hh(i, k) = s_hh * normal(rng);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < m; ++k) p.w_ih(i, k) = s_ih * normal(rng);
    for (Index r = 0; r < o; ++r)
        for (Index i = 0; i < n; ++i) p.w_out(r, i) = s_hh * normal(rng);
    return p;
}

Vec RnnParams::recurrent_flat() const {
    Vec theta(rnn_param_count(n(), m()));
    theta << w_hh.reshaped<Eigen::RowMajor>(), w_ih.reshaped<Eigen::RowMajor>(), b_h;
    return theta;
}

Vec RnnParams::flat() const {
    Vec theta(size());
    theta << recurrent_flat(), w_out.reshaped<Eigen::RowMajor>(), b_out;
    return theta;
}

void RnnParams::set_flat(const Vec& theta) {
    if (theta.size() != size()) throw ContractViolation("RnnParams::set_flat: size mismatch");
    Index at = 0;
    auto take = [&](auto& dst) {
        dst.template reshaped<Eigen::RowMajor>() = theta.segment(at, dst.size());
        at += dst.size();
    };
    take(w_hh);
    take(w_ih);
    b_h = theta.segment(at, n());
    at += n();
    take(w_out);
    b_out = theta.segment(at, o());
}

bool RnnParams::all_finite() const {
    return w_hh.allFinite() && w_ih.allFinite() && b_h.allFinite() && w_out.allFinite() &&
           b_out.allFinite();
}

void RnnParams::validate() const {
    const Index n_ = n();
    if (w_hh.cols() != n_ || w_ih.rows() != n_ || b_h.size() != n_ || w_out.cols() != n_ ||
        b_out.size() != o())
        throw ContractViolation("RnnParams: inconsistent shapes");
}

RnnForward rnn_forward(const RnnParams& p, const Vec& h_prev, const Vec& x) {
    if (h_prev.size() != p.n() || x.size() != p.m())
        throw ContractViolation("rnn_forward: input shape mismatch");
    RnnForward f;
    f.pre.noalias() = p.w_hh * h_prev;
    f.pre.noalias() += p.w_ih * x;
    f.pre += p.b_h;
    f.h = f.pre.array().tanh();
    f.y.noalias() = p.w_out * f.h;
    f.y += p.b_out;
    return f;
}

ImmediateDerivs immediate_derivs(const Vec& h, const Vec& h_prev, const Vec& x) {
    if (h.size() != h_prev.size()) throw ContractViolation("immediate_derivs: shape mismatch");
    return ImmediateDerivs{(1.0 - h.array().square()).matrix(), h_prev, x};
}

void write_rnn_checkpoint(std::ostream& os, const RnnParams& p, std::uint64_t seed) {
    const nlohmann::json header = {{"model", "rnn"}, {"n", p.n()}, {"m", p.m()}, {"o", p.o()},
                                   {"seed", seed}};
    os << header.dump() << '\n';
    detail::write_f64_le(os, p.flat());
}

RnnParams read_rnn_checkpoint(std::istream& is, std::uint64_t* seed) {
    std::string line;
    if (!std::getline(is, line)) throw ContractViolation("rnn checkpoint: missing header");
    const auto header = nlohmann::json::parse(line);
    if (header.value("model", "") != "rnn") throw ContractViolation("rnn checkpoint: wrong model");
    auto p = RnnParams::zeros(header.at("n").get<Index>(), header.at("m").get<Index>(),
                              header.at("o").get<Index>());
    p.set_flat(detail::read_f64_le(is, p.size()));
    if (seed) *seed = header.at("seed").get<std::uint64_t>();
    return p;
}

}  // namespace srtrl
