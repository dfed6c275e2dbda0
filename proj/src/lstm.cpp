#include "srtrl/lstm.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "srtrl/errors.hpp"
#include "srtrl/io_detail.hpp"

namespace srtrl {

namespace {

Vec sigmoid(const Vec& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

constexpr std::array<const char*, kGateCount> kGateNames{"input", "forget", "cell", "output"};

}  // namespace

LstmParams LstmParams::zeros(Index n, Index m, Index o) {
    LstmParams p;
    for (int g = 0; g < kGateCount; ++g) {
        p.w[g] = RowMat::Zero(n, n + m);
        p.b[g] = Vec::Zero(n);
    }
    p.w_out = RowMat::Zero(o, n);
    p.b_out = Vec::Zero(o);
    return p;
}

LstmParams LstmParams::init(Index n, Index m, Index o, Rng& rng) {
    LstmParams p = zeros(n, m, o);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s_gate = 1.0 / std::sqrt(static_cast<double>(n + m));
    const double s_out = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& w : p.w)
        for (Index i = 0; i < w.rows(); ++i)
            for (Index k = 0; k < w.cols(); ++k) w(i, k) = s_gate * normal(rng);
    for (Index r = 0; r < o; ++r)
        for (Index i = 0; i < n; ++i) p.w_out(r, i) = s_out * normal(rng);
    return p;
}

Vec LstmParams::flat() const {
    Vec theta(size());
    Index at = 0;
    for (int g = 0; g < kGateCount; ++g) {
        theta.segment(at, w[g].size()) = w[g].reshaped<Eigen::RowMajor>();
        at += w[g].size();
        theta.segment(at, n()) = b[g];
        at += n();
    }
    theta.segment(at, w_out.size()) = w_out.reshaped<Eigen::RowMajor>();
    at += w_out.size();
    theta.segment(at, o()) = b_out;
    return theta;
}

void LstmParams::set_flat(const Vec& theta) {
    if (theta.size() != size()) throw ContractViolation("LstmParams::set_flat: size mismatch");
    Index at = 0;
    for (int g = 0; g < kGateCount; ++g) {
        w[g].reshaped<Eigen::RowMajor>() = theta.segment(at, w[g].size());
        at += w[g].size();
        b[g] = theta.segment(at, n());
        at += n();
    }
    w_out.reshaped<Eigen::RowMajor>() = theta.segment(at, w_out.size());
    at += w_out.size();
    b_out = theta.segment(at, o());
}

bool LstmParams::all_finite() const {
    for (int g = 0; g < kGateCount; ++g)
        if (!w[g].allFinite() || !b[g].allFinite()) return false;
    return w_out.allFinite() && b_out.allFinite();
}

LstmForward lstm_forward(const LstmParams& p, const Vec& h_prev, const Vec& c_prev, const Vec& x) {
    const Index n = p.n();
    if (h_prev.size() != n || c_prev.size() != n || x.size() != p.m())
        throw ContractViolation("lstm_forward: input shape mismatch");
    Vec z(n + p.m());
    z << h_prev, x;
    auto pre = [&](Gate g) -> Vec {
        const int gi = static_cast<int>(g);
        return p.w[gi] * z + p.b[gi];
    };
    LstmForward f;
    f.i = sigmoid(pre(Gate::input));
    f.f = sigmoid(pre(Gate::forget));
    f.g = pre(Gate::cell).array().tanh();
    f.o = sigmoid(pre(Gate::output));
    f.c = f.f.cwiseProduct(c_prev) + f.i.cwiseProduct(f.g);
    f.h = f.o.cwiseProduct(Vec(f.c.array().tanh()));
    f.y = p.w_out * f.h + p.b_out;
    return f;
}

void lstm_rtrl_step_into(const LstmJacobianState& prev, const LstmParams& p,
                         const PropagationMask& mask, const Vec& h_prev, const Vec& c_prev,
                         const Vec& x, const LstmForward& fwd, LstmJacobianState& out,
                         LstmScratch& scratch, Step step) {
    const Index n = p.n();
    const Index m = p.m();
    const Index pg = p.gate_param_count();
    const Index total = p.recurrent_size();
    if (prev.jh.rows() != n || prev.jh.cols() != total || prev.jc.rows() != n ||
        prev.jc.cols() != total || mask.n() != n)
        throw ContractViolation("lstm_rtrl_step: shape mismatch");

    Vec z(n + m);
    z << h_prev, x;

    const std::array<Vec, kGateCount> slope{
        fwd.i.cwiseProduct((1.0 - fwd.i.array()).matrix()),
        fwd.f.cwiseProduct((1.0 - fwd.f.array()).matrix()),
        (1.0 - fwd.g.array().square()).matrix(),
        fwd.o.cwiseProduct((1.0 - fwd.o.array()).matrix()),
    };

    for (int g = 0; g < kGateCount; ++g) {
        scratch.w_hh[g] = p.w[g].leftCols(n);
        auto& da = scratch.da[g];
        masked_contract_into(scratch.w_hh[g], mask, prev.jh, da, step);
        const Index off = g * pg;
        for (Index i = 0; i < n; ++i) {
            da.row(i).segment(off + i * (n + m), n + m) += z.transpose();
            da(i, off + n * (n + m) + i) += 1.0;
        }
        da.array().colwise() *= slope[g].array();
    }

    const auto& da_i = scratch.da[static_cast<int>(Gate::input)];
    const auto& da_f = scratch.da[static_cast<int>(Gate::forget)];
    const auto& da_g = scratch.da[static_cast<int>(Gate::cell)];
    const auto& da_o = scratch.da[static_cast<int>(Gate::output)];

    out.jc.resize(n, total);
    out.jh.resize(n, total);
    out.jc = prev.jc.array().colwise() * fwd.f.array();
    out.jc.array() += da_f.array().colwise() * c_prev.array();
    out.jc.array() += da_i.array().colwise() * fwd.g.array();
    out.jc.array() += da_g.array().colwise() * fwd.i.array();

    const Vec tc = fwd.c.array().tanh();
    const Vec dh_dc = fwd.o.array() * (1.0 - tc.array().square());
    out.jh = da_o.array().colwise() * tc.array();
    out.jh.array() += out.jc.array().colwise() * dh_dc.array();

    if (!out.all_finite()) throw DivergenceError("lstm_rtrl_step: non-finite Jacobian", step);
}

LstmJacobianState lstm_rtrl_step(const LstmJacobianState& prev, const LstmParams& p,
                                 const PropagationMask& mask, const Vec& h_prev, const Vec& c_prev,
                                 const Vec& x, const LstmForward& fwd, Step step) {
    LstmJacobianState out;
    LstmScratch scratch;
    lstm_rtrl_step_into(prev, p, mask, h_prev, c_prev, x, fwd, out, scratch, step);
    return out;
}

void write_lstm_checkpoint(std::ostream& os, const LstmParams& p, std::uint64_t seed) {
    nlohmann::json header = {{"model", "lstm"}, {"n", p.n()}, {"m", p.m()}, {"o", p.o()},
                             {"seed", seed}};
    header["gates"] = kGateNames;
    os << header.dump() << '\n';
    detail::write_f64_le(os, p.flat());
}

LstmParams read_lstm_checkpoint(std::istream& is, std::uint64_t* seed) {
    std::string line;
    if (!std::getline(is, line)) throw ContractViolation("lstm checkpoint: missing header");
    const auto header = nlohmann::json::parse(line);
    if (header.value("model", "") != "lstm") throw ContractViolation("lstm checkpoint: wrong model");
    if (header.at("gates").get<std::vector<std::string>>() !=
        std::vector<std::string>(kGateNames.begin(), kGateNames.end()))
        throw ContractViolation("lstm checkpoint: unsupported gate ordering");
    auto p = LstmParams::zeros(header.at("n").get<Index>(), header.at("m").get<Index>(),
                               header.at("o").get<Index>());
    p.set_flat(detail::read_f64_le(is, p.size()));
    if (seed) *seed = header.at("seed").get<std::uint64_t>();
    return p;
}

}  // namespace srtrl
