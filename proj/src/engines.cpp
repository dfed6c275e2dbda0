#include "srtrl/engines.hpp"

#include <cmath>
#include <sstream>

#include "srtrl/errors.hpp"

namespace srtrl {

Vec ParamGradient::flat() const {
    Vec out(recurrent.size() + w_out.size() + b_out.size());
    out << recurrent, w_out.reshaped<Eigen::RowMajor>(), b_out;
    return out;
}

double ParamGradient::norm() const {
    return std::sqrt(recurrent.squaredNorm() + w_out.squaredNorm() + b_out.squaredNorm());
}

ParamGradient ParamGradient::zeros(Index recurrent_size, Index o, Index n) {
    return {Vec::Zero(recurrent_size), RowMat::Zero(o, n), Vec::Zero(o)};
}

ParamGradient assemble_gradient(const Vec& dl_dy, const RowMat& w_out, const Vec& h,
                                const RowMat& j) {
    if (w_out.rows() != dl_dy.size() || w_out.cols() != h.size() || j.rows() != h.size())
        throw ContractViolation("assemble_gradient: shape mismatch");
    const Vec c = w_out.transpose() * dl_dy;
    ParamGradient g;
    g.recurrent.noalias() = j.transpose() * c;
    g.w_out.noalias() = dl_dy * h.transpose();
    g.b_out = dl_dy;
    return g;
}

void traces_step_into(const RowMat& prev, const ImmediateDerivs& b, double lambda, RowMat& out) {
    if (lambda < 0.0 || lambda > 1.0) throw ContractViolation("traces_step: lambda must lie in [0, 1]");
    const Index n = b.n();
    if (prev.rows() != n || prev.cols() != rnn_param_count(n, b.m()))
        throw ContractViolation("traces_step: shape mismatch");
    if (lambda == 0.0) {
        out.setZero(n, prev.cols());
    } else {
        out = lambda * prev;
    }
    add_immediate(out, b);
    out.array().colwise() *= b.d.array();
}

RowMat traces_step(const RowMat& prev, const ImmediateDerivs& b, double lambda) {
    RowMat out;
    traces_step_into(prev, b, lambda, out);
    return out;
}

UoroState uoro_step(const UoroState& state, const Mat& w_hh, const ImmediateDerivs& b, Rng& rng,
                    Step step) {
    const Index n = b.n();
    const Index m = b.m();
    const Index p = rnn_param_count(n, m);
    if (state.s.size() != n || state.a.size() != p || w_hh.rows() != n)
        throw ContractViolation("uoro_step: shape mismatch");

    const Vec fs = b.d.cwiseProduct(w_hh * state.s);

    Vec nu(n);
    std::bernoulli_distribution coin(0.5);
    for (Index i = 0; i < n; ++i) nu[i] = coin(rng) ? 1.0 : -1.0;

    // nuᵀ D B, built from the compact form of B.
    Vec probe = Vec::Zero(p);
    for (Index i = 0; i < n; ++i) {
        const double c = nu[i] * b.d[i];
        probe.segment(i * n, n) = c * b.h_prev;
        if (m > 0) probe.segment(n * n + i * m, m) = c * b.x;
        probe[n * n + n * m + i] = c;
    }

    const double rho0 = std::sqrt((state.a.norm() + kUoroEps) / (fs.norm() + kUoroEps));
    UoroState out{rho0 * fs, state.a / rho0};

    const double probe_norm = probe.norm();
    if (probe_norm > 0.0) {
        const double rho1 = std::sqrt((probe_norm + kUoroEps) / (nu.norm() + kUoroEps));
        out.s += rho1 * nu;
        out.a += probe / rho1;
    }
    if (!out.s.allFinite() || !out.a.allFinite())
        throw DivergenceError("uoro_step: non-finite factors", step);
    return out;
}

ParamGradient tbptt_grad(std::span<const RnnTransition> window, const RnnParams& p,
                         const Vec& dl_dy) {
    if (window.empty()) throw ContractViolation("tbptt_grad: empty window");
    const Index n = p.n();
    const Index m = p.m();
    RowMat g_hh = RowMat::Zero(n, n);
    RowMat g_ih = RowMat::Zero(n, m);
    Vec g_b = Vec::Zero(n);

    const auto& last = window.back();
    Vec delta_h = p.w_out.transpose() * dl_dy;
    for (auto it = window.rbegin(); it != window.rend(); ++it) {
        const Vec delta_a = delta_h.array() * (1.0 - it->h.array().square());
        g_hh.noalias() += delta_a * it->h_prev.transpose();
        if (m > 0) g_ih.noalias() += delta_a * it->x.transpose();
        g_b += delta_a;
        delta_h.noalias() = p.w_hh.transpose() * delta_a;
    }

    ParamGradient g;
    g.recurrent.resize(rnn_param_count(n, m));
    g.recurrent << g_hh.reshaped<Eigen::RowMajor>(), g_ih.reshaped<Eigen::RowMajor>(), g_b;
    g.w_out.noalias() = dl_dy * last.h.transpose();
    g.b_out = dl_dy;
    return g;
}

std::string_view to_string(EngineKind k) {
    switch (k) {
        case EngineKind::full_rtrl: return "full-rtrl";
        case EngineKind::sparse_rtrl: return "sparse-rtrl";
        case EngineKind::traces: return "traces";
        case EngineKind::uoro: return "uoro";
        case EngineKind::tbptt: return "tbptt";
    }
    return "?";
}

EngineKind parse_engine_kind(std::string_view name) {
    if (name == "full-rtrl") return EngineKind::full_rtrl;
    if (name == "sparse-rtrl") return EngineKind::sparse_rtrl;
    if (name == "traces" || name == "traces-decay") return EngineKind::traces;
    if (name == "uoro") return EngineKind::uoro;
    if (name == "tbptt") return EngineKind::tbptt;
    throw ContractViolation("unknown engine variant '" + std::string(name) + "'");
}

std::string EngineSpec::label() const {
    std::ostringstream os;
    switch (kind) {
        case EngineKind::sparse_rtrl:
            os << "sparse-rtrl-k" << k << '-' << to_string(strategy);
            break;
        case EngineKind::traces:
            if (lambda == 0.0) {
                os << "traces";
            } else {
                os << "traces-decay-l" << lambda;
            }
            break;
        case EngineKind::tbptt:
            os << "tbptt-w" << window;
            break;
        default:
            os << to_string(kind);
    }
    return os.str();
}

RnnGradientEngine::RnnGradientEngine(const EngineSpec& spec, Index n, Index m, Rng mask_rng,
                                     Rng uoro_rng)
    : spec_(spec), n_(n), m_(m), uoro_rng_(std::move(uoro_rng)) {
    if (spec.kind == EngineKind::sparse_rtrl) {
        if (spec.k < 0 || spec.k > n) throw ContractViolation("sparse-rtrl: k must lie in [0, n]");
        selector_.emplace(spec.strategy, spec.k, n, std::move(mask_rng));
    } else if (spec.kind == EngineKind::full_rtrl) {
        selector_.emplace(Strategy::ring, n, n, std::move(mask_rng));
    }
    if (spec.kind == EngineKind::tbptt && spec.window < 1)
        throw ContractViolation("tbptt: window must be at least 1");
    reset();
}

void RnnGradientEngine::reset() {
    j_ = JacobianState(n_, m_);
    scratch_ = JacobianState(n_, m_);
    uoro_ = UoroState::zeros(n_, rnn_param_count(n_, m_));
    buffer_.clear();
}

void RnnGradientEngine::observe(const RnnParams& p, const Vec& h_prev, const Vec& x, const Vec& h,
                                Step t) {
    switch (spec_.kind) {
        case EngineKind::full_rtrl:
        case EngineKind::sparse_rtrl: {
            const Mat w_hh = p.w_hh;
            if (spec_.strategy == Strategy::dynamic && spec_.kind == EngineKind::sparse_rtrl) {
                const Vec norms = j_.data().rowwise().norm();
                selector_->update(t, w_hh, &norms);
            } else {
                selector_->update(t, w_hh);
            }
            const auto b = immediate_derivs(h, h_prev, x);
            rtrl_step_into(j_, w_hh, selector_->mask(), b, scratch_, t);
            std::swap(j_, scratch_);
            break;
        }
        case EngineKind::traces: {
            const auto b = immediate_derivs(h, h_prev, x);
            traces_step_into(j_.data(), b, spec_.lambda, scratch_.data());
            if (!scratch_.all_finite()) throw DivergenceError("traces: non-finite trace", t);
            std::swap(j_, scratch_);
            break;
        }
        case EngineKind::uoro: {
            const auto b = immediate_derivs(h, h_prev, x);
            uoro_ = uoro_step(uoro_, Mat(p.w_hh), b, uoro_rng_, t);
            break;
        }
        case EngineKind::tbptt:
            buffer_.push_back({h_prev, x, h});
            while (static_cast<Index>(buffer_.size()) > spec_.window) buffer_.pop_front();
            break;
    }
}

ParamGradient RnnGradientEngine::gradient(const RnnParams& p, const Vec& dl_dy, const Vec& h) const {
    switch (spec_.kind) {
        case EngineKind::uoro: {
            const Vec c = p.w_out.transpose() * dl_dy;
            ParamGradient g;
            g.recurrent = c.dot(uoro_.s) * uoro_.a;
            g.w_out.noalias() = dl_dy * h.transpose();
            g.b_out = dl_dy;
            return g;
        }
        case EngineKind::tbptt: {
            const std::vector<RnnTransition> window(buffer_.begin(), buffer_.end());
            return tbptt_grad(window, p, dl_dy);
        }
        default:
            return assemble_gradient(dl_dy, p.w_out, h, j_.data());
    }
}

const RowMat* RnnGradientEngine::sensitivity() const {
    switch (spec_.kind) {
        case EngineKind::uoro:
        case EngineKind::tbptt: return nullptr;
        default: return &j_.data();
    }
}

const JacobianState* RnnGradientEngine::jacobian() const {
    return sensitivity() ? &j_ : nullptr;
}

const PropagationMask* RnnGradientEngine::mask() const {
    return selector_ ? &selector_->mask() : nullptr;
}

LstmGradientEngine::LstmGradientEngine(const EngineSpec& spec, Index n, Index m, Rng mask_rng)
    : spec_(spec),
      n_(n),
      m_(m),
      selector_(spec.kind == EngineKind::sparse_rtrl ? spec.strategy : Strategy::ring,
                spec.kind == EngineKind::full_rtrl   ? n
                : spec.kind == EngineKind::traces    ? 0
                                                     : spec.k,
                n, std::move(mask_rng)) {
    if (spec.kind == EngineKind::uoro || spec.kind == EngineKind::tbptt)
        throw ContractViolation("lstm: only full-rtrl, sparse-rtrl and traces are supported");
    if (spec.kind == EngineKind::traces && spec.lambda != 0.0)
        throw ContractViolation("lstm: traces with decay are not supported");
    reset();
}

void LstmGradientEngine::reset() {
    const Index p = kGateCount * n_ * (n_ + m_ + 1);
    j_ = LstmJacobianState(n_, p);
    next_ = LstmJacobianState(n_, p);
}

void LstmGradientEngine::observe(const LstmParams& p, const Vec& h_prev, const Vec& c_prev,
                                 const Vec& x, const LstmForward& fwd, Step t) {
    Mat w_hh = Mat::Zero(n_, n_);
    for (int g = 0; g < kGateCount; ++g) w_hh += p.w[g].leftCols(n_).cwiseAbs();
    if (spec_.strategy == Strategy::dynamic && spec_.kind == EngineKind::sparse_rtrl) {
        const Vec norms = j_.jh.rowwise().norm();
        selector_.update(t, w_hh, &norms);
    } else {
        selector_.update(t, w_hh);
    }
    lstm_rtrl_step_into(j_, p, selector_.mask(), h_prev, c_prev, x, fwd, next_, scratch_, t);
    std::swap(j_, next_);
}

ParamGradient LstmGradientEngine::gradient(const LstmParams& p, const Vec& dl_dy, const Vec& h) const {
    return assemble_gradient(dl_dy, p.w_out, h, j_.jh);
}

const PropagationMask& LstmGradientEngine::mask() const { return selector_.mask(); }

}  // namespace srtrl
