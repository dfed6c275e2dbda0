#include "srtrl/optim.hpp"

#include <cmath>

#include "srtrl/errors.hpp"

namespace srtrl {

void adam_step(Vec& params, const Vec& grad, AdamState& state, const AdamConfig& cfg) {
    if (grad.size() != params.size()) throw ContractViolation("adam_step: gradient size mismatch");
    if (state.m.size() != params.size()) state = AdamState::zeros(params.size());
    ++state.t;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    params.array() -= cfg.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

void sgd_step(Vec& params, const Vec& grad, double lr) {
    if (grad.size() != params.size()) throw ContractViolation("sgd_step: gradient size mismatch");
    params -= lr * grad;
}

}  // namespace srtrl
