#pragma once

#include "srtrl/types.hpp"

namespace srtrl {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Vec m;
    Vec v;
    Index t = 0;

    static AdamState zeros(Index size) { return {Vec::Zero(size), Vec::Zero(size), 0}; }
};

/// Bias-corrected Adam, theta -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(Vec& params, const Vec& grad, AdamState& state, const AdamConfig& cfg);

/// theta -= lr * grad.
void sgd_step(Vec& params, const Vec& grad, double lr);

}  // namespace srtrl
