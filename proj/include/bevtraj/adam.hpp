#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bevtraj/errors.hpp"
#include "bevtraj/tensor.hpp"

namespace bevtraj {

struct AdamConfig {
    double lr = 1e-3;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment buffers, one pair per parameter tensor.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::size_t step = 0;

    static AdamState for_params(const std::vector<Tensor*>& params) {
        AdamState s;
        for (const Tensor* p : params) {
            s.m.push_back(Tensor::zeros(p->shape));
            s.v.push_back(Tensor::zeros(p->shape));
        }
        return s;
    }
};

// One Adam update with decoupled weight decay: p <- p - lr*wd*p applied
// separately from the moment-based step. Deterministic, fixed iteration order.
inline void adam_step(const std::vector<Tensor*>& params,
                      const std::vector<const Tensor*>& grads,
                      const std::vector<std::string>& names,
                      AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw shape_error("adam_step: parameter/gradient/state count mismatch");
    if (cfg.lr < 0.0 || cfg.weight_decay < 0.0) throw config_error("adam_step: lr and weight_decay must be non-negative");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& w = *params[p];
        const Tensor& g = *grads[p];
        if (!w.same_shape(g)) throw shape_error("adam_step: shape mismatch for " + names[p]);
        if (!g.all_finite()) throw numeric_error("adam_step: non-finite gradient for " + names[p]);
        Tensor& m = state.m[p];
        Tensor& v = state.v[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (cfg.weight_decay != 0.0) w[i] -= cfg.lr * cfg.weight_decay * w[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

} // namespace bevtraj
