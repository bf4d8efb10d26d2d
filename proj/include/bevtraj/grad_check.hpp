#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "bevtraj/autodiff.hpp"
#include "bevtraj/errors.hpp"
#include "bevtraj/tensor.hpp"

namespace bevtraj {

// Builds the computation on a fresh tape: receives one leaf per parameter
// tensor (in order) and must return a scalar loss.
using ScalarFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

// Central-difference check of reverse-mode gradients. Returns the max over
// all parameter components of |g_a - g_n| / max(1, |g_a|, |g_n|).
inline double grad_check(const ScalarFn& f, std::vector<Tensor> params, double eps = 1e-5) {
    if (eps <= 0.0) throw config_error("grad_check: eps must be positive");

    auto eval = [&](const std::vector<Tensor>& ps, bool with_grad) {
        ad::Tape tape;
        std::vector<ad::Var> leaves;
        leaves.reserve(ps.size());
        for (const Tensor& p : ps) leaves.push_back(tape.leaf(p, with_grad));
        ad::Var loss = f(tape, leaves);
        if (tape.value(loss).size() != 1) throw shape_error("grad_check: f must return a scalar");
        double value = tape.value(loss)[0];
        std::vector<Tensor> grads;
        if (with_grad) {
            tape.backward(loss);
            for (ad::Var v : leaves) grads.push_back(tape.grad(v));
        }
        if (!std::isfinite(value)) throw numeric_error("grad_check: non-finite loss");
        return std::pair<double, std::vector<Tensor>>(value, std::move(grads));
    };

    const auto [value, analytic] = eval(params, true);
    (void)value;

    double max_rel = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < params[p].size(); ++i) {
            const double orig = params[p][i];
            params[p][i] = orig + eps;
            const double fp = eval(params, false).first;
            params[p][i] = orig - eps;
            const double fm = eval(params, false).first;
            params[p][i] = orig;
            const double g_num = (fp - fm) / (2.0 * eps);
            const double g_ana = analytic[p][i];
            if (!std::isfinite(g_num) || !std::isfinite(g_ana)) throw numeric_error("grad_check: non-finite gradient");
            const double rel = std::abs(g_ana - g_num) / std::max({1.0, std::abs(g_ana), std::abs(g_num)});
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

} // namespace bevtraj
