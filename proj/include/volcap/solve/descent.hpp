#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "volcap/core/error.hpp"
#include "volcap/core/types.hpp"

namespace volcap {

struct DescentOptions {
    int max_iterations = 300;
    double lambda_init = 1.0;
    double lambda_grow = 1.2;
    double lambda_shrink = 0.5;
    double lambda_min = 1e-14;
    double cond_min = 1e-3;
    double cond_max = 1e3;
    double cond_decay = 0.7;       // smoothing of the secant estimate
    double step_cap = 0.05;        // per-parameter per-iteration step bound
    double tol_rel_decrease = 1e-6;
    int tol_window = 10;
};

struct DescentTraceRow {
    int iteration;
    double energy;
    double lambda;
    bool accepted;
};

struct DescentResult {
    VecX x;
    double energy = 0.0;
    int iterations = 0;
    int accepted_steps = 0;
    bool converged = false;
    std::vector<DescentTraceRow> trace;
};

/// Conditioned gradient descent with per-parameter scaling and an adaptive
/// step length. Each parameter k steps by -lambda * cond_k * g_k where
/// cond_k is a clamped running estimate of 1/|g_k|; steps that increase the
/// energy are rolled back and lambda shrinks, accepted steps grow lambda.
/// The accepted-energy trace is non-increasing by construction.
///
/// fn(x, grad) returns the energy; grad may be null (energy-only probe).
/// mask, when non-empty, freezes parameters with mask[k] == false.
inline DescentResult conditioned_descent(
    const std::function<double(const VecX&, VecX*)>& fn, VecX x0, const DescentOptions& opt,
    const std::vector<bool>& mask = {}) {
    DescentResult res;
    res.x = std::move(x0);
    const int n = static_cast<int>(res.x.size());
    if (!mask.empty() && static_cast<int>(mask.size()) != n)
        throw InvalidArgumentError("conditioned_descent: mask size mismatch");

    VecX grad(n);
    double energy = fn(res.x, &grad);
    res.trace.push_back({0, energy, opt.lambda_init, true});

    // Per-parameter conditioning: seeded from the inverse gradient
    // magnitude, then refined by a per-coordinate secant estimate of the
    // inverse curvature |dx| / |dg| across accepted steps.
    VecX cond(n);
    for (int k = 0; k < n; ++k)
        cond[k] = std::clamp(1.0 / (std::abs(grad[k]) + 1e-12), opt.cond_min, opt.cond_max);
    VecX x_prev = res.x, grad_prev = grad;
    double lambda = opt.lambda_init;
    double window_start_energy = energy;

    for (int it = 1; it <= opt.max_iterations; ++it) {
        for (int k = 0; k < n; ++k)
            if (!std::isfinite(grad[k]))
                throw NumericalError("conditioned_descent: non-finite gradient at parameter " +
                                     std::to_string(k));

        VecX step(n);
        for (int k = 0; k < n; ++k) {
            if (!mask.empty() && !mask[k]) {
                step[k] = 0.0;
                continue;
            }
            step[k] = std::clamp(-lambda * cond[k] * grad[k], -opt.step_cap, opt.step_cap);
        }
        if (step.cwiseAbs().maxCoeff() == 0.0) {
            res.converged = true;
            break;
        }

        const VecX x_try = res.x + step;
        const double e_try = fn(x_try, nullptr);
        res.iterations = it;
        if (e_try <= energy) {
            res.x = x_try;
            energy = e_try;
            lambda *= opt.lambda_grow;
            ++res.accepted_steps;
            res.trace.push_back({it, energy, lambda, true});
            fn(res.x, &grad);
            for (int k = 0; k < n; ++k) {
                const double dx = std::abs(res.x[k] - x_prev[k]);
                const double dg = std::abs(grad[k] - grad_prev[k]);
                if (dx > 0.0 && dg > 1e-14)
                    cond[k] = opt.cond_decay * cond[k] +
                              (1.0 - opt.cond_decay) *
                                  std::clamp(dx / dg, opt.cond_min, opt.cond_max);
            }
            x_prev = res.x;
            grad_prev = grad;
        } else {
            lambda *= opt.lambda_shrink;
            res.trace.push_back({it, energy, lambda, false});
            if (lambda < opt.lambda_min) {
                res.converged = true;
                break;
            }
        }

        if (res.accepted_steps >= 1 && it % opt.tol_window == 0) {
            const double scale = std::max({std::abs(window_start_energy), std::abs(energy), 1e-12});
            if ((window_start_energy - energy) / scale < opt.tol_rel_decrease) {
                res.converged = true;
                break;
            }
            window_start_energy = energy;
        }
    }
    res.energy = energy;
    return res;
}

}  // namespace volcap
