#pragma once

#include <functional>
#include <optional>

#include "tfch/solver.hpp"

namespace tfch {

struct AdaptivePolicy {
    double tau_min = 1e-3;
    double tau_max = 0.1;
    double eta = 1e3;
    void validate() const;  // 0 < tau_min <= tau_max, eta > 0
};

// Graded start-up mesh resolving the initial layer before the controller
// takes over.
struct WarmupSpec {
    double gamma = 3.0;
    int N0 = 30;
    double T0 = 0.01;
};

// tau = max{tau_min, tau_max / sqrt(1 + eta |d_t phi|^2)}, then clamped to the
// solvability bound when one applies.
double next_step(const AdaptivePolicy& policy, double dphi_dt_l2,
                 std::optional<double> restriction_bound = std::nullopt);

// Shortens tau_ada near the horizon so the run lands exactly on T while every
// emitted step stays inside [tau_min, tau_max].  rem is the remaining time;
// exact landing needs tau_max >= 2 tau_min (any sane policy).
double landing_step(double tau_ada, double rem, const AdaptivePolicy& policy);

// Warm-up march followed by controller-driven steps to T.  The first
// controlled step is tau_min (the controller is a posteriori and has no
// datum yet); afterwards it reads the just-completed increment.
SolverTrace run_adaptive(Scheme scheme, double T, const AdaptivePolicy& policy,
                         const WarmupSpec& warmup, const ModelParams& params,
                         const Field2D& initial, SolverOptions opts = {},
                         Stepper::ForcingFn forcing = nullptr,
                         const std::function<void(const EnergyRecord&)>& observer = nullptr,
                         const std::function<void(const Stepper&)>& hook = nullptr);

}
