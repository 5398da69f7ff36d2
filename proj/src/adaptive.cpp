#include "tfch/adaptive.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace tfch {

void AdaptivePolicy::validate() const {
    if (!(tau_min > 0.0 && tau_min <= tau_max))
        throw std::invalid_argument("AdaptivePolicy: need 0 < tau_min <= tau_max");
    if (!(eta > 0.0)) throw std::invalid_argument("AdaptivePolicy: eta must be positive");
}

double next_step(const AdaptivePolicy& policy, double dphi_dt_l2,
                 std::optional<double> restriction_bound) {
    policy.validate();
    if (!(dphi_dt_l2 >= 0.0))
        throw std::invalid_argument("next_step: dphi_dt_l2 must be nonnegative");
    double tau = std::max(policy.tau_min,
                          policy.tau_max / std::sqrt(1.0 + policy.eta * dphi_dt_l2 * dphi_dt_l2));
    if (restriction_bound) tau = std::min(tau, *restriction_bound);
    return tau;
}

double landing_step(double tau_ada, double rem, const AdaptivePolicy& policy) {
    // Invariant kept inductively: rem >= tau_min on entry, so both branches
    // return a legal step and leave either 0 or at least tau_min remaining.
    if (tau_ada >= rem - policy.tau_min) {
        if (rem <= policy.tau_max) return rem;
        return std::max(policy.tau_min, std::min(policy.tau_max, rem - policy.tau_min));
    }
    return tau_ada;
}

SolverTrace run_adaptive(Scheme scheme, double T, const AdaptivePolicy& policy,
                         const WarmupSpec& warmup, const ModelParams& params,
                         const Field2D& initial, SolverOptions opts,
                         Stepper::ForcingFn forcing,
                         const std::function<void(const EnergyRecord&)>& observer,
                         const std::function<void(const Stepper&)>& hook) {
    policy.validate();
    if (!(T >= warmup.T0 + policy.tau_min))
        throw std::invalid_argument("run_adaptive: T must exceed the warm-up by at least tau_min");
    const auto start = std::chrono::steady_clock::now();

    TimeMesh mesh = make_graded(warmup.T0, warmup.N0, warmup.gamma);
    Stepper stepper(scheme, mesh, params, initial, opts);
    if (forcing) stepper.set_forcing(std::move(forcing));
    if (observer) observer(stepper.records().front());
    if (hook) hook(stepper);
    for (int n = 1; n <= warmup.N0; ++n) {
        const EnergyRecord& rec = stepper.advance();
        if (observer) observer(rec);
        if (hook) hook(stepper);
    }

    const std::optional<double> bound =
        (scheme == Scheme::L1)
            ? std::optional<double>(check_restriction(scheme, params, 0.0).bound)
            : std::nullopt;

    bool first = true;
    while (mesh.horizon() < T) {
        double tau_ada;
        if (first) {
            tau_ada = policy.tau_min;
            first = false;
        } else {
            const int n = stepper.n();
            const Norms nm = norms_and_inner(stepper.increment(n), stepper.increment(n));
            tau_ada = next_step(policy, nm.l2 / mesh.tau(n), bound);
        }
        const double rem = T - mesh.horizon();
        const double tau = landing_step(tau_ada, rem, policy);
        append_step(mesh, tau);
        if (tau == rem) {
            // t + (T - t) can round past or short of T; pin the level exactly.
            mesh.levels.back() = T;
            mesh.steps.back() = T - mesh.levels[mesh.levels.size() - 2];
            if (mesh.steps.size() >= 2)
                mesh.ratios.back() = mesh.steps.back() / mesh.steps[mesh.steps.size() - 2];
        }
        const EnergyRecord& rec = stepper.advance();
        if (observer) observer(rec);
        if (hook) hook(stepper);
    }

    SolverTrace trace;
    trace.records = stepper.records();
    trace.walltime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

}
