#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfch/kernels.hpp"
#include "tfch/spectral.hpp"

namespace tfch {

enum class Scheme { L1, L1h, L1a };
const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);
// Kernel family driving the scheme's convolution.
Family scheme_family(Scheme s);

struct ModelParams {
    double kappa;
    double epsilon;
    double alpha;
    void validate() const;  // throws std::invalid_argument
};

struct EnergyRecord {
    int n = 0;
    double t = 0.0;
    double tau = 0.0;
    double volume = 0.0;
    double E = 0.0;
    std::optional<double> E_var;  // empty for the averaged half-point scheme
    int fp_iters = 0;
    bool restriction_flagged = false;  // step taken beyond the solvability bound
};

struct SolverOptions {
    double fp_tol = 1e-12;
    int fp_max_iter = 500;
    // Throw instead of flagging when a backward-Euler step violates its bound.
    bool enforce_restriction = true;
    // Promote the first averaged-scheme step to the full lag-0 weight.  The
    // literal half weight leaves an undamped startup mode that the increasing-
    // ratio experiments rely on; convergence runs need the promoted start.
    bool l1a_consistent_start = true;
    bool track_variational = true;
    // Multiplier on the gradient-mode damping added to both sides of the
    // fixed-point update; 0 disables the stabilization.
    double stabilization = 1.65;
};

struct SolverTrace {
    std::vector<EnergyRecord> records;
    double walltime_sec = 0.0;
};

class FixedPointError : public std::runtime_error {
public:
    FixedPointError(int iters, double last_residual)
        : std::runtime_error("fixed point did not converge after " +
                             std::to_string(iters) + " iterations"),
          iters(iters), last_residual(last_residual) {}
    int iters;
    double last_residual;
};

class SplittingError : public std::runtime_error {
public:
    explicit SplittingError(double min_symbol)
        : std::runtime_error("implicit symbol not strictly positive"),
          min_symbol(min_symbol) {}
    double min_symbol;
};

class RestrictionError : public std::runtime_error {
public:
    RestrictionError(double tau, double bound)
        : std::runtime_error("step " + std::to_string(tau) +
                             " exceeds the solvability bound " + std::to_string(bound)),
          tau(tau), bound(bound) {}
    double tau;
    double bound;
};

// Half-point nonlinear term: 1/3 p^3 + 1/2 p q^2 + 1/6 q^3 - (p + q)/2
// with p the new state and q the previous one; collapses to f at p = q.
Field2D nonlinear_midpoint(const Field2D& phi_n, const Field2D& phi_prev);

// E[phi] = (eps^2/2) ||grad phi||^2 + h^2 sum (phi^2 - 1)^2 / 4.
double energy_original(const Field2D& phi, const ModelParams& params);

struct Restriction {
    bool ok;
    double bound;
};
// Solvability bound (4 eps^2 / (kappa Gamma(2-alpha)))^(1/alpha); the
// half-point schemes get twice that.
Restriction check_restriction(Scheme s, const ModelParams& params, double tau_n);

struct FixedPointResult {
    Field2D phi;
    int iters = 0;
    double residual = 0.0;  // max-norm scheme residual at the returned iterate
};

// Fills rhs_hat (half-spectrum layout) from the current iterate.
using SpectralRhsFn =
    std::function<void(const Field2D& iterate, std::vector<std::complex<double>>& rhs_hat)>;

// Solves symbol * phi_hat = rhs_hat(phi) by damped fixed point:
//   (symbol + S stab) phi_hat' = rhs_hat(phi) + S stab phi_hat,
// S = stab_factor * max(1, max phi^2).  The added term cancels at the fixed
// point, so the converged solution is that of the undamped iteration.  Stops
// when the iterate difference or the scheme residual drops below tol in the
// max norm.  Throws SplittingError unless min(symbol) > 0, FixedPointError on
// exhausting max_iter.
FixedPointResult fixed_point_solve(const SpectralOps& ops,
                                   const std::vector<double>& symbol,
                                   const SpectralRhsFn& rhs_hat,
                                   const Field2D& guess,
                                   const std::vector<double>& stab,
                                   double stab_factor, double tol, int max_iter);

// Weighted history sum E + coeff * sum_j p_row[n-j] * history[j-1] shared by
// both variational energies.
double energy_variational_sum(double E, double coeff, const std::vector<double>& p_row,
                              const std::vector<double>& history);

// Marches one scheme along a (possibly still growing) mesh.  Owns the kernel
// and companion caches, the increment history and the energy bookkeeping.
class Stepper {
public:
    using ForcingFn = std::function<Field2D(double t)>;

    Stepper(Scheme scheme, const TimeMesh& mesh, const ModelParams& params,
            Field2D initial, SolverOptions opts = {});
    // The stepper keeps a pointer to the mesh; a temporary would dangle.
    Stepper(Scheme, TimeMesh&&, const ModelParams&, Field2D, SolverOptions = {}) = delete;

    void set_forcing(ForcingFn f) { forcing_ = std::move(f); }

    // Advances to the next mesh level and returns the fresh record.
    const EnergyRecord& advance();

    int n() const { return n_; }
    const Field2D& phi() const { return phi_; }
    const std::vector<EnergyRecord>& records() const { return records_; }
    const TimeMesh& mesh() const { return *mesh_; }
    Scheme scheme() const { return scheme_; }
    const ModelParams& params() const { return params_; }
    double last_residual() const { return last_residual_; }

    // nabla_tau phi^k = phi^k - phi^{k-1}, 1 <= k <= n.
    const Field2D& increment(int k) const { return increments_[static_cast<size_t>(k - 1)]; }
    const std::vector<double>& grad_mu_sq() const { return grad_mu_sq_; }
    const std::vector<double>& weighted_increment_hminus1_sq() const { return vj_hm1_sq_; }
    const std::vector<double>& dcc_row() const { return p_row_; }
    const KernelTable& scheme_kernels() const { return scheme_table_; }

    // Scheme-specific variational energy at the current level; E itself when
    // nothing is tracked.
    double energy_variational() const;
    // H1-bound constant sqrt((4 E[phi^0] + (2 eps^2 + eps^4)|Omega|)/(2 eps^2)).
    double h1_bound_c0() const;

private:
    Field2D history_field(const KernelRow& row) const;
    KernelRow scheme_row(int n) const;
    void track_energies(EnergyRecord& rec);

    Scheme scheme_;
    const TimeMesh* mesh_;
    ModelParams params_;
    SolverOptions opts_;
    SpectralOps ops_;
    KernelTable scheme_table_;
    std::optional<KernelTable> energy_table_;  // doubled family for the half-point law
    Field2D phi_;
    std::vector<Field2D> increments_;
    std::vector<double> grad_mu_sq_;
    std::vector<double> vj_hm1_sq_;
    std::vector<double> p_row_;
    std::vector<EnergyRecord> records_;
    ForcingFn forcing_;
    int n_ = 0;
    double last_residual_ = 0.0;
    double E0_;
};

// Full march over the mesh; per-step records forwarded to the observer and
// the stepper itself to the hook (for state-dependent instrumentation).
SolverTrace run(Scheme scheme, const TimeMesh& mesh, const ModelParams& params,
                const Field2D& initial, SolverOptions opts = {},
                Stepper::ForcingFn forcing = nullptr,
                const std::function<void(const EnergyRecord&)>& observer = nullptr,
                const std::function<void(const Stepper&)>& hook = nullptr);

// Trace CSV "n,t,tau,volume,E,E_var,fp_iters"; E_var empty when untracked.
void write_trace_csv(const SolverTrace& trace, std::ostream& os,
                     const std::string& config_comment = "");

}
