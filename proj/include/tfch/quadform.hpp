#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

#include "tfch/kernels.hpp"

namespace tfch {

// B = A + A^T with A_{kj} = a_{k-j}^{(k)} on the lower triangle, so that
// w.Bw = 2 sum_k w_k sum_{j<=k} a_{k-j}^{(k)} w_j.
Eigen::MatrixXd assemble(const KernelTable& table, int n);

class EigenSolveError : public std::runtime_error {
public:
    EigenSolveError(const std::string& msg, int iterations)
        : std::runtime_error(msg), iterations(iterations) {}
    int iterations;
};

// Smallest eigenvalue of a symmetric matrix; negative values returned as-is.
// The dense solver resolves well below the advisory tol; non-convergence
// throws EigenSolveError with the iteration count.
double min_eigenvalue(const Eigen::MatrixXd& B, double tol = 1e-8);

// min_k a_0^{(k)}: the analytic lower bound for the L1 quadratic form.
double sigma_l1(const KernelTable& table, int n);

// Older uniform-mesh bound (2/(n+1))^alpha / (tau^alpha Gamma(1-alpha));
// decays with n and badly undershoots the eigenvalue.
double sigma_power_bound(double alpha, double tau, int n);

// Sharp uniform-mesh bound 4 eta(alpha-1) / (Gamma(2-alpha) tau^alpha),
// eta the Dirichlet eta function evaluated by alternating series.
double sigma_polylog_bound(double alpha, double tau);

struct BoundReport {
    int trials = 0;
    int violations = 0;                // against the scalar lower bound
    int decomposition_violations = 0;  // against the companion-kernel split
    double worst_margin = 0.0;
    double worst_decomposition_margin = 0.0;
};

// Random-vector verification, w uniform in [-1,1]^n, tolerance -1e-10 |w|^2.
// L1 family: w.Bw >= sigma_l1 |w|^2, and the refinement
//   w.Bw >= sum_k a_0^{(k)} w_k^2 + sum_k p_{n-k}^{(n)} v_k^2,
// v_k = sum_j a_{k-j}^{(k)} w_j the partial convolutions.
// L1h family: w.Bw > 0 via the doubled-kernel split
//   w.Bw >= sum_k phat_{n-k}^{(n)} vhat_k^2  (companions of the aux family).
BoundReport verify_lower_bound(const KernelTable& table, int n, int trials,
                               std::uint64_t seed);

}
