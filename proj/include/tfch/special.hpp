#pragma once

namespace tfch {

// omega_beta(t) = t^(beta-1) / Gamma(beta), the fractional-integral kernel.
// Requires beta > 0.  At t = 0: returns 0 for beta > 1, 1 for beta = 1,
// +infinity for beta < 1.
double omega(double beta, double t);

// Forward difference [omega(beta, y + d) - omega(beta, y)] / d, d > 0, y >= 0.
// Computed via expm1/log1p so no digits are lost when d << y; the naive
// subtraction is pure noise in that regime and must not be used.
double omega_dq(double beta, double y, double d);

// Dirichlet eta(s) = sum_{n>=1} (-1)^(n-1) n^(-s), any real s, by the
// Euler-accelerated (binomial) alternating series.  Throws std::runtime_error
// if the acceleration does not reach tol within the term budget.
double dirichlet_eta(double s, double tol = 1e-10, long max_terms = 1000000);

}
