#include "tfch/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "tfch/special.hpp"

namespace tfch {

Eigen::MatrixXd assemble(const KernelTable& table, int n) {
    if (n < 1 || n > table.filled())
        throw std::invalid_argument("assemble: rows 1..n must be filled");
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        const KernelRow& row = table.row(k);
        for (int j = 1; j <= k; ++j) B(k - 1, j - 1) = row.a(k - j);
    }
    Eigen::MatrixXd Bt = B.transpose();
    B += Bt;
    return B;
}

double min_eigenvalue(const Eigen::MatrixXd& B, double tol) {
    if (B.rows() != B.cols()) throw std::invalid_argument("min_eigenvalue: square matrix required");
    const double asym = (B - B.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, B.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("min_eigenvalue: matrix not symmetric");
    (void)tol;  // dense solver is accurate to machine precision
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw EigenSolveError("min_eigenvalue: eigensolver did not converge",
                              30 * static_cast<int>(B.rows()));
    return solver.eigenvalues()(0);
}

double sigma_l1(const KernelTable& table, int n) {
    if (table.family() != Family::L1)
        throw std::invalid_argument("sigma_l1: L1 family required");
    if (n < 1 || n > table.filled())
        throw std::invalid_argument("sigma_l1: rows 1..n must be filled");
    double s = table.a0(1);
    for (int k = 2; k <= n; ++k) s = std::min(s, table.a0(k));
    return s;
}

double sigma_power_bound(double alpha, double tau, int n) {
    return std::pow(2.0 / (n + 1), alpha) / (std::pow(tau, alpha) * std::tgamma(1.0 - alpha));
}

double sigma_polylog_bound(double alpha, double tau) {
    return 4.0 * dirichlet_eta(alpha - 1.0) /
           (std::tgamma(2.0 - alpha) * std::pow(tau, alpha));
}

BoundReport verify_lower_bound(const KernelTable& table, int n, int trials,
                               std::uint64_t seed) {
    if (n < 1 || n > table.filled())
        throw std::invalid_argument("verify_lower_bound: rows 1..n must be filled");
    const Family fam = table.family();
    if (fam != Family::L1 && fam != Family::L1h)
        throw std::invalid_argument("verify_lower_bound: L1 or L1h family required");

    const Eigen::MatrixXd B = assemble(table, n);

    // Partial convolutions of the decomposition family: L1 uses its own
    // kernels; the L1h split runs through the doubled (aux) kernels.
    const KernelTable* conv = &table;
    std::optional<KernelTable> aux;
    if (fam == Family::L1h) {
        aux.emplace(table.mesh(), table.alpha(), Family::AuxL1h);
        aux->extend(n);
        conv = &*aux;
    }
    CompanionKernels comp = companion_kernels(*conv, n);
    const std::vector<double>& p = comp.dcc.back();

    const double sig = (fam == Family::L1) ? sigma_l1(table, n) : 0.0;

    BoundReport report;
    report.trials = trials;
    report.worst_margin = std::numeric_limits<double>::infinity();
    report.worst_decomposition_margin = std::numeric_limits<double>::infinity();

    std::mt19937_64 gen(seed);
    Eigen::VectorXd w(n), v(n);
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < n; ++i) w(i) = 2.0 * uniform01(gen) - 1.0;
        const double wsq = w.squaredNorm();
        const double quad = w.dot(B * w);

        double margin;
        if (fam == Family::L1) {
            margin = quad - sig * wsq;
        } else {
            margin = quad;  // positive definiteness without a scalar bound
        }
        report.worst_margin = std::min(report.worst_margin, margin);
        if (margin < -1e-10 * wsq) ++report.violations;

        // v_k = sum_{j<=k} c_{k-j}^{(k)} w_j with c the decomposition kernels.
        for (int k = 1; k <= n; ++k) {
            const KernelRow& row = conv->row(k);
            double s = 0.0;
            for (int j = 1; j <= k; ++j) s += row.a(k - j) * w(j - 1);
            v(k - 1) = s;
        }
        double split = 0.0;
        for (int k = 1; k <= n; ++k) split += p[static_cast<size_t>(n - k)] * v(k - 1) * v(k - 1);
        if (fam == Family::L1)
            for (int k = 1; k <= n; ++k) split += table.a0(k) * w(k - 1) * w(k - 1);
        const double dmargin = quad - split;
        report.worst_decomposition_margin =
            std::min(report.worst_decomposition_margin, dmargin);
        if (dmargin < -1e-10 * wsq) ++report.decomposition_violations;
    }
    return report;
}

}
