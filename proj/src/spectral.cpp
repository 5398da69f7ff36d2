#include "tfch/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace tfch {

namespace {

// Plans are created once per M under a lock with FFTW_UNALIGNED, so they can
// be re-executed on any caller-owned buffer via the array-execute interface.
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;

PlanPair& plans_for(int M) {
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = cache.find(M);
    if (it != cache.end()) return it->second;
    std::vector<double> real(static_cast<size_t>(M) * M);
    std::vector<std::complex<double>> spec(static_cast<size_t>(M) * (M / 2 + 1));
    PlanPair p;
    p.fwd = fftw_plan_dft_r2c_2d(M, M, real.data(),
                                 reinterpret_cast<fftw_complex*>(spec.data()),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_c2r_2d(M, M, reinterpret_cast<fftw_complex*>(spec.data()),
                                 real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.fwd || !p.bwd) throw std::runtime_error("FFTW plan creation failed");
    return cache.emplace(M, p).first->second;
}

}  // namespace

Grid2D::Grid2D(double L, int M) : L(L), M(M) {
    if (!(L > 0.0)) throw std::invalid_argument("Grid2D: L must be positive");
    if (M < 4 || M % 2 != 0) throw std::invalid_argument("Grid2D: M must be even and >= 4");
}

bool same_grid(const Grid2D& a, const Grid2D& b) { return a.M == b.M && a.L == b.L; }

Field2D::Field2D(const Grid2D& g) : grid(g), values(static_cast<size_t>(g.size()), 0.0) {}

double mean(const Field2D& u) {
    double s = 0.0;
    for (double v : u.values) s += v;
    return s / u.grid.size();
}

SpectralOps::SpectralOps(const Grid2D& g) : grid_(g) {
    const int M = g.M;
    const int cols = M / 2 + 1;
    const double base = 2.0 * M_PI / g.L;
    k2_.resize(static_cast<size_t>(M) * cols);
    pw_.resize(k2_.size());
    for (int i = 0; i < M; ++i) {
        const int ki = (i <= M / 2) ? i : i - M;
        for (int j = 0; j < cols; ++j) {
            const double kx = base * ki;
            const double ky = base * j;
            k2_[static_cast<size_t>(i) * cols + j] = kx * kx + ky * ky;
            // Columns 0 and M/2 are their own conjugates in the r2c layout.
            pw_[static_cast<size_t>(i) * cols + j] = (j == 0 || j == M / 2) ? 1.0 : 2.0;
        }
    }
    plans_for(M);  // warm the cache so later execution never locks
}

void SpectralOps::forward(const Field2D& u, std::vector<std::complex<double>>& uh) const {
    if (!same_grid(u.grid, grid_)) throw std::invalid_argument("forward: grid mismatch");
    uh.resize(static_cast<size_t>(spec_size()));
    // FFTW may scribble on the input of r2c transforms; hand it a copy.
    std::vector<double> tmp(u.values);
    fftw_execute_dft_r2c(plans_for(grid_.M).fwd, tmp.data(),
                         reinterpret_cast<fftw_complex*>(uh.data()));
}

void SpectralOps::backward(const std::vector<std::complex<double>>& uh, Field2D& u) const {
    if (!same_grid(u.grid, grid_)) throw std::invalid_argument("backward: grid mismatch");
    if (uh.size() != static_cast<size_t>(spec_size()))
        throw std::invalid_argument("backward: spectrum size mismatch");
    std::vector<std::complex<double>> tmp(uh);  // c2r destroys its input
    fftw_execute_dft_c2r(plans_for(grid_.M).bwd,
                         reinterpret_cast<fftw_complex*>(tmp.data()), u.values.data());
    const double inv = 1.0 / grid_.size();
    for (double& v : u.values) v *= inv;
}

Field2D laplacian(const Field2D& u) {
    SpectralOps ops(u.grid);
    std::vector<std::complex<double>> uh;
    ops.forward(u, uh);
    const auto& k2 = ops.k2();
    for (size_t i = 0; i < uh.size(); ++i) uh[i] *= -k2[i];
    Field2D out(u.grid);
    ops.backward(uh, out);
    return out;
}

Field2D inv_neg_laplacian(const Field2D& u) {
    if (std::fabs(mean(u)) > 1e-10)
        throw std::domain_error("inv_neg_laplacian: field must have zero mean");
    SpectralOps ops(u.grid);
    std::vector<std::complex<double>> uh;
    ops.forward(u, uh);
    const auto& k2 = ops.k2();
    for (size_t i = 0; i < uh.size(); ++i) uh[i] = (k2[i] > 0.0) ? uh[i] / k2[i] : 0.0;
    Field2D out(u.grid);
    ops.backward(uh, out);
    return out;
}

Norms norms_and_inner(const Field2D& u, const Field2D& v) {
    if (!same_grid(u.grid, v.grid)) throw std::invalid_argument("norms_and_inner: grid mismatch");
    const double h2 = u.grid.h() * u.grid.h();
    double uv = 0.0, uu = 0.0, u4 = 0.0, u1 = 0.0;
    for (size_t i = 0; i < u.values.size(); ++i) {
        const double a = u.values[i];
        uv += a * v.values[i];
        uu += a * a;
        u4 += a * a * a * a;
        u1 += a;
    }

    SpectralOps ops(u.grid);
    std::vector<std::complex<double>> uh;
    ops.forward(u, uh);
    const auto& k2 = ops.k2();
    const auto& pw = ops.parseval_weight();
    // h^2 sum u^2 = (h^2/M^2) sum |uhat|^2 over the full spectrum.
    const double scale = h2 / u.grid.size();
    double grad = 0.0, hm1 = 0.0;
    for (size_t i = 0; i < uh.size(); ++i) {
        const double mag = std::norm(uh[i]) * pw[i];
        grad += k2[i] * mag;
        if (k2[i] > 0.0) hm1 += mag / k2[i];
    }

    Norms n;
    n.l2_inner = h2 * uv;
    n.l2 = std::sqrt(h2 * uu);
    n.h1_semi = std::sqrt(scale * grad);
    n.l4_pow4 = h2 * u4;
    n.volume = h2 * u1;
    const double zero_mode = std::fabs(uh[0].real()) / u.grid.size();
    n.hminus1 = (zero_mode > 1e-10) ? std::numeric_limits<double>::quiet_NaN()
                                    : std::sqrt(scale * hm1);
    return n;
}

void write_csv(const Field2D& u, std::ostream& os) {
    os << "# M=" << u.grid.M << ",L=" << u.grid.L << '\n';
    os.precision(17);
    const int M = u.grid.M;
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            os << u.at(i, j);
            os << (j + 1 < M ? ',' : '\n');
        }
    }
}

}
