#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

namespace tfch {

// Square periodic grid on (0, L)^2 with M points per direction, M even >= 4.
struct Grid2D {
    double L;
    int M;

    Grid2D(double L, int M);
    double h() const { return L / M; }
    double x(int i) const { return i * h(); }
    int size() const { return M * M; }
};

bool same_grid(const Grid2D& a, const Grid2D& b);

// Real M x M field, row-major: values[i*M + j] is the sample at (x_i, x_j).
struct Field2D {
    Grid2D grid;
    std::vector<double> values;

    explicit Field2D(const Grid2D& g);
    double& at(int i, int j) { return values[static_cast<size_t>(i) * grid.M + j]; }
    double at(int i, int j) const { return values[static_cast<size_t>(i) * grid.M + j]; }
};

double mean(const Field2D& u);

// Half-spectrum real transforms (r2c layout, M x (M/2+1) complex entries).
// forward is the raw DFT sum; backward divides by M^2 so the pair round-trips.
// FFTW plans are cached per M behind a mutex; execution is thread-safe.
class SpectralOps {
public:
    explicit SpectralOps(const Grid2D& g);

    int spec_size() const { return grid_.M * (grid_.M / 2 + 1); }
    const Grid2D& grid() const { return grid_; }

    void forward(const Field2D& u, std::vector<std::complex<double>>& uh) const;
    void backward(const std::vector<std::complex<double>>& uh, Field2D& u) const;

    // |k|^2 per half-spectrum index, symmetric integer wavenumbers scaled by 2pi/L.
    const std::vector<double>& k2() const { return k2_; }
    // Parseval weight per half-spectrum index: 2 for doubled interior columns,
    // 1 for the self-conjugate ones.
    const std::vector<double>& parseval_weight() const { return pw_; }

private:
    Grid2D grid_;
    std::vector<double> k2_;
    std::vector<double> pw_;
};

Field2D laplacian(const Field2D& u);

// (-Laplace)^{-1} on the zero-mean subspace; zero mode pinned to 0.
// Throws std::domain_error when |mean(u)| > 1e-10.
Field2D inv_neg_laplacian(const Field2D& u);

struct Norms {
    double l2_inner;  // (u, v)
    double l2;        // ||u||
    double h1_semi;   // ||grad u||
    double l4_pow4;   // ||u||_L4^4
    double hminus1;   // ||u||_{-1}; NaN when u has nonzero mean
    double volume;    // (u, 1)
};

// Grid-sum quadrature h^2 sum for the pointwise quantities; the gradient
// seminorm is spectral with Parseval scaling matched to the grid inner product.
Norms norms_and_inner(const Field2D& u, const Field2D& v);

// Row-major CSV dump preceded by a "# M=...,L=..." comment line.
void write_csv(const Field2D& u, std::ostream& os);

}
