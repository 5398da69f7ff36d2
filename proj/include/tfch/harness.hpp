#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tfch/adaptive.hpp"
#include "tfch/quadform.hpp"
#include "tfch/solver.hpp"

namespace tfch {

// Separable reference profile sin(x) sin(y).
Field2D sin_sin(const Grid2D& g);

// Phi(x, t) = omega_{1+sigma}(t) sin(x) sin(y).
Field2D manufactured_phi(const Grid2D& g, double t, double sigma);

// Forcing that makes Phi solve the equation: the fractional derivative of the
// time factor lands on omega_{1+sigma-alpha}, the potential term is evaluated
// spectrally.  Only defined at t > 0 (the factor is singular at 0 for
// sigma < alpha).
Field2D forcing_manufactured(double t, const Grid2D& g, const ModelParams& params,
                             double sigma);

// Seeded uniform(-amp, amp) samples, mean-subtracted so the zero-mean
// machinery applies exactly.
Field2D random_initial(const Grid2D& g, double amp, std::uint64_t seed);

enum class MeshKind { Uniform, Graded, FixedRatio, Random, Composite };
MeshKind mesh_kind_from_name(const std::string& name);
const char* mesh_kind_name(MeshKind k);

struct MeshSpec {
    MeshKind kind = MeshKind::Uniform;
    double T = 1.0;
    int N = 100;
    double gamma = 2.0;   // graded / composite
    double ratio = 1.1;   // fixed-ratio
    std::uint64_t seed = 0;
    TimeMesh build() const;
    // The table column summarizing the mesh: gamma, ratio or seed.
    double param() const;
};

struct EigenConfig {
    Family family = Family::L1;
    MeshSpec mesh;
    std::vector<double> alphas = {0.5};
    std::vector<int> Ns = {100};
};

struct EigenRow {
    int N;
    double alpha;
    double param;
    double sigma_l1;  // NaN for families other than L1
    double lambda_min;
};

// One row per (N, alpha); rows computed in parallel.  For uniform L1 meshes
// the closed form 1/(Gamma(2-alpha) tau^alpha) must match sigma_l1 to 1e-10
// relative; a mismatch is reported as a failed invariant.
std::vector<EigenRow> run_eigen_table(const EigenConfig& cfg);
void write_eigen_csv(const EigenConfig& cfg, const std::vector<EigenRow>& rows,
                     std::ostream& os);

struct ConvergeConfig {
    Scheme scheme = Scheme::L1;
    double alpha = 0.4;
    double sigma = 0.4;
    double kappa = 1.0;
    double epsilon = 0.5;
    double T = 1.0;
    double gamma = 4.0;
    int M = 64;
    std::vector<int> Ns = {40, 80, 160, 320};
    std::uint64_t seed0 = 7;  // per-N mesh seed is seed0 + N
    SolverOptions opts;
};

struct ConvergeRow {
    int N;
    double r_max;
    double tau_max;
    double error;  // max_n ||Phi^n - phi^n||_L2
    double order;  // NaN on the first row
};

// Error on the composite mesh with N steps; r_max/tau_max of the realized mesh.
ConvergeRow manufactured_error(const ConvergeConfig& cfg, int N);
std::vector<ConvergeRow> run_convergence(const ConvergeConfig& cfg);
void write_converge_csv(const ConvergeConfig& cfg, const std::vector<ConvergeRow>& rows,
                        std::ostream& os);

struct SimulateConfig {
    Scheme scheme = Scheme::L1;
    ModelParams params{0.01, 0.05, 0.5};
    int M = 64;
    double L = 2.0 * 3.14159265358979323846;
    double init_amp = 0.001;
    std::uint64_t init_seed = 0;
    MeshSpec mesh;                       // ignored when adaptive
    bool adaptive = false;
    AdaptivePolicy policy;
    WarmupSpec warmup;
    SolverOptions opts;
    std::vector<double> snapshot_times;  // nearest record times get dumped
};

struct SimulateResult {
    SolverTrace trace;
    int total_levels = 0;
    std::vector<std::pair<double, Field2D>> snapshots;
    // Post-run invariant checks: volume drift and, where a law applies, the
    // variational-energy monotonicity.
    bool invariants_ok = true;
    std::string invariant_message;
};

SimulateResult run_simulation(const SimulateConfig& cfg);

// key=value lines, '#' comments; used for the CLI --config file.
std::map<std::string, std::string> read_config(std::istream& is);

}
