#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace tfch {

// Nonuniform time grid 0 = t_0 < t_1 < ... < t_N.
// steps[k-1] = tau_k = t_k - t_{k-1}, ratios[k-2] = r_k = tau_k / tau_{k-1}.
struct TimeMesh {
    std::vector<double> levels;
    std::vector<double> steps;
    std::vector<double> ratios;

    int size() const { return static_cast<int>(steps.size()); }  // N
    double t(int k) const { return levels[static_cast<size_t>(k)]; }
    double tau(int k) const { return steps[static_cast<size_t>(k - 1)]; }
    double ratio(int k) const { return ratios[static_cast<size_t>(k - 2)]; }
    double horizon() const { return levels.back(); }
    double tau_max() const;
    double ratio_max() const;  // 1 when N < 2

    // Throws std::invalid_argument if the cross-field invariants are broken.
    void validate() const;
};

// Builds steps/ratios from a level vector; levels[0] must be exactly 0.
TimeMesh mesh_from_levels(std::vector<double> levels);

TimeMesh make_uniform(double T, int N);
// t_k = T (k/N)^gamma, gamma >= 1.
TimeMesh make_graded(double T, int N, double gamma);
// tau_k = tau_1 r^(k-1) with the sum normalized to T.
TimeMesh make_fixed_ratio(double T, int N, double r);
// tau_k = T s_k / sum s_j, s_k uniform in (0,1) from the seeded generator.
TimeMesh make_random(double T, int N, std::uint64_t seed);
// Graded head on [0, T_0], T_0 = 1/gamma, N_0 = ceil(N/(T+1-1/gamma)) steps,
// followed by N - N_0 normalized random steps covering (T_0, T].
TimeMesh make_composite(double T, int N, double gamma, std::uint64_t seed);

// Extends the mesh by one step; used by the adaptive driver.
void append_step(TimeMesh& mesh, double tau);

// Uniform draw in (0,1): 53-bit mantissa, exact zeros redrawn so steps stay positive.
double uniform01(std::mt19937_64& gen);

// CSV dump with header "k,t_k,tau_k,r_k"; the r column is empty for k = 0, 1.
void write_csv(const TimeMesh& mesh, std::ostream& os);

}
