#include "tfch/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace tfch {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Rebuilds steps and ratios from levels and forces the last level to T exactly.
TimeMesh finish(std::vector<double> levels, double T) {
    levels.front() = 0.0;
    levels.back() = T;
    return mesh_from_levels(std::move(levels));
}

}  // namespace

double TimeMesh::tau_max() const {
    return *std::max_element(steps.begin(), steps.end());
}

double TimeMesh::ratio_max() const {
    if (ratios.empty()) return 1.0;
    return *std::max_element(ratios.begin(), ratios.end());
}

void TimeMesh::validate() const {
    require(!steps.empty(), "TimeMesh: at least one step required");
    require(levels.size() == steps.size() + 1, "TimeMesh: levels/steps size mismatch");
    require(ratios.size() + 1 == steps.size() || (steps.size() == 1 && ratios.empty()),
            "TimeMesh: ratios size mismatch");
    require(levels.front() == 0.0, "TimeMesh: t_0 must be 0");
    for (size_t k = 1; k < levels.size(); ++k) {
        require(levels[k] > levels[k - 1], "TimeMesh: levels must be strictly increasing");
        const double d = levels[k] - levels[k - 1];
        require(steps[k - 1] > 0.0, "TimeMesh: steps must be positive");
        // Anchored on the level magnitude: differencing t_k loses ulps of t_k,
        // not of tau_k, so a step-relative bound would reject exact meshes.
        require(std::fabs(steps[k - 1] - d) <=
                    1e-14 * std::max(std::fabs(levels[k]), steps[k - 1]),
                "TimeMesh: step does not match level difference");
    }
    for (size_t k = 1; k < steps.size(); ++k) {
        const double r = steps[k] / steps[k - 1];
        require(std::fabs(ratios[k - 1] - r) <= 1e-12 * r,
                "TimeMesh: ratio does not match step quotient");
    }
}

TimeMesh mesh_from_levels(std::vector<double> levels) {
    require(levels.size() >= 2, "mesh_from_levels: need at least two levels");
    require(levels.front() == 0.0, "mesh_from_levels: t_0 must be 0");
    TimeMesh m;
    m.levels = std::move(levels);
    m.steps.resize(m.levels.size() - 1);
    for (size_t k = 1; k < m.levels.size(); ++k) {
        m.steps[k - 1] = m.levels[k] - m.levels[k - 1];
        require(m.steps[k - 1] > 0.0, "mesh_from_levels: levels must be strictly increasing");
    }
    m.ratios.resize(m.steps.size() > 1 ? m.steps.size() - 1 : 0);
    for (size_t k = 1; k < m.steps.size(); ++k) m.ratios[k - 1] = m.steps[k] / m.steps[k - 1];
    return m;
}

TimeMesh make_uniform(double T, int N) {
    require(T > 0.0, "make_uniform: T must be positive");
    require(N >= 1, "make_uniform: N must be >= 1");
    // Steps and ratios are stored as the intended exact constants; levels come
    // from the closed form so local differences agree to ulps of t_k.
    const double tau = T / N;
    TimeMesh m;
    m.levels.resize(static_cast<size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) m.levels[static_cast<size_t>(k)] = k * tau;
    m.levels.back() = T;
    m.steps.assign(static_cast<size_t>(N), tau);
    m.ratios.assign(N > 1 ? static_cast<size_t>(N) - 1 : 0, 1.0);
    return m;
}

TimeMesh make_graded(double T, int N, double gamma) {
    require(T > 0.0, "make_graded: T must be positive");
    require(N >= 1, "make_graded: N must be >= 1");
    require(gamma >= 1.0, "make_graded: gamma must be >= 1");
    std::vector<double> levels(static_cast<size_t>(N) + 1);
    for (int k = 0; k <= N; ++k)
        levels[static_cast<size_t>(k)] = T * std::pow(double(k) / N, gamma);
    return finish(std::move(levels), T);
}

TimeMesh make_fixed_ratio(double T, int N, double r) {
    require(T > 0.0, "make_fixed_ratio: T must be positive");
    require(N >= 1, "make_fixed_ratio: N must be >= 1");
    require(r > 0.0, "make_fixed_ratio: r must be positive");
    require((N - 1) * std::fabs(std::log(r)) < 600.0,
            "make_fixed_ratio: geometric range not representable");
    std::vector<double> steps(static_cast<size_t>(N));
    double s = 1.0, sum = 0.0;
    for (int k = 0; k < N; ++k) {
        steps[static_cast<size_t>(k)] = s;
        sum += s;
        s *= r;
    }
    // One common scale factor keeps the stored ratio constant.
    const double scale = T / sum;
    TimeMesh m;
    m.steps.resize(static_cast<size_t>(N));
    for (int k = 0; k < N; ++k) m.steps[static_cast<size_t>(k)] = steps[static_cast<size_t>(k)] * scale;
    m.ratios.assign(N > 1 ? static_cast<size_t>(N) - 1 : 0, r);
    // Compensated cumulative sum so the pinned final level stays within ulps
    // of the accumulated steps.
    m.levels.assign(static_cast<size_t>(N) + 1, 0.0);
    double acc = 0.0, comp = 0.0;
    for (int k = 0; k < N; ++k) {
        const double x = m.steps[static_cast<size_t>(k)];
        const double t = acc + x;
        comp += std::fabs(acc) >= std::fabs(x) ? (acc - t) + x : (x - t) + acc;
        acc = t;
        m.levels[static_cast<size_t>(k) + 1] = acc + comp;
    }
    m.levels.back() = T;
    return m;
}

TimeMesh make_random(double T, int N, std::uint64_t seed) {
    require(T > 0.0, "make_random: T must be positive");
    require(N >= 1, "make_random: N must be >= 1");
    std::mt19937_64 gen(seed);
    std::vector<double> s(static_cast<size_t>(N));
    double sum = 0.0;
    for (auto& v : s) {
        v = uniform01(gen);
        sum += v;
    }
    std::vector<double> levels(static_cast<size_t>(N) + 1, 0.0);
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
        acc += T * s[static_cast<size_t>(k)] / sum;
        levels[static_cast<size_t>(k) + 1] = acc;
    }
    return finish(std::move(levels), T);
}

TimeMesh make_composite(double T, int N, double gamma, std::uint64_t seed) {
    require(T > 0.0, "make_composite: T must be positive");
    require(N >= 1, "make_composite: N must be >= 1");
    require(gamma >= 1.0, "make_composite: gamma must be >= 1");
    require(T >= 1.0 / gamma, "make_composite: T must be at least 1/gamma");
    const double T0 = std::min(1.0 / gamma, T);
    const int N0 = static_cast<int>(std::ceil(N / (T + 1.0 - 1.0 / gamma)));
    require(N0 <= N, "make_composite: N too small for the graded head");
    const int N1 = N - N0;
    require(N1 >= 1 || T0 == T, "make_composite: no random steps left to reach T");

    std::vector<double> levels(static_cast<size_t>(N) + 1, 0.0);
    for (int k = 0; k <= N0; ++k)
        levels[static_cast<size_t>(k)] = T0 * std::pow(double(k) / N0, gamma);
    if (N1 > 0) {
        std::mt19937_64 gen(seed);
        std::vector<double> s(static_cast<size_t>(N1));
        double sum = 0.0;
        for (auto& v : s) {
            v = uniform01(gen);
            sum += v;
        }
        double acc = T0;
        for (int k = 0; k < N1; ++k) {
            acc += (T - T0) * s[static_cast<size_t>(k)] / sum;
            levels[static_cast<size_t>(N0 + k) + 1] = acc;
        }
    }
    return finish(std::move(levels), T);
}

void append_step(TimeMesh& mesh, double tau) {
    require(tau > 0.0, "append_step: tau must be positive");
    if (!mesh.steps.empty()) mesh.ratios.push_back(tau / mesh.steps.back());
    mesh.steps.push_back(tau);
    mesh.levels.push_back(mesh.levels.back() + tau);
}

double uniform01(std::mt19937_64& gen) {
    for (;;) {
        const double u = double(gen() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

void write_csv(const TimeMesh& mesh, std::ostream& os) {
    os << "k,t_k,tau_k,r_k\n";
    os.precision(17);
    os << "0,0,,\n";
    for (int k = 1; k <= mesh.size(); ++k) {
        os << k << ',' << mesh.t(k) << ',' << mesh.tau(k) << ',';
        if (k >= 2) os << mesh.ratio(k);
        os << '\n';
    }
}

}
