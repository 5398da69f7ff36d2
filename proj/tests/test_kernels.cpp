#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tfch/kernels.hpp"
#include "tfch/mesh.hpp"
#include "tfch/special.hpp"

using namespace tfch;

namespace {

// 64-point Gauss-Legendre rule on [-1,1], nodes by Newton on the Legendre
// recurrence.  Test-side oracle machinery, independent of the library path.
struct GaussRule {
    std::vector<double> x, w;
    explicit GaussRule(int m) : x(m), w(m) {
        for (int i = 0; i < m; ++i) {
            double t = std::cos(3.14159265358979323846 * (i + 0.75) / (m + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int k = 2; k <= m; ++k) {
                    const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = m * (t * p1 - p0) / (t * t - 1.0);
                const double dt = p1 / dp;
                t -= dt;
                if (std::fabs(dt) < 1e-16) break;
            }
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = m * (t * p1 - p0) / (t * t - 1.0);
            x[static_cast<size_t>(i)] = t;
            w[static_cast<size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }

    template <typename F>
    double integrate(F f, double a, double b) const {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (size_t i = 0; i < x.size(); ++i) s += w[i] * f(mid + half * x[i]);
        return s * half;
    }
};

const GaussRule& rule() {
    static GaussRule r(64);
    return r;
}

// Integral of omega_{1-alpha}(upper - s) over [a, b] where upper >= b.  In the
// substituted variable u = upper - s this is omega_{1-alpha}(u) over
// [upper - b, upper - a]; when b touches the singularity the panel chain
// shrinks geometrically toward u = 0, where the power stays representable and
// no cancellation upper - s is ever formed near the blow-up.
double singular_integral(double alpha, double upper, double a, double b) {
    const auto g = [&](double u) { return omega(1.0 - alpha, u); };
    const double lo = upper - b, hi = upper - a;
    if (lo > 1e-12 * hi) return rule().integrate(g, lo, hi);
    double total = 0.0;
    double width = hi;
    while (width > 1e-300) {
        total += rule().integrate(g, 0.5 * width, width);
        width *= 0.5;
    }
    return total;
}

double l1_weight_oracle(const TimeMesh& mesh, double alpha, int n, int k) {
    return singular_integral(alpha, mesh.t(n), mesh.t(k - 1), mesh.t(k)) / mesh.tau(k);
}

double l1h_weight_oracle(const TimeMesh& mesh, double alpha, int n, int k) {
    const double th = 0.5 * (mesh.t(n) + mesh.t(n - 1));
    const double upper = std::min(mesh.t(k), th);
    return singular_integral(alpha, th, mesh.t(k - 1), upper) / mesh.tau(k);
}

KernelRow synthetic_row(int n, Family family, std::vector<double> w) {
    KernelRow r;
    r.n = n;
    r.family = family;
    r.weights = std::move(w);
    return r;
}

}  // namespace

TEST_CASE("l1 weights match the singular quadrature oracle") {
    const std::vector<TimeMesh> meshes = {make_uniform(3.0, 3), make_graded(1.0, 5, 3.0),
                                          make_random(1.0, 8, 42)};
    for (const TimeMesh& mesh : meshes) {
        for (double alpha : {0.25, 0.5, 0.85}) {
            for (int n = 1; n <= mesh.size(); ++n) {
                const KernelRow row = l1_row(mesh, alpha, n);
                REQUIRE(static_cast<int>(row.weights.size()) == n);
                for (int k = 1; k <= n; ++k) {
                    CHECK(row.a(n - k) ==
                          doctest::Approx(l1_weight_oracle(mesh, alpha, n, k))
                              .epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("l1 frozen values on the unit-step mesh") {
    const TimeMesh mesh = make_uniform(3.0, 3);
    const KernelRow r1 = l1_row(mesh, 0.5, 1);
    CHECK(r1.a(0) == doctest::Approx(1.1283791670955126).epsilon(1e-12));
    CHECK(r1.a(0) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-14));

    const KernelRow r2 = l1_row(mesh, 0.5, 2);
    CHECK(r2.a(1) == doctest::Approx(0.46738995451021825).epsilon(1e-12));
    CHECK(r2.a(1) ==
          doctest::Approx((std::sqrt(2.0) - 1.0) / std::tgamma(1.5)).epsilon(1e-14));
}

TEST_CASE("l1h weights match the half-point quadrature oracle") {
    const std::vector<TimeMesh> meshes = {make_uniform(3.0, 3), make_graded(1.0, 5, 2.0),
                                          make_random(1.0, 7, 17)};
    for (const TimeMesh& mesh : meshes) {
        for (double alpha : {0.25, 0.5, 0.85}) {
            for (int n = 1; n <= mesh.size(); ++n) {
                const KernelRow row = l1h_row(mesh, alpha, n);
                for (int k = 1; k <= n; ++k) {
                    CHECK(row.a(n - k) ==
                          doctest::Approx(l1h_weight_oracle(mesh, alpha, n, k))
                              .epsilon(1e-12));
                }
            }
        }
    }

    const KernelRow h1 = l1h_row(make_uniform(3.0, 3), 0.5, 1);
    CHECK(h1.a(0) == doctest::Approx(0.7978845608028654).epsilon(1e-12));
    CHECK(h1.a(0) == doctest::Approx(std::sqrt(0.5) / std::tgamma(1.5)).epsilon(1e-14));
}

TEST_CASE("l1a rows are averages of consecutive l1 rows") {
    const TimeMesh mesh = make_random(1.0, 9, 5);
    const double alpha = 0.6;
    for (int n = 1; n <= mesh.size(); ++n) {
        const KernelRow avg = l1a_row(mesh, alpha, n);
        const KernelRow cur = l1_row(mesh, alpha, n);
        CHECK(avg.a(0) == 0.5 * cur.a(0));  // exact by definition
        if (n >= 2) {
            const KernelRow prev = l1_row(mesh, alpha, n - 1);
            for (int j = 1; j < n; ++j)
                CHECK(avg.a(j) ==
                      doctest::Approx(0.5 * (cur.a(j) + prev.a(j - 1))).epsilon(1e-15));
        }
    }

    const KernelRow a2 = l1a_row(make_uniform(3.0, 3), 0.5, 2);
    CHECK(a2.a(1) == doctest::Approx(0.7978845608028654).epsilon(1e-12));

    const KernelRow a1 = l1a_row(make_uniform(3.0, 3), 0.5, 1);
    CHECK(a1.weights.size() == 1);
    CHECK(a1.a(0) == 0.5 * l1_row(make_uniform(3.0, 3), 0.5, 1).a(0));
}

TEST_CASE("auxiliary rows double the lag-0 weight only") {
    const KernelRow base = synthetic_row(2, Family::L1h, {0.8, 0.5});
    const KernelRow aux = auxiliary_row(base);
    CHECK(aux.family == Family::AuxL1h);
    CHECK(aux.a(0) == 1.6);
    CHECK(aux.a(1) == 0.5);

    const KernelRow single = auxiliary_row(synthetic_row(1, Family::L1a, {0.3}));
    CHECK(single.family == Family::AuxL1a);
    CHECK(single.a(0) == 0.6);

    CHECK_THROWS_AS(auxiliary_row(synthetic_row(1, Family::L1, {1.0})),
                    std::invalid_argument);

    // Doubled half-point lag-0 dominates lag 1 on any mesh.
    for (const TimeMesh& mesh : {make_uniform(1.0, 10), make_random(1.0, 10, 3)}) {
        KernelTable t(mesh, 0.3, Family::AuxL1h);
        t.extend(10);
        for (int n = 2; n <= 10; ++n) CHECK(t.row(n).a(0) - t.row(n).a(1) > 0.0);
    }
}

TEST_CASE("alpha domain is enforced") {
    const TimeMesh mesh = make_uniform(1.0, 2);
    CHECK_THROWS_AS(l1_row(mesh, 1e-4, 1), std::invalid_argument);
    CHECK_THROWS_AS(l1_row(mesh, 1.0 - 1e-11, 1), std::invalid_argument);
    CHECK_THROWS_AS(l1h_row(mesh, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(l1a_row(mesh, 1.0, 1), std::invalid_argument);
    CHECK_NOTHROW(l1_row(mesh, kAlphaMin, 1));
    CHECK_NOTHROW(l1_row(mesh, kAlphaMax, 1));
}

TEST_CASE("alpha near one reproduces the backward-difference limits") {
    const double alpha = 1.0 - 1e-8;
    const TimeMesh mesh = make_graded(1.0, 6, 2.0);
    KernelTable table(mesh, alpha, Family::L1);
    table.extend(6);
    for (int n = 1; n <= 6; ++n) {
        CHECK(table.a0(n) == doctest::Approx(1.0 / mesh.tau(n)).epsilon(1e-6));
        const KernelRow h = l1h_row(mesh, alpha, n);
        CHECK(h.a(0) == doctest::Approx(1.0 / mesh.tau(n)).epsilon(1e-6));
    }
    // Companions collapse to plain time steps.
    for (int n = 1; n <= 6; ++n) {
        const std::vector<double> theta = doc_row(table, n);
        CHECK(theta[0] == doctest::Approx(mesh.tau(n)).epsilon(1e-5));
        for (int j = 1; j < n; ++j) CHECK(std::fabs(theta[(size_t)j]) <= 1e-6 * mesh.tau(n));
    }
    const CompanionKernels c = companion_kernels(table, 6);
    for (int k = 1; k <= 6; ++k)
        CHECK(c.dcc.back()[static_cast<size_t>(6 - k)] ==
              doctest::Approx(mesh.tau(k)).epsilon(1e-5));
}

TEST_CASE("doc base case and the frozen 2x2 inverse") {
    const TimeMesh mesh = make_uniform(3.0, 3);
    KernelTable table(mesh, 0.5, Family::L1);
    table.extend(2);
    const std::vector<double> t1 = doc_row(table, 1);
    CHECK(t1[0] == doctest::Approx(1.0 / table.a0(1)).epsilon(1e-15));

    const std::vector<double> t2 = doc_row(table, 2);
    CHECK(t2[1] == doctest::Approx(-0.36708721186274235).epsilon(1e-12));
    CHECK(t2[1] ==
          doctest::Approx(-table.row(2).a(1) / (table.a0(1) * table.a0(2))).epsilon(1e-14));
}

TEST_CASE("companion identities hold on random meshes") {
    for (Family family : {Family::L1, Family::AuxL1h, Family::L1a, Family::AuxL1a}) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            const TimeMesh mesh = make_random(1.0, 40, seed);
            for (double alpha : {0.3, 0.7}) {
                KernelTable table(mesh, alpha, family);
                table.extend(40);
                const CompanionKernels c = companion_kernels(table, 40);
                for (int n = 1; n <= 40; ++n) {
                    for (int k = 1; k <= n; ++k) {
                        double ortho = 0.0, comp = 0.0;
                        for (int j = k; j <= n; ++j) {
                            const double a = table.row(j).a(j - k);
                            ortho += c.doc[(size_t)n - 1][(size_t)(n - j)] * a;
                            comp += c.dcc[(size_t)n - 1][(size_t)(n - j)] * a;
                        }
                        CHECK(std::fabs(ortho - (k == n ? 1.0 : 0.0)) <= 1e-11);
                        CHECK(std::fabs(comp - 1.0) <= 1e-11);
                    }
                }
            }
        }
    }
}

TEST_CASE("doc sign pattern and dcc nonnegativity for the covered families") {
    // The sign lemmas cover L1 and the doubled half-point family.
    for (Family family : {Family::L1, Family::AuxL1h}) {
        const TimeMesh mesh = make_random(1.0, 50, 11);
        for (double alpha : {0.2, 0.5, 0.9}) {
            KernelTable table(mesh, alpha, family);
            table.extend(50);
            const CompanionKernels c = companion_kernels(table, 50);
            for (int n = 1; n <= 50; ++n) {
                CHECK(c.doc[(size_t)n - 1][0] > 0.0);
                double sum = 0.0;
                for (int j = 0; j < n; ++j) {
                    if (j > 0) CHECK(c.doc[(size_t)n - 1][(size_t)j] < 0.0);
                    sum += c.doc[(size_t)n - 1][(size_t)j];
                    CHECK(c.dcc[(size_t)n - 1][(size_t)j] >= 0.0);
                }
                CHECK(sum > 0.0);
            }
        }
    }
}

TEST_CASE("theta rows are dcc increments") {
    const TimeMesh mesh = make_random(1.0, 30, 23);
    KernelTable table(mesh, 0.4, Family::L1);
    table.extend(30);
    const CompanionKernels c = companion_kernels(table, 30);
    for (int n = 2; n <= 30; ++n) {
        const auto& theta = c.doc[(size_t)n - 1];
        const auto& p = c.dcc[(size_t)n - 1];
        const auto& p_prev = c.dcc[(size_t)n - 2];
        CHECK(p[0] == theta[0]);
        for (int j = 1; j < n; ++j) {
            // One rounding from the accumulation p = theta + p_prev.
            const double scale =
                std::max({std::fabs(p[(size_t)j]), std::fabs(p_prev[(size_t)j - 1]), 1e-30});
            CHECK(std::fabs(theta[(size_t)j] - (p[(size_t)j] - p_prev[(size_t)j - 1])) <=
                  1e-14 * scale);
        }
    }
}

TEST_CASE("doc rejects a singular kernel triangle") {
    const std::vector<KernelRow> rows = {synthetic_row(1, Family::L1, {1.0}),
                                         synthetic_row(2, Family::L1, {0.0, 0.5})};
    CHECK_THROWS_AS(doc_row(rows, 2), std::runtime_error);
    CHECK_THROWS_AS(dcc_next({}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("l1 satisfies both criteria variants everywhere") {
    const std::vector<TimeMesh> meshes = {
        make_uniform(1.0, 50),          make_graded(1.0, 40, 3.0),
        make_fixed_ratio(1.0, 30, 1.3), make_fixed_ratio(1.0, 30, 0.7),
        make_random(1.0, 40, 9)};
    for (const TimeMesh& mesh : meshes) {
        for (double alpha : {0.1, 0.5, 0.9}) {
            KernelTable table(mesh, alpha, Family::L1);
            table.extend(mesh.size());
            const CriteriaReport rep =
                check_criteria(table, mesh.size(), CriteriaVariant::Nonuniform);
            CHECK(rep.all_pass());
            CHECK(rep.first_violation() == nullptr);
            // Strict positivity and decrease along every row.
            for (int n = 1; n <= mesh.size(); ++n) {
                const KernelRow& r = table.row(n);
                CHECK(r.a(n - 1) > 0.0);
                for (int j = 1; j < n; ++j) CHECK(r.a(j - 1) > r.a(j));
            }
        }
    }
    const TimeMesh uniform_mesh = make_uniform(1.0, 50);
    KernelTable unif(uniform_mesh, 0.5, Family::L1);
    unif.extend(50);
    CHECK(check_criteria(unif, 50, CriteriaVariant::Uniform).all_pass());
}

TEST_CASE("half-point kernels lose monotonicity at small alpha") {
    const TimeMesh mesh = make_uniform(1.0, 10);
    KernelTable table(mesh, 0.1, Family::L1h);
    table.extend(10);
    CHECK(table.row(2).a(0) < table.row(2).a(1));

    // The uniform variant reads off the deepest row, so the reported location
    // carries n = table depth even though a(0) < a(1) already at row 2.
    const CriteriaReport rep = check_criteria(table, 10, CriteriaVariant::Uniform);
    CHECK(!rep.all_pass());
    const CriterionCheck* v = rep.first_violation();
    REQUIRE(v != nullptr);
    CHECK(v->condition == "decreasing");
    CHECK(v->n == 10);
    CHECK(v->j == 1);
}

TEST_CASE("doubled half-point kernels satisfy the nonuniform criteria") {
    const std::vector<TimeMesh> meshes = {make_uniform(1.0, 30), make_graded(1.0, 30, 2.5),
                                          make_random(1.0, 30, 4)};
    for (const TimeMesh& mesh : meshes) {
        for (double alpha : {0.1, 0.5, 0.9}) {
            KernelTable table(mesh, alpha, Family::AuxL1h);
            table.extend(mesh.size());
            CHECK(check_criteria(table, mesh.size(), CriteriaVariant::Nonuniform).all_pass());
        }
    }
}

TEST_CASE("averaged kernels break lag-0 monotonicity but keep the rest") {
    const TimeMesh mesh = make_uniform(1.0, 20);
    KernelTable table(mesh, 0.5, Family::L1a);
    table.extend(20);
    for (int n = 2; n <= 20; ++n) {
        const KernelRow& r = table.row(n);
        CHECK(r.a(0) < r.a(1));  // half lag-0 sits below the averaged lag 1
        for (int j = 2; j < n; ++j) CHECK(r.a(j - 1) > r.a(j));
        CHECK(r.a(n - 1) > 0.0);
    }
}

TEST_CASE("doubled averaged kernels: uniform convexity defect") {
    const TimeMesh mesh = make_uniform(1.0, 20);
    KernelTable aux(mesh, 0.5, Family::AuxL1a);
    aux.extend(20);
    KernelTable l1(mesh, 0.5, Family::L1);
    l1.extend(20);
    for (int n = 3; n <= 20; ++n) {
        const double defect = aux.row(n).a(0) - 2.0 * aux.row(n).a(1) + aux.row(n).a(2);
        CHECK(defect < 0.0);
        CHECK(defect ==
              doctest::Approx(-0.5 * (l1.row(n).a(1) - l1.row(n).a(2))).epsilon(1e-12));
    }
    const CriteriaReport rep = check_criteria(aux, 20, CriteriaVariant::Uniform);
    const CriterionCheck* v = rep.first_violation();
    REQUIRE(v != nullptr);
    CHECK(v->condition == "convex");
}

TEST_CASE("doubled averaged kernels: ratio threshold for lag-0 decrease") {
    // Sufficient bound (1+alpha)^{1/alpha} = 2.25 at alpha = 0.5.
    const TimeMesh gentle = make_fixed_ratio(1.0, 12, 2.0);
    KernelTable ok(gentle, 0.5, Family::AuxL1a);
    ok.extend(12);
    for (int n = 2; n <= 12; ++n) CHECK(ok.row(n).a(0) > ok.row(n).a(1));

    const TimeMesh steep = make_fixed_ratio(1.0, 12, 2.6);
    KernelTable bad(steep, 0.5, Family::AuxL1a);
    bad.extend(12);
    bool violated = false;
    for (int n = 2; n <= 12; ++n) violated = violated || bad.row(n).a(0) < bad.row(n).a(1);
    CHECK(violated);
}

TEST_CASE("doubled averaged kernels fail log-convexity on a random mesh") {
    const TimeMesh mesh = make_random(1.0, 30, 1);
    KernelTable table(mesh, 0.5, Family::AuxL1a);
    table.extend(30);
    const CriteriaReport rep = check_criteria(table, 30, CriteriaVariant::Nonuniform);
    bool log_convex_failed = false;
    for (const auto& c : rep.checks)
        if (c.condition == "log-convex" && !c.pass) log_convex_failed = true;
    CHECK(log_convex_failed);
}

TEST_CASE("tie sites are reported as flagged failures") {
    const std::vector<KernelRow> rows = {synthetic_row(1, Family::L1, {1.0}),
                                         synthetic_row(2, Family::L1, {1.0, 1.0})};
    const CriteriaReport rep = check_criteria_rows(rows, CriteriaVariant::Nonuniform);
    CHECK(!rep.all_pass());
    const CriterionCheck* v = rep.first_violation();
    REQUIRE(v != nullptr);
    CHECK(v->tie);
    CHECK(v->n == 2);
    CHECK(v->j == 1);
}

TEST_CASE("parallel kernel paths agree with the serial twins") {
    const TimeMesh mesh = make_graded(1.0, 600, 2.0);
    const KernelRow par = l1_row(mesh, 0.5, 600);
    const KernelRow ser = ref::l1_row(mesh, 0.5, 600);
    REQUIRE(par.weights.size() == ser.weights.size());
    for (size_t j = 0; j < par.weights.size(); ++j) CHECK(par.weights[j] == ser.weights[j]);

    KernelTable table(mesh, 0.5, Family::L1);
    table.extend(600);
    const std::vector<double> dp = doc_row(table, 600);
    const std::vector<double> ds = ref::doc_row(table, 600);
    for (size_t j = 0; j < dp.size(); ++j) {
        const double scale = std::max(std::fabs(ds[j]), 1e-30);
        CHECK(std::fabs(dp[j] - ds[j]) <= 1e-13 * scale + 1e-18);
    }
}

TEST_CASE("table extension over a growing mesh keeps prefix rows") {
    TimeMesh mesh = make_uniform(1.0, 3);
    KernelTable table(mesh, 0.5, Family::L1);
    table.extend(3);
    const std::vector<double> before = table.row(3).weights;
    append_step(mesh, 0.4);
    table.extend(4);
    CHECK(table.row(3).weights == before);
    CHECK(table.row(4).weights.size() == 4);
    CHECK_THROWS_AS(table.row(5), std::out_of_range);
}

TEST_CASE("csv and json emission") {
    const TimeMesh mesh = make_uniform(1.0, 3);
    KernelTable table(mesh, 0.5, Family::L1);
    table.extend(3);
    std::ostringstream csv;
    write_rows_csv(table, 3, csv);
    std::istringstream is(csv.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "n,j,a_j");
    int data_lines = 0;
    while (std::getline(is, line)) ++data_lines;
    CHECK(data_lines == 6);  // 1 + 2 + 3 lag entries

    const CriteriaReport rep = check_criteria(table, 3, CriteriaVariant::Nonuniform);
    std::ostringstream js;
    write_report_json(rep, js);
    const nlohmann::json parsed = nlohmann::json::parse(js.str());
    CHECK(parsed["family"] == "l1");
    CHECK(parsed["first_violation"].is_null());
    CHECK(parsed["passes"].is_array());
    for (const auto& c : parsed["passes"]) CHECK(c["pass"].get<bool>());
}
