#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "tfch/kernels.hpp"
#include "tfch/mesh.hpp"
#include "tfch/quadform.hpp"
#include "tfch/special.hpp"

using namespace tfch;

TEST_CASE("one- and two-step forms on the unit-step mesh") {
    const TimeMesh mesh = make_uniform(3.0, 3);
    KernelTable table(mesh, 0.5, Family::L1);
    table.extend(2);

    const Eigen::MatrixXd B1 = assemble(table, 1);
    REQUIRE(B1.rows() == 1);
    CHECK(B1(0, 0) == doctest::Approx(2.0 * table.a0(1)).epsilon(1e-15));
    CHECK(min_eigenvalue(B1) == doctest::Approx(2.0 * table.a0(1)).epsilon(1e-14));

    const Eigen::MatrixXd B2 = assemble(table, 2);
    REQUIRE(B2.rows() == 2);
    CHECK(B2(0, 0) == doctest::Approx(2.0 * table.a0(1)).epsilon(1e-15));
    CHECK(B2(1, 1) == doctest::Approx(2.0 * table.a0(2)).epsilon(1e-15));
    CHECK(B2(0, 1) == B2(1, 0));
    CHECK(B2(1, 0) == doctest::Approx(table.row(2).a(1)).epsilon(1e-15));

    // Symmetric 2x2 with equal diagonal: eigenvalues 2 a_0 -+ a_1.
    const double lam = min_eigenvalue(B2);
    CHECK(lam == doctest::Approx(2.0 * table.a0(1) - table.row(2).a(1)).epsilon(1e-13));
    CHECK(lam == doctest::Approx(1.7893683796808069).epsilon(1e-12));
}

TEST_CASE("scaled identity has its diagonal as the smallest eigenvalue") {
    const Eigen::MatrixXd B = 2.0 * Eigen::MatrixXd::Identity(5, 5);
    CHECK(min_eigenvalue(B) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("assembled form equals the direct double sum") {
    const TimeMesh mesh = make_random(1.0, 12, 3);
    KernelTable table(mesh, 0.5, Family::L1);
    table.extend(12);
    const Eigen::MatrixXd B = assemble(table, 12);

    std::mt19937_64 gen(77);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd w(12);
        for (int i = 0; i < 12; ++i) w(i) = 2.0 * uniform01(gen) - 1.0;
        double direct = 0.0;
        for (int k = 1; k <= 12; ++k) {
            const KernelRow& row = table.row(k);
            double inner = 0.0;
            for (int j = 1; j <= k; ++j) inner += row.a(k - j) * w(j - 1);
            direct += w(k - 1) * inner;
        }
        direct *= 2.0;
        CHECK(w.dot(B * w) == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("l1 scalar bound has the uniform closed form") {
    for (double alpha : {0.25, 0.5, 0.85}) {
        for (int N : {20, 100}) {
            const TimeMesh mesh = make_uniform(1.0, N);
            KernelTable table(mesh, alpha, Family::L1);
            table.extend(N);
            const double tau = 1.0 / N;
            const double closed =
                1.0 / (std::tgamma(2.0 - alpha) * std::pow(tau, alpha));
            CHECK(sigma_l1(table, N) == doctest::Approx(closed).epsilon(1e-10));
            // Uniform kernels repeat the first row, so the minimum sits at k = 1.
            CHECK(sigma_l1(table, N) == table.a0(1));
        }
    }
}

TEST_CASE("graded-mesh table entry") {
    const TimeMesh mesh = make_graded(1.0, 100, 2.0);
    KernelTable table(mesh, 0.5, Family::L1);
    table.extend(100);
    const double sig = sigma_l1(table, 100);
    const double lam = min_eigenvalue(assemble(table, 100));
    CHECK(sig == doctest::Approx(7.9988678367696888).epsilon(1e-8));
    CHECK(lam == doctest::Approx(12.361960369790996).epsilon(1e-8));
    CHECK(std::round(sig * 100.0) / 100.0 == doctest::Approx(8.00));
    CHECK(std::round(lam * 100.0) / 100.0 == doctest::Approx(12.36));
    CHECK(lam > sig);
}

TEST_CASE("uniform bound chain orders power, scalar and series bounds") {
    CHECK(sigma_power_bound(0.5, 0.01, 100) ==
          doctest::Approx(0.7939248114932143).epsilon(1e-6));

    for (double alpha : {0.25, 0.5, 0.85}) {
        for (double tau : {1.0, 0.1, 0.02}) {
            const double power = sigma_power_bound(alpha, tau, 50);
            const double scalar =
                1.0 / (std::tgamma(2.0 - alpha) * std::pow(tau, alpha));
            const double series = sigma_polylog_bound(alpha, tau);
            CHECK(power < scalar);
            CHECK(scalar <= series);
        }
    }

    // The power bound decays with n; the series bound does not depend on it.
    CHECK(sigma_power_bound(0.5, 0.1, 200) < sigma_power_bound(0.5, 0.1, 20));
}

TEST_CASE("minimum eigenvalue decreases with depth and stays above the series bound") {
    const TimeMesh mesh = make_uniform(60.0, 60);  // unit steps
    for (double alpha : {0.3, 0.5, 0.9}) {
        KernelTable table(mesh, alpha, Family::L1);
        table.extend(60);
        const double star = sigma_polylog_bound(alpha, 1.0);
        double prev = std::numeric_limits<double>::infinity();
        for (int n = 2; n <= 60; ++n) {
            const double lam = min_eigenvalue(assemble(table, n));
            CHECK(lam <= prev + 1e-12);
            CHECK(lam >= star);
            prev = lam;
        }
        // The deepest eigenvalue has nearly converged to the bound: the gap is
        // a fraction of a percent, so the constant in the bound is sharp.
        CHECK(prev - star < 1e-3 * star);
    }
}

TEST_CASE("random-vector verification finds no violations") {
    const std::vector<TimeMesh> meshes = {make_uniform(1.0, 30), make_graded(1.0, 30, 2.0),
                                          make_random(1.0, 30, 9)};
    for (const TimeMesh& mesh : meshes) {
        for (Family fam : {Family::L1, Family::L1h}) {
            KernelTable table(mesh, 0.5, Family(fam));
            table.extend(30);
            const BoundReport rep = verify_lower_bound(table, 30, 100, 5);
            CHECK(rep.trials == 100);
            CHECK(rep.violations == 0);
            CHECK(rep.decomposition_violations == 0);
            CHECK(rep.worst_margin > 0.0);
            CHECK(rep.worst_decomposition_margin > 0.0);
        }
    }
}

TEST_CASE("family and range guards") {
    const TimeMesh mesh = make_uniform(1.0, 5);
    KernelTable half(mesh, 0.5, Family::L1h);
    half.extend(5);
    CHECK_THROWS_AS(sigma_l1(half, 5), std::invalid_argument);

    KernelTable avg(mesh, 0.5, Family::L1a);
    avg.extend(5);
    CHECK_THROWS_AS(verify_lower_bound(avg, 5, 10, 1), std::invalid_argument);

    KernelTable table(mesh, 0.5, Family::L1);
    table.extend(3);
    CHECK_THROWS_AS(assemble(table, 4), std::invalid_argument);
    CHECK_THROWS_AS(assemble(table, 0), std::invalid_argument);

    Eigen::MatrixXd rect = Eigen::MatrixXd::Zero(2, 3);
    CHECK_THROWS_AS(min_eigenvalue(rect), std::invalid_argument);

    Eigen::MatrixXd skew(2, 2);
    skew << 0.0, 1.0, -1.0, 0.0;
    CHECK_THROWS_AS(min_eigenvalue(skew), std::invalid_argument);
}

TEST_CASE("eigensolver error carries the iteration count") {
    const EigenSolveError err("did not converge", 42);
    CHECK(err.iterations == 42);
    CHECK(std::string(err.what()) == "did not converge");
    const std::runtime_error& base = err;  // catchable through the base class
    CHECK(std::string(base.what()) == "did not converge");
}
