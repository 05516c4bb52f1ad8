#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ctxsep/closedform.hpp"
#include "ctxsep/errors.hpp"
#include "ctxsep/rng.hpp"
#include "ctxsep/theory.hpp"

using namespace ctxsep;

namespace {

Matrix random_matrix(SplitMix64& g, int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = g.next_gaussian();
    }
    return m;
}

// Two blocks with exactly orthogonal column spaces: split the Q factor of a
// random matrix and re-mix each half so within-block correlations are
// arbitrary while cross-block products stay zero.
BlockDesign block_orthogonal_design(SplitMix64& g, int T, int n1, int n2) {
    Matrix x = random_matrix(g, T, n1 + n2);
    const Eigen::HouseholderQR<Matrix> qr(x);
    const Matrix q = qr.householderQ() * Matrix::Identity(T, n1 + n2);
    Matrix m1 = random_matrix(g, n1, n1) + 3.0 * Matrix::Identity(n1, n1);
    Matrix m2 = random_matrix(g, n2, n2) + 3.0 * Matrix::Identity(n2, n2);
    BlockDesign d;
    d.x.resize(T, n1 + n2);
    d.x.leftCols(n1) = q.leftCols(n1) * m1;
    d.x.rightCols(n2) = q.rightCols(n2) * m2;
    d.block_sizes = {n1, n2};
    return d;
}

// Direct dense evaluation of lambda_max(X_i' X_i (X'X)^{-1}_ii) without the
// Cholesky symmetrization the library uses.
double rho_dense_oracle(const BlockDesign& d, int i) {
    const Matrix gram = d.x.transpose() * d.x;
    const Matrix inv = gram.inverse();
    const int off = d.block_offset(i);
    const int n_i = d.block_sizes[static_cast<std::size_t>(i)];
    const Matrix inv_ii = inv.block(off, off, n_i, n_i);
    const Matrix gram_ii = d.x.middleCols(off, n_i).transpose() * d.x.middleCols(off, n_i);
    const Eigen::EigenSolver<Matrix> es(gram_ii * inv_ii);
    double lam = 0.0;
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
        lam = std::max(lam, es.eigenvalues()[j].real());
    }
    return lam;
}

// Newton iteration on w e^w = x for the lower branch, seeded from the
// asymptotic expansions near the branch point and near zero.
double lambert_newton_oracle(double x) {
    double w;
    if (x < -0.25 / std::exp(1.0)) {
        const double p = -std::sqrt(2.0 * (1.0 + std::exp(1.0) * x));
        w = -1.0 + p - p * p / 3.0;
    } else {
        const double l1 = std::log(-x);
        const double l2 = std::log(-l1);
        w = l1 - l2 + l2 / l1;
    }
    for (int it = 0; it < 200; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double step = f / (ew * (1.0 + w) - f * (2.0 + w) / (2.0 + 2.0 * w));
        const double next = w - step;
        if (!std::isfinite(next)) break;
        if (std::abs(next - w) < 1e-15 * std::abs(next)) {
            w = next;
            break;
        }
        w = next;
    }
    return w;
}

}  // namespace

TEST_CASE("rho is one for block-orthogonal designs") {
    SplitMix64 g(1);
    const BlockDesign d = block_orthogonal_design(g, 60, 4, 5);
    CHECK(rho(d, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rho(d, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("rho is one for a single block") {
    SplitMix64 g(2);
    BlockDesign d;
    d.x = random_matrix(g, 40, 6);
    d.block_sizes = {6};
    CHECK(rho(d, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rho matches a dense eigensolve oracle") {
    SplitMix64 g(3);
    for (int rep = 0; rep < 8; ++rep) {
        BlockDesign d;
        d.x = random_matrix(g, 50, 7);
        d.block_sizes = {4, 3};
        CHECK(rho(d, 0) == doctest::Approx(rho_dense_oracle(d, 0)).epsilon(1e-9));
        CHECK(rho(d, 1) == doctest::Approx(rho_dense_oracle(d, 1)).epsilon(1e-9));
    }
}

TEST_CASE("rho grows when blocks share a nearly identical column") {
    SplitMix64 g(4);
    BlockDesign d;
    d.x = random_matrix(g, 50, 6);
    d.block_sizes = {3, 3};
    const double before = rho(d, 0);
    d.x.col(3) = d.x.col(0) + 0.02 * random_matrix(g, 50, 1).col(0);
    const double after = rho(d, 0);
    CHECK(after > 10.0 * before);
    CHECK(after == doctest::Approx(rho_dense_oracle(d, 0)).epsilon(1e-8));
}

TEST_CASE("rho is invariant to invertible within-block remixing") {
    SplitMix64 g(5);
    BlockDesign d;
    d.x = random_matrix(g, 45, 6);
    d.block_sizes = {3, 3};
    const double before = rho(d, 0);
    const Matrix m = random_matrix(g, 3, 3) + 2.0 * Matrix::Identity(3, 3);
    d.x.leftCols(3) = (d.x.leftCols(3) * m).eval();
    CHECK(rho(d, 0) == doctest::Approx(before).epsilon(1e-8));
}

TEST_CASE("rho rejects singular designs") {
    SplitMix64 g(6);
    BlockDesign d;
    d.x = random_matrix(g, 30, 4);
    d.block_sizes = {2, 2};
    d.x.col(2) = d.x.col(1);
    CHECK_THROWS_AS(rho(d, 0), SingularDesign);
}

TEST_CASE("expected squared error equals sigma^2 n_i for orthogonal blocks") {
    SplitMix64 g(7);
    const BlockDesign d = block_orthogonal_design(g, 80, 5, 4);
    CHECK(expected_sq_error(d, 0, 2.0) == doctest::Approx(10.0).epsilon(1e-8));
    CHECK(expected_sq_error(d, 1, 2.0) == doctest::Approx(8.0).epsilon(1e-8));
}

TEST_CASE("expected squared error never exceeds sigma^2 n_i rho_i") {
    SplitMix64 g(8);
    for (int rep = 0; rep < 10; ++rep) {
        BlockDesign d;
        d.x = random_matrix(g, 60, 8);
        d.block_sizes = {5, 3};
        for (int i = 0; i < 2; ++i) {
            const double n_i = d.block_sizes[static_cast<std::size_t>(i)];
            CHECK(expected_sq_error(d, i, 1.7) <= 1.7 * n_i * rho(d, i) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("expected squared error matches simulation") {
    // Fix one design and average ||X_i theta_hat_i - X_i theta_i*||^2 over
    // noise draws; the trace formula is this conditional expectation.
    SplitMix64 g(9);
    BlockDesign d;
    d.x = random_matrix(g, 60, 6);
    d.block_sizes = {3, 3};
    const double sigma_sq = 1.0;
    const int trials = 10000;
    Vector theta_star(6);
    for (int j = 0; j < 6; ++j) theta_star[j] = g.next_uniform(-1.0, 1.0);
    const Vector mean_signal = d.x * theta_star;
    std::vector<double> mc(2, 0.0);
    for (int trial = 0; trial < trials; ++trial) {
        AggregateSignal y;
        y.values = mean_signal;
        for (int t = 0; t < 60; ++t) y.values[t] += g.next_gaussian();
        const std::vector<Vector> theta = least_squares_theta(d, y);
        for (int i = 0; i < 2; ++i) {
            const Vector err =
                d.block(i) * (theta[static_cast<std::size_t>(i)] -
                              theta_star.segment(d.block_offset(i), 3));
            mc[static_cast<std::size_t>(i)] += err.squaredNorm() / trials;
        }
    }
    for (int i = 0; i < 2; ++i) {
        const double formula = expected_sq_error(d, i, sigma_sq);
        CHECK(mc[static_cast<std::size_t>(i)] ==
              doctest::Approx(formula).epsilon(0.03));
    }
}

TEST_CASE("rmse bound evaluates the closed formula") {
    // sigma^2 = 2, n_i = 16, rho_i = 1, delta = 0.1, T = 500.
    SplitMix64 g(10);
    const BlockDesign d = block_orthogonal_design(g, 500, 16, 16);
    const double bound = rmse_bound(d, 0, 2.0, 0.1, 500);
    CHECK(bound == doctest::Approx(std::sqrt(4.0 * 2.0 * 16.0 * std::log(10.0) / 500.0))
                       .epsilon(1e-6));
    CHECK(bound == doctest::Approx(0.7678).epsilon(1e-3));
}

TEST_CASE("rmse bound scales as one over sqrt T") {
    SplitMix64 g(11);
    const BlockDesign d = block_orthogonal_design(g, 400, 4, 4);
    const double b1 = rmse_bound(d, 0, 1.0, 0.05, 1000);
    const double b2 = rmse_bound(d, 0, 1.0, 0.05, 2000);
    CHECK(b1 / b2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("tighter bound stays below the four-log bound for small delta") {
    SplitMix64 g(12);
    BlockDesign d;
    d.x = random_matrix(g, 70, 9);
    d.block_sizes = {5, 4};
    for (double delta : {0.001, 0.01, 0.05, 0.1}) {
        for (int i = 0; i < 2; ++i) {
            CHECK(tighter_rmse_bound(d, i, 1.3, delta, 70) <=
                  rmse_bound(d, i, 1.3, delta, 70) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("delta above the bound's valid range falls back to the Lambert form") {
    SplitMix64 g(13);
    const BlockDesign d = block_orthogonal_design(g, 50, 3, 3);
    bool used_lambert = false;
    const double b = rmse_bound(d, 0, 1.0, 0.5, 50, &used_lambert);
    CHECK(used_lambert);
    CHECK(b == doctest::Approx(tighter_rmse_bound(d, 0, 1.0, 0.5, 50)).epsilon(1e-12));
    used_lambert = true;
    rmse_bound(d, 0, 1.0, 0.1, 50, &used_lambert);
    CHECK_FALSE(used_lambert);
    CHECK_THROWS_AS(rmse_bound(d, 0, 1.0, 0.0, 50), DomainError);
    CHECK_THROWS_AS(rmse_bound(d, 0, 1.0, 1.5, 50), DomainError);
}

TEST_CASE("lambert W lower branch hits the branch point") {
    CHECK(lambert_w_m1(-1.0 / std::exp(1.0)) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("lambert W matches the delta = 0.1 n = 1 value") {
    const double x = -std::pow(0.1, 2.0) / std::exp(1.0);  // -0.0036788
    const double w = lambert_w_m1(x);
    // Hand-verified: w e^w at -7.63835 reproduces x; coarser published
    // tables round this to -7.64.
    CHECK(w == doctest::Approx(-7.63835).epsilon(1e-5));
}

TEST_CASE("lambert W satisfies its defining identity") {
    for (double x : {-0.367, -0.3, -0.2, -0.1, -0.01, -1e-4, -1e-8, -1e-30}) {
        const double w = lambert_w_m1(x);
        CHECK(w <= -1.0);
        CHECK(w * std::exp(w) == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("lambert W agrees with a Newton oracle to 1e-10") {
    std::vector<double> xs;
    for (double delta : {0.001, 0.01, 0.05, 0.1}) {
        for (int n : {1, 2, 5, 10, 25, 50}) {
            xs.push_back(-std::pow(delta, 2.0 / n) / std::exp(1.0));
        }
    }
    for (double e = -1.5; e >= -25.0; e -= 1.5) xs.push_back(-std::pow(10.0, e));
    for (double x : xs) {
        const double w = lambert_w_m1(x);
        const double w_oracle = lambert_newton_oracle(x);
        CHECK(std::abs(w - w_oracle) <= 1e-10 * std::max(1.0, std::abs(w_oracle)));
    }
}

TEST_CASE("lambert W rejects arguments outside its branch domain") {
    CHECK_THROWS_AS(lambert_w_m1(0.0), DomainError);
    CHECK_THROWS_AS(lambert_w_m1(0.5), DomainError);
    CHECK_THROWS_AS(lambert_w_m1(-0.5), DomainError);
}

TEST_CASE("tail bound equals one at its left edge and decays") {
    CHECK(tail_bound(3, 2.0, 6.0) == 1.0);
    CHECK(tail_bound(1, 1.0, 4.0) == doctest::Approx(2.0 * std::exp(-1.5)).epsilon(1e-12));
    CHECK(tail_bound(1, 1.0, 4.0) == doctest::Approx(0.44626).epsilon(1e-4));
    CHECK(tail_bound(2, 1.0, 1.0) == 1.0);  // below n*lambda clamps to 1
    CHECK(tail_bound(4, 0.5, 100.0) < 1e-10);
}

TEST_CASE("tail bound dominates an empirical chi-square tail") {
    SplitMix64 g(14);
    const int n = 3;
    const double lambda = 1.5;
    const int samples = 20000;
    std::vector<double> sq(samples);
    for (int s = 0; s < samples; ++s) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double x = std::sqrt(lambda) * g.next_gaussian();
            acc += x * x;
        }
        sq[static_cast<std::size_t>(s)] = acc;
    }
    for (double mult : {1.0, 1.3, 2.0, 3.0, 5.0}) {
        const double t = n * lambda * mult;
        int count = 0;
        for (double v : sq) count += v >= t;
        const double empirical = static_cast<double>(count) / samples;
        CHECK(empirical <= tail_bound(n, lambda, t));
    }
}

TEST_CASE("theory report covers every source and flags featureless blocks") {
    SplitMix64 g(15);
    BlockDesign d;
    d.x = random_matrix(g, 40, 4);
    d.block_sizes = {4, 0};
    const TheoryReport report = theory_report(d, 2.0, 0.1);
    CHECK(report.T == 40);
    CHECK(report.sources.size() == 2);
    CHECK(report.sources[0].n_i == 4);
    CHECK(report.sources[0].rho >= 1.0 - 1e-9);
    CHECK(report.sources[0].rmse_bound > 0.0);
    CHECK(report.sources[1].n_i == 0);
    CHECK(report.sources[1].expected_sq_err == 0.0);
    CHECK(report.sources[1].rmse_bound == 0.0);
}
