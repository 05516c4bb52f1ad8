#include "ctxsep/theory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

#include "ctxsep/errors.hpp"

namespace ctxsep {

namespace {

// (X'X)^{-1}, with the shared condition-number gate.
Matrix gram_inverse(const BlockDesign& design) {
    const int n = design.n();
    Matrix gram = design.x.transpose() * design.x;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const double emin = eig.eigenvalues()(0);
    const double emax = eig.eigenvalues()(n - 1);
    if (!(emin > 0.0) || emax / emin >= kSingularConditionLimit)
        throw SingularDesign("X'X is singular or near-singular; rho/error formulas need an "
                             "invertible joint Gram matrix");
    return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
           eig.eigenvectors().transpose();
}

void check_source(const BlockDesign& design, int source) {
    if (source < 0 || source >= design.k())
        throw DimensionMismatch("source index " + std::to_string(source) + " out of range");
    if (design.block_sizes[source] == 0)
        throw DimensionMismatch("source " + std::to_string(source) +
                                " is featureless; recovery-theory quantities need n_i >= 1");
}

// lambda_max(C M) for C = X_i'X_i (PD under the invertibility gate) and
// M = (X'X)^{-1}_{ii}, via the similarity L^{-1} (C M) L = L' M L with
// C = L L'. The symmetric form keeps the spectrum real and the eigensolve
// stable.
double rho_from_blocks(const Matrix& c, const Matrix& m) {
    Eigen::LLT<Matrix> llt(c);
    if (llt.info() != Eigen::Success)
        throw SingularDesign("X_i'X_i is not positive definite; block has collinear columns");
    const Matrix l = llt.matrixL();
    const Matrix sym = l.transpose() * m * l;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    return eig.eigenvalues().maxCoeff();
}

}  // namespace

double rho(const BlockDesign& design, int source) {
    check_source(design, source);
    const Matrix inv = gram_inverse(design);
    const int off = design.block_offset(source);
    const int n_i = design.block_sizes[source];
    const Matrix c = design.block(source).transpose() * design.block(source);
    const Matrix m = inv.block(off, off, n_i, n_i);
    return rho_from_blocks(c, m);
}

double expected_sq_error(const BlockDesign& design, int source, double sigma_sq) {
    check_source(design, source);
    if (!(sigma_sq > 0.0)) throw DomainError("sigma_sq must be > 0");
    const Matrix inv = gram_inverse(design);
    const int off = design.block_offset(source);
    const int n_i = design.block_sizes[source];
    const Matrix c = design.block(source).transpose() * design.block(source);
    const Matrix m = inv.block(off, off, n_i, n_i);
    return sigma_sq * (c * m).trace();
}

double lambert_w_m1(double x) {
    constexpr double kInvE = 0.36787944117144232;  // 1/e
    if (!(x >= -kInvE) || !(x < 0.0))
        throw DomainError("lambert_w_m1 domain is [-1/e, 0), got " + std::to_string(x));

    // Branch point: W_{-1}(-1/e) = -1.
    const double p2 = 2.0 * (1.0 + std::exp(1.0) * x);
    if (p2 <= 0.0) return -1.0;

    // Initial guess: series in p = -sqrt(2(1+ex)) near the branch point,
    // asymptotic log form elsewhere.
    double w;
    if (p2 < 0.5) {
        const double p = -std::sqrt(p2);
        w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
    } else {
        const double l1 = std::log(-x);
        const double l2 = std::log(-l1);
        w = l1 - l2 + l2 / l1;
    }

    // Halley refinement on f(w) = w e^w - x.
    for (int iter = 0; iter < 50; ++iter) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double fp = ew * (w + 1.0);
        const double step = f / (fp - f * (w + 2.0) / (2.0 * (w + 1.0)));
        w -= step;
        if (std::abs(step) <= 1e-14 * std::abs(w)) break;
    }
    return w;
}

double rmse_bound(const BlockDesign& design, int source, double sigma_sq, double delta, int T,
                  bool* used_lambert_form) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw DomainError("delta must lie in (0, 1), got " + std::to_string(delta));
    if (T < 1) throw DomainError("T must be >= 1");
    if (used_lambert_form) *used_lambert_form = false;
    if (delta > 0.1) {
        // The 4 log(1/delta) form is only proved for delta <= 0.1; fall
        // back to the exact Lambert-W expression and flag it.
        if (used_lambert_form) *used_lambert_form = true;
        return tighter_rmse_bound(design, source, sigma_sq, delta, T);
    }
    check_source(design, source);
    if (!(sigma_sq > 0.0)) throw DomainError("sigma_sq must be > 0");
    const double n_i = design.block_sizes[source];
    const double rho_i = rho(design, source);
    return std::sqrt(4.0 * sigma_sq * n_i * rho_i * std::log(1.0 / delta) / static_cast<double>(T));
}

double tighter_rmse_bound(const BlockDesign& design, int source, double sigma_sq, double delta,
                          int T) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw DomainError("delta must lie in (0, 1), got " + std::to_string(delta));
    if (T < 1) throw DomainError("T must be >= 1");
    check_source(design, source);
    if (!(sigma_sq > 0.0)) throw DomainError("sigma_sq must be > 0");
    const double n_i = design.block_sizes[source];
    const double rho_i = rho(design, source);
    const double arg = -std::exp(2.0 / n_i * std::log(delta) - 1.0);  // -delta^{2/n_i}/e
    const double w = lambert_w_m1(arg);
    return std::sqrt(-w * sigma_sq * n_i * rho_i / static_cast<double>(T));
}

double tail_bound(int n, double lambda, double t) {
    if (n < 1) throw DomainError("rank n must be >= 1");
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    const double nl = static_cast<double>(n) * lambda;
    if (t <= nl) return 1.0;  // Chernoff multiplier only valid past n*lambda
    const double log_bound =
        0.5 * n * std::log(t / nl) - 0.5 * (t / lambda - static_cast<double>(n));
    return std::exp(log_bound);
}

TheoryReport theory_report(const BlockDesign& design, double sigma_sq, double delta) {
    TheoryReport report;
    report.sigma_sq = sigma_sq;
    report.delta = delta;
    report.T = design.T();
    report.sources.reserve(design.block_sizes.size());
    for (int i = 0; i < design.k(); ++i) {
        SourceTheory s;
        s.n_i = design.block_sizes[i];
        if (s.n_i > 0) {
            s.rho = rho(design, i);
            s.expected_sq_err = expected_sq_error(design, i, sigma_sq);
            s.rmse_bound = rmse_bound(design, i, sigma_sq, delta, design.T(), &s.delta_out_of_range);
            s.tighter_bound = tighter_rmse_bound(design, i, sigma_sq, delta, design.T());
        }
        report.sources.push_back(s);
    }
    return report;
}

}  // namespace ctxsep
