#pragma once

#include <vector>

#include "ctxsep/closedform.hpp"

namespace ctxsep {

// Recovery-theory quantities for a block design X = [X_1 .. X_k] under the
// Gaussian generative model y_i = X_i theta_i* + w_i:
//
//   rho_i     = lambda_max( X_i'X_i (X'X)^{-1}_{ii} ), >= 1 with equality
//               for block-orthogonal designs; measures cross-block feature
//               correlation only
//   E err_i   = sigma^2 tr( X_i'X_i (X'X)^{-1}_{ii} ) <= sigma^2 n_i rho_i
//   RMSE(X_i theta_hat_i) <= sqrt(4 sigma^2 n_i rho_i log(1/delta) / T)
//               with probability > 1 - delta, for delta <= 0.1; the tighter
//               form replaces 4 log(1/delta) with -W_{-1}(-delta^{2/n_i}/e)

// Largest eigenvalue of X_i'X_i (X'X)^{-1}_{ii}. The product is similar to
// a symmetric PSD matrix through the Cholesky factor of X_i'X_i, which is
// how it is computed.
double rho(const BlockDesign& design, int source);

// sigma^2 tr X_i'X_i (X'X)^{-1}_{ii}, the exact expected squared error of
// the reconstruction X_i theta_hat_i.
double expected_sq_error(const BlockDesign& design, int source, double sigma_sq);

// High-probability RMSE bound at confidence 1-delta. Valid as stated for
// delta <= 0.1; for 0.1 < delta < 1 the Lambert-W form is returned instead
// and *used_lambert_form is set when provided.
double rmse_bound(const BlockDesign& design, int source, double sigma_sq, double delta, int T,
                  bool* used_lambert_form = nullptr);

// The tighter bound sqrt(-W_{-1}(-delta^{2/n_i}/e) sigma^2 n_i rho_i / T).
double tighter_rmse_bound(const BlockDesign& design, int source, double sigma_sq, double delta,
                          int T);

// Lower real branch of the Lambert W function on [-1/e, 0): the w <= -1
// with w e^w = x, accurate to 1e-10.
double lambert_w_m1(double x);

// Chi-square-style tail bound for ||x||^2, x ~ N(0, Sigma) with
// rank(Sigma) = n and largest eigenvalue lambda:
//   P(||x||^2 >= t) <= (t/(n lambda))^{n/2} exp(-(t/lambda - n)/2)
// valid for t >= n lambda; below that the bound exceeds 1 and is clamped.
double tail_bound(int n, double lambda, double t);

struct SourceTheory {
    int n_i = 0;
    double rho = 1.0;
    double expected_sq_err = 0.0;
    double rmse_bound = 0.0;
    double tighter_bound = 0.0;
    bool delta_out_of_range = false;  // set when delta > 0.1 forced the W form
};

struct TheoryReport {
    double sigma_sq = 0.0;
    double delta = 0.1;
    int T = 0;
    std::vector<SourceTheory> sources;
};

// Full report over all sources. sigma_sq is supplied by the caller (the
// bounds assume a known noise model). Featureless sources get the trivial
// entries rho=1, zero error, zero bounds.
TheoryReport theory_report(const BlockDesign& design, double sigma_sq, double delta);

}  // namespace ctxsep
