#pragma once

#include <cstdint>
#include <vector>

#include "ctxsep/closedform.hpp"
#include "ctxsep/core.hpp"

namespace ctxsep {

// Seeded synthetic data generators for the two validation experiment
// families: Gaussian recovery draws (where the theory module's error
// formulas are exact) and a disaggregation-style pair of structured
// signals under heterogeneous noise.
//
// Determinism contract: every generator consumes a single SplitMix64
// stream seeded with config.seed, drawing in a fixed documented order, so
// equal configs give bitwise-equal outputs. Multi-trial runs derive the
// seed for trial j as SplitMix64::derive_stream(seed, j), which makes
// trials independent of scheduling order.

struct RecoveryConfig {
    int T = 500;
    int k = 2;       // number of sources
    int n_i = 16;    // features per source
    double mu = 0.01;  // rows of each X_i ~ N(0, I + (1-mu) 11')
    std::uint64_t seed = 0;
};

struct RecoveryDraw {
    BlockDesign design;              // X = [X_1 .. X_k]
    std::vector<Vector> theta_star;  // true coefficients, entries U[-1,1)
    Matrix y_star;                   // T x k noiseless sources X_i theta*_i
    Matrix y_noisy;                  // y_star + unit Gaussian noise per entry
    AggregateSignal aggregate;       // row sums of y_noisy (exactly)
};

// Draw order: features (source-major, then row, then column; one shared
// row factor before the columns), then coefficients, then noise
// (source-major, then row).
RecoveryDraw gen_recovery(const RecoveryConfig& config);

struct DisaggConfig {
    int T = 50000;
    int tau1 = 200;    // period of the smooth (sine) signal
    int tau2 = 100;    // period of the step signal
    double sigma = 0.25;  // std of the smooth signal's Gaussian noise
    int beta = 10;     // correlation window of the step signal's noise
    double p_zero = 0.5;  // point mass at zero in the step-noise mixture
    std::uint64_t seed = 0;
};

struct DisaggDraw {
    Matrix x1;              // T x 1: sin(2 pi t / tau1) + 1, in [0, 2]
    Matrix x2;              // T x 1: square wave, 1 for the first half of each period
    Matrix y_star;          // T x 2 noisy nonnegative sources (the recovery target)
    AggregateSignal aggregate;  // y_star row sums
};

// True coefficients are 1 for both sources: y_i = max(x_i + w_i, 0) with
// w_1 i.i.d. N(0, sigma^2) and w_2 a moving window-beta sum of i.i.d.
// draws from {0 w.p. p_zero; else U[-1, 1)}. The window sum uses
// T + beta - 1 underlying draws so every output is a full-width sum.
// Draw order: w_1 (by row), then the step-noise draws (by row).
DisaggDraw gen_disagg(const DisaggConfig& config);

// The three estimation models compared on gen_disagg data, ordered from
// least to most structured.
enum class DisaggModel {
    SquaredL2Only,      // squared-L2 loss for both sources, no regularizers
    MixedLoss,          // squared-L2 for the smooth source, L1 for the step source
    MixedLossWithRegs,  // + ||D y_1||_2^2 and ||D y_2||_1 difference penalties
};

struct DisaggModelWeights {
    double smooth_reg = 4.0;  // weight on ||D y_1||_2^2 (full model only)
    double step_reg = 0.5;    // weight on ||D y_2||_1 (full model only)
};

// Assembles the two-source problem for one model variant; both sources are
// constrained nonnegative (the generated targets are).
SeparationProblem build_disagg_problem(const DisaggDraw& draw, DisaggModel model,
                                       const DisaggModelWeights& weights = {});

// RMSE over all entries of two equally sized matrices.
double matrix_rmse(const Matrix& a, const Matrix& b);

// One least-squares recovery trial: draws gen_recovery with the trial's
// derived seed, fits theta by least squares on the aggregate, and reports
// per-source empirical and theoretical errors in MSE units
// (mse = ||X_i theta_hat_i - X_i theta*_i||^2 / T). sigma_sq is k (unit
// noise per source). bound90_sq is the squared 90%-confidence RMSE bound.
struct RecoveryTrialStats {
    std::vector<double> mse;
    std::vector<double> theory_mean;      // expected squared error / T
    std::vector<double> theory_bound90_sq;
};

RecoveryTrialStats run_recovery_trial(const RecoveryConfig& config, std::uint64_t trial);

}  // namespace ctxsep
