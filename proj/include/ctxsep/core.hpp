#pragma once

#include <string>
#include <vector>

#include "ctxsep/linops.hpp"

namespace ctxsep {

// Data model for the separation problem
//
//   minimize_{Y, theta}  sum_i  w_i ||A_i (y_i - X_i theta_i)||  +
//                                r_i ||B_i y_i||  +  q_i ||theta_i||_2^2
//   subject to           sum_i y_i = aggregate,   y_i >= 0 for opted-in i
//
// where each norm is L1 or squared L2 per source. The sum constraint is
// structural: every problem carries it, it is not an option.

enum class Norm { L1, SquaredL2, None };

struct AggregateSignal {
    Vector values;

    int T() const { return static_cast<int>(values.size()); }
};

struct FeatureBlock {
    std::string name;
    Matrix matrix;  // T x n_i; n_i = 0 encodes a featureless source

    int rows() const { return static_cast<int>(matrix.rows()); }
    int cols() const { return static_cast<int>(matrix.cols()); }
};

struct SourceModelSpec {
    Norm loss_norm = Norm::SquaredL2;
    LinearOperatorDescriptor loss_operator = LinearOperatorDescriptor::identity();
    double loss_weight = 1.0;
    Norm reg_norm = Norm::None;
    LinearOperatorDescriptor reg_operator = LinearOperatorDescriptor::identity();
    double reg_weight = 0.0;
    double theta_ridge = 0.0;
    bool nonneg = false;
};

struct SeparationProblem {
    AggregateSignal aggregate;
    std::vector<std::pair<FeatureBlock, SourceModelSpec>> sources;

    int T() const { return aggregate.T(); }
    int k() const { return static_cast<int>(sources.size()); }
    int num_features() const;
};

struct SolverDiagnostics {
    std::vector<double> objective_history;  // populated when requested
};

struct SeparationResult {
    Matrix y_hat;                     // T x k, columns sum to the aggregate
    std::vector<Vector> theta_hat;    // per-source coefficient blocks
    double objective = 0.0;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
    SolverDiagnostics diagnostics;
};

// Validates every invariant eagerly (finiteness, row counts, weight signs,
// operator/T compatibility) and returns the immutable problem object.
SeparationProblem build_problem(AggregateSignal aggregate,
                                std::vector<std::pair<FeatureBlock, SourceModelSpec>> sources);

// Value of the objective at an arbitrary (Y, theta). Constraint violations
// (sum and nonnegativity) are not folded into the value; this evaluates the
// penalized terms only.
double objective_value(const SeparationProblem& problem, const Matrix& y,
                       const std::vector<Vector>& theta);

}  // namespace ctxsep
