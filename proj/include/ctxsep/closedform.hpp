#pragma once

#include <vector>

#include "ctxsep/core.hpp"

namespace ctxsep {

// Concatenated design matrix with per-source block boundaries.
struct BlockDesign {
    Matrix x;                      // T x n, columns grouped by source
    std::vector<int> block_sizes;  // n_1..n_k, sum = n

    int T() const { return static_cast<int>(x.rows()); }
    int n() const { return static_cast<int>(x.cols()); }
    int k() const { return static_cast<int>(block_sizes.size()); }
    int block_offset(int i) const;

    // View of block i (T x n_i).
    Eigen::Ref<const Matrix> block(int i) const;
};

BlockDesign design_from_problem(const SeparationProblem& problem);

// theta_hat = (X'X)^{-1} X' aggregate, computed through a Householder QR of
// X rather than the normal equations, split conformally with the blocks.
// Throws SingularDesign when cond(X) >= 1e12 unless allow_pseudoinverse is
// set, in which case the minimum-norm solution is returned.
std::vector<Vector> least_squares_theta(const BlockDesign& design, const AggregateSignal& aggregate,
                                        bool allow_pseudoinverse = false);

// Column i = X_i theta_i.
Matrix reconstruct_sources(const BlockDesign& design, const std::vector<Vector>& theta);

// sqrt(mean((a - b)^2))
double rmse(const Vector& a, const Vector& b);

// Condition threshold shared with the theory module's invertibility checks.
inline constexpr double kSingularConditionLimit = 1e12;

}  // namespace ctxsep
