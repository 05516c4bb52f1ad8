#pragma once

#include <vector>

#include "ctxsep/core.hpp"

namespace ctxsep {

// Operator-splitting solver for the full problem: the squared-L2 terms stay
// in a smooth quadratic 1/2 v'Pv over the stacked variable
// v = (y_1..y_k, theta_1..theta_k); every L1 term and nonnegativity
// indicator gets an auxiliary split z_j = G_j v with an O(1) proximal map;
// the sum constraint is a hard equality row in the quadratic KKT system,
// never penalized. The KKT matrix is factored once per rho value and reused
// across iterations.

struct SolverConfig {
    double eps_abs = 1e-5;
    double eps_rel = 1e-4;
    int max_iter = 5000;
    double rho_init = 1.0;
    bool rho_adapt = true;           // residual balancing, factor 2, threshold 10
    bool record_objective = false;   // track the finite objective terms per iterate
};

struct SplitTerm {
    enum class Kind { L1, Nonneg };
    enum class Role { Loss, Reg, Nonneg };

    Kind kind = Kind::L1;
    Role role = Role::Loss;
    int source = 0;
    double weight = 1.0;  // multiplier of the L1 norm; unused for Nonneg
    SparseMat matrix;     // G_j, rows x num_vars

    int rows() const { return static_cast<int>(matrix.rows()); }
};

struct CanonicalForm {
    int T = 0;
    int k = 0;
    std::vector<int> block_sizes;
    int num_vars = 0;  // T*k + sum n_i

    SparseMat quad;            // P, so the smooth part is 1/2 v'Pv
    std::vector<SplitTerm> splits;
    SparseMat sum_constraint;  // E: T x num_vars, E v = aggregate
    Vector aggregate;
    std::vector<bool> nonneg;  // per source, for the feasibility polish

    int y_offset(int i) const { return T * i; }
    int theta_offset(int i) const;
};

CanonicalForm canonicalize(const SeparationProblem& problem);

SeparationResult solve(const CanonicalForm& canon, const SolverConfig& config = {});

// Convenience: canonicalize + solve.
SeparationResult solve_problem(const SeparationProblem& problem, const SolverConfig& config = {});

// Soft-thresholding: elementwise sign(v) * max(|v| - t, 0), the proximal
// map of t*||.||_1.
Vector prox_l1(const Vector& v, double t);

// Elementwise max(v, 0).
Vector project_nonneg(const Vector& v);

}  // namespace ctxsep
