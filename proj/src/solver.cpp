#include "ctxsep/solver.hpp"

#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "ctxsep/errors.hpp"
#include "ctxsep/linops.hpp"
#include "ctxsep/log.hpp"

namespace ctxsep {

namespace {

using Triplet = Eigen::Triplet<double>;

// Small static regularizer that turns the KKT matrix
//   [ P + rho G'G   E' ]
//   [ E             0  ]
// into the strongly quasi-definite
//   [ P + rho G'G + dI  E'  ]
//   [ E                -dI  ]
// which always admits an LDL' factorization without pivoting. The
// perturbation it introduces is removed afterwards by iterative refinement
// (on direct solves) and by the feasibility polish.
constexpr double kKktShift = 1e-9;

// Builds the split matrix for a loss term: rows of A applied to
// (y_i - X_i theta_i), laid out over the stacked variable.
SparseMat loss_split_matrix(const LinearOperatorDescriptor& op, const Matrix& x,
                            int t, int y_off, int theta_off, int num_vars) {
    const SparseMat a = operator_matrix(op, t);
    const int rows = static_cast<int>(a.rows());
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(a.nonZeros()) +
                 static_cast<std::size_t>(rows) * static_cast<std::size_t>(x.cols()));
    for (int col = 0; col < a.outerSize(); ++col) {
        for (SparseMat::InnerIterator it(a, col); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), y_off + col, it.value());
        }
    }
    if (x.cols() > 0) {
        const Matrix ax = a * x;  // rows x n_i
        for (int r = 0; r < rows; ++r) {
            for (int j = 0; j < ax.cols(); ++j) {
                if (ax(r, j) != 0.0) trip.emplace_back(r, theta_off + j, -ax(r, j));
            }
        }
    }
    SparseMat m(rows, num_vars);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

// Builds the split matrix for a regularizer term: rows of B applied to y_i.
SparseMat reg_split_matrix(const LinearOperatorDescriptor& op, int t, int y_off,
                           int num_vars) {
    const SparseMat b = operator_matrix(op, t);
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(b.nonZeros()));
    for (int col = 0; col < b.outerSize(); ++col) {
        for (SparseMat::InnerIterator it(b, col); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), y_off + col, it.value());
        }
    }
    SparseMat m(static_cast<int>(b.rows()), num_vars);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SparseMat identity_split_matrix(int t, int y_off, int num_vars) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(t));
    for (int r = 0; r < t; ++r) trip.emplace_back(r, y_off + r, 1.0);
    SparseMat m(t, num_vars);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

// Vertically stacks the split matrices into one G, recording row offsets.
SparseMat stack_splits(const std::vector<SplitTerm>& splits, int num_vars,
                       std::vector<int>* offsets) {
    offsets->clear();
    int total = 0;
    std::size_t nnz = 0;
    for (const SplitTerm& s : splits) {
        offsets->push_back(total);
        total += s.rows();
        nnz += static_cast<std::size_t>(s.matrix.nonZeros());
    }
    std::vector<Triplet> trip;
    trip.reserve(nnz);
    for (std::size_t j = 0; j < splits.size(); ++j) {
        const SparseMat& m = splits[j].matrix;
        const int base = (*offsets)[j];
        for (int col = 0; col < m.outerSize(); ++col) {
            for (SparseMat::InnerIterator it(m, col); it; ++it) {
                trip.emplace_back(base + static_cast<int>(it.row()), col, it.value());
            }
        }
    }
    SparseMat g(total, num_vars);
    g.setFromTriplets(trip.begin(), trip.end());
    return g;
}

// Assembles the quasi-definite KKT matrix for a given rho. The sparsity
// pattern is identical for every rho, so the factorization object can keep
// its symbolic analysis across refactorizations.
SparseMat assemble_kkt(const SparseMat& quad, const SparseMat& gtg,
                       const SparseMat& constraint, double rho) {
    const int n = static_cast<int>(quad.rows());
    const int t = static_cast<int>(constraint.rows());
    const int dim = n + t;
    SparseMat h = quad;
    if (gtg.rows() == n) h += rho * gtg;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(h.nonZeros() + 2 * constraint.nonZeros()) +
                 static_cast<std::size_t>(dim));
    for (int col = 0; col < h.outerSize(); ++col) {
        for (SparseMat::InnerIterator it(h, col); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), col, it.value());
        }
    }
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, kKktShift);
    for (int col = 0; col < constraint.outerSize(); ++col) {
        for (SparseMat::InnerIterator it(constraint, col); it; ++it) {
            const int r = n + static_cast<int>(it.row());
            trip.emplace_back(r, col, it.value());
            trip.emplace_back(col, r, it.value());
        }
    }
    for (int i = 0; i < t; ++i) trip.emplace_back(n + i, n + i, -kKktShift);
    SparseMat kkt(dim, dim);
    kkt.setFromTriplets(trip.begin(), trip.end());
    return kkt;
}

struct KktSolver {
    Eigen::SimplicialLDLT<SparseMat> ldlt;
    SparseMat kkt;  // retained for refinement residuals
    int n = 0;      // primal dimension (the trailing rows are multipliers)
    bool analyzed = false;

    void factor(const SparseMat& quad, const SparseMat& gtg,
                const SparseMat& constraint, double rho) {
        n = static_cast<int>(quad.rows());
        kkt = assemble_kkt(quad, gtg, constraint, rho);
        if (!analyzed) {
            ldlt.analyzePattern(kkt);
            analyzed = true;
        }
        ldlt.factorize(kkt);
        if (ldlt.info() != Eigen::Success) {
            throw NumericalBreakdown(
                "KKT factorization failed; the problem may be degenerate "
                "(try theta_ridge > 0 or a nonzero regularizer weight)");
        }
    }

    Vector solve(const Vector& rhs) const { return ldlt.solve(rhs); }

    // Residual of the *unshifted* KKT system at x, i.e. with the static
    // quasi-definite perturbation backed out.
    Vector residual(const Vector& rhs, const Vector& x) const {
        Vector r = rhs - kkt * x;
        r.head(n) += kKktShift * x.head(n);
        r.tail(r.size() - n) -= kKktShift * x.tail(r.size() - n);
        return r;
    }

    // Direct solve with iterative refinement against the unshifted system.
    // Each correction is accepted only if it reduces the residual, which
    // keeps refinement safe even when the unshifted matrix is singular
    // (refinement still converges whenever the system is consistent).
    Vector solve_refined(const Vector& rhs, int sweeps,
                         double* resid_norm = nullptr) const {
        Vector x = ldlt.solve(rhs);
        Vector r = residual(rhs, x);
        double best = r.norm();
        const double tol = 1e-13 * (1.0 + rhs.norm());
        for (int sweep = 0; sweep < sweeps && best > tol; ++sweep) {
            const Vector cand = x + ldlt.solve(r);
            const Vector rc = residual(rhs, cand);
            if (rc.norm() >= best) break;
            x = cand;
            r = rc;
            best = rc.norm();
        }
        if (resid_norm) *resid_norm = best;
        return x;
    }
};

// Projects one time slice of the source matrix onto
//   { y : sum_i y_i = target, y_i >= 0 for i in the nonneg set }.
// Water-filling on the shift mu applied to every coordinate: the map
// mu -> sum_i clamp(v_i + mu) is piecewise linear and nondecreasing, so the
// correct segment is found by walking the breakpoints -v_i of the clamped
// coordinates. Free coordinates contribute slope 1 everywhere.
void project_sum_slice(double* values, const std::vector<bool>& nonneg, int k,
                       double target) {
    int free_count = 0;
    double free_sum = 0.0;
    std::vector<std::pair<double, int>> brk;  // (-v_i, i) for clamped coords
    brk.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        if (nonneg[static_cast<std::size_t>(i)]) {
            brk.emplace_back(-values[i], i);
        } else {
            ++free_count;
            free_sum += values[i];
        }
    }
    double mu;
    if (brk.empty()) {
        mu = (target - free_sum) / static_cast<double>(k);
    } else {
        std::sort(brk.begin(), brk.end());
        // Below the first breakpoint every clamped coordinate is zero.
        mu = std::numeric_limits<double>::quiet_NaN();
        double active_sum = 0.0;  // sum of v_i over clamped coords already positive
        int active = 0;
        for (std::size_t b = 0; b <= brk.size(); ++b) {
            const double lo = (b == 0) ? -std::numeric_limits<double>::infinity()
                                       : brk[b - 1].first;
            const double hi = (b == brk.size())
                                  ? std::numeric_limits<double>::infinity()
                                  : brk[b].first;
            const int slope = free_count + active;
            // On this segment: total(mu) = free_sum + active_sum + slope * mu.
            if (slope > 0) {
                const double cand = (target - free_sum - active_sum) /
                                    static_cast<double>(slope);
                if (cand >= lo - 1e-12 && cand <= hi + 1e-12) {
                    mu = std::clamp(cand, lo, hi);
                    break;
                }
            } else if (target == free_sum + active_sum) {
                mu = (b == brk.size()) ? lo : hi;  // any point of the flat segment
                break;
            }
            if (b < brk.size()) {
                active_sum += values[brk[b].second];
                ++active;
            }
        }
        if (std::isnan(mu)) {
            // Infeasible (all coordinates clamped and target < 0): keep the
            // equality constraint, which is the invariant callers rely on.
            double total = 0.0;
            for (int i = 0; i < k; ++i) total += values[i];
            mu = (target - total) / static_cast<double>(k);
            for (int i = 0; i < k; ++i) values[i] += mu;
            return;
        }
    }
    double sum = 0.0;
    int last_free = -1;
    for (int i = 0; i < k; ++i) {
        double v = values[i] + mu;
        if (nonneg[static_cast<std::size_t>(i)] && v < 0.0) v = 0.0;
        values[i] = v;
        if (v > 0.0 || !nonneg[static_cast<std::size_t>(i)]) last_free = i;
        sum += v;
    }
    // Absorb the last ulps of rounding into one unclamped coordinate so the
    // column sum is bitwise exact whenever possible.
    if (last_free >= 0) {
        const double corr = target - sum;
        double v = values[last_free] + corr;
        if (nonneg[static_cast<std::size_t>(last_free)] && v < 0.0) v = 0.0;
        values[last_free] = v;
    }
}

double splits_objective(const std::vector<SplitTerm>& splits, const Vector& gv,
                        const std::vector<int>& offsets) {
    double val = 0.0;
    for (std::size_t j = 0; j < splits.size(); ++j) {
        if (splits[j].kind != SplitTerm::Kind::L1) continue;
        val += splits[j].weight *
               gv.segment(offsets[j], splits[j].rows()).lpNorm<1>();
    }
    return val;
}

// Projects the y-part of the stacked variable onto the feasible set (exact
// per-time sums plus the nonnegative orthant), slice by slice.
void polish_feasibility(Vector& v, const CanonicalForm& canon,
                        std::vector<double>& slice) {
    const int t = canon.T;
    const int k = canon.k;
    for (int r = 0; r < t; ++r) {
        for (int i = 0; i < k; ++i) {
            slice[static_cast<std::size_t>(i)] = v[canon.y_offset(i) + r];
        }
        project_sum_slice(slice.data(), canon.nonneg, k, canon.aggregate[r]);
        for (int i = 0; i < k; ++i) {
            v[canon.y_offset(i) + r] = slice[static_cast<std::size_t>(i)];
        }
    }
}

}  // namespace

int CanonicalForm::theta_offset(int i) const {
    int off = T * k;
    for (int j = 0; j < i; ++j) off += block_sizes[static_cast<std::size_t>(j)];
    return off;
}

Vector prox_l1(const Vector& v, double t) {
    return v.unaryExpr([t](double x) {
        const double m = std::abs(x) - t;
        return m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
    });
}

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

CanonicalForm canonicalize(const SeparationProblem& problem) {
    const int t = problem.T();
    const int k = problem.k();

    CanonicalForm canon;
    canon.T = t;
    canon.k = k;
    canon.aggregate = problem.aggregate.values;
    canon.block_sizes.reserve(static_cast<std::size_t>(k));
    canon.nonneg.reserve(static_cast<std::size_t>(k));
    int num_vars = t * k;
    for (const auto& [block, s] : problem.sources) {
        canon.block_sizes.push_back(block.cols());
        canon.nonneg.push_back(s.nonneg);
        num_vars += block.cols();
    }
    canon.num_vars = num_vars;

    // Smooth quadratic part: accumulate 2w M'M for every squared-L2 term
    // (so the stored P makes the term equal to 1/2 v'Pv) plus the ridge.
    SparseMat quad(num_vars, num_vars);
    std::vector<SplitTerm> loss_splits;
    std::vector<SplitTerm> reg_splits;
    std::vector<SplitTerm> nonneg_splits;

    for (int i = 0; i < k; ++i) {
        const auto& [block, s] = problem.sources[static_cast<std::size_t>(i)];
        const int y_off = canon.y_offset(i);
        const int theta_off = canon.theta_offset(i);

        const SparseMat loss_m = loss_split_matrix(s.loss_operator, block.matrix,
                                                   t, y_off, theta_off, num_vars);
        if (s.loss_norm == Norm::SquaredL2) {
            quad += SparseMat(2.0 * s.loss_weight *
                              (SparseMat(loss_m.transpose()) * loss_m));
        } else {
            SplitTerm term;
            term.kind = SplitTerm::Kind::L1;
            term.role = SplitTerm::Role::Loss;
            term.source = i;
            term.weight = s.loss_weight;
            term.matrix = loss_m;
            loss_splits.push_back(std::move(term));
        }

        if (s.reg_norm != Norm::None && s.reg_weight != 0.0) {
            const SparseMat reg_m =
                reg_split_matrix(s.reg_operator, t, y_off, num_vars);
            if (s.reg_norm == Norm::SquaredL2) {
                quad += SparseMat(2.0 * s.reg_weight *
                                  (SparseMat(reg_m.transpose()) * reg_m));
            } else {
                SplitTerm term;
                term.kind = SplitTerm::Kind::L1;
                term.role = SplitTerm::Role::Reg;
                term.source = i;
                term.weight = s.reg_weight;
                term.matrix = reg_m;
                reg_splits.push_back(std::move(term));
            }
        }

        if (s.theta_ridge > 0.0 && block.cols() > 0) {
            std::vector<Triplet> trip;
            for (int j = 0; j < block.cols(); ++j) {
                trip.emplace_back(theta_off + j, theta_off + j,
                                  2.0 * s.theta_ridge);
            }
            SparseMat ridge(num_vars, num_vars);
            ridge.setFromTriplets(trip.begin(), trip.end());
            quad += ridge;
        }

        if (s.nonneg) {
            SplitTerm term;
            term.kind = SplitTerm::Kind::Nonneg;
            term.role = SplitTerm::Role::Nonneg;
            term.source = i;
            term.weight = 1.0;
            term.matrix = identity_split_matrix(t, y_off, num_vars);
            nonneg_splits.push_back(std::move(term));
        }
    }
    canon.quad = quad;
    canon.splits.reserve(loss_splits.size() + reg_splits.size() +
                         nonneg_splits.size());
    for (auto& s : loss_splits) canon.splits.push_back(std::move(s));
    for (auto& s : reg_splits) canon.splits.push_back(std::move(s));
    for (auto& s : nonneg_splits) canon.splits.push_back(std::move(s));

    // Sum constraint: row per time step, a 1 on every source's y_i[t].
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(t) * static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        for (int r = 0; r < t; ++r) trip.emplace_back(r, canon.y_offset(i) + r, 1.0);
    }
    canon.sum_constraint = SparseMat(t, num_vars);
    canon.sum_constraint.setFromTriplets(trip.begin(), trip.end());
    return canon;
}

SeparationResult solve(const CanonicalForm& canon, const SolverConfig& config) {
    if (config.max_iter < 1) throw DomainError("max_iter must be >= 1");
    if (config.rho_init <= 0.0 || !std::isfinite(config.rho_init)) {
        throw DomainError("rho_init must be positive and finite");
    }
    if (config.eps_abs < 0.0 || config.eps_rel < 0.0) {
        throw DomainError("tolerances must be nonnegative");
    }

    const int t = canon.T;
    const int k = canon.k;
    const int n = canon.num_vars;

    std::vector<int> offsets;
    const SparseMat g = stack_splits(canon.splits, n, &offsets);
    const int m = static_cast<int>(g.rows());

    SeparationResult result;
    result.theta_hat.reserve(canon.block_sizes.size());

    KktSolver kkt;
    Vector v = Vector::Zero(n);

    if (m == 0) {
        // Pure quadratic problem: one KKT solve, refined, no iterations.
        // Refinement stalling far from a solution means the unshifted system
        // is effectively inconsistent, i.e. the quadratic is degenerate in a
        // way the static shift cannot paper over.
        kkt.factor(canon.quad, SparseMat(), canon.sum_constraint, 1.0);
        Vector rhs = Vector::Zero(n + t);
        rhs.tail(t) = canon.aggregate;
        double resid = 0.0;
        const Vector x = kkt.solve_refined(rhs, 8, &resid);
        if (!(resid <= 1e-7 * (1.0 + rhs.norm()))) {
            throw NumericalBreakdown(
                "KKT solve did not reach a consistent solution; the problem "
                "may be degenerate (try theta_ridge > 0 or a nonzero "
                "regularizer weight)");
        }
        v = x.head(n);
        result.converged = true;
        result.iterations = 0;
        result.primal_residual = 0.0;
        result.dual_residual = 0.0;
    } else {
        const SparseMat gt = g.transpose();
        const SparseMat gtg = gt * g;
        double rho = config.rho_init;
        kkt.factor(canon.quad, gtg, canon.sum_constraint, rho);

        Vector z = Vector::Zero(m);
        Vector z_old = Vector::Zero(m);
        Vector u = Vector::Zero(m);
        Vector rhs(n + t);
        rhs.tail(t) = canon.aggregate;
        Vector gv = Vector::Zero(m);
        Vector polished(n);
        Vector pq(n);
        Vector gp(m);
        Vector best_v(n);
        double best_obj = std::numeric_limits<double>::infinity();
        std::vector<double> slice(static_cast<std::size_t>(k));

        const double sqrt_m = std::sqrt(static_cast<double>(m));
        const double sqrt_n = std::sqrt(static_cast<double>(n));
        bool converged = false;
        int iter = 0;
        double r_norm = 0.0;
        double s_norm = 0.0;

        while (iter < config.max_iter) {
            ++iter;
            rhs.head(n).noalias() = gt * (rho * (z - u));
            const Vector x = kkt.solve(rhs);
            v = x.head(n);
            gv.noalias() = g * v;

            z_old = z;
            for (std::size_t j = 0; j < canon.splits.size(); ++j) {
                const SplitTerm& s = canon.splits[j];
                const int off = offsets[j];
                const int len = s.rows();
                const Vector arg = gv.segment(off, len) + u.segment(off, len);
                if (s.kind == SplitTerm::Kind::L1) {
                    z.segment(off, len) = prox_l1(arg, s.weight / rho);
                } else {
                    z.segment(off, len) = project_nonneg(arg);
                }
            }
            u += gv - z;

            r_norm = (gv - z).norm();
            s_norm = rho * (gt * (z - z_old)).norm();
            const double eps_pri =
                sqrt_m * config.eps_abs +
                config.eps_rel * std::max(gv.norm(), z.norm());
            const double eps_dual = sqrt_n * config.eps_abs +
                                    config.eps_rel * rho * (gt * u).norm();

            // Track the best feasible point seen so far. Raw ADMM iterates
            // are not monotone in objective (the splits lag), so the
            // incumbent is both what gets returned and what the per-iteration
            // history reports.
            polished = v;
            polish_feasibility(polished, canon, slice);
            pq.noalias() = canon.quad * polished;
            gp.noalias() = g * polished;
            const double cand =
                0.5 * polished.dot(pq) +
                splits_objective(canon.splits, gp, offsets);
            if (cand < best_obj) {
                best_obj = cand;
                best_v = polished;
            }
            if (config.record_objective) {
                result.diagnostics.objective_history.push_back(best_obj);
            }

            if (r_norm <= eps_pri && s_norm <= eps_dual) {
                converged = true;
                break;
            }

            if (config.rho_adapt && iter <= 100) {
                double new_rho = rho;
                if (r_norm > 10.0 * s_norm) {
                    new_rho = rho * 2.0;
                } else if (s_norm > 10.0 * r_norm) {
                    new_rho = rho / 2.0;
                }
                new_rho = std::clamp(new_rho, 1e-6, 1e6);
                if (new_rho != rho) {
                    u *= rho / new_rho;
                    rho = new_rho;
                    kkt.factor(canon.quad, gtg, canon.sum_constraint, rho);
                    log_debug("rho -> %g at iteration %d", rho, iter);
                }
            }
        }
        result.converged = converged;
        result.iterations = iter;
        result.primal_residual = r_norm;
        result.dual_residual = s_norm;
        if (!converged) {
            log_warn("solver hit max_iter=%d (primal %.3e, dual %.3e)",
                     config.max_iter, r_norm, s_norm);
        }
        v = best_v;  // return the incumbent, not the last raw iterate
    }

    // Feasibility polish: project each time slice onto the exact sum
    // constraint and the nonnegativity orthants. ADMM incumbents are already
    // polished; this pass covers the direct path and turns the iterative
    // tolerances into hard guarantees on the returned sources.
    std::vector<double> slice(static_cast<std::size_t>(k));
    polish_feasibility(v, canon, slice);
    Matrix y(t, k);
    for (int i = 0; i < k; ++i) y.col(i) = v.segment(canon.y_offset(i), t);
    result.y_hat = std::move(y);
    for (int i = 0; i < k; ++i) {
        result.theta_hat.push_back(
            v.segment(canon.theta_offset(i),
                      canon.block_sizes[static_cast<std::size_t>(i)]));
    }

    // Objective at the polished point, from the canonical terms.
    double obj = 0.5 * v.dot(canon.quad * v);
    for (std::size_t j = 0; j < canon.splits.size(); ++j) {
        const SplitTerm& s = canon.splits[j];
        if (s.kind != SplitTerm::Kind::L1) continue;
        obj += s.weight * (s.matrix * v).lpNorm<1>();
    }
    result.objective = obj;
    return result;
}

SeparationResult solve_problem(const SeparationProblem& problem,
                               const SolverConfig& config) {
    return solve(canonicalize(problem), config);
}

}  // namespace ctxsep
