#include "ctxsep/closedform.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ctxsep/errors.hpp"

namespace ctxsep {

int BlockDesign::block_offset(int i) const {
    int off = 0;
    for (int j = 0; j < i; ++j) off += block_sizes[j];
    return off;
}

Eigen::Ref<const Matrix> BlockDesign::block(int i) const {
    return x.middleCols(block_offset(i), block_sizes[i]);
}

BlockDesign design_from_problem(const SeparationProblem& problem) {
    BlockDesign design;
    design.block_sizes.reserve(problem.sources.size());
    int n = 0;
    for (const auto& [block, spec] : problem.sources) {
        design.block_sizes.push_back(block.cols());
        n += block.cols();
    }
    design.x.resize(problem.T(), n);
    int off = 0;
    for (const auto& [block, spec] : problem.sources) {
        design.x.middleCols(off, block.cols()) = block.matrix;
        off += block.cols();
    }
    return design;
}

namespace {

std::vector<Vector> split_blocks(const Vector& theta, const std::vector<int>& sizes) {
    std::vector<Vector> out;
    out.reserve(sizes.size());
    int off = 0;
    for (int n_i : sizes) {
        out.push_back(theta.segment(off, n_i));
        off += n_i;
    }
    return out;
}

}  // namespace

std::vector<Vector> least_squares_theta(const BlockDesign& design, const AggregateSignal& aggregate,
                                        bool allow_pseudoinverse) {
    if (design.T() != aggregate.T())
        throw DimensionMismatch("design has " + std::to_string(design.T()) +
                                " rows, aggregate has " + std::to_string(aggregate.T()));
    const int n = design.n();
    if (n == 0) return split_blocks(Vector::Zero(0), design.block_sizes);

    // Condition estimate on R from the thin QR; n is small so the SVD of
    // the n x n triangle is cheap.
    Eigen::HouseholderQR<Matrix> qr(design.x);
    Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

    if (cond >= kSingularConditionLimit) {
        if (!allow_pseudoinverse) {
            // The last right singular vector of R is the near-null-space
            // direction in coefficient space; naming the dominant entries
            // points at the collinear columns.
            const Vector null_dir = svd.matrixV().col(n - 1);
            std::ostringstream msg;
            msg << "design is singular or near-singular (cond ~ " << cond
                << "); near-null-space direction over concatenated features: [";
            for (int j = 0; j < n; ++j) msg << (j ? ", " : "") << null_dir[j];
            msg << "]";
            throw SingularDesign(msg.str());
        }
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design.x);
        return split_blocks(cod.solve(aggregate.values), design.block_sizes);
    }
    return split_blocks(qr.solve(aggregate.values), design.block_sizes);
}

Matrix reconstruct_sources(const BlockDesign& design, const std::vector<Vector>& theta) {
    if (static_cast<int>(theta.size()) != design.k())
        throw DimensionMismatch("theta must have one block per source");
    Matrix out = Matrix::Zero(design.T(), design.k());
    for (int i = 0; i < design.k(); ++i) {
        if (theta[i].size() != design.block_sizes[i])
            throw DimensionMismatch("theta block " + std::to_string(i) + " has size " +
                                    std::to_string(theta[i].size()) + ", expected " +
                                    std::to_string(design.block_sizes[i]));
        if (design.block_sizes[i] > 0) out.col(i) = design.block(i) * theta[i];
    }
    return out;
}

double rmse(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("rmse needs equal lengths, got " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()));
    return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace ctxsep
