#include "ctxsep/core.hpp"

#include <cmath>

#include "ctxsep/errors.hpp"

namespace ctxsep {

int SeparationProblem::num_features() const {
    int n = 0;
    for (const auto& [block, spec] : sources) n += block.cols();
    return n;
}

namespace {

void validate_spec(const SourceModelSpec& spec, const std::string& name, int T) {
    auto check_weight = [&](double w, const char* what) {
        if (!std::isfinite(w)) throw NonFinite("source '" + name + "': " + what + " is not finite");
        if (w < 0.0) throw DomainError("source '" + name + "': " + what + " must be >= 0");
    };
    check_weight(spec.loss_weight, "loss weight");
    check_weight(spec.reg_weight, "reg weight");
    check_weight(spec.theta_ridge, "theta ridge");
    if (spec.loss_norm == Norm::None)
        throw DomainError("source '" + name + "': loss norm cannot be None");
    // Dimension compatibility with T, including BlockSum divisibility.
    operator_output_dim(spec.loss_operator, T);
    if (spec.reg_norm != Norm::None) operator_output_dim(spec.reg_operator, T);
}

}  // namespace

SeparationProblem build_problem(AggregateSignal aggregate,
                                std::vector<std::pair<FeatureBlock, SourceModelSpec>> sources) {
    if (sources.empty()) throw EmptyProblem("a separation problem needs at least one source");
    const int T = aggregate.T();
    if (T < 2) throw DimensionMismatch("aggregate must have T >= 2 samples");
    if (!aggregate.values.allFinite()) throw NonFinite("aggregate contains NaN/Inf");

    for (const auto& [block, spec] : sources) {
        if (block.cols() > 0 && block.rows() != T)
            throw DimensionMismatch("feature block '" + block.name + "' has " +
                                    std::to_string(block.rows()) + " rows, aggregate has T=" +
                                    std::to_string(T));
        if (!block.matrix.allFinite())
            throw NonFinite("feature block '" + block.name + "' contains NaN/Inf");
        validate_spec(spec, block.name, T);
    }
    return SeparationProblem{std::move(aggregate), std::move(sources)};
}

namespace {

double norm_value(Norm norm, const Vector& v) {
    switch (norm) {
        case Norm::L1:
            return v.lpNorm<1>();
        case Norm::SquaredL2:
            return v.squaredNorm();
        case Norm::None:
            return 0.0;
    }
    return 0.0;
}

}  // namespace

double objective_value(const SeparationProblem& problem, const Matrix& y,
                       const std::vector<Vector>& theta) {
    const int T = problem.T();
    const int k = problem.k();
    if (y.rows() != T || y.cols() != k)
        throw DimensionMismatch("Y must be " + std::to_string(T) + "x" + std::to_string(k));
    if (static_cast<int>(theta.size()) != k)
        throw DimensionMismatch("theta must have one block per source");

    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        const auto& [block, spec] = problem.sources[i];
        if (theta[i].size() != block.cols())
            throw DimensionMismatch("theta block " + std::to_string(i) + " has size " +
                                    std::to_string(theta[i].size()) + ", expected " +
                                    std::to_string(block.cols()));
        Vector residual = y.col(i);
        if (block.cols() > 0) residual -= block.matrix * theta[i];
        total += spec.loss_weight * norm_value(spec.loss_norm, apply(spec.loss_operator, residual));
        if (spec.reg_norm != Norm::None && spec.reg_weight != 0.0)
            total += spec.reg_weight * norm_value(spec.reg_norm, apply(spec.reg_operator, y.col(i)));
        if (spec.theta_ridge != 0.0) total += spec.theta_ridge * theta[i].squaredNorm();
    }
    return total;
}

}  // namespace ctxsep
