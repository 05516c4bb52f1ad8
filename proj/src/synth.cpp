#include "ctxsep/synth.hpp"

#include <cmath>
#include <utility>

#include "ctxsep/errors.hpp"
#include "ctxsep/rng.hpp"
#include "ctxsep/theory.hpp"

namespace ctxsep {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate(const RecoveryConfig& c) {
    if (c.T < 2) throw DomainError("recovery T must be >= 2");
    if (c.k < 1) throw DomainError("recovery k must be >= 1");
    if (c.n_i < 1) throw DomainError("recovery n_i must be >= 1");
    if (!(c.mu > 0.0) || c.mu > 1.0) throw DomainError("mu must be in (0, 1]");
}

void validate(const DisaggConfig& c) {
    if (c.T < 2) throw DomainError("disagg T must be >= 2");
    if (c.tau1 < 2 || c.tau2 < 2) throw DomainError("periods must be >= 2");
    if (!(c.sigma > 0.0)) throw DomainError("sigma must be > 0");
    if (c.beta < 1) throw DomainError("beta must be >= 1");
    if (c.p_zero < 0.0 || c.p_zero >= 1.0) throw DomainError("p_zero must be in [0, 1)");
}

}  // namespace

RecoveryDraw gen_recovery(const RecoveryConfig& config) {
    validate(config);
    SplitMix64 rng(config.seed);
    const int t_len = config.T;
    const int k = config.k;
    const int n_i = config.n_i;

    RecoveryDraw draw;
    draw.design.x.resize(t_len, k * n_i);
    draw.design.block_sizes.assign(static_cast<std::size_t>(k), n_i);

    // Row of X_i = sqrt(1-mu) g 1 + e with g scalar standard normal and
    // e ~ N(0, I), giving row covariance I + (1-mu) 11'. Blocks are drawn
    // independently, so cross-block correlation is zero in expectation.
    const double shared = std::sqrt(1.0 - config.mu);
    for (int i = 0; i < k; ++i) {
        for (int t = 0; t < t_len; ++t) {
            const double g = rng.next_gaussian();
            for (int j = 0; j < n_i; ++j) {
                draw.design.x(t, i * n_i + j) = shared * g + rng.next_gaussian();
            }
        }
    }

    draw.theta_star.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        Vector theta(n_i);
        for (int j = 0; j < n_i; ++j) theta[j] = rng.next_uniform(-1.0, 1.0);
        draw.theta_star.push_back(std::move(theta));
    }

    draw.y_star.resize(t_len, k);
    for (int i = 0; i < k; ++i) {
        draw.y_star.col(i) = draw.design.block(i) * draw.theta_star[static_cast<std::size_t>(i)];
    }
    draw.y_noisy = draw.y_star;
    for (int i = 0; i < k; ++i) {
        for (int t = 0; t < t_len; ++t) draw.y_noisy(t, i) += rng.next_gaussian();
    }
    draw.aggregate.values = draw.y_noisy.rowwise().sum();
    return draw;
}

DisaggDraw gen_disagg(const DisaggConfig& config) {
    validate(config);
    SplitMix64 rng(config.seed);
    const int t_len = config.T;

    DisaggDraw draw;
    draw.x1.resize(t_len, 1);
    draw.x2.resize(t_len, 1);
    const double half2 = static_cast<double>(config.tau2) / 2.0;
    for (int t = 0; t < t_len; ++t) {
        draw.x1(t, 0) = std::sin(2.0 * kPi * static_cast<double>(t) /
                                 static_cast<double>(config.tau1)) + 1.0;
        draw.x2(t, 0) = (static_cast<double>(t % config.tau2) < half2) ? 1.0 : 0.0;
    }

    Vector w1(t_len);
    for (int t = 0; t < t_len; ++t) w1[t] = config.sigma * rng.next_gaussian();

    // Step noise: window-beta moving sum of a zero-inflated symmetric
    // uniform. Drawing T + beta - 1 underlying values keeps every output a
    // full-width sum (stationary marginal, no boundary taper).
    const int n_eta = t_len + config.beta - 1;
    Vector eta(n_eta);
    for (int s = 0; s < n_eta; ++s) {
        const double gate = rng.next_double();
        eta[s] = (gate < config.p_zero) ? 0.0 : rng.next_uniform(-1.0, 1.0);
    }
    Vector w2(t_len);
    double rolling = eta.head(config.beta).sum();
    w2[0] = rolling;
    for (int t = 1; t < t_len; ++t) {
        rolling += eta[t + config.beta - 1] - eta[t - 1];
        w2[t] = rolling;
    }

    draw.y_star.resize(t_len, 2);
    for (int t = 0; t < t_len; ++t) {
        draw.y_star(t, 0) = std::max(draw.x1(t, 0) + w1[t], 0.0);
        draw.y_star(t, 1) = std::max(draw.x2(t, 0) + w2[t], 0.0);
    }
    draw.aggregate.values = draw.y_star.rowwise().sum();
    return draw;
}

SeparationProblem build_disagg_problem(const DisaggDraw& draw, DisaggModel model,
                                       const DisaggModelWeights& weights) {
    FeatureBlock smooth_block{"smooth", draw.x1};
    FeatureBlock step_block{"step", draw.x2};

    SourceModelSpec smooth;
    smooth.loss_norm = Norm::SquaredL2;
    smooth.nonneg = true;

    SourceModelSpec step;
    step.loss_norm =
        (model == DisaggModel::SquaredL2Only) ? Norm::SquaredL2 : Norm::L1;
    step.nonneg = true;

    if (model == DisaggModel::MixedLossWithRegs) {
        smooth.reg_norm = Norm::SquaredL2;
        smooth.reg_operator = LinearOperatorDescriptor::diff();
        smooth.reg_weight = weights.smooth_reg;
        step.reg_norm = Norm::L1;
        step.reg_operator = LinearOperatorDescriptor::diff();
        step.reg_weight = weights.step_reg;
    }

    std::vector<std::pair<FeatureBlock, SourceModelSpec>> sources;
    sources.emplace_back(std::move(smooth_block), smooth);
    sources.emplace_back(std::move(step_block), step);
    return build_problem(AggregateSignal{draw.aggregate.values}, std::move(sources));
}

double matrix_rmse(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("matrix_rmse: shapes differ");
    }
    const double n = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
    return std::sqrt((a - b).squaredNorm() / n);
}

RecoveryTrialStats run_recovery_trial(const RecoveryConfig& config, std::uint64_t trial) {
    RecoveryConfig c = config;
    c.seed = SplitMix64::derive_stream(config.seed, trial);
    const RecoveryDraw draw = gen_recovery(c);

    const std::vector<Vector> theta_hat =
        least_squares_theta(draw.design, draw.aggregate);
    const Matrix fit = reconstruct_sources(draw.design, theta_hat);

    const double sigma_sq = static_cast<double>(c.k);  // unit noise per source
    RecoveryTrialStats stats;
    stats.mse.reserve(static_cast<std::size_t>(c.k));
    stats.theory_mean.reserve(static_cast<std::size_t>(c.k));
    stats.theory_bound90_sq.reserve(static_cast<std::size_t>(c.k));
    for (int i = 0; i < c.k; ++i) {
        stats.mse.push_back((fit.col(i) - draw.y_star.col(i)).squaredNorm() /
                            static_cast<double>(c.T));
        stats.theory_mean.push_back(expected_sq_error(draw.design, i, sigma_sq) /
                                    static_cast<double>(c.T));
        const double bound = rmse_bound(draw.design, i, sigma_sq, 0.1, c.T);
        stats.theory_bound90_sq.push_back(bound * bound);
    }
    return stats;
}

}  // namespace ctxsep
