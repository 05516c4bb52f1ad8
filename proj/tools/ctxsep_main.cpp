// ctxsep: command-line surface for contextually supervised source
// separation. Subcommands:
//
//   solve           solve a problem document (JSON) and emit the result
//   synth-recovery  Gaussian recovery experiments vs. the theory formulas
//   synth-disagg    two-signal disaggregation benchmark over model variants
//   theory          recovery-theory report for a feature design
//   energy          disaggregate one home's meter/weather CSV pair
//   energy-batch    generate and disaggregate a synthetic corpus
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure
// (non-convergence or breakdown). Every run prints its resolved
// configuration, seed included, so outputs can be reproduced exactly;
// given the same flags and seed, output files are byte-identical.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctxsep/closedform.hpp"
#include "ctxsep/energy.hpp"
#include "ctxsep/errors.hpp"
#include "ctxsep/parallel.hpp"
#include "ctxsep/problem_io.hpp"
#include "ctxsep/rng.hpp"
#include "ctxsep/solver.hpp"
#include "ctxsep/synth.hpp"
#include "ctxsep/theory.hpp"
#include "ctxsep/timeutil.hpp"

namespace {

using namespace ctxsep;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Solver flags shared by the solving subcommands. Values are applied only
// when the user passed them, so document-level settings keep priority
// over compiled defaults but not over explicit flags.
struct SolverFlags {
    double eps_abs = 0.0;
    double eps_rel = 0.0;
    int max_iter = 0;
    double rho = 0.0;
    CLI::Option* eps_abs_opt = nullptr;
    CLI::Option* eps_rel_opt = nullptr;
    CLI::Option* max_iter_opt = nullptr;
    CLI::Option* rho_opt = nullptr;

    void attach(CLI::App* cmd) {
        eps_abs_opt = cmd->add_option("--eps-abs", eps_abs, "Absolute stopping tolerance");
        eps_rel_opt = cmd->add_option("--eps-rel", eps_rel, "Relative stopping tolerance");
        max_iter_opt = cmd->add_option("--max-iter", max_iter, "Iteration limit");
        rho_opt = cmd->add_option("--rho", rho, "Initial penalty parameter");
    }

    void apply(SolverConfig* config) const {
        if (eps_abs_opt && eps_abs_opt->count() > 0) config->eps_abs = eps_abs;
        if (eps_rel_opt && eps_rel_opt->count() > 0) config->eps_rel = eps_rel;
        if (max_iter_opt && max_iter_opt->count() > 0) config->max_iter = max_iter;
        if (rho_opt && rho_opt->count() > 0) config->rho_init = rho;
    }

    std::string echo(const SolverConfig& config) const {
        return " eps_abs=" + num(config.eps_abs) + " eps_rel=" + num(config.eps_rel) +
               " max_iter=" + std::to_string(config.max_iter) + " rho=" + num(config.rho_init);
    }
};

void echo_config(const std::string& line) { std::printf("config: %s\n", line.c_str()); }

// ---------------------------------------------------------------- solve --

struct SolveArgs {
    std::string problem_path;
    std::string out_json;
    std::string out_y;
    bool record_objective = false;
    SolverFlags solver;
};

int run_solve(const SolveArgs& args) {
    ProblemDocument doc = load_problem_json(args.problem_path);
    args.solver.apply(&doc.solver);
    doc.solver.record_objective = args.record_objective;
    echo_config("solve problem=" + args.problem_path + args.solver.echo(doc.solver) +
                " out=" + (args.out_json.empty() ? "-" : args.out_json) +
                " out_y=" + (args.out_y.empty() ? "-" : args.out_y));

    const SeparationResult result = solve_problem(doc.problem, doc.solver);
    std::printf("objective=%s iterations=%d converged=%d primal=%s dual=%s\n",
                format_double(result.objective).c_str(), result.iterations,
                result.converged ? 1 : 0, num(result.primal_residual).c_str(),
                num(result.dual_residual).c_str());
    if (!args.out_json.empty()) save_result_json(args.out_json, result, doc.source_names);
    if (!args.out_y.empty()) write_sources_csv(args.out_y, result.y_hat, doc.source_names);
    if (!result.converged) {
        std::fprintf(stderr, "error: solver did not converge within %d iterations\n",
                     doc.solver.max_iter);
        return 3;
    }
    return 0;
}

// ------------------------------------------------------- synth-recovery --

struct SynthRecoveryArgs {
    std::vector<int> t_values{500};
    int trials = 100;
    int k = 2;
    int n = 16;
    double mu = 0.01;
    std::uint64_t seed = 0;
    std::string out;
    std::string dump_data;
    int jobs = 1;
};

// Dataset dump shared by the synthetic commands: one row per time step
// with the features, the noisy sources, and their sum.
std::string dataset_csv(const Matrix& features, const std::vector<int>& feature_blocks,
                        const Matrix& y_star, const Vector& aggregate) {
    std::string csv = "t";
    for (std::size_t i = 0; i < feature_blocks.size(); ++i) {
        for (int j = 0; j < feature_blocks[i]; ++j) {
            csv += ",x_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
        }
    }
    for (int i = 0; i < y_star.cols(); ++i) csv += ",y_" + std::to_string(i + 1);
    csv += ",aggregate\n";
    for (Eigen::Index t = 0; t < y_star.rows(); ++t) {
        csv += std::to_string(t);
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            csv += "," + format_double(features(t, j));
        }
        for (Eigen::Index i = 0; i < y_star.cols(); ++i) {
            csv += "," + format_double(y_star(t, i));
        }
        csv += "," + format_double(aggregate[t]) + "\n";
    }
    return csv;
}

int run_synth_recovery(const SynthRecoveryArgs& args) {
    std::string t_list;
    for (std::size_t i = 0; i < args.t_values.size(); ++i) {
        if (i) t_list += ",";
        t_list += std::to_string(args.t_values[i]);
    }
    echo_config("synth-recovery T=" + t_list + " trials=" + std::to_string(args.trials) +
                " k=" + std::to_string(args.k) + " n=" + std::to_string(args.n) +
                " mu=" + num(args.mu) + " seed=" + std::to_string(args.seed) +
                " jobs=" + std::to_string(args.jobs) + " out=" + args.out +
                " dump_data=" + (args.dump_data.empty() ? "-" : args.dump_data));
    if (args.trials < 1) throw DomainError("--trials must be >= 1");

    if (!args.dump_data.empty()) {
        // The exact dataset consumed by trial 0 at the first T.
        RecoveryConfig config;
        config.T = args.t_values.front();
        config.k = args.k;
        config.n_i = args.n;
        config.mu = args.mu;
        config.seed = SplitMix64::derive_stream(SplitMix64::derive_stream(args.seed, 0), 0);
        const RecoveryDraw draw = gen_recovery(config);
        write_text_file(args.dump_data,
                        dataset_csv(draw.design.x, draw.design.block_sizes, draw.y_noisy,
                                    draw.aggregate.values));
    }

    // Seeds are split hierarchically: one substream per T value, one
    // derived seed per trial inside it, so results do not depend on how
    // work is scheduled across threads.
    const std::size_t total =
        args.t_values.size() * static_cast<std::size_t>(args.trials);
    std::vector<RecoveryTrialStats> results(total);
    parallel_for(total, args.jobs, [&](std::size_t idx) {
        const std::size_t ti = idx / static_cast<std::size_t>(args.trials);
        const std::uint64_t trial = idx % static_cast<std::size_t>(args.trials);
        RecoveryConfig config;
        config.T = args.t_values[ti];
        config.k = args.k;
        config.n_i = args.n;
        config.mu = args.mu;
        config.seed = SplitMix64::derive_stream(args.seed, static_cast<std::uint64_t>(ti));
        results[idx] = run_recovery_trial(config, trial);
    });

    std::string csv = "T,trial";
    for (int i = 1; i <= args.k; ++i) csv += ",mse_" + std::to_string(i);
    for (int i = 1; i <= args.k; ++i) csv += ",theory_mean_" + std::to_string(i);
    for (int i = 1; i <= args.k; ++i) csv += ",theory_bound90_" + std::to_string(i);
    csv += "\n";
    for (std::size_t idx = 0; idx < total; ++idx) {
        const std::size_t ti = idx / static_cast<std::size_t>(args.trials);
        const std::size_t trial = idx % static_cast<std::size_t>(args.trials);
        csv += std::to_string(args.t_values[ti]) + "," + std::to_string(trial);
        const RecoveryTrialStats& r = results[idx];
        for (double v : r.mse) csv += "," + format_double(v);
        for (double v : r.theory_mean) csv += "," + format_double(v);
        for (double v : r.theory_bound90_sq) csv += "," + format_double(v);
        csv += "\n";
    }
    write_text_file(args.out, csv);
    std::printf("wrote %zu rows to %s\n", total, args.out.c_str());
    return 0;
}

// --------------------------------------------------------- synth-disagg --

struct SynthDisaggArgs {
    DisaggConfig config;
    int trials = 1;
    DisaggModelWeights weights;
    std::string out;
    std::string dump_data;
    int jobs = 1;
    SolverFlags solver;
};

const char* disagg_model_name(DisaggModel m) {
    switch (m) {
        case DisaggModel::SquaredL2Only: return "sq_l2";
        case DisaggModel::MixedLoss: return "sq_l2+l1";
        case DisaggModel::MixedLossWithRegs: return "full";
    }
    return "?";
}

int run_synth_disagg(const SynthDisaggArgs& args) {
    SolverConfig solver;
    args.solver.apply(&solver);
    echo_config("synth-disagg T=" + std::to_string(args.config.T) +
                " tau1=" + std::to_string(args.config.tau1) +
                " tau2=" + std::to_string(args.config.tau2) + " sigma=" + num(args.config.sigma) +
                " beta=" + std::to_string(args.config.beta) + " p_zero=" + num(args.config.p_zero) +
                " seed=" + std::to_string(args.config.seed) +
                " trials=" + std::to_string(args.trials) +
                " reg_smooth=" + num(args.weights.smooth_reg) +
                " reg_step=" + num(args.weights.step_reg) + args.solver.echo(solver) +
                " jobs=" + std::to_string(args.jobs) + " out=" + args.out +
                " dump_data=" + (args.dump_data.empty() ? "-" : args.dump_data));
    if (args.trials < 1) throw DomainError("--trials must be >= 1");

    if (!args.dump_data.empty()) {
        DisaggConfig config = args.config;
        config.seed = SplitMix64::derive_stream(args.config.seed, 0);
        const DisaggDraw draw = gen_disagg(config);
        Matrix features(draw.y_star.rows(), 2);
        features.col(0) = draw.x1.col(0);
        features.col(1) = draw.x2.col(0);
        write_text_file(args.dump_data,
                        dataset_csv(features, {1, 1}, draw.y_star, draw.aggregate.values));
    }

    constexpr DisaggModel kModels[] = {DisaggModel::SquaredL2Only, DisaggModel::MixedLoss,
                                       DisaggModel::MixedLossWithRegs};
    struct Row {
        double rmse = 0.0;
        double objective = 0.0;
        int iterations = 0;
        bool converged = false;
    };
    const std::size_t total = static_cast<std::size_t>(args.trials) * 3;
    std::vector<Row> rows(total);
    parallel_for(total, args.jobs, [&](std::size_t idx) {
        const std::size_t trial = idx / 3;
        const DisaggModel model = kModels[idx % 3];
        DisaggConfig config = args.config;
        config.seed = SplitMix64::derive_stream(args.config.seed, trial);
        const DisaggDraw draw = gen_disagg(config);
        const SeparationProblem problem = build_disagg_problem(draw, model, args.weights);
        const SeparationResult result = solve_problem(problem, solver);
        rows[idx] = Row{matrix_rmse(result.y_hat, draw.y_star), result.objective,
                        result.iterations, result.converged};
    });

    std::string csv = "trial,model,rmse,objective,iterations,converged\n";
    bool all_converged = true;
    for (std::size_t idx = 0; idx < total; ++idx) {
        const std::size_t trial = idx / 3;
        csv += std::to_string(trial);
        csv += ",";
        csv += disagg_model_name(kModels[idx % 3]);
        csv += "," + format_double(rows[idx].rmse) + "," + format_double(rows[idx].objective) +
               "," + std::to_string(rows[idx].iterations) + "," +
               (rows[idx].converged ? "1" : "0") + "\n";
        all_converged = all_converged && rows[idx].converged;
    }
    write_text_file(args.out, csv);
    std::printf("wrote %zu rows to %s\n", total, args.out.c_str());
    if (!all_converged) {
        std::fprintf(stderr, "error: at least one solve did not converge\n");
        return 3;
    }
    return 0;
}

// ---------------------------------------------------------------- theory --

struct TheoryArgs {
    std::string problem_path;
    std::string design_path;
    std::vector<int> blocks;
    double sigma_sq = 1.0;
    double delta = 0.1;
    std::string out;
    std::string emit = "json";
};

int run_theory(const TheoryArgs& args) {
    echo_config("theory " +
                (args.problem_path.empty()
                     ? "design=" + args.design_path
                     : "problem=" + args.problem_path) +
                " sigma_sq=" + num(args.sigma_sq) + " delta=" + num(args.delta) +
                " emit=" + args.emit + " out=" + (args.out.empty() ? "-" : args.out));

    BlockDesign design;
    std::vector<std::string> names;
    if (!args.problem_path.empty()) {
        ProblemDocument doc = load_problem_json(args.problem_path);
        design = design_from_problem(doc.problem);
        names = doc.source_names;
    } else {
        if (args.design_path.empty()) {
            throw DomainError("theory needs --problem or --design with --blocks");
        }
        design.x = load_matrix_csv(args.design_path);
        if (args.blocks.empty()) throw DomainError("--design requires --blocks n1,n2,...");
        design.block_sizes = args.blocks;
        int sum = 0;
        for (int b : args.blocks) {
            if (b < 0) throw DomainError("--blocks entries must be >= 0");
            sum += b;
        }
        if (sum != design.n()) {
            throw DimensionMismatch("--blocks sums to " + std::to_string(sum) + " but " +
                                    args.design_path + " has " + std::to_string(design.n()) +
                                    " columns");
        }
        for (std::size_t i = 0; i < args.blocks.size(); ++i) {
            names.push_back("source_" + std::to_string(i));
        }
    }

    const TheoryReport report = theory_report(design, args.sigma_sq, args.delta);
    std::string text;
    if (args.emit == "json") {
        nlohmann::json doc;
        doc["sigma_sq"] = report.sigma_sq;
        doc["delta"] = report.delta;
        doc["T"] = report.T;
        nlohmann::json sources = nlohmann::json::array();
        for (std::size_t i = 0; i < report.sources.size(); ++i) {
            const SourceTheory& s = report.sources[i];
            nlohmann::json row;
            row["name"] = i < names.size() ? names[i] : "source_" + std::to_string(i);
            row["n_i"] = s.n_i;
            row["rho"] = s.rho;
            row["expected_sq_err"] = s.expected_sq_err;
            row["rmse_bound"] = s.rmse_bound;
            row["tighter_bound"] = s.tighter_bound;
            row["delta_out_of_range"] = s.delta_out_of_range;
            sources.push_back(std::move(row));
        }
        doc["sources"] = std::move(sources);
        text = doc.dump(2) + "\n";
    } else if (args.emit == "csv") {
        text = "source,n_i,rho,expected_sq_err,rmse_bound,tighter_bound,delta_out_of_range\n";
        for (std::size_t i = 0; i < report.sources.size(); ++i) {
            const SourceTheory& s = report.sources[i];
            text += (i < names.size() ? names[i] : "source_" + std::to_string(i));
            text += "," + std::to_string(s.n_i) + "," + format_double(s.rho) + "," +
                    format_double(s.expected_sq_err) + "," + format_double(s.rmse_bound) + "," +
                    format_double(s.tighter_bound) + "," + (s.delta_out_of_range ? "1" : "0") +
                    "\n";
        }
    } else {
        throw DomainError("--emit must be json or csv");
    }
    if (args.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_text_file(args.out, text);
        std::printf("wrote %s\n", args.out.c_str());
    }
    return 0;
}

// ---------------------------------------------------------------- energy --

struct EnergyArgs {
    std::string meter_path;
    std::string weather_path;
    std::string out_components;
    std::string out_report;
    SolverFlags solver;
};

void print_shares(const DisaggReport& report) {
    std::string line = "shares:";
    for (int c = 0; c < kEnergyCategories; ++c) {
        line += " " + kCategoryNames[static_cast<std::size_t>(c)] + "=";
        const double v = report.shares[static_cast<std::size_t>(c)];
        line += std::isfinite(v) ? num(v) : "nan";
    }
    std::printf("%s (defined=%d, hours=%zu, converged=%d)\n", line.c_str(),
                report.shares_defined ? 1 : 0, report.timestamps.size(),
                report.all_converged ? 1 : 0);
}

int run_energy(const EnergyArgs& args) {
    SolverConfig solver;
    args.solver.apply(&solver);
    echo_config("energy meter=" + args.meter_path + " weather=" + args.weather_path +
                args.solver.echo(solver) +
                " out_components=" + (args.out_components.empty() ? "-" : args.out_components) +
                " out_report=" + (args.out_report.empty() ? "-" : args.out_report));

    const MeterSeries meter = load_meter_csv(args.meter_path);
    const TemperatureSeries weather = load_weather_csv(args.weather_path);
    const DisaggReport report = disaggregate(meter, weather, solver);
    print_shares(report);
    if (!args.out_components.empty()) write_components_csv(args.out_components, report);
    if (!args.out_report.empty()) save_disagg_report_json(args.out_report, report);
    if (!report.all_converged) {
        std::fprintf(stderr, "error: at least one segment did not converge\n");
        return 3;
    }
    return 0;
}

// ---------------------------------------------------------- energy-batch --

struct EnergyBatchArgs {
    int homes = 4;
    bool synthetic = false;
    std::uint64_t seed = 0;
    int days = 56;
    double cooling_share = 0.20;
    bool cool_climate = false;
    std::string out_dir;
    int jobs = 1;
    SolverFlags solver;
};

int run_energy_batch(const EnergyBatchArgs& args) {
    SolverConfig solver;
    args.solver.apply(&solver);
    echo_config("energy-batch homes=" + std::to_string(args.homes) +
                " synthetic=" + std::string(args.synthetic ? "1" : "0") +
                " seed=" + std::to_string(args.seed) + " days=" + std::to_string(args.days) +
                " cooling_share=" + num(args.cooling_share) +
                " cool_climate=" + std::string(args.cool_climate ? "1" : "0") +
                args.solver.echo(solver) + " jobs=" + std::to_string(args.jobs) +
                " out_dir=" + args.out_dir);
    if (!args.synthetic) {
        throw DomainError("energy-batch currently supports --synthetic corpora only; "
                          "run `energy` per home for real data");
    }
    if (args.homes < 1) throw DomainError("--homes must be >= 1");

    std::filesystem::create_directories(args.out_dir);
    struct HomeOutcome {
        std::array<double, kEnergyCategories> true_shares{};
        std::array<double, kEnergyCategories> est_shares{};
        int hours = 0;
        int iterations = 0;
        bool converged = false;
    };
    std::vector<HomeOutcome> outcomes(static_cast<std::size_t>(args.homes));

    parallel_for(static_cast<std::size_t>(args.homes), args.jobs, [&](std::size_t j) {
        SyntheticHomeConfig config;
        config.days = args.days;
        config.cooling_share = args.cooling_share;
        config.cool_climate = args.cool_climate;
        config.seed = SplitMix64::derive_stream(args.seed, j);
        const SyntheticHome home = gen_synthetic_home(config);

        const std::filesystem::path dir =
            std::filesystem::path(args.out_dir) / ("home_" + std::to_string(j));
        std::filesystem::create_directories(dir);
        write_meter_csv((dir / "meter.csv").string(), home.meter);
        write_weather_csv((dir / "weather.csv").string(), home.weather);

        const DisaggReport report = disaggregate(home.meter, home.weather, solver);
        write_components_csv((dir / "components.csv").string(), report);
        save_disagg_report_json((dir / "report.json").string(), report);

        HomeOutcome outcome;
        outcome.true_shares = home.true_shares;
        outcome.est_shares = report.shares;
        outcome.hours = static_cast<int>(report.timestamps.size());
        for (const SegmentDiagnostics& d : report.segments) outcome.iterations += d.iterations;
        outcome.converged = report.all_converged;
        outcomes[j] = outcome;
    });

    std::string csv = "home";
    for (const std::string& n : kCategoryNames) csv += ",true_share_" + n;
    for (const std::string& n : kCategoryNames) csv += ",est_share_" + n;
    csv += ",hours,iterations,converged\n";
    bool all_converged = true;
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
        const HomeOutcome& o = outcomes[j];
        csv += std::to_string(j);
        for (double v : o.true_shares) csv += "," + format_double(v);
        for (double v : o.est_shares) csv += "," + format_double(v);
        csv += "," + std::to_string(o.hours) + "," + std::to_string(o.iterations) + "," +
               (o.converged ? "1" : "0") + "\n";
        all_converged = all_converged && o.converged;
    }
    const std::string summary_path =
        (std::filesystem::path(args.out_dir) / "summary.csv").string();
    write_text_file(summary_path, csv);
    std::printf("wrote %d homes under %s\n", args.homes, args.out_dir.c_str());
    if (!all_converged) {
        std::fprintf(stderr, "error: at least one home did not converge\n");
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contextually supervised source separation"};
    app.require_subcommand(1);
    int exit_code = 0;

    auto solve_args = std::make_shared<SolveArgs>();
    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a problem document");
    solve_cmd->add_option("--problem", solve_args->problem_path, "Problem JSON path")->required();
    solve_cmd->add_option("--out", solve_args->out_json, "Result JSON path");
    solve_cmd->add_option("--out-y", solve_args->out_y, "Estimated sources CSV path");
    solve_cmd->add_flag("--record-objective", solve_args->record_objective,
                        "Track the objective per iteration");
    solve_args->solver.attach(solve_cmd);
    solve_cmd->callback([&, solve_args] { exit_code = run_solve(*solve_args); });

    auto rec_args = std::make_shared<SynthRecoveryArgs>();
    CLI::App* rec_cmd = app.add_subcommand("synth-recovery", "Gaussian recovery experiments");
    rec_cmd->add_option("--T", rec_args->t_values, "Series lengths (comma separated)")
        ->delimiter(',');
    rec_cmd->add_option("--trials", rec_args->trials, "Trials per T");
    rec_cmd->add_option("--k", rec_args->k, "Number of sources");
    rec_cmd->add_option("--n", rec_args->n, "Features per source");
    rec_cmd->add_option("--mu", rec_args->mu, "Within-block decorrelation parameter");
    rec_cmd->add_option("--seed", rec_args->seed, "Master seed");
    rec_cmd->add_option("--out", rec_args->out, "Output CSV path")->required();
    rec_cmd->add_option("--dump-data", rec_args->dump_data,
                        "Also write trial 0's generated dataset to this CSV path");
    rec_cmd->add_option("--jobs", rec_args->jobs, "Worker threads");
    rec_cmd->callback([&, rec_args] { exit_code = run_synth_recovery(*rec_args); });

    auto dis_args = std::make_shared<SynthDisaggArgs>();
    CLI::App* dis_cmd = app.add_subcommand("synth-disagg", "Disaggregation benchmark");
    dis_cmd->add_option("--T", dis_args->config.T, "Series length");
    dis_cmd->add_option("--tau1", dis_args->config.tau1, "Smooth signal period");
    dis_cmd->add_option("--tau2", dis_args->config.tau2, "Step signal period");
    dis_cmd->add_option("--sigma", dis_args->config.sigma, "Smooth-noise std");
    dis_cmd->add_option("--beta", dis_args->config.beta, "Step-noise window");
    dis_cmd->add_option("--p-zero", dis_args->config.p_zero, "Step-noise zero mass");
    dis_cmd->add_option("--seed", dis_args->config.seed, "Master seed");
    dis_cmd->add_option("--trials", dis_args->trials, "Independent draws");
    dis_cmd->add_option("--reg-smooth", dis_args->weights.smooth_reg,
                        "Full-model weight on the squared-difference penalty");
    dis_cmd->add_option("--reg-step", dis_args->weights.step_reg,
                        "Full-model weight on the absolute-difference penalty");
    dis_cmd->add_option("--out", dis_args->out, "Output CSV path")->required();
    dis_cmd->add_option("--dump-data", dis_args->dump_data,
                        "Also write trial 0's generated dataset to this CSV path");
    dis_cmd->add_option("--jobs", dis_args->jobs, "Worker threads");
    dis_args->solver.attach(dis_cmd);
    dis_cmd->callback([&, dis_args] { exit_code = run_synth_disagg(*dis_args); });

    auto th_args = std::make_shared<TheoryArgs>();
    CLI::App* th_cmd = app.add_subcommand("theory", "Recovery-theory report");
    th_cmd->add_option("--problem", th_args->problem_path, "Problem JSON path");
    th_cmd->add_option("--design", th_args->design_path, "Design matrix CSV (headerless)");
    th_cmd->add_option("--blocks", th_args->blocks, "Block sizes, e.g. 16,16")->delimiter(',');
    th_cmd->add_option("--sigma-sq", th_args->sigma_sq, "Total noise variance");
    th_cmd->add_option("--delta", th_args->delta, "Confidence parameter");
    th_cmd->add_option("--out", th_args->out, "Output path (stdout when omitted)");
    th_cmd->add_option("--emit", th_args->emit, "json or csv");
    th_cmd->callback([&, th_args] { exit_code = run_theory(*th_args); });

    auto en_args = std::make_shared<EnergyArgs>();
    CLI::App* en_cmd = app.add_subcommand("energy", "Disaggregate one home");
    en_cmd->add_option("--meter", en_args->meter_path, "Meter CSV path")->required();
    en_cmd->add_option("--weather", en_args->weather_path, "Weather CSV path")->required();
    en_cmd->add_option("--out-components", en_args->out_components, "Hourly components CSV path");
    en_cmd->add_option("--out-report", en_args->out_report, "Report JSON path");
    en_args->solver.attach(en_cmd);
    en_cmd->callback([&, en_args] { exit_code = run_energy(*en_args); });

    auto batch_args = std::make_shared<EnergyBatchArgs>();
    CLI::App* batch_cmd = app.add_subcommand("energy-batch", "Synthetic corpus run");
    batch_cmd->add_option("--homes", batch_args->homes, "Number of homes");
    batch_cmd->add_flag("--synthetic", batch_args->synthetic, "Generate a synthetic corpus");
    batch_cmd->add_option("--seed", batch_args->seed, "Master seed");
    batch_cmd->add_option("--days", batch_args->days, "Days per home");
    batch_cmd->add_option("--cooling-share", batch_args->cooling_share,
                          "Injected cooling share of total usage");
    batch_cmd->add_flag("--cool-climate", batch_args->cool_climate,
                        "Cap temperatures below the cooling threshold");
    batch_cmd->add_option("--out-dir", batch_args->out_dir, "Output directory")->required();
    batch_cmd->add_option("--jobs", batch_args->jobs, "Worker threads");
    batch_args->solver.attach(batch_cmd);
    batch_cmd->callback([&, batch_args] { exit_code = run_energy_batch(*batch_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return exit_code;
}
