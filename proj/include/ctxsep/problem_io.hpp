#pragma once

#include <string>
#include <vector>

#include "ctxsep/core.hpp"
#include "ctxsep/solver.hpp"

namespace ctxsep {

// Serialization of problems and results.
//
// Problem documents are JSON:
//   {
//     "aggregate": [ ... T values ... ],
//     "sources": [
//       {
//         "name": "base",
//         "features": "path.csv" | [[row], [row], ...] | null,
//         "loss": {"norm": "l1" | "squared_l2",
//                  "op": "identity" | "diff" | "smooth:n" | "blocksum:w",
//                  "weight": 1.0},
//         "reg":  {"norm": "none" | "l1" | "squared_l2", "op": ..., "weight": ...},
//         "theta_ridge": 0.0,
//         "nonneg": false
//       }, ...
//     ],
//     "solver": {"eps_abs": ..., "eps_rel": ..., "max_iter": ..., "rho": ...}
//   }
// Every field except "aggregate" and "sources[].name" has a default;
// feature paths are resolved relative to the document's directory;
// "features": null (or absent) declares a featureless source.

struct ProblemDocument {
    SeparationProblem problem;
    SolverConfig solver;  // defaults overlaid with the optional "solver" block
    std::vector<std::string> source_names;
};

ProblemDocument load_problem_json(const std::string& path);

// Headerless numeric CSV, one row per line. Errors report row and column.
Matrix load_matrix_csv(const std::string& path);

// A parsed CSV with a header row; cells kept as strings. Used to read back
// the tables the CLI emits.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable load_csv_table(const std::string& path);

// Fixed "%.17g" rendering used by every CSV emitter: enough digits to
// round-trip any double, with one deterministic spelling per value.
std::string format_double(double v);

void save_result_json(const std::string& path, const SeparationResult& result,
                      const std::vector<std::string>& source_names);

// Estimated sources as CSV: header "t,<name>,..." and one row per step.
void write_sources_csv(const std::string& path, const Matrix& y,
                       const std::vector<std::string>& source_names);

// Shared low-level helpers for the emitters.
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace ctxsep
