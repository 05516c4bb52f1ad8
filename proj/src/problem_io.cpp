#include "ctxsep/problem_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "ctxsep/errors.hpp"

namespace ctxsep {

namespace {

using nlohmann::json;

Norm parse_norm(const std::string& text, bool allow_none, const std::string& where) {
    if (text == "l1") return Norm::L1;
    if (text == "squared_l2") return Norm::SquaredL2;
    if (allow_none && text == "none") return Norm::None;
    throw ParseError(where + ": unknown norm '" + text + "' (expected " +
                     (allow_none ? "'l1', 'squared_l2' or 'none'" : "'l1' or 'squared_l2'") +
                     ")");
}

std::string norm_name(Norm n) {
    switch (n) {
        case Norm::L1: return "l1";
        case Norm::SquaredL2: return "squared_l2";
        case Norm::None: return "none";
    }
    return "none";
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where + ": expected a number");
    return j.get<double>();
}

Matrix parse_inline_features(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    Matrix m;
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array()) throw ParseError(where + ": row " + std::to_string(r) + " is not an array");
        if (r == 0) {
            cols = row.size();
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            throw ParseError(where + ": row " + std::to_string(r) + " has " +
                             std::to_string(row.size()) + " entries, expected " +
                             std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_number(row[c], where + " row " + std::to_string(r));
        }
    }
    return m;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "': " + std::strerror(errno));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path + "': " + std::strerror(errno));
    out << contents;
    out.flush();
    if (!out) throw DataError("write to '" + path + "' failed");
}

Matrix load_matrix_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<double>> rows;
    std::size_t cols = 0;
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        int col = 0;
        while (pos <= line.size()) {
            ++col;
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            const std::string cell = line.substr(pos, comma - pos);
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": column " +
                                 std::to_string(col) + ": bad number '" + cell + "'");
            }
            row.push_back(v);
            pos = comma + 1;
            if (comma == line.size()) break;
        }
        if (rows.empty()) {
            cols = row.size();
        } else if (row.size() != cols) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(cols) + " columns, found " +
                             std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

CsvTable load_csv_table(const std::string& path) {
    const std::string text = read_text_file(path);
    CsvTable table;
    std::istringstream lines(text);
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            cells.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
            if (comma == line.size()) break;
        }
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != table.header.size()) {
                throw ParseError(path + ": row with " + std::to_string(cells.size()) +
                                 " cells under a " + std::to_string(table.header.size()) +
                                 "-column header");
            }
            table.rows.push_back(std::move(cells));
        }
    }
    if (first) throw ParseError(path + ": empty file (missing header)");
    return table;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ProblemDocument load_problem_json(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(path + ": top level must be an object");
    if (!doc.contains("aggregate")) throw ParseError(path + ": missing \"aggregate\"");
    if (!doc.contains("sources")) throw ParseError(path + ": missing \"sources\"");

    const json& agg = doc["aggregate"];
    if (!agg.is_array() || agg.empty()) {
        throw ParseError(path + ": \"aggregate\" must be a nonempty array");
    }
    Vector values(static_cast<Eigen::Index>(agg.size()));
    for (std::size_t i = 0; i < agg.size(); ++i) {
        values[static_cast<Eigen::Index>(i)] = as_number(agg[i], path + ": aggregate");
    }
    const int t_len = static_cast<int>(values.size());
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    ProblemDocument out;
    std::vector<std::pair<FeatureBlock, SourceModelSpec>> sources;
    const json& srcs = doc["sources"];
    if (!srcs.is_array() || srcs.empty()) {
        throw ParseError(path + ": \"sources\" must be a nonempty array");
    }
    for (std::size_t i = 0; i < srcs.size(); ++i) {
        const json& s = srcs[i];
        const std::string where = path + ": sources[" + std::to_string(i) + "]";
        if (!s.is_object()) throw ParseError(where + ": expected an object");
        FeatureBlock block;
        block.name = s.value("name", "source_" + std::to_string(i));
        if (!s.contains("features") || s["features"].is_null()) {
            block.matrix.resize(t_len, 0);
        } else if (s["features"].is_string()) {
            const std::filesystem::path p = base / s["features"].get<std::string>();
            block.matrix = load_matrix_csv(p.string());
        } else {
            block.matrix = parse_inline_features(s["features"], where + ".features");
        }

        SourceModelSpec spec;
        if (s.contains("loss")) {
            const json& l = s["loss"];
            if (!l.is_object()) throw ParseError(where + ".loss: expected an object");
            spec.loss_norm = parse_norm(l.value("norm", "squared_l2"), false, where + ".loss");
            spec.loss_operator = parse_operator(l.value("op", "identity"));
            spec.loss_weight = l.contains("weight") ? as_number(l["weight"], where + ".loss.weight") : 1.0;
        }
        if (s.contains("reg")) {
            const json& r = s["reg"];
            if (!r.is_object()) throw ParseError(where + ".reg: expected an object");
            spec.reg_norm = parse_norm(r.value("norm", "none"), true, where + ".reg");
            spec.reg_operator = parse_operator(r.value("op", "identity"));
            spec.reg_weight = r.contains("weight") ? as_number(r["weight"], where + ".reg.weight") : 1.0;
        }
        spec.theta_ridge =
            s.contains("theta_ridge") ? as_number(s["theta_ridge"], where + ".theta_ridge") : 0.0;
        spec.nonneg = s.value("nonneg", false);

        out.source_names.push_back(block.name);
        sources.emplace_back(std::move(block), spec);
    }

    out.problem = build_problem(AggregateSignal{std::move(values)}, std::move(sources));

    if (doc.contains("solver")) {
        const json& sv = doc["solver"];
        if (!sv.is_object()) throw ParseError(path + ": \"solver\" must be an object");
        if (sv.contains("eps_abs")) out.solver.eps_abs = as_number(sv["eps_abs"], "solver.eps_abs");
        if (sv.contains("eps_rel")) out.solver.eps_rel = as_number(sv["eps_rel"], "solver.eps_rel");
        if (sv.contains("max_iter")) out.solver.max_iter = sv["max_iter"].get<int>();
        if (sv.contains("rho")) out.solver.rho_init = as_number(sv["rho"], "solver.rho");
    }
    return out;
}

void save_result_json(const std::string& path, const SeparationResult& result,
                      const std::vector<std::string>& source_names) {
    json doc;
    doc["objective"] = result.objective;
    doc["iterations"] = result.iterations;
    doc["converged"] = result.converged;
    doc["primal_residual"] = result.primal_residual;
    doc["dual_residual"] = result.dual_residual;
    json theta = json::object();
    for (std::size_t i = 0; i < result.theta_hat.size(); ++i) {
        const std::string name =
            i < source_names.size() ? source_names[i] : "source_" + std::to_string(i);
        json arr = json::array();
        for (Eigen::Index j = 0; j < result.theta_hat[i].size(); ++j) {
            arr.push_back(result.theta_hat[i][j]);
        }
        theta[name] = std::move(arr);
    }
    doc["theta"] = std::move(theta);
    if (!result.diagnostics.objective_history.empty()) {
        doc["objective_history"] = result.diagnostics.objective_history;
    }
    write_text_file(path, doc.dump(2) + "\n");
}

void write_sources_csv(const std::string& path, const Matrix& y,
                       const std::vector<std::string>& source_names) {
    std::string out = "t";
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
        out += ",";
        out += (static_cast<std::size_t>(i) < source_names.size())
                   ? source_names[static_cast<std::size_t>(i)]
                   : "source_" + std::to_string(i);
    }
    out += "\n";
    for (Eigen::Index t = 0; t < y.rows(); ++t) {
        out += std::to_string(t);
        for (Eigen::Index i = 0; i < y.cols(); ++i) {
            out += ",";
            out += format_double(y(t, i));
        }
        out += "\n";
    }
    write_text_file(path, out);
}

}  // namespace ctxsep
