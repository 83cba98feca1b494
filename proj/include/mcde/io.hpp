#pragma once

// CSV input/output and JSON serialization of result types.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcde/diagnostics.hpp"
#include "mcde/estimation.hpp"
#include "mcde/experiments.hpp"
#include "mcde/matrix.hpp"
#include "mcde/model_selection.hpp"

namespace mcde {

struct CsvTable {
    std::vector<std::string> header;
    RowMatrix values;
};

namespace detail {

// Splits one CSV record, honouring double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    if (quoted) throw InputError("csv line " + std::to_string(line_no) + ": unterminated quote");
    out.push_back(std::move(field));
    return out;
}

inline double parse_csv_number(const std::string& s, std::size_t line_no) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) throw InputError("csv line " + std::to_string(line_no) + ": empty field");
    const char* first = s.data() + b;
    const char* last = s.data() + e + 1;
    if (*first == '+') ++first;
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last) {
        throw InputError("csv line " + std::to_string(line_no) + ": not a number: '" + s + "'");
    }
    return x;
}

}  // namespace detail

/// Reads a numeric CSV with a mandatory header row.
inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<double> data;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line, line_no);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw InputError("csv line " + std::to_string(line_no) + ": expected " +
                             std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        for (const auto& f : fields) data.push_back(detail::parse_csv_number(f, line_no));
        ++rows;
    }
    if (!have_header) throw InputError("csv: empty input (header row required)");
    if (rows == 0) throw InputError("csv: no data rows");
    t.values = RowMatrix(rows, t.header.size(), std::move(data));
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_csv(in);
}

/// Writes `m` with columns named x1..xd unless names are given.
inline void write_csv(std::ostream& os, const RowMatrix& m, std::vector<std::string> names = {}) {
    if (names.empty()) {
        for (std::size_t j = 0; j < m.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    }
    for (std::size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
    os << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
        os << '\n';
    }
}

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace detail

inline nlohmann::json to_json(const FitResult& r) {
    return {{"theta_hat", r.theta_hat},       {"loss_at_opt", r.loss_at_opt}, {"iterations", r.iterations},
            {"converged", r.converged},       {"gradient_norm", r.gradient_norm}, {"method", r.method}};
}

inline nlohmann::json to_json(const CovarianceReport& r) {
    return {{"A", detail::matrix_json(r.A)},
            {"B", detail::matrix_json(r.B)},
            {"Sigma", detail::matrix_json(r.Sigma)},
            {"x_exponent", r.x_exponent},
            {"mc_samples", r.mc_samples},
            {"B_std_error", detail::matrix_json(r.B_std_error)},
            {"condition_number", r.condition_number}};
}

inline nlohmann::json to_json(const CvResult& r) {
    nlohmann::json scores = nlohmann::json::array();
    for (std::size_t g = 0; g < r.grid.size(); ++g) {
        scores.push_back({{"exponent", r.grid[g]}, {"score", r.cv_scores[g]}, {"fold_theta", r.fold_theta[g]}});
    }
    return {{"beta_opt", r.beta_opt}, {"cv_scores", std::move(scores)}};
}

inline nlohmann::json to_json(const BoundednessReport& r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& p : r.diagonal_trace) {
        trace.push_back({{"u", p.u}, {"value", p.value}, {"underflow", p.underflow}});
    }
    return {{"family", std::string(family_name(r.family))},
            {"theta", r.theta},
            {"alpha_exponent", r.alpha},
            {"grid_resolution", r.grid_resolution},
            {"sup_value", r.sup_value},
            {"sup_location", r.sup_location},
            {"any_underflow", r.any_underflow},
            {"diagonal_trace", std::move(trace)}};
}

}  // namespace mcde
