#pragma once

// Partially observed datasets: values + observation mask, missingness-pattern
// grouping, complete-case extraction, and CSV ingestion.

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// n x p numeric table with per-cell observation mask. Masked cells hold 0.0
// as a quiet sentinel; all numerics must consult the mask and never read a
// masked cell. Immutable after construction.
struct Dataset {
    Matrix values;
    MaskMatrix mask;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index p() const { return values.cols(); }

    bool observed(Eigen::Index i, Eigen::Index j) const { return mask(i, j); }

    // Enforces: every row and column has >= 1 observed entry, all observed
    // values finite, dimensions agree.
    void validate() const {
        if (values.rows() != mask.rows() || values.cols() != mask.cols())
            throw std::invalid_argument("Dataset: values/mask dimension mismatch");
        if (values.rows() == 0 || values.cols() == 0)
            throw std::invalid_argument("Dataset: empty");
        for (Eigen::Index i = 0; i < n(); ++i) {
            bool any = false;
            for (Eigen::Index j = 0; j < p(); ++j) {
                if (mask(i, j)) {
                    any = true;
                    if (!std::isfinite(values(i, j)))
                        throw std::invalid_argument("Dataset: non-finite observed value");
                }
            }
            if (!any) throw std::invalid_argument("Dataset: row with no observed entries");
        }
        for (Eigen::Index j = 0; j < p(); ++j) {
            if (!mask.col(j).any())
                throw std::invalid_argument("Dataset: column with no observed entries");
        }
    }
};

// Maximal group of rows sharing one observation mask. observed_indices is the
// index realization of the row-selection matrix: strictly increasing, nonempty.
struct MissingnessPattern {
    std::vector<int> observed_indices;
    std::vector<int> member_rows;

    bool fully_observed(Eigen::Index p) const {
        return static_cast<Eigen::Index>(observed_indices.size()) == p;
    }
};

// Groups rows by identical mask rows; groups ordered by first member row.
inline std::vector<MissingnessPattern> pattern_groups(const Dataset& d) {
    std::map<std::vector<bool>, int> seen;
    std::vector<MissingnessPattern> out;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        std::vector<bool> key(static_cast<size_t>(d.p()));
        for (Eigen::Index j = 0; j < d.p(); ++j) key[static_cast<size_t>(j)] = d.mask(i, j);
        auto it = seen.find(key);
        if (it == seen.end()) {
            MissingnessPattern pat;
            for (Eigen::Index j = 0; j < d.p(); ++j)
                if (d.mask(i, j)) pat.observed_indices.push_back(static_cast<int>(j));
            pat.member_rows.push_back(static_cast<int>(i));
            seen.emplace(std::move(key), static_cast<int>(out.size()));
            out.push_back(std::move(pat));
        } else {
            out[static_cast<size_t>(it->second)].member_rows.push_back(static_cast<int>(i));
        }
    }
    return out;
}

struct CompleteCaseSubset {
    Dataset data;
    std::vector<int> original_rows;  // subset row -> original row
};

inline CompleteCaseSubset complete_case_subset(const Dataset& d) {
    std::vector<int> rows;
    for (Eigen::Index i = 0; i < d.n(); ++i)
        if (d.mask.row(i).all()) rows.push_back(static_cast<int>(i));
    if (rows.empty()) throw std::runtime_error("complete_case_subset: no complete cases");
    CompleteCaseSubset out;
    out.original_rows = rows;
    out.data.values.resize(static_cast<Eigen::Index>(rows.size()), d.p());
    out.data.mask.setConstant(static_cast<Eigen::Index>(rows.size()), d.p(), true);
    for (size_t r = 0; r < rows.size(); ++r)
        out.data.values.row(static_cast<Eigen::Index>(r)) = d.values.row(rows[r]);
    out.data.validate();
    return out;
}

struct CsvOptions {
    std::set<std::string> missing_tokens{"", "NA", "NaN"};
    bool zeros_as_missing = false;       // GRB encoding: literal 0 means missing
    std::vector<int> zero_missing_columns;  // empty -> applies to all columns
    bool log10_transform = false;
};

struct LoadedCsv {
    Dataset data;
    std::vector<std::string> columns;
};

namespace detail {
inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}
}  // namespace detail

// Comma-separated, one header row, decimal-point numbers. Cells matching a
// missing token (after whitespace trim) are masked; optionally literal zeros
// are masked too, then a base-10 log transform may be applied to what remains.
inline LoadedCsv load_csv(const std::string& path, const CsvOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LoadedCsv out;
    for (auto& h : detail::split_csv_line(line)) out.columns.push_back(detail::trim(h));
    const size_t p = out.columns.size();
    if (p == 0) throw std::runtime_error("load_csv: empty header");

    std::set<int> zero_cols(opts.zero_missing_columns.begin(), opts.zero_missing_columns.end());
    std::vector<std::vector<double>> vals;
    std::vector<std::vector<bool>> obs;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != p)
            throw std::runtime_error("load_csv: ragged row at line " + std::to_string(lineno));
        std::vector<double> v(p, 0.0);
        std::vector<bool> m(p, false);
        for (size_t j = 0; j < p; ++j) {
            const std::string cell = detail::trim(cells[j]);
            if (opts.missing_tokens.count(cell)) continue;
            double x;
            try {
                size_t pos = 0;
                x = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("load_csv: non-numeric cell '" + cell +
                                         "' at line " + std::to_string(lineno));
            }
            if (opts.zeros_as_missing && x == 0.0 &&
                (zero_cols.empty() || zero_cols.count(static_cast<int>(j))))
                continue;
            if (opts.log10_transform) {
                if (!(x > 0.0))
                    throw std::runtime_error("load_csv: non-positive value under log10 at line " +
                                             std::to_string(lineno));
                x = std::log10(x);
            }
            v[j] = x;
            m[j] = true;
        }
        vals.push_back(std::move(v));
        obs.push_back(std::move(m));
    }
    const size_t n = vals.size();
    if (n == 0) throw std::runtime_error("load_csv: no data rows");
    out.data.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    out.data.mask.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < p; ++j) {
            out.data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i][j];
            out.data.mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = obs[i][j];
        }
    out.data.validate();
    return out;
}

}  // namespace tmix
