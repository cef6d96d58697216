#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "gdiv/error.hpp"

namespace gdiv {

/// One CSV cell: integers print exactly, reals with 17 significant digits so
/// the text round-trips and is identical across runs.
using Cell = std::variant<std::int64_t, double, std::string>;

inline std::string format_cell(const Cell& c)
{
    if (auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (auto* s = std::get_if<std::string>(&c)) return *s;
    const double v = std::get<double>(c);
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Tabular experiment output with a leading metadata comment line
/// `# experiment=<name> seed=<u64> N=<..> p=<..> kappa=<value>`.
struct ExperimentReport {
    std::string experiment;
    std::uint64_t seed{0};
    std::string N{"-"};
    std::string p{"-"};
    double kappa{0.0};
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row)
    {
        require(row.size() == columns.size(), "ExperimentReport: row width does not match the header");
        rows.push_back(std::move(row));
    }

    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw PreconditionError("ExperimentReport: no column named " + name);
    }

    /// Numeric values of a column (integers widened to double).
    std::vector<double> values(const std::string& name) const
    {
        const std::size_t c = column(name);
        std::vector<double> out;
        for (const auto& row : rows) {
            if (auto* i = std::get_if<std::int64_t>(&row[c]))
                out.push_back(static_cast<double>(*i));
            else if (auto* d = std::get_if<double>(&row[c]))
                out.push_back(*d);
        }
        return out;
    }

    void write_csv(std::ostream& os, bool timestamp = false) const
    {
        os << "# experiment=" << experiment << " seed=" << seed << " N=" << N << " p=" << p
           << " kappa=" << format_cell(kappa);
        if (timestamp) {
            char buf[32];
            const std::time_t now = std::time(nullptr);
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            os << " timestamp=" << buf;
        }
        os << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
            os << '\n';
        }
    }
};

inline std::string format_number(double v) { return format_cell(v); }

} // namespace gdiv
