#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonlocal {

/// 17 significant digits, scientific; round-trips doubles exactly.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

/// Writes '#' provenance lines, a column header and equal-length columns.
inline void write_csv(const std::string& path, const std::vector<std::string>& provenance,
                      const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) throw std::invalid_argument("write_csv: names/columns mismatch");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& p : provenance) out << "# " << p << '\n';
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_number(columns[j][i]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

/// Numeric CSV reader: skips '#' lines and a non-numeric header row.
inline std::vector<std::vector<double>> read_csv_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<std::vector<double>> cols;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
                if (used != cell.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric row");
        }
        first = false;
        if (cols.empty()) cols.resize(row.size());
        if (row.size() != cols.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": wrong number of columns");
        for (std::size_t j = 0; j < row.size(); ++j) cols[j].push_back(row[j]);
    }
    return cols;
}

} // namespace nonlocal
