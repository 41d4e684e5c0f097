#include "modnet/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "modnet/kernels.hpp"

namespace modnet {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    int lineno = 0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::unordered_set<std::string> seen;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (names.empty()) {
            for (const std::string& raw : split_line(line)) {
                const std::string name = trim(raw);
                if (name.empty())
                    throw ParseError("empty variable name", lineno,
                                     static_cast<int>(names.size()) + 1);
                if (!seen.insert(name).second)
                    throw ParseError("duplicate variable name '" + name + "'", lineno,
                                     static_cast<int>(names.size()) + 1);
                names.push_back(name);
            }
            if (names.empty()) throw ParseError("empty header", lineno, 1);
            continue;
        }
        if (line.empty()) continue;  // ignore blank lines
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != names.size())
            throw ParseError("expected " + std::to_string(names.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             lineno, static_cast<int>(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || cell.empty())
                throw ParseError("cell '" + cell + "' is not a decimal real", lineno,
                                 static_cast<int>(c) + 1);
            if (!std::isfinite(v))
                throw ParseError("non-finite value", lineno, static_cast<int>(c) + 1);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (names.empty()) throw ParseError("empty file", 1, 1);
    if (rows.empty()) throw ParseError("no data rows", lineno, 1);
    return Dataset(std::move(names), std::move(rows));
}

StandardizeResult standardize(const Dataset& raw) {
    const int n = raw.variable_count();
    const int m = raw.instance_count();
    Standardization t;
    t.means.resize(n);
    t.scales.resize(n);
    std::vector<std::string> warnings;
    for (int v = 0; v < n; ++v) {
        const auto col = raw.column(v);
        const double mean = kernels::moments(col).sum / m;
        const double var = kernels::squared_deviation_sum(col, mean) / m;
        double scale = std::sqrt(var);
        if (!(scale > 0.0)) {
            scale = 1.0;
            warnings.push_back("column '" + raw.var_name(v) +
                               "' is constant; shifted to zero, left unit-scaled");
        }
        t.means[v] = mean;
        t.scales[v] = scale;
    }
    std::vector<std::vector<double>> rows(m);
    for (int i = 0; i < m; ++i) {
        rows[i].resize(n);
        for (int v = 0; v < n; ++v) rows[i][v] = (raw.value(i, v) - t.means[v]) / t.scales[v];
    }
    return {Dataset(raw.var_names(), std::move(rows)), std::move(t), std::move(warnings)};
}

void write_csv(const Dataset& data, const std::string& path) {
    std::string out;
    for (int v = 0; v < data.variable_count(); ++v) {
        if (v) out += ',';
        out += data.var_name(v);
    }
    out += '\n';
    char buf[64];
    for (int m = 0; m < data.instance_count(); ++m) {
        for (int v = 0; v < data.variable_count(); ++v) {
            if (v) out += ',';
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), data.value(m, v));
            out.append(buf, ptr);
            (void)ec;
        }
        out += '\n';
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f << out;
        if (!f.flush()) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace modnet
