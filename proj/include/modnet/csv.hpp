#ifndef MODNET_CSV_HPP
#define MODNET_CSV_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "modnet/dataset.hpp"
#include "modnet/model.hpp"

namespace modnet {

// Parse failure with 1-based line/column coordinates (line 1 is the header).
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line(line),
          column(column) {}
    int line;
    int column;
};

// Header row of unique variable names, then one instance per row of finite
// decimal reals; UTF-8, LF or CRLF.
Dataset load_csv(const std::string& path);

struct StandardizeResult {
    Dataset data;              // mean 0, variance 1 per column
    Standardization transform;
    std::vector<std::string> warnings;  // e.g. constant columns
};

// Shift/scale each column to mean 0, variance 1. Constant columns are shifted
// to zero, left unit-scaled, and reported in warnings.
StandardizeResult standardize(const Dataset& raw);

// Atomic (write-temp-then-rename) CSV writer; numbers use the shortest
// representation that parses back to the identical double.
void write_csv(const Dataset& data, const std::string& path);

}  // namespace modnet

#endif
