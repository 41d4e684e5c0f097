#include "modnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace modnet {

Dataset::Dataset(std::vector<std::string> var_names, std::vector<std::vector<double>> rows)
    : names_(std::move(var_names)) {
    if (rows.empty()) throw std::invalid_argument("dataset needs at least one instance");
    if (names_.empty()) throw std::invalid_argument("dataset needs at least one variable");

    std::unordered_set<std::string> seen;
    for (const auto& name : names_) {
        if (name.empty()) throw std::invalid_argument("empty variable name");
        if (!seen.insert(name).second)
            throw std::invalid_argument("duplicate variable name: " + name);
    }

    instance_count_ = static_cast<int>(rows.size());
    variable_count_ = static_cast<int>(names_.size());
    row_major_.reserve(std::size_t(instance_count_) * variable_count_);
    for (std::size_t m = 0; m < rows.size(); ++m) {
        if (rows[m].size() != std::size_t(variable_count_))
            throw std::invalid_argument("row " + std::to_string(m) + " has " +
                                        std::to_string(rows[m].size()) + " cells, expected " +
                                        std::to_string(variable_count_));
        for (double v : rows[m]) {
            if (!std::isfinite(v))
                throw std::invalid_argument("non-finite value in row " + std::to_string(m));
            row_major_.push_back(v);
        }
    }

    col_major_.resize(row_major_.size());
    for (int m = 0; m < instance_count_; ++m)
        for (int v = 0; v < variable_count_; ++v)
            col_major_[std::size_t(v) * instance_count_ + m] = value(m, v);
}

const std::vector<int>& Dataset::sorted_order(int variable) const {
    if (sorted_orders_.empty()) sorted_orders_.resize(variable_count_);
    auto& order = sorted_orders_[variable];
    if (order.empty()) {
        order.resize(instance_count_);
        std::iota(order.begin(), order.end(), 0);
        auto col = column(variable);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return col[a] < col[b]; });
    }
    return order;
}

}  // namespace modnet
