#ifndef MODNET_DATASET_HPP
#define MODNET_DATASET_HPP

#include <span>
#include <string>
#include <vector>

namespace modnet {

// Immutable instance-by-variable matrix of finite reals. Both row-major and
// column-major copies are kept: rows feed tree routing, columns feed the
// moment kernels and threshold scans.
class Dataset {
public:
    Dataset(std::vector<std::string> var_names, std::vector<std::vector<double>> rows);

    int instance_count() const { return instance_count_; }
    int variable_count() const { return variable_count_; }

    const std::vector<std::string>& var_names() const { return names_; }
    const std::string& var_name(int v) const { return names_[v]; }

    double value(int instance, int variable) const {
        return row_major_[std::size_t(instance) * variable_count_ + variable];
    }

    std::span<const double> row(int instance) const {
        return {row_major_.data() + std::size_t(instance) * variable_count_,
                std::size_t(variable_count_)};
    }

    std::span<const double> column(int variable) const {
        return {col_major_.data() + std::size_t(variable) * instance_count_,
                std::size_t(instance_count_)};
    }

    // Instance indices ordered by ascending value of `variable`, ties by index.
    const std::vector<int>& sorted_order(int variable) const;

private:
    int instance_count_ = 0;
    int variable_count_ = 0;
    std::vector<std::string> names_;
    std::vector<double> row_major_;
    std::vector<double> col_major_;
    mutable std::vector<std::vector<int>> sorted_orders_;  // lazy, per variable
};

}  // namespace modnet

#endif
