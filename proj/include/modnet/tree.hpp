#ifndef MODNET_TREE_HPP
#define MODNET_TREE_HPP

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "modnet/dataset.hpp"

namespace modnet {

struct LeafParams {
    double mean = 0.0;
    double variance = 1.0;  // > 0

    bool operator==(const LeafParams&) const = default;
};

// A node is a leaf unless test_var >= 0. Interior semantics: descend to
// child_true iff value(test_var) < threshold; equality goes false.
struct TreeNode {
    int test_var = -1;
    double threshold = 0.0;
    int child_true = -1;
    int child_false = -1;
    std::optional<LeafParams> params;  // leaves only; unset until refit

    bool is_leaf() const { return test_var < 0; }
};

// Rooted strict binary tree; a lone leaf is the empty-parent tree. Trees are
// values: the split operator returns a modified copy.
class RegressionTree {
public:
    RegressionTree();  // single unparameterized leaf

    int root() const { return root_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const TreeNode& node(int id) const { return nodes_[id]; }
    TreeNode& node(int id) { return nodes_[id]; }

    int leaf_count() const;
    int interior_count() const;
    int depth() const;
    std::vector<int> leaf_ids() const;
    std::set<int> tested_vars() const;

    // Structural equality (topology, tests, params), ignoring node numbering.
    bool same_structure(const RegressionTree& other) const;

    // Throws std::invalid_argument when the node array is not a strict binary
    // tree reachable exactly once from the root.
    void check_structure() const;

    static RegressionTree single_leaf(std::optional<LeafParams> params = std::nullopt);

    // Deserialization helper: append a node, return its id. The first node
    // appended is the root.
    int append_node(TreeNode n);

    friend RegressionTree apply_split(const RegressionTree& tree, int leaf, int test_var,
                                      double threshold);

private:
    std::vector<TreeNode> nodes_;
    int root_ = 0;
};

// Leaf reached for a full instance row (indexed by variable).
int leaf_for(const RegressionTree& tree, std::span<const double> row);

// Leaf reached under a partial mapping; the lookup returns nullopt for
// missing variables, which raises an error naming the variable.
int leaf_for(const RegressionTree& tree,
             const std::function<std::optional<double>(int)>& lookup);

double leaf_log_density(const LeafParams& params, double x);

// Sorted distinct values of `variable` over `rows`, minimum excluded, so every
// returned threshold puts at least one row on each side of "value < u".
std::vector<double> split_candidates(const Dataset& data, int variable,
                                     std::span<const int> rows);

// Replace a leaf with an interior node testing `test_var < threshold` over two
// fresh unparameterized leaves.
RegressionTree apply_split(const RegressionTree& tree, int leaf, int test_var,
                           double threshold);

struct TreeComplexity {
    int leaves = 0;
    int interior = 0;
    std::set<int> tested_vars;
};

TreeComplexity tree_complexity(const RegressionTree& tree);

}  // namespace modnet

#endif
