#include "modnet/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace modnet {

RegressionTree::RegressionTree() { nodes_.push_back(TreeNode{}); }

RegressionTree RegressionTree::single_leaf(std::optional<LeafParams> params) {
    RegressionTree t;
    t.nodes_[0].params = params;
    return t;
}

int RegressionTree::append_node(TreeNode n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int RegressionTree::leaf_count() const {
    int c = 0;
    for (const auto& n : nodes_)
        if (n.is_leaf()) ++c;
    return c;
}

int RegressionTree::interior_count() const {
    return static_cast<int>(nodes_.size()) - leaf_count();
}

int RegressionTree::depth() const {
    struct Walk {
        const RegressionTree& t;
        int run(int id) const {
            const TreeNode& n = t.node(id);
            if (n.is_leaf()) return 0;
            return 1 + std::max(run(n.child_true), run(n.child_false));
        }
    };
    return Walk{*this}.run(root_);
}

std::vector<int> RegressionTree::leaf_ids() const {
    std::vector<int> ids;
    for (int i = 0; i < node_count(); ++i)
        if (nodes_[i].is_leaf()) ids.push_back(i);
    return ids;
}

std::set<int> RegressionTree::tested_vars() const {
    std::set<int> vars;
    for (const auto& n : nodes_)
        if (!n.is_leaf()) vars.insert(n.test_var);
    return vars;
}

namespace {

bool nodes_equal(const RegressionTree& a, int ia, const RegressionTree& b, int ib) {
    const TreeNode& na = a.node(ia);
    const TreeNode& nb = b.node(ib);
    if (na.is_leaf() != nb.is_leaf()) return false;
    if (na.is_leaf()) return na.params == nb.params;
    if (na.test_var != nb.test_var || na.threshold != nb.threshold) return false;
    return nodes_equal(a, na.child_true, b, nb.child_true) &&
           nodes_equal(a, na.child_false, b, nb.child_false);
}

}  // namespace

bool RegressionTree::same_structure(const RegressionTree& other) const {
    return nodes_equal(*this, root_, other, other.root());
}

void RegressionTree::check_structure() const {
    if (nodes_.empty()) throw std::invalid_argument("tree has no nodes");
    std::vector<int> seen(nodes_.size(), 0);
    std::vector<int> stack = {root_};
    int reached = 0;
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        if (id < 0 || id >= node_count())
            throw std::invalid_argument("tree child index out of range");
        if (seen[id]++) throw std::invalid_argument("tree node reachable twice");
        ++reached;
        const TreeNode& n = nodes_[id];
        if (n.is_leaf()) continue;
        if (!std::isfinite(n.threshold))
            throw std::invalid_argument("non-finite split threshold");
        if (n.child_true == n.child_false)
            throw std::invalid_argument("interior node with identical children");
        stack.push_back(n.child_true);
        stack.push_back(n.child_false);
    }
    if (reached != node_count())
        throw std::invalid_argument("tree contains unreachable nodes");
}

int leaf_for(const RegressionTree& tree, std::span<const double> row) {
    int id = tree.root();
    for (;;) {
        const TreeNode& n = tree.node(id);
        if (n.is_leaf()) return id;
        id = row[n.test_var] < n.threshold ? n.child_true : n.child_false;
    }
}

int leaf_for(const RegressionTree& tree,
             const std::function<std::optional<double>(int)>& lookup) {
    int id = tree.root();
    for (;;) {
        const TreeNode& n = tree.node(id);
        if (n.is_leaf()) return id;
        std::optional<double> v = lookup(n.test_var);
        if (!v)
            throw std::invalid_argument("no value for tested variable " +
                                        std::to_string(n.test_var));
        id = *v < n.threshold ? n.child_true : n.child_false;
    }
}

double leaf_log_density(const LeafParams& params, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite observation");
    double d = x - params.mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * params.variance) -
           d * d / (2.0 * params.variance);
}

std::vector<double> split_candidates(const Dataset& data, int variable,
                                     std::span<const int> rows) {
    if (rows.empty()) throw std::invalid_argument("split_candidates: empty row set");
    std::vector<double> values;
    values.reserve(rows.size());
    for (int m : rows) values.push_back(data.value(m, variable));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    values.erase(values.begin());  // a threshold at the minimum leaves one branch empty
    return values;
}

RegressionTree apply_split(const RegressionTree& tree, int leaf, int test_var,
                           double threshold) {
    if (leaf < 0 || leaf >= tree.node_count())
        throw std::invalid_argument("split target out of range");
    if (!tree.node(leaf).is_leaf())
        throw std::invalid_argument("split target is an interior node");
    RegressionTree out = tree;
    int t = out.append_node(TreeNode{});
    int f = out.append_node(TreeNode{});
    TreeNode& n = out.node(leaf);
    n.test_var = test_var;
    n.threshold = threshold;
    n.child_true = t;
    n.child_false = f;
    n.params.reset();
    return out;
}

TreeComplexity tree_complexity(const RegressionTree& tree) {
    return {tree.leaf_count(), tree.interior_count(), tree.tested_vars()};
}

}  // namespace modnet
