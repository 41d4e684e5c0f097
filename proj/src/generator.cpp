#include "modnet/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "modnet/rng.hpp"
#include "modnet/tree.hpp"

namespace modnet {

void GeneratorSpec::check() const {
    if (n < 1) throw std::invalid_argument("generator: n must be >= 1");
    if (K_true < 1 || K_true > n)
        throw std::invalid_argument("generator: K_true outside [1, n]");
    if (parents_min < 0 || parents_max < parents_min)
        throw std::invalid_argument("generator: bad parent count range");
    if (depth_min < 1 || depth_max < depth_min)
        throw std::invalid_argument("generator: bad depth range");
    if (!(mean_lo <= mean_hi)) throw std::invalid_argument("generator: bad mean range");
    if (!(var_lo > 0.0) || var_hi < var_lo)
        throw std::invalid_argument("generator: bad variance range");
    if (!(noise_scale > 0.0)) throw std::invalid_argument("generator: noise_scale must be > 0");
}

namespace {

std::vector<int> node_depths(const RegressionTree& t) {
    std::vector<int> depth(t.node_count(), 0);
    std::vector<int> stack{t.root()};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const TreeNode& n = t.node(id);
        if (n.is_leaf()) continue;
        depth[n.child_true] = depth[id] + 1;
        depth[n.child_false] = depth[id] + 1;
        stack.push_back(n.child_true);
        stack.push_back(n.child_false);
    }
    return depth;
}

}  // namespace

ModuleNetwork generate_truth(const GeneratorSpec& spec) {
    spec.check();
    Rng rng(spec.seed);
    const int n = spec.n;
    const int K = spec.K_true;

    // Random nonempty partition: deal one variable per module, the rest land
    // uniformly.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    ModuleAssignment assignment;
    assignment.module_count = K;
    assignment.assign.assign(n, 0);
    for (int i = 0; i < n; ++i)
        assignment.assign[perm[i]] = i < K ? i : rng.index(K);

    ModuleNetwork net;
    net.assignment = assignment;
    net.modules.resize(K);
    net.var_names.reserve(n);
    for (int v = 0; v < n; ++v) net.var_names.push_back("x" + std::to_string(v));

    // Modules in index order; parents come from earlier modules only, so the
    // module graph is acyclic by construction. Module 0 is the parent-free
    // root.
    std::vector<int> pool;
    for (int j = 0; j < K; ++j) {
        Module& mod = net.modules[j];
        mod.tree = RegressionTree();

        int p = 0;
        if (j > 0 && spec.parents_max > 0) {
            if (static_cast<int>(pool.size()) < spec.parents_min)
                throw std::invalid_argument(
                    "generator: module " + std::to_string(j) + " needs at least " +
                    std::to_string(spec.parents_min) + " parents but only " +
                    std::to_string(pool.size()) + " upstream variables exist");
            const int pmax = std::min(spec.parents_max, static_cast<int>(pool.size()));
            p = static_cast<int>(rng.uniform_int(spec.parents_min, pmax));
        }

        if (p > 0) {
            std::vector<int> choices = pool;
            std::vector<int> parents;
            for (int t = 0; t < p; ++t) {
                const int pick = rng.index(static_cast<int>(choices.size()));
                parents.push_back(choices[pick]);
                choices.erase(choices.begin() + pick);
            }

            const int d = static_cast<int>(rng.uniform_int(spec.depth_min, spec.depth_max));
            const int splits = std::max(p, d);
            int chain_leaf = mod.tree.root();
            for (int t = 0; t < splits; ++t) {
                int target;
                if (t < d) {
                    target = chain_leaf;
                } else {
                    // keep growth shallow: split the shallowest leaf
                    const std::vector<int> depth = node_depths(mod.tree);
                    target = -1;
                    for (int l : mod.tree.leaf_ids())
                        if (target < 0 || depth[l] < depth[target]) target = l;
                }
                const double u = rng.uniform(spec.mean_lo, spec.mean_hi);
                mod.tree = apply_split(mod.tree, target, parents[t % p], u);
                chain_leaf = mod.tree.node(target).child_true;
            }
            std::sort(parents.begin(), parents.end());
            mod.parents = std::move(parents);
        }

        for (int l : mod.tree.leaf_ids()) {
            LeafParams lp;
            lp.mean = rng.uniform(spec.mean_lo, spec.mean_hi);
            lp.variance =
                rng.uniform(spec.var_lo, spec.var_hi) * spec.noise_scale * spec.noise_scale;
            mod.tree.node(l).params = lp;
        }

        const std::vector<int> members = assignment.members(j);
        pool.insert(pool.end(), members.begin(), members.end());
    }
    return net;
}

Dataset sample(const ModuleNetwork& net, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
    const int n = net.variable_count();
    if (n < 1) throw std::invalid_argument("sample: empty network");
    for (int j = 0; j < net.module_count(); ++j)
        for (int l : net.modules[j].tree.leaf_ids())
            if (!net.modules[j].tree.node(l).params)
                throw std::logic_error("sample: unmaterialized leaf parameters in module " +
                                       std::to_string(j));

    const GroundNetwork ground = ground_network(net);  // rejects cyclic nets
    const std::vector<int> order = ground.topological_variables();

    Rng rng(seed);
    std::vector<std::vector<double>> rows(count, std::vector<double>(n, 0.0));
    for (int m = 0; m < count; ++m) {
        std::vector<double>& row = rows[m];
        for (int v : order) {
            const RegressionTree& tree = net.modules[net.assignment.module_of(v)].tree;
            const LeafParams& lp = *tree.node(leaf_for(tree, row)).params;
            row[v] = lp.mean + std::sqrt(lp.variance) * rng.gaussian();
        }
        if (net.standardization) {
            for (int v = 0; v < n; ++v)
                row[v] = row[v] * net.standardization->scales[v] + net.standardization->means[v];
        }
    }

    std::vector<std::string> names;
    if (static_cast<int>(net.var_names.size()) == n) {
        names = net.var_names;
    } else {
        for (int v = 0; v < n; ++v) names.push_back("x" + std::to_string(v));
    }
    return Dataset(std::move(names), std::move(rows));
}

}  // namespace modnet
