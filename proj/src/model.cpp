#include "modnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace modnet {

std::vector<int> ModuleAssignment::members(int module) const {
    std::vector<int> out;
    for (int i = 0; i < variable_count(); ++i)
        if (assign[i] == module) out.push_back(i);
    return out;
}

std::vector<std::vector<int>> ModuleAssignment::all_members() const {
    std::vector<std::vector<int>> out(module_count);
    for (int i = 0; i < variable_count(); ++i) out[assign[i]].push_back(i);
    return out;
}

ModuleAssignment ModuleAssignment::identity(int n) {
    ModuleAssignment a;
    a.assign.resize(n);
    std::iota(a.assign.begin(), a.assign.end(), 0);
    a.module_count = n;
    return a;
}

Module Module::from_tree(RegressionTree t) {
    Module m;
    auto tested = t.tested_vars();
    m.parents.assign(tested.begin(), tested.end());
    m.tree = std::move(t);
    return m;
}

const std::string& ModuleNetwork::var_name(int v) const {
    static const std::string empty;
    if (v < static_cast<int>(var_names.size())) return var_names[v];
    return empty;
}

ModuleNetwork ModuleNetwork::with_single_leaves(ModuleAssignment assignment) {
    ModuleNetwork net;
    net.modules.resize(assignment.module_count);
    net.assignment = std::move(assignment);
    return net;
}

bool ModuleGraph::has_edge(int from, int to) const {
    const auto& out = edges_out[from];
    return std::binary_search(out.begin(), out.end(), to);
}

int ModuleGraph::edge_count() const {
    int c = 0;
    for (const auto& out : edges_out) c += static_cast<int>(out.size());
    return c;
}

ModuleGraph build_module_graph(const ModuleNetwork& net) {
    const int module_count = net.module_count();
    const int n = net.variable_count();
    if (net.assignment.module_count != module_count)
        throw StructuralError("assignment declares " +
                              std::to_string(net.assignment.module_count) +
                              " modules, template has " + std::to_string(module_count));
    for (int i = 0; i < n; ++i) {
        int j = net.assignment.assign[i];
        if (j < 0 || j >= module_count)
            throw StructuralError("variable " + std::to_string(i) +
                                  " assigned to out-of-range module " + std::to_string(j));
    }

    ModuleGraph g;
    g.module_count = module_count;
    g.edges_out.resize(module_count);
    for (int k = 0; k < module_count; ++k) {
        for (int parent_var : net.modules[k].parents) {
            if (parent_var < 0 || parent_var >= n)
                throw StructuralError("module " + std::to_string(k) +
                                      " has out-of-range parent variable " +
                                      std::to_string(parent_var));
            g.edges_out[net.assignment.assign[parent_var]].push_back(k);
        }
    }
    for (auto& out : g.edges_out) {
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return g;
}

namespace {

// DFS coloring; returns a cycle witness (first == last) or empty.
struct CycleSearch {
    const ModuleGraph& g;
    std::vector<int> color;  // 0 white, 1 gray, 2 black
    std::vector<int> path;
    std::vector<int> cycle;

    explicit CycleSearch(const ModuleGraph& graph)
        : g(graph), color(graph.module_count, 0) {}

    bool visit(int u) {
        color[u] = 1;
        path.push_back(u);
        for (int v : g.edges_out[u]) {
            if (color[v] == 1) {
                auto it = std::find(path.begin(), path.end(), v);
                cycle.assign(it, path.end());
                cycle.push_back(v);
                return true;
            }
            if (color[v] == 0 && visit(v)) return true;
        }
        path.pop_back();
        color[u] = 2;
        return false;
    }

    std::vector<int> run() {
        for (int u = 0; u < g.module_count; ++u)
            if (color[u] == 0 && visit(u)) return cycle;
        return {};
    }
};

}  // namespace

std::vector<int> find_cycle(const ModuleGraph& g) { return CycleSearch(g).run(); }

bool check_acyclic(const ModuleGraph& g) { return find_cycle(g).empty(); }

std::vector<int> topological_modules(const ModuleGraph& g) {
    std::vector<int> indegree(g.module_count, 0);
    for (const auto& out : g.edges_out)
        for (int v : out) ++indegree[v];
    std::vector<int> ready, order;
    for (int u = 0; u < g.module_count; ++u)
        if (indegree[u] == 0) ready.push_back(u);
    // Smallest module index first, for determinism.
    while (!ready.empty()) {
        std::pop_heap(ready.begin(), ready.end(), std::greater<>());
        int u = ready.back();
        ready.pop_back();
        order.push_back(u);
        for (int v : g.edges_out[u]) {
            if (--indegree[v] == 0) {
                ready.push_back(v);
                std::push_heap(ready.begin(), ready.end(), std::greater<>());
            }
        }
    }
    if (static_cast<int>(order.size()) != g.module_count) {
        auto witness = find_cycle(g);
        throw CycleError("module graph is cyclic", witness);
    }
    return order;
}

GroundNetwork ground_network(const ModuleNetwork& net) {
    ModuleGraph g = build_module_graph(net);
    auto witness = find_cycle(g);
    if (!witness.empty()) throw CycleError("module graph is cyclic", witness);

    GroundNetwork ground;
    ground.source = &net;
    const int n = net.variable_count();
    ground.parents.resize(n);
    ground.module_of.resize(n);
    for (int i = 0; i < n; ++i) {
        int j = net.assignment.assign[i];
        ground.module_of[i] = j;
        ground.parents[i] = net.modules[j].parents;
    }
    return ground;
}

std::vector<int> GroundNetwork::topological_variables() const {
    ModuleGraph g = build_module_graph(*source);
    std::vector<int> module_order = topological_modules(g);
    std::vector<int> order;
    order.reserve(module_of.size());
    auto members = source->assignment.all_members();
    for (int j : module_order)
        for (int i : members[j]) order.push_back(i);
    return order;
}

std::vector<std::string> validate(const ModuleNetwork& net, const Dataset& data) {
    std::vector<std::string> out;
    const int module_count = net.module_count();
    const int n = net.variable_count();

    if (net.assignment.module_count != module_count)
        out.push_back("module count mismatch: assignment says " +
                      std::to_string(net.assignment.module_count) + ", template has " +
                      std::to_string(module_count));
    if (n != data.variable_count())
        out.push_back("assignment covers " + std::to_string(n) + " variables, dataset has " +
                      std::to_string(data.variable_count()));

    bool assignment_ok = true;
    for (int i = 0; i < n; ++i) {
        int j = net.assignment.assign[i];
        if (j < 0 || j >= module_count) {
            out.push_back("variable " + std::to_string(i) + " assigned to module " +
                          std::to_string(j) + " outside 0.." + std::to_string(module_count - 1));
            assignment_ok = false;
        }
    }

    for (int j = 0; j < module_count; ++j) {
        const Module& mod = net.modules[j];
        try {
            mod.tree.check_structure();
        } catch (const std::exception& e) {
            out.push_back("module " + std::to_string(j) + ": " + e.what());
            continue;
        }
        auto tested = mod.tree.tested_vars();
        for (int v : tested) {
            if (v < 0 || v >= data.variable_count())
                out.push_back("module " + std::to_string(j) + " tests out-of-range variable " +
                              std::to_string(v));
            else if (!std::binary_search(mod.parents.begin(), mod.parents.end(), v))
                out.push_back("module " + std::to_string(j) + " tests variable " +
                              std::to_string(v) + " absent from its declared parents");
        }
        for (int v : mod.parents) {
            if (v < 0 || v >= data.variable_count())
                out.push_back("module " + std::to_string(j) + " declares out-of-range parent " +
                              std::to_string(v));
            else if (!tested.count(v))
                out.push_back("module " + std::to_string(j) + " declares parent " +
                              std::to_string(v) + " that its tree never tests");
        }
        for (int id = 0; id < mod.tree.node_count(); ++id) {
            const TreeNode& node = mod.tree.node(id);
            if (node.is_leaf() && node.params && node.params->variance <= 0.0)
                out.push_back("module " + std::to_string(j) + " leaf " + std::to_string(id) +
                              " has non-positive variance");
        }
    }

    if (out.empty() && assignment_ok) {
        ModuleGraph g = build_module_graph(net);
        auto cycle = find_cycle(g);
        if (!cycle.empty()) {
            std::string msg = "module graph has a cycle:";
            for (int j : cycle) msg += " " + std::to_string(j);
            out.push_back(msg);
        }
    }
    return out;
}

}  // namespace modnet
