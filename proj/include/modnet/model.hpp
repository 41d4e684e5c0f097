#ifndef MODNET_MODEL_HPP
#define MODNET_MODEL_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modnet/dataset.hpp"
#include "modnet/tree.hpp"

namespace modnet {

struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CycleError : std::runtime_error {
    CycleError(std::string msg, std::vector<int> witness)
        : std::runtime_error(std::move(msg)), cycle(std::move(witness)) {}
    std::vector<int> cycle;  // module indices along the cycle
};

// Total map variable -> module; empty modules are legal.
struct ModuleAssignment {
    std::vector<int> assign;
    int module_count = 0;

    int variable_count() const { return static_cast<int>(assign.size()); }
    int module_of(int variable) const { return assign[variable]; }

    std::vector<int> members(int module) const;
    std::vector<std::vector<int>> all_members() const;

    static ModuleAssignment identity(int n);

    bool operator==(const ModuleAssignment&) const = default;
};

// One shared conditional model: declared parent set plus the regression tree
// realizing it. Learning keeps parents equal to the tree's tested variables;
// validate() reports any drift (e.g. in hand-built or loaded models).
struct Module {
    std::vector<int> parents;  // sorted
    RegressionTree tree;

    static Module from_tree(RegressionTree t);
};

// Per-variable standardization recorded at ingestion so models can evaluate
// raw-scale data.
struct Standardization {
    std::vector<double> means;
    std::vector<double> scales;

    bool operator==(const Standardization&) const = default;
};

struct ModuleNetwork {
    ModuleAssignment assignment;
    std::vector<Module> modules;
    std::vector<std::string> var_names;  // optional; defaults to x0..x{n-1}
    std::optional<Standardization> standardization;

    int module_count() const { return static_cast<int>(modules.size()); }
    int variable_count() const { return assignment.variable_count(); }

    const std::string& var_name(int v) const;

    static ModuleNetwork with_single_leaves(ModuleAssignment assignment);
};

struct ModuleGraph {
    int module_count = 0;
    std::vector<std::vector<int>> edges_out;  // adjacency, sorted, no duplicates

    bool has_edge(int from, int to) const;
    int edge_count() const;
};

// Edge j -> k iff some variable assigned to j is a parent of module k.
ModuleGraph build_module_graph(const ModuleNetwork& net);

bool check_acyclic(const ModuleGraph& g);

// A directed cycle as a module index sequence (first == last), or empty.
std::vector<int> find_cycle(const ModuleGraph& g);

// Topological order of modules; throws CycleError when cyclic.
std::vector<int> topological_modules(const ModuleGraph& g);

struct GroundNetwork {
    const ModuleNetwork* source = nullptr;
    std::vector<std::vector<int>> parents;  // per variable, copied from its module
    std::vector<int> module_of;

    // Variables ordered so parents precede children.
    std::vector<int> topological_variables() const;
};

// Unrolls the shared structure onto the member variables; throws CycleError
// (with a module-index witness) when the module graph is cyclic.
GroundNetwork ground_network(const ModuleNetwork& net);

// Invariant check; returns human-readable violations instead of throwing.
std::vector<std::string> validate(const ModuleNetwork& net, const Dataset& data);

}  // namespace modnet

#endif
