#ifndef MODNET_GENERATOR_HPP
#define MODNET_GENERATOR_HPP

#include <cstdint>

#include "modnet/dataset.hpp"
#include "modnet/model.hpp"

namespace modnet {

// Shape of a random ground-truth network. Modules are generated in index
// order; module 0 is a parent-free root, later modules draw their parents from
// variables assigned to earlier modules, which makes the module graph acyclic
// by construction.
struct GeneratorSpec {
    int n = 100;
    int K_true = 10;
    int parents_min = 1;
    int parents_max = 3;
    int depth_min = 1;
    int depth_max = 2;
    double mean_lo = -2.0;
    double mean_hi = 2.0;
    double var_lo = 0.25;
    double var_hi = 1.0;
    double noise_scale = 1.0;  // multiplies leaf standard deviations
    std::uint64_t seed = 0;

    void check() const;
};

// Random acyclic module network matching `spec`, leaf parameters materialized.
// Throws std::invalid_argument when `spec` is unsatisfiable (a module's
// upstream variable pool is smaller than parents_min).
ModuleNetwork generate_truth(const GeneratorSpec& spec);

// Draw `count` instances by sampling variables in a topological order of the
// ground network. Requires materialized leaf parameters; rejects cyclic nets.
// If the net records a standardization, samples are mapped back to raw scale.
Dataset sample(const ModuleNetwork& net, int count, std::uint64_t seed);

}  // namespace modnet

#endif
