#ifndef MODNET_MERGE_INIT_HPP
#define MODNET_MERGE_INIT_HPP

#include <cstdint>
#include <span>

#include "modnet/dataset.hpp"
#include "modnet/model.hpp"
#include "modnet/scoring.hpp"

namespace modnet {

// Score of a variable block under the instance-identity dummy structure: one
// leaf per training instance, parameters shared across the block, i.e. the sum
// over instances of the leaf marginal of the block's values at that instance.
double merge_score(const Dataset& data, std::span<const int> block, const PriorSpec& prior);

struct InitOptions {
    // Past this many starting blocks, each round scores only a seeded random
    // subset of candidate pairs instead of all of them. 0 disables the cap.
    int subsample_above = 3000;
    int subsample_pairs = 20000;
};

// Greedy model merging: start from singleton blocks and repeatedly merge the
// pair with the largest score delta (ties to lowest indices) until K blocks
// remain. Deterministic given (data, prior, K) unless pair subsampling kicks
// in, which is the only consumer of `seed`.
ModuleAssignment initialize(const Dataset& data, const PriorSpec& prior, int K,
                            std::uint64_t seed, const InitOptions& opts = {});

}  // namespace modnet

#endif
