#ifndef MODNET_SEARCH_HPP
#define MODNET_SEARCH_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modnet/dataset.hpp"
#include "modnet/model.hpp"
#include "modnet/scoring.hpp"

namespace modnet {

struct SearchConfig {
    int K = 1;
    int max_outer_iters = 50;
    double epsilon = 1e-6;  // an operator commits only when it gains more than this
    int lookahead = 3;
    int beam_width = 1;
    int min_leaf = 5;  // minimum pooled observations per leaf
    std::uint64_t rng_seed = 0;

    void check() const;
};

// One committed operator: a leaf split ("split") or a variable reassignment
// ("move"). `score` is the total score after the commit, recomputed from
// scratch for the touched modules.
struct CommitRecord {
    std::string kind;
    int module = -1;    // module split into / moved into
    int variable = -1;  // split test variable / moved variable
    double score = 0.0;
};

struct StepResult {
    ModuleNetwork net;
    bool improved = false;
    std::vector<CommitRecord> commits;
};

struct TraceRecord {
    int iteration = 0;
    std::string kind;
    int module = -1;
    int variable = -1;
    double score = 0.0;
    double elapsed_seconds = 0.0;
};

struct LearnResult {
    ModuleNetwork net;
    std::vector<TraceRecord> trace;
    double final_score = 0.0;
};

// Per-module score cache. Values are only ever filled by a from-scratch
// module_score call, so a cached read is bitwise identical to recomputation.
class ScoreCache {
public:
    explicit ScoreCache(int module_count);

    int module_count() const { return static_cast<int>(values_.size()); }
    bool is_stale(int module) const { return stale_[static_cast<std::size_t>(module)] != 0; }
    void mark_stale(int module);
    void mark_all_stale();

    double get(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior, int module);
    double total(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior);

private:
    std::vector<double> values_;
    std::vector<char> stale_;
};

// Marks `touched` stale and refreshes every stale entry.
void delta_rescore(ScoreCache& cache, const Dataset& data, const ModuleNetwork& net,
                   const PriorSpec& prior, std::span<const int> touched);

// Modules whose members may become parents of `module` without forming a
// cycle, i.e. modules (other than `module`) not reachable from it.
std::vector<bool> legal_parent_modules(const ModuleGraph& g, int module);

// Greedy/beam leaf-split search under a fixed assignment. Commits the best
// candidate split (ranked by lookahead value) while one gains more than
// cfg.epsilon; every commit leaves the module graph acyclic.
StepResult structure_step(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior,
                          const SearchConfig& cfg);

// Sequential round-robin reassignment under fixed trees. Each variable moves
// to its best legal module when that gains more than cfg.epsilon (staying wins
// ties); pooled statistics are updated before the next variable is examined.
StepResult assignment_step(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior,
                           const SearchConfig& cfg);

// Alternates assignment and structure steps (assignment first, so variables
// misplaced by the initializer can escape before trees grow) until neither
// improves, then materializes leaf parameters. The trace score sequence never
// decreases.
LearnResult learn(const Dataset& data, const PriorSpec& prior, const SearchConfig& cfg,
                  const ModuleNetwork& init);

}  // namespace modnet

#endif
