#ifndef MODNET_EVALUATION_HPP
#define MODNET_EVALUATION_HPP

#include <limits>
#include <vector>

#include "modnet/dataset.hpp"
#include "modnet/model.hpp"
#include "modnet/scoring.hpp"
#include "modnet/search.hpp"

namespace modnet {

struct FoldRecord {
    int fold = 0;
    int train_count = 0;
    int test_count = 0;
    double heldout = 0.0;           // per-instance LL of the module network
    double baseline_heldout = 0.0;  // per-instance LL of the K=n network
};

struct EvalReport {
    double heldout_ll_per_instance = std::numeric_limits<double>::quiet_NaN();
    double recovered_edge_fraction = std::numeric_limits<double>::quiet_NaN();
    double top_module_mass = std::numeric_limits<double>::quiet_NaN();
    std::vector<FoldRecord> folds;
    double heldout_mean = std::numeric_limits<double>::quiet_NaN();
    double heldout_stddev = std::numeric_limits<double>::quiet_NaN();
    double baseline_mean = std::numeric_limits<double>::quiet_NaN();
    double baseline_stddev = std::numeric_limits<double>::quiet_NaN();
    int failures = 0;
};

// Copy of `data` with each column mapped through (x - mean) / scale.
Dataset apply_standardization(const Dataset& data, const Standardization& s);

// Per-instance held-out log-likelihood. When the net records a
// standardization, `test` is taken as raw-scale and transformed first;
// densities are reported in the transformed space.
double heldout_ll(const ModuleNetwork& net, const Dataset& test);

// |ground edges(learned) ∩ ground edges(truth)| / |ground edges(truth)|,
// over (parent variable, child variable) pairs. Errors when truth has none.
double recovered_edge_fraction(const ModuleNetwork& learned, const ModuleNetwork& truth);

// Fraction of variables held by the `top` largest modules.
double top_module_mass(const ModuleNetwork& net, int top);

// Seeded k-fold cross-validation (fold = shuffled position mod folds): per
// fold, initialize + learn on the training split and score the held-out
// split, for both cfg.K and the K=n one-variable-per-module baseline run
// through the identical search code. Fold failures are counted, not fatal.
EvalReport cross_validate(const Dataset& data, const PriorSpec& prior, const SearchConfig& cfg,
                          int folds);

// Exact hypergeometric upper tail P[X >= hits] for a module of `module_size`
// drawn from `population` items of which `annotated` carry the label.
double enrichment_pvalue(long long population, long long annotated, long long module_size,
                         long long hits);

}  // namespace modnet

#endif
