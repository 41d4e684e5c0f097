#ifndef MODNET_SCORING_HPP
#define MODNET_SCORING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "modnet/dataset.hpp"
#include "modnet/model.hpp"

namespace modnet {

// Additive sufficient statistics for Gaussian leaves, pooled over every
// (instance, member variable) observation routed to the leaf.
struct GaussianStats {
    std::int64_t count = 0;
    double sum = 0.0;
    double sumsq = 0.0;

    void observe(double x) {
        ++count;
        sum += x;
        sumsq += x * x;
    }

    GaussianStats& operator+=(const GaussianStats& o) {
        count += o.count;
        sum += o.sum;
        sumsq += o.sumsq;
        return *this;
    }

    GaussianStats& operator-=(const GaussianStats& o) {
        count -= o.count;
        sum -= o.sum;
        sumsq -= o.sumsq;
        return *this;
    }

    friend GaussianStats operator+(GaussianStats a, const GaussianStats& b) { return a += b; }
    friend GaussianStats operator-(GaussianStats a, const GaussianStats& b) { return a -= b; }
};

// Normal-Gamma hyperparameters on each leaf's (mean, precision), plus the
// structure penalty: log rho_j = -lambda_s * interior(tree_j). The assignment
// prior is uniform (log alpha_j = 0).
struct PriorSpec {
    double mu0 = 0.0;
    double kappa0 = 0.1;
    double alpha0 = 1.0;
    double beta0 = 1.0;
    double lambda_s = 0.0;

    void check() const;
};

struct ModuleScore {
    double log_marginal = 0.0;
    double log_structure_prior = 0.0;
    double log_assignment_prior = 0.0;

    double total() const { return log_marginal + log_structure_prior + log_assignment_prior; }
};

struct ScoreReport {
    double total = 0.0;
    std::vector<ModuleScore> per_module;
};

// Closed-form log marginal likelihood of the observations summarized by
// `stats` under the Normal-Gamma prior; 0 for an empty leaf.
double leaf_log_marginal(const GaussianStats& stats, const PriorSpec& prior);

// Leaf index of each instance under `tree` (routing uses parent values only,
// so it is shared by every member variable of the module).
std::vector<int> route_instances(const RegressionTree& tree, const Dataset& data);

// Per-instance pooled moments over a member set: sums[m] = sum_i x_i[m] and
// sumsqs[m] = sum_i x_i[m]^2 for i in members.
struct MemberMoments {
    std::vector<double> sums;
    std::vector<double> sumsqs;
};

MemberMoments member_moments(const Dataset& data, std::span<const int> members);

// Pooled per-leaf statistics of module j, indexed by tree node id (interior
// entries stay zero). Total pooled count is |members| * M.
std::vector<GaussianStats> pooled_leaf_stats(const Dataset& data, const ModuleNetwork& net,
                                             int module);

double module_log_marginal(const Dataset& data, const ModuleNetwork& net, int module,
                           const PriorSpec& prior);

ModuleScore module_score_breakdown(const Dataset& data, const ModuleNetwork& net, int module,
                                   const PriorSpec& prior);

double module_score(const Dataset& data, const ModuleNetwork& net, int module,
                    const PriorSpec& prior);

// Rejects cyclic networks.
ScoreReport total_score(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior);

// Log density of the data under materialized leaf parameters; throws when a
// reached leaf has no parameters.
double log_likelihood(const Dataset& data, const ModuleNetwork& net);

// Posterior-predictive point estimates: posterior mean for the mean, the
// posterior expectation of the variance where it exists (alpha_n > 1) and the
// inverse expected precision otherwise. Always strictly positive variance.
LeafParams posterior_leaf_params(const GaussianStats& stats, const PriorSpec& prior);

// Fit every leaf of every module from its pooled statistics.
void materialize_leaf_params(ModuleNetwork& net, const Dataset& data, const PriorSpec& prior);

}  // namespace modnet

#endif
