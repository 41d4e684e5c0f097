#include "modnet/scoring.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "modnet/kernels.hpp"

namespace modnet {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

double require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
    return v;
}

}  // namespace

void PriorSpec::check() const {
    require_finite(mu0, "mu0");
    if (!(kappa0 > 0.0) || !std::isfinite(kappa0))
        throw std::invalid_argument("kappa0 must be positive");
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0))
        throw std::invalid_argument("alpha0 must be positive");
    if (!(beta0 > 0.0) || !std::isfinite(beta0))
        throw std::invalid_argument("beta0 must be positive");
    if (lambda_s < 0.0 || !std::isfinite(lambda_s))
        throw std::invalid_argument("lambda_s must be non-negative");
}

double leaf_log_marginal(const GaussianStats& stats, const PriorSpec& prior) {
    if (stats.count == 0) return 0.0;
    if (stats.count < 0) throw std::invalid_argument("negative observation count");
    const double n = static_cast<double>(stats.count);
    const double mean = stats.sum / n;
    // Centered second moment from the raw sums; guard tiny negative rounding.
    double sse = stats.sumsq - stats.sum * stats.sum / n;
    if (sse < 0.0) sse = 0.0;

    const double kappa_n = prior.kappa0 + n;
    const double alpha_n = prior.alpha0 + 0.5 * n;
    const double delta = mean - prior.mu0;
    const double beta_n =
        prior.beta0 + 0.5 * sse + prior.kappa0 * n * delta * delta / (2.0 * kappa_n);

    return std::lgamma(alpha_n) - std::lgamma(prior.alpha0) + prior.alpha0 * std::log(prior.beta0) -
           alpha_n * std::log(beta_n) + 0.5 * (std::log(prior.kappa0) - std::log(kappa_n)) -
           0.5 * n * kLogTwoPi;
}

std::vector<int> route_instances(const RegressionTree& tree, const Dataset& data) {
    const int m = data.instance_count();
    std::vector<int> leaf(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) leaf[static_cast<std::size_t>(i)] = leaf_for(tree, data.row(i));
    return leaf;
}

MemberMoments member_moments(const Dataset& data, std::span<const int> members) {
    MemberMoments mm;
    mm.sums.assign(static_cast<std::size_t>(data.instance_count()), 0.0);
    mm.sumsqs.assign(static_cast<std::size_t>(data.instance_count()), 0.0);
    for (int v : members) {
        kernels::add(mm.sums, data.column(v));
        kernels::add_squares(mm.sumsqs, data.column(v));
    }
    return mm;
}

std::vector<GaussianStats> pooled_leaf_stats(const Dataset& data, const ModuleNetwork& net,
                                             int module) {
    if (module < 0 || module >= net.assignment.module_count)
        throw std::out_of_range("module index out of range");
    const RegressionTree& tree = net.modules[static_cast<std::size_t>(module)].tree;
    const std::vector<int> members = net.assignment.members(module);
    const std::vector<int> route = route_instances(tree, data);
    const MemberMoments mm = member_moments(data, members);

    std::vector<GaussianStats> stats(static_cast<std::size_t>(tree.node_count()));
    const auto per_instance = static_cast<std::int64_t>(members.size());
    for (int i = 0; i < data.instance_count(); ++i) {
        GaussianStats& s = stats[static_cast<std::size_t>(route[static_cast<std::size_t>(i)])];
        s.count += per_instance;
        s.sum += mm.sums[static_cast<std::size_t>(i)];
        s.sumsq += mm.sumsqs[static_cast<std::size_t>(i)];
    }
    return stats;
}

double module_log_marginal(const Dataset& data, const ModuleNetwork& net, int module,
                           const PriorSpec& prior) {
    const std::vector<GaussianStats> stats = pooled_leaf_stats(data, net, module);
    const RegressionTree& tree = net.modules[static_cast<std::size_t>(module)].tree;
    double total = 0.0;
    for (int leaf : tree.leaf_ids()) total += leaf_log_marginal(stats[static_cast<std::size_t>(leaf)], prior);
    return total;
}

ModuleScore module_score_breakdown(const Dataset& data, const ModuleNetwork& net, int module,
                                   const PriorSpec& prior) {
    prior.check();
    ModuleScore s;
    s.log_marginal = module_log_marginal(data, net, module, prior);
    const RegressionTree& tree = net.modules[static_cast<std::size_t>(module)].tree;
    s.log_structure_prior = -prior.lambda_s * static_cast<double>(tree.interior_count());
    s.log_assignment_prior = 0.0;
    return s;
}

double module_score(const Dataset& data, const ModuleNetwork& net, int module,
                    const PriorSpec& prior) {
    return module_score_breakdown(data, net, module, prior).total();
}

ScoreReport total_score(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior) {
    prior.check();
    const ModuleGraph graph = build_module_graph(net);
    if (const auto cycle = find_cycle(graph); !cycle.empty()) {
        std::string msg = "module graph is cyclic:";
        for (int m : cycle) msg += " " + std::to_string(m);
        throw CycleError(msg, cycle);
    }

    ScoreReport report;
    report.per_module.reserve(static_cast<std::size_t>(net.assignment.module_count));
    for (int j = 0; j < net.assignment.module_count; ++j) {
        report.per_module.push_back(module_score_breakdown(data, net, j, prior));
        report.total += report.per_module.back().total();
    }
    return report;
}

double log_likelihood(const Dataset& data, const ModuleNetwork& net) {
    double total = 0.0;
    for (int j = 0; j < net.assignment.module_count; ++j) {
        const RegressionTree& tree = net.modules[static_cast<std::size_t>(j)].tree;
        const std::vector<int> members = net.assignment.members(j);
        const std::vector<int> route = route_instances(tree, data);
        for (int i = 0; i < data.instance_count(); ++i) {
            const TreeNode& node = tree.node(route[static_cast<std::size_t>(i)]);
            if (!node.params)
                throw std::logic_error("log_likelihood: leaf without parameters in module " +
                                       std::to_string(j));
            for (int v : members) total += leaf_log_density(*node.params, data.value(i, v));
        }
    }
    return total;
}

LeafParams posterior_leaf_params(const GaussianStats& stats, const PriorSpec& prior) {
    prior.check();
    if (stats.count < 0) throw std::invalid_argument("negative observation count");
    const double n = static_cast<double>(stats.count);
    const double kappa_n = prior.kappa0 + n;
    const double alpha_n = prior.alpha0 + 0.5 * n;

    LeafParams p;
    p.mean = (prior.kappa0 * prior.mu0 + stats.sum) / kappa_n;
    double beta_n = prior.beta0;
    if (stats.count > 0) {
        const double mean = stats.sum / n;
        double sse = stats.sumsq - stats.sum * stats.sum / n;
        if (sse < 0.0) sse = 0.0;
        const double delta = mean - prior.mu0;
        beta_n += 0.5 * sse + prior.kappa0 * n * delta * delta / (2.0 * kappa_n);
    }
    p.variance = alpha_n > 1.0 ? beta_n / (alpha_n - 1.0) : beta_n / alpha_n;
    return p;
}

void materialize_leaf_params(ModuleNetwork& net, const Dataset& data, const PriorSpec& prior) {
    prior.check();
    for (int j = 0; j < net.assignment.module_count; ++j) {
        const std::vector<GaussianStats> stats = pooled_leaf_stats(data, net, j);
        RegressionTree& tree = net.modules[static_cast<std::size_t>(j)].tree;
        for (int leaf : tree.leaf_ids())
            tree.node(leaf).params = posterior_leaf_params(stats[static_cast<std::size_t>(leaf)], prior);
    }
}

}  // namespace modnet
