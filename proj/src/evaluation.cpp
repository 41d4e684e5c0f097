#include "modnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "modnet/merge_init.hpp"
#include "modnet/rng.hpp"

namespace modnet {

Dataset apply_standardization(const Dataset& data, const Standardization& s) {
    const int n = data.variable_count();
    if (static_cast<int>(s.means.size()) != n || static_cast<int>(s.scales.size()) != n)
        throw std::invalid_argument("standardization does not match variable count");
    std::vector<std::vector<double>> rows(data.instance_count());
    for (int m = 0; m < data.instance_count(); ++m) {
        rows[m].resize(n);
        for (int v = 0; v < n; ++v) rows[m][v] = (data.value(m, v) - s.means[v]) / s.scales[v];
    }
    return Dataset(data.var_names(), std::move(rows));
}

double heldout_ll(const ModuleNetwork& net, const Dataset& test) {
    if (test.instance_count() < 1) throw std::invalid_argument("heldout_ll: empty test set");
    if (net.standardization) {
        const Dataset transformed = apply_standardization(test, *net.standardization);
        return log_likelihood(transformed, net) / test.instance_count();
    }
    return log_likelihood(test, net) / test.instance_count();
}

namespace {

std::set<std::pair<int, int>> ground_edges(const ModuleNetwork& net) {
    std::set<std::pair<int, int>> edges;
    const GroundNetwork g = ground_network(net);
    for (int v = 0; v < static_cast<int>(g.parents.size()); ++v)
        for (int p : g.parents[v]) edges.insert({p, v});
    return edges;
}

}  // namespace

double recovered_edge_fraction(const ModuleNetwork& learned, const ModuleNetwork& truth) {
    if (learned.variable_count() != truth.variable_count())
        throw std::invalid_argument("recovered_edge_fraction: different variable universes");
    const auto truth_edges = ground_edges(truth);
    if (truth_edges.empty())
        throw std::invalid_argument("recovered_edge_fraction: truth has no edges");
    const auto learned_edges = ground_edges(learned);
    std::size_t hits = 0;
    for (const auto& e : truth_edges) hits += learned_edges.count(e);
    return static_cast<double>(hits) / static_cast<double>(truth_edges.size());
}

double top_module_mass(const ModuleNetwork& net, int top) {
    if (top < 1) throw std::invalid_argument("top_module_mass: top must be >= 1");
    const int n = net.variable_count();
    if (n < 1) throw std::invalid_argument("top_module_mass: empty network");
    std::vector<int> sizes(net.module_count(), 0);
    for (int v = 0; v < n; ++v) sizes[net.assignment.module_of(v)]++;
    std::sort(sizes.begin(), sizes.end(), std::greater<int>());
    int held = 0;
    for (int j = 0; j < std::min<int>(top, static_cast<int>(sizes.size())); ++j) held += sizes[j];
    return static_cast<double>(held) / static_cast<double>(n);
}

EvalReport cross_validate(const Dataset& data, const PriorSpec& prior, const SearchConfig& cfg,
                          int folds) {
    cfg.check();
    prior.check();
    if (folds < 2) throw std::invalid_argument("cross_validate: folds must be >= 2");
    const int M = data.instance_count();
    const int n = data.variable_count();
    if (M < folds) throw std::invalid_argument("cross_validate: more folds than instances");

    // Fold of an instance = its position in a seeded shuffle, mod folds.
    std::vector<int> perm(M);
    for (int i = 0; i < M; ++i) perm[i] = i;
    Rng rng(cfg.rng_seed);
    for (int i = M - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    std::vector<int> fold_of(M);
    for (int pos = 0; pos < M; ++pos) fold_of[perm[pos]] = pos % folds;

    EvalReport report;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::vector<double>> train_rows, test_rows;
        for (int m = 0; m < M; ++m) {
            const auto row = data.row(m);
            (fold_of[m] == f ? test_rows : train_rows)
                .emplace_back(row.begin(), row.end());
        }
        if (test_rows.empty() || train_rows.empty())
            throw std::invalid_argument("cross_validate: empty fold " + std::to_string(f));
        const Dataset train(data.var_names(), std::move(train_rows));
        const Dataset test(data.var_names(), std::move(test_rows));

        try {
            FoldRecord rec;
            rec.fold = f;
            rec.train_count = train.instance_count();
            rec.test_count = test.instance_count();

            ModuleNetwork init =
                ModuleNetwork::with_single_leaves(initialize(train, prior, cfg.K, cfg.rng_seed));
            init.var_names = data.var_names();
            const LearnResult learned = learn(train, prior, cfg, init);
            rec.heldout = heldout_ll(learned.net, test);

            SearchConfig bn_cfg = cfg;
            bn_cfg.K = n;
            ModuleNetwork bn_init =
                ModuleNetwork::with_single_leaves(ModuleAssignment::identity(n));
            bn_init.var_names = data.var_names();
            const LearnResult bn = learn(train, prior, bn_cfg, bn_init);
            rec.baseline_heldout = heldout_ll(bn.net, test);

            report.folds.push_back(rec);
        } catch (const std::exception&) {
            report.failures++;
        }
    }

    auto mean_std = [](const std::vector<double>& xs, double& mean, double& stddev) {
        mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    };
    if (!report.folds.empty()) {
        std::vector<double> h, b;
        for (const FoldRecord& r : report.folds) {
            h.push_back(r.heldout);
            b.push_back(r.baseline_heldout);
        }
        mean_std(h, report.heldout_mean, report.heldout_stddev);
        mean_std(b, report.baseline_mean, report.baseline_stddev);
        report.heldout_ll_per_instance = report.heldout_mean;
    }
    return report;
}

double enrichment_pvalue(long long population, long long annotated, long long module_size,
                         long long hits) {
    if (hits < 0 || module_size < hits || population < module_size || annotated < hits ||
        population < annotated)
        throw std::invalid_argument("enrichment_pvalue: inconsistent counts");
    // Support of the hypergeometric: [max(0, m + a - N), min(m, a)].
    const long long lo = std::max<long long>(0, module_size + annotated - population);
    if (hits <= lo) return 1.0;
    const long long hi = std::min(module_size, annotated);

    auto lchoose = [](long long a, long long b) {
        return std::lgamma(static_cast<double>(a) + 1.0) -
               std::lgamma(static_cast<double>(b) + 1.0) -
               std::lgamma(static_cast<double>(a - b) + 1.0);
    };
    const double denom = lchoose(population, module_size);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(hi - hits + 1));
    for (long long i = hits; i <= hi; ++i)
        terms.push_back(lchoose(annotated, i) +
                        lchoose(population - annotated, module_size - i) - denom);
    const double peak = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - peak);
    return std::exp(peak + std::log(acc));
}

}  // namespace modnet
