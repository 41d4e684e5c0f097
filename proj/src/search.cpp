#include "modnet/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace modnet {

void SearchConfig::check() const {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be >= 1");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
    if (lookahead < 1) throw std::invalid_argument("lookahead must be >= 1");
    if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
    if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
}

ScoreCache::ScoreCache(int module_count) : values_(module_count, 0.0), stale_(module_count, 1) {}

void ScoreCache::mark_stale(int module) { stale_[module] = 1; }

void ScoreCache::mark_all_stale() { std::fill(stale_.begin(), stale_.end(), char(1)); }

double ScoreCache::get(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior,
                       int module) {
    if (stale_[module]) {
        values_[module] = module_score(data, net, module, prior);
        stale_[module] = 0;
    }
    return values_[module];
}

double ScoreCache::total(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior) {
    double t = 0.0;
    for (int j = 0; j < module_count(); ++j) t += get(data, net, prior, j);
    return t;
}

void delta_rescore(ScoreCache& cache, const Dataset& data, const ModuleNetwork& net,
                   const PriorSpec& prior, std::span<const int> touched) {
    for (int j : touched) cache.mark_stale(j);
    for (int j = 0; j < cache.module_count(); ++j) cache.get(data, net, prior, j);
}

std::vector<bool> legal_parent_modules(const ModuleGraph& g, int module) {
    std::vector<bool> visited(g.module_count, false);
    std::vector<int> stack{module};
    visited[module] = true;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int w : g.edges_out[u])
            if (!visited[w]) {
                visited[w] = true;
                stack.push_back(w);
            }
    }
    std::vector<bool> legal(g.module_count);
    for (int k = 0; k < g.module_count; ++k) legal[k] = !visited[k];
    return legal;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-instance pooled view of one module's member set; valid while the
// assignment is fixed.
struct ModuleCtx {
    std::vector<int> members;
    std::int64_t n_mem = 0;
    MemberMoments mm;
};

ModuleCtx make_ctx(const Dataset& data, const ModuleAssignment& a, int j) {
    ModuleCtx c;
    c.members = a.members(j);
    c.n_mem = static_cast<std::int64_t>(c.members.size());
    c.mm = member_moments(data, c.members);
    return c;
}

void observe_instance(GaussianStats& s, const ModuleCtx& ctx, int instance) {
    s.count += ctx.n_mem;
    s.sum += ctx.mm.sums[instance];
    s.sumsq += ctx.mm.sumsqs[instance];
}

// Total score via the cache, with the non-finite diagnostic learn() promises.
double checked_total(ScoreCache& cache, const Dataset& data, const ModuleNetwork& net,
                     const PriorSpec& prior) {
    double total = 0.0;
    for (int j = 0; j < cache.module_count(); ++j) {
        const double v = cache.get(data, net, prior, j);
        if (!std::isfinite(v)) {
            const auto stats = pooled_leaf_stats(data, net, j);
            for (int leaf : net.modules[j].tree.leaf_ids())
                if (!std::isfinite(leaf_log_marginal(stats[leaf], prior)))
                    throw std::runtime_error("non-finite score in module " + std::to_string(j) +
                                             " at leaf " + std::to_string(leaf));
            throw std::runtime_error("non-finite score in module " + std::to_string(j));
        }
        total += v;
    }
    return total;
}

void assert_acyclic_commit(const ModuleNetwork& net) {
    if (!check_acyclic(build_module_graph(net)))
        throw std::logic_error("committed operator broke module-graph acyclicity");
}

struct SplitCand {
    int module = -1;
    int leaf = -1;
    int var = -1;
    double threshold = 0.0;
    double delta = kNegInf;  // immediate total-score gain
    double value = kNegInf;  // best gain reachable by lookahead growth
};

// Best threshold for splitting `rows` (pooled into `total`, base = its leaf
// marginal) on `var`, honoring min_leaf. Scans ascending, so the smallest
// threshold wins exact ties.
bool best_threshold(const Dataset& data, const PriorSpec& prior, const ModuleCtx& ctx,
                    const std::vector<int>& rows, int var, const GaussianStats& total, double base,
                    std::int64_t min_leaf, std::vector<int>& scratch, double& out_thr,
                    double& out_delta) {
    scratch = rows;
    std::sort(scratch.begin(), scratch.end(), [&](int a, int b) {
        const double va = data.value(a, var), vb = data.value(b, var);
        return va < vb || (va == vb && a < b);
    });
    out_delta = kNegInf;
    GaussianStats left;
    double prev = 0.0;
    bool started = false;
    for (int i : scratch) {
        const double val = data.value(i, var);
        if (started && val > prev && left.count >= min_leaf) {
            const GaussianStats right = total - left;
            if (right.count >= min_leaf) {
                const double delta = leaf_log_marginal(left, prior) +
                                     leaf_log_marginal(right, prior) - base - prior.lambda_s;
                if (delta > out_delta) {
                    out_delta = delta;
                    out_thr = val;
                }
            }
        }
        observe_instance(left, ctx, i);
        prev = val;
        started = true;
    }
    return out_delta > kNegInf;
}

struct SimLeaf {
    std::vector<int> rows;
    GaussianStats stats;
    double base = 0.0;
};

SimLeaf make_sim_leaf(const PriorSpec& prior, const ModuleCtx& ctx, std::vector<int> rows) {
    SimLeaf lf;
    lf.rows = std::move(rows);
    for (int i : lf.rows) observe_instance(lf.stats, ctx, i);
    lf.base = leaf_log_marginal(lf.stats, prior);
    return lf;
}

// Value of a first-level candidate: apply it, then greedily grow up to
// cfg.lookahead further splits beneath it, and report the best cumulative gain
// seen along the way (greedy steps may go negative before paying off). New
// parents stay legal throughout: edges added here all point into the module,
// which cannot extend reachability from it.
double lookahead_value(const Dataset& data, const PriorSpec& prior, const SearchConfig& cfg,
                       const ModuleCtx& ctx, const std::vector<int>& leaf_rows,
                       const std::vector<int>& legal_vars, const SplitCand& cand) {
    std::vector<int> lrows, rrows;
    for (int i : leaf_rows) (data.value(i, cand.var) < cand.threshold ? lrows : rrows).push_back(i);
    std::vector<SimLeaf> leaves;
    leaves.push_back(make_sim_leaf(prior, ctx, std::move(lrows)));
    leaves.push_back(make_sim_leaf(prior, ctx, std::move(rrows)));

    const std::int64_t min_leaf = cfg.min_leaf;
    double gain = cand.delta;
    double best = gain;
    std::vector<int> scratch;
    for (int step = 0; step < cfg.lookahead; ++step) {
        int bp = -1, bvar = -1;
        double bthr = 0.0, bdelta = kNegInf;
        for (std::size_t p = 0; p < leaves.size(); ++p) {
            const SimLeaf& lf = leaves[p];
            if (lf.stats.count < 2 * min_leaf) continue;
            for (int v : legal_vars) {
                double thr = 0.0, delta = kNegInf;
                if (best_threshold(data, prior, ctx, lf.rows, v, lf.stats, lf.base, min_leaf,
                                   scratch, thr, delta) &&
                    delta > bdelta) {
                    bp = static_cast<int>(p);
                    bvar = v;
                    bthr = thr;
                    bdelta = delta;
                }
            }
        }
        if (bp < 0) break;
        std::vector<int> l2, r2;
        for (int i : leaves[bp].rows) (data.value(i, bvar) < bthr ? l2 : r2).push_back(i);
        SimLeaf right = make_sim_leaf(prior, ctx, std::move(r2));
        leaves[bp] = make_sim_leaf(prior, ctx, std::move(l2));
        leaves.push_back(std::move(right));
        gain += bdelta;
        best = std::max(best, gain);
    }
    return best;
}

// Best committable split for module j: scan every leaf x legal variable for
// its best threshold in one pass over each variable's sorted order, shortlist
// the strongest immediate gains, rank the shortlist by lookahead value.
std::optional<SplitCand> best_candidate(const Dataset& data, const ModuleNetwork& net,
                                        const PriorSpec& prior, const SearchConfig& cfg, int j,
                                        const ModuleCtx& ctx, const ModuleGraph& graph) {
    if (ctx.members.empty()) return std::nullopt;
    const std::vector<bool> legal = legal_parent_modules(graph, j);
    std::vector<int> legal_vars;
    for (int v = 0; v < data.variable_count(); ++v)
        if (legal[net.assignment.module_of(v)]) legal_vars.push_back(v);
    if (legal_vars.empty()) return std::nullopt;

    const RegressionTree& tree = net.modules[j].tree;
    const std::vector<int> route = route_instances(tree, data);
    const int nodes = tree.node_count();
    const std::vector<int> leaf_ids = tree.leaf_ids();

    std::vector<GaussianStats> total(nodes);
    std::vector<std::vector<int>> rows(nodes);
    for (int i = 0; i < data.instance_count(); ++i) {
        observe_instance(total[route[i]], ctx, i);
        rows[route[i]].push_back(i);
    }
    std::vector<double> base(nodes, 0.0);
    for (int l : leaf_ids) base[l] = leaf_log_marginal(total[l], prior);

    struct ScanState {
        GaussianStats left;
        double prev = 0.0;
        bool started = false;
    };
    std::vector<ScanState> st(nodes);
    std::vector<SplitCand> leaf_best(nodes);
    const std::int64_t min_leaf = cfg.min_leaf;
    const std::size_t cap = static_cast<std::size_t>(std::max(cfg.beam_width, 4));
    std::vector<SplitCand> pool;  // descending delta; insertion keeps ties stable

    for (int v : legal_vars) {
        for (int l : leaf_ids) {
            st[l] = ScanState{};
            leaf_best[l] = SplitCand{};
        }
        for (int i : data.sorted_order(v)) {
            ScanState& s = st[route[i]];
            const double val = data.value(i, v);
            if (s.started && val > s.prev && s.left.count >= min_leaf) {
                const GaussianStats right = total[route[i]] - s.left;
                if (right.count >= min_leaf) {
                    const double delta = leaf_log_marginal(s.left, prior) +
                                         leaf_log_marginal(right, prior) - base[route[i]] -
                                         prior.lambda_s;
                    SplitCand& lb = leaf_best[route[i]];
                    if (delta > lb.delta) lb = SplitCand{j, route[i], v, val, delta, kNegInf};
                }
            }
            observe_instance(s.left, ctx, i);
            s.prev = val;
            s.started = true;
        }
        for (int l : leaf_ids) {
            const SplitCand& lb = leaf_best[l];
            if (lb.delta > cfg.epsilon) {
                auto pos = std::find_if(pool.begin(), pool.end(),
                                        [&](const SplitCand& c) { return c.delta < lb.delta; });
                pool.insert(pos, lb);
                if (pool.size() > cap) pool.pop_back();
            }
        }
    }
    if (pool.empty()) return std::nullopt;

    for (SplitCand& c : pool)
        c.value = lookahead_value(data, prior, cfg, ctx, rows[c.leaf], legal_vars, c);
    const SplitCand* best = &pool.front();
    for (const SplitCand& c : pool)
        if (c.value > best->value) best = &c;
    return *best;
}

}  // namespace

StepResult structure_step(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior,
                          const SearchConfig& cfg) {
    cfg.check();
    prior.check();
    StepResult res{net, false, {}};
    ModuleNetwork& cur = res.net;
    const int K = cur.module_count();

    ModuleGraph graph = build_module_graph(cur);
    if (auto cyc = find_cycle(graph); !cyc.empty())
        throw CycleError("structure_step: input module graph is cyclic", cyc);

    std::vector<ModuleCtx> ctx;
    ctx.reserve(static_cast<std::size_t>(K));
    for (int j = 0; j < K; ++j) ctx.push_back(make_ctx(data, cur.assignment, j));

    ScoreCache cache(K);
    checked_total(cache, data, cur, prior);

    std::vector<std::optional<SplitCand>> cand(K);
    for (int j = 0; j < K; ++j) cand[j] = best_candidate(data, cur, prior, cfg, j, ctx[j], graph);

    for (;;) {
        int bestj = -1;
        for (int j = 0; j < K; ++j)
            if (cand[j] && (bestj < 0 || cand[j]->value > cand[bestj]->value)) bestj = j;
        if (bestj < 0) break;

        const SplitCand c = *cand[bestj];
        Module& mod = cur.modules[bestj];
        mod.tree = apply_split(mod.tree, c.leaf, c.var, c.threshold);
        auto ppos = std::lower_bound(mod.parents.begin(), mod.parents.end(), c.var);
        if (ppos == mod.parents.end() || *ppos != c.var) mod.parents.insert(ppos, c.var);

        const int src = cur.assignment.module_of(c.var);
        auto& out = graph.edges_out[src];
        auto epos = std::lower_bound(out.begin(), out.end(), bestj);
        if (epos == out.end() || *epos != bestj) out.insert(epos, bestj);

        assert_acyclic_commit(cur);
        cache.mark_stale(bestj);
        const double total = checked_total(cache, data, cur, prior);
        res.commits.push_back({"split", bestj, c.var, total});
        res.improved = true;

        cand[bestj] = best_candidate(data, cur, prior, cfg, bestj, ctx[bestj], graph);
        // New edges can only shrink other modules' legal parent sets; refresh
        // any module whose cached move just became illegal.
        for (int k = 0; k < K; ++k) {
            if (k == bestj || !cand[k]) continue;
            const int ksrc = cur.assignment.module_of(cand[k]->var);
            if (!legal_parent_modules(graph, k)[ksrc])
                cand[k] = best_candidate(data, cur, prior, cfg, k, ctx[k], graph);
        }
    }
    return res;
}

StepResult assignment_step(const Dataset& data, const ModuleNetwork& net, const PriorSpec& prior,
                           const SearchConfig& cfg) {
    cfg.check();
    prior.check();
    StepResult res{net, false, {}};
    ModuleNetwork& cur = res.net;
    const int K = cur.module_count();
    const int n = data.variable_count();
    if (K <= 1) return res;

    {
        const ModuleGraph g = build_module_graph(cur);
        if (auto cyc = find_cycle(g); !cyc.empty())
            throw CycleError("assignment_step: input module graph is cyclic", cyc);
    }

    // cnt[j][k]: how many variables assigned to j parent module k. An edge
    // exists while its count is positive, so moves update in O(|parented|).
    std::vector<std::vector<int>> cnt(K, std::vector<int>(K, 0));
    std::vector<std::vector<int>> parent_of(n);
    for (int k = 0; k < K; ++k)
        for (int v : cur.modules[k].parents) {
            cnt[cur.assignment.module_of(v)][k]++;
            parent_of[v].push_back(k);
        }

    auto acyclic_cnt = [&] {
        std::vector<int> indeg(K, 0);
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                if (cnt[a][b] > 0) indeg[b]++;
        std::vector<int> stack;
        for (int b = 0; b < K; ++b)
            if (indeg[b] == 0) stack.push_back(b);
        int seen = 0;
        while (!stack.empty()) {
            const int a = stack.back();
            stack.pop_back();
            ++seen;
            for (int b = 0; b < K; ++b)
                if (cnt[a][b] > 0 && --indeg[b] == 0) stack.push_back(b);
        }
        return seen == K;
    };

    // Trees are fixed for the whole step, so routing is constant and each
    // variable's leaf statistics can be tabulated once per destination tree.
    std::vector<std::vector<int>> routes(K);
    std::vector<std::vector<int>> leaves(K);
    std::vector<std::vector<std::vector<GaussianStats>>> stats(K);  // [module][var][node]
    for (int j = 0; j < K; ++j) {
        routes[j] = route_instances(cur.modules[j].tree, data);
        leaves[j] = cur.modules[j].tree.leaf_ids();
        stats[j].assign(n, std::vector<GaussianStats>(cur.modules[j].tree.node_count()));
    }
    for (int m = 0; m < data.instance_count(); ++m) {
        const auto row = data.row(m);
        for (int j = 0; j < K; ++j) {
            auto& sj = stats[j];
            const int leaf = routes[j][m];
            for (int v = 0; v < n; ++v) sj[v][leaf].observe(row[v]);
        }
    }

    std::vector<std::vector<GaussianStats>> pooled(K);
    for (int j = 0; j < K; ++j)
        pooled[j].assign(cur.modules[j].tree.node_count(), GaussianStats{});
    for (int v = 0; v < n; ++v) {
        const int j = cur.assignment.module_of(v);
        for (std::size_t t = 0; t < pooled[j].size(); ++t) pooled[j][t] += stats[j][v][t];
    }

    auto llm_sum = [&](int j, const std::vector<GaussianStats>& s) {
        double t = 0.0;
        for (int l : leaves[j]) t += leaf_log_marginal(s[l], prior);
        return t;
    };

    ScoreCache cache(K);
    checked_total(cache, data, cur, prior);

    std::vector<GaussianStats> minus_a, plus_b;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            const int a = cur.assignment.module_of(i);
            const double cur_a = llm_sum(a, pooled[a]);
            minus_a = pooled[a];
            for (std::size_t t = 0; t < minus_a.size(); ++t) minus_a[t] -= stats[a][i][t];
            const double rem_a = llm_sum(a, minus_a);

            double best_delta = cfg.epsilon;
            int best_b = -1;
            for (int b = 0; b < K; ++b) {
                if (b == a) continue;
                if (!parent_of[i].empty()) {
                    for (int k : parent_of[i]) {
                        cnt[a][k]--;
                        cnt[b][k]++;
                    }
                    const bool ok = acyclic_cnt();
                    for (int k : parent_of[i]) {
                        cnt[a][k]++;
                        cnt[b][k]--;
                    }
                    if (!ok) continue;
                }
                plus_b = pooled[b];
                for (std::size_t t = 0; t < plus_b.size(); ++t) plus_b[t] += stats[b][i][t];
                const double delta = rem_a + llm_sum(b, plus_b) - cur_a - llm_sum(b, pooled[b]);
                if (delta > best_delta) {
                    best_delta = delta;
                    best_b = b;
                }
            }
            if (best_b < 0) continue;

            for (int k : parent_of[i]) {
                cnt[a][k]--;
                cnt[best_b][k]++;
            }
            for (std::size_t t = 0; t < pooled[a].size(); ++t) pooled[a][t] -= stats[a][i][t];
            for (std::size_t t = 0; t < pooled[best_b].size(); ++t)
                pooled[best_b][t] += stats[best_b][i][t];
            cur.assignment.assign[i] = best_b;
            assert_acyclic_commit(cur);
            cache.mark_stale(a);
            cache.mark_stale(best_b);
            const double total = checked_total(cache, data, cur, prior);
            res.commits.push_back({"move", best_b, i, total});
            res.improved = true;
            changed = true;
        }
    }
    return res;
}

LearnResult learn(const Dataset& data, const PriorSpec& prior, const SearchConfig& cfg,
                  const ModuleNetwork& init) {
    cfg.check();
    prior.check();
    if (init.module_count() != cfg.K)
        throw std::invalid_argument("init has " + std::to_string(init.module_count()) +
                                    " modules but cfg.K = " + std::to_string(cfg.K));
    if (const auto violations = validate(init, data); !violations.empty())
        throw std::invalid_argument("invalid initial network: " + violations.front());

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    LearnResult out;
    out.net = init;
    auto append = [&](int iteration, const std::vector<CommitRecord>& commits) {
        for (const CommitRecord& c : commits)
            out.trace.push_back({iteration, c.kind, c.module, c.variable, c.score, elapsed()});
    };

    // Assignment sweeps run before tree growth: a clustering-style init can
    // place a module's driving variable among the variables it drives, and
    // the driver can only become testable by moving out before the module's
    // tree has carved the signal into spurious splits (splits are never
    // undone).
    for (int it = 0; it < cfg.max_outer_iters; ++it) {
        StepResult a = assignment_step(data, out.net, prior, cfg);
        out.net = std::move(a.net);
        append(it, a.commits);
        StepResult s = structure_step(data, out.net, prior, cfg);
        out.net = std::move(s.net);
        append(it, s.commits);
        if (!s.improved && !a.improved) break;
    }

    materialize_leaf_params(out.net, data, prior);
    ScoreCache cache(cfg.K);
    out.final_score = checked_total(cache, data, out.net, prior);
    return out;
}

}  // namespace modnet
