#include "modnet/merge_init.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "modnet/kernels.hpp"
#include "modnet/rng.hpp"

namespace modnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Block score from per-instance pooled moments.
double score_moments(std::int64_t block_size, const std::vector<double>& sums,
                     const std::vector<double>& sumsqs, const PriorSpec& prior) {
    double total = 0.0;
    for (std::size_t m = 0; m < sums.size(); ++m)
        total += leaf_log_marginal({block_size, sums[m], sumsqs[m]}, prior);
    return total;
}

double merged_pair_score(std::int64_t na, const std::vector<double>& sa,
                         const std::vector<double>& qa, std::int64_t nb,
                         const std::vector<double>& sb, const std::vector<double>& qb,
                         const PriorSpec& prior) {
    double total = 0.0;
    for (std::size_t m = 0; m < sa.size(); ++m)
        total += leaf_log_marginal({na + nb, sa[m] + sb[m], qa[m] + qb[m]}, prior);
    return total;
}

}  // namespace

double merge_score(const Dataset& data, std::span<const int> block, const PriorSpec& prior) {
    if (block.empty()) throw std::invalid_argument("merge_score: empty block");
    prior.check();
    const MemberMoments mm = member_moments(data, block);
    return score_moments(static_cast<std::int64_t>(block.size()), mm.sums, mm.sumsqs, prior);
}

ModuleAssignment initialize(const Dataset& data, const PriorSpec& prior, int K,
                            std::uint64_t seed, const InitOptions& opts) {
    prior.check();
    const int n = data.variable_count();
    if (K < 1 || K > n)
        throw std::invalid_argument("initialize: K = " + std::to_string(K) +
                                    " outside [1, " + std::to_string(n) + "]");

    const std::size_t m = static_cast<std::size_t>(data.instance_count());
    struct Block {
        std::vector<int> members;  // sorted
        std::int64_t size = 0;
        std::vector<double> sums, sumsqs;  // per-instance pooled moments
        double score = 0.0;
    };
    std::vector<Block> blocks(n);
    for (int v = 0; v < n; ++v) {
        Block& b = blocks[v];
        b.members = {v};
        b.size = 1;
        b.sums.assign(m, 0.0);
        b.sumsqs.assign(m, 0.0);
        kernels::add(b.sums, data.column(v));
        kernels::add_squares(b.sumsqs, data.column(v));
        b.score = score_moments(1, b.sums, b.sumsqs, prior);
    }

    auto pair_delta = [&](int a, int b) {
        return merged_pair_score(blocks[a].size, blocks[a].sums, blocks[a].sumsqs, blocks[b].size,
                                 blocks[b].sums, blocks[b].sumsqs, prior) -
               blocks[a].score - blocks[b].score;
    };

    const bool full = opts.subsample_above <= 0 || n <= opts.subsample_above;
    // Cached deltas (a < b); a merge only invalidates rows/columns touching
    // the merged block, every other pair's delta is unaffected.
    std::vector<std::vector<double>> delta;
    if (full) {
        delta.assign(n, {});
        for (int a = 0; a < n; ++a) {
            delta[a].assign(n, kNegInf);
            for (int b = a + 1; b < n; ++b) delta[a][b] = pair_delta(a, b);
        }
    }

    Rng rng(seed);
    std::vector<int> active;
    for (int v = 0; v < n; ++v) active.push_back(v);

    while (static_cast<int>(active.size()) > K) {
        int best_a = -1, best_b = -1;
        double best = kNegInf;
        if (full) {
            for (std::size_t ia = 0; ia < active.size(); ++ia)
                for (std::size_t ib = ia + 1; ib < active.size(); ++ib) {
                    const int a = active[ia], b = active[ib];
                    if (delta[a][b] > best) {
                        best = delta[a][b];
                        best_a = a;
                        best_b = b;
                    }
                }
        } else {
            const std::size_t pairs = active.size() * (active.size() - 1) / 2;
            const std::size_t draws =
                std::min(pairs, static_cast<std::size_t>(opts.subsample_pairs));
            for (std::size_t t = 0; t < draws; ++t) {
                const int ia = rng.index(static_cast<int>(active.size()));
                int ib = rng.index(static_cast<int>(active.size()) - 1);
                if (ib >= ia) ++ib;
                const int a = std::min(active[ia], active[ib]);
                const int b = std::max(active[ia], active[ib]);
                const double d = pair_delta(a, b);
                if (d > best) {
                    best = d;
                    best_a = a;
                    best_b = b;
                }
            }
        }

        // Merge b into a (a < b); agglomeration runs down to K unconditionally,
        // so a negative best delta still merges.
        Block& a = blocks[best_a];
        Block& b = blocks[best_b];
        std::vector<int> merged;
        std::merge(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                   std::back_inserter(merged));
        a.members = std::move(merged);
        a.size += b.size;
        kernels::add(a.sums, b.sums);
        kernels::add(a.sumsqs, b.sumsqs);
        a.score = score_moments(a.size, a.sums, a.sumsqs, prior);
        b.members.clear();
        b.sums.clear();
        b.sumsqs.clear();
        active.erase(std::find(active.begin(), active.end(), best_b));

        if (full) {
            for (int c : active) {
                if (c == best_a) continue;
                const int lo = std::min(c, best_a), hi = std::max(c, best_a);
                delta[lo][hi] = pair_delta(lo, hi);
            }
        }
    }

    // `active` stays ascending (merges fold the higher id into the lower), so
    // numbering blocks in active order is deterministic.
    ModuleAssignment out;
    out.module_count = K;
    out.assign.assign(n, -1);
    for (std::size_t j = 0; j < active.size(); ++j)
        for (int v : blocks[active[j]].members) out.assign[v] = static_cast<int>(j);
    return out;
}

}  // namespace modnet
