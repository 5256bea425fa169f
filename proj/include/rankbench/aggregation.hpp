#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankbench/metric_matrix.hpp"
#include "rankbench/rng.hpp"
#include "rankbench/stats.hpp"
#include "rankbench/warnings.hpp"

namespace rankbench {

// Per-dataset dense ranks of methods, rank 1 = best (highest metric value),
// exact ties get average ranks.
struct RankMatrix {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    std::vector<std::vector<double>> ranks;
};

inline RankMatrix rank_rows(const MetricMatrix& q) {
    RankMatrix r;
    r.datasets = q.datasets;
    r.methods = q.methods;
    r.ranks.reserve(q.num_datasets());
    for (const auto& row : q.values) {
        std::vector<double> neg(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) neg[i] = -row[i];
        r.ranks.push_back(average_ranks(neg));
    }
    return r;
}

struct Leaderboard {
    std::string rule;
    bool higher_is_better = true;
    std::vector<std::string> methods;  // input column order
    std::vector<double> scores;        // aligned with methods
    std::vector<std::size_t> order;    // best first; score ties broken by label

    // Average-tie ranks (1 = best) aligned with `methods`; the drift measure
    // used by the stability harness.
    std::vector<double> ranks() const {
        std::vector<double> keyed(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i)
            keyed[i] = higher_is_better ? -scores[i] : scores[i];
        return average_ranks(keyed);
    }
};

namespace detail {

inline void finalize_order(Leaderboard& lb) {
    lb.order.resize(lb.methods.size());
    std::iota(lb.order.begin(), lb.order.end(), std::size_t{0});
    std::sort(lb.order.begin(), lb.order.end(), [&](std::size_t a, std::size_t b) {
        if (lb.scores[a] != lb.scores[b])
            return lb.higher_is_better ? lb.scores[a] > lb.scores[b] : lb.scores[a] < lb.scores[b];
        return lb.methods[a] < lb.methods[b];
    });
}

}  // namespace detail

// MR: average rank across datasets, lower is better.
inline Leaderboard mean_ranks(const RankMatrix& r) {
    Leaderboard lb;
    lb.rule = "mean-ranks";
    lb.higher_is_better = false;
    lb.methods = r.methods;
    lb.scores.assign(r.methods.size(), 0.0);
    for (const auto& row : r.ranks)
        for (std::size_t i = 0; i < row.size(); ++i) lb.scores[i] += row[i];
    for (auto& s : lb.scores) s /= static_cast<double>(r.ranks.size());
    detail::finalize_order(lb);
    return lb;
}

inline Leaderboard mean_ranks(const MetricMatrix& q) { return mean_ranks(rank_rows(q)); }

enum class MeanKind { arithmetic, geometric, harmonic };

// MA / Geom. mean / Harm. mean of a method's column; a non-positive entry
// collapses the geometric and harmonic scores of that method to 0.
inline Leaderboard mean_aggregate(const MetricMatrix& q, MeanKind kind, Warnings* warnings = nullptr) {
    Leaderboard lb;
    lb.rule = kind == MeanKind::arithmetic ? "ma" : kind == MeanKind::geometric ? "geom-mean" : "harm-mean";
    lb.higher_is_better = true;
    lb.methods = q.methods;
    const double d = static_cast<double>(q.num_datasets());
    for (std::size_t i = 0; i < q.num_methods(); ++i) {
        double acc = 0.0;
        bool degenerate = false;
        for (std::size_t t = 0; t < q.num_datasets(); ++t) {
            const double v = q.values[t][i];
            switch (kind) {
                case MeanKind::arithmetic: acc += v; break;
                case MeanKind::geometric:
                    if (v <= 0) degenerate = true;
                    else acc += std::log(v);
                    break;
                case MeanKind::harmonic:
                    if (v <= 0) degenerate = true;
                    else acc += 1.0 / v;
                    break;
            }
        }
        double score = 0.0;
        if (kind == MeanKind::arithmetic) score = acc / d;
        else if (degenerate) {
            score = 0.0;
            warn(warnings, "mean_aggregate: non-positive value collapses " + lb.rule + " score of '" +
                               q.methods[i] + "' to 0");
        } else score = kind == MeanKind::geometric ? std::exp(acc / d) : d / acc;
        lb.scores.push_back(score);
    }
    detail::finalize_order(lb);
    return lb;
}

// Exact Dolan-More performance profiles: per method the step function
// p_i(beta) = share of datasets with max_j q_tj / q_ti <= beta on [1, beta_hat].
// A zero entry under a positive row maximum never enters the profile; an
// all-zero row counts every method as best.
struct PerformanceProfile {
    double beta_hat = 3.0;
    std::vector<std::string> methods;
    // per method: sorted finite breakpoints (ratio values <= beta_hat)
    std::vector<std::vector<double>> breakpoints;
    std::size_t num_datasets = 0;
    std::vector<double> raw_area;
    std::vector<double> normalized_area;

    double value_at(std::size_t method, double beta) const {
        const auto& bp = breakpoints[method];
        const auto it = std::upper_bound(bp.begin(), bp.end(), beta);
        return static_cast<double>(it - bp.begin()) / static_cast<double>(num_datasets);
    }
};

inline PerformanceProfile dm_profile(const MetricMatrix& q, double beta_hat = 3.0) {
    if (beta_hat < 1.0) throw std::invalid_argument("dm_profile: beta_hat must be >= 1");
    const std::size_t d = q.num_datasets();
    const std::size_t m = q.num_methods();
    PerformanceProfile prof;
    prof.beta_hat = beta_hat;
    prof.methods = q.methods;
    prof.num_datasets = d;
    prof.breakpoints.assign(m, {});

    for (std::size_t t = 0; t < d; ++t) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            if (q.values[t][i] < 0) throw std::invalid_argument("dm_profile: negative metric value");
            row_max = std::max(row_max, q.values[t][i]);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double v = q.values[t][i];
            double ratio;
            if (row_max == 0.0) ratio = 1.0;          // all-zero row: everyone is best
            else if (v == 0.0) continue;              // never within any finite factor
            else ratio = row_max / v;
            if (ratio <= beta_hat) prof.breakpoints[i].push_back(ratio);
        }
    }
    prof.raw_area.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        auto& bp = prof.breakpoints[i];
        std::sort(bp.begin(), bp.end());
        double area = 0.0;
        for (const double r : bp) area += beta_hat - r;
        prof.raw_area[i] = area / static_cast<double>(d);
    }
    const double total = std::accumulate(prof.raw_area.begin(), prof.raw_area.end(), 0.0);
    prof.normalized_area.assign(m, 0.0);
    if (total > 0)
        for (std::size_t i = 0; i < m; ++i) prof.normalized_area[i] = prof.raw_area[i] / total;
    return prof;
}

// Normalized area under the DM curve, higher is better. At beta_hat = 1 the
// areas vanish identically and the beta -> 1+ limit applies: the shares of
// the profile heights p_i(1).
inline Leaderboard dm_auc(const PerformanceProfile& prof) {
    Leaderboard lb;
    lb.rule = "dm-auc";
    lb.higher_is_better = true;
    lb.methods = prof.methods;
    const double total = std::accumulate(prof.raw_area.begin(), prof.raw_area.end(), 0.0);
    if (total > 0) {
        lb.scores = prof.normalized_area;
    } else if (prof.beta_hat == 1.0) {
        double height_total = 0.0;
        std::vector<double> heights(prof.methods.size());
        for (std::size_t i = 0; i < prof.methods.size(); ++i) {
            heights[i] = prof.value_at(i, 1.0);
            height_total += heights[i];
        }
        if (height_total <= 0) throw std::runtime_error("dm_auc: empty profiles");
        for (auto& h : heights) h /= height_total;
        lb.scores = std::move(heights);
    } else {
        throw std::runtime_error("dm_auc: all profile areas are zero");
    }
    detail::finalize_order(lb);
    return lb;
}

inline Leaderboard dm_auc(const MetricMatrix& q, double beta_hat = 3.0) {
    return dm_auc(dm_profile(q, beta_hat));
}

// Leave-best-out: repeatedly remove the DM-AUC winner from the remaining
// methods; the removal iteration is the method's rank (1 = best). AUC ties
// at removal go to the lexicographically first label.
inline Leaderboard dm_lbo(const MetricMatrix& q, double beta_hat = 3.0) {
    const std::size_t m = q.num_methods();
    if (m < 2) throw std::invalid_argument("dm_lbo: need at least 2 methods");
    Leaderboard lb;
    lb.rule = "dm-lbo";
    lb.higher_is_better = false;
    lb.methods = q.methods;
    lb.scores.assign(m, 0.0);

    std::vector<std::size_t> remaining(m);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    for (std::size_t round = 1; !remaining.empty(); ++round) {
        if (remaining.size() == 1) {
            lb.scores[remaining[0]] = static_cast<double>(round);
            break;
        }
        MetricMatrix sub;
        sub.datasets = q.datasets;
        for (const auto i : remaining) sub.methods.push_back(q.methods[i]);
        sub.values.reserve(q.num_datasets());
        for (const auto& row : q.values) {
            std::vector<double> sr;
            sr.reserve(remaining.size());
            for (const auto i : remaining) sr.push_back(row[i]);
            sub.values.push_back(std::move(sr));
        }
        const auto prof = dm_profile(sub, beta_hat);
        std::size_t best = 0;
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            if (prof.normalized_area[i] > prof.normalized_area[best] ||
                (prof.normalized_area[i] == prof.normalized_area[best] &&
                 sub.methods[i] < sub.methods[best]))
                best = i;
        }
        lb.scores[remaining[best]] = static_cast<double>(round);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    detail::finalize_order(lb);
    return lb;
}

namespace detail {

// wins[a][b] = number of datasets where a's metric strictly exceeds b's.
inline std::vector<std::vector<std::size_t>> pairwise_wins(const MetricMatrix& q) {
    const std::size_t m = q.num_methods();
    std::vector<std::vector<std::size_t>> wins(m, std::vector<std::size_t>(m, 0));
    for (const auto& row : q.values)
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                if (a != b && row[a] > row[b]) wins[a][b]++;
    return wins;
}

}  // namespace detail

// Copeland: u(A) = |majority-beaten by A| - |majority-beating A|; ties in
// the majority relation contribute to neither set.
inline Leaderboard copeland(const MetricMatrix& q) {
    const std::size_t m = q.num_methods();
    const auto wins = detail::pairwise_wins(q);
    Leaderboard lb;
    lb.rule = "copeland";
    lb.higher_is_better = true;
    lb.methods = q.methods;
    lb.scores.assign(m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        int u = 0;
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            if (wins[a][b] > wins[b][a]) ++u;
            else if (wins[b][a] > wins[a][b]) --u;
        }
        lb.scores[a] = static_cast<double>(u);
    }
    detail::finalize_order(lb);
    return lb;
}

enum class MinimaxVariant { winning_votes, literal_count };

// Minimax: u(A) = -max_B s(B, A). The default winning-votes variant only
// counts defeats where B majority-beats A, which is what reproduces the
// never-beaten method's -0 score; literal_count takes the formula verbatim.
inline Leaderboard minimax(const MetricMatrix& q, MinimaxVariant variant = MinimaxVariant::winning_votes) {
    const std::size_t m = q.num_methods();
    if (m < 2) throw std::invalid_argument("minimax: need at least 2 methods");
    const auto wins = detail::pairwise_wins(q);
    Leaderboard lb;
    lb.rule = variant == MinimaxVariant::winning_votes ? "minimax" : "minimax-literal";
    lb.higher_is_better = true;
    lb.methods = q.methods;
    lb.scores.assign(m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        double worst = 0.0;
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            double s = static_cast<double>(wins[b][a]);
            if (variant == MinimaxVariant::winning_votes && wins[b][a] <= wins[a][b]) s = 0.0;
            worst = std::max(worst, s);
        }
        lb.scores[a] = -worst;
    }
    detail::finalize_order(lb);
    return lb;
}

// Expected count of top performances under per-cell Gaussian score models:
// w_j = sum over datasets of P(method j attains the maximum), estimated by
// Monte Carlo (exact argmax counting when every sigma is zero).
inline Leaderboard expected_tops(const MetricMatrix& mu, const MetricMatrix& sigma,
                                 std::size_t mc_samples, std::uint64_t seed) {
    if (mu.methods != sigma.methods || mu.datasets != sigma.datasets)
        throw std::invalid_argument("expected_tops: mean/stddev label mismatch");
    if (mc_samples < 1) throw std::invalid_argument("expected_tops: mc_samples must be >= 1");
    const std::size_t d = mu.num_datasets();
    const std::size_t m = mu.num_methods();
    bool all_zero_sigma = true;
    for (const auto& row : sigma.values)
        for (const double s : row) {
            if (s < 0) throw std::invalid_argument("expected_tops: negative stddev");
            if (s > 0) all_zero_sigma = false;
        }

    Leaderboard lb;
    lb.rule = "expected-tops";
    lb.higher_is_better = true;
    lb.methods = mu.methods;
    lb.scores.assign(m, 0.0);

    for (std::size_t t = 0; t < d; ++t) {
        if (all_zero_sigma) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < m; ++i)
                if (mu.values[t][i] > mu.values[t][best]) best = i;
            lb.scores[best] += 1.0;
            continue;
        }
        auto rng = make_rng(derive_seed(seed, "expected_tops", t));
        std::vector<std::size_t> top_counts(m, 0);
        for (std::size_t s = 0; s < mc_samples; ++s) {
            std::size_t best = 0;
            double best_v = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                const double v = sigma.values[t][i] > 0
                                     ? normal(rng, mu.values[t][i], sigma.values[t][i])
                                     : mu.values[t][i];
                if (v > best_v) { best_v = v; best = i; }
            }
            top_counts[best]++;
        }
        for (std::size_t i = 0; i < m; ++i)
            lb.scores[i] += static_cast<double>(top_counts[i]) / static_cast<double>(mc_samples);
    }
    detail::finalize_order(lb);
    return lb;
}

// Row-wise min-max scaling onto [0, 1]; a constant row maps to zeros.
inline MetricMatrix minmax_normalize(const MetricMatrix& q, Warnings* warnings = nullptr) {
    MetricMatrix out = q;
    for (std::size_t t = 0; t < q.num_datasets(); ++t) {
        const auto [mn_it, mx_it] = std::minmax_element(q.values[t].begin(), q.values[t].end());
        const double mn = *mn_it, mx = *mx_it;
        if (mx == mn) {
            warn(warnings, "minmax_normalize: constant row '" + q.datasets[t] + "' maps to zeros");
            std::fill(out.values[t].begin(), out.values[t].end(), 0.0);
            continue;
        }
        for (auto& v : out.values[t]) v = (v - mn) / (mx - mn);
    }
    return out;
}

// The eight aggregation rules of the benchmark.
enum class Rule {
    dm_auc,
    dm_lbo,
    mean_ranks,
    mean_arithmetic,
    mean_geometric,
    mean_harmonic,
    copeland,
    minimax,
};

inline const std::vector<Rule>& all_rules() {
    static const std::vector<Rule> rules = {
        Rule::dm_auc, Rule::dm_lbo, Rule::mean_ranks, Rule::mean_arithmetic,
        Rule::mean_geometric, Rule::mean_harmonic, Rule::copeland, Rule::minimax};
    return rules;
}

inline std::string rule_name(Rule r) {
    switch (r) {
        case Rule::dm_auc: return "dm-auc";
        case Rule::dm_lbo: return "dm-lbo";
        case Rule::mean_ranks: return "mean-ranks";
        case Rule::mean_arithmetic: return "ma";
        case Rule::mean_geometric: return "geom-mean";
        case Rule::mean_harmonic: return "harm-mean";
        case Rule::copeland: return "copeland";
        case Rule::minimax: return "minimax";
    }
    return "?";
}

inline Rule rule_from_name(const std::string& name) {
    for (const Rule r : all_rules())
        if (rule_name(r) == name) return r;
    throw std::invalid_argument("unknown aggregation rule '" + name + "'");
}

struct AggregationOptions {
    double beta_hat = 3.0;
    MinimaxVariant minimax_variant = MinimaxVariant::winning_votes;
    Warnings* warnings = nullptr;
};

inline Leaderboard aggregate(const MetricMatrix& q, Rule rule, const AggregationOptions& opt = {}) {
    switch (rule) {
        case Rule::dm_auc: return dm_auc(q, opt.beta_hat);
        case Rule::dm_lbo: return dm_lbo(q, opt.beta_hat);
        case Rule::mean_ranks: return mean_ranks(q);
        case Rule::mean_arithmetic: return mean_aggregate(q, MeanKind::arithmetic, opt.warnings);
        case Rule::mean_geometric: return mean_aggregate(q, MeanKind::geometric, opt.warnings);
        case Rule::mean_harmonic: return mean_aggregate(q, MeanKind::harmonic, opt.warnings);
        case Rule::copeland: return copeland(q);
        case Rule::minimax: return minimax(q, opt.minimax_variant);
    }
    throw std::logic_error("aggregate: unhandled rule");
}

}  // namespace rankbench
