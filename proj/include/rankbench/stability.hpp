#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankbench/aggregation.hpp"
#include "rankbench/metric_matrix.hpp"
#include "rankbench/rng.hpp"
#include "rankbench/stats.hpp"

namespace rankbench {

struct StabilityReport {
    std::string kind;
    std::string rule;
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<std::size_t> count;
};

namespace detail {

inline MetricMatrix rows_subset(const MetricMatrix& q, const std::vector<std::size_t>& rows) {
    MetricMatrix out;
    out.metric = q.metric;
    out.k = q.k;
    out.methods = q.methods;
    for (const auto t : rows) {
        out.datasets.push_back(q.datasets[t]);
        out.values.push_back(q.values[t]);
    }
    return out;
}

inline MetricMatrix cols_subset(const MetricMatrix& q, const std::vector<std::size_t>& cols) {
    MetricMatrix out;
    out.metric = q.metric;
    out.k = q.k;
    out.datasets = q.datasets;
    for (const auto i : cols) out.methods.push_back(q.methods[i]);
    out.values.reserve(q.num_datasets());
    for (const auto& row : q.values) {
        std::vector<double> r;
        r.reserve(cols.size());
        for (const auto i : cols) r.push_back(row[i]);
        out.values.push_back(std::move(r));
    }
    return out;
}

inline std::vector<double> restrict(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (const auto i : idx) out.push_back(v[i]);
    return out;
}

// Drift between two rankings. Identical average-tie rank vectors mean the
// relative order did not move at all, so the drift is 1 even when both
// rankings are degenerate (all tied); otherwise an all-tied ranking
// correlates 0 with anything, which is the desired collapse signal.
inline double ranking_spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (average_ranks(a) == average_ranks(b)) return 1.0;
    Warnings sink;
    return spearman(a, b, &sink);
}

inline void push_point(StabilityReport& rep, double grid_value, const std::vector<double>& samples) {
    double mean = 0.0;
    for (const double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (const double s : samples) var += (s - mean) * (s - mean);
    rep.grid.push_back(grid_value);
    rep.mean.push_back(mean);
    rep.stddev.push_back(std::sqrt(var / static_cast<double>(samples.size())));
    rep.count.push_back(samples.size());
}

}  // namespace detail

// Ranking drift when datasets are dropped: per drop count, `trials` uniform
// row subsets, Spearman of the subset ranking against the full-matrix
// reference ranking.
inline StabilityReport drop_datasets_curve(const MetricMatrix& q, Rule rule,
                                           const std::vector<std::size_t>& drops,
                                           std::size_t trials, std::uint64_t seed,
                                           const AggregationOptions& opt = {}) {
    const std::size_t d = q.num_datasets();
    for (const auto n : drops)
        if (n >= d) throw std::invalid_argument("drop_datasets_curve: cannot drop all datasets");
    const auto reference = aggregate(q, rule, opt).ranks();

    StabilityReport rep;
    rep.kind = "drop-datasets";
    rep.rule = rule_name(rule);
    for (const auto n : drops) {
        std::vector<double> samples;
        samples.reserve(trials);
        for (std::size_t trial = 0; trial < trials; ++trial) {
            auto rng = make_rng(derive_seed(seed, "drop_datasets", n, trial));
            auto keep = sample_without_replacement(d, d - n, rng);
            std::sort(keep.begin(), keep.end());
            const auto sub = detail::rows_subset(q, keep);
            samples.push_back(detail::ranking_spearman(aggregate(sub, rule, opt).ranks(), reference));
        }
        detail::push_point(rep, static_cast<double>(n), samples);
    }
    return rep;
}

// Consistency between two independent small subsets: `pairs` pairs of
// size-`subset_size` row subsets, Spearman between the two subset rankings.
inline StabilityReport subset_pair_consistency(const MetricMatrix& q, Rule rule,
                                               std::size_t subset_size, std::size_t pairs,
                                               std::uint64_t seed,
                                               const AggregationOptions& opt = {}) {
    const std::size_t d = q.num_datasets();
    if (subset_size > d) throw std::invalid_argument("subset_pair_consistency: subset larger than matrix");
    StabilityReport rep;
    rep.kind = "subset-pairs";
    rep.rule = rule_name(rule);
    std::vector<double> samples;
    samples.reserve(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
        auto rng_a = make_rng(derive_seed(seed, "subset_pairs", p, std::size_t{0}));
        auto rng_b = make_rng(derive_seed(seed, "subset_pairs", p, std::size_t{1}));
        auto rows_a = sample_without_replacement(d, subset_size, rng_a);
        auto rows_b = sample_without_replacement(d, subset_size, rng_b);
        std::sort(rows_a.begin(), rows_a.end());
        std::sort(rows_b.begin(), rows_b.end());
        const auto ra = aggregate(detail::rows_subset(q, rows_a), rule, opt).ranks();
        const auto rb = aggregate(detail::rows_subset(q, rows_b), rule, opt).ranks();
        samples.push_back(detail::ranking_spearman(ra, rb));
    }
    detail::push_point(rep, static_cast<double>(subset_size), samples);
    return rep;
}

// Ranking drift when methods are dropped: Spearman over the surviving
// methods' ranking vs their relative order in the reference.
inline StabilityReport drop_methods_curve(const MetricMatrix& q, Rule rule,
                                          const std::vector<std::size_t>& drops,
                                          std::size_t trials, std::uint64_t seed,
                                          const AggregationOptions& opt = {}) {
    const std::size_t m = q.num_methods();
    for (const auto n : drops)
        if (n + 2 > m) throw std::invalid_argument("drop_methods_curve: must keep at least 2 methods");
    const auto reference = aggregate(q, rule, opt).ranks();

    StabilityReport rep;
    rep.kind = "drop-methods";
    rep.rule = rule_name(rule);
    for (const auto n : drops) {
        std::vector<double> samples;
        samples.reserve(trials);
        for (std::size_t trial = 0; trial < trials; ++trial) {
            auto rng = make_rng(derive_seed(seed, "drop_methods", n, trial));
            auto keep = sample_without_replacement(m, m - n, rng);
            std::sort(keep.begin(), keep.end());
            const auto sub = detail::cols_subset(q, keep);
            samples.push_back(detail::ranking_spearman(aggregate(sub, rule, opt).ranks(),
                                                       detail::restrict(reference, keep)));
        }
        detail::push_point(rep, static_cast<double>(n), samples);
    }
    return rep;
}

struct InjectionResult {
    Leaderboard perturbed;
    double spearman = 1.0;  // over the original methods only
};

namespace detail {

inline std::string fresh_label(const MetricMatrix& q, std::string base) {
    while (std::find(q.methods.begin(), q.methods.end(), base) != q.methods.end()) base += "+";
    return base;
}

inline InjectionResult inject_column(const MetricMatrix& q, Rule rule,
                                     const std::string& label, const std::vector<double>& column,
                                     const AggregationOptions& opt) {
    MetricMatrix ext = q;
    ext.methods.push_back(label);
    for (std::size_t t = 0; t < q.num_datasets(); ++t) ext.values[t].push_back(column[t]);

    const auto before = aggregate(q, rule, opt).ranks();
    InjectionResult res;
    res.perturbed = aggregate(ext, rule, opt);
    std::vector<std::size_t> originals(q.num_methods());
    std::iota(originals.begin(), originals.end(), std::size_t{0});
    res.spearman = ranking_spearman(before, restrict(res.perturbed.ranks(), originals));
    return res;
}

}  // namespace detail

// Appends a clone of `target` scaled by alpha and measures the drift of the
// original methods' relative order.
inline InjectionResult add_similar_method(const MetricMatrix& q, Rule rule, std::size_t target,
                                          double alpha, const AggregationOptions& opt = {},
                                          Warnings* warnings = nullptr) {
    if (target >= q.num_methods()) throw std::invalid_argument("add_similar_method: bad target index");
    if (std::fabs(1.0 - alpha) > 0.15)
        warn(warnings, "add_similar_method: |1 - alpha| > 0.15 leaves the paper's regime");
    std::vector<double> column(q.num_datasets());
    for (std::size_t t = 0; t < q.num_datasets(); ++t) column[t] = alpha * q.values[t][target];
    return detail::inject_column(q, rule, detail::fresh_label(q, q.methods[target] + "_clone"), column, opt);
}

// Appends a column of alpha times the per-dataset best value.
inline InjectionResult add_best_method(const MetricMatrix& q, Rule rule, double alpha,
                                       const AggregationOptions& opt = {}) {
    if (alpha < 1.0 || alpha > 4.0)
        throw std::invalid_argument("add_best_method: alpha must lie in [1, 4]");
    std::vector<double> column(q.num_datasets());
    for (std::size_t t = 0; t < q.num_datasets(); ++t)
        column[t] = alpha * *std::max_element(q.values[t].begin(), q.values[t].end());
    return detail::inject_column(q, rule, detail::fresh_label(q, "injected_best"), column, opt);
}

// Spearman of the DM ranking at each beta_hat in `grid` against the ranking
// at the reference beta_hat. Only the DM rules react to beta_hat.
inline StabilityReport beta_sensitivity(const MetricMatrix& q, Rule rule,
                                        const std::vector<double>& grid,
                                        double reference_beta = 3.0) {
    if (rule != Rule::dm_auc && rule != Rule::dm_lbo)
        throw std::invalid_argument("beta_sensitivity: only dm-auc and dm-lbo take beta_hat");
    for (const double b : grid)
        if (b < 1.0) throw std::invalid_argument("beta_sensitivity: beta_hat must be >= 1");
    AggregationOptions ref_opt;
    ref_opt.beta_hat = reference_beta;
    const auto reference = aggregate(q, rule, ref_opt).ranks();

    StabilityReport rep;
    rep.kind = "beta-sensitivity";
    rep.rule = rule_name(rule);
    for (const double b : grid) {
        AggregationOptions opt;
        opt.beta_hat = b;
        const auto ranks = aggregate(q, rule, opt).ranks();
        detail::push_point(rep, b, {detail::ranking_spearman(ranks, reference)});
    }
    return rep;
}

struct ParetoCheck {
    bool ok = true;
    std::vector<std::pair<std::string, std::string>> violations;  // (dominant, ranked above it)
};

// Verifies that a method whose column weakly dominates another's (with at
// least one strict inequality) is never ranked below it (rank 1 = best).
inline ParetoCheck pareto_check_ranks(const MetricMatrix& q, const std::vector<double>& ranks) {
    const std::size_t m = q.num_methods();
    ParetoCheck out;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            bool weak = true, strict = false;
            for (std::size_t t = 0; t < q.num_datasets(); ++t) {
                if (q.values[t][a] < q.values[t][b]) { weak = false; break; }
                if (q.values[t][a] > q.values[t][b]) strict = true;
            }
            if (weak && strict && ranks[a] > ranks[b]) {
                out.ok = false;
                out.violations.emplace_back(q.methods[a], q.methods[b]);
            }
        }
    }
    return out;
}

inline ParetoCheck pareto_check(const MetricMatrix& q, Rule rule, const AggregationOptions& opt = {}) {
    return pareto_check_ranks(q, aggregate(q, rule, opt).ranks());
}

}  // namespace rankbench
