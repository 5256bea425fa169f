#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rankbench/interactions.hpp"
#include "rankbench/metric_matrix.hpp"
#include "rankbench/rng.hpp"
#include "rankbench/stats.hpp"
#include "rankbench/warnings.hpp"

namespace rankbench {

// Per-user relevant test items plus the evaluated user set M. Users with an
// empty truth set are excluded from M.
struct GroundTruth {
    std::vector<std::uint32_t> users;                       // M, ascending
    std::vector<std::vector<std::uint32_t>> relevant;       // parallel to users, sorted

    std::size_t num_users() const { return users.size(); }
};

inline GroundTruth make_ground_truth(const InteractionSet& test) {
    std::map<std::uint32_t, std::vector<std::uint32_t>> by_user;
    for (const auto& r : test.records) by_user[r.user].push_back(r.item);
    GroundTruth truth;
    for (auto& [user, items] : by_user) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
        if (items.empty()) continue;
        truth.users.push_back(user);
        truth.relevant.push_back(std::move(items));
    }
    return truth;
}

// Top-k lists per evaluated user; parallel arrays sorted by user index.
struct RecommendationLists {
    int k = 0;
    std::vector<std::uint32_t> users;
    std::vector<std::vector<std::uint32_t>> items;

    const std::vector<std::uint32_t>* find(std::uint32_t user) const {
        auto it = std::lower_bound(users.begin(), users.end(), user);
        if (it == users.end() || *it != user) return nullptr;
        return &items[static_cast<std::size_t>(it - users.begin())];
    }
};

struct UserAccuracy {
    double precision = 0, recall = 0, map = 0, ndcg = 0, mrr = 0, hitrate = 0;
};

// The six per-user accuracy metrics at cutoff k with the modified
// k_m(u) = min(k, |relevant|) normalization.
inline UserAccuracy user_accuracy(const std::vector<std::uint32_t>& recs_u,
                                  const std::vector<std::uint32_t>& rel_u, int k) {
    if (rel_u.empty()) throw std::invalid_argument("user_accuracy: empty relevant set");
    {
        std::unordered_set<std::uint32_t> dedup(recs_u.begin(), recs_u.end());
        if (dedup.size() != recs_u.size())
            throw std::invalid_argument("user_accuracy: duplicate items in recommendations");
    }
    const std::size_t km = std::min<std::size_t>(static_cast<std::size_t>(k), rel_u.size());
    const std::unordered_set<std::uint32_t> rel(rel_u.begin(), rel_u.end());

    UserAccuracy a;
    std::size_t hits = 0;
    double ap_sum = 0.0;
    double dcg = 0.0;
    std::size_t first_hit = 0;
    const std::size_t depth = std::min<std::size_t>(recs_u.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < depth; ++r) {
        if (rel.count(recs_u[r]) == 0) continue;
        ++hits;
        ap_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        dcg += 1.0 / std::log2(static_cast<double>(r + 2));
        if (first_hit == 0) first_hit = r + 1;
    }
    double idcg = 0.0;
    for (std::size_t r = 1; r <= km; ++r) idcg += 1.0 / std::log2(static_cast<double>(r + 1));

    a.precision = static_cast<double>(hits) / static_cast<double>(km);
    a.recall = static_cast<double>(hits) / static_cast<double>(rel_u.size());
    a.map = ap_sum / static_cast<double>(km);
    a.ndcg = idcg > 0 ? dcg / idcg : 0.0;
    a.mrr = first_hit > 0 ? 1.0 / static_cast<double>(first_hit) : 0.0;
    a.hitrate = hits > 0 ? 1.0 : 0.0;
    return a;
}

struct CatalogMetrics {
    double coverage = 0, diversity = 0, novelty = 0;
};

namespace detail {

// Train-column cosine between two items: |users(i) n users(j)| / sqrt(ci*cj).
struct ItemCosine {
    std::vector<std::vector<std::uint32_t>> users_of;  // sorted user lists per item

    explicit ItemCosine(const InteractionSet& train) : users_of(train.num_items()) {
        for (const auto& r : train.records) users_of[r.item].push_back(r.user);
        for (auto& v : users_of) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
    }

    double operator()(std::uint32_t i, std::uint32_t j) const {
        const auto& a = users_of[i];
        const auto& b = users_of[j];
        if (a.empty() || b.empty()) return 0.0;
        std::size_t inter = 0;
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
            if (*ia < *ib) ++ia;
            else if (*ib < *ia) ++ib;
            else { ++inter; ++ia; ++ib; }
        }
        return static_cast<double>(inter) /
               (std::sqrt(static_cast<double>(a.size())) * std::sqrt(static_cast<double>(b.size())));
    }
};

}  // namespace detail

// Coverage, diversity (1 - intra-list cosine similarity) and novelty over the
// whole recommendation table. Lists shorter than two items contribute 0 to
// the intra-list mean. Novelty weighs each distinct recommended item by the
// share of users who received it and by -log2 of its train popularity
// p(i) = |train users of i| / |train users|.
inline CatalogMetrics catalog_metrics(const RecommendationLists& all_recs,
                                      const InteractionSet& train, int k,
                                      Warnings* warnings = nullptr) {
    std::vector<char> is_train_item(train.num_items(), 0);
    std::vector<char> is_train_user(train.num_users(), 0);
    std::vector<std::size_t> item_users(train.num_items(), 0);
    {
        std::vector<std::vector<std::uint32_t>> users_of(train.num_items());
        for (const auto& r : train.records) {
            is_train_item[r.item] = 1;
            is_train_user[r.user] = 1;
            users_of[r.item].push_back(r.user);
        }
        for (std::size_t i = 0; i < users_of.size(); ++i) {
            auto& v = users_of[i];
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            item_users[i] = v.size();
        }
    }
    const double n_catalog = static_cast<double>(std::count(is_train_item.begin(), is_train_item.end(), 1));
    const double n_train_users = static_cast<double>(std::count(is_train_user.begin(), is_train_user.end(), 1));
    if (n_catalog == 0) throw std::runtime_error("catalog_metrics: train has no items");

    detail::ItemCosine cosine(train);

    std::unordered_map<std::uint32_t, std::size_t> received_by;  // item -> users who got it
    double il_sum = 0.0;
    std::size_t n_users = 0;
    bool short_list_seen = false;
    for (std::size_t ui = 0; ui < all_recs.users.size(); ++ui) {
        const auto& list = all_recs.items[ui];
        const std::size_t len = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
        ++n_users;
        for (std::size_t a = 0; a < len; ++a) {
            if (list[a] >= train.num_items() || !is_train_item[list[a]])
                throw std::runtime_error("catalog_metrics: recommended item missing from train");
            received_by[list[a]]++;
        }
        if (len < 2) {
            short_list_seen = true;
            continue;  // contributes 0 to the intra-list sum
        }
        double pair_sum = 0.0;
        for (std::size_t a = 0; a < len; ++a)
            for (std::size_t b = a + 1; b < len; ++b) pair_sum += cosine(list[a], list[b]);
        il_sum += pair_sum / (static_cast<double>(len) * static_cast<double>(len - 1) / 2.0);
    }
    if (short_list_seen) warn(warnings, "catalog_metrics: list with fewer than 2 items contributes IL=0");
    if (n_users == 0) throw std::runtime_error("catalog_metrics: no users");

    CatalogMetrics cm;
    cm.coverage = static_cast<double>(received_by.size()) / n_catalog;
    cm.diversity = 1.0 - il_sum / static_cast<double>(n_users);
    double novelty = 0.0;
    for (const auto& [item, cnt] : received_by) {
        const double p = static_cast<double>(item_users[item]) / n_train_users;
        if (p <= 0) continue;  // unreachable given the train-membership check
        novelty += (static_cast<double>(cnt) / static_cast<double>(n_users)) * (-std::log2(p));
    }
    cm.novelty = novelty;
    return cm;
}

struct MetricReport {
    // (metric name, k) -> value; std::map keeps the serialization order
    // (metric name, then k) stable.
    std::map<std::pair<std::string, int>, double> values;
    std::size_t user_count = 0;

    double at(const std::string& metric, int k) const {
        auto it = values.find({metric, k});
        if (it == values.end()) throw std::out_of_range("MetricReport: no " + metric + "@" + std::to_string(k));
        return it->second;
    }
};

inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {
        "precision", "recall", "map", "ndcg", "mrr", "hitrate", "coverage", "diversity", "novelty"};
    return names;
}

// Uniform average over the evaluated users M for the accuracy metrics plus
// the three catalog metrics, per cutoff. Lists longer than k are truncated.
inline MetricReport evaluate(const RecommendationLists& recs, const GroundTruth& truth,
                             const InteractionSet& train, const std::vector<int>& k_list,
                             Warnings* warnings = nullptr) {
    if (truth.users.empty()) throw std::runtime_error("evaluate: no users with ground truth");
    MetricReport report;
    report.user_count = truth.users.size();
    for (const int k : k_list) {
        double p = 0, rc = 0, mp = 0, nd = 0, mr = 0, hr = 0;
        RecommendationLists truncated;
        truncated.k = k;
        for (std::size_t ui = 0; ui < truth.users.size(); ++ui) {
            const auto* list = recs.find(truth.users[ui]);
            static const std::vector<std::uint32_t> empty;
            const auto& full = list != nullptr ? *list : empty;
            std::vector<std::uint32_t> cut(full.begin(),
                                           full.begin() + std::min<std::size_t>(full.size(), static_cast<std::size_t>(k)));
            const auto acc = user_accuracy(cut, truth.relevant[ui], k);
            p += acc.precision;
            rc += acc.recall;
            mp += acc.map;
            nd += acc.ndcg;
            mr += acc.mrr;
            hr += acc.hitrate;
            truncated.users.push_back(truth.users[ui]);
            truncated.items.push_back(std::move(cut));
        }
        const double n = static_cast<double>(truth.users.size());
        report.values[{"precision", k}] = p / n;
        report.values[{"recall", k}] = rc / n;
        report.values[{"map", k}] = mp / n;
        report.values[{"ndcg", k}] = nd / n;
        report.values[{"mrr", k}] = mr / n;
        report.values[{"hitrate", k}] = hr / n;
        const auto cm = catalog_metrics(truncated, train, k, warnings);
        report.values[{"coverage", k}] = cm.coverage;
        report.values[{"diversity", k}] = cm.diversity;
        report.values[{"novelty", k}] = cm.novelty;
    }
    return report;
}

struct BootstrapSeries {
    std::vector<double> values;  // one per iteration
    double mean = 0.0;
    double stddev = 0.0;  // population (1/R) form
};

struct BootstrapReport {
    int k = 0;
    std::size_t iterations = 0;
    std::map<std::string, BootstrapSeries> series;  // metric -> series
};

// Resamples floor(fraction*|M|) users with replacement per iteration and
// recomputes all nine metrics over the resampled multiset.
inline BootstrapReport bootstrap_evaluate(const RecommendationLists& recs, const GroundTruth& truth,
                                          const InteractionSet& train, int k,
                                          std::size_t iterations = 100, double sample_fraction = 0.8,
                                          std::uint64_t seed = 0) {
    if (truth.users.empty()) throw std::runtime_error("bootstrap_evaluate: no users");
    if (iterations < 2) throw std::invalid_argument("bootstrap_evaluate: iterations must be >= 2");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
        throw std::invalid_argument("bootstrap_evaluate: fraction must be in (0, 1]");

    const std::size_t n = truth.users.size();
    const std::size_t draw = std::max<std::size_t>(1, static_cast<std::size_t>(
        std::floor(sample_fraction * static_cast<double>(n))));

    // Per-user accuracy and per-user truncated lists computed once.
    std::vector<UserAccuracy> acc(n);
    std::vector<std::vector<std::uint32_t>> lists(n);
    for (std::size_t ui = 0; ui < n; ++ui) {
        const auto* list = recs.find(truth.users[ui]);
        static const std::vector<std::uint32_t> empty;
        const auto& full = list != nullptr ? *list : empty;
        lists[ui].assign(full.begin(),
                         full.begin() + std::min<std::size_t>(full.size(), static_cast<std::size_t>(k)));
        acc[ui] = user_accuracy(lists[ui], truth.relevant[ui], k);
    }

    BootstrapReport report;
    report.k = k;
    report.iterations = iterations;
    for (const auto& name : metric_names()) report.series[name].values.reserve(iterations);

    auto rng = make_rng(seed);
    for (std::size_t it = 0; it < iterations; ++it) {
        RecommendationLists sampled;
        sampled.k = k;
        double p = 0, rc = 0, mp = 0, nd = 0, mr = 0, hr = 0;
        GroundTruth sampled_truth;
        for (std::size_t s = 0; s < draw; ++s) {
            const auto ui = static_cast<std::size_t>(uniform_int(rng, 0, n - 1));
            p += acc[ui].precision;
            rc += acc[ui].recall;
            mp += acc[ui].map;
            nd += acc[ui].ndcg;
            mr += acc[ui].mrr;
            hr += acc[ui].hitrate;
            sampled.users.push_back(truth.users[ui]);
            sampled.items.push_back(lists[ui]);
        }
        const double dn = static_cast<double>(draw);
        const auto cm = catalog_metrics(sampled, train, k, nullptr);
        report.series["precision"].values.push_back(p / dn);
        report.series["recall"].values.push_back(rc / dn);
        report.series["map"].values.push_back(mp / dn);
        report.series["ndcg"].values.push_back(nd / dn);
        report.series["mrr"].values.push_back(mr / dn);
        report.series["hitrate"].values.push_back(hr / dn);
        report.series["coverage"].values.push_back(cm.coverage);
        report.series["diversity"].values.push_back(cm.diversity);
        report.series["novelty"].values.push_back(cm.novelty);
    }
    for (auto& [name, s] : report.series) {
        double sum = 0;
        for (double v : s.values) sum += v;
        s.mean = sum / static_cast<double>(s.values.size());
        double sq = 0;
        for (double v : s.values) sq += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(sq / static_cast<double>(s.values.size()));
    }
    return report;
}

struct CorrelationMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;
};

// Spearman correlation between metric pairs across methods, computed per
// dataset and averaged. A dataset where a metric is constant across methods
// contributes 0 for pairs involving it.
inline CorrelationMatrix metric_correlation(const std::vector<MetricMatrix>& per_metric,
                                            Warnings* warnings = nullptr) {
    if (per_metric.empty()) throw std::invalid_argument("metric_correlation: no metrics");
    const std::size_t d = per_metric.front().num_datasets();
    const std::size_t m = per_metric.front().num_methods();
    if (m < 3) throw std::invalid_argument("metric_correlation: need at least 3 methods");
    for (const auto& q : per_metric)
        if (q.num_datasets() != d || q.num_methods() != m)
            throw std::invalid_argument("metric_correlation: mismatched matrix shapes");

    const std::size_t p = per_metric.size();
    CorrelationMatrix out;
    out.labels.reserve(p);
    for (const auto& q : per_metric)
        out.labels.push_back(q.k > 0 ? q.metric + "@" + std::to_string(q.k) : q.metric);
    out.values.assign(p, std::vector<double>(p, 1.0));

    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            double sum = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                Warnings local;
                const double rho = spearman(per_metric[a].values[t], per_metric[b].values[t], &local);
                if (!local.empty())
                    warn(warnings, "metric_correlation: constant metric on dataset '" +
                                       per_metric[a].datasets[t] + "' contributes 0");
                sum += rho;
            }
            out.values[a][b] = out.values[b][a] = sum / static_cast<double>(d);
        }
    }
    return out;
}

}  // namespace rankbench
