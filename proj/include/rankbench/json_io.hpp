#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "rankbench/aggregation.hpp"
#include "rankbench/characteristics.hpp"
#include "rankbench/metrics.hpp"
#include "rankbench/selection.hpp"
#include "rankbench/stability.hpp"
#include "rankbench/stats.hpp"

namespace rankbench {

using json = nlohmann::json;

inline json leaderboard_to_json(const Leaderboard& lb) {
    json entries = json::array();
    for (std::size_t pos = 0; pos < lb.order.size(); ++pos) {
        const auto i = lb.order[pos];
        entries.push_back({{"position", pos + 1}, {"method", lb.methods[i]}, {"score", lb.scores[i]}});
    }
    return json{{"rule", lb.rule}, {"higher_is_better", lb.higher_is_better}, {"entries", entries}};
}

// Delimited leaderboard: position,method,score.
inline void write_leaderboard_csv(std::ostream& out, const Leaderboard& lb, char delim = ',') {
    out << "position" << delim << "method" << delim << "score\n";
    for (std::size_t pos = 0; pos < lb.order.size(); ++pos) {
        const auto i = lb.order[pos];
        out << pos + 1 << delim << lb.methods[i] << delim << format_double(lb.scores[i]) << "\n";
    }
}

inline json metric_report_to_json(const MetricReport& report) {
    json values = json::array();
    for (const auto& [key, value] : report.values)
        values.push_back({{"metric", key.first}, {"k", key.second}, {"value", value}});
    return json{{"user_count", report.user_count}, {"values", values}};
}

// Flat delimited report: metric,k,value in (metric name, k) order.
inline void write_metric_report_csv(std::ostream& out, const MetricReport& report, char delim = ',') {
    out << "metric" << delim << "k" << delim << "value\n";
    for (const auto& [key, value] : report.values)
        out << key.first << delim << key.second << delim << format_double(value) << "\n";
}

inline json profile_to_json(const PerformanceProfile& prof) {
    json methods = json::array();
    for (std::size_t i = 0; i < prof.methods.size(); ++i) {
        json steps = json::array();
        steps.push_back({{"beta", 1.0}, {"p", prof.value_at(i, 1.0)}});
        for (const double bp : prof.breakpoints[i]) {
            if (bp <= 1.0) continue;
            steps.push_back({{"beta", bp}, {"p", prof.value_at(i, bp)}});
        }
        methods.push_back({{"method", prof.methods[i]},
                           {"raw_area", prof.raw_area[i]},
                           {"normalized_area", prof.normalized_area[i]},
                           {"steps", steps}});
    }
    return json{{"beta_hat", prof.beta_hat}, {"num_datasets", prof.num_datasets}, {"methods", methods}};
}

inline json pairwise_tests_to_json(const PairwiseTestReport& report) {
    json pairs = json::array();
    const std::size_t m = report.methods.size();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            json entry{{"method_a", report.methods[a]}, {"method_b", report.methods[b]}};
            if (report.has_wilcoxon) entry["wilcoxon_adjusted_p"] = report.wilcoxon_adj_p[a][b];
            if (report.has_bayes) {
                entry["bayes"] = {{"p_left", report.bayes[a][b].p_left},
                                  {"p_rope", report.bayes[a][b].p_rope},
                                  {"p_right", report.bayes[a][b].p_right}};
            }
            pairs.push_back(entry);
        }
    }
    return json{{"methods", report.methods},
                {"alpha", report.alpha},
                {"rope", report.rope},
                {"pairs", pairs}};
}

inline json cd_diagram_to_json(const CdDiagramData& data) {
    json cliques_w = json::array(), cliques_b = json::array();
    for (const auto& c : data.wilcoxon_cliques) cliques_w.push_back(c);
    for (const auto& c : data.bayes_cliques) cliques_b.push_back(c);
    return json{{"methods", data.methods},
                {"mean_ranks", data.mean_ranks},
                {"wilcoxon_cliques", cliques_w},
                {"bayes_cliques", cliques_b}};
}

inline json stability_report_to_json(const StabilityReport& rep) {
    return json{{"kind", rep.kind},   {"rule", rep.rule},     {"grid", rep.grid},
                {"mean", rep.mean},   {"stddev", rep.stddev}, {"count", rep.count}};
}

inline json selection_result_to_json(const SelectionResult& result,
                                     const std::vector<std::string>& row_labels) {
    json labels = json::array();
    for (const auto i : result.selected) labels.push_back(row_labels[i]);
    json j{{"method", result.method},
           {"selected_indices", result.selected},
           {"selected", labels},
           {"criterion", result.criterion}};
    if (result.chosen_k > 0) j["k"] = result.chosen_k;
    if (!result.cluster_of.empty()) j["cluster_of"] = result.cluster_of;
    return j;
}

inline json correlation_to_json(const CorrelationMatrix& corr) {
    return json{{"labels", corr.labels}, {"values", corr.values}};
}

inline void write_correlation_csv(std::ostream& out, const CorrelationMatrix& corr, char delim = ',') {
    out << "metric";
    for (const auto& l : corr.labels) out << delim << l;
    out << "\n";
    for (std::size_t a = 0; a < corr.labels.size(); ++a) {
        out << corr.labels[a];
        for (std::size_t b = 0; b < corr.labels.size(); ++b) out << delim << format_double(corr.values[a][b]);
        out << "\n";
    }
}

}  // namespace rankbench
