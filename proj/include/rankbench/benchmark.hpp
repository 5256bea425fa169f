#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rankbench/aggregation.hpp"
#include "rankbench/characteristics.hpp"
#include "rankbench/interactions.hpp"
#include "rankbench/json_io.hpp"
#include "rankbench/metric_matrix.hpp"
#include "rankbench/metrics.hpp"
#include "rankbench/models.hpp"
#include "rankbench/rng.hpp"
#include "rankbench/warnings.hpp"

namespace rankbench {

enum class FilterKind { none, filter, core };

struct DatasetSpec {
    std::string name;
    std::string path;         // delimited interaction log
    std::string inline_text;  // overrides path when non-empty (tests, fixtures)
    double tau = 0.0;
    WeightScale scale = WeightScale::custom;
    bool collapse_events = false;
    FilterKind filter_kind = FilterKind::filter;
    std::size_t filter_level = 5;
    FilterOrder filter_order = FilterOrder::items_then_users;
    double ratios[3] = {0.8, 0.1, 0.1};
    ColumnSchema schema;
};

struct ModelSpec {
    ModelKind kind = ModelKind::random;
    std::string name;  // defaults to the kind name; must be unique
    std::size_t budget = 40;
};

struct BenchmarkConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    unsigned jobs = 1;
    std::vector<int> k_list = {10};
    std::vector<std::string> metrics = metric_names();
    std::vector<Rule> rules = all_rules();
    double beta_hat = 3.0;
    std::string leaderboard_metric = "ndcg";
    int leaderboard_k = 10;
    std::size_t bootstrap_iterations = 0;  // 0 disables bootstrap matrices
    double bootstrap_fraction = 0.8;
    std::size_t ease_max_items = 20000;
    bool emit_characteristics = true;
    std::vector<DatasetSpec> datasets;
    std::vector<ModelSpec> models;
};

struct CellOutcome {
    bool ok = false;
    std::string error;
    MetricReport report;
    std::optional<BootstrapReport> bootstrap;
};

struct PreparedDataset {
    bool ok = false;
    std::string error;
    SplitBundle bundle;
    InteractionSet trainval;
    GroundTruth truth;
    std::optional<CharacteristicsVector> characteristics;
};

struct BenchmarkResult {
    std::vector<std::string> dataset_names;  // config order
    std::vector<std::string> model_names;
    std::vector<PreparedDataset> datasets;
    std::vector<std::vector<CellOutcome>> cells;  // [dataset][model]
    std::vector<MetricMatrix> matrices;           // per (metric, k), complete columns only
    std::vector<MetricMatrix> bootstrap_mean;     // leaderboard metric only
    std::vector<MetricMatrix> bootstrap_std;
    std::vector<Leaderboard> leaderboards;
    Warnings warnings;

    const MetricMatrix* find_matrix(const std::string& metric, int k) const {
        for (const auto& q : matrices)
            if (q.metric == metric && q.k == k) return &q;
        return nullptr;
    }
};

inline InteractionSet load_dataset(const DatasetSpec& spec) {
    if (!spec.inline_text.empty()) return parse_interactions(spec.inline_text, spec.schema);
    std::ifstream in(spec.path);
    if (!in) throw std::runtime_error("cannot open dataset file '" + spec.path + "'");
    return parse_interactions(in, spec.schema);
}

// Prefilter, binarize, filter, split, prune; the preprocessing front half of
// the pipeline shared by `run`, `ingest` and `chars`.
inline InteractionSet preprocess_dataset(const DatasetSpec& spec) {
    InteractionSet data = load_dataset(spec);
    if (spec.collapse_events) data = event_weight_collapse(data);
    data = binarize(data, spec.tau, spec.scale);
    switch (spec.filter_kind) {
        case FilterKind::none: break;
        case FilterKind::filter: data = f_filter(data, spec.filter_level, spec.filter_order); break;
        case FilterKind::core: data = f_core(data, spec.filter_level); break;
    }
    return data;
}

inline PreparedDataset prepare_dataset(const DatasetSpec& spec, bool with_characteristics) {
    PreparedDataset out;
    try {
        const auto data = preprocess_dataset(spec);
        if (with_characteristics) out.characteristics = compute_characteristics(data);
        out.bundle = prune_cold(temporal_split(data, spec.ratios[0], spec.ratios[1], spec.ratios[2]));
        out.trainval = merge_sets(out.bundle.train, out.bundle.validation);
        out.truth = make_ground_truth(out.bundle.test);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const unsigned n_workers = std::min<unsigned>(jobs, static_cast<unsigned>(count));
    workers.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace detail

inline CellOutcome run_cell(const BenchmarkConfig& config, const PreparedDataset& prepared,
                            const ModelSpec& model, std::size_t dataset_idx, std::size_t model_idx) {
    CellOutcome outcome;
    try {
        ModelConfig mc;
        mc.kind = model.kind;
        mc.seed = derive_seed(config.seed, "model", dataset_idx, model_idx);
        if (model.kind == ModelKind::itemknn || model.kind == ModelKind::ease) {
            mc = tune(model.kind, prepared.bundle, model.budget,
                      derive_seed(config.seed, "tune", dataset_idx, model_idx));
        }
        mc.seed = derive_seed(config.seed, "model", dataset_idx, model_idx);
        const auto fitted = refit_final(mc, prepared.bundle, config.ease_max_items);

        int k_max = 0;
        for (const int k : config.k_list) k_max = std::max(k_max, k);
        const auto recs = recommend_all(*fitted, prepared.truth.users, k_max);
        outcome.report = evaluate(recs, prepared.truth, prepared.trainval, config.k_list, nullptr);
        if (config.bootstrap_iterations > 0) {
            outcome.bootstrap = bootstrap_evaluate(
                recs, prepared.truth, prepared.trainval, config.leaderboard_k,
                config.bootstrap_iterations, config.bootstrap_fraction,
                derive_seed(config.seed, "bootstrap", dataset_idx, model_idx));
        }
        outcome.ok = true;
    } catch (const std::exception& e) {
        outcome.error = e.what();
    }
    return outcome;
}

// The full grid: preprocess every dataset, tune/refit/evaluate every
// (dataset, model) cell on a bounded pool, then assemble metric matrices
// over complete method columns and aggregate the leaderboard rules.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
    if (config.datasets.empty()) throw std::invalid_argument("run_benchmark: no datasets configured");
    if (config.models.size() < 2) throw std::invalid_argument("run_benchmark: need at least two models");

    BenchmarkResult result;
    for (const auto& d : config.datasets) result.dataset_names.push_back(d.name);
    for (const auto& m : config.models)
        result.model_names.push_back(m.name.empty() ? model_kind_name(m.kind) : m.name);
    {
        auto sorted = result.model_names;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("run_benchmark: duplicate model names");
    }

    result.datasets.resize(config.datasets.size());
    detail::parallel_for(config.datasets.size(), config.jobs, [&](std::size_t d) {
        result.datasets[d] = prepare_dataset(config.datasets[d], config.emit_characteristics);
    });

    const std::size_t n_models = config.models.size();
    result.cells.assign(config.datasets.size(), std::vector<CellOutcome>(n_models));
    std::vector<std::pair<std::size_t, std::size_t>> grid;
    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
        if (!result.datasets[d].ok) {
            result.warnings.add("dataset '" + config.datasets[d].name + "' failed: " +
                                result.datasets[d].error);
            continue;
        }
        for (std::size_t m = 0; m < n_models; ++m) grid.emplace_back(d, m);
    }
    detail::parallel_for(grid.size(), config.jobs, [&](std::size_t i) {
        const auto [d, m] = grid[i];
        result.cells[d][m] = run_cell(config, result.datasets[d], config.models[m], d, m);
    });

    // usable datasets: preprocessing succeeded; usable methods: no missing cell
    std::vector<std::size_t> live_datasets;
    for (std::size_t d = 0; d < config.datasets.size(); ++d)
        if (result.datasets[d].ok) live_datasets.push_back(d);
    std::vector<std::size_t> live_models;
    for (std::size_t m = 0; m < n_models; ++m) {
        bool complete = !live_datasets.empty();
        for (const auto d : live_datasets) {
            if (!result.cells[d][m].ok) {
                complete = false;
                result.warnings.add("cell (" + config.datasets[d].name + ", " + result.model_names[m] +
                                    ") failed: " + result.cells[d][m].error);
            }
        }
        if (complete) live_models.push_back(m);
        else result.warnings.add("method '" + result.model_names[m] +
                                 "' excluded from aggregation (missing cells)");
    }

    for (const auto& metric : config.metrics) {
        for (const int k : config.k_list) {
            MetricMatrix q;
            q.metric = metric;
            q.k = k;
            for (const auto m : live_models) q.methods.push_back(result.model_names[m]);
            for (const auto d : live_datasets) {
                q.datasets.push_back(config.datasets[d].name);
                std::vector<double> row;
                row.reserve(live_models.size());
                for (const auto m : live_models) row.push_back(result.cells[d][m].report.at(metric, k));
                q.values.push_back(std::move(row));
            }
            result.matrices.push_back(std::move(q));
        }
    }

    if (config.bootstrap_iterations > 0) {
        MetricMatrix mean, stddev;
        mean.metric = config.leaderboard_metric;
        mean.k = config.leaderboard_k;
        for (const auto m : live_models) mean.methods.push_back(result.model_names[m]);
        stddev = mean;
        for (const auto d : live_datasets) {
            mean.datasets.push_back(config.datasets[d].name);
            stddev.datasets.push_back(config.datasets[d].name);
            std::vector<double> mu_row, sd_row;
            for (const auto m : live_models) {
                const auto& b = result.cells[d][m].bootstrap;
                const auto& series = b->series.at(config.leaderboard_metric);
                mu_row.push_back(series.mean);
                sd_row.push_back(series.stddev);
            }
            mean.values.push_back(std::move(mu_row));
            stddev.values.push_back(std::move(sd_row));
        }
        result.bootstrap_mean.push_back(std::move(mean));
        result.bootstrap_std.push_back(std::move(stddev));
    }

    const auto* lb_matrix = result.find_matrix(config.leaderboard_metric, config.leaderboard_k);
    if (lb_matrix != nullptr && lb_matrix->num_methods() >= 2 && lb_matrix->num_datasets() >= 1) {
        AggregationOptions opt;
        opt.beta_hat = config.beta_hat;
        opt.warnings = &result.warnings;
        for (const Rule rule : config.rules) result.leaderboards.push_back(aggregate(*lb_matrix, rule, opt));
    } else {
        result.warnings.add("leaderboards skipped: no usable " + config.leaderboard_metric + "@" +
                            std::to_string(config.leaderboard_k) + " matrix");
    }
    return result;
}

// Writes via a temp file plus rename so partial runs never corrupt outputs.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

// Emits matrices, leaderboards, optional characteristics and the combined
// JSON report into the output directory; returns the written paths.
inline std::vector<std::string> write_benchmark_outputs(const BenchmarkResult& result,
                                                        const BenchmarkConfig& config) {
    namespace fs = std::filesystem;
    const fs::path dir(config.output_dir);
    std::vector<std::string> written;
    auto emit = [&](const fs::path& name, const std::string& content) {
        const auto path = dir / name;
        atomic_write_file(path, content);
        written.push_back(path.string());
    };

    for (const auto& q : result.matrices) {
        std::ostringstream os;
        write_metric_matrix(os, q);
        emit(q.metric + "@" + std::to_string(q.k) + ".csv", os.str());
    }
    for (std::size_t i = 0; i < result.bootstrap_mean.size(); ++i) {
        std::ostringstream mu, sd;
        write_metric_matrix(mu, result.bootstrap_mean[i]);
        write_metric_matrix(sd, result.bootstrap_std[i]);
        const auto base = result.bootstrap_mean[i].metric + "@" +
                          std::to_string(result.bootstrap_mean[i].k);
        emit(base + ".mean.csv", mu.str());
        emit(base + ".std.csv", sd.str());
    }

    json rules = json::object();
    for (const auto& lb : result.leaderboards) {
        std::ostringstream os;
        write_leaderboard_csv(os, lb);
        emit("leaderboard_" + lb.rule + ".csv", os.str());
        rules[lb.rule] = leaderboard_to_json(lb);
    }
    if (!result.leaderboards.empty()) emit("leaderboards.json", json{{"rules", rules}}.dump(2) + "\n");

    if (config.emit_characteristics) {
        std::ostringstream os;
        write_characteristics_header(os);
        for (std::size_t d = 0; d < result.datasets.size(); ++d)
            if (result.datasets[d].ok && result.datasets[d].characteristics)
                write_characteristics_row(os, result.dataset_names[d], *result.datasets[d].characteristics);
        emit("characteristics.csv", os.str());
    }

    json report;
    report["seed"] = config.seed;
    report["k"] = config.k_list;
    report["metrics"] = config.metrics;
    json cells = json::array();
    for (std::size_t d = 0; d < result.cells.size(); ++d) {
        for (std::size_t m = 0; m < result.cells[d].size(); ++m) {
            const auto& cell = result.cells[d][m];
            json entry{{"dataset", result.dataset_names[d]},
                       {"method", result.model_names[m]},
                       {"status", cell.ok ? "ok" : "missing"}};
            if (!cell.ok) entry["error"] = cell.error;
            else entry["metrics"] = metric_report_to_json(cell.report);
            cells.push_back(entry);
        }
    }
    report["cells"] = cells;
    report["leaderboards"] = rules;
    report["warnings"] = result.warnings.messages;
    emit("report.json", report.dump(2) + "\n");
    return written;
}

}  // namespace rankbench
