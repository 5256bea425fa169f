#pragma once

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rankbench/benchmark.hpp"
#include "rankbench/json_io.hpp"
#include "rankbench/selection.hpp"
#include "rankbench/stability.hpp"
#include "rankbench/svg.hpp"
#include "rankbench/synthetic.hpp"

namespace rankbench::cli {

namespace fs = std::filesystem;

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// "a,b,c" or "start:stop:step" (inclusive stop within 1e-9).
inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double start = 0, stop = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(text);
        if (!(is >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            throw std::runtime_error("bad grid '" + text + "' (want start:stop:step)");
        for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::istringstream is(text);
    std::string cell;
    while (std::getline(is, cell, ',')) out.push_back(std::stod(cell));
    if (out.empty()) throw std::runtime_error("empty grid '" + text + "'");
    return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (const double v : parse_grid(text)) out.push_back(static_cast<std::size_t>(std::llround(v)));
    return out;
}

inline WeightScale scale_from_name(const std::string& name) {
    if (name == "rating_0_5") return WeightScale::rating_0_5;
    if (name == "weight_0_1") return WeightScale::weight_0_1;
    if (name == "custom") return WeightScale::custom;
    throw std::runtime_error("unknown scale '" + name + "'");
}

inline FilterKind filter_from_name(const std::string& name) {
    if (name == "filter") return FilterKind::filter;
    if (name == "core") return FilterKind::core;
    if (name == "none") return FilterKind::none;
    throw std::runtime_error("unknown filter kind '" + name + "'");
}

inline std::vector<Rule> rules_from_arg(const std::string& arg) {
    if (arg == "all") return all_rules();
    std::vector<Rule> rules;
    std::istringstream is(arg);
    std::string cell;
    while (std::getline(is, cell, ',')) rules.push_back(rule_from_name(cell));
    if (rules.empty()) throw std::runtime_error("no rules given");
    return rules;
}

inline BenchmarkConfig config_from_json(const json& j) {
    BenchmarkConfig config;
    config.seed = j.value("seed", std::uint64_t{0});
    config.output_dir = j.value("output", std::string("out"));
    config.jobs = j.value("jobs", 1u);
    if (j.contains("k")) config.k_list = j.at("k").get<std::vector<int>>();
    if (j.contains("metrics")) config.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("rules")) {
        config.rules.clear();
        for (const auto& r : j.at("rules")) {
            if (r.get<std::string>() == "all") { config.rules = all_rules(); break; }
            config.rules.push_back(rule_from_name(r.get<std::string>()));
        }
    }
    config.beta_hat = j.value("beta_hat", 3.0);
    config.leaderboard_metric = j.value("leaderboard_metric", std::string("ndcg"));
    config.leaderboard_k = j.value("leaderboard_k", 10);
    if (j.contains("bootstrap")) {
        config.bootstrap_iterations = j.at("bootstrap").value("iterations", std::size_t{0});
        config.bootstrap_fraction = j.at("bootstrap").value("fraction", 0.8);
    }
    config.ease_max_items = j.value("ease_max_items", std::size_t{20000});
    config.emit_characteristics = j.value("characteristics", true);

    for (const auto& d : j.at("datasets")) {
        DatasetSpec spec;
        spec.name = d.at("name").get<std::string>();
        spec.path = d.value("path", std::string());
        spec.inline_text = d.value("inline_text", std::string());
        spec.tau = d.value("tau", 0.0);
        spec.scale = scale_from_name(d.value("scale", std::string("custom")));
        spec.collapse_events = d.value("collapse_events", false);
        if (d.contains("filter")) {
            spec.filter_kind = filter_from_name(d.at("filter").value("kind", std::string("filter")));
            spec.filter_level = d.at("filter").value("level", std::size_t{5});
            if (d.at("filter").value("order", std::string("items_first")) == "users_first")
                spec.filter_order = FilterOrder::users_then_items;
        }
        if (d.contains("ratios")) {
            const auto r = d.at("ratios").get<std::vector<double>>();
            if (r.size() != 3) throw std::runtime_error("dataset '" + spec.name + "': ratios must have 3 entries");
            spec.ratios[0] = r[0];
            spec.ratios[1] = r[1];
            spec.ratios[2] = r[2];
        }
        if (d.contains("columns")) {
            const auto& c = d.at("columns");
            spec.schema.user = c.value("user", spec.schema.user);
            spec.schema.item = c.value("item", spec.schema.item);
            spec.schema.weight = c.value("weight", spec.schema.weight);
            spec.schema.timestamp = c.value("timestamp", spec.schema.timestamp);
            spec.schema.event = c.value("event", spec.schema.event);
        }
        if (d.value("delimiter", std::string()) == "tab") spec.schema.delimiter = '\t';
        spec.schema.timestamps_in_seconds = d.value("timestamps_in_seconds", false);
        config.datasets.push_back(std::move(spec));
    }
    for (const auto& m : j.at("models")) {
        ModelSpec spec;
        spec.kind = model_kind_from_name(m.at("kind").get<std::string>());
        spec.name = m.value("name", std::string());
        spec.budget = m.value("budget", std::size_t{40});
        config.models.push_back(std::move(spec));
    }
    return config;
}

inline BenchmarkConfig load_config(const std::string& path) {
    return config_from_json(json::parse(slurp(path)));
}

inline MetricMatrix load_q(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return import_metric_matrix(in);
}

inline void print_written(const std::vector<std::string>& paths) {
    for (const auto& p : paths) std::cout << p << "\n";
}

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"multi-dataset top-N recommender benchmarking toolkit"};
    app.require_subcommand(1);
    std::vector<std::string> written;

    // ---- synth ----------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic interaction log");
    struct {
        std::string output = "synthetic.csv";
        std::size_t users = 2000, items = 500, clusters = 10;
        std::uint64_t seed = 0;
    } synth_opt;
    synth->add_option("--output", synth_opt.output);
    synth->add_option("--users", synth_opt.users);
    synth->add_option("--items", synth_opt.items);
    synth->add_option("--clusters", synth_opt.clusters);
    synth->add_option("--seed", synth_opt.seed);
    synth->callback([&] {
        SyntheticConfig cfg;
        cfg.users = synth_opt.users;
        cfg.items = synth_opt.items;
        cfg.clusters = synth_opt.clusters;
        atomic_write_file(synth_opt.output, generate_synthetic_csv(cfg, synth_opt.seed));
        written.push_back(synth_opt.output);
    });

    // ---- ingest ---------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "parse and preprocess one interaction log");
    struct {
        std::string input, output = "canonical.csv";
        double tau = 0.0;
        std::string scale = "custom";
        bool collapse_events = false;
        std::string filter = "filter";
        std::size_t level = 5;
        std::string order = "items_first";
        std::string user = "user_id", item = "item_id", weight = "weight", timestamp = "timestamp",
                    event = "event";
        bool tab = false, seconds = false;
    } ing;
    ingest->add_option("--input", ing.input)->required();
    ingest->add_option("--output", ing.output);
    ingest->add_option("--tau", ing.tau);
    ingest->add_option("--scale", ing.scale);
    ingest->add_flag("--collapse-events", ing.collapse_events);
    ingest->add_option("--filter", ing.filter, "filter|core|none");
    ingest->add_option("--level", ing.level);
    ingest->add_option("--order", ing.order, "items_first|users_first");
    ingest->add_option("--user-col", ing.user);
    ingest->add_option("--item-col", ing.item);
    ingest->add_option("--weight-col", ing.weight);
    ingest->add_option("--timestamp-col", ing.timestamp);
    ingest->add_option("--event-col", ing.event);
    ingest->add_flag("--tab", ing.tab, "force tab delimiter");
    ingest->add_flag("--seconds", ing.seconds, "timestamps are in seconds");
    ingest->callback([&] {
        DatasetSpec spec;
        spec.name = "dataset";
        spec.path = ing.input;
        spec.tau = ing.tau;
        spec.scale = scale_from_name(ing.scale);
        spec.collapse_events = ing.collapse_events;
        spec.filter_kind = filter_from_name(ing.filter);
        spec.filter_level = ing.level;
        spec.filter_order = ing.order == "users_first" ? FilterOrder::users_then_items
                                                       : FilterOrder::items_then_users;
        spec.schema.user = ing.user;
        spec.schema.item = ing.item;
        spec.schema.weight = ing.weight;
        spec.schema.timestamp = ing.timestamp;
        spec.schema.event = ing.event;
        if (ing.tab) spec.schema.delimiter = '\t';
        spec.schema.timestamps_in_seconds = ing.seconds;
        const auto data = preprocess_dataset(spec);
        std::ostringstream os;
        write_interactions(os, data);
        atomic_write_file(ing.output, os.str());
        written.push_back(ing.output);
    });

    // ---- split ----------------------------------------------------------
    auto* split = app.add_subcommand("split", "global temporal split with cold pruning");
    struct {
        std::string input, out_dir = ".";
        std::string ratios = "0.8,0.1,0.1";
    } sp;
    split->add_option("--input", sp.input)->required();
    split->add_option("--out-dir", sp.out_dir);
    split->add_option("--ratios", sp.ratios);
    split->callback([&] {
        std::ifstream in(sp.input);
        if (!in) throw std::runtime_error("cannot open '" + sp.input + "'");
        const auto data = parse_interactions(in);
        const auto r = parse_grid(sp.ratios);
        if (r.size() != 3) throw std::runtime_error("--ratios needs 3 values");
        const auto bundle = prune_cold(temporal_split(data, r[0], r[1], r[2]));
        for (const auto& [name, set] :
             {std::pair<const char*, const InteractionSet*>{"train.csv", &bundle.train},
              {"validation.csv", &bundle.validation},
              {"test.csv", &bundle.test}}) {
            std::ostringstream os;
            write_interactions(os, *set);
            const auto path = (fs::path(sp.out_dir) / name).string();
            atomic_write_file(path, os.str());
            written.push_back(path);
        }
    });

    // ---- import-q -------------------------------------------------------
    auto* importq = app.add_subcommand("import-q", "validate and canonicalize a metric matrix");
    struct {
        std::string input, output = "q.csv";
    } iq;
    importq->add_option("--input", iq.input)->required();
    importq->add_option("--output", iq.output);
    importq->callback([&] {
        const auto q = load_q(iq.input);
        std::ostringstream os;
        write_metric_matrix(os, q);
        atomic_write_file(iq.output, os.str());
        written.push_back(iq.output);
    });

    // ---- chars ----------------------------------------------------------
    auto* chars = app.add_subcommand("chars", "dataset characteristics table");
    struct {
        std::string config, output = "characteristics.csv";
    } ch;
    chars->add_option("--config", ch.config)->required();
    chars->add_option("--output", ch.output);
    chars->callback([&] {
        const auto config = load_config(ch.config);
        std::ostringstream os;
        write_characteristics_header(os);
        for (const auto& spec : config.datasets)
            write_characteristics_row(os, spec.name, compute_characteristics(preprocess_dataset(spec)));
        atomic_write_file(ch.output, os.str());
        written.push_back(ch.output);
    });

    // ---- run / eval -----------------------------------------------------
    struct RunOpt {
        std::string config;
        std::string output;
        std::int64_t seed = -1;
        int jobs = 0;
    };
    auto add_run_like = [&](const char* name, const char* help, bool with_rules) {
        auto* cmd = app.add_subcommand(name, help);
        auto opt = std::make_shared<RunOpt>();
        cmd->add_option("--config", opt->config)->required();
        cmd->add_option("--output", opt->output, "override the config output dir");
        cmd->add_option("--seed", opt->seed, "override the config master seed");
        cmd->add_option("--jobs", opt->jobs, "override the worker count");
        cmd->callback([&, opt, with_rules] {
            auto config = load_config(opt->config);
            if (!opt->output.empty()) config.output_dir = opt->output;
            if (opt->seed >= 0) config.seed = static_cast<std::uint64_t>(opt->seed);
            if (opt->jobs > 0) config.jobs = static_cast<unsigned>(opt->jobs);
            if (!with_rules) config.rules.clear();
            const auto result = run_benchmark(config);
            const auto paths = write_benchmark_outputs(result, config);
            written.insert(written.end(), paths.begin(), paths.end());
            for (const auto& w : result.warnings.messages) std::cerr << "warning: " << w << "\n";
        });
        return cmd;
    };
    add_run_like("run", "full pipeline: ingest, tune, refit, evaluate, aggregate", true);
    add_run_like("eval", "pipeline up to the metric matrices (no aggregation)", false);

    // ---- aggregate ------------------------------------------------------
    auto* agg = app.add_subcommand("aggregate", "aggregate a metric matrix into leaderboards");
    struct {
        std::string q, rules = "all", out_dir = ".";
        double beta_hat = 3.0;
        std::string minimax = "winning_votes";
        std::string mean_q, std_q;
        std::size_t mc = 10000;
        std::uint64_t seed = 0;
    } ag;
    agg->add_option("--q", ag.q)->required();
    agg->add_option("--rules", ag.rules, "all or comma list");
    agg->add_option("--out-dir", ag.out_dir);
    agg->add_option("--beta-hat", ag.beta_hat);
    agg->add_option("--minimax-variant", ag.minimax, "winning_votes|literal_count");
    agg->add_option("--bootstrap-mean", ag.mean_q, "bootstrap mean matrix (enables expected-tops)");
    agg->add_option("--bootstrap-std", ag.std_q, "bootstrap stddev matrix");
    agg->add_option("--mc", ag.mc);
    agg->add_option("--seed", ag.seed);
    agg->callback([&] {
        const auto q = load_q(ag.q);
        AggregationOptions opt;
        opt.beta_hat = ag.beta_hat;
        opt.minimax_variant = ag.minimax == "literal_count" ? MinimaxVariant::literal_count
                                                            : MinimaxVariant::winning_votes;
        Warnings warnings;
        opt.warnings = &warnings;
        json rules = json::object();
        std::vector<Leaderboard> boards;
        for (const Rule rule : rules_from_arg(ag.rules)) boards.push_back(aggregate(q, rule, opt));
        if (!ag.mean_q.empty()) {
            if (ag.std_q.empty()) throw std::runtime_error("--bootstrap-std required with --bootstrap-mean");
            boards.push_back(expected_tops(load_q(ag.mean_q), load_q(ag.std_q), ag.mc, ag.seed));
        }
        for (const auto& lb : boards) {
            std::ostringstream os;
            write_leaderboard_csv(os, lb);
            const auto path = (fs::path(ag.out_dir) / ("leaderboard_" + lb.rule + ".csv")).string();
            atomic_write_file(path, os.str());
            written.push_back(path);
            rules[lb.rule] = leaderboard_to_json(lb);
        }
        const auto path = (fs::path(ag.out_dir) / "leaderboards.json").string();
        atomic_write_file(path, json{{"rules", rules}}.dump(2) + "\n");
        written.push_back(path);
        for (const auto& w : warnings.messages) std::cerr << "warning: " << w << "\n";
    });

    // ---- compare --------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "CD diagram data, DM profiles, pairwise tests, SVG");
    struct {
        std::string q, out_dir = ".";
        double alpha = 0.05, rope = 0.0, beta_hat = 3.0;
        std::size_t mc = 10000;
        std::uint64_t seed = 0;
    } cmp;
    compare->add_option("--q", cmp.q)->required();
    compare->add_option("--out-dir", cmp.out_dir);
    compare->add_option("--alpha", cmp.alpha);
    compare->add_option("--rope", cmp.rope);
    compare->add_option("--beta-hat", cmp.beta_hat);
    compare->add_option("--mc", cmp.mc);
    compare->add_option("--seed", cmp.seed);
    compare->callback([&] {
        const auto q = load_q(cmp.q);
        Warnings warnings;
        auto tests = wilcoxon_holm(q, cmp.alpha, &warnings);
        fill_bayesian(tests, q, cmp.rope, cmp.mc, cmp.seed, &warnings);
        const auto cd = cd_diagram_data(q, tests);
        const auto prof = dm_profile(q, cmp.beta_hat);
        auto emit = [&](const char* name, const std::string& content) {
            const auto path = (fs::path(cmp.out_dir) / name).string();
            atomic_write_file(path, content);
            written.push_back(path);
        };
        emit("pairwise_tests.json", pairwise_tests_to_json(tests).dump(2) + "\n");
        emit("cd_diagram.json", cd_diagram_to_json(cd).dump(2) + "\n");
        emit("dm_profiles.json", profile_to_json(prof).dump(2) + "\n");
        emit("cd_diagram.svg", render_cd_diagram(cd));
        emit("dm_curves.svg", render_dm_curves(prof));
        for (const auto& w : warnings.messages) std::cerr << "warning: " << w << "\n";
    });

    // ---- corr -----------------------------------------------------------
    auto* corr = app.add_subcommand("corr", "averaged Spearman correlation between metrics");
    struct {
        std::vector<std::string> qs;
        std::string output = "metric_correlation";
    } co;
    corr->add_option("--q", co.qs, "metric matrix files, one per metric")->required()->expected(-1);
    corr->add_option("--output", co.output, "output basename (.csv and .json)");
    corr->callback([&] {
        std::vector<MetricMatrix> per_metric;
        for (const auto& path : co.qs) {
            auto q = load_q(path);
            if (q.metric.empty()) q.metric = fs::path(path).stem().string();
            per_metric.push_back(std::move(q));
        }
        Warnings warnings;
        const auto matrix = metric_correlation(per_metric, &warnings);
        std::ostringstream os;
        write_correlation_csv(os, matrix);
        atomic_write_file(co.output + ".csv", os.str());
        atomic_write_file(co.output + ".json", correlation_to_json(matrix).dump(2) + "\n");
        written.push_back(co.output + ".csv");
        written.push_back(co.output + ".json");
        for (const auto& w : warnings.messages) std::cerr << "warning: " << w << "\n";
    });

    // ---- stress ---------------------------------------------------------
    auto* stress = app.add_subcommand("stress", "ranking stability under perturbations");
    struct {
        std::string q, kind, rules = "all", out_dir = ".";
        std::string drops = "1,2,3", alpha_grid = "1:4:0.25", beta_grid = "1:6:0.25";
        std::size_t trials = 100, pairs = 100, subset_size = 5, target = 0;
        double reference_beta = 3.0, beta_hat = 3.0;
        std::uint64_t seed = 0;
    } st;
    stress->add_option("--q", st.q)->required();
    stress->add_option("--kind", st.kind,
                       "drop-datasets|drop-methods|subset-pairs|add-similar|add-best|beta")
        ->required();
    stress->add_option("--rules", st.rules);
    stress->add_option("--out-dir", st.out_dir);
    stress->add_option("--drops", st.drops);
    stress->add_option("--alpha", st.alpha_grid, "alpha grid, e.g. 1:4:0.25");
    stress->add_option("--beta-grid", st.beta_grid);
    stress->add_option("--trials", st.trials);
    stress->add_option("--pairs", st.pairs);
    stress->add_option("--subset-size", st.subset_size);
    stress->add_option("--target", st.target, "method index for add-similar");
    stress->add_option("--reference-beta", st.reference_beta);
    stress->add_option("--beta-hat", st.beta_hat);
    stress->add_option("--seed", st.seed);
    stress->callback([&] {
        const auto q = load_q(st.q);
        AggregationOptions opt;
        opt.beta_hat = st.beta_hat;
        json per_rule = json::object();
        const auto rules = st.kind == "beta"
                               ? std::vector<Rule>{Rule::dm_auc, Rule::dm_lbo}
                               : rules_from_arg(st.rules);
        for (const Rule rule : rules) {
            StabilityReport rep;
            if (st.kind == "drop-datasets") {
                rep = drop_datasets_curve(q, rule, parse_size_list(st.drops), st.trials, st.seed, opt);
            } else if (st.kind == "drop-methods") {
                rep = drop_methods_curve(q, rule, parse_size_list(st.drops), st.trials, st.seed, opt);
            } else if (st.kind == "subset-pairs") {
                rep = subset_pair_consistency(q, rule, st.subset_size, st.pairs, st.seed, opt);
            } else if (st.kind == "add-similar" || st.kind == "add-best") {
                rep.kind = st.kind;
                rep.rule = rule_name(rule);
                for (const double alpha : parse_grid(st.alpha_grid)) {
                    const auto res = st.kind == "add-similar"
                                         ? add_similar_method(q, rule, st.target, alpha, opt)
                                         : add_best_method(q, rule, alpha, opt);
                    rep.grid.push_back(alpha);
                    rep.mean.push_back(res.spearman);
                    rep.stddev.push_back(0.0);
                    rep.count.push_back(1);
                }
            } else if (st.kind == "beta") {
                rep = beta_sensitivity(q, rule, parse_grid(st.beta_grid), st.reference_beta);
            } else {
                throw std::runtime_error("unknown stress kind '" + st.kind + "'");
            }
            per_rule[rep.rule] = stability_report_to_json(rep);
        }
        const auto path = (fs::path(st.out_dir) / ("stress_" + st.kind + ".json")).string();
        atomic_write_file(path, json{{"kind", st.kind}, {"rules", per_rule}}.dump(2) + "\n");
        written.push_back(path);
    });

    // ---- select ---------------------------------------------------------
    auto* select = app.add_subcommand("select", "principal dataset subset selection");
    struct {
        std::string features, method = "kmeans", out_dir = ".";
        int count = 6;
        std::uint64_t seed = 0;
        std::vector<std::string> qs;
        std::string rule = "mean-ranks";
        std::size_t sims = 0;
    } se;
    select->add_option("--features", se.features, "characteristics table")->required();
    select->add_option("--method", se.method, "kmeans|random|a-optimal|d-optimal");
    select->add_option("--count", se.count);
    select->add_option("--seed", se.seed);
    select->add_option("--out-dir", se.out_dir);
    select->add_option("--q", se.qs, "metric matrices for the fidelity table")->expected(-1);
    select->add_option("--rule", se.rule, "aggregation rule for fidelity");
    select->add_option("--sims", se.sims, "fidelity simulations per method (0 = single shot)");
    select->callback([&] {
        std::ifstream in(se.features);
        if (!in) throw std::runtime_error("cannot open '" + se.features + "'");
        const auto raw = import_metric_matrix(in);  // same layout: labels + numeric grid
        FeatureTable table;
        table.rows = raw.datasets;
        table.cols = raw.methods;
        table.values = raw.values;

        Warnings warnings;
        SelectionResult result;
        if (se.method == "kmeans") {
            result = select_principal_kmeans(table, se.count, se.seed, {}, &warnings);
        } else if (se.method == "random") {
            result = random_select(table.num_rows(), se.count, se.seed);
        } else if (se.method == "a-optimal" || se.method == "d-optimal") {
            const auto prepared = pca(standardize(table, &warnings), 0.95);
            result = optimal_design_select(prepared, se.count,
                                           se.method == "a-optimal" ? DesignCriterion::A
                                                                    : DesignCriterion::D,
                                           10, se.seed);
        } else {
            throw std::runtime_error("unknown selection method '" + se.method + "'");
        }

        auto emit = [&](const std::string& name, const std::string& content) {
            const auto path = (fs::path(se.out_dir) / name).string();
            atomic_write_file(path, content);
            written.push_back(path);
        };
        emit("selection_" + se.method + ".json",
             selection_result_to_json(result, table.rows).dump(2) + "\n");
        if (!result.cluster_of.empty()) {
            std::ostringstream os;
            os << "dataset,cluster\n";
            for (std::size_t r = 0; r < table.rows.size(); ++r)
                os << table.rows[r] << "," << result.cluster_of[r] + 1 << "\n";
            emit("clusters.csv", os.str());
        }
        if (!se.qs.empty()) {
            const Rule rule = rule_from_name(se.rule);
            std::ostringstream os;
            os << "Method";
            std::vector<MetricMatrix> qs;
            for (const auto& path : se.qs) {
                qs.push_back(load_q(path));
                auto& q = qs.back();
                if (q.metric.empty()) q.metric = fs::path(path).stem().string();
                os << "," << q.metric << (q.k > 0 ? "@" + std::to_string(q.k) : "");
            }
            os << "\n" << "Selected";
            for (const auto& q : qs) os << "," << format_double(selection_fidelity(q, result.selected, rule));
            os << "\n";
            emit("fidelity.csv", os.str());
        }
        for (const auto& w : warnings.messages) std::cerr << "warning: " << w << "\n";
    });

    // ---- report ---------------------------------------------------------
    auto* report = app.add_subcommand("report", "merge emitted JSON documents into one report");
    struct {
        std::string dir = ".", output;
    } rp;
    report->add_option("--dir", rp.dir);
    report->add_option("--output", rp.output, "defaults to <dir>/report.json");
    report->callback([&] {
        json merged = json::object();
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(rp.dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json" &&
                entry.path().filename() != "report.json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            try {
                merged[file.stem().string()] = json::parse(slurp(file.string()));
            } catch (const std::exception& e) {
                merged[file.stem().string()] = json{{"error", e.what()}};
            }
        }
        const auto out = rp.output.empty() ? (fs::path(rp.dir) / "report.json").string() : rp.output;
        atomic_write_file(out, merged.dump(2) + "\n");
        written.push_back(out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    print_written(written);
    return 0;
}

}  // namespace rankbench::cli
