#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using rankbench::cli::run_cli;

namespace {

int cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"rankbench"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("rankbench_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write(const std::string& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

const char* kSmallQ =
    "dataset,alpha,bravo,charlie\n"
    "d0,0.30,0.20,0.10\n"
    "d1,0.25,0.28,0.12\n"
    "d2,0.33,0.21,0.15\n"
    "d3,0.31,0.24,0.09\n"
    "d4,0.29,0.26,0.11\n";

}  // namespace

TEST_CASE("synth then ingest then split round-trips through files") {
    TempDir dir;
    CHECK(cli({"synth", "--output", dir.file("raw.csv"), "--users", "60", "--items", "30",
               "--clusters", "3", "--seed", "5"}) == 0);
    CHECK(cli({"ingest", "--input", dir.file("raw.csv"), "--output", dir.file("canonical.csv"),
               "--tau", "3.5", "--filter", "filter", "--level", "2"}) == 0);
    const auto canonical = slurp(dir.file("canonical.csv"));
    CHECK(canonical.rfind("user_id,item_id,weight,timestamp", 0) == 0);

    CHECK(cli({"split", "--input", dir.file("canonical.csv"), "--out-dir", dir.path.string()}) == 0);
    for (const char* name : {"train.csv", "validation.csv", "test.csv"}) {
        std::ifstream in(dir.file(name));
        const auto set = rankbench::parse_interactions(in);
        CHECK(set.num_records() > 0);
    }
}

TEST_CASE("aggregate --rules all emits eight leaderboards and a combined JSON") {
    TempDir dir;
    write(dir.file("q.csv"), kSmallQ);
    CHECK(cli({"aggregate", "--q", dir.file("q.csv"), "--rules", "all", "--out-dir",
               dir.path.string()}) == 0);
    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir.path))
        if (entry.path().filename().string().rfind("leaderboard_", 0) == 0) ++count;
    CHECK(count == 8);
    const auto combined = nlohmann::json::parse(slurp(dir.file("leaderboards.json")));
    CHECK(combined.at("rules").size() == 8);
    const auto& dm = combined.at("rules").at("dm-auc").at("entries");
    CHECK(dm.at(0).at("method") == "alpha");  // dominant column wins
}

TEST_CASE("leaderboard csv round-trips positions") {
    TempDir dir;
    write(dir.file("q.csv"), kSmallQ);
    CHECK(cli({"aggregate", "--q", dir.file("q.csv"), "--rules", "copeland", "--out-dir",
               dir.path.string()}) == 0);
    const auto text = slurp(dir.file("leaderboard_copeland.csv"));
    CHECK(text.rfind("position,method,score", 0) == 0);
    CHECK(text.find("1,alpha,2") != std::string::npos);
}

TEST_CASE("compare emits tests, cd data, profiles and svg plots") {
    TempDir dir;
    write(dir.file("q.csv"), kSmallQ);
    CHECK(cli({"compare", "--q", dir.file("q.csv"), "--out-dir", dir.path.string(), "--mc", "500",
               "--seed", "3"}) == 0);
    for (const char* name : {"pairwise_tests.json", "cd_diagram.json", "dm_profiles.json"}) {
        const auto j = nlohmann::json::parse(slurp(dir.file(name)));
        CHECK_FALSE(j.empty());
    }
    for (const char* name : {"cd_diagram.svg", "dm_curves.svg"}) {
        const auto svg = slurp(dir.file(name));
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
    }
}

TEST_CASE("corr averages spearman across datasets") {
    TempDir dir;
    write(dir.file("a.csv"), kSmallQ);
    // a strictly decreasing transform of the same matrix: correlation -1
    rankbench::MetricMatrix neg = rankbench::import_metric_matrix(kSmallQ);
    for (auto& row : neg.values)
        for (auto& v : row) v = 1.0 - v;
    std::ostringstream os;
    rankbench::write_metric_matrix(os, neg);
    write(dir.file("b.csv"), os.str());

    CHECK(cli({"corr", "--q", dir.file("a.csv"), dir.file("b.csv"), "--output",
               dir.file("corr")}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir.file("corr.json")));
    CHECK(j.at("values")[0][1].get<double>() == doctest::Approx(-1.0));
}

TEST_CASE("stress add-best with a 1:4:0.25 grid lands 13 points") {
    TempDir dir;
    write(dir.file("q.csv"), kSmallQ);
    CHECK(cli({"stress", "--q", dir.file("q.csv"), "--kind", "add-best", "--alpha", "1:4:0.25",
               "--rules", "ma,copeland", "--out-dir", dir.path.string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir.file("stress_add-best.json")));
    CHECK(j.at("rules").at("ma").at("grid").size() == 13);
    for (const auto& v : j.at("rules").at("ma").at("mean")) CHECK(v.get<double>() == 1.0);
}

TEST_CASE("stress beta covers both DM rules") {
    TempDir dir;
    write(dir.file("q.csv"), kSmallQ);
    CHECK(cli({"stress", "--q", dir.file("q.csv"), "--kind", "beta", "--beta-grid", "1:5:1",
               "--out-dir", dir.path.string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir.file("stress_beta.json")));
    CHECK(j.at("rules").contains("dm-auc"));
    CHECK(j.at("rules").contains("dm-lbo"));
}

TEST_CASE("select kmeans emits labels, clusters table and fidelity") {
    TempDir dir;
    // 12 rows in 3 feature blobs
    std::ostringstream features;
    features << "dataset,f1,f2,f3\n";
    auto rng = rankbench::make_rng(4);
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 4; ++i)
            features << "d" << (b * 4 + i) << "," << 10 * b + rankbench::uniform01(rng) << ","
                     << -5 * b + rankbench::uniform01(rng) << "," << rankbench::uniform01(rng) << "\n";
    write(dir.file("chars.csv"), features.str());

    std::ostringstream q;
    q << "dataset,m1,m2,m3\n";
    for (int r = 0; r < 12; ++r)
        q << "d" << r << "," << 0.5 + 0.01 * r << "," << 0.4 + 0.01 * r << "," << 0.3 << "\n";
    write(dir.file("q.csv"), q.str());

    CHECK(cli({"select", "--features", dir.file("chars.csv"), "--method", "kmeans", "--count", "3",
               "--seed", "5", "--out-dir", dir.path.string(), "--q", dir.file("q.csv"), "--rule",
               "mean-ranks"}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir.file("selection_kmeans.json")));
    CHECK(j.at("selected").size() == 3);
    const auto clusters = slurp(dir.file("clusters.csv"));
    CHECK(clusters.rfind("dataset,cluster", 0) == 0);
    CHECK(std::count(clusters.begin(), clusters.end(), '\n') == 13);  // header + 12 rows
    const auto fidelity = slurp(dir.file("fidelity.csv"));
    CHECK(fidelity.rfind("Method,", 0) == 0);
}

TEST_CASE("import-q canonicalizes and rejects bad input") {
    TempDir dir;
    write(dir.file("q.csv"), kSmallQ);
    CHECK(cli({"import-q", "--input", dir.file("q.csv"), "--output", dir.file("out.csv")}) == 0);
    const auto round = rankbench::import_metric_matrix(slurp(dir.file("out.csv")));
    CHECK(round.num_methods() == 3);
    write(dir.file("bad.csv"), "dataset,m1,m1\nd0,1,2\n");
    CHECK(cli({"import-q", "--input", dir.file("bad.csv"), "--output", dir.file("out2.csv")}) != 0);
}

TEST_CASE("unknown flags and missing inputs exit non-zero") {
    CHECK(cli({"aggregate", "--nonsense"}) != 0);
    CHECK(cli({"aggregate", "--q", "/nonexistent/q.csv"}) != 0);
    CHECK(cli({}) != 0);
}

TEST_CASE("run executes the full pipeline from a JSON config") {
    TempDir dir;
    CHECK(cli({"synth", "--output", dir.file("d0.csv"), "--users", "150", "--items", "40",
               "--clusters", "4", "--seed", "11"}) == 0);
    CHECK(cli({"synth", "--output", dir.file("d1.csv"), "--users", "150", "--items", "40",
               "--clusters", "4", "--seed", "12"}) == 0);

    nlohmann::json config = {
        {"seed", 7},
        {"output", dir.file("out")},
        {"jobs", 2},
        {"k", {5, 10}},
        {"metrics", {"ndcg", "hitrate", "coverage"}},
        {"rules", {"all"}},
        {"leaderboard_metric", "ndcg"},
        {"leaderboard_k", 10},
        {"datasets",
         {{{"name", "d0"}, {"path", dir.file("d0.csv")}, {"tau", 3.5},
           {"filter", {{"kind", "filter"}, {"level", 2}}}},
          {{"name", "d1"}, {"path", dir.file("d1.csv")}, {"tau", 3.5},
           {"filter", {{"kind", "filter"}, {"level", 2}}}}}},
        {"models",
         {{{"kind", "random"}}, {{"kind", "mostpop"}}, {{"kind", "ease"}, {"budget", 3}}}},
    };
    write(dir.file("config.json"), config.dump(2));
    CHECK(cli({"run", "--config", dir.file("config.json")}) == 0);

    for (const char* name : {"ndcg@5.csv", "ndcg@10.csv", "hitrate@10.csv", "coverage@10.csv",
                             "leaderboard_dm-auc.csv", "leaderboards.json", "report.json",
                             "characteristics.csv"}) {
        CHECK(fs::exists(fs::path(dir.file("out")) / name));
    }
    const auto q = rankbench::import_metric_matrix(slurp((fs::path(dir.file("out")) / "ndcg@10.csv").string()));
    CHECK(q.num_datasets() == 2);
    CHECK(q.num_methods() == 3);

    const auto report = nlohmann::json::parse(slurp((fs::path(dir.file("out")) / "report.json").string()));
    CHECK(report.at("cells").size() == 6);

    // outputs re-parse via the corresponding import operations (round-trip)
    CHECK(cli({"report", "--dir", dir.file("out")}) == 0);
    const auto merged = nlohmann::json::parse(slurp((fs::path(dir.file("out")) / "report.json").string()));
    CHECK(merged.contains("leaderboards"));
}

TEST_CASE("run is deterministic across worker counts") {
    TempDir dir;
    CHECK(cli({"synth", "--output", dir.file("d0.csv"), "--users", "120", "--items", "30",
               "--clusters", "3", "--seed", "21"}) == 0);
    nlohmann::json config = {
        {"seed", 3},
        {"output", dir.file("a")},
        {"jobs", 1},
        {"k", {10}},
        {"metrics", {"ndcg"}},
        {"rules", {"ma", "copeland"}},
        {"datasets",
         {{{"name", "d0"}, {"path", dir.file("d0.csv")}, {"tau", 3.5},
           {"filter", {{"kind", "filter"}, {"level", 2}}}},
          {{"name", "d0b"}, {"path", dir.file("d0.csv")}, {"tau", 3.5},
           {"filter", {{"kind", "filter"}, {"level", 2}}}}}},
        {"models", {{{"kind", "mostpop"}}, {{"kind", "itemknn"}, {"budget", 2}}}},
    };
    write(dir.file("config.json"), config.dump());
    CHECK(cli({"run", "--config", dir.file("config.json")}) == 0);
    CHECK(cli({"run", "--config", dir.file("config.json"), "--output", dir.file("b"), "--jobs",
               "4"}) == 0);
    for (const char* name : {"ndcg@10.csv", "leaderboard_ma.csv", "leaderboard_copeland.csv"}) {
        CHECK(slurp((fs::path(dir.file("a")) / name).string()) ==
              slurp((fs::path(dir.file("b")) / name).string()));
    }
}
