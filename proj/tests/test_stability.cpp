#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rankbench/rng.hpp"
#include "rankbench/stability.hpp"

using namespace rankbench;

namespace {

MetricMatrix make_q(std::vector<std::vector<double>> values) {
    MetricMatrix q;
    q.values = std::move(values);
    for (std::size_t t = 0; t < q.values.size(); ++t) q.datasets.push_back("d" + std::to_string(t));
    for (std::size_t i = 0; i < q.values.front().size(); ++i) q.methods.push_back("m" + std::to_string(i));
    return q;
}

MetricMatrix random_q(std::size_t d, std::size_t m, Rng& rng) {
    std::vector<std::vector<double>> values(d, std::vector<double>(m));
    for (auto& row : values)
        for (auto& v : row) v = uniform01(rng);
    return make_q(std::move(values));
}

// Counterexample fixtures are regenerated from their recorded search seeds
// (seed, iteration, shape); the searches found them at iteration 0.
MetricMatrix frozen_q(std::uint64_t seed, std::size_t d_lo, std::size_t d_span, std::size_t m_lo,
                      std::size_t m_span) {
    auto rng = make_rng(seed);
    const auto d = d_lo + uniform_int(rng, 0, d_span);
    const auto m = m_lo + uniform_int(rng, 0, m_span);
    return random_q(d, m, rng);
}

const std::vector<Rule> kAllRules = all_rules();

}  // namespace

TEST_CASE("drop 0 datasets keeps Spearman 1 for every rule") {
    auto rng = make_rng(100);
    const auto q = random_q(12, 6, rng);
    for (const Rule rule : kAllRules) {
        const auto rep = drop_datasets_curve(q, rule, {0}, 5, 42);
        CHECK(rep.mean[0] == doctest::Approx(1.0));
        CHECK(rep.stddev[0] == doctest::Approx(0.0));
    }
}

TEST_CASE("drop to a single dataset follows that row's metric order") {
    auto rng = make_rng(101);
    auto q = random_q(6, 5, rng);
    for (auto& row : q.values)
        for (auto& v : row) v = 0.5 + 0.5 * v;  // keep DM ratios inside beta_hat
    const std::size_t d = q.num_datasets();
    for (std::size_t trial = 0; trial < 5; ++trial) {
        auto trial_rng = make_rng(derive_seed(9, "drop_datasets", d - 1, trial));
        const auto keep = sample_without_replacement(d, 1, trial_rng);
        const auto row = q.values[keep[0]];
        const auto sub = make_q({row});
        const auto lb = aggregate(sub, Rule::mean_arithmetic);
        std::vector<double> expected(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) expected[i] = row[i];
        CHECK(spearman(lb.ranks(), average_ranks([&] {
                  std::vector<double> neg(row.size());
                  for (std::size_t i = 0; i < row.size(); ++i) neg[i] = -row[i];
                  return neg;
              }())) == doctest::Approx(1.0));
    }
}

TEST_CASE("drop-datasets mean Spearman trends down for mean aggregation") {
    auto rng = make_rng(103);
    const auto q = random_q(20, 6, rng);
    const auto rep = drop_datasets_curve(q, Rule::mean_arithmetic, {1, 5, 10, 15}, 1000, 77);
    for (std::size_t i = 0; i + 1 < rep.mean.size(); ++i)
        CHECK(rep.mean[i + 1] <= rep.mean[i] + 0.02);  // allow sampling noise
    CHECK(rep.count == std::vector<std::size_t>{1000, 1000, 1000, 1000});
}

TEST_CASE("stability reports replay identically under the same seed") {
    auto rng = make_rng(104);
    const auto q = random_q(10, 5, rng);
    const auto a = drop_datasets_curve(q, Rule::copeland, {2, 4}, 50, 5);
    const auto b = drop_datasets_curve(q, Rule::copeland, {2, 4}, 50, 5);
    CHECK(a.mean == b.mean);
    CHECK(a.stddev == b.stddev);
}

TEST_CASE("subset pairs: subset_size = d gives Spearman 1") {
    auto rng = make_rng(105);
    const auto q = random_q(8, 5, rng);
    for (const Rule rule : {Rule::dm_auc, Rule::mean_ranks, Rule::copeland}) {
        const auto rep = subset_pair_consistency(q, rule, q.num_datasets(), 10, 3);
        CHECK(rep.mean[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("subset pairs: one value per rule in the Table-3 style") {
    auto rng = make_rng(106);
    const auto q = random_q(30, 8, rng);
    for (const Rule rule : kAllRules) {
        const auto rep = subset_pair_consistency(q, rule, 5, 100, 11);
        REQUIRE(rep.grid.size() == 1);
        CHECK(rep.grid[0] == 5.0);
        CHECK(rep.count[0] == 100);
        CHECK(rep.mean[0] >= -1.0);
        CHECK(rep.mean[0] <= 1.0);
    }
}

TEST_CASE("drop 0 methods keeps Spearman 1; mean aggregation survives any drop") {
    auto rng = make_rng(107);
    const auto q = random_q(10, 5, rng);
    for (const Rule rule : kAllRules) {
        const auto rep = drop_methods_curve(q, rule, {0}, 5, 21);
        CHECK(rep.mean[0] == doctest::Approx(1.0));
    }
    // column means are untouched by removing other columns
    const auto rep = drop_methods_curve(q, Rule::mean_arithmetic, {1, 2, 3}, 200, 21);
    for (const double v : rep.mean) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("m=3 drop 1: mean aggregation preserves survivor order exhaustively") {
    auto rng = make_rng(108);
    for (int iter = 0; iter < 50; ++iter) {
        const auto q = random_q(6, 3, rng);
        const auto reference = aggregate(q, Rule::mean_arithmetic).ranks();
        for (std::size_t drop = 0; drop < 3; ++drop) {
            std::vector<std::size_t> keep;
            for (std::size_t i = 0; i < 3; ++i)
                if (i != drop) keep.push_back(i);
            const auto sub = detail::cols_subset(q, keep);
            const auto sub_ranks = aggregate(sub, Rule::mean_arithmetic).ranks();
            CHECK(detail::ranking_spearman(sub_ranks, detail::restrict(reference, keep)) ==
                  doctest::Approx(1.0));
        }
    }
}

TEST_CASE("minimax is less stable than geometric mean under method drops on a dominant-method Q") {
    // one dominant method plus near-tied rest: removing methods reshuffles
    // minimax defeat counts but never the geometric means
    auto rng = make_rng(109);
    MetricMatrix q = random_q(12, 6, rng);
    for (std::size_t t = 0; t < q.num_datasets(); ++t) {
        for (std::size_t i = 1; i < q.num_methods(); ++i)
            q.values[t][i] = 0.4 + 0.2 * uniform01(rng);
        q.values[t][0] = 0.9;  // dominant
    }
    const auto geom = drop_methods_curve(q, Rule::mean_geometric, {2}, 300, 5);
    const auto mm = drop_methods_curve(q, Rule::minimax, {2}, 300, 5);
    CHECK(mm.mean[0] < geom.mean[0]);
}

TEST_CASE("clone injection at alpha=1 is invisible to the five scale-free rules") {
    auto rng = make_rng(110);
    for (int iter = 0; iter < 60; ++iter) {
        const auto q = random_q(2 + uniform_int(rng, 0, 12), 2 + uniform_int(rng, 0, 6), rng);
        const auto target = uniform_int(rng, 0, q.num_methods() - 1);
        for (const Rule rule : {Rule::dm_auc, Rule::dm_lbo, Rule::mean_arithmetic,
                                Rule::mean_geometric, Rule::mean_harmonic}) {
            CHECK(add_similar_method(q, rule, target, 1.0).spearman == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("frozen fixture: alpha=1 clone flips mean-ranks order") {
    // search seed 99, found at iteration 0 (d=7, m=6), target 0
    const auto q = frozen_q(99, 2, 6, 3, 3);
    REQUIRE(q.num_datasets() == 7);
    REQUIRE(q.num_methods() == 6);
    const auto res = add_similar_method(q, Rule::mean_ranks, 0, 1.0);
    CHECK(res.spearman < 1.0 - 1e-9);
}

TEST_CASE("frozen fixture: alpha=1 clone flips copeland order") {
    const auto q = frozen_q(99, 2, 6, 3, 3);
    const auto res = add_similar_method(q, Rule::copeland, 0, 1.0);
    CHECK(res.spearman < 1.0 - 1e-9);
}

TEST_CASE("clone at alpha=0.85 of the worst method leaves mean aggregation unchanged") {
    auto rng = make_rng(111);
    const auto q = random_q(10, 5, rng);
    const auto worst = aggregate(q, Rule::mean_arithmetic).order.back();
    const auto res = add_similar_method(q, Rule::mean_arithmetic, worst, 0.85);
    CHECK(res.spearman == doctest::Approx(1.0));
}

TEST_CASE("alpha outside the paper regime only warns") {
    auto rng = make_rng(112);
    const auto q = random_q(5, 3, rng);
    Warnings w;
    add_similar_method(q, Rule::mean_arithmetic, 0, 1.5, {}, &w);
    CHECK_FALSE(w.empty());
}

TEST_CASE("new best method: mean aggregation order of originals never moves") {
    auto rng = make_rng(113);
    for (int iter = 0; iter < 40; ++iter) {
        const auto q = random_q(2 + uniform_int(rng, 0, 10), 2 + uniform_int(rng, 0, 5), rng);
        for (const double alpha : {1.0, 2.0, 3.0, 4.0}) {
            CHECK(add_best_method(q, Rule::mean_arithmetic, alpha).spearman == doctest::Approx(1.0));
            CHECK(add_best_method(q, Rule::mean_geometric, alpha).spearman == doctest::Approx(1.0));
            CHECK(add_best_method(q, Rule::mean_harmonic, alpha).spearman == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("frozen fixture: DM-AUC originals flip as alpha grows, then collapse") {
    // hand-built: m2 is the per-row best; m0 decays slowly from a large area,
    // m1 retains a sliver longer once alpha compresses the ratios
    const auto q = make_q({{2.0 / 3.0, 1.0 / 2.8, 1.0},
                           {2.0 / 3.0, 1.0 / 2.8, 1.0},
                           {2.0 / 3.0, 1.0, 1.0}});
    // ratios per column: m0: {1.5,1.5,1.5}, m1: {2.8,2.8,1}, m2: {1,1,1}
    const auto before = aggregate(q, Rule::dm_auc).ranks();
    CHECK(before[0] < before[1]);  // m0 ahead of m1 at alpha = 0 (no injection)
    const auto at1 = add_best_method(q, Rule::dm_auc, 1.0);
    CHECK(at1.spearman == doctest::Approx(1.0));
    const auto at2 = add_best_method(q, Rule::dm_auc, 2.0);
    CHECK(at2.spearman < 1.0 - 1e-9);  // m0 saturates (2*1.5 = 3), m1 keeps its win row
    const auto at4 = add_best_method(q, Rule::dm_auc, 4.0);
    CHECK(at4.spearman < 0.5);  // every original ratio exceeds beta_hat: collapse
}

TEST_CASE("frozen fixture: minimax is unstable for any alpha") {
    // search seed 8000, found at iteration 0 (d=5, m=4)
    const auto q = frozen_q(8000, 4, 8, 4, 4);
    REQUIRE(q.num_datasets() == 5);
    REQUIRE(q.num_methods() == 4);
    CHECK(add_best_method(q, Rule::minimax, 1.0).spearman < 0.9);
    for (const double alpha : {2.0, 3.0, 4.0}) {
        // the injected method majority-beats everyone d:0, so all originals
        // tie at -d and the ranking collapses
        CHECK(add_best_method(q, Rule::minimax, alpha).spearman == doctest::Approx(0.0));
    }
}

TEST_CASE("beta sensitivity: reference point reads 1 and the tail saturates") {
    auto rng = make_rng(114);
    const auto q = random_q(10, 5, rng);
    const auto rep = beta_sensitivity(q, Rule::dm_auc, {1.5, 3.0, 50.0, 100.0, 200.0}, 3.0);
    CHECK(rep.mean[1] == doctest::Approx(1.0));
    // ratios are bounded, so far beyond every breakpoint the ordering freezes
    CHECK(rep.mean[3] == doctest::Approx(rep.mean[4]));
    const auto lbo = beta_sensitivity(q, Rule::dm_lbo, {3.0}, 3.0);
    CHECK(lbo.mean[0] == doctest::Approx(1.0));
}

TEST_CASE("beta sensitivity: crossing profiles dip below the crossing point") {
    // A wins two rows but badly loses the third; B is close everywhere.
    // Small beta_hat rewards wins, large beta_hat rewards consistency.
    const auto q = make_q({{1.0, 1.0 / 1.2}, {1.0, 1.0 / 1.2}, {0.25, 1.0}});
    const auto rep = beta_sensitivity(q, Rule::dm_auc, {1.1, 5.0}, 5.0);
    CHECK(rep.mean[1] == doctest::Approx(1.0));
    CHECK(rep.mean[0] == doctest::Approx(-1.0));  // order flips below the crossing
}

TEST_CASE("pareto: planted dominant method ranked first by all eight rules") {
    auto rng = make_rng(115);
    for (int iter = 0; iter < 10; ++iter) {
        auto q = random_q(8, 5, rng);
        for (std::size_t t = 0; t < q.num_datasets(); ++t) {
            double mx = 0;
            for (std::size_t i = 1; i < q.num_methods(); ++i) mx = std::max(mx, q.values[t][i]);
            q.values[t][0] = mx + 0.05;
        }
        for (const Rule rule : kAllRules) {
            const auto check = pareto_check(q, rule);
            CHECK(check.ok);
            CHECK(check.violations.empty());
            CHECK(aggregate(q, rule).order[0] == 0);
        }
    }
}

TEST_CASE("pareto: vacuous truth without dominance; sanity inversion detected") {
    // rows anti-correlated: no column weakly dominates another
    const auto q = make_q({{0.9, 0.1, 0.5}, {0.1, 0.9, 0.5}, {0.5, 0.5, 0.9}});
    for (const Rule rule : kAllRules) CHECK(pareto_check(q, rule).ok);

    // a hand-broken "rule" that inverts a genuine dominance must be flagged
    const auto dominated = make_q({{0.9, 0.5}, {0.8, 0.4}, {0.7, 0.7}});
    const auto honest = pareto_check_ranks(dominated, {1.0, 2.0});
    CHECK(honest.ok);
    const auto broken = pareto_check_ranks(dominated, {2.0, 1.0});
    CHECK_FALSE(broken.ok);
    REQUIRE(broken.violations.size() == 1);
    CHECK(broken.violations[0].first == "m0");
    CHECK(broken.violations[0].second == "m1");
}

TEST_CASE("perturbed leaderboards remain structurally valid") {
    auto rng = make_rng(116);
    const auto q = random_q(9, 4, rng);
    for (const Rule rule : kAllRules) {
        const auto res = add_best_method(q, rule, 2.0);
        const auto& lb = res.perturbed;
        CHECK(lb.methods.size() == 5);
        CHECK(lb.order.size() == 5);
        std::vector<std::size_t> sorted_order = lb.order;
        std::sort(sorted_order.begin(), sorted_order.end());
        for (std::size_t i = 0; i < 5; ++i) CHECK(sorted_order[i] == i);
        for (std::size_t pos = 0; pos + 1 < lb.order.size(); ++pos) {
            const double a = lb.scores[lb.order[pos]];
            const double b = lb.scores[lb.order[pos + 1]];
            CHECK((lb.higher_is_better ? a >= b : a <= b));
        }
    }
}
