#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankbench/metric_matrix.hpp"
#include "rankbench/rng.hpp"
#include "rankbench/warnings.hpp"

namespace rankbench {

// Ascending average-tie ranks: smallest value gets rank 1, exact ties share
// the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
        i = j + 1;
    }
    return ranks;
}

// Pearson product-moment correlation; a constant vector yields 0 (flagged).
inline double pearson(const std::vector<double>& x, const std::vector<double>& y,
                      Warnings* warnings = nullptr) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson: need two equal-length vectors of size >= 2");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        warn(warnings, "pearson: constant vector, correlation defined as 0");
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

// Spearman rank correlation: Pearson over average-tie ranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y,
                       Warnings* warnings = nullptr) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length vectors of size >= 2");
    return pearson(average_ranks(x), average_ranks(y), warnings);
}

// Plug-in mutual information in bits with quantile binning (default
// min(ceil(sqrt(n)), 10) bins per axis).
inline double mutual_information(const std::vector<double>& x, const std::vector<double>& y,
                                 std::size_t bins = 0, Warnings* warnings = nullptr) {
    if (x.size() != y.size() || x.size() < 4)
        throw std::invalid_argument("mutual_information: need equal-length vectors of size >= 4");
    const std::size_t n = x.size();
    if (bins == 0) bins = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))), 10);
    if (bins < 2) bins = 2;

    auto bin_assign = [&](const std::vector<double>& v) {
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> edges;
        edges.reserve(bins - 1);
        for (std::size_t j = 1; j < bins; ++j) edges.push_back(sorted[j * n / bins]);
        std::vector<std::size_t> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t b = 0;
            for (const double e : edges)
                if (v[i] >= e) ++b;
            out[i] = b;
        }
        return out;
    };
    const auto bx = bin_assign(x);
    const auto by = bin_assign(y);

    std::vector<double> px(bins, 0.0), py(bins, 0.0);
    std::vector<std::vector<double>> pxy(bins, std::vector<double>(bins, 0.0));
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        px[bx[i]] += inv;
        py[by[i]] += inv;
        pxy[bx[i]][by[i]] += inv;
    }
    if (std::count_if(px.begin(), px.end(), [](double p) { return p > 0; }) <= 1 ||
        std::count_if(py.begin(), py.end(), [](double p) { return p > 0; }) <= 1) {
        warn(warnings, "mutual_information: constant vector, MI = 0");
        return 0.0;
    }
    double mi = 0.0;
    for (std::size_t a = 0; a < bins; ++a)
        for (std::size_t b = 0; b < bins; ++b)
            if (pxy[a][b] > 0) mi += pxy[a][b] * std::log2(pxy[a][b] / (px[a] * py[b]));
    return std::max(mi, 0.0);
}

namespace detail {

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

// Two-sided Wilcoxon signed-rank p-value on a difference vector. Zero
// differences are dropped; the null distribution is exact (sign-flip
// enumeration over doubled average ranks) up to 25 non-zero pairs, and a
// normal approximation with tie correction above.
inline double wilcoxon_signed_rank(const std::vector<double>& diffs) {
    std::vector<double> nz;
    nz.reserve(diffs.size());
    for (const double d : diffs)
        if (d != 0.0) nz.push_back(d);
    const std::size_t n = nz.size();
    if (n == 0) return 1.0;

    std::vector<double> abs(n);
    for (std::size_t i = 0; i < n; ++i) abs[i] = std::fabs(nz[i]);
    const auto ranks = average_ranks(abs);

    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (nz[i] > 0) w_plus += ranks[i];

    if (n <= 25) {
        // doubled ranks are integers even with average ties
        std::vector<std::size_t> g(n);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
            total += g[i];
        }
        std::vector<std::uint64_t> counts(total + 1, 0);
        counts[0] = 1;
        for (const auto gi : g)
            for (std::size_t s = total; s + 1 > gi; --s)
                if (counts[s - gi] != 0) counts[s] += counts[s - gi];
        const auto w2 = static_cast<std::size_t>(std::llround(2.0 * w_plus));
        std::uint64_t le = 0, ge = 0;
        for (std::size_t s = 0; s <= total; ++s) {
            if (s <= w2) le += counts[s];
            if (s >= w2) ge += counts[s];
        }
        const double denom = std::pow(2.0, static_cast<double>(n));
        const double p = 2.0 * std::min(static_cast<double>(le), static_cast<double>(ge)) / denom;
        return std::min(p, 1.0);
    }

    const double dn = static_cast<double>(n);
    const double mu = dn * (dn + 1.0) / 4.0;
    double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
    {
        // tie correction: subtract sum(t^3 - t)/48 over tie groups of |diffs|
        std::vector<double> sorted = abs;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
    }
    if (var <= 0.0) return 1.0;
    const double z = std::fabs(w_plus - mu) / std::sqrt(var);
    return std::min(1.0, 2.0 * detail::normal_sf(z));
}

// Holm step-down adjustment; output aligned with input, capped at 1.
inline std::vector<double> holm_adjust(const std::vector<double>& raw) {
    const std::size_t k = raw.size();
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    std::vector<double> adj(k, 0.0);
    double running = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double stepped = static_cast<double>(k - i) * raw[idx[i]];
        running = std::max(running, stepped);
        adj[idx[i]] = std::min(running, 1.0);
    }
    return adj;
}

struct BayesTriple {
    double p_left = 0.0;   // second sample better
    double p_rope = 0.0;
    double p_right = 0.0;  // first sample better
};

// Bayesian signed-rank test: the difference vector is augmented with the
// pseudo-observation z0 = 0 (prior weight 1); each Monte Carlo draw samples
// Dirichlet(1,...,1) weights and classifies the draw by which region
// (< -rope, [-rope, rope], > rope) carries the largest weighted mass of the
// pairwise statistics (z_i + z_j)/2. Probabilities are draw frequencies.
inline BayesTriple bayesian_signed_rank(const std::vector<double>& diffs, double rope,
                                        std::size_t mc_samples, std::uint64_t seed,
                                        Warnings* warnings = nullptr) {
    if (diffs.empty()) throw std::invalid_argument("bayesian_signed_rank: empty difference vector");
    if (rope < 0) throw std::invalid_argument("bayesian_signed_rank: rope must be non-negative");
    if (mc_samples < 100) warn(warnings, "bayesian_signed_rank: fewer than 100 samples gives a noisy posterior");

    std::vector<double> z;
    z.reserve(diffs.size() + 1);
    z.push_back(0.0);  // pseudo-observation
    z.insert(z.end(), diffs.begin(), diffs.end());
    const std::size_t q = z.size();

    auto rng = make_rng(seed);
    std::size_t n_left = 0, n_rope = 0, n_right = 0;
    for (std::size_t s = 0; s < mc_samples; ++s) {
        const auto w = dirichlet_uniform(q, rng);
        double th_l = 0, th_e = 0, th_r = 0;
        for (std::size_t i = 0; i < q; ++i) {
            for (std::size_t j = 0; j < q; ++j) {
                const double m = 0.5 * (z[i] + z[j]);
                const double ww = w[i] * w[j];
                if (m < -rope) th_l += ww;
                else if (m > rope) th_r += ww;
                else th_e += ww;
            }
        }
        if (th_l > th_e && th_l > th_r) ++n_left;
        else if (th_r > th_e && th_r > th_l) ++n_right;
        else ++n_rope;
    }
    BayesTriple t;
    const double dn = static_cast<double>(mc_samples);
    t.p_left = static_cast<double>(n_left) / dn;
    t.p_rope = static_cast<double>(n_rope) / dn;
    t.p_right = static_cast<double>(n_right) / dn;
    return t;
}

struct PairwiseTestReport {
    std::vector<std::string> methods;
    std::vector<std::vector<double>> wilcoxon_adj_p;  // symmetric, diagonal 1
    std::vector<std::vector<BayesTriple>> bayes;      // bayes[a][b].p_right = a better
    double alpha = 0.05;
    double rope = 0.0;
    bool has_wilcoxon = false;
    bool has_bayes = false;
};

// Pairwise two-sided Wilcoxon signed-rank over per-dataset differences with
// Holm correction across all C(m,2) pairs.
inline PairwiseTestReport wilcoxon_holm(const MetricMatrix& q, double alpha = 0.05,
                                        Warnings* warnings = nullptr) {
    const std::size_t m = q.num_methods();
    if (m < 2) throw std::invalid_argument("wilcoxon_holm: need at least 2 methods");
    if (q.num_datasets() < 5) warn(warnings, "wilcoxon_holm: fewer than 5 datasets, test has little power");

    PairwiseTestReport report;
    report.methods = q.methods;
    report.alpha = alpha;
    report.wilcoxon_adj_p.assign(m, std::vector<double>(m, 1.0));
    report.has_wilcoxon = true;

    std::vector<double> raw;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            std::vector<double> diffs(q.num_datasets());
            for (std::size_t t = 0; t < q.num_datasets(); ++t) diffs[t] = q.values[t][a] - q.values[t][b];
            raw.push_back(wilcoxon_signed_rank(diffs));
            pairs.emplace_back(a, b);
        }
    }
    const auto adj = holm_adjust(raw);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        report.wilcoxon_adj_p[pairs[i].first][pairs[i].second] = adj[i];
        report.wilcoxon_adj_p[pairs[i].second][pairs[i].first] = adj[i];
    }
    return report;
}

// Adds the Bayesian signed-rank matrix to a report; pair seeds derive from
// (seed, indices) so results are independent of evaluation order.
inline void fill_bayesian(PairwiseTestReport& report, const MetricMatrix& q, double rope,
                          std::size_t mc_samples, std::uint64_t seed, Warnings* warnings = nullptr) {
    const std::size_t m = q.num_methods();
    report.rope = rope;
    report.bayes.assign(m, std::vector<BayesTriple>(m, BayesTriple{0.0, 1.0, 0.0}));
    report.has_bayes = true;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            std::vector<double> diffs(q.num_datasets());
            for (std::size_t t = 0; t < q.num_datasets(); ++t) diffs[t] = q.values[t][a] - q.values[t][b];
            const auto tri = bayesian_signed_rank(diffs, rope, mc_samples,
                                                  derive_seed(seed, "bayes", a, b), warnings);
            report.bayes[a][b] = tri;
            report.bayes[b][a] = BayesTriple{tri.p_right, tri.p_rope, tri.p_left};
        }
    }
}

struct CdDiagramData {
    std::vector<std::string> methods;  // ordered by mean rank, best first
    std::vector<double> mean_ranks;    // aligned with methods
    // cliques hold indices into `methods`
    std::vector<std::vector<std::size_t>> wilcoxon_cliques;
    std::vector<std::vector<std::size_t>> bayes_cliques;
};

namespace detail {

// Bron-Kerbosch with pivoting over an adjacency matrix; keeps cliques of
// size >= 2.
inline void maximal_cliques(const std::vector<std::vector<char>>& adj,
                            std::vector<std::vector<std::size_t>>& out) {
    const std::size_t n = adj.size();
    std::vector<std::size_t> R;
    std::vector<std::size_t> P(n), X;
    std::iota(P.begin(), P.end(), std::size_t{0});

    struct Helper {
        const std::vector<std::vector<char>>& adj;
        std::vector<std::vector<std::size_t>>& out;
        void run(std::vector<std::size_t>& R, std::vector<std::size_t> P, std::vector<std::size_t> X) {
            if (P.empty() && X.empty()) {
                if (R.size() >= 2) {
                    auto clique = R;
                    std::sort(clique.begin(), clique.end());
                    out.push_back(std::move(clique));
                }
                return;
            }
            std::size_t pivot = P.empty() ? X.front() : P.front();
            std::size_t best = 0;
            for (const auto u : P) {
                std::size_t deg = 0;
                for (const auto v : P)
                    if (adj[u][v]) ++deg;
                if (deg >= best) { best = deg; pivot = u; }
            }
            std::vector<std::size_t> candidates;
            for (const auto v : P)
                if (!adj[pivot][v]) candidates.push_back(v);
            for (const auto v : candidates) {
                std::vector<std::size_t> P2, X2;
                for (const auto w : P)
                    if (adj[v][w]) P2.push_back(w);
                for (const auto w : X)
                    if (adj[v][w]) X2.push_back(w);
                R.push_back(v);
                run(R, std::move(P2), std::move(X2));
                R.pop_back();
                P.erase(std::find(P.begin(), P.end(), v));
                X.push_back(v);
            }
        }
    } helper{adj, out};
    helper.run(R, std::move(P), std::move(X));
    std::sort(out.begin(), out.end());
}

}  // namespace detail

// Plot data for a Critical Difference diagram: mean ranks (rank 1 = best,
// average ties) plus the maximal non-significant cliques of each test.
// Bayesian non-significance means max(P_left, P_right) < 0.85.
inline CdDiagramData cd_diagram_data(const MetricMatrix& q, const PairwiseTestReport& tests,
                                     double bayes_threshold = 0.85) {
    const std::size_t m = q.num_methods();
    if (tests.methods != q.methods)
        throw std::invalid_argument("cd_diagram_data: tests were computed on a different matrix");

    std::vector<double> mean_rank(m, 0.0);
    for (std::size_t t = 0; t < q.num_datasets(); ++t) {
        std::vector<double> neg(m);
        for (std::size_t i = 0; i < m; ++i) neg[i] = -q.values[t][i];
        const auto r = average_ranks(neg);  // rank 1 = highest metric
        for (std::size_t i = 0; i < m; ++i) mean_rank[i] += r[i];
    }
    for (auto& v : mean_rank) v /= static_cast<double>(q.num_datasets());

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (mean_rank[a] != mean_rank[b]) return mean_rank[a] < mean_rank[b];
        return q.methods[a] < q.methods[b];
    });
    std::vector<std::size_t> pos(m);
    for (std::size_t i = 0; i < m; ++i) pos[order[i]] = i;

    CdDiagramData data;
    for (const auto i : order) {
        data.methods.push_back(q.methods[i]);
        data.mean_ranks.push_back(mean_rank[i]);
    }

    auto cliques_for = [&](auto edge) {
        std::vector<std::vector<char>> adj(m, std::vector<char>(m, 0));
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                if (a != b && edge(order[a], order[b])) adj[a][b] = 1;
        std::vector<std::vector<std::size_t>> cliques;
        detail::maximal_cliques(adj, cliques);
        return cliques;
    };
    if (tests.has_wilcoxon)
        data.wilcoxon_cliques = cliques_for([&](std::size_t a, std::size_t b) {
            return tests.wilcoxon_adj_p[a][b] >= tests.alpha;
        });
    if (tests.has_bayes)
        data.bayes_cliques = cliques_for([&](std::size_t a, std::size_t b) {
            const auto& t = tests.bayes[a][b];
            return std::max(t.p_left, t.p_right) < bayes_threshold;
        });
    return data;
}

}  // namespace rankbench
