#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankbench/aggregation.hpp"
#include "rankbench/metric_matrix.hpp"
#include "rankbench/rng.hpp"
#include "rankbench/stats.hpp"
#include "rankbench/warnings.hpp"

namespace rankbench {

struct FeatureTable {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::vector<std::vector<double>> values;  // [row][col]

    std::size_t num_rows() const { return rows.size(); }
    std::size_t num_cols() const { return cols.size(); }

    Eigen::MatrixXd matrix() const {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(num_rows()), static_cast<Eigen::Index>(num_cols()));
        for (std::size_t r = 0; r < num_rows(); ++r)
            for (std::size_t c = 0; c < num_cols(); ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r][c];
        return m;
    }
};

struct SelectionResult {
    std::string method;
    std::vector<std::size_t> selected;  // row indices, ascending
    double criterion = 0.0;             // silhouette / log-det / A-criterion value
    int chosen_k = 0;                   // kmeans only
    std::vector<int> cluster_of;        // per input row; -1 when not applicable
};

// Column mean 0, population std 1. Constant columns are dropped (flagged).
inline FeatureTable standardize(const FeatureTable& f, Warnings* warnings = nullptr) {
    const std::size_t n = f.num_rows();
    if (n < 2) throw std::invalid_argument("standardize: need at least 2 rows");
    FeatureTable out;
    out.rows = f.rows;
    out.values.assign(n, {});
    for (std::size_t c = 0; c < f.num_cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += f.values[r][c];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) var += (f.values[r][c] - mean) * (f.values[r][c] - mean);
        var /= static_cast<double>(n);
        if (var <= 0.0) {
            warn(warnings, "standardize: dropping constant column '" + f.cols[c] + "'");
            continue;
        }
        const double sd = std::sqrt(var);
        out.cols.push_back(f.cols[c]);
        for (std::size_t r = 0; r < n; ++r) out.values[r].push_back((f.values[r][c] - mean) / sd);
    }
    if (out.cols.empty()) throw std::runtime_error("standardize: all columns constant");
    return out;
}

// Projects standardized features onto the smallest leading eigenvector set
// of the covariance reaching the explained-variance target. Component signs
// are fixed so each component's largest-magnitude loading is positive.
inline FeatureTable pca(const FeatureTable& f, double variance_target = 0.95) {
    if (!(variance_target > 0.0 && variance_target <= 1.0))
        throw std::invalid_argument("pca: variance_target must lie in (0, 1]");
    const auto x = f.matrix();
    const auto n = x.rows();
    if (n < 2) throw std::invalid_argument("pca: need at least 2 rows");
    const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigensolver failed");
    // SelfAdjointEigenSolver returns ascending eigenvalues
    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    const auto p = evals.size();
    double total = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) total += std::max(evals(i), 0.0);
    if (total <= 0.0) throw std::runtime_error("pca: zero total variance");

    std::size_t keep = 0;
    double acc = 0.0;
    for (Eigen::Index i = p - 1; i >= 0; --i) {
        acc += std::max(evals(i), 0.0);
        ++keep;
        if (acc / total >= variance_target - 1e-12) break;
    }

    FeatureTable out;
    out.rows = f.rows;
    Eigen::MatrixXd basis(p, static_cast<Eigen::Index>(keep));
    for (std::size_t c = 0; c < keep; ++c) {
        Eigen::VectorXd v = evecs.col(p - 1 - static_cast<Eigen::Index>(c));
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        basis.col(static_cast<Eigen::Index>(c)) = v;
        out.cols.push_back("pc" + std::to_string(c + 1));
    }
    const Eigen::MatrixXd proj = x * basis;
    out.values.assign(static_cast<std::size_t>(n), std::vector<double>(keep));
    for (Eigen::Index r = 0; r < n; ++r)
        for (std::size_t c = 0; c < keep; ++c)
            out.values[static_cast<std::size_t>(r)][c] = proj(r, static_cast<Eigen::Index>(c));
    return out;
}

namespace detail {

struct IsoNode {
    int feature = -1;
    double split = 0.0;
    int left = -1, right = -1;
    std::size_t size = 0;  // external node size
};

// Average unsuccessful-search path length in a BST of n nodes.
inline double iso_c(std::size_t n) {
    if (n <= 1) return 0.0;
    const double h = std::log(static_cast<double>(n - 1)) + 0.5772156649015328606;
    return 2.0 * h - 2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
}

struct IsoTree {
    std::vector<IsoNode> nodes;

    int build(const Eigen::MatrixXd& x, std::vector<std::size_t> idx, std::size_t depth,
              std::size_t max_depth, Rng& rng) {
        IsoNode node;
        if (idx.size() <= 1 || depth >= max_depth) {
            node.size = idx.size();
            nodes.push_back(node);
            return static_cast<int>(nodes.size() - 1);
        }
        // choose a feature with spread; bail out to a leaf if none
        std::vector<int> spread_features;
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto r : idx) {
                lo = std::min(lo, x(static_cast<Eigen::Index>(r), c));
                hi = std::max(hi, x(static_cast<Eigen::Index>(r), c));
            }
            if (hi > lo) spread_features.push_back(static_cast<int>(c));
        }
        if (spread_features.empty()) {
            node.size = idx.size();
            nodes.push_back(node);
            return static_cast<int>(nodes.size() - 1);
        }
        const int feature = spread_features[static_cast<std::size_t>(
            uniform_int(rng, 0, spread_features.size() - 1))];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto r : idx) {
            lo = std::min(lo, x(static_cast<Eigen::Index>(r), feature));
            hi = std::max(hi, x(static_cast<Eigen::Index>(r), feature));
        }
        const double split = uniform_real(rng, lo, hi);
        std::vector<std::size_t> left, right;
        for (const auto r : idx) {
            if (x(static_cast<Eigen::Index>(r), feature) < split) left.push_back(r);
            else right.push_back(r);
        }
        if (left.empty() || right.empty()) {
            node.size = idx.size();
            nodes.push_back(node);
            return static_cast<int>(nodes.size() - 1);
        }
        node.feature = feature;
        node.split = split;
        nodes.push_back(node);
        const auto self = static_cast<int>(nodes.size() - 1);
        const int l = build(x, std::move(left), depth + 1, max_depth, rng);
        const int r = build(x, std::move(right), depth + 1, max_depth, rng);
        nodes[static_cast<std::size_t>(self)].left = l;
        nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }

    double path_length(const Eigen::MatrixXd& x, std::size_t row) const {
        std::size_t cur = 0;
        double depth = 0.0;
        while (true) {
            const auto& node = nodes[cur];
            if (node.feature < 0) return depth + iso_c(node.size);
            depth += 1.0;
            cur = static_cast<std::size_t>(
                x(static_cast<Eigen::Index>(row), node.feature) < node.split ? node.left : node.right);
        }
    }
};

}  // namespace detail

// Standard isolation forest: random split dimension, uniform split point,
// path-length anomaly score with harmonic-number normalization. Flags the
// ceil(contamination * n) highest-scoring rows (ties to the lowest index).
inline std::vector<std::size_t> isolation_forest_outliers(const FeatureTable& f, std::size_t trees,
                                                          std::size_t subsample, double contamination,
                                                          std::uint64_t seed) {
    const std::size_t n = f.num_rows();
    if (n < 4) throw std::invalid_argument("isolation_forest_outliers: need at least 4 rows");
    if (!(contamination >= 0.0 && contamination < 0.5))
        throw std::invalid_argument("isolation_forest_outliers: contamination must lie in [0, 0.5)");
    const std::size_t flag = static_cast<std::size_t>(std::ceil(contamination * static_cast<double>(n)));
    if (flag == 0) return {};

    const auto x = f.matrix();
    const std::size_t psi = std::min(subsample, n);
    const auto max_depth = static_cast<std::size_t>(
        std::ceil(std::log2(std::max<double>(2.0, static_cast<double>(psi)))));

    std::vector<double> avg_path(n, 0.0);
    for (std::size_t t = 0; t < trees; ++t) {
        auto rng = make_rng(derive_seed(seed, "iso_tree", t));
        auto idx = sample_without_replacement(n, psi, rng);
        detail::IsoTree tree;
        tree.build(x, std::move(idx), 0, max_depth, rng);
        for (std::size_t r = 0; r < n; ++r) avg_path[r] += tree.path_length(x, r);
    }
    const double norm = detail::iso_c(psi);
    std::vector<double> score(n);
    for (std::size_t r = 0; r < n; ++r)
        score[r] = std::pow(2.0, -(avg_path[r] / static_cast<double>(trees)) / std::max(norm, 1e-12));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(flag));
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

struct KMeansRun {
    std::vector<int> assign;
    Eigen::MatrixXd centroids;
    double inertia = 0.0;
};

inline double sq_dist(const Eigen::MatrixXd& x, std::size_t row, const Eigen::MatrixXd& c, int cluster) {
    return (x.row(static_cast<Eigen::Index>(row)) - c.row(cluster)).squaredNorm();
}

inline KMeansRun kmeans_once(const Eigen::MatrixXd& x, int k, Rng& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    Eigen::MatrixXd centroids(k, x.cols());

    // k-means++ seeding
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    const auto first = static_cast<std::size_t>(uniform_int(rng, 0, n - 1));
    centroids.row(0) = x.row(static_cast<Eigen::Index>(first));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            min_d[r] = std::min(min_d[r], sq_dist(x, r, centroids, c - 1));
            total += min_d[r];
        }
        std::size_t chosen = n - 1;
        if (total > 0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                acc += min_d[r];
                if (acc >= target) { chosen = r; break; }
            }
        } else {
            chosen = static_cast<std::size_t>(uniform_int(rng, 0, n - 1));
        }
        centroids.row(c) = x.row(static_cast<Eigen::Index>(chosen));
    }

    KMeansRun run;
    run.assign.assign(n, 0);
    for (int iter = 0; iter < 300; ++iter) {
        for (std::size_t r = 0; r < n; ++r) {
            int best = 0;
            double best_d = sq_dist(x, r, centroids, 0);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(x, r, centroids, c);
                if (d < best_d) { best_d = d; best = c; }
            }
            run.assign[r] = best;
        }
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, x.cols());
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (std::size_t r = 0; r < n; ++r) {
            next.row(run.assign[r]) += x.row(static_cast<Eigen::Index>(r));
            sizes[static_cast<std::size_t>(run.assign[r])]++;
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] == 0) {
                // re-seed an empty cluster at the point farthest from its centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t r = 0; r < n; ++r) {
                    const double d = sq_dist(x, r, centroids, run.assign[r]);
                    if (d > far_d) { far_d = d; far = r; }
                }
                next.row(c) = x.row(static_cast<Eigen::Index>(far));
            } else {
                next.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
            }
        }
        const double shift = (next - centroids).rowwise().norm().maxCoeff();
        centroids = next;
        if (shift < 1e-9) break;
    }
    run.centroids = centroids;
    run.inertia = 0.0;
    for (std::size_t r = 0; r < n; ++r) run.inertia += sq_dist(x, r, centroids, run.assign[r]);
    return run;
}

inline double silhouette(const Eigen::MatrixXd& x, const std::vector<int>& assign, int k) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (const auto a : assign) sizes[static_cast<std::size_t>(a)]++;
    double total = 0.0;
    std::size_t counted = 0;
    bool any_spread = false;
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> mean_d(static_cast<std::size_t>(k), 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            if (s == r) continue;
            mean_d[static_cast<std::size_t>(assign[s])] +=
                (x.row(static_cast<Eigen::Index>(r)) - x.row(static_cast<Eigen::Index>(s))).norm();
        }
        const auto own = static_cast<std::size_t>(assign[r]);
        if (sizes[own] <= 1) { ++counted; continue; }  // singleton contributes 0
        const double a = mean_d[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, mean_d[c] / static_cast<double>(sizes[c]));
        }
        if (!std::isfinite(b)) { ++counted; continue; }  // no other live cluster
        const double denom = std::max(a, b);
        if (denom > 0) {
            total += (b - a) / denom;
            any_spread = true;
        }
        ++counted;
    }
    if (counted == 0 || !any_spread)
        throw std::runtime_error("silhouette: undefined on identical points");
    return total / static_cast<double>(counted);
}

inline double davies_bouldin(const Eigen::MatrixXd& x, const std::vector<int>& assign,
                             const Eigen::MatrixXd& centroids, int k) {
    std::vector<double> scatter(static_cast<std::size_t>(k), 0.0);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (std::size_t r = 0; r < static_cast<std::size_t>(x.rows()); ++r) {
        scatter[static_cast<std::size_t>(assign[r])] +=
            (x.row(static_cast<Eigen::Index>(r)) - centroids.row(assign[r])).norm();
        sizes[static_cast<std::size_t>(assign[r])]++;
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
        if (sizes[c] > 0) scatter[c] /= static_cast<double>(sizes[c]);
    double db = 0.0;
    int live = 0;
    for (int a = 0; a < k; ++a) {
        if (sizes[static_cast<std::size_t>(a)] == 0) continue;
        double worst = 0.0;
        for (int b = 0; b < k; ++b) {
            if (a == b || sizes[static_cast<std::size_t>(b)] == 0) continue;
            const double sep = (centroids.row(a) - centroids.row(b)).norm();
            if (sep > 0)
                worst = std::max(worst, (scatter[static_cast<std::size_t>(a)] +
                                         scatter[static_cast<std::size_t>(b)]) / sep);
        }
        db += worst;
        ++live;
    }
    return live > 0 ? db / static_cast<double>(live) : 0.0;
}

}  // namespace detail

// Best-of-restarts Lloyd k-means per candidate k; the chosen k maximizes the
// silhouette, ties broken by lower Davies-Bouldin, then by smaller k.
inline SelectionResult kmeans_cluster(const FeatureTable& f, std::vector<int> k_range,
                                      std::size_t restarts, std::uint64_t seed) {
    const auto x = f.matrix();
    const std::size_t n = f.num_rows();
    if (k_range.empty()) throw std::invalid_argument("kmeans_cluster: empty k range");
    std::sort(k_range.begin(), k_range.end());
    k_range.erase(std::unique(k_range.begin(), k_range.end()), k_range.end());
    for (const int k : k_range)
        if (k < 2 || static_cast<std::size_t>(k) >= n)
            throw std::invalid_argument("kmeans_cluster: k must lie in [2, n-1]");

    SelectionResult result;
    result.method = "kmeans";
    double best_sil = -std::numeric_limits<double>::infinity();
    double best_db = std::numeric_limits<double>::infinity();
    for (const int k : k_range) {
        detail::KMeansRun best_run;
        best_run.inertia = std::numeric_limits<double>::infinity();
        for (std::size_t rep = 0; rep < restarts; ++rep) {
            auto rng = make_rng(derive_seed(seed, "kmeans", static_cast<std::uint64_t>(k), rep));
            auto run = detail::kmeans_once(x, k, rng);
            if (run.inertia < best_run.inertia) best_run = std::move(run);
        }
        const double sil = detail::silhouette(x, best_run.assign, k);
        const double db = detail::davies_bouldin(x, best_run.assign, best_run.centroids, k);
        const bool better = sil > best_sil + 1e-15 ||
                            (std::fabs(sil - best_sil) <= 1e-15 &&
                             (db < best_db - 1e-15 ||
                              (std::fabs(db - best_db) <= 1e-15 && k < result.chosen_k)));
        if (better) {
            best_sil = sil;
            best_db = db;
            result.chosen_k = k;
            result.cluster_of.assign(best_run.assign.begin(), best_run.assign.end());
            result.criterion = sil;
        }
    }
    result.selected.clear();
    return result;
}

struct PrincipalKMeansConfig {
    double pca_variance = 0.95;
    std::size_t iso_trees = 100;
    std::size_t iso_subsample = 256;
    double iso_contamination = 1.0 / 6.0;  // mirrors the 30 -> 25 reduction
    std::size_t restarts = 10;
};

// Pipeline: standardize -> PCA -> isolation-forest outlier removal ->
// k-means with k = target_count -> per cluster the inlier closest to its
// centroid. Outliers still receive a cluster label in the report.
inline SelectionResult select_principal_kmeans(const FeatureTable& f, int target_count,
                                               std::uint64_t seed,
                                               const PrincipalKMeansConfig& cfg = {},
                                               Warnings* warnings = nullptr) {
    const std::size_t n = f.num_rows();
    if (target_count < 1 || static_cast<std::size_t>(target_count) > n)
        throw std::invalid_argument("select_principal_kmeans: bad target count");
    if (static_cast<std::size_t>(target_count) == n) {
        SelectionResult all;
        all.method = "kmeans";
        all.chosen_k = target_count;
        all.selected.resize(n);
        std::iota(all.selected.begin(), all.selected.end(), std::size_t{0});
        all.cluster_of.resize(n);
        std::iota(all.cluster_of.begin(), all.cluster_of.end(), 0);
        return all;
    }

    const auto reduced = pca(standardize(f, warnings), cfg.pca_variance);
    const auto outliers = isolation_forest_outliers(reduced, cfg.iso_trees, cfg.iso_subsample,
                                                    cfg.iso_contamination, derive_seed(seed, "iso"));
    std::vector<std::size_t> inliers;
    for (std::size_t r = 0; r < n; ++r)
        if (!std::binary_search(outliers.begin(), outliers.end(), r)) inliers.push_back(r);
    if (inliers.size() <= static_cast<std::size_t>(target_count)) {
        inliers.resize(n);
        std::iota(inliers.begin(), inliers.end(), std::size_t{0});
        warn(warnings, "select_principal_kmeans: too few inliers, keeping all rows");
    }

    FeatureTable sub;
    sub.cols = reduced.cols;
    for (const auto r : inliers) {
        sub.rows.push_back(reduced.rows[r]);
        sub.values.push_back(reduced.values[r]);
    }
    const auto x_sub = sub.matrix();

    detail::KMeansRun best_run;
    best_run.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t rep = 0; rep < cfg.restarts; ++rep) {
        auto rng = make_rng(derive_seed(seed, "principal_kmeans", rep));
        auto run = detail::kmeans_once(x_sub, target_count, rng);
        if (run.inertia < best_run.inertia) best_run = std::move(run);
    }

    SelectionResult result;
    result.method = "kmeans";
    result.chosen_k = target_count;
    result.criterion = detail::silhouette(x_sub, best_run.assign, target_count);

    // per cluster: the inlier minimizing distance to its centroid
    std::vector<double> best_d(static_cast<std::size_t>(target_count),
                               std::numeric_limits<double>::infinity());
    std::vector<std::size_t> champion(static_cast<std::size_t>(target_count),
                                      std::numeric_limits<std::size_t>::max());
    for (std::size_t s = 0; s < inliers.size(); ++s) {
        const auto c = static_cast<std::size_t>(best_run.assign[s]);
        const double d = detail::sq_dist(x_sub, s, best_run.centroids, best_run.assign[s]);
        if (d < best_d[c]) {
            best_d[c] = d;
            champion[c] = inliers[s];
        }
    }
    for (const auto r : champion)
        if (r != std::numeric_limits<std::size_t>::max()) result.selected.push_back(r);
    std::sort(result.selected.begin(), result.selected.end());

    // assign every row (outliers included) to its nearest centroid
    const auto x_all = reduced.matrix();
    result.cluster_of.assign(n, -1);
    for (std::size_t s = 0; s < inliers.size(); ++s) result.cluster_of[inliers[s]] = best_run.assign[s];
    for (std::size_t r = 0; r < n; ++r) {
        if (result.cluster_of[r] >= 0) continue;
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < target_count; ++c) {
            const double d = (x_all.row(static_cast<Eigen::Index>(r)) - best_run.centroids.row(c)).squaredNorm();
            if (d < bd) { bd = d; best = c; }
        }
        result.cluster_of[r] = best;
    }
    return result;
}

enum class DesignCriterion { A, D };

namespace detail {

// D: log det(X^T X) to maximize; A: tr((X^T X)^-1)/3 to minimize. X carries
// an appended intercept column. Singular Grams score as unusable.
inline double design_score(const Eigen::MatrixXd& features, const std::vector<std::size_t>& subset,
                           DesignCriterion criterion) {
    const auto p = features.cols() + 1;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(subset.size()), p);
    for (std::size_t r = 0; r < subset.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)).head(features.cols()) =
            features.row(static_cast<Eigen::Index>(subset[r]));
        x(static_cast<Eigen::Index>(r), p - 1) = 1.0;
    }
    const Eigen::MatrixXd gram = x.transpose() * x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    if (criterion == DesignCriterion::D) {
        const double det = lu.determinant();
        if (!(det > 0)) return std::numeric_limits<double>::infinity();
        return -std::log(det);  // smaller is better internally
    }
    return lu.inverse().trace() / 3.0;
}

}  // namespace detail

// Greedy local search with restarts: random initial subset, accept any
// improving single-element swap, stop at a local optimum.
inline SelectionResult optimal_design_select(const FeatureTable& f, int target_count,
                                             DesignCriterion criterion, std::size_t restarts,
                                             std::uint64_t seed) {
    const std::size_t n = f.num_rows();
    if (target_count < 1 || static_cast<std::size_t>(target_count) > n)
        throw std::invalid_argument("optimal_design_select: bad target count");
    const auto x = f.matrix();

    double best_internal = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_subset;
    for (std::size_t rep = 0; rep < restarts; ++rep) {
        auto rng = make_rng(derive_seed(seed, "optimal_design", rep));
        auto subset = sample_without_replacement(n, static_cast<std::size_t>(target_count), rng);
        std::sort(subset.begin(), subset.end());
        double score = detail::design_score(x, subset, criterion);

        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t si = 0; si < subset.size() && !improved; ++si) {
                for (std::size_t cand = 0; cand < n && !improved; ++cand) {
                    if (std::binary_search(subset.begin(), subset.end(), cand)) continue;
                    auto trial = subset;
                    trial[si] = cand;
                    std::sort(trial.begin(), trial.end());
                    const double s = detail::design_score(x, trial, criterion);
                    if (s < score) {
                        score = s;
                        subset = std::move(trial);
                        improved = true;
                    }
                }
            }
        }
        if (score < best_internal) {
            best_internal = score;
            best_subset = subset;
        }
    }
    if (!std::isfinite(best_internal))
        throw std::runtime_error("optimal_design_select: every candidate subset has a singular Gram");

    SelectionResult result;
    result.method = criterion == DesignCriterion::D ? "d-optimal" : "a-optimal";
    result.selected = std::move(best_subset);
    result.criterion = criterion == DesignCriterion::D ? -best_internal : best_internal;
    return result;
}

inline SelectionResult random_select(std::size_t n, int target_count, std::uint64_t seed) {
    if (target_count < 0 || static_cast<std::size_t>(target_count) > n)
        throw std::invalid_argument("random_select: bad target count");
    auto rng = make_rng(derive_seed(seed, "random_select"));
    SelectionResult result;
    result.method = "random";
    result.selected = sample_without_replacement(n, static_cast<std::size_t>(target_count), rng);
    std::sort(result.selected.begin(), result.selected.end());
    return result;
}

// Spearman between the rule's ranking on the selected rows and on all rows.
inline double selection_fidelity(const MetricMatrix& q, const std::vector<std::size_t>& selected,
                                 Rule rule, const AggregationOptions& opt = {}) {
    for (const auto r : selected)
        if (r >= q.num_datasets()) throw std::invalid_argument("selection_fidelity: row out of range");
    MetricMatrix sub;
    sub.metric = q.metric;
    sub.k = q.k;
    sub.methods = q.methods;
    for (const auto r : selected) {
        sub.datasets.push_back(q.datasets[r]);
        sub.values.push_back(q.values[r]);
    }
    Warnings sink;
    return spearman(aggregate(sub, rule, opt).ranks(), aggregate(q, rule, opt).ranks(), &sink);
}

}  // namespace rankbench
