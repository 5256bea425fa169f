#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankbench/interactions.hpp"
#include "rankbench/metrics.hpp"
#include "rankbench/rng.hpp"

namespace rankbench {

enum class ModelKind { random, mostpop, itemknn, ease, external };

inline std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::random: return "random";
        case ModelKind::mostpop: return "mostpop";
        case ModelKind::itemknn: return "itemknn";
        case ModelKind::ease: return "ease";
        case ModelKind::external: return "external";
    }
    return "?";
}

inline ModelKind model_kind_from_name(const std::string& name) {
    for (const auto kind : {ModelKind::random, ModelKind::mostpop, ModelKind::itemknn,
                            ModelKind::ease, ModelKind::external})
        if (model_kind_name(kind) == name) return kind;
    throw std::invalid_argument("unknown model kind '" + name + "'");
}

struct ModelConfig {
    ModelKind kind = ModelKind::random;
    int neighbors = 100;     // itemknn neighborhood size
    double lambda = 100.0;   // ease ridge strength
    std::uint64_t seed = 0;

    void validate() const {
        if (neighbors < 1) throw std::invalid_argument("ModelConfig: neighbors must be >= 1");
        if (!(lambda > 0)) throw std::invalid_argument("ModelConfig: lambda must be positive");
    }
};

// A fitted top-N recommender. Lists never contain items the user interacted
// with in the fitting data; score ties break toward the ascending item index.
class Recommender {
public:
    virtual ~Recommender() = default;

    virtual std::vector<std::uint32_t> recommend(std::uint32_t user, int k) const = 0;

    std::size_t num_users() const { return seen_.size(); }
    std::size_t num_items() const { return num_items_; }
    const std::vector<std::uint32_t>& seen(std::uint32_t user) const { return seen_[user]; }
    const std::vector<std::uint32_t>& catalog() const { return catalog_; }

protected:
    void init_from(const InteractionSet& train) {
        num_items_ = train.num_items();
        seen_.assign(train.num_users(), {});
        std::vector<char> has_record(train.num_items(), 0);
        for (const auto& r : train.records) {
            seen_[r.user].push_back(r.item);
            has_record[r.item] = 1;
        }
        for (auto& v : seen_) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        for (std::uint32_t i = 0; i < train.num_items(); ++i)
            if (has_record[i]) catalog_.push_back(i);
    }

    bool is_seen(std::uint32_t user, std::uint32_t item) const {
        const auto& v = seen_[user];
        return std::binary_search(v.begin(), v.end(), item);
    }

    // Top-k unseen catalog items by (score desc, index asc).
    std::vector<std::uint32_t> top_k_by_score(std::uint32_t user, int k,
                                              const std::vector<double>& scores) const {
        std::vector<std::uint32_t> cands;
        cands.reserve(catalog_.size());
        for (const auto i : catalog_)
            if (!is_seen(user, i)) cands.push_back(i);
        const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), cands.size());
        auto cmp = [&](std::uint32_t a, std::uint32_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return a < b;
        };
        std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(kk), cands.end(), cmp);
        cands.resize(kk);
        return cands;
    }

    std::vector<std::vector<std::uint32_t>> seen_;
    std::vector<std::uint32_t> catalog_;
    std::size_t num_items_ = 0;
};

// Uniform sampling over unseen catalog items, deterministic per (seed, user).
class RandomModel final : public Recommender {
public:
    RandomModel(const InteractionSet& train, std::uint64_t seed) : seed_(seed) {
        if (train.records.empty()) throw std::invalid_argument("fit_random: empty train set");
        init_from(train);
    }

    std::vector<std::uint32_t> recommend(std::uint32_t user, int k) const override {
        std::vector<std::uint32_t> cands;
        for (const auto i : catalog_)
            if (!is_seen(user, i)) cands.push_back(i);
        auto rng = make_rng(derive_seed(seed_, "random_model", user));
        shuffle(cands, rng);
        cands.resize(std::min<std::size_t>(cands.size(), static_cast<std::size_t>(k)));
        return cands;
    }

private:
    std::uint64_t seed_;
};

// Global popularity ranking minus the user's seen items.
class MostPopModel final : public Recommender {
public:
    explicit MostPopModel(const InteractionSet& train) {
        if (train.records.empty()) throw std::invalid_argument("fit_mostpop: empty train set");
        init_from(train);
        scores_.assign(train.num_items(), 0.0);
        for (const auto& r : train.records) scores_[r.item] += 1.0;
    }

    std::vector<std::uint32_t> recommend(std::uint32_t user, int k) const override {
        return top_k_by_score(user, k, scores_);
    }

    const std::vector<double>& counts() const { return scores_; }

private:
    std::vector<double> scores_;
};

// Item-based neighborhood model over binary train data:
// sim(i, j) = |users(i) n users(j)| / (sqrt|users(i)| sqrt|users(j)|),
// truncated to the top `neighbors` similar items per target item;
// score(u, i) = sum of sim(i, j) over seen j retained for i.
class ItemKnnModel final : public Recommender {
public:
    ItemKnnModel(const InteractionSet& train, int neighbors) {
        if (train.records.empty()) throw std::invalid_argument("fit_itemknn: empty train set");
        if (neighbors < 1) throw std::invalid_argument("fit_itemknn: neighbors must be >= 1");
        init_from(train);
        const std::size_t ni = train.num_items();

        std::vector<std::vector<std::uint32_t>> profile(train.num_users());
        std::vector<double> item_count(ni, 0.0);
        for (const auto& r : train.records) profile[r.user].push_back(r.item);
        for (auto& p : profile) {
            std::sort(p.begin(), p.end());
            p.erase(std::unique(p.begin(), p.end()), p.end());
        }
        for (const auto& p : profile)
            for (const auto i : p) item_count[i] += 1.0;

        std::unordered_map<std::uint64_t, double> co;
        for (const auto& p : profile)
            for (std::size_t a = 0; a < p.size(); ++a)
                for (std::size_t b = a + 1; b < p.size(); ++b)
                    co[(static_cast<std::uint64_t>(p[a]) << 32) | p[b]] += 1.0;

        std::vector<std::vector<std::pair<std::uint32_t, double>>> sims(ni);
        for (const auto& [key, count] : co) {
            const auto i = static_cast<std::uint32_t>(key >> 32);
            const auto j = static_cast<std::uint32_t>(key & 0xffffffffu);
            const double s = count / (std::sqrt(item_count[i]) * std::sqrt(item_count[j]));
            sims[i].emplace_back(j, s);
            sims[j].emplace_back(i, s);
        }
        reverse_.assign(ni, {});
        for (std::uint32_t i = 0; i < ni; ++i) {
            auto& v = sims[i];
            const auto keep = std::min<std::size_t>(static_cast<std::size_t>(neighbors), v.size());
            std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(keep), v.end(),
                              [](const auto& a, const auto& b) {
                                  if (a.second != b.second) return a.second > b.second;
                                  return a.first < b.first;
                              });
            v.resize(keep);
            for (const auto& [j, s] : v) reverse_[j].emplace_back(i, s);
        }
    }

    std::vector<double> score_items(std::uint32_t user) const {
        std::vector<double> scores(num_items_, 0.0);
        for (const auto j : seen_[user])
            for (const auto& [i, s] : reverse_[j]) scores[i] += s;
        return scores;
    }

    std::vector<std::uint32_t> recommend(std::uint32_t user, int k) const override {
        return top_k_by_score(user, k, score_items(user));
    }

private:
    // reverse_[j] lists (target item i, sim) pairs with j among i's retained
    // neighbors, so scoring walks only the user's seen items.
    std::vector<std::vector<std::pair<std::uint32_t, double>>> reverse_;
};

// Closed-form shallow autoencoder: G = X^T X + lambda I, P = G^-1,
// B_ij = -P_ij / P_jj with a zero diagonal; scores are the user's binary row
// times B. Dense solve guarded by an item-count cap.
class EaseModel final : public Recommender {
public:
    EaseModel(const InteractionSet& train, double lambda, std::size_t max_items = 20000) {
        if (train.records.empty()) throw std::invalid_argument("fit_ease: empty train set");
        if (!(lambda > 0)) throw std::invalid_argument("fit_ease: lambda must be positive");
        if (train.num_items() > max_items)
            throw std::runtime_error("fit_ease: item count " + std::to_string(train.num_items()) +
                                     " exceeds the dense-solve cap (" + std::to_string(max_items) +
                                     "); score this dataset externally and use import-q");
        init_from(train);
        const auto ni = static_cast<Eigen::Index>(train.num_items());

        std::vector<std::vector<std::uint32_t>> profile(train.num_users());
        for (const auto& r : train.records) profile[r.user].push_back(r.item);
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(ni, ni);
        for (auto& p : profile) {
            std::sort(p.begin(), p.end());
            p.erase(std::unique(p.begin(), p.end()), p.end());
            for (std::size_t a = 0; a < p.size(); ++a) {
                for (std::size_t b = a; b < p.size(); ++b) {
                    gram(p[a], p[b]) += 1.0;
                    if (a != b) gram(p[b], p[a]) += 1.0;
                }
            }
        }
        gram.diagonal().array() += lambda;

        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("fit_ease: Gram matrix not positive definite");
        b_ = llt.solve(Eigen::MatrixXd::Identity(ni, ni));  // P
        const Eigen::VectorXd diag = b_.diagonal();
        for (Eigen::Index j = 0; j < ni; ++j) b_.col(j) /= -diag(j);
        b_.diagonal().setZero();
    }

    std::vector<double> score_items(std::uint32_t user) const {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(b_.cols());
        for (const auto i : seen_[user]) acc += b_.row(i).transpose();
        return std::vector<double>(acc.data(), acc.data() + acc.size());
    }

    std::vector<std::uint32_t> recommend(std::uint32_t user, int k) const override {
        return top_k_by_score(user, k, score_items(user));
    }

    const Eigen::MatrixXd& item_weights() const { return b_; }

private:
    Eigen::MatrixXd b_;
};

inline std::unique_ptr<Recommender> fit_random(const InteractionSet& train, std::uint64_t seed) {
    return std::make_unique<RandomModel>(train, seed);
}
inline std::unique_ptr<Recommender> fit_mostpop(const InteractionSet& train) {
    return std::make_unique<MostPopModel>(train);
}
inline std::unique_ptr<Recommender> fit_itemknn(const InteractionSet& train, int neighbors) {
    return std::make_unique<ItemKnnModel>(train, neighbors);
}
inline std::unique_ptr<Recommender> fit_ease(const InteractionSet& train, double lambda,
                                             std::size_t max_items = 20000) {
    return std::make_unique<EaseModel>(train, lambda, max_items);
}

inline std::unique_ptr<Recommender> fit_model(const ModelConfig& config, const InteractionSet& train,
                                              std::size_t ease_max_items = 20000) {
    config.validate();
    switch (config.kind) {
        case ModelKind::random: return fit_random(train, config.seed);
        case ModelKind::mostpop: return fit_mostpop(train);
        case ModelKind::itemknn: return fit_itemknn(train, config.neighbors);
        case ModelKind::ease: return fit_ease(train, config.lambda, ease_max_items);
        case ModelKind::external: break;
    }
    throw std::invalid_argument("fit_model: external models are imported, not fitted");
}

inline RecommendationLists recommend_all(const Recommender& model,
                                         const std::vector<std::uint32_t>& users, int k) {
    RecommendationLists lists;
    lists.k = k;
    lists.users = users;
    std::sort(lists.users.begin(), lists.users.end());
    lists.items.reserve(lists.users.size());
    for (const auto u : lists.users) lists.items.push_back(model.recommend(u, k));
    return lists;
}

struct SearchSpace {
    double lambda_min = 0.1;
    double lambda_max = 10000.0;
    int neighbors_min = 5;
    int neighbors_max = 1000;
};

// Seeded random search over the model's hyperparameters (log-uniform lambda,
// uniform-integer neighbors), scored by nDCG@10 on the validation split.
// Models without hyperparameters return their default config with zero fits.
inline ModelConfig tune(ModelKind kind, const SplitBundle& bundle, std::size_t budget,
                        std::uint64_t seed, const SearchSpace& space = {}, int k = 10) {
    if (budget < 1) throw std::invalid_argument("tune: budget must be >= 1");
    ModelConfig best;
    best.kind = kind;
    best.seed = seed;
    if (kind == ModelKind::random || kind == ModelKind::mostpop) return best;
    if (kind == ModelKind::external) throw std::invalid_argument("tune: external models are imported");
    if (bundle.validation.records.empty()) throw std::runtime_error("tune: empty validation split");

    const auto truth = make_ground_truth(bundle.validation);
    auto rng = make_rng(derive_seed(seed, "tune", static_cast<std::uint64_t>(kind)));
    double best_ndcg = -1.0;
    for (std::size_t trial = 0; trial < budget; ++trial) {
        ModelConfig cand = best;
        if (kind == ModelKind::itemknn) {
            const int hi = std::max(space.neighbors_min,
                                    std::min<int>(space.neighbors_max,
                                                  static_cast<int>(bundle.train.num_items())));
            cand.neighbors = static_cast<int>(uniform_int(rng, static_cast<std::uint64_t>(space.neighbors_min),
                                                          static_cast<std::uint64_t>(hi)));
        } else {
            cand.lambda = log_uniform(rng, space.lambda_min, space.lambda_max);
        }
        const auto model = fit_model(cand, bundle.train);
        const auto recs = recommend_all(*model, truth.users, k);
        double ndcg = 0.0;
        for (std::size_t ui = 0; ui < truth.users.size(); ++ui)
            ndcg += user_accuracy(recs.items[ui], truth.relevant[ui], k).ndcg;
        ndcg /= static_cast<double>(truth.users.size());
        if (ndcg > best_ndcg) {
            best_ndcg = ndcg;
            best = cand;
        }
    }
    return best;
}

// Final fit on train + validation; seen-item exclusion then covers both.
inline std::unique_ptr<Recommender> refit_final(const ModelConfig& config, const SplitBundle& bundle,
                                                std::size_t ease_max_items = 20000) {
    const auto merged = merge_sets(bundle.train, bundle.validation);
    return fit_model(config, merged, ease_max_items);
}

}  // namespace rankbench
