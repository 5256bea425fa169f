#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "rankbench/interactions.hpp"
#include "rankbench/rng.hpp"

namespace rankbench {

// Synthetic implicit-feedback fixture with planted item-cluster structure:
// items fall into equal blocks, each user favors one block and draws items
// from a Zipf distribution inside it, with a global-Zipf noise component.
// Neighborhood/linear models can exploit the block structure while the
// popularity skew keeps MostPop well above Random.
struct SyntheticConfig {
    std::size_t users = 2000;
    std::size_t items = 500;
    std::size_t clusters = 10;
    std::size_t min_profile = 8;
    std::size_t max_profile = 16;
    double in_cluster_prob = 0.8;
    double zipf_exponent = 1.0;
    double rating_low = 4.0;   // weights drawn uniformly from [low, high]
    double rating_high = 5.0;
    std::int64_t max_timestamp = 1000000;
};

namespace detail {

struct ZipfSampler {
    std::vector<double> cdf;

    explicit ZipfSampler(std::size_t n, double s) : cdf(n) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            acc += 1.0 / std::pow(static_cast<double>(r + 1), s);
            cdf[r] = acc;
        }
        for (auto& v : cdf) v /= acc;
    }

    std::size_t sample(Rng& rng) const {
        const double u = uniform01(rng);
        std::size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cdf[mid] < u) lo = mid + 1;
            else hi = mid;
        }
        return lo;
    }
};

}  // namespace detail

inline std::string generate_synthetic_csv(const SyntheticConfig& cfg, std::uint64_t seed) {
    const std::size_t per_cluster = cfg.items / cfg.clusters;
    detail::ZipfSampler cluster_zipf(per_cluster, cfg.zipf_exponent);
    detail::ZipfSampler global_zipf(cfg.items, cfg.zipf_exponent);

    std::ostringstream out;
    out << "user_id,item_id,weight,timestamp\n";
    auto rng = make_rng(derive_seed(seed, "synthetic"));
    for (std::size_t u = 0; u < cfg.users; ++u) {
        const std::size_t own = static_cast<std::size_t>(uniform_int(rng, 0, cfg.clusters - 1));
        const std::size_t profile =
            static_cast<std::size_t>(uniform_int(rng, cfg.min_profile, cfg.max_profile));
        for (std::size_t p = 0; p < profile; ++p) {
            std::size_t item;
            if (uniform01(rng) < cfg.in_cluster_prob)
                item = own * per_cluster + cluster_zipf.sample(rng);
            else
                item = global_zipf.sample(rng);
            const double w = uniform_real(rng, cfg.rating_low, cfg.rating_high);
            const auto ts = static_cast<std::int64_t>(
                uniform_int(rng, 0, static_cast<std::uint64_t>(cfg.max_timestamp)));
            out << "u" << u << ",i" << item << "," << w << "," << ts << "\n";
        }
    }
    return out.str();
}

inline InteractionSet generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
    return parse_interactions(generate_synthetic_csv(cfg, seed));
}

}  // namespace rankbench
