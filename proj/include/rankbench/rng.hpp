#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace rankbench {

// All randomness in the toolkit flows from one master seed. Stage seeds are
// derived by hashing (master, tag, indices...) so that results do not depend
// on scheduling or worker count. Distributions are hand-rolled on top of
// std::mt19937_64 (whose output sequence is pinned by the standard) to keep
// byte-identical results across standard libraries.

namespace detail {
inline std::uint64_t fnv1a_step(std::uint64_t h, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}
}  // namespace detail

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = detail::fnv1a_step(h, master);
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

template <typename... Idx>
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, Idx... idx) {
    std::uint64_t h = derive_seed(master, tag);
    ((h = detail::fnv1a_step(h, static_cast<std::uint64_t>(idx))), ...);
    return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Inclusive on both ends; unbiased via rejection.
inline std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    if (span == 0) return rng();  // full range
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return lo + x % span;
}

inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(uniform_real(rng, std::log(lo), std::log(hi)));
}

// Box-Muller; consumes exactly two uniforms per call.
inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
}

inline double exponential(Rng& rng) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    return -std::log(u);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_int(rng, 0, i - 1));
        std::swap(v[i - 1], v[j]);
    }
}

// k distinct indices out of [0, n), in random order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_int(rng, 0, n - 1 - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

// Dirichlet(1,...,1): normalized iid exponentials.
inline std::vector<double> dirichlet_uniform(std::size_t n, Rng& rng) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
        x = exponential(rng);
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

}  // namespace rankbench
