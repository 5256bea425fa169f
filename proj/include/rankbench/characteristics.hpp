#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankbench/interactions.hpp"
#include "rankbench/metric_matrix.hpp"

namespace rankbench {

// The 18 interaction-matrix statistics used as dataset features. Moments use
// the population (1/n) convention; kurtosis is excess kurtosis, and both are
// defined as 0 for constant vectors.
struct CharacteristicsVector {
    double space_size = 0;  // Nu * Ni
    double shape = 0;       // Nu / Ni
    double density = 0;     // Nr / (Nu * Ni)
    double nu = 0, ni = 0, nr = 0;
    double rpu = 0, rpi = 0;      // records per user / item
    double gini_u = 0, gini_i = 0;
    double apb = 0, st_pb = 0;    // mean/std over users of their items' mean popularity
    double sk_pb = 0, ku_pb = 0;  // skewness/excess kurtosis of item popularity
    double lt_avg = 0, lt_std = 0, lt_sk = 0, lt_ku = 0;  // long-tail count stats

    std::vector<double> as_row() const {
        return {space_size, shape, density, nu, ni, nr, rpu, rpi, gini_u, gini_i,
                apb, st_pb, sk_pb, ku_pb, lt_avg, lt_std, lt_sk, lt_ku};
    }
};

inline const std::vector<std::string>& characteristic_names() {
    static const std::vector<std::string> names = {
        "SpaceSize", "Shape", "Density", "Nu", "Ni", "Nr", "Rpu", "Rpi", "Giniu", "Ginii",
        "APB", "StPB", "SkPB", "KuPB", "LTavg", "LTstd", "LTsk", "LTku"};
    return names;
}

namespace detail {

// G = sum_i (2i - n - 1) c_i / (n sum(c)), c ascending, i = 1..n.
inline double gini(std::vector<double> counts) {
    std::sort(counts.begin(), counts.end());
    const double n = static_cast<double>(counts.size());
    double total = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        total += counts[i];
        acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * counts[i];
    }
    if (total <= 0) return 0.0;
    return acc / (n * total);
}

struct Moments {
    double mean = 0, stddev = 0, skewness = 0, excess_kurtosis = 0;
};

inline Moments moments(const std::vector<double>& v) {
    Moments m;
    if (v.empty()) return m;
    const double n = static_cast<double>(v.size());
    for (const double x : v) m.mean += x;
    m.mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (const double x : v) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.stddev = std::sqrt(m2);
    if (m2 > 1e-300) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

}  // namespace detail

inline CharacteristicsVector compute_characteristics(const InteractionSet& data) {
    const std::size_t nu = data.num_users();
    const std::size_t ni = data.num_items();
    const std::size_t nr = data.num_records();
    if (nu < 2 || ni < 2) throw std::invalid_argument("compute_characteristics: need >= 2 users and items");
    if (nr == 0) throw std::invalid_argument("compute_characteristics: empty interaction set");

    CharacteristicsVector c;
    c.nu = static_cast<double>(nu);
    c.ni = static_cast<double>(ni);
    c.nr = static_cast<double>(nr);
    c.space_size = c.nu * c.ni;
    c.shape = c.nu / c.ni;
    c.density = c.nr / c.space_size;
    c.rpu = c.nr / c.nu;
    c.rpi = c.nr / c.ni;

    const auto ucounts_sz = data.user_counts();
    const auto icounts_sz = data.item_counts();
    std::vector<double> ucounts(ucounts_sz.begin(), ucounts_sz.end());
    std::vector<double> icounts(icounts_sz.begin(), icounts_sz.end());
    c.gini_u = detail::gini(ucounts);
    c.gini_i = detail::gini(icounts);

    // item popularity phi(i) = count(i) / Nr
    std::vector<double> phi(ni);
    for (std::size_t i = 0; i < ni; ++i) phi[i] = icounts[i] / c.nr;
    const auto phi_m = detail::moments(phi);
    c.sk_pb = phi_m.skewness;
    c.ku_pb = phi_m.excess_kurtosis;

    // per-user mean popularity of the user's profile
    std::vector<double> user_pop_sum(nu, 0.0);
    for (const auto& r : data.records) user_pop_sum[r.user] += phi[r.item];
    std::vector<double> profile_pop;
    profile_pop.reserve(nu);
    for (std::size_t u = 0; u < nu; ++u)
        if (ucounts[u] > 0) profile_pop.push_back(user_pop_sum[u] / ucounts[u]);
    const auto apb_m = detail::moments(profile_pop);
    c.apb = apb_m.mean;
    c.st_pb = apb_m.stddev;

    // long tail: items sorted by descending count; the head is the smallest
    // prefix holding >= 80% of interactions, the tail is the rest
    std::vector<double> sorted = icounts;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0;
    std::size_t head = 0;
    while (head < sorted.size() && cum < 0.8 * c.nr) {
        cum += sorted[head];
        ++head;
    }
    const std::vector<double> tail(sorted.begin() + static_cast<std::ptrdiff_t>(head), sorted.end());
    const auto lt = detail::moments(tail);
    c.lt_avg = lt.mean;
    c.lt_std = lt.stddev;
    c.lt_sk = lt.skewness;
    c.lt_ku = lt.excess_kurtosis;
    return c;
}

// One delimited row per dataset under a fixed 18-column header; this file
// feeds the selection module.
inline void write_characteristics_header(std::ostream& out, char delim = ',') {
    out << "dataset";
    for (const auto& name : characteristic_names()) out << delim << name;
    out << "\n";
}

inline void write_characteristics_row(std::ostream& out, const std::string& dataset,
                                      const CharacteristicsVector& c, char delim = ',') {
    out << dataset;
    for (const double v : c.as_row()) out << delim << format_double(v);
    out << "\n";
}

}  // namespace rankbench
