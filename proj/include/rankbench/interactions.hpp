#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rankbench {

struct InteractionRecord {
    std::uint32_t user = 0;  // dense index into InteractionSet::user_labels
    std::uint32_t item = 0;  // dense index into InteractionSet::item_labels
    double weight = 1.0;
    std::int64_t timestamp = 0;  // epoch milliseconds
    std::optional<int> event;
};

// A deduplicated (after preprocessing) user-item-weight-timestamp corpus with
// contiguous index maps. Splits produced by temporal_split share the parent's
// label space so model/metric code can align indices across train/val/test.
struct InteractionSet {
    std::vector<InteractionRecord> records;
    std::vector<std::string> user_labels;
    std::vector<std::string> item_labels;
    std::unordered_map<std::string, std::uint32_t> user_index;
    std::unordered_map<std::string, std::uint32_t> item_index;

    std::size_t num_users() const { return user_labels.size(); }
    std::size_t num_items() const { return item_labels.size(); }
    std::size_t num_records() const { return records.size(); }

    std::uint32_t intern_user(const std::string& label) {
        auto it = user_index.find(label);
        if (it != user_index.end()) return it->second;
        const auto idx = static_cast<std::uint32_t>(user_labels.size());
        user_labels.push_back(label);
        user_index.emplace(label, idx);
        return idx;
    }
    std::uint32_t intern_item(const std::string& label) {
        auto it = item_index.find(label);
        if (it != item_index.end()) return it->second;
        const auto idx = static_cast<std::uint32_t>(item_labels.size());
        item_labels.push_back(label);
        item_index.emplace(label, idx);
        return idx;
    }

    std::vector<std::size_t> user_counts() const {
        std::vector<std::size_t> c(num_users(), 0);
        for (const auto& r : records) c[r.user]++;
        return c;
    }
    std::vector<std::size_t> item_counts() const {
        std::vector<std::size_t> c(num_items(), 0);
        for (const auto& r : records) c[r.item]++;
        return c;
    }
};

struct SplitBundle {
    InteractionSet train;
    InteractionSet validation;
    InteractionSet test;
    std::int64_t t_val = 0;   // smallest validation timestamp
    std::int64_t t_test = 0;  // smallest test timestamp
};

enum class WeightScale { rating_0_5, weight_0_1, custom };

inline double default_threshold(WeightScale scale) {
    switch (scale) {
        case WeightScale::rating_0_5: return 3.5;
        case WeightScale::weight_0_1: return 0.3;
        case WeightScale::custom: break;
    }
    return 0.0;
}

enum class FilterOrder { items_then_users, users_then_items };

struct ColumnSchema {
    std::string user = "user_id";
    std::string item = "item_id";
    std::string weight = "weight";
    std::string timestamp = "timestamp";
    std::string event = "event";
    char delimiter = '\0';  // '\0' = auto-detect (tab if the header has one, else comma)
    bool timestamps_in_seconds = false;
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

inline std::uint64_t pair_key(std::uint32_t u, std::uint32_t i) {
    return (static_cast<std::uint64_t>(u) << 32) | i;
}

}  // namespace detail

// Reads a delimited interaction log. The header row must name at least the
// user and item columns; weight defaults to 1.0 and timestamp to the data-row
// index when their columns are absent. Timestamps are stored as integer
// milliseconds.
inline InteractionSet parse_interactions(std::istream& in, const ColumnSchema& schema = {}) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("parse_interactions: empty input");
    char delim = schema.delimiter;
    if (delim == '\0') delim = header.find('\t') != std::string::npos ? '\t' : ',';

    const auto cols = detail::split_line(header, delim);
    int user_col = -1, item_col = -1, weight_col = -1, ts_col = -1, event_col = -1;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c] == schema.user) user_col = static_cast<int>(c);
        else if (cols[c] == schema.item) item_col = static_cast<int>(c);
        else if (cols[c] == schema.weight) weight_col = static_cast<int>(c);
        else if (cols[c] == schema.timestamp) ts_col = static_cast<int>(c);
        else if (cols[c] == schema.event) event_col = static_cast<int>(c);
    }
    if (user_col < 0 || item_col < 0)
        throw std::runtime_error("parse_interactions: header lacks user/item columns ('" +
                                 schema.user + "', '" + schema.item + "')");

    InteractionSet set;
    std::string line;
    std::size_t line_no = 1;  // header was line 1
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_line(line, delim);
        if (fields.size() != cols.size())
            throw std::runtime_error("parse_interactions: line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(cols.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        InteractionRecord rec;
        rec.user = set.intern_user(fields[static_cast<std::size_t>(user_col)]);
        rec.item = set.intern_item(fields[static_cast<std::size_t>(item_col)]);
        if (weight_col >= 0) {
            if (!detail::parse_double(fields[static_cast<std::size_t>(weight_col)], rec.weight))
                throw std::runtime_error("parse_interactions: line " + std::to_string(line_no) +
                                         ": bad weight '" + fields[static_cast<std::size_t>(weight_col)] + "'");
        }
        if (ts_col >= 0) {
            double ts = 0.0;
            if (!detail::parse_double(fields[static_cast<std::size_t>(ts_col)], ts))
                throw std::runtime_error("parse_interactions: line " + std::to_string(line_no) +
                                         ": bad timestamp '" + fields[static_cast<std::size_t>(ts_col)] + "'");
            if (ts < 0) throw std::runtime_error("parse_interactions: line " + std::to_string(line_no) +
                                                 ": negative timestamp");
            rec.timestamp = static_cast<std::int64_t>(std::llround(schema.timestamps_in_seconds ? ts * 1000.0 : ts));
        } else {
            rec.timestamp = static_cast<std::int64_t>(row);
        }
        if (event_col >= 0) {
            double ev = 0.0;
            if (!detail::parse_double(fields[static_cast<std::size_t>(event_col)], ev))
                throw std::runtime_error("parse_interactions: line " + std::to_string(line_no) +
                                         ": bad event code '" + fields[static_cast<std::size_t>(event_col)] + "'");
            rec.event = static_cast<int>(ev);
        }
        set.records.push_back(rec);
        ++row;
    }
    if (set.records.empty()) throw std::runtime_error("parse_interactions: no data rows");
    return set;
}

inline InteractionSet parse_interactions(const std::string& text, const ColumnSchema& schema = {}) {
    std::istringstream in(text);
    return parse_interactions(in, schema);
}

// Canonical serialization: same delimited format with dense integer ids.
inline void write_interactions(std::ostream& out, const InteractionSet& set, char delim = ',') {
    const bool has_events = !set.records.empty() &&
        std::all_of(set.records.begin(), set.records.end(), [](const auto& r) { return r.event.has_value(); });
    out << "user_id" << delim << "item_id" << delim << "weight" << delim << "timestamp";
    if (has_events) out << delim << "event";
    out << "\n";
    char buf[64];
    for (const auto& r : set.records) {
        const auto n = std::snprintf(buf, sizeof buf, "%.17g", r.weight);
        out << r.user << delim << r.item << delim << std::string_view(buf, static_cast<std::size_t>(n))
            << delim << r.timestamp;
        if (has_events) out << delim << *r.event;
        out << "\n";
    }
}

namespace detail {

// Rebuilds dense maps keeping first-appearance order of the surviving records.
inline InteractionSet reindex(const InteractionSet& src, const std::vector<InteractionRecord>& survivors) {
    InteractionSet out;
    for (const auto& r : survivors) {
        InteractionRecord rec = r;
        rec.user = out.intern_user(src.user_labels[r.user]);
        rec.item = out.intern_item(src.item_labels[r.item]);
        out.records.push_back(rec);
    }
    return out;
}

// One record per (user, item): max weight wins, ties to the earlier
// timestamp, then to file order.
inline std::vector<InteractionRecord> collapse_duplicates_max(const std::vector<InteractionRecord>& records) {
    std::unordered_map<std::uint64_t, std::size_t> best;
    best.reserve(records.size());
    std::vector<std::size_t> order;
    order.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto key = pair_key(records[i].user, records[i].item);
        auto [it, inserted] = best.emplace(key, i);
        if (inserted) {
            order.push_back(i);
        } else {
            const auto& cur = records[it->second];
            const auto& cand = records[i];
            if (cand.weight > cur.weight ||
                (cand.weight == cur.weight && cand.timestamp < cur.timestamp)) {
                // keep the original position in the output ordering
                for (auto& o : order)
                    if (o == it->second) { o = i; break; }
                it->second = i;
            }
        }
    }
    std::vector<InteractionRecord> out;
    out.reserve(order.size());
    for (auto idx : order) out.push_back(records[idx]);
    return out;
}

}  // namespace detail

// Threshold binarization: duplicate pairs are collapsed to the max-weight
// record first, records below tau are dropped, survivors get weight 1.0.
// Pass tau = NaN to use the scale's paper default (3.5 for 0-5 ratings,
// 0.3 for 0-1 weights).
inline InteractionSet binarize(const InteractionSet& data, double tau,
                               WeightScale scale = WeightScale::custom) {
    if (std::isnan(tau)) tau = default_threshold(scale);
    if (!std::isfinite(tau)) throw std::invalid_argument("binarize: tau must be finite");
    auto collapsed = detail::collapse_duplicates_max(data.records);
    std::vector<InteractionRecord> survivors;
    survivors.reserve(collapsed.size());
    for (auto& r : collapsed) {
        if (r.weight < tau) continue;
        r.weight = 1.0;
        survivors.push_back(r);
    }
    if (survivors.empty()) throw std::runtime_error("binarize: all interactions below threshold");
    return detail::reindex(data, survivors);
}

// Event-log preprocessing: per event type e, weight(e) = Nr / Nr_e, so rarer
// events weigh more; weights are then clamped to be strictly increasing from
// the most frequent type to the rarest. Each (user, item) pair collapses to
// one record carrying the weight of its most frequent event type for that
// pair, count ties going to the rarer (higher-weight) type.
inline InteractionSet event_weight_collapse(const InteractionSet& data) {
    std::map<int, std::size_t> type_counts;
    for (const auto& r : data.records) {
        if (!r.event.has_value()) throw std::runtime_error("event_weight_collapse: record without event code");
        type_counts[*r.event]++;
    }
    const double total = static_cast<double>(data.records.size());

    std::vector<std::pair<int, std::size_t>> types(type_counts.begin(), type_counts.end());
    // most frequent first; equal counts ordered by code so the clamp has a total order
    std::sort(types.begin(), types.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::unordered_map<int, double> type_weight;
    double floor_weight = 0.0;
    for (const auto& [code, count] : types) {
        double w = total / static_cast<double>(count);
        if (w <= floor_weight) w = floor_weight + 1e-9;
        type_weight[code] = w;
        floor_weight = w;
    }

    struct PairState {
        std::map<int, std::size_t> counts;
        std::int64_t first_ts = std::numeric_limits<std::int64_t>::max();
    };
    std::unordered_map<std::uint64_t, PairState> pairs;
    std::vector<std::uint64_t> order;
    for (const auto& r : data.records) {
        const auto key = detail::pair_key(r.user, r.item);
        auto [it, inserted] = pairs.emplace(key, PairState{});
        if (inserted) order.push_back(key);
        it->second.counts[*r.event]++;
        it->second.first_ts = std::min(it->second.first_ts, r.timestamp);
    }

    std::vector<InteractionRecord> out;
    out.reserve(order.size());
    for (const auto key : order) {
        const auto& st = pairs.at(key);
        int best_code = 0;
        std::size_t best_count = 0;
        double best_weight = -1.0;
        for (const auto& [code, count] : st.counts) {
            const double w = type_weight.at(code);
            if (count > best_count || (count == best_count && w > best_weight)) {
                best_code = code;
                best_count = count;
                best_weight = w;
            }
        }
        InteractionRecord rec;
        rec.user = static_cast<std::uint32_t>(key >> 32);
        rec.item = static_cast<std::uint32_t>(key & 0xffffffffu);
        rec.weight = best_weight;
        rec.timestamp = st.first_ts;
        rec.event = best_code;
        out.push_back(rec);
    }
    return detail::reindex(data, out);
}

// Single-pass F-filter: drop items with < f interactions, then users with
// < f remaining interactions (or the mirror order). Users surviving the
// default order have >= f interactions; items may have fewer.
inline InteractionSet f_filter(const InteractionSet& data, std::size_t f,
                               FilterOrder order = FilterOrder::items_then_users) {
    if (f < 1) throw std::invalid_argument("f_filter: f must be >= 1");
    const bool items_first = order == FilterOrder::items_then_users;

    const auto first_counts = items_first ? data.item_counts() : data.user_counts();
    std::vector<InteractionRecord> pass1;
    pass1.reserve(data.records.size());
    for (const auto& r : data.records) {
        const auto c = first_counts[items_first ? r.item : r.user];
        if (c >= f) pass1.push_back(r);
    }
    std::vector<std::size_t> second_counts(items_first ? data.num_users() : data.num_items(), 0);
    for (const auto& r : pass1) second_counts[items_first ? r.user : r.item]++;
    std::vector<InteractionRecord> pass2;
    pass2.reserve(pass1.size());
    for (const auto& r : pass1) {
        const auto c = second_counts[items_first ? r.user : r.item];
        if (c >= f) pass2.push_back(r);
    }
    if (pass2.empty()) throw std::runtime_error("f_filter: no interactions survive");
    return detail::reindex(data, pass2);
}

// Iterative F-core: alternate item/user drops until every user and item has
// at least f interactions.
inline InteractionSet f_core(const InteractionSet& data, std::size_t f) {
    if (f < 1) throw std::invalid_argument("f_core: f must be >= 1");
    InteractionSet cur = data;
    while (true) {
        const auto ic = cur.item_counts();
        const auto uc = cur.user_counts();
        std::vector<InteractionRecord> next;
        next.reserve(cur.records.size());
        for (const auto& r : cur.records)
            if (ic[r.item] >= f && uc[r.user] >= f) next.push_back(r);
        if (next.empty()) throw std::runtime_error("f_core: empty fixed point");
        const bool stable = next.size() == cur.records.size();
        cur = detail::reindex(cur, next);
        if (stable) return cur;
    }
}

namespace detail {

// Subset of `parent` keeping the parent's label space (indices stay aligned
// across the bundle).
inline InteractionSet subset_with_parent_labels(const InteractionSet& parent,
                                                std::vector<InteractionRecord> records) {
    InteractionSet out;
    out.user_labels = parent.user_labels;
    out.item_labels = parent.item_labels;
    out.user_index = parent.user_index;
    out.item_index = parent.item_index;
    out.records = std::move(records);
    return out;
}

}  // namespace detail

// Global temporal split at the empirical ratio quantiles of the timestamp
// order. Records sharing a boundary timestamp go to the earlier split, so no
// test record ever precedes a train record.
inline SplitBundle temporal_split(const InteractionSet& data,
                                  double train_ratio = 0.8, double val_ratio = 0.1,
                                  double test_ratio = 0.1) {
    if (train_ratio <= 0 || val_ratio <= 0 || test_ratio <= 0 ||
        std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("temporal_split: ratios must be positive and sum to 1");
    const std::size_t n = data.records.size();
    if (n < 3) throw std::runtime_error("temporal_split: too few records");

    std::vector<std::int64_t> ts(n);
    for (std::size_t i = 0; i < n; ++i) ts[i] = data.records[i].timestamp;
    std::sort(ts.begin(), ts.end());

    auto clamp_idx = [n](double x) {
        auto v = static_cast<std::size_t>(std::llround(x));
        return std::min(std::max<std::size_t>(v, 1), n - 1);
    };
    const std::size_t c1 = clamp_idx(static_cast<double>(n) * train_ratio);
    const std::size_t c2 = std::max(clamp_idx(static_cast<double>(n) * (train_ratio + val_ratio)), c1 + 1);
    if (c2 >= n) throw std::runtime_error("temporal_split: test split empty");

    const std::int64_t cut1 = ts[c1 - 1];
    const std::int64_t cut2 = std::max(ts[c2 - 1], cut1);

    std::vector<InteractionRecord> train, val, test;
    for (const auto& r : data.records) {
        if (r.timestamp <= cut1) train.push_back(r);
        else if (r.timestamp <= cut2) val.push_back(r);
        else test.push_back(r);
    }
    if (train.empty() || val.empty() || test.empty())
        throw std::runtime_error("temporal_split: degenerate split (check for constant timestamps)");

    SplitBundle bundle;
    bundle.t_val = std::min_element(val.begin(), val.end(), [](const auto& a, const auto& b) {
                       return a.timestamp < b.timestamp;
                   })->timestamp;
    bundle.t_test = std::min_element(test.begin(), test.end(), [](const auto& a, const auto& b) {
                        return a.timestamp < b.timestamp;
                    })->timestamp;
    bundle.train = detail::subset_with_parent_labels(data, std::move(train));
    bundle.validation = detail::subset_with_parent_labels(data, std::move(val));
    bundle.test = detail::subset_with_parent_labels(data, std::move(test));
    return bundle;
}

// Drops validation/test records whose user or item never occurs in train.
inline SplitBundle prune_cold(const SplitBundle& bundle) {
    std::vector<char> train_user(bundle.train.num_users(), 0);
    std::vector<char> train_item(bundle.train.num_items(), 0);
    for (const auto& r : bundle.train.records) {
        train_user[r.user] = 1;
        train_item[r.item] = 1;
    }
    auto filter = [&](const InteractionSet& set) {
        std::vector<InteractionRecord> kept;
        kept.reserve(set.records.size());
        for (const auto& r : set.records)
            if (train_user[r.user] && train_item[r.item]) kept.push_back(r);
        return detail::subset_with_parent_labels(set, std::move(kept));
    };
    SplitBundle out;
    out.train = bundle.train;
    out.validation = filter(bundle.validation);
    out.test = filter(bundle.test);
    out.t_val = bundle.t_val;
    out.t_test = bundle.t_test;
    if (out.test.records.empty()) throw std::runtime_error("prune_cold: test split became empty");
    return out;
}

// train + validation with the shared label space, for final refitting.
inline InteractionSet merge_sets(const InteractionSet& a, const InteractionSet& b) {
    InteractionSet out = a;
    out.records.insert(out.records.end(), b.records.begin(), b.records.end());
    return out;
}

}  // namespace rankbench
