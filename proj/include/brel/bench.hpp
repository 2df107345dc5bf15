#pragma once

// Benchmark plumbing shared by the CLI: a variant over the four structure
// kinds, seeded query workloads, timed loops and the CSV row format.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "brel/brwt.hpp"
#include "brel/error.hpp"
#include "brel/k2tree.hpp"
#include "brel/random.hpp"
#include "brel/relation.hpp"
#include "brel/ricerun.hpp"

namespace brel {

enum class Kind { kt, ktone, brwt, rice };
inline constexpr Kind all_kinds[] = {Kind::kt, Kind::ktone, Kind::brwt, Kind::rice};

inline std::string_view to_string(Kind k) {
    switch (k) {
    case Kind::kt: return "kt";
    case Kind::ktone: return "ktone";
    case Kind::brwt: return "brwt";
    case Kind::rice: return "rice";
    }
    return "?";
}

inline Kind parse_kind(std::string_view s) {
    for (auto k : all_kinds)
        if (to_string(k) == s)
            return k;
    throw ArgumentError("unknown structure '" + std::string(s) + "'");
}

inline SetOp parse_set_op(std::string_view s) {
    for (auto op : all_set_ops)
        if (to_string(op) == s)
            return op;
    throw ArgumentError("unknown set operation '" + std::string(s) + "'");
}

using Structure = std::variant<K2Tree, K2TreeOnes, Brwt, RiceRunsList>;

inline Structure build_structure(Kind k, const PlainRelation& r) {
    switch (k) {
    case Kind::kt: return K2Tree::build(r);
    case Kind::ktone: return K2TreeOnes::build(r);
    case Kind::brwt: return Brwt::build(r);
    case Kind::rice: return RiceRunsList::encode(r);
    }
    throw ArgumentError("unknown structure kind");
}

inline Kind kind_of(const Structure& s) { return static_cast<Kind>(s.index()); }

inline NodeId node_count(const Structure& s) {
    return std::visit([](const auto& x) { return x.n(); }, s);
}

inline std::uint64_t size_in_bytes(const Structure& s) {
    return std::visit([](const auto& x) { return x.size_in_bytes(); }, s);
}

inline PlainRelation decode(const Structure& s) {
    return std::visit([](const auto& x) { return x.decode(); }, s);
}

inline std::string serialize(const Structure& s) {
    return std::visit([](const auto& x) { return std::string(x.serialize()); }, s);
}

// Picks the decoder from the 4-byte magic.
inline Structure deserialize_structure(std::string_view bytes) {
    auto head = bytes.substr(0, 4);
    if (head == K2Tree::magic)
        return K2Tree::deserialize(bytes);
    if (head == K2TreeOnes::magic)
        return K2TreeOnes::deserialize(bytes);
    if (head == Brwt::magic)
        return Brwt::deserialize(bytes);
    if (head == RiceRunsList::magic)
        return RiceRunsList::deserialize(bytes);
    throw FormatError("unrecognised structure file (bad magic)");
}

inline Structure set_operation(SetOp op, const Structure& a, const Structure& b,
                               Navigation nav = Navigation::cursor) {
    if (a.index() != b.index())
        throw KindMismatch("cannot combine " + std::string(to_string(kind_of(a))) + " with " +
                           std::string(to_string(kind_of(b))));
    return std::visit(
        [&](const auto& x) -> Structure {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b);
            if constexpr (std::is_same_v<T, Brwt>)
                return set_operation(op, x, y, nav);
            else
                return set_operation(op, x, y);
        },
        a);
}

enum class QueryOp { isrelated, isrelated_true, succ, pred, range };
inline constexpr QueryOp all_query_ops[] = {QueryOp::isrelated, QueryOp::isrelated_true, QueryOp::succ,
                                            QueryOp::pred, QueryOp::range};

inline std::string_view to_string(QueryOp q) {
    switch (q) {
    case QueryOp::isrelated: return "isrelated";
    case QueryOp::isrelated_true: return "isrelated-true";
    case QueryOp::succ: return "succ";
    case QueryOp::pred: return "pred";
    case QueryOp::range: return "range";
    }
    return "?";
}

inline QueryOp parse_query_op(std::string_view s) {
    for (auto q : all_query_ops)
        if (to_string(q) == s)
            return q;
    throw ArgumentError("unknown query '" + std::string(s) + "'");
}

// Pre-drawn query arguments; the same workload is replayed on every
// structure built from one relation.
struct Workload {
    QueryOp op;
    std::vector<Pair> points;
    std::vector<NodeId> nodes;
    std::vector<RangeQuery> ranges;

    std::size_t size() const noexcept {
        return op == QueryOp::succ || op == QueryOp::pred ? nodes.size()
               : op == QueryOp::range                     ? ranges.size()
                                                          : points.size();
    }
};

inline constexpr std::uint64_t default_range_size = 500;

inline Workload sample_workload(QueryOp op, const PlainRelation& r, std::uint64_t runs, std::uint64_t seed,
                                std::uint64_t range_size = default_range_size) {
    if (runs == 0)
        throw ArgumentError("runs must be at least 1");
    if (r.n() == 0)
        throw ArgumentError("no queries possible on an empty node set");
    if (op == QueryOp::isrelated_true && r.pair_count() == 0)
        throw ArgumentError("isrelated-true needs at least one pair to sample");
    if (op == QueryOp::range && range_size == 0)
        throw ArgumentError("range size must be at least 1");
    Rng rng(seed);
    Workload w{op, {}, {}, {}};
    const NodeId n = r.n();
    for (std::uint64_t i = 0; i < runs; ++i) {
        switch (op) {
        case QueryOp::isrelated:
            w.points.push_back({static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n))});
            break;
        case QueryOp::isrelated_true: w.points.push_back(r.pair_at(rng.below(r.pair_count()))); break;
        case QueryOp::succ:
        case QueryOp::pred: w.nodes.push_back(static_cast<NodeId>(rng.below(n))); break;
        case QueryOp::range: {
            const std::uint64_t side = std::min<std::uint64_t>(range_size, n);
            auto x = static_cast<NodeId>(rng.below(n - side + 1));
            auto y = static_cast<NodeId>(rng.below(n - side + 1));
            w.ranges.push_back({x, y, static_cast<NodeId>(x + side - 1), static_cast<NodeId>(y + side - 1)});
            break;
        }
        }
    }
    return w;
}

// The checksum (answers found) keeps the loop from being optimised away and
// lets structures be compared cheaply.
struct QueryTiming {
    double total_ms = 0;
    std::uint64_t checksum = 0;
};

template <typename S>
QueryTiming time_queries(const S& s, const Workload& w) {
    using clock = std::chrono::steady_clock;
    std::uint64_t sum = 0;
    // Timed region: only the query calls over the pre-drawn arguments.
    const auto start = clock::now();
    switch (w.op) {
    case QueryOp::isrelated:
    case QueryOp::isrelated_true:
        for (const auto& p : w.points)
            sum += s.is_related(p.x, p.y);
        break;
    case QueryOp::succ:
        for (auto x : w.nodes)
            sum += s.successors(x).size();
        break;
    case QueryOp::pred:
        for (auto y : w.nodes)
            sum += s.predecessors(y).size();
        break;
    case QueryOp::range:
        for (const auto& q : w.ranges)
            sum += s.range_neighborhood(q).size();
        break;
    }
    const auto stop = clock::now();
    return {std::chrono::duration<double, std::milli>(stop - start).count(), sum};
}

inline QueryTiming time_queries(const Structure& s, const Workload& w) {
    return std::visit([&](const auto& x) { return time_queries(x, w); }, s);
}

// Replays the workload untimed and compares every answer with the oracle.
template <typename S>
bool verify_queries(const S& s, const PlainRelation& oracle, const Workload& w) {
    switch (w.op) {
    case QueryOp::isrelated:
    case QueryOp::isrelated_true:
        return std::all_of(w.points.begin(), w.points.end(),
                           [&](Pair p) { return s.is_related(p.x, p.y) == oracle.is_related(p.x, p.y); });
    case QueryOp::succ:
        return std::all_of(w.nodes.begin(), w.nodes.end(),
                           [&](NodeId x) { return s.successors(x) == oracle.successors(x); });
    case QueryOp::pred:
        return std::all_of(w.nodes.begin(), w.nodes.end(),
                           [&](NodeId y) { return s.predecessors(y) == oracle.predecessors(y); });
    case QueryOp::range:
        return std::all_of(w.ranges.begin(), w.ranges.end(), [&](const RangeQuery& q) {
            return s.range_neighborhood(q) == oracle.range_neighborhood(q);
        });
    }
    return false;
}

inline bool verify_queries(const Structure& s, const PlainRelation& oracle, const Workload& w) {
    return std::visit([&](const auto& x) { return verify_queries(x, oracle, w); }, s);
}

struct SetOpTiming {
    double total_ms = 0;
    Structure result;
};

inline SetOpTiming time_set_operation(SetOp op, const Structure& a, const Structure& b, std::uint64_t runs,
                                      Navigation nav = Navigation::cursor) {
    if (runs == 0)
        throw ArgumentError("runs must be at least 1");
    using clock = std::chrono::steady_clock;
    SetOpTiming t{0, set_operation(op, a, b, nav)};
    // Timed region: the in-memory operation only; the warm-up call above
    // also validates kinds and dimensions.
    const auto start = clock::now();
    for (std::uint64_t i = 0; i < runs; ++i)
        t.result = set_operation(op, a, b, nav);
    const auto stop = clock::now();
    t.total_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return t;
}

struct BenchResult {
    std::string dataset;
    std::string structure;
    std::string operation;
    std::uint64_t runs = 0;
    double total_ms = 0;
    std::uint64_t size_bytes = 0;
    std::string status = "ok";

    double avg_us() const noexcept { return runs ? 1000.0 * total_ms / static_cast<double>(runs) : 0.0; }
    bool ok() const noexcept { return status == "ok"; }
};

inline constexpr std::string_view csv_header = "dataset,structure,operation,runs,total_ms,avg_us,size_bytes,status";

namespace detail {

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

} // namespace detail

inline std::string to_csv(const BenchResult& r) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    out << detail::csv_field(r.dataset) << ',' << detail::csv_field(r.structure) << ','
        << detail::csv_field(r.operation) << ',' << r.runs << ',' << r.total_ms << ',' << r.avg_us() << ','
        << r.size_bytes << ',' << detail::csv_field(r.status);
    return out.str();
}

inline double median(std::vector<double> v) {
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const auto mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2;
}

} // namespace brel
