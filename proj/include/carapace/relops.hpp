#pragma once

#include <set>
#include <utility>
#include <vector>

#include "carapace/storage.hpp"

namespace carapace {

/// A materialised tuple stream. Order is unspecified.
using TupleStream = std::vector<Tuple>;

struct ConstantFilter {
    std::size_t column;
    Value value;
    friend bool operator==(const ConstantFilter &, const ConstantFilter &) = default;
};

struct ColumnEquality {
    std::size_t first;
    std::size_t second;
    friend bool operator==(const ColumnEquality &, const ColumnEquality &) = default;
};

struct Filters {
    std::vector<ConstantFilter> constants;
    std::vector<ColumnEquality> equalities;

    bool empty() const { return constants.empty() && equalities.empty(); }
    friend bool operator==(const Filters &, const Filters &) = default;

    bool accepts(const Value *row) const {
        for (const auto &c : constants)
            if (row[c.column] != c.value)
                return false;
        for (const auto &e : equalities)
            if (row[e.first] != row[e.second])
                return false;
        return true;
    }
};

/// σ: tuples of the view that satisfy every filter.
inline TupleStream select(const RelationalLayer &store, RelId rel, View view, const Filters &filters) {
    TupleStream out;
    for (auto row : store.read(rel, view))
        if (filters.accepts(row.data()))
            out.emplace_back(row.begin(), row.end());
    return out;
}

/// ⋈: hash join of a stream against a view on (left column, right column)
/// key pairs. Output rows are left ++ right. No key pairs yields the cross
/// product.
inline TupleStream join(const TupleStream &left, const RelationalLayer &store, RelId rel, View view,
                        const std::vector<std::pair<std::size_t, std::size_t>> &keys) {
    std::vector<std::size_t> right_cols;
    for (const auto &k : keys)
        right_cols.push_back(k.second);
    JoinIndex index;
    index.build(store.read(rel, view), right_cols, [](auto) { return true; });
    const auto arity = store.arity(rel);
    TupleStream out;
    std::vector<Value> key(keys.size());
    for (const auto &l : left) {
        for (std::size_t i = 0; i < keys.size(); ++i)
            key[i] = l[keys[i].first];
        index.probe(key, [&](const Value *row) {
            Tuple t = l;
            t.insert(t.end(), row, row + arity);
            out.push_back(std::move(t));
        });
    }
    return out;
}

/// π: reorders/drops columns.
inline TupleStream project(const TupleStream &in, const std::vector<std::size_t> &indices) {
    TupleStream out;
    out.reserve(in.size());
    for (const auto &t : in) {
        Tuple p;
        p.reserve(indices.size());
        for (auto i : indices)
            p.push_back(t.at(i));
        out.push_back(std::move(p));
    }
    return out;
}

/// ∪ with set semantics; keeps first occurrences in input order.
inline TupleStream union_all(const std::vector<TupleStream> &streams) {
    TupleStream out;
    std::set<Tuple> seen;
    for (const auto &s : streams)
        for (const auto &t : s)
            if (seen.insert(t).second)
                out.push_back(t);
    return out;
}

inline std::size_t cardinality(const RelationalLayer &store, RelId rel, View view) {
    return store.cardinality(rel, view);
}

} // namespace carapace
