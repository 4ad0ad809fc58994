#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "carapace/ast.hpp"
#include "carapace/tuple_set.hpp"

namespace carapace {

using RelId = std::uint32_t;

/// Which quadrant of a relation an operation addresses. EDB relations have a
/// single immutable set; reading them through any Known view yields it.
enum class View : std::uint8_t { Edb, KnownDerived, KnownDelta, NewDerived, NewDelta };

inline const char *to_string(View v) {
    switch (v) {
    case View::Edb: return "edb";
    case View::KnownDerived: return "known-derived";
    case View::KnownDelta: return "known-delta";
    case View::NewDerived: return "new-derived";
    case View::NewDelta: return "new-delta";
    }
    return "?";
}

struct ViewKey {
    std::string relation;
    View view = View::KnownDerived;
    friend auto operator<=>(const ViewKey &, const ViewKey &) = default;
};

/// Exact per-view tuple counts captured at a safe point.
struct CardinalitySnapshot {
    std::size_t iteration = 0;
    std::map<ViewKey, std::size_t> counts;

    std::optional<std::size_t> count(const std::string &rel, View v) const {
        auto it = counts.find({rel, v});
        if (it == counts.end())
            return std::nullopt;
        return it->second;
    }

    friend bool operator==(const CardinalitySnapshot &, const CardinalitySnapshot &) = default;
};

/// The pluggable relational layer: relation storage plus the lifecycle
/// operations the evaluator needs at safe points.
class RelationalLayer {
public:
    virtual ~RelationalLayer() = default;

    virtual std::size_t relation_count() const = 0;
    virtual std::optional<RelId> find(std::string_view name) const = 0;
    virtual const std::string &name(RelId rel) const = 0;
    virtual std::size_t arity(RelId rel) const = 0;
    virtual bool is_edb(RelId rel) const = 0;

    RelId id(std::string_view name) const {
        if (auto r = find(name))
            return *r;
        throw std::out_of_range("unknown relation " + std::string(name));
    }

    /// Adds an input fact to an EDB relation.
    virtual void load_edb(RelId rel, std::span<const Value> t) = 0;

    /// Writes a derived tuple. `view` must be NewDerived or NewDelta; either
    /// way the tuple lands in both New views. Returns true iff the tuple is
    /// neither in KnownDerived nor already written this iteration.
    virtual bool insert(RelId rel, View view, std::span<const Value> t) = 0;

    /// Materialised views: Edb, KnownDerived, KnownDelta and NewDelta.
    virtual const TupleSet &read(RelId rel, View view) const = 0;
    virtual bool contains(RelId rel, View view, std::span<const Value> t) const = 0;
    virtual std::size_t cardinality(RelId rel, View view) const = 0;

    /// End-of-iteration promotion: KnownDerived gains the New facts,
    /// KnownDelta becomes NewDelta and the New views are reset.
    virtual void swap_and_clear(std::span<const RelId> rels) = 0;

    /// True iff some relation's KnownDelta is non-empty.
    virtual bool diff_nonempty(std::span<const RelId> rels) const = 0;

    /// Brackets one CQ evaluation. Stores may use it to check that Known
    /// views are read-only and New views write-only in between.
    virtual void begin_cq() {}
    virtual void end_cq() {}
};

/// In-memory hash-set store. NewDerived is not materialised: it is the
/// logical union KnownDerived ∪ NewDelta, so duplicate checks share the
/// KnownDerived set instead of copying it every iteration.
class MemoryStore : public RelationalLayer {
public:
    MemoryStore() = default;

    explicit MemoryStore(const Program &p) {
        for (const auto &[name, info] : p.relations)
            add_relation(name, info.arity, !p.is_idb(name));
        for (const auto &[name, facts] : p.edb_facts) {
            auto rel = id(name);
            for (const auto &t : facts)
                load_edb(rel, t);
        }
    }

    RelId add_relation(const std::string &name, std::size_t arity, bool edb) {
        if (auto existing = find(name))
            return *existing;
        auto rel = static_cast<RelId>(rels_.size());
        rels_.push_back(Relation{name, arity, edb, TupleSet(arity), TupleSet(arity), TupleSet(arity)});
        index_.emplace(name, rel);
        return rel;
    }

    /// When enabled, reading a New view or swapping while a CQ is in flight
    /// throws std::logic_error.
    void set_quadrant_checks(bool on) { checks_ = on; }

    std::size_t relation_count() const override { return rels_.size(); }

    std::optional<RelId> find(std::string_view name) const override {
        auto it = index_.find(std::string(name));
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    const std::string &name(RelId rel) const override { return rels_.at(rel).name; }
    std::size_t arity(RelId rel) const override { return rels_.at(rel).arity; }
    bool is_edb(RelId rel) const override { return rels_.at(rel).edb; }

    void load_edb(RelId rel, std::span<const Value> t) override {
        auto &r = rels_.at(rel);
        if (!r.edb)
            throw std::logic_error("load_edb on derived relation " + r.name);
        check_arity(r, t);
        r.known_derived.insert(t);
    }

    bool insert(RelId rel, View view, std::span<const Value> t) override {
        auto &r = rels_[rel];
        if (r.edb)
            throw std::logic_error("insert into input relation " + r.name);
        if (view != View::NewDerived && view != View::NewDelta)
            throw std::logic_error(std::string("insert into read-only view ") + to_string(view));
        check_arity(r, t);
        if (r.known_derived.contains(t))
            return false;
        return r.new_delta.insert(t);
    }

    const TupleSet &read(RelId rel, View view) const override {
        const auto &r = rels_[rel];
        if (r.edb)
            return view == View::KnownDelta || view == View::NewDelta ? empty_for(r) : r.known_derived;
        switch (view) {
        case View::Edb:
        case View::KnownDerived: return r.known_derived;
        case View::KnownDelta: return r.known_delta;
        case View::NewDelta:
            if (checks_ && in_cq_)
                throw std::logic_error("CQ read of New view of " + r.name);
            return r.new_delta;
        case View::NewDerived: break;
        }
        throw std::logic_error("NewDerived of " + r.name + " is not materialised; use contains/cardinality");
    }

    bool contains(RelId rel, View view, std::span<const Value> t) const override {
        const auto &r = rels_[rel];
        if (view == View::NewDerived) {
            if (checks_ && in_cq_)
                throw std::logic_error("CQ read of New view of " + r.name);
            return r.known_derived.contains(t) || r.new_delta.contains(t);
        }
        return read(rel, view).contains(t);
    }

    std::size_t cardinality(RelId rel, View view) const override {
        const auto &r = rels_[rel];
        if (view == View::NewDerived)
            return r.known_derived.size() + (r.edb ? 0 : r.new_delta.size());
        return read(rel, view).size();
    }

    void swap_and_clear(std::span<const RelId> rels) override {
        if (checks_ && in_cq_)
            throw std::logic_error("swap_and_clear inside a CQ evaluation");
        for (auto rel : rels) {
            auto &r = rels_[rel];
            if (r.edb)
                continue;
            r.known_derived.merge(r.new_delta);
            r.known_delta.swap(r.new_delta);
            r.new_delta.clear();
        }
    }

    bool diff_nonempty(std::span<const RelId> rels) const override {
        for (auto rel : rels)
            if (!rels_[rel].edb && !rels_[rel].known_delta.empty())
                return true;
        return false;
    }

    void begin_cq() override { in_cq_ = true; }
    void end_cq() override { in_cq_ = false; }

private:
    struct Relation {
        std::string name;
        std::size_t arity;
        bool edb;
        TupleSet known_derived; // the fact set for EDB relations
        TupleSet known_delta;
        TupleSet new_delta;
    };

    static void check_arity(const Relation &r, std::span<const Value> t) {
        if (t.size() != r.arity)
            throw std::logic_error("arity mismatch for " + r.name + ": got " + std::to_string(t.size()) +
                                   ", expected " + std::to_string(r.arity));
    }

    const TupleSet &empty_for(const Relation &r) const {
        auto it = empties_.find(r.arity);
        if (it == empties_.end())
            it = empties_.emplace(r.arity, TupleSet(r.arity)).first;
        return it->second;
    }

    std::vector<Relation> rels_;
    std::unordered_map<std::string, RelId> index_;
    mutable std::map<std::size_t, TupleSet> empties_;
    bool checks_ = false;
    bool in_cq_ = false;
};

/// Sorted contents of a view, for tests and output.
inline std::vector<Tuple> sorted_tuples(const RelationalLayer &store, RelId rel, View view) {
    auto out = store.read(rel, view).tuples();
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace carapace
