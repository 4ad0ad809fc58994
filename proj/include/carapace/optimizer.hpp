#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "carapace/jit_config.hpp"
#include "carapace/storage.hpp"

namespace carapace {

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

/// Exact counts at a safe point. Iteration granularity sees Derived counts
/// only; Rule and CQ granularity also see the current Delta counts.
inline CardinalitySnapshot snapshot(const RelationalLayer &store, Granularity g, std::size_t iteration = 0) {
    CardinalitySnapshot s;
    s.iteration = iteration;
    for (RelId r = 0; r < store.relation_count(); ++r) {
        const auto &name = store.name(r);
        if (store.is_edb(r)) {
            s.counts[{name, View::Edb}] = store.cardinality(r, View::Edb);
            continue;
        }
        s.counts[{name, View::KnownDerived}] = store.cardinality(r, View::KnownDerived);
        if (g != Granularity::Iteration)
            s.counts[{name, View::KnownDelta}] = store.cardinality(r, View::KnownDelta);
    }
    return s;
}

/// The views a node's subtree reads, plus the Derived view of every relation
/// it writes. Delta views collapse to Derived at Iteration granularity.
inline std::set<ViewKey> view_keys(const IROp &node, Granularity g) {
    std::set<ViewKey> keys;
    for_each_node(node, [&](const IROp &n) {
        if (n.kind != OpKind::CQ)
            return;
        keys.insert({n.cq->head.predicate, View::KnownDerived});
        for (const auto &l : n.cq->literals)
            if (l.is_atom()) {
                View v = l.view;
                if (v == View::KnownDelta && g == Granularity::Iteration)
                    v = View::KnownDerived;
                keys.insert({l.atom().predicate, v});
            }
    });
    return keys;
}

inline CardinalitySnapshot restrict(const CardinalitySnapshot &s, const std::set<ViewKey> &keys) {
    CardinalitySnapshot out;
    out.iteration = s.iteration;
    for (const auto &k : keys)
        if (auto it = s.counts.find(k); it != s.counts.end())
            out.counts.insert(*it);
    return out;
}

// ---------------------------------------------------------------------------
// Freshness
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<ViewKey> rank(const CardinalitySnapshot &s, const std::vector<ViewKey> &keys) {
    std::vector<ViewKey> out = keys;
    std::stable_sort(out.begin(), out.end(), [&](const ViewKey &a, const ViewKey &b) {
        return s.count(a.relation, a.view).value_or(0) < s.count(b.relation, b.view).value_or(0);
    });
    return out;
}

} // namespace detail

/// True iff the cardinality ranking of the covered views changed, or some
/// view changed by more than `theta` relative to its previous size.
inline bool fresh(const CardinalitySnapshot &prev, const CardinalitySnapshot &cur, double theta) {
    std::vector<ViewKey> keys;
    for (const auto &[k, n] : cur.counts)
        keys.push_back(k);
    if (detail::rank(prev, keys) != detail::rank(cur, keys))
        return true;
    if (std::isinf(theta))
        return false;
    for (const auto &[k, n] : cur.counts) {
        const double before = static_cast<double>(prev.count(k.relation, k.view).value_or(0));
        const double change = std::abs(static_cast<double>(n) - before) / std::max(before, 1.0);
        if (change > theta)
            return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Join ordering
// ---------------------------------------------------------------------------

/// 1 - (bound positions / arity). A position is bound if it holds a
/// constant, repeats a variable seen earlier in the atom, or names a
/// variable bound by an already placed literal.
inline double selectivity(const Atom &a, const std::set<std::string> &bound) {
    if (a.terms.empty())
        return 0.0;
    std::set<std::string> here;
    std::size_t n = 0;
    for (const auto &t : a.terms) {
        if (!is_variable(t)) {
            ++n;
            continue;
        }
        const auto &v = var_name(t);
        if (bound.count(v) || here.count(v))
            ++n;
        here.insert(v);
    }
    return 1.0 - static_cast<double>(n) / static_cast<double>(a.terms.size());
}

struct OrderKey {
    std::size_t cardinality = 0;
    double selectivity = 1.0;
};

namespace detail {

/// Greedy stable selection: repeatedly place the remaining atom with the
/// smallest key, selectivity evaluated against the variables bound so far.
/// Ties keep textual order.
template <typename CardFn>
std::vector<std::size_t> greedy_atoms(const std::vector<const Atom *> &atoms, const std::vector<std::size_t> &index,
                                      SortPolicy policy, CardFn &&card, bool selectivity_only) {
    std::vector<std::size_t> order;
    std::vector<bool> used(atoms.size(), false);
    std::set<std::string> bound;
    for (std::size_t step = 0; step < atoms.size(); ++step) {
        std::size_t best = atoms.size();
        OrderKey best_key;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (used[i])
                continue;
            OrderKey k{selectivity_only ? 0 : card(i), selectivity(*atoms[i], bound)};
            bool better = best == atoms.size();
            if (!better) {
                if (policy == SortPolicy::SelectivityThenCardinality)
                    better = k.selectivity < best_key.selectivity ||
                             (k.selectivity == best_key.selectivity && k.cardinality < best_key.cardinality);
                else
                    better = k.cardinality < best_key.cardinality ||
                             (k.cardinality == best_key.cardinality && k.selectivity < best_key.selectivity);
            }
            if (better) {
                best = i;
                best_key = k;
            }
        }
        used[best] = true;
        order.push_back(index[best]);
        for (const auto &v : variables_of(atoms[best]->terms))
            bound.insert(v);
    }
    return order;
}

} // namespace detail

/// Cardinality of one atom literal under a snapshot. Delta views missing from
/// the snapshot (Iteration granularity) fall back to the Derived count.
inline std::size_t literal_cardinality(const CQLiteral &l, const CardinalitySnapshot &s) {
    const auto &rel = l.atom().predicate;
    if (auto n = s.count(rel, l.view))
        return *n;
    if (auto n = s.count(rel, View::KnownDerived))
        return *n;
    if (auto n = s.count(rel, View::Edb))
        return *n;
    return 0;
}

/// New evaluation order for a CQ. Atoms are chosen greedily by the policy's
/// key; built-ins go to their earliest admissible slot.
inline Permutation order(const CQDescriptor &d, const CardinalitySnapshot &s, SortPolicy policy) {
    if (policy == SortPolicy::None)
        return d.permutation;
    std::vector<const Atom *> atoms;
    std::vector<std::size_t> index;
    std::vector<std::size_t> cards;
    for (std::size_t i = 0; i < d.literals.size(); ++i)
        if (d.literals[i].is_atom()) {
            atoms.push_back(&d.literals[i].atom());
            index.push_back(i);
            cards.push_back(literal_cardinality(d.literals[i], s));
        }
    auto atom_order = detail::greedy_atoms(atoms, index, policy, [&](std::size_t i) { return cards[i]; }, false);
    return schedule_builtins(d, atom_order);
}

// ---------------------------------------------------------------------------
// Ahead-of-time pre-sorting of rule bodies
// ---------------------------------------------------------------------------

/// Reorders every rule body. RulesOnly uses selectivity alone; FactsAndRules
/// uses (EDB cardinality, selectivity) with IDB relations counted as 0.
/// `edb_counts` must be given for FactsAndRules.
inline Program presort(const Program &p, const std::map<std::string, std::size_t> *edb_counts, Presort mode) {
    if (mode == Presort::Off)
        return p;
    if (mode == Presort::FactsAndRules && !edb_counts)
        throw std::invalid_argument("facts-and-rules presort needs EDB cardinalities");
    Program out = p;
    for (auto &r : out.rules) {
        CQDescriptor d;
        std::vector<const Atom *> atoms;
        std::vector<std::size_t> index;
        std::vector<std::size_t> cards;
        for (std::size_t i = 0; i < r.body.size(); ++i) {
            d.literals.push_back({r.body[i], View::KnownDerived, {}});
            if (const auto *a = std::get_if<Atom>(&r.body[i])) {
                atoms.push_back(a);
                index.push_back(i);
                std::size_t n = 0;
                if (edb_counts && !p.is_idb(a->predicate))
                    if (auto it = edb_counts->find(a->predicate); it != edb_counts->end())
                        n = it->second;
                cards.push_back(n);
            }
        }
        auto atom_order =
            detail::greedy_atoms(atoms, index, SortPolicy::CardinalityThenSelectivity,
                                 [&](std::size_t i) { return cards[i]; }, mode == Presort::RulesOnly);
        auto perm = schedule_builtins(d, atom_order);
        std::vector<Literal> body;
        for (auto i : perm)
            body.push_back(r.body[i]);
        r.body = std::move(body);
    }
    return out;
}

inline std::map<std::string, std::size_t> edb_cardinalities(const RelationalLayer &store) {
    std::map<std::string, std::size_t> out;
    for (RelId r = 0; r < store.relation_count(); ++r)
        if (store.is_edb(r))
            out[store.name(r)] = store.cardinality(r, View::Edb);
    return out;
}

} // namespace carapace
