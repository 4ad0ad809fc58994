#pragma once

#include <set>
#include <string>
#include <vector>

#include "carapace/ir.hpp"
#include "carapace/precedence.hpp"

namespace carapace {

// ---------------------------------------------------------------------------
// Static rewrites
// ---------------------------------------------------------------------------

namespace detail {

/// `alias(v1..vn) :- rel(v1..vn).` with distinct variables in the same order,
/// and the only rule defining `alias`.
inline std::optional<std::string> alias_target(const Program &p, const Rule &r) {
    if (r.body.size() != 1 || !is_atom(r.body[0]))
        return std::nullopt;
    const auto &body = std::get<Atom>(r.body[0]);
    if (body.predicate == r.head.predicate || body.terms != r.head.terms)
        return std::nullopt;
    if (variables_of(r.head.terms).size() != r.head.terms.size() ||
        !std::all_of(r.head.terms.begin(), r.head.terms.end(), is_variable))
        return std::nullopt;
    auto defining = std::count_if(p.rules.begin(), p.rules.end(),
                                  [&](const Rule &o) { return o.head.predicate == r.head.predicate; });
    if (defining != 1)
        return std::nullopt;
    return body.predicate;
}

} // namespace detail

/// Alias elimination: consumers of an alias relation read its source
/// directly. The alias rule is dropped unless its relation is in `keep` or is
/// a declared output.
inline Program rewrite(const Program &input, const std::set<std::string> &keep = {}) {
    Program p = input;
    std::set<std::string> retained = keep;
    retained.insert(p.outputs.begin(), p.outputs.end());

    std::set<std::string> inlined;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto &r : p.rules) {
            if (inlined.count(r.head.predicate))
                continue;
            auto src = detail::alias_target(p, r);
            if (!src)
                continue;
            const std::string alias = r.head.predicate;
            const std::size_t alias_rule = r.id;
            for (auto &other : p.rules) {
                if (other.id == alias_rule)
                    continue;
                for (auto &lit : other.body)
                    if (auto *a = std::get_if<Atom>(&lit); a && a->predicate == alias) {
                        a->predicate = *src;
                        changed = true;
                    }
            }
            inlined.insert(alias);
            break;
        }
    }

    for (const auto &alias : inlined) {
        if (retained.count(alias))
            continue;
        std::erase_if(p.rules, [&](const Rule &r) { return r.head.predicate == alias; });
        p.idb.erase(alias);
        p.relations.erase(alias);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

namespace detail {

inline Filters pushdown_filters(const Atom &a) {
    Filters f;
    auto meta = atom_metadata(a, 0);
    for (const auto &[pos, c] : meta.constants)
        f.constants.push_back({pos, c.value});
    for (const auto &group : meta.repeated)
        for (std::size_t k = 1; k < group.size(); ++k)
            f.equalities.push_back({group[0], group[k]});
    return f;
}

inline CQDescriptor make_cq(const Program &p, const Rule &r, std::optional<std::size_t> delta_index) {
    CQDescriptor d;
    d.rule_id = r.id;
    d.delta_index = delta_index;
    d.head = r.head;
    d.head_projection = rule_metadata(r).head;
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        CQLiteral l{r.body[i], View::KnownDerived, {}};
        if (const auto *a = std::get_if<Atom>(&r.body[i])) {
            if (!p.is_idb(a->predicate))
                l.view = View::Edb;
            else if (delta_index && *delta_index == i)
                l.view = View::KnownDelta;
            l.pushdown = pushdown_filters(*a);
        }
        d.literals.push_back(std::move(l));
    }
    Permutation textual(d.literals.size());
    std::iota(textual.begin(), textual.end(), std::size_t{0});
    if (admissible(d, textual)) {
        d.permutation = std::move(textual);
    } else {
        std::vector<std::size_t> atoms;
        for (std::size_t i = 0; i < d.literals.size(); ++i)
            if (d.literals[i].is_atom())
                atoms.push_back(i);
        d.permutation = schedule_builtins(d, atoms);
    }
    return d;
}

class Lowering {
public:
    Lowering(const Program &p, const PrecedenceGraph &g, bool naive) : p_(p), g_(g), naive_(naive) {}

    IROp run() {
        IROp root = node(OpKind::ProgramRoot, 0);
        for (const auto &rel : p_.edb()) {
            auto load = node(OpKind::EdbLoad, 0);
            load.relation = rel;
            root.children.push_back(std::move(load));
        }
        for (std::size_t s = 0; s < g_.strata.size(); ++s)
            lower_stratum(root, s);
        return root;
    }

private:
    IROp node(OpKind k, std::size_t stratum) {
        IROp op;
        op.kind = k;
        op.id = next_id_++;
        op.stratum = stratum;
        return op;
    }

    std::vector<std::size_t> recursive_atoms(const Rule &r, const Stratum &s) const {
        std::vector<std::size_t> out;
        if (!s.recursive)
            return out;
        for (std::size_t i = 0; i < r.body.size(); ++i)
            if (const auto *a = std::get_if<Atom>(&r.body[i]); a && s.contains(a->predicate))
                out.push_back(i);
        return out;
    }

    IROp rule_union(const Rule &r, std::size_t stratum, const std::vector<std::optional<std::size_t>> &deltas) {
        IROp u = node(OpKind::RuleUnion, stratum);
        u.relation = r.head.predicate;
        u.rule_id = r.id;
        for (const auto &delta : deltas) {
            IROp cq = node(OpKind::CQ, stratum);
            cq.relation = r.head.predicate;
            cq.cq = make_cq(p_, r, delta);
            u.children.push_back(std::move(cq));
        }
        return u;
    }

    IROp swap_clear(const Stratum &s, std::size_t stratum) {
        IROp sc = node(OpKind::SwapClear, stratum);
        sc.relations = s.relations;
        return sc;
    }

    std::vector<const Rule *> rules_of(const Stratum &s) const {
        std::vector<const Rule *> out;
        for (const auto &r : p_.rules)
            if (s.contains(r.head.predicate))
                out.push_back(&r);
        std::sort(out.begin(), out.end(), [](auto *a, auto *b) { return a->id < b->id; });
        return out;
    }

    void lower_stratum(IROp &root, std::size_t si) {
        const auto &s = g_.strata[si];
        const auto rules = rules_of(s);

        IROp init = node(OpKind::IterationSeq, si);
        for (const auto *r : rules)
            if (recursive_atoms(*r, s).empty())
                init.children.push_back(rule_union(*r, si, {std::nullopt}));
        init.children.push_back(swap_clear(s, si));
        root.children.push_back(std::move(init));
        if (!s.recursive)
            return;

        IROp loop = node(OpKind::DoWhile, si);
        loop.relations = s.relations;
        IROp body = node(OpKind::IterationSeq, si);
        for (const auto *r : rules) {
            auto rec = recursive_atoms(*r, s);
            if (naive_) {
                body.children.push_back(rule_union(*r, si, {std::nullopt}));
            } else if (!rec.empty()) {
                std::vector<std::optional<std::size_t>> deltas(rec.begin(), rec.end());
                body.children.push_back(rule_union(*r, si, deltas));
            }
        }
        body.children.push_back(swap_clear(s, si));
        loop.children.push_back(std::move(body));
        root.children.push_back(std::move(loop));
    }

    const Program &p_;
    const PrecedenceGraph &g_;
    bool naive_;
    NodeId next_id_ = 0;
};

} // namespace detail

/// Semi-naive lowering: per recursive stratum a base-case IterationSeq and a
/// DoWhile whose body holds, per recursive rule, one CQ per recursive body
/// atom with that atom reading KnownDelta.
inline IROp lower_semi_naive(const Program &p, const PrecedenceGraph &g) {
    return detail::Lowering(p, g, false).run();
}

/// Naive lowering, used as the correctness oracle: the same tree shape but
/// every rule is re-evaluated in full each iteration.
inline IROp lower_naive(const Program &p, const PrecedenceGraph &g) { return detail::Lowering(p, g, true).run(); }

} // namespace carapace
