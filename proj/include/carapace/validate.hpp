#pragma once

#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "carapace/ast.hpp"
#include "carapace/errors.hpp"
#include "carapace/printer.hpp"

namespace carapace {

// ---------------------------------------------------------------------------
// Column type inference
// ---------------------------------------------------------------------------

namespace detail {

/// Union-find over "slots" (relation columns and per-rule variables), each
/// class carrying at most one ValueType.
class TypeUnifier {
public:
    int slot(const std::string &key) {
        auto [it, fresh] = index_.emplace(key, static_cast<int>(parent_.size()));
        if (fresh) {
            parent_.push_back(it->second);
            type_.emplace_back();
            names_.push_back(key);
        }
        return it->second;
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns false on a conflict.
    bool pin(int x, ValueType t) {
        x = find(x);
        if (!type_[x]) {
            type_[x] = t;
            return true;
        }
        return *type_[x] == t;
    }

    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return true;
        if (type_[a] && type_[b] && *type_[a] != *type_[b])
            return false;
        parent_[b] = a;
        if (!type_[a])
            type_[a] = type_[b];
        return true;
    }

    std::optional<ValueType> type_of(int x) { return type_[find(x)]; }

private:
    std::map<std::string, int> index_;
    std::vector<int> parent_;
    std::vector<std::optional<ValueType>> type_;
    std::vector<std::string> names_;
};

inline std::string column_key(const std::string &rel, std::size_t i) { return rel + "#" + std::to_string(i); }
inline std::string var_key(std::size_t rule, const std::string &v) { return "r" + std::to_string(rule) + ":" + v; }

} // namespace detail

struct TypeInference {
    std::map<std::string, std::vector<ValueType>> columns;
    std::vector<Diagnostic> conflicts;
};

/// Infers a type for every relation column from declarations, facts and rule
/// usage. Unconstrained columns default to Symbol, which reproduces fact-file
/// text exactly.
inline TypeInference infer_types(const Program &p) {
    detail::TypeUnifier u;
    TypeInference out;
    auto conflict = [&](const std::string &rel, std::optional<std::size_t> rule, std::string msg) {
        out.conflicts.push_back({DiagnosticKind::TypeConflict, rel, rule, std::move(msg)});
    };

    for (const auto &[name, info] : p.relations)
        for (std::size_t i = 0; i < info.arity; ++i) {
            int s = u.slot(detail::column_key(name, i));
            if (i < info.pinned.size() && info.pinned[i])
                u.pin(s, *info.pinned[i]);
        }

    for (const auto &rule : p.rules) {
        const auto &sym = *p.symbols;
        auto term_slot = [&](const Term &t) -> std::optional<int> {
            if (is_variable(t))
                return u.slot(detail::var_key(rule.id, var_name(t)));
            return std::nullopt;
        };
        auto visit_atom = [&](const Atom &a) {
            for (std::size_t i = 0; i < a.terms.size(); ++i) {
                int col = u.slot(detail::column_key(a.predicate, i));
                const auto &t = a.terms[i];
                bool ok = is_variable(t) ? u.unite(col, *term_slot(t)) : u.pin(col, std::get<Constant>(t).type);
                if (!ok)
                    conflict(a.predicate, rule.id,
                             "type conflict in rule " + print_rule(rule, sym) + ": " + a.predicate + " column " +
                                 std::to_string(i) + " used as both number and symbol");
            }
        };
        auto need_number = [&](const Term &t, const std::string &what) {
            bool ok = is_variable(t) ? u.pin(*term_slot(t), ValueType::Number)
                                     : std::get<Constant>(t).type == ValueType::Number;
            if (!ok)
                conflict(rule.head.predicate, rule.id,
                         "type conflict in rule " + print_rule(rule, sym) + ": " + what + " needs number operands");
        };

        visit_atom(rule.head);
        for (const auto &lit : rule.body) {
            if (const auto *a = std::get_if<Atom>(&lit)) {
                visit_atom(*a);
            } else if (const auto *c = std::get_if<Comparison>(&lit)) {
                const auto what = print_literal(lit, sym);
                if (c->op == CmpOp::Eq || c->op == CmpOp::Ne) {
                    auto l = term_slot(c->lhs), r = term_slot(c->rhs);
                    bool ok = true;
                    if (l && r)
                        ok = u.unite(*l, *r);
                    else if (l)
                        ok = u.pin(*l, std::get<Constant>(c->rhs).type);
                    else if (r)
                        ok = u.pin(*r, std::get<Constant>(c->lhs).type);
                    else
                        ok = std::get<Constant>(c->lhs).type == std::get<Constant>(c->rhs).type;
                    if (!ok)
                        conflict(rule.head.predicate, rule.id,
                                 "type conflict in rule " + print_rule(rule, sym) + ": " + what + " compares number with symbol");
                } else {
                    need_number(c->lhs, what);
                    need_number(c->rhs, what);
                }
            } else {
                const auto &b = std::get<Binding>(lit);
                const auto what = print_literal(lit, sym);
                need_number(Variable{b.target}, what);
                need_number(b.lhs, what);
                need_number(b.rhs, what);
            }
        }
    }

    for (const auto &[name, info] : p.relations) {
        auto &cols = out.columns[name];
        for (std::size_t i = 0; i < info.arity; ++i)
            cols.push_back(u.type_of(u.slot(detail::column_key(name, i))).value_or(ValueType::Symbol));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rule metadata
// ---------------------------------------------------------------------------

struct AtomMetadata {
    std::size_t literal = 0;                                   // index into rule.body
    std::vector<std::pair<std::size_t, std::string>> variables; // (term position, variable)
    std::vector<std::pair<std::size_t, Constant>> constants;    // (term position, constant)
    std::vector<std::vector<std::size_t>> repeated;             // positions sharing one variable
};

/// Where a head term's value comes from.
struct HeadSource {
    enum class Kind { Constant, AtomPosition, Builtin, Unbound } kind = Kind::Unbound;
    Constant constant{};
    std::size_t literal = 0;  // body literal index (atom or binding)
    std::size_t position = 0; // term index inside the atom
};

struct RuleMetadata {
    std::vector<AtomMetadata> atoms;
    std::vector<HeadSource> head;
};

inline AtomMetadata atom_metadata(const Atom &a, std::size_t literal) {
    AtomMetadata m;
    m.literal = literal;
    std::map<std::string, std::vector<std::size_t>> seen;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        const auto &t = a.terms[i];
        if (is_variable(t)) {
            m.variables.emplace_back(i, var_name(t));
            auto &pos = seen[var_name(t)];
            if (pos.empty())
                order.push_back(var_name(t));
            pos.push_back(i);
        } else {
            m.constants.emplace_back(i, std::get<Constant>(t));
        }
    }
    for (const auto &v : order)
        if (seen[v].size() > 1)
            m.repeated.push_back(seen[v]);
    return m;
}

inline RuleMetadata rule_metadata(const Rule &r) {
    RuleMetadata m;
    for (std::size_t i = 0; i < r.body.size(); ++i)
        if (const auto *a = std::get_if<Atom>(&r.body[i]))
            m.atoms.push_back(atom_metadata(*a, i));
    for (const auto &t : r.head.terms) {
        HeadSource src;
        if (!is_variable(t)) {
            src.kind = HeadSource::Kind::Constant;
            src.constant = std::get<Constant>(t);
        } else {
            const auto &v = var_name(t);
            for (const auto &am : m.atoms) {
                auto it = std::find_if(am.variables.begin(), am.variables.end(),
                                       [&](const auto &pv) { return pv.second == v; });
                if (it != am.variables.end()) {
                    src.kind = HeadSource::Kind::AtomPosition;
                    src.literal = am.literal;
                    src.position = it->first;
                    break;
                }
            }
            if (src.kind == HeadSource::Kind::Unbound)
                for (std::size_t i = 0; i < r.body.size(); ++i)
                    if (const auto *b = std::get_if<Binding>(&r.body[i]); b && b->target == v) {
                        src.kind = HeadSource::Kind::Builtin;
                        src.literal = i;
                        break;
                    }
        }
        m.head.push_back(src);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Variables bound by the whole body under some admissible order, and the
/// built-ins that no order can schedule.
struct BindingClosure {
    std::set<std::string> bound;
    std::vector<std::size_t> unorderable; // body literal indices
};

inline BindingClosure binding_closure(const Rule &r) {
    BindingClosure c;
    for (const auto &lit : r.body)
        if (const auto *a = std::get_if<Atom>(&lit))
            for (const auto &v : variables_of(a->terms))
                c.bound.insert(v);
    std::vector<bool> done(r.body.size(), false);
    for (bool progress = true; progress;) {
        progress = false;
        for (std::size_t i = 0; i < r.body.size(); ++i) {
            if (done[i] || is_atom(r.body[i]))
                continue;
            auto inputs = builtin_inputs(r.body[i]);
            if (std::all_of(inputs.begin(), inputs.end(), [&](const auto &v) { return c.bound.count(v) != 0; })) {
                if (const auto *b = std::get_if<Binding>(&r.body[i]))
                    c.bound.insert(b->target);
                done[i] = true;
                progress = true;
            }
        }
    }
    for (std::size_t i = 0; i < r.body.size(); ++i)
        if (!is_atom(r.body[i]) && !done[i])
            c.unorderable.push_back(i);
    return c;
}

inline std::vector<Diagnostic> validate(const Program &p) {
    std::vector<Diagnostic> out;
    const auto &sym = *p.symbols;

    auto check_arity = [&](const Atom &a, std::size_t rule) {
        auto it = p.relations.find(a.predicate);
        if (it == p.relations.end() || it->second.arity != a.arity())
            out.push_back({DiagnosticKind::ArityMismatch, a.predicate, rule,
                           "arity mismatch for relation " + a.predicate + " in rule " + std::to_string(rule)});
    };

    for (const auto &r : p.rules) {
        check_arity(r.head, r.id);
        bool has_atom = false;
        for (const auto &lit : r.body)
            if (const auto *a = std::get_if<Atom>(&lit)) {
                has_atom = true;
                check_arity(*a, r.id);
            }
        if (!has_atom)
            out.push_back({DiagnosticKind::NoRelationAtom, r.head.predicate, r.id,
                           "rule " + print_rule(r, sym) + " has no relation atom in its body"});

        auto closure = binding_closure(r);
        for (auto i : closure.unorderable) {
            std::string missing;
            for (const auto &v : builtin_inputs(r.body[i]))
                if (!closure.bound.count(v))
                    missing += (missing.empty() ? "" : ", ") + v;
            out.push_back({DiagnosticKind::UnorderableBuiltin, r.head.predicate, r.id,
                           "built-in `" + print_literal(r.body[i], sym) + "` in rule " + print_rule(r, sym) +
                               " cannot be ordered: no literal binds " + missing});
        }
        for (const auto &v : variables_of(r.head.terms))
            if (!closure.bound.count(v))
                out.push_back({DiagnosticKind::RangeRestriction, r.head.predicate, r.id,
                               "range-restriction violation in " + r.head.predicate + ": head variable " + v +
                                   " is unbound in rule " + print_rule(r, sym)});
    }

    auto types = infer_types(p);
    out.insert(out.end(), types.conflicts.begin(), types.conflicts.end());
    return out;
}

} // namespace carapace
