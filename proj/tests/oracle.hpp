#pragma once

// Reference evaluator for tests: global naive fixpoint straight over the
// AST with std::set relations. Shares nothing with the planner, storage or
// interpreter.

#include <map>
#include <optional>
#include <set>
#include <string>

#include "carapace/ast.hpp"

namespace oracle {

using carapace::Value;
using Db = std::map<std::string, std::set<carapace::Tuple>>;
using Env = std::map<std::string, Value>;

inline std::optional<Value> eval_term(const carapace::Term &t, const Env &env) {
    if (const auto *c = std::get_if<carapace::Constant>(&t))
        return c->value;
    auto it = env.find(std::get<carapace::Variable>(t).name);
    if (it == env.end())
        return std::nullopt;
    return it->second;
}

inline Value apply_arith(carapace::ArithOp op, Value a, Value b) {
    auto ua = static_cast<unsigned long long>(a), ub = static_cast<unsigned long long>(b);
    switch (op) {
    case carapace::ArithOp::Add: return static_cast<Value>(ua + ub);
    case carapace::ArithOp::Sub: return static_cast<Value>(ua - ub);
    case carapace::ArithOp::Mul: return static_cast<Value>(ua * ub);
    }
    return 0;
}

inline bool apply_cmp(carapace::CmpOp op, Value a, Value b) {
    switch (op) {
    case carapace::CmpOp::Eq: return a == b;
    case carapace::CmpOp::Ne: return a != b;
    case carapace::CmpOp::Lt: return a < b;
    case carapace::CmpOp::Le: return a <= b;
    case carapace::CmpOp::Gt: return a > b;
    case carapace::CmpOp::Ge: return a >= b;
    }
    return false;
}

/// Solves body literals depth-first. Atoms are matched in textual order;
/// a built-in runs as soon as its inputs are bound.
template <typename F>
void solve_body(const carapace::Rule &r, const Db &db, std::vector<bool> done, Env env, F &&on_match) {
    // Run every built-in whose inputs are bound.
    for (bool progress = true; progress;) {
        progress = false;
        for (std::size_t i = 0; i < r.body.size(); ++i) {
            if (done[i] || carapace::is_atom(r.body[i]))
                continue;
            if (const auto *c = std::get_if<carapace::Comparison>(&r.body[i])) {
                auto a = eval_term(c->lhs, env), b = eval_term(c->rhs, env);
                if (!a || !b)
                    continue;
                if (!apply_cmp(c->op, *a, *b))
                    return;
            } else {
                const auto &b = std::get<carapace::Binding>(r.body[i]);
                auto x = eval_term(b.lhs, env), y = eval_term(b.rhs, env);
                if (!x || !y)
                    continue;
                Value v = apply_arith(b.op, *x, *y);
                if (auto it = env.find(b.target); it != env.end()) {
                    if (it->second != v)
                        return;
                } else {
                    env[b.target] = v;
                }
            }
            done[i] = true;
            progress = true;
        }
    }
    std::size_t next = r.body.size();
    for (std::size_t i = 0; i < r.body.size(); ++i)
        if (!done[i] && carapace::is_atom(r.body[i])) {
            next = i;
            break;
        }
    if (next == r.body.size()) {
        if (std::all_of(done.begin(), done.end(), [](bool d) { return d; }))
            on_match(env);
        return;
    }
    const auto &a = std::get<carapace::Atom>(r.body[next]);
    done[next] = true;
    auto it = db.find(a.predicate);
    if (it == db.end())
        return;
    for (const auto &t : it->second) {
        Env e = env;
        bool ok = true;
        for (std::size_t k = 0; k < a.terms.size() && ok; ++k) {
            if (const auto *c = std::get_if<carapace::Constant>(&a.terms[k])) {
                ok = c->value == t[k];
            } else {
                const auto &v = std::get<carapace::Variable>(a.terms[k]).name;
                auto [pos, fresh] = e.emplace(v, t[k]);
                ok = fresh || pos->second == t[k];
            }
        }
        if (ok)
            solve_body(r, db, done, std::move(e), on_match);
    }
}

/// Least fixpoint of the program; returns every IDB relation. `rounds`
/// receives the number of naive passes, the last one unproductive.
inline Db fixpoint(const carapace::Program &p, std::size_t *rounds = nullptr) {
    Db db;
    for (const auto &[rel, facts] : p.edb_facts)
        db[rel].insert(facts.begin(), facts.end());
    for (const auto &rel : p.idb)
        db[rel];
    for (bool changed = true; changed;) {
        changed = false;
        if (rounds)
            ++*rounds;
        Db next = db;
        for (const auto &r : p.rules)
            solve_body(r, db, std::vector<bool>(r.body.size(), false), Env{}, [&](const Env &env) {
                carapace::Tuple t;
                for (const auto &term : r.head.terms)
                    t.push_back(*eval_term(term, env));
                if (next[r.head.predicate].insert(t).second)
                    changed = true;
            });
        db = std::move(next);
    }
    Db out;
    for (const auto &rel : p.idb)
        out[rel] = db[rel];
    return out;
}

} // namespace oracle
