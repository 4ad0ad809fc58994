#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "carapace/value.hpp"

namespace carapace {

struct Variable {
    std::string name;
    friend bool operator==(const Variable &, const Variable &) = default;
};

struct Constant {
    ValueType type = ValueType::Number;
    Value value = 0;
    friend bool operator==(const Constant &, const Constant &) = default;
};

using Term = std::variant<Variable, Constant>;

inline bool is_variable(const Term &t) { return std::holds_alternative<Variable>(t); }
inline const std::string &var_name(const Term &t) { return std::get<Variable>(t).name; }

struct Atom {
    std::string predicate;
    std::vector<Term> terms;

    std::size_t arity() const { return terms.size(); }
    friend bool operator==(const Atom &, const Atom &) = default;
};

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };
enum class ArithOp : std::uint8_t { Add, Sub, Mul };

inline const char *to_string(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

inline const char *to_string(ArithOp op) {
    switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    }
    return "?";
}

/// `lhs op rhs`; every variable must be bound before it is evaluated.
struct Comparison {
    CmpOp op = CmpOp::Eq;
    Term lhs;
    Term rhs;
    friend bool operator==(const Comparison &, const Comparison &) = default;
};

/// `target = lhs op rhs`. Binds `target` from the operands; if `target` is
/// already bound when the literal runs it degrades to an equality check.
struct Binding {
    std::string target;
    ArithOp op = ArithOp::Add;
    Term lhs;
    Term rhs;
    friend bool operator==(const Binding &, const Binding &) = default;
};

using Literal = std::variant<Atom, Comparison, Binding>;

inline bool is_atom(const Literal &l) { return std::holds_alternative<Atom>(l); }

struct Rule {
    std::size_t id = 0;
    Atom head;
    std::vector<Literal> body;
};

struct RelationInfo {
    std::size_t arity = 0;
    /// Resolved column types (filled by type inference).
    std::vector<ValueType> columns;
    /// Types fixed by a `.decl` or by constants in facts.
    std::vector<std::optional<ValueType>> pinned;
};

using FactSet = std::set<Tuple>;

/// A parsed program. `idb` holds every relation defined by a rule; every
/// other known relation is extensional. The two sets are disjoint (facts
/// written for a rule-defined relation are moved to a synthetic relation
/// at parse time).
struct Program {
    std::shared_ptr<SymbolTable> symbols = std::make_shared<SymbolTable>();
    std::map<std::string, RelationInfo> relations;
    std::map<std::string, FactSet> edb_facts;
    std::vector<Rule> rules;
    std::set<std::string> idb;
    /// From `.output` directives. Empty means "every IDB relation".
    std::vector<std::string> outputs;

    bool is_idb(const std::string &rel) const { return idb.count(rel) != 0; }

    std::set<std::string> edb() const {
        std::set<std::string> out;
        for (const auto &[name, info] : relations)
            if (!is_idb(name))
                out.insert(name);
        return out;
    }

    std::vector<std::string> output_relations() const {
        if (!outputs.empty())
            return outputs;
        return {idb.begin(), idb.end()};
    }

    const Rule *rule_by_id(std::size_t id) const {
        for (const auto &r : rules)
            if (r.id == id)
                return &r;
        return nullptr;
    }
};

/// Variables of a term list, in first-occurrence order.
inline std::vector<std::string> variables_of(const std::vector<Term> &terms) {
    std::vector<std::string> out;
    for (const auto &t : terms)
        if (is_variable(t)) {
            const auto &n = var_name(t);
            if (std::find(out.begin(), out.end(), n) == out.end())
                out.push_back(n);
        }
    return out;
}

/// Input variables of a built-in (those that must be bound beforehand).
inline std::vector<std::string> builtin_inputs(const Literal &l) {
    if (const auto *c = std::get_if<Comparison>(&l))
        return variables_of({c->lhs, c->rhs});
    if (const auto *b = std::get_if<Binding>(&l))
        return variables_of({b->lhs, b->rhs});
    return {};
}

} // namespace carapace
