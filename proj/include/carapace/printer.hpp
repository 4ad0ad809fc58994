#pragma once

#include <sstream>
#include <string>

#include "carapace/ast.hpp"

namespace carapace {

inline std::string quote_symbol(const std::string &s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    out += '"';
    return out;
}

inline std::string print_constant(const Constant &c, const SymbolTable &symbols) {
    return c.type == ValueType::Number ? std::to_string(c.value) : quote_symbol(symbols.resolve(c.value));
}

inline std::string print_term(const Term &t, const SymbolTable &symbols) {
    if (const auto *v = std::get_if<Variable>(&t))
        return v->name;
    return print_constant(std::get<Constant>(t), symbols);
}

inline std::string print_atom(const Atom &a, const SymbolTable &symbols) {
    std::string out = a.predicate + "(";
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (i)
            out += ", ";
        out += print_term(a.terms[i], symbols);
    }
    return out + ")";
}

inline std::string print_literal(const Literal &l, const SymbolTable &symbols) {
    if (const auto *a = std::get_if<Atom>(&l))
        return print_atom(*a, symbols);
    if (const auto *c = std::get_if<Comparison>(&l))
        return print_term(c->lhs, symbols) + " " + to_string(c->op) + " " + print_term(c->rhs, symbols);
    const auto &b = std::get<Binding>(l);
    return b.target + " = " + print_term(b.lhs, symbols) + " " + to_string(b.op) + " " + print_term(b.rhs, symbols);
}

inline std::string print_rule(const Rule &r, const SymbolTable &symbols) {
    std::string out = print_atom(r.head, symbols) + " :- ";
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        if (i)
            out += ", ";
        out += print_literal(r.body[i], symbols);
    }
    return out + ".";
}

/// Prints a program in the dialect accepted by parse(). Relations get an
/// explicit `.decl` so column types survive a reparse; rules are printed in
/// id order so ids are reassigned identically.
inline std::string print_program(const Program &p) {
    const auto &sym = *p.symbols;
    std::ostringstream os;
    for (const auto &[name, info] : p.relations) {
        os << ".decl " << name << "(";
        for (std::size_t i = 0; i < info.columns.size(); ++i)
            os << (i ? ", " : "") << "c" << i << ": " << to_string(info.columns[i]);
        os << ")\n";
    }
    for (const auto &o : p.outputs)
        os << ".output " << o << "\n";
    for (const auto &[name, facts] : p.edb_facts) {
        // Sorted by text so the output does not depend on interning order.
        const auto &cols = p.relations.at(name).columns;
        std::vector<std::string> lines;
        for (const auto &t : facts) {
            std::string line = name + "(";
            for (std::size_t i = 0; i < t.size(); ++i)
                line += (i ? ", " : "") + print_constant(Constant{cols[i], t[i]}, sym);
            lines.push_back(line + ").");
        }
        std::sort(lines.begin(), lines.end());
        for (const auto &l : lines)
            os << l << "\n";
    }
    std::vector<const Rule *> ordered;
    for (const auto &r : p.rules)
        ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](auto *a, auto *b) { return a->id < b->id; });
    for (const auto *r : ordered)
        os << print_rule(*r, sym) << "\n";
    return os.str();
}

} // namespace carapace
