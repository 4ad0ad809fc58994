#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "carapace/ast.hpp"
#include "carapace/printer.hpp"
#include "carapace/relops.hpp"
#include "carapace/validate.hpp"

namespace carapace {

using NodeId = std::uint32_t;
using Permutation = std::vector<std::size_t>;

/// One body literal of a conjunctive query. Atoms carry the view they read
/// and the filters pushed down into their scan.
struct CQLiteral {
    Literal literal;
    View view = View::KnownDerived;
    Filters pushdown;

    bool is_atom() const { return carapace::is_atom(literal); }
    const Atom &atom() const { return std::get<Atom>(literal); }
    friend bool operator==(const CQLiteral &, const CQLiteral &) = default;
};

/// Content of one σπ⋈ node: a rule body specialised to a choice of views,
/// plus the order in which its literals are evaluated.
struct CQDescriptor {
    std::size_t rule_id = 0;
    /// Body literal index of the atom reading KnownDelta, if any.
    std::optional<std::size_t> delta_index;
    Atom head;
    std::vector<HeadSource> head_projection;
    /// Indexed by textual body position.
    std::vector<CQLiteral> literals;
    /// Evaluation order over literal indices.
    Permutation permutation;

    friend bool operator==(const CQDescriptor &a, const CQDescriptor &b) {
        return a.rule_id == b.rule_id && a.delta_index == b.delta_index && a.head == b.head &&
               a.literals == b.literals && a.permutation == b.permutation;
    }
};

enum class OpKind : std::uint8_t { ProgramRoot, EdbLoad, IterationSeq, DoWhile, RuleUnion, CQ, SwapClear };

inline const char *to_string(OpKind k) {
    switch (k) {
    case OpKind::ProgramRoot: return "ProgramRoot";
    case OpKind::EdbLoad: return "EdbLoad";
    case OpKind::IterationSeq: return "IterationSeq";
    case OpKind::DoWhile: return "DoWhile";
    case OpKind::RuleUnion: return "RuleUnion";
    case OpKind::CQ: return "CQ";
    case OpKind::SwapClear: return "SwapClear";
    }
    return "?";
}

/// Node of the imperative plan. Trees are treated as immutable once built;
/// transformations produce copies that keep node ids.
struct IROp {
    OpKind kind = OpKind::ProgramRoot;
    NodeId id = 0;
    std::size_t stratum = 0;
    /// EdbLoad relation, RuleUnion/CQ target.
    std::string relation;
    /// SwapClear relations, DoWhile watched relations.
    std::vector<std::string> relations;
    std::size_t rule_id = 0; // RuleUnion
    std::vector<IROp> children;
    std::optional<CQDescriptor> cq;

    friend bool operator==(const IROp &, const IROp &) = default;
};

/// Pre-order walk.
inline void for_each_node(const IROp &op, const std::function<void(const IROp &)> &fn) {
    fn(op);
    for (const auto &c : op.children)
        for_each_node(c, fn);
}

inline std::vector<const IROp *> collect(const IROp &root, OpKind kind) {
    std::vector<const IROp *> out;
    for_each_node(root, [&](const IROp &n) {
        if (n.kind == kind)
            out.push_back(&n);
    });
    return out;
}

inline const IROp *find_node(const IROp &root, NodeId id) {
    if (root.id == id)
        return &root;
    for (const auto &c : root.children)
        if (auto *f = find_node(c, id))
            return f;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Admissibility
// ---------------------------------------------------------------------------

/// True iff `perm` is a bijection on the literals and every built-in comes
/// after the literals binding its inputs.
inline bool admissible(const CQDescriptor &d, const Permutation &perm) {
    if (perm.size() != d.literals.size())
        return false;
    std::vector<bool> seen(perm.size(), false);
    std::set<std::string> bound;
    for (auto i : perm) {
        if (i >= seen.size() || seen[i])
            return false;
        seen[i] = true;
        const auto &lit = d.literals[i].literal;
        if (const auto *a = std::get_if<Atom>(&lit)) {
            for (const auto &v : variables_of(a->terms))
                bound.insert(v);
            continue;
        }
        for (const auto &v : builtin_inputs(lit))
            if (!bound.count(v))
                return false;
        if (const auto *b = std::get_if<Binding>(&lit))
            bound.insert(b->target);
    }
    return true;
}

/// Places the atoms in the given order and slots every built-in in at the
/// earliest point its inputs are bound, keeping built-ins in textual order
/// among themselves.
inline Permutation schedule_builtins(const CQDescriptor &d, const std::vector<std::size_t> &atom_order) {
    Permutation out;
    std::set<std::string> bound;
    std::vector<bool> placed(d.literals.size(), false);
    auto flush = [&] {
        for (bool progress = true; progress;) {
            progress = false;
            for (std::size_t i = 0; i < d.literals.size(); ++i) {
                if (placed[i] || d.literals[i].is_atom())
                    continue;
                auto inputs = builtin_inputs(d.literals[i].literal);
                if (std::all_of(inputs.begin(), inputs.end(), [&](const auto &v) { return bound.count(v) != 0; })) {
                    placed[i] = true;
                    out.push_back(i);
                    if (const auto *b = std::get_if<Binding>(&d.literals[i].literal))
                        bound.insert(b->target);
                    progress = true;
                }
            }
        }
    };
    flush();
    for (auto a : atom_order) {
        placed[a] = true;
        out.push_back(a);
        for (const auto &v : variables_of(d.literals[a].atom().terms))
            bound.insert(v);
        flush();
    }
    // Unorderable built-ins (rejected by validate) go last so the result is
    // still a permutation.
    for (std::size_t i = 0; i < d.literals.size(); ++i)
        if (!placed[i])
            out.push_back(i);
    return out;
}

// ---------------------------------------------------------------------------
// Debug printer
// ---------------------------------------------------------------------------

inline std::string print_permutation(const Permutation &p) {
    std::string out = "[";
    for (std::size_t i = 0; i < p.size(); ++i)
        out += (i ? "," : "") + std::to_string(p[i]);
    return out + "]";
}

/// One node per line: kind, relation, views, permutation.
inline std::string print_ir(const IROp &root, const SymbolTable &symbols) {
    std::ostringstream os;
    auto visit = [&](auto &&self, const IROp &op, int depth) -> void {
        os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << to_string(op.kind);
        switch (op.kind) {
        case OpKind::EdbLoad: os << " " << op.relation; break;
        case OpKind::RuleUnion: os << " " << op.relation << " rule=" << op.rule_id; break;
        case OpKind::SwapClear:
        case OpKind::DoWhile:
            for (const auto &r : op.relations)
                os << " " << r;
            break;
        case OpKind::CQ: {
            const auto &d = *op.cq;
            os << " " << op.relation << " delta=";
            os << (d.delta_index ? std::to_string(*d.delta_index) : std::string("none"));
            os << " perm=" << print_permutation(d.permutation) << " :";
            for (auto i : d.permutation) {
                const auto &l = d.literals[i];
                os << " " << print_literal(l.literal, symbols);
                if (l.is_atom())
                    os << "@" << to_string(l.view);
            }
            break;
        }
        default: break;
        }
        os << "\n";
        for (const auto &c : op.children)
            self(self, c, depth + 1);
    };
    visit(visit, root, 0);
    return os.str();
}

} // namespace carapace
