#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "carapace/cq_plan.hpp"
#include "carapace/interpreter.hpp"
#include "carapace/jit_config.hpp"
#include "carapace/optimizer.hpp"

namespace carapace {

using Orders = std::map<NodeId, Permutation>;

/// Orders for every CQ below `node` under a snapshot.
inline Orders compute_orders(const IROp &node, const CardinalitySnapshot &s, SortPolicy policy) {
    Orders out;
    for_each_node(node, [&](const IROp &n) {
        if (n.kind == OpKind::CQ)
            out[n.id] = order(*n.cq, s, policy);
    });
    return out;
}

/// Copy of `node` with the given CQ permutations swapped in.
inline IROp regen_ir(const IROp &node, const Orders &orders) {
    IROp out = node;
    auto visit = [&](auto &&self, IROp &n) -> void {
        if (n.kind == OpKind::CQ)
            if (auto it = orders.find(n.id); it != orders.end())
                n.cq->permutation = it->second;
        for (auto &c : n.children)
            self(self, c);
    };
    visit(visit, out);
    return out;
}

using Step = std::function<void(ExecContext &)>;

/// Executable form of one node. Composite nodes have one step per child so
/// that execution can switch artifacts at child boundaries.
struct Artifact {
    NodeId node = 0;
    std::uint64_t generation = 0;
    Backend backend = Backend::IRGen;
    Scope scope = Scope::Full;
    IROp plan; // the regenerated subtree
    std::vector<Step> steps;
    std::vector<OpKind> step_kinds;

    void run(ExecContext &ctx, std::size_t from = 0) const {
        for (std::size_t k = from; k < steps.size(); ++k)
            steps[k](ctx);
    }
};

namespace detail {

inline Step compiled_cq_step(const IROp &cq) {
    CompiledCQ fn(prepare(*cq.cq));
    const NodeId id = cq.id;
    return [fn = std::move(fn), id](ExecContext &ctx) {
        auto r = fn(ctx.store);
        auto &ns = ctx.stats.nodes[id];
        ns.join_probes += r.probes;
        ++ns.evaluations;
        ++ctx.stats.compiled_cqs;
        ctx.stats.inserted += r.inserted;
    };
}

/// Whole subtree as closures: no tree is consulted at run time.
inline Step compile_full(const IROp &op) {
    switch (op.kind) {
    case OpKind::CQ: return compiled_cq_step(op);
    case OpKind::SwapClear: return [op](ExecContext &ctx) { swap_clear(op, ctx); };
    case OpKind::EdbLoad: return [](ExecContext &) {};
    case OpKind::DoWhile: {
        auto body = compile_full(op.children.at(0));
        return [body = std::move(body), relations = op.relations, stratum = op.stratum](ExecContext &ctx) {
            auto watched = ctx.ids(relations);
            do {
                body(ctx);
                ++ctx.stats.loop_iterations[stratum];
            } while (ctx.store.diff_nonempty(watched));
        };
    }
    default: break;
    }
    std::vector<Step> children;
    for (const auto &c : op.children)
        children.push_back(compile_full(c));
    return [children = std::move(children)](ExecContext &ctx) {
        for (const auto &c : children)
            c(ctx);
    };
}

} // namespace detail

/// Pipeline backend. Full composes the subtree from prebuilt operator
/// closures; Snippet compiles only the node's own sequencing and hands each
/// child back to the interpreter. A CQ has no children, so both scopes
/// compile it whole.
inline Artifact compile_pipeline(const IROp &node, const Orders &orders, Scope scope) {
    Artifact a;
    a.node = node.id;
    a.backend = Backend::Pipeline;
    a.scope = scope;
    a.plan = regen_ir(node, orders);
    if (a.plan.kind == OpKind::CQ) {
        a.steps.push_back(detail::compiled_cq_step(a.plan));
        a.step_kinds.push_back(OpKind::CQ);
        return a;
    }
    for (const auto &c : a.plan.children) {
        if (scope == Scope::Full)
            a.steps.push_back(detail::compile_full(c));
        else
            a.steps.push_back([c](ExecContext &ctx) { interpret(c, ctx); });
        a.step_kinds.push_back(c.kind);
    }
    return a;
}

/// IR regeneration backend: the reordered tree, run by the interpreter.
inline Artifact compile_irgen(const IROp &node, const Orders &orders) {
    Artifact a;
    a.node = node.id;
    a.backend = Backend::IRGen;
    a.plan = regen_ir(node, orders);
    if (a.plan.kind == OpKind::CQ) {
        a.steps.push_back([plan = a.plan](ExecContext &ctx) { eval_cq(plan, ctx); });
        a.step_kinds.push_back(OpKind::CQ);
        return a;
    }
    for (const auto &c : a.plan.children) {
        a.steps.push_back([c](ExecContext &ctx) { interpret_node(c, ctx); });
        a.step_kinds.push_back(c.kind);
    }
    return a;
}

inline Artifact build_artifact(const IROp &node, const Orders &orders, const JitConfig &cfg) {
    check_config(cfg);
    if (cfg.backend == Backend::Pipeline)
        return compile_pipeline(node, orders, cfg.scope);
    return compile_irgen(node, orders);
}

} // namespace carapace
