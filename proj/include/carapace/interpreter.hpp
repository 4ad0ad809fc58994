#pragma once

#include <chrono>

#include "carapace/cq_plan.hpp"
#include "carapace/exec.hpp"

namespace carapace {

/// Runs one CQ through the interpretive pipeline and records its counters.
/// Returns the number of genuinely new tuples.
inline std::uint64_t eval_cq(const IROp &node, ExecContext &ctx) {
    auto r = execute_interpreted(prepare(*node.cq), ctx.store);
    auto &ns = ctx.stats.nodes[node.id];
    ns.join_probes += r.probes;
    ++ns.evaluations;
    ++ctx.stats.interpreted_cqs;
    ctx.stats.inserted += r.inserted;
    return r.inserted;
}

inline std::uint64_t eval_cq(const CQDescriptor &d, ExecContext &ctx) {
    IROp node;
    node.kind = OpKind::CQ;
    node.cq = d;
    return eval_cq(node, ctx);
}

/// End-of-iteration safe point.
inline void swap_clear(const IROp &node, ExecContext &ctx) {
    auto ids = ctx.ids(node.relations);
    ctx.store.swap_and_clear(ids);
    auto &s = ctx.stats;
    ++s.iterations;
    ++s.stratum_iterations[node.stratum];
    IterationRecord rec{node.stratum, s.iterations, {}};
    for (std::size_t i = 0; i < ids.size(); ++i)
        rec.derived[node.relations[i]] = ctx.store.cardinality(ids[i], View::KnownDerived);
    s.cardinality_log.push_back(std::move(rec));
}

inline void interpret(const IROp &op, ExecContext &ctx);

/// Executes a node without offering it to the hook (children still are).
inline void interpret_children_of(const IROp &op, ExecContext &ctx, std::size_t from = 0) {
    for (std::size_t i = from; i < op.children.size(); ++i)
        interpret(op.children[i], ctx);
}

inline void interpret_node(const IROp &op, ExecContext &ctx) {
    switch (op.kind) {
    case OpKind::ProgramRoot: {
        const auto start = std::chrono::steady_clock::now();
        for (const auto &c : op.children) {
            const auto t0 = std::chrono::steady_clock::now();
            interpret(c, ctx);
            if (c.kind != OpKind::EdbLoad)
                ctx.stats.stratum_seconds[c.stratum] +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        ctx.stats.total_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        break;
    }
    case OpKind::EdbLoad: break; // facts are in the store before execution starts
    case OpKind::IterationSeq:
    case OpKind::RuleUnion: interpret_children_of(op, ctx); break;
    case OpKind::DoWhile: {
        auto watched = ctx.ids(op.relations);
        do {
            interpret(op.children.at(0), ctx);
            ++ctx.stats.loop_iterations[op.stratum];
        } while (ctx.store.diff_nonempty(watched));
        break;
    }
    case OpKind::CQ: eval_cq(op, ctx); break;
    case OpKind::SwapClear: swap_clear(op, ctx); break;
    }
}

/// Tree-walking evaluation. Safe points (before IterationSeq, RuleUnion and
/// CQ nodes) are offered to the context's hook first.
inline void interpret(const IROp &op, ExecContext &ctx) {
    if (ctx.hook && (op.kind == OpKind::IterationSeq || op.kind == OpKind::RuleUnion || op.kind == OpKind::CQ) &&
        ctx.hook->on_node(op, ctx))
        return;
    interpret_node(op, ctx);
}

} // namespace carapace
