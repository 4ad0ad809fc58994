#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>

#include "carapace/interpreter.hpp"
#include "carapace/jit.hpp"
#include "carapace/parser.hpp"
#include "carapace/planner.hpp"
#include "carapace/precedence.hpp"

namespace carapace {

enum class EngineMode : std::uint8_t { Interp, Jit };

struct EngineOptions {
    EngineMode mode = EngineMode::Interp;
    JitConfig jit;
    /// Lower naively (the oracle) instead of semi-naively.
    bool naive = false;
    /// Relations that must survive alias elimination besides the outputs.
    std::set<std::string> keep;
};

/// Everything produced by one evaluation.
struct Evaluation {
    Program program; // after rewriting and pre-sorting
    PrecedenceGraph graph;
    IROp plan;
    ExecStats stats;
};

/// Builds the plan for `p`, which must validate. The store must already
/// hold the EDB facts (FactsAndRules pre-sorting reads their counts).
inline Evaluation plan_program(const Program &p, const EngineOptions &opt, const RelationalLayer &store) {
    if (auto diags = validate(p); !diags.empty())
        throw ValidationError(std::move(diags));
    Evaluation ev;
    ev.program = rewrite(p, opt.keep);
    if (opt.mode == EngineMode::Jit && opt.jit.presort != Presort::Off) {
        auto counts = edb_cardinalities(store);
        ev.program = presort(ev.program, &counts, opt.jit.presort);
    }
    ev.graph = build_precedence(ev.program);
    ev.plan = opt.naive ? lower_naive(ev.program, ev.graph) : lower_semi_naive(ev.program, ev.graph);
    return ev;
}

/// Evaluates `p` to its fixpoint over `store`.
inline Evaluation solve(const Program &p, RelationalLayer &store, const EngineOptions &opt = {}) {
    if (opt.mode == EngineMode::Jit)
        check_config(opt.jit);
    auto ev = plan_program(p, opt, store);
    std::unique_ptr<JitEngine> jit;
    if (opt.mode == EngineMode::Jit)
        jit = std::make_unique<JitEngine>(opt.jit, ev.plan);
    ExecContext ctx(store, jit.get());
    interpret(ev.plan, ctx);
    ev.stats = std::move(ctx.stats);
    return ev;
}

using Relations = std::map<std::string, std::set<Tuple>>;

/// Final contents of every IDB relation of the program.
inline Relations derived(const Program &p, const RelationalLayer &store) {
    Relations out;
    for (const auto &rel : p.idb) {
        auto id = store.find(rel);
        if (!id)
            continue;
        auto &set = out[rel];
        for (auto row : store.read(*id, View::KnownDerived))
            set.emplace(row.begin(), row.end());
    }
    return out;
}

/// Convenience: fresh in-memory store seeded with the program's inline facts.
inline Relations solve_in_memory(const Program &p, const EngineOptions &opt = {}, ExecStats *stats = nullptr) {
    MemoryStore store(p);
    auto ev = solve(p, store, opt);
    if (stats)
        *stats = std::move(ev.stats);
    return derived(p, store);
}

} // namespace carapace
