#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "carapace/ir.hpp"
#include "carapace/storage.hpp"

namespace carapace {

struct IterationRecord {
    std::size_t stratum = 0;
    std::size_t iteration = 0; // global, 1-based
    std::map<std::string, std::size_t> derived;
};

struct ReplanEvent {
    NodeId node = 0;
    std::size_t iteration = 0;
    std::uint64_t generation = 0;
    bool adopted = false;
    CardinalitySnapshot snapshot;
};

struct NodeStats {
    std::uint64_t join_probes = 0;
    std::uint64_t evaluations = 0;
    std::size_t replans = 0;
    std::vector<std::uint64_t> adopted_generations;
};

struct ExecStats {
    /// Number of swap_and_clear safe points executed.
    std::size_t iterations = 0;
    std::map<std::size_t, std::size_t> stratum_iterations;
    std::map<std::size_t, std::size_t> loop_iterations;
    std::map<std::size_t, double> stratum_seconds;
    double total_seconds = 0;

    std::vector<IterationRecord> cardinality_log;
    std::vector<ReplanEvent> replans;
    std::size_t snippet_refreshes = 0;
    std::size_t discarded_artifacts = 0;
    std::size_t failed_compilations = 0;

    std::uint64_t interpreted_cqs = 0;
    std::uint64_t compiled_cqs = 0;
    std::uint64_t inserted = 0;
    std::map<NodeId, NodeStats> nodes;

    std::size_t replan_count() const { return replans.size(); }

    std::uint64_t total_probes() const {
        std::uint64_t n = 0;
        for (const auto &[id, s] : nodes)
            n += s.join_probes;
        return n;
    }
};

struct ExecContext;

/// Intercepts nodes during interpretation. Returning true means the hook
/// executed the node itself.
class NodeHook {
public:
    virtual ~NodeHook() = default;
    virtual bool on_node(const IROp &node, ExecContext &ctx) = 0;
};

struct ExecContext {
    explicit ExecContext(RelationalLayer &s, NodeHook *h = nullptr) : store(s), hook(h) {}

    RelationalLayer &store;
    NodeHook *hook = nullptr;
    ExecStats stats;

    std::vector<RelId> ids(const std::vector<std::string> &names) const {
        std::vector<RelId> out;
        out.reserve(names.size());
        for (const auto &n : names)
            out.push_back(store.id(n));
        return out;
    }
};

} // namespace carapace
