#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "carapace/benchmarks_embedded.hpp"
#include "carapace/engine.hpp"

namespace carapace {

inline std::vector<std::string> bench_suites() {
    return {"tc", "tc-adversarial", "points-to", "ackermann", "fibonacci", "primes", "equal", "cba"};
}

inline std::string_view bench_source(const std::string &suite) {
    const auto &m = embedded::benchmark_sources();
    auto it = m.find(suite);
    if (it == m.end())
        throw std::invalid_argument("unknown benchmark suite " + suite);
    return it->second;
}

using FactMap = std::map<std::string, std::vector<Tuple>>;

/// Directed graph of `nodes / cluster` dense clusters. A small share of the
/// edges links a cluster to the next one inside groups of `group` clusters,
/// so reachability stays local and the closure stays desk-sized.
inline std::vector<Tuple> community_graph(std::size_t nodes, std::size_t edges, std::size_t cluster,
                                          std::uint64_t seed, std::size_t group = 3) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    const std::size_t clusters = nodes / cluster;
    std::set<Tuple> out;
    const std::size_t bridges = edges / 100;
    while (out.size() < edges) {
        const std::size_t c = pick(clusters);
        std::size_t u = c * cluster + pick(cluster), v = 0;
        if (out.size() < bridges) {
            if (c % group == group - 1 || c + 1 >= clusters)
                continue;
            v = (c + 1) * cluster + pick(cluster);
        } else {
            v = c * cluster + pick(cluster);
            if (u == v)
                continue;
        }
        out.insert({static_cast<Value>(u), static_cast<Value>(v)});
    }
    return {out.begin(), out.end()};
}

/// Seeded input facts for a suite at desk scale.
inline FactMap bench_facts(const std::string &suite, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<Value>(rng() % n); };
    FactMap f;
    if (suite == "tc" || suite == "tc-adversarial") {
        f["edge"] = community_graph(2000, 6000, 20, seed);
    } else if (suite == "points-to") {
        const std::size_t vars = 3000, objs = 600;
        for (std::size_t i = 0; i < objs; ++i)
            f["alloc"].push_back({pick(vars), static_cast<Value>(i)});
        for (std::size_t i = 0; i < vars; ++i)
            f["assign"].push_back({pick(vars), pick(vars)});
        for (std::size_t i = 0; i < vars / 6; ++i)
            f["load"].push_back({pick(vars), pick(vars)});
        for (std::size_t i = 0; i < vars / 6; ++i)
            f["store"].push_back({pick(vars), pick(vars)});
    } else if (suite == "ackermann") {
        for (Value n = 0; n <= 128; ++n)
            f["nat"].push_back({n});
    } else if (suite == "fibonacci") {
        f["limit"].push_back({90});
    } else if (suite == "primes") {
        const Value limit = 3000;
        f["limit"].push_back({limit});
        for (Value n = 2; n <= limit; ++n)
            f["num"].push_back({n});
    } else if (suite == "equal") {
        const std::size_t nodes = 240;
        for (std::size_t n = 0; n < nodes; ++n)
            f["node"].push_back({static_cast<Value>(n)});
        for (std::size_t i = 0; i < nodes / 2; ++i)
            f["same"].push_back({pick(nodes), pick(nodes)});
    } else if (suite == "cba") {
        const std::size_t labels = 600, vars = 24;
        for (std::size_t l = 0; l + 1 < labels; ++l) {
            f["succ"].push_back({static_cast<Value>(l), static_cast<Value>(l + 1)});
            if (l % 7 == 0)
                f["succ"].push_back({static_cast<Value>(l), pick(labels)});
        }
        std::set<Tuple> defs;
        for (std::size_t l = 0; l < labels; ++l) {
            defs.insert({static_cast<Value>(l), pick(vars)});
            f["use"].push_back({static_cast<Value>(l), pick(vars)});
        }
        f["def"].assign(defs.begin(), defs.end());
        for (std::size_t l = 0; l < labels; ++l)
            for (std::size_t v = 0; v < vars; ++v)
                if (!defs.count({static_cast<Value>(l), static_cast<Value>(v)}))
                    f["keeps"].push_back({static_cast<Value>(l), static_cast<Value>(v)});
    } else {
        throw std::invalid_argument("unknown benchmark suite " + suite);
    }
    return f;
}

/// The suite's program with its generated facts attached.
inline Program bench_program(const std::string &suite, std::uint64_t seed) {
    auto p = parse(bench_source(suite));
    for (auto &[rel, tuples] : bench_facts(suite, seed))
        p.edb_facts[rel].insert(tuples.begin(), tuples.end());
    return p;
}

struct BenchConfig {
    std::string name;
    EngineOptions options;
};

struct BenchRow {
    std::string suite;
    std::string config;
    double median_seconds = 0;
    double speedup = 1;
    std::size_t tuples = 0;
    std::uint64_t probes = 0;
    std::size_t replans = 0;
};

struct BenchRun {
    double seconds = 0;
    std::size_t tuples = 0;
    ExecStats stats;
};

/// One timed evaluation, store construction excluded.
inline BenchRun bench_once(const Program &p, const EngineOptions &opt) {
    MemoryStore store(p);
    const auto t0 = std::chrono::steady_clock::now();
    auto ev = solve(p, store, opt);
    BenchRun r;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto &rel : ev.program.idb)
        r.tuples += store.cardinality(store.id(rel), View::KnownDerived);
    r.stats = std::move(ev.stats);
    return r;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    if (v.empty())
        return 0;
    return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
}

/// Runs every configuration `reps` times after `warmup` untimed runs and
/// reports medians. Speedup is relative to the first configuration.
inline std::vector<BenchRow> bench(const std::string &suite, const std::vector<BenchConfig> &configs,
                                   std::uint64_t seed, std::size_t warmup = 1, std::size_t reps = 3) {
    const auto p = bench_program(suite, seed);
    std::vector<BenchRow> rows;
    for (const auto &c : configs) {
        for (std::size_t i = 0; i < warmup; ++i)
            bench_once(p, c.options);
        std::vector<double> times;
        BenchRow row{suite, c.name};
        for (std::size_t i = 0; i < std::max<std::size_t>(reps, 1); ++i) {
            auto r = bench_once(p, c.options);
            times.push_back(r.seconds);
            row.tuples = r.tuples;
            row.probes = r.stats.total_probes();
            row.replans = r.stats.replan_count();
        }
        row.median_seconds = median(times);
        rows.push_back(row);
    }
    for (auto &r : rows)
        r.speedup = r.median_seconds > 0 ? rows.front().median_seconds / r.median_seconds : 1.0;
    return rows;
}

inline std::string format_bench(const std::vector<BenchRow> &rows) {
    std::ostringstream os;
    os << std::left << std::setw(16) << "suite" << std::setw(22) << "config" << std::right << std::setw(12)
       << "median_s" << std::setw(10) << "speedup" << std::setw(10) << "tuples" << std::setw(14) << "probes"
       << std::setw(9) << "replans" << "\n";
    for (const auto &r : rows)
        os << std::left << std::setw(16) << r.suite << std::setw(22) << r.config << std::right << std::fixed
           << std::setprecision(4) << std::setw(12) << r.median_seconds << std::setprecision(2) << std::setw(10)
           << r.speedup << std::setw(10) << r.tuples << std::setw(14) << r.probes << std::setw(9) << r.replans
           << "\n";
    return os.str();
}

} // namespace carapace
