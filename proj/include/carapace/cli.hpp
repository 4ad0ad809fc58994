#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "carapace/engine.hpp"
#include "carapace/fact_io.hpp"
#include "carapace/log.hpp"

namespace carapace {

struct RunConfig {
    std::string program;
    std::string facts;
    std::string out = ".";
    EngineMode mode = EngineMode::Interp;
    JitConfig jit;
    std::uint64_t seed = 0;
    std::string stats;
    /// Names of JIT-only flags given explicitly (rejected in interp mode).
    std::set<std::string> jit_flags;

    friend bool operator==(const RunConfig &a, const RunConfig &b) {
        auto key = [](const RunConfig &c) {
            return std::tuple(c.program, c.facts, c.out, c.mode, c.jit.granularity, c.jit.backend, c.jit.sync,
                              c.jit.scope, format_freshness(c.jit.freshness), c.jit.sort, c.jit.presort, c.seed,
                              c.stats);
        };
        return key(a) == key(b);
    }
};

inline std::string_view to_string(EngineMode m) { return m == EngineMode::Interp ? "interp" : "jit"; }

namespace detail {

template <typename E>
std::optional<E> enum_from(std::string_view s, std::initializer_list<E> all) {
    for (auto e : all)
        if (to_string(e) == s)
            return e;
    return std::nullopt;
}

} // namespace detail

inline std::optional<EngineMode> parse_mode(std::string_view s) {
    return detail::enum_from(s, {EngineMode::Interp, EngineMode::Jit});
}
inline std::optional<Backend> parse_backend(std::string_view s) {
    if (s == "lambda-alias")
        return Backend::Pipeline;
    return detail::enum_from(s, {Backend::IRGen, Backend::Pipeline, Backend::Quotes, Backend::Bytecode});
}
inline std::optional<Granularity> parse_granularity(std::string_view s) {
    return detail::enum_from(s, {Granularity::Iteration, Granularity::Rule, Granularity::CQ});
}
inline std::optional<Scope> parse_scope(std::string_view s) { return detail::enum_from(s, {Scope::Full, Scope::Snippet}); }
inline std::optional<SyncMode> parse_sync(std::string_view s) {
    return detail::enum_from(s, {SyncMode::Blocking, SyncMode::Async});
}
inline std::optional<SortPolicy> parse_sort(std::string_view s) {
    return detail::enum_from(s, {SortPolicy::CardinalityThenSelectivity, SortPolicy::SelectivityThenCardinality,
                                 SortPolicy::None});
}
inline std::optional<Presort> parse_presort(std::string_view s) {
    return detail::enum_from(s, {Presort::Off, Presort::RulesOnly, Presort::FactsAndRules});
}

inline void check_run_config(const RunConfig &c) {
    if (c.mode == EngineMode::Interp && !c.jit_flags.empty())
        throw ConfigError("--" + *c.jit_flags.begin() + " requires --mode jit");
    if (c.mode == EngineMode::Jit)
        check_config(c.jit);
}

// ---------------------------------------------------------------------------
// Stats report
// ---------------------------------------------------------------------------

inline std::string config_echo(const RunConfig &c) {
    std::ostringstream os;
    os << "[config]\n";
    os << "program = " << c.program << "\n";
    os << "facts = " << c.facts << "\n";
    os << "out = " << c.out << "\n";
    os << "mode = " << to_string(c.mode) << "\n";
    if (c.mode == EngineMode::Jit) {
        os << "backend = " << to_string(c.jit.backend) << "\n";
        os << "granularity = " << to_string(c.jit.granularity) << "\n";
        os << "scope = " << to_string(c.jit.scope) << "\n";
        os << "sync = " << to_string(c.jit.sync) << "\n";
        os << "freshness = " << format_freshness(c.jit.freshness) << "\n";
        os << "sort = " << to_string(c.jit.sort) << "\n";
        os << "presort = " << to_string(c.jit.presort) << "\n";
    }
    os << "seed = " << c.seed << "\n";
    os << "stats = " << c.stats << "\n";
    return os.str();
}

/// Rebuilds a RunConfig from the [config] section of a stats report.
inline RunConfig parse_config_echo(const std::string &report) {
    RunConfig c;
    std::istringstream in(report);
    std::string line;
    bool inside = false;
    auto bad = [](const std::string &l) { return ConfigError("bad config line: " + l); };
    while (std::getline(in, line)) {
        if (line.starts_with("[")) {
            inside = line == "[config]";
            continue;
        }
        if (!inside || line.empty())
            continue;
        auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw bad(line);
        auto k = line.substr(0, eq), v = line.substr(eq + 3);
        auto need = [&](auto opt) {
            if (!opt)
                throw bad(line);
            return *opt;
        };
        if (k == "program") c.program = v;
        else if (k == "facts") c.facts = v;
        else if (k == "out") c.out = v;
        else if (k == "mode") c.mode = need(parse_mode(v));
        else if (k == "backend") c.jit.backend = need(parse_backend(v));
        else if (k == "granularity") c.jit.granularity = need(parse_granularity(v));
        else if (k == "scope") c.jit.scope = need(parse_scope(v));
        else if (k == "sync") c.jit.sync = need(parse_sync(v));
        else if (k == "freshness") c.jit.freshness = need(parse_freshness(v));
        else if (k == "sort") c.jit.sort = need(parse_sort(v));
        else if (k == "presort") c.jit.presort = need(parse_presort(v));
        else if (k == "seed") c.seed = std::stoull(v);
        else if (k == "stats") c.stats = v;
        else throw bad(line);
    }
    return c;
}

inline std::string format_snapshot(const CardinalitySnapshot &s) {
    std::string out;
    for (const auto &[k, n] : s.counts)
        out += (out.empty() ? "" : ",") + k.relation + "/" + to_string(k.view) + "=" + std::to_string(n);
    return out;
}

/// Structured-text report: [config], [summary], then one table per section.
/// Timing values are the only nondeterministic fields.
inline std::string format_stats(const RunConfig &cfg, const Evaluation &ev) {
    const auto &s = ev.stats;
    std::ostringstream os;
    os << config_echo(cfg) << "\n[summary]\n";
    os << std::fixed << std::setprecision(6);
    os << "total_seconds = " << s.total_seconds << "\n";
    os << "iterations = " << s.iterations << "\n";
    os << "replans = " << s.replan_count() << "\n";
    os << "join_probes = " << s.total_probes() << "\n";
    os << "inserted = " << s.inserted << "\n";
    os << "interpreted_cqs = " << s.interpreted_cqs << "\n";
    os << "compiled_cqs = " << s.compiled_cqs << "\n";
    os << "snippet_refreshes = " << s.snippet_refreshes << "\n";
    os << "discarded_artifacts = " << s.discarded_artifacts << "\n";
    os << "failed_compilations = " << s.failed_compilations << "\n";

    os << "\n[strata]\n# stratum\trelations\titerations\tloop_iterations\tseconds\n";
    for (std::size_t i = 0; i < ev.graph.strata.size(); ++i) {
        std::string rels;
        for (const auto &r : ev.graph.strata[i].relations)
            rels += (rels.empty() ? "" : ",") + r;
        auto get = [&](const auto &m) { auto it = m.find(i); return it == m.end() ? 0 : it->second; };
        auto secs = ev.stats.stratum_seconds.count(i) ? ev.stats.stratum_seconds.at(i) : 0.0;
        os << i << "\t" << rels << "\t" << get(s.stratum_iterations) << "\t" << get(s.loop_iterations) << "\t"
           << secs << "\n";
    }

    os << "\n[iterations]\n# iteration\tstratum\tderived\n";
    for (const auto &r : s.cardinality_log) {
        os << r.iteration << "\t" << r.stratum << "\t";
        bool first = true;
        for (const auto &[rel, n] : r.derived) {
            os << (first ? "" : ",") << rel << "=" << n;
            first = false;
        }
        os << "\n";
    }

    os << "\n[replans]\n# node\titeration\tgeneration\tadopted\tsnapshot\n";
    for (const auto &r : s.replans)
        os << r.node << "\t" << r.iteration << "\t" << r.generation << "\t" << (r.adopted ? "yes" : "no") << "\t"
           << format_snapshot(r.snapshot) << "\n";

    os << "\n[nodes]\n# node\tkind\trelation\tevaluations\treplans\tjoin_probes\tadopted_generations\n";
    for (const auto &[id, n] : s.nodes) {
        const auto *op = find_node(ev.plan, id);
        os << id << "\t" << (op ? to_string(op->kind) : "?") << "\t" << (op ? op->relation : "") << "\t"
           << n.evaluations << "\t" << n.replans << "\t" << n.join_probes << "\t";
        for (std::size_t i = 0; i < n.adopted_generations.size(); ++i)
            os << (i ? "," : "") << n.adopted_generations[i];
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int diagnostics = 1;
inline constexpr int io = 2;
} // namespace exit_code

inline std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Loads, evaluates and writes results. Errors are reported on `err`.
inline int run(const RunConfig &cfg, std::ostream &err = std::cerr) {
    try {
        check_run_config(cfg);
        auto p = parse(read_text_file(cfg.program));
        MemoryStore store(p);
        if (!cfg.facts.empty()) {
            if (!std::filesystem::is_directory(cfg.facts))
                throw IoError("facts directory " + cfg.facts + " does not exist");
            for (const auto &rel : load_fact_directory(p, store, cfg.facts))
                log().warn("no {}.facts in {}; {} is empty", rel, cfg.facts, rel);
        }
        EngineOptions opt;
        opt.mode = cfg.mode;
        opt.jit = cfg.jit;
        auto outputs = p.output_relations();
        opt.keep.insert(outputs.begin(), outputs.end());
        auto ev = solve(p, store, opt);

        std::filesystem::create_directories(cfg.out);
        for (const auto &rel : outputs) {
            auto id = store.id(rel);
            write_lines(std::filesystem::path(cfg.out) / (rel + ".csv"),
                        render_sorted(store.read(id, View::KnownDerived), p.relations.at(rel).columns, *p.symbols));
        }
        if (!cfg.stats.empty()) {
            std::ofstream out(cfg.stats);
            out << format_stats(cfg, ev);
            if (!out)
                throw IoError("cannot write " + cfg.stats);
        }
        return exit_code::ok;
    } catch (const ParseError &e) {
        err << cfg.program << ":" << e.what() << "\n";
        return exit_code::diagnostics;
    } catch (const ValidationError &e) {
        err << e.what() << "\n";
        return exit_code::diagnostics;
    } catch (const ConfigError &e) {
        err << e.what() << "\n";
        return exit_code::diagnostics;
    } catch (const IoError &e) {
        err << e.what() << "\n";
        return exit_code::io;
    } catch (const std::filesystem::filesystem_error &e) {
        err << e.what() << "\n";
        return exit_code::io;
    }
}

} // namespace carapace
