// carapace: evaluate a Datalog program, run the benchmark suites, or emit a
// randomized test corpus.

#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "carapace/bench.hpp"
#include "carapace/cli.hpp"
#include "carapace/corpus.hpp"

using namespace carapace;

namespace {

struct JitFlags {
    std::string backend, granularity, scope, sync, freshness, sort, presort;
};

void add_jit_flags(CLI::App &app, JitFlags &f) {
    app.add_option("--backend", f.backend, "irgen|pipeline|lambda-alias|quotes|bytecode");
    app.add_option("--granularity", f.granularity, "iteration|rule|cq");
    app.add_option("--scope", f.scope, "full|snippet");
    app.add_option("--sync", f.sync, "blocking|async");
    app.add_option("--freshness", f.freshness, "FLOAT|inf");
    app.add_option("--sort", f.sort, "card|sel|none");
    app.add_option("--presort", f.presort, "off|rules|facts-rules");
}

template <typename T, typename Parse>
void apply(const std::string &flag, const std::string &value, Parse parse, T &field, std::set<std::string> &given) {
    if (value.empty())
        return;
    auto v = parse(value);
    if (!v)
        throw ConfigError("invalid value '" + value + "' for --" + flag);
    field = *v;
    given.insert(flag);
}

/// Fills `jit` from the flags; returns the names of flags that were set.
std::set<std::string> apply_jit_flags(const JitFlags &f, JitConfig &jit) {
    std::set<std::string> given;
    apply("backend", f.backend, parse_backend, jit.backend, given);
    apply("granularity", f.granularity, parse_granularity, jit.granularity, given);
    apply("scope", f.scope, parse_scope, jit.scope, given);
    apply("sync", f.sync, parse_sync, jit.sync, given);
    apply("freshness", f.freshness, parse_freshness, jit.freshness, given);
    apply("sort", f.sort, parse_sort, jit.sort, given);
    apply("presort", f.presort, parse_presort, jit.presort, given);
    return given;
}

int run_bench(const std::string &suite, std::uint64_t seed, std::size_t warmup, std::size_t reps,
              const JitFlags &flags) {
    EngineOptions jit;
    jit.mode = EngineMode::Jit;
    apply_jit_flags(flags, jit.jit);
    check_config(jit.jit);
    std::vector<BenchConfig> configs{{"interp", {}}, {"jit", jit}};
    std::vector<std::string> suites = suite == "all" ? bench_suites() : std::vector<std::string>{suite};
    std::vector<BenchRow> rows;
    for (const auto &s : suites) {
        bench_source(s); // rejects unknown names
        auto r = bench(s, configs, seed, warmup, reps);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    std::cout << format_bench(rows);
    return exit_code::ok;
}

int run_gen_corpus(std::uint64_t seed, std::size_t count, const std::string &out) {
    namespace fs = std::filesystem;
    for (const auto &b : gen_corpus(seed, count)) {
        fs::path dir = fs::path(out) / b.name;
        fs::create_directories(dir / "facts");
        std::ofstream(dir / "program.dl", std::ios::binary) << b.program;
        for (const auto &[rel, text] : b.facts)
            std::ofstream(dir / "facts" / (rel + ".facts"), std::ios::binary) << text;
    }
    return exit_code::ok;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Adaptive bottom-up Datalog engine"};
    app.require_subcommand(0, 1);

    RunConfig cfg;
    std::string mode = "interp";
    JitFlags flags;
    app.add_option("--program", cfg.program, "Datalog program file");
    app.add_option("--facts", cfg.facts, "directory of <relation>.facts files");
    app.add_option("--out", cfg.out, "output directory for <relation>.csv");
    app.add_option("--mode", mode, "interp|jit");
    add_jit_flags(app, flags);
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--stats", cfg.stats, "write the stats report to FILE");

    auto *bench_cmd = app.add_subcommand("bench", "run a benchmark suite (interp vs jit)");
    std::string suite = "all";
    std::uint64_t bench_seed = 1;
    std::size_t warmup = 1, reps = 3;
    JitFlags bench_flags;
    bench_cmd->add_option("--suite", suite, "tc|tc-adversarial|points-to|ackermann|fibonacci|primes|equal|cba|all");
    bench_cmd->add_option("--seed", bench_seed, "fact generator seed");
    bench_cmd->add_option("--warmup", warmup, "untimed runs per configuration");
    bench_cmd->add_option("--reps", reps, "timed runs per configuration");
    add_jit_flags(*bench_cmd, bench_flags);

    auto *corpus_cmd = app.add_subcommand("gen-corpus", "write randomized program+facts bundles");
    std::uint64_t corpus_seed = 1;
    std::size_t count = 200;
    std::string corpus_out = "corpus";
    corpus_cmd->add_option("--seed", corpus_seed, "generator seed");
    corpus_cmd->add_option("--count", count, "number of bundles");
    corpus_cmd->add_option("--out", corpus_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? exit_code::ok : exit_code::diagnostics;
    }

    try {
        if (*bench_cmd)
            return run_bench(suite, bench_seed, warmup, reps, bench_flags);
        if (*corpus_cmd)
            return run_gen_corpus(corpus_seed, count, corpus_out);

        if (cfg.program.empty())
            throw ConfigError("--program is required");
        auto m = parse_mode(mode);
        if (!m)
            throw ConfigError("invalid value '" + mode + "' for --mode");
        cfg.mode = *m;
        cfg.jit_flags = apply_jit_flags(flags, cfg.jit);
    } catch (const std::invalid_argument &e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return exit_code::diagnostics;
    } catch (const std::exception &e) {
        std::cerr << e.what() << "\n";
        return exit_code::io;
    }
    return run(cfg);
}
