#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "carapace/ir.hpp"

namespace carapace {

enum class Granularity : std::uint8_t { Iteration, Rule, CQ };
/// Quotes and Bytecode are reserved names; requesting them is an error.
enum class Backend : std::uint8_t { IRGen, Pipeline, Quotes, Bytecode };
enum class SyncMode : std::uint8_t { Blocking, Async };
enum class Scope : std::uint8_t { Full, Snippet };
enum class SortPolicy : std::uint8_t { CardinalityThenSelectivity, SelectivityThenCardinality, None };
enum class Presort : std::uint8_t { Off, RulesOnly, FactsAndRules };

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kNeverStale = std::numeric_limits<double>::infinity();

struct JitConfig {
    Granularity granularity = Granularity::CQ;
    Backend backend = Backend::IRGen;
    SyncMode sync = SyncMode::Blocking;
    Scope scope = Scope::Full;
    double freshness = 0.25;
    SortPolicy sort = SortPolicy::CardinalityThenSelectivity;
    Presort presort = Presort::Off;

    /// Test hooks for the asynchronous worker.
    std::chrono::milliseconds worker_delay{0};
    std::function<bool(NodeId)> fail_compile;
};

inline OpKind target_kind(Granularity g) {
    switch (g) {
    case Granularity::Iteration: return OpKind::IterationSeq;
    case Granularity::Rule: return OpKind::RuleUnion;
    case Granularity::CQ: return OpKind::CQ;
    }
    return OpKind::CQ;
}

inline void check_config(const JitConfig &c) {
    if (c.backend == Backend::Quotes || c.backend == Backend::Bytecode)
        throw ConfigError(std::string("backend ") + (c.backend == Backend::Quotes ? "quotes" : "bytecode") +
                          " is unsupported on this build");
    if (c.scope == Scope::Snippet && c.backend != Backend::Pipeline)
        throw ConfigError("snippet scope requires the pipeline backend");
    if (std::isnan(c.freshness) || c.freshness < 0)
        throw ConfigError("freshness threshold must be a non-negative number or inf");
}

// Names used on the command line and in the stats report.

inline std::string_view to_string(Granularity g) {
    switch (g) {
    case Granularity::Iteration: return "iteration";
    case Granularity::Rule: return "rule";
    case Granularity::CQ: return "cq";
    }
    return "?";
}

inline std::string_view to_string(Backend b) {
    switch (b) {
    case Backend::IRGen: return "irgen";
    case Backend::Pipeline: return "pipeline";
    case Backend::Quotes: return "quotes";
    case Backend::Bytecode: return "bytecode";
    }
    return "?";
}

inline std::string_view to_string(SyncMode s) { return s == SyncMode::Blocking ? "blocking" : "async"; }
inline std::string_view to_string(Scope s) { return s == Scope::Full ? "full" : "snippet"; }

inline std::string_view to_string(SortPolicy p) {
    switch (p) {
    case SortPolicy::CardinalityThenSelectivity: return "card";
    case SortPolicy::SelectivityThenCardinality: return "sel";
    case SortPolicy::None: return "none";
    }
    return "?";
}

inline std::string_view to_string(Presort p) {
    switch (p) {
    case Presort::Off: return "off";
    case Presort::RulesOnly: return "rules";
    case Presort::FactsAndRules: return "facts-rules";
    }
    return "?";
}

inline std::string format_freshness(double theta) {
    if (std::isinf(theta))
        return "inf";
    std::string s = std::to_string(theta);
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.')
        s.pop_back();
    return s;
}

inline std::optional<double> parse_freshness(std::string_view s) {
    if (s == "inf")
        return kNeverStale;
    try {
        std::size_t used = 0;
        double v = std::stod(std::string(s), &used);
        if (used != s.size() || std::isnan(v) || v < 0)
            return std::nullopt;
        return v;
    } catch (const std::exception &) {
        return std::nullopt;
    }
}

} // namespace carapace
