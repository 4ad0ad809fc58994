#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "carapace/fact_io.hpp"
#include "carapace/parser.hpp"

namespace carapace {

struct CorpusLimits {
    std::size_t max_relations = 6;
    std::size_t max_arity = 3;
    std::size_t max_rules = 8;
    std::size_t max_facts = 40;
    Value domain = 6; // number constants are drawn from [0, domain)
};

/// One generated test case: program text plus TSV fact files.
struct Bundle {
    std::string name;
    std::string program;
    std::map<std::string, std::string> facts; // relation -> file contents

    friend bool operator==(const Bundle &, const Bundle &) = default;
};

namespace detail {

class CorpusGen {
public:
    CorpusGen(std::uint64_t seed, std::size_t index, const CorpusLimits &lim)
        : rng_(seed * 0x9e3779b97f4a7c15ULL + index * 0xbf58476d1ce4e5b9ULL + 1), lim_(lim), index_(index) {}

    Bundle make() {
        const bool recursive = index_ % 2 == 0;
        symbolic_ = index_ % 4 == 3;
        const std::size_t n_edb = 1 + pick(2);
        const std::size_t n_idb = 1 + pick(std::min<std::size_t>(3, lim_.max_relations - n_edb));
        for (std::size_t i = 0; i < n_edb; ++i)
            rels_.push_back({"e" + std::to_string(i), 1 + pick(lim_.max_arity), true});
        for (std::size_t i = 0; i < n_idb; ++i)
            rels_.push_back({"r" + std::to_string(i), 1 + pick(lim_.max_arity), false});

        std::ostringstream prog;
        for (const auto &r : rels_) {
            prog << ".decl " << r.name << "(";
            for (std::size_t c = 0; c < r.arity; ++c)
                prog << (c ? ", " : "") << "c" << c << ": " << (symbolic_ ? "symbol" : "number");
            prog << ")\n";
        }

        std::vector<std::string> rules;
        std::size_t budget = lim_.max_rules;
        for (std::size_t i = 0; i < n_idb; ++i) {
            const auto &head = rels_[n_edb + i];
            rules.push_back(rule(head, n_edb + i, false));
            --budget;
        }
        if (recursive) {
            auto target = n_edb + pick(n_idb);
            rules.push_back(rule(rels_[target], target, true));
            --budget;
        }
        for (std::size_t extra = pick(budget + 1); extra > 0; --extra) {
            auto target = n_edb + pick(n_idb);
            rules.push_back(rule(rels_[target], target, pick(3) == 0));
        }
        for (const auto &r : rules)
            prog << r << "\n";

        Bundle b;
        b.name = "bundle_" + std::to_string(index_);
        b.program = prog.str();
        std::size_t facts_left = lim_.max_facts;
        for (std::size_t i = 0; i < n_edb; ++i) {
            std::size_t n = pick(std::min<std::size_t>(facts_left, 16) + 1);
            facts_left -= n;
            std::ostringstream f;
            for (std::size_t k = 0; k < n; ++k) {
                for (std::size_t c = 0; c < rels_[i].arity; ++c)
                    f << (c ? "\t" : "") << constant_text(false);
                f << "\n";
            }
            b.facts[rels_[i].name] = f.str();
        }
        return b;
    }

private:
    struct Rel {
        std::string name;
        std::size_t arity;
        bool edb;
    };

    std::size_t pick(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng_() % n); }

    std::string constant_text(bool quoted) {
        auto v = pick(static_cast<std::size_t>(lim_.domain));
        if (!symbolic_)
            return std::to_string(v);
        return quoted ? "\"s" + std::to_string(v) + "\"" : "s" + std::to_string(v);
    }

    /// A rule for `head`. Body atoms come from EDB relations and IDB
    /// relations defined earlier; `self` adds an atom of the head relation.
    std::string rule(const Rel &head, std::size_t head_index, bool self) {
        if (self && head.arity >= 2 && pick(2) == 0)
            if (auto chain = chain_rule(head))
                return *chain;
        static const char *vars[] = {"a", "b", "c", "d", "e"};
        std::vector<std::size_t> sources;
        for (std::size_t i = 0; i < rels_.size(); ++i)
            if (rels_[i].edb || i < head_index)
                sources.push_back(i);
        std::size_t n_atoms = 1 + pick(3);
        std::vector<std::size_t> chosen;
        for (std::size_t k = 0; k < n_atoms; ++k)
            chosen.push_back(sources[pick(sources.size())]);
        if (self)
            chosen.insert(chosen.begin() + static_cast<std::ptrdiff_t>(pick(chosen.size() + 1)), head_index);

        std::vector<std::string> body, bound;
        for (auto ri : chosen) {
            const auto &r = rels_[ri];
            std::string atom = r.name + "(";
            for (std::size_t c = 0; c < r.arity; ++c) {
                std::string t;
                if (pick(8) == 0) {
                    t = constant_text(true);
                } else {
                    t = vars[pick(5)];
                    if (std::find(bound.begin(), bound.end(), t) == bound.end())
                        bound.push_back(t);
                }
                atom += (c ? ", " : "") + t;
            }
            body.push_back(atom + ")");
        }
        // Built-ins over bound variables.
        if (!bound.empty() && pick(3) == 0) {
            static const char *cmps[] = {"<", "<=", ">", ">=", "!=", "="};
            const char *op = symbolic_ ? (pick(2) ? "!=" : "=") : cmps[pick(6)];
            body.push_back(bound[pick(bound.size())] + " " + op + " " +
                           (pick(2) ? bound[pick(bound.size())] : constant_text(true)));
        }
        if (!symbolic_ && !bound.empty() && pick(3) == 0) {
            static const char *ariths[] = {"+", "-", "*"};
            std::string target = "z";
            body.push_back(target + " = " + bound[pick(bound.size())] + " " + ariths[pick(3)] + " " +
                           (pick(2) ? bound[pick(bound.size())] : constant_text(true)));
            body.push_back(target + " < 8");
            body.push_back(target + " > -8");
            bound.push_back(target);
        }
        std::string h = head.name + "(";
        for (std::size_t c = 0; c < head.arity; ++c) {
            std::string t = bound.empty() || pick(10) == 0 ? constant_text(true) : bound[pick(bound.size())];
            h += (c ? ", " : "") + t;
        }
        h += ")";
        std::string out = h + " :- ";
        for (std::size_t i = 0; i < body.size(); ++i)
            out += (i ? ", " : "") + body[i];
        return out + ".";
    }

    /// `h(a, d, ..) :- h(a, b, ..), e(b, d, ..).` over some binary-or-wider
    /// EDB relation: a transitive-closure step.
    std::optional<std::string> chain_rule(const Rel &head) {
        std::vector<const Rel *> edges;
        for (const auto &r : rels_)
            if (r.edb && r.arity >= 2)
                edges.push_back(&r);
        if (edges.empty())
            return std::nullopt;
        const Rel &e = *edges[pick(edges.size())];
        static const char *rest[] = {"c", "f"};
        std::string h = head.name + "(a, d", rec = head.name + "(a, b", step = e.name + "(b, d";
        for (std::size_t c = 2; c < head.arity; ++c) {
            h += std::string(", ") + rest[c - 2];
            rec += std::string(", ") + rest[c - 2];
        }
        for (std::size_t c = 2; c < e.arity; ++c)
            step += pick(3) == 0 ? ", " + constant_text(true) : ", g" + std::to_string(c);
        return h + ") :- " + rec + "), " + step + ").";
    }

    std::mt19937_64 rng_;
    CorpusLimits lim_;
    std::size_t index_;
    bool symbolic_ = false;
    std::vector<Rel> rels_;
};

} // namespace detail

/// Deterministic bundle `index` of the corpus for `seed`. Even indices always
/// contain a recursive rule.
inline Bundle generate_bundle(std::uint64_t seed, std::size_t index, const CorpusLimits &lim = {}) {
    return detail::CorpusGen(seed, index, lim).make();
}

inline std::vector<Bundle> gen_corpus(std::uint64_t seed, std::size_t count, const CorpusLimits &lim = {}) {
    std::vector<Bundle> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(generate_bundle(seed, i, lim));
    return out;
}

/// Parses and validates a bundle and attaches its facts.
inline Program load_bundle(const Bundle &b) {
    auto p = parse(b.program);
    for (const auto &[rel, text] : b.facts) {
        std::istringstream in(text);
        for (auto &t : read_facts(in, p.relations.at(rel).columns, *p.symbols, rel + ".facts"))
            p.edb_facts[rel].insert(std::move(t));
    }
    return p;
}

} // namespace carapace
