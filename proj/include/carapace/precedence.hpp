#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "carapace/ast.hpp"

namespace carapace {

struct Stratum {
    std::vector<std::string> relations; // sorted
    /// True when some rule of the stratum reads a relation of the same stratum.
    bool recursive = false;

    bool contains(const std::string &rel) const {
        return std::binary_search(relations.begin(), relations.end(), rel);
    }
};

/// Relation dependency graph (head -> body) condensed into strata of
/// mutually recursive IDB relations, dependencies first.
struct PrecedenceGraph {
    std::set<std::string> nodes;
    std::map<std::string, std::set<std::string>> edges;
    std::vector<Stratum> strata;

    std::size_t stratum_of(const std::string &rel) const {
        for (std::size_t i = 0; i < strata.size(); ++i)
            if (strata[i].contains(rel))
                return i;
        return strata.size();
    }
};

inline PrecedenceGraph build_precedence(const Program &p) {
    PrecedenceGraph g;
    for (const auto &[name, info] : p.relations)
        g.nodes.insert(name);
    for (const auto &r : p.rules)
        for (const auto &lit : r.body)
            if (const auto *a = std::get_if<Atom>(&lit))
                g.edges[r.head.predicate].insert(a->predicate);

    // Tarjan over IDB relations only; EDB relations are sources and never
    // belong to a stratum. SCCs come out dependencies-first.
    std::map<std::string, int> index, low;
    std::set<std::string> on_stack;
    std::vector<std::string> stack;
    int counter = 0;

    auto strongconnect = [&](auto &&self, const std::string &v) -> void {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto &w : g.edges[v]) {
            if (!p.is_idb(w))
                continue;
            if (!index.count(w)) {
                self(self, w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack.count(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            Stratum s;
            std::string w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                s.relations.push_back(w);
            } while (w != v);
            std::sort(s.relations.begin(), s.relations.end());
            for (const auto &rel : s.relations)
                for (const auto &dep : g.edges[rel])
                    if (s.contains(dep))
                        s.recursive = true;
            g.strata.push_back(std::move(s));
        }
    };
    for (const auto &rel : p.idb)
        if (!index.count(rel))
            strongconnect(strongconnect, rel);
    return g;
}

} // namespace carapace
