#pragma once

#include <map>
#include <set>
#include <string>

#include "carapace/corpus.hpp"
#include "carapace/engine.hpp"
#include "oracle.hpp"

namespace support {

inline const char *kTc = "path(x, y) :- edge(x, y).\n"
                         "path(x, z) :- edge(x, y), path(y, z).\n";

/// TC over the chain a -> b -> c -> d.
inline carapace::Program tc_chain() {
    return carapace::parse(std::string(kTc) + "edge(\"a\", \"b\").\nedge(\"b\", \"c\").\nedge(\"c\", \"d\").\n");
}

/// Options that keep every IDB relation through alias elimination, so the
/// result can be compared relation by relation.
inline carapace::EngineOptions keep_all(const carapace::Program &p, carapace::EngineOptions o = {}) {
    o.keep.insert(p.idb.begin(), p.idb.end());
    return o;
}

inline carapace::Relations run(const carapace::Program &p, carapace::EngineOptions o = {},
                               carapace::ExecStats *stats = nullptr) {
    return carapace::solve_in_memory(p, keep_all(p, std::move(o)), stats);
}

inline carapace::Relations to_relations(const oracle::Db &db) { return {db.begin(), db.end()}; }

/// Store that checks, at every swap, that the new KnownDelta is exactly
/// the set of facts KnownDerived gained. Quadrant checks are on.
class DeltaCheckingStore : public carapace::MemoryStore {
public:
    explicit DeltaCheckingStore(const carapace::Program &p) : MemoryStore(p) { set_quadrant_checks(true); }

    void swap_and_clear(std::span<const carapace::RelId> rels) override {
        std::map<carapace::RelId, carapace::TupleSet> before;
        for (auto r : rels)
            if (!is_edb(r))
                before.emplace(r, read(r, carapace::View::KnownDerived));
        MemoryStore::swap_and_clear(rels);
        for (auto &[r, prev] : before) {
            ++checks;
            const auto &now = read(r, carapace::View::KnownDerived);
            const auto &delta = read(r, carapace::View::KnownDelta);
            if (now.size() < prev.size())
                ++violations; // monotonicity
            std::size_t gained = 0;
            bool ok = true;
            for (auto t : now)
                if (!prev.contains(t)) {
                    ++gained;
                    ok = ok && delta.contains(t);
                }
            if (!ok || gained != delta.size())
                ++violations;
        }
    }

    std::size_t checks = 0;
    std::size_t violations = 0;
};

} // namespace support
