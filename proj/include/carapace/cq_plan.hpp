#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "carapace/exec.hpp"
#include "carapace/ir.hpp"

namespace carapace {

// ---------------------------------------------------------------------------
// Physical form of a CQ: variables resolved to frame slots, literals in
// evaluation order. Shared by the interpreter and the pipeline backend.
// ---------------------------------------------------------------------------

struct Operand {
    bool constant = false;
    Value value = 0;
    std::uint32_t slot = 0;

    Value get(const Value *frame) const { return constant ? value : frame[slot]; }
};

struct AtomStep {
    std::string relation;
    View view = View::KnownDerived;
    Filters pushdown;
    std::vector<std::size_t> key_columns; // columns equal to already-bound variables
    std::vector<std::uint32_t> key_slots;
    std::vector<std::pair<std::size_t, std::uint32_t>> binds; // column -> fresh slot
};

struct CompareStep {
    CmpOp op = CmpOp::Eq;
    Operand lhs, rhs;
};

struct BindStep {
    ArithOp op = ArithOp::Add;
    Operand lhs, rhs;
    std::uint32_t target = 0;
    bool check_only = false; // target already bound: acts as an equality filter
};

struct PhysicalStep {
    enum class Kind : std::uint8_t { Atom, Compare, Bind } kind = Kind::Atom;
    std::size_t index = 0; // into the vector of that kind
};

struct PhysicalCQ {
    std::string head_relation;
    std::vector<Operand> head;
    std::vector<PhysicalStep> steps;
    std::vector<AtomStep> atoms;
    std::vector<CompareStep> compares;
    std::vector<BindStep> binds;
    std::size_t slot_count = 0;
};

inline bool compare(CmpOp op, Value a, Value b) {
    switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
    }
    return false;
}

/// Two's-complement wrap-around on overflow.
inline Value arith(ArithOp op, Value a, Value b) {
    auto ua = static_cast<std::uint64_t>(a), ub = static_cast<std::uint64_t>(b);
    switch (op) {
    case ArithOp::Add: return static_cast<Value>(ua + ub);
    case ArithOp::Sub: return static_cast<Value>(ua - ub);
    case ArithOp::Mul: return static_cast<Value>(ua * ub);
    }
    return 0;
}

inline PhysicalCQ prepare(const CQDescriptor &d) {
    PhysicalCQ pq;
    pq.head_relation = d.head.predicate;
    std::map<std::string, std::uint32_t> slots;
    auto slot_of = [&](const std::string &v) {
        auto [it, fresh] = slots.emplace(v, static_cast<std::uint32_t>(slots.size()));
        return it->second;
    };
    auto operand = [&](const Term &t) {
        Operand o;
        if (is_variable(t)) {
            o.slot = slots.at(var_name(t));
        } else {
            o.constant = true;
            o.value = std::get<Constant>(t).value;
        }
        return o;
    };

    for (auto li : d.permutation) {
        const auto &lit = d.literals[li];
        if (lit.is_atom()) {
            const auto &a = lit.atom();
            AtomStep s;
            s.relation = a.predicate;
            s.view = lit.view;
            s.pushdown = lit.pushdown;
            std::set<std::string> here;
            for (std::size_t c = 0; c < a.terms.size(); ++c) {
                if (!is_variable(a.terms[c]))
                    continue;
                const auto &v = var_name(a.terms[c]);
                if (here.count(v))
                    continue; // repeated occurrence, covered by the pushdown equality
                here.insert(v);
                if (auto it = slots.find(v); it != slots.end()) {
                    s.key_columns.push_back(c);
                    s.key_slots.push_back(it->second);
                } else {
                    s.binds.emplace_back(c, slot_of(v));
                }
            }
            pq.steps.push_back({PhysicalStep::Kind::Atom, pq.atoms.size()});
            pq.atoms.push_back(std::move(s));
        } else if (const auto *c = std::get_if<Comparison>(&lit.literal)) {
            pq.steps.push_back({PhysicalStep::Kind::Compare, pq.compares.size()});
            pq.compares.push_back({c->op, operand(c->lhs), operand(c->rhs)});
        } else {
            const auto &b = std::get<Binding>(lit.literal);
            BindStep s{b.op, operand(b.lhs), operand(b.rhs), 0, slots.count(b.target) != 0};
            s.target = slot_of(b.target);
            pq.steps.push_back({PhysicalStep::Kind::Bind, pq.binds.size()});
            pq.binds.push_back(s);
        }
    }
    for (const auto &t : d.head.terms)
        pq.head.push_back(operand(t));
    pq.slot_count = slots.size();
    return pq;
}

/// Per-execution state: hash indexes built over the current Known views.
/// Nothing here survives the call, so a plan never sees stale data.
struct CQFrame {
    RelationalLayer *store = nullptr;
    RelId head = 0;
    std::vector<JoinIndex> indexes;
    std::vector<Value> slots;
    std::vector<Value> key;
    std::vector<Value> out;
    std::uint64_t probes = 0;
    std::uint64_t inserted = 0;

    /// Returns false if some atom reads an empty view, in which case the CQ
    /// produces nothing and no index is built.
    bool open(const PhysicalCQ &pq, RelationalLayer &s) {
        store = &s;
        head = s.id(pq.head_relation);
        std::vector<RelId> rels;
        for (const auto &a : pq.atoms) {
            rels.push_back(s.id(a.relation));
            if (s.read(rels.back(), a.view).empty())
                return false;
        }
        indexes.resize(pq.atoms.size());
        for (std::size_t i = 0; i < pq.atoms.size(); ++i) {
            const auto &a = pq.atoms[i];
            const auto &filters = a.pushdown;
            if (filters.empty())
                indexes[i].build(s.read(rels[i], a.view), a.key_columns, [](auto) { return true; });
            else
                indexes[i].build(s.read(rels[i], a.view), a.key_columns,
                                 [&](std::span<const Value> row) { return filters.accepts(row.data()); });
        }
        slots.assign(pq.slot_count, 0);
        out.resize(pq.head.size());
        return true;
    }

    void emit(const std::vector<Operand> &head_terms) {
        for (std::size_t i = 0; i < head_terms.size(); ++i)
            out[i] = head_terms[i].get(slots.data());
        if (store->insert(head, View::NewDelta, out))
            ++inserted;
    }
};

/// Interpretive execution: walks the step list recursively.
inline void run_steps(const PhysicalCQ &pq, CQFrame &f, std::size_t k) {
    if (k == pq.steps.size()) {
        f.emit(pq.head);
        return;
    }
    const auto &step = pq.steps[k];
    Value *frame = f.slots.data();
    switch (step.kind) {
    case PhysicalStep::Kind::Atom: {
        const auto &a = pq.atoms[step.index];
        const auto &index = f.indexes[step.index];
        std::vector<Value> key(a.key_slots.size());
        for (std::size_t i = 0; i < key.size(); ++i)
            key[i] = frame[a.key_slots[i]];
        f.probes += (index.keyed() ? 1 : 0) + index.probe(key, [&](const Value *row) {
            for (const auto &[col, slot] : a.binds)
                frame[slot] = row[col];
            run_steps(pq, f, k + 1);
        });
        break;
    }
    case PhysicalStep::Kind::Compare: {
        const auto &c = pq.compares[step.index];
        if (compare(c.op, c.lhs.get(frame), c.rhs.get(frame)))
            run_steps(pq, f, k + 1);
        break;
    }
    case PhysicalStep::Kind::Bind: {
        const auto &b = pq.binds[step.index];
        Value v = arith(b.op, b.lhs.get(frame), b.rhs.get(frame));
        if (b.check_only) {
            if (frame[b.target] == v)
                run_steps(pq, f, k + 1);
        } else {
            frame[b.target] = v;
            run_steps(pq, f, k + 1);
        }
        break;
    }
    }
}

struct CQResult {
    std::uint64_t inserted = 0;
    std::uint64_t probes = 0;
};

inline CQResult execute_interpreted(const PhysicalCQ &pq, RelationalLayer &store) {
    CQFrame f;
    store.begin_cq();
    if (f.open(pq, store))
        run_steps(pq, f, 0);
    store.end_cq();
    return {f.inserted, f.probes};
}

// ---------------------------------------------------------------------------
// Stitched pipeline: the same steps composed once into a chain of closures
// from a fixed operator library. Closures hold plan data only; storage and
// indexes arrive through the frame at call time.
// ---------------------------------------------------------------------------

using Stage = std::function<void(CQFrame &)>;

namespace ops {

inline Stage insert_head(std::vector<Operand> head) {
    return [head = std::move(head)](CQFrame &f) { f.emit(head); };
}

inline Stage scan(std::size_t index, std::vector<std::pair<std::size_t, std::uint32_t>> binds, Stage next) {
    return [index, binds = std::move(binds), next = std::move(next)](CQFrame &f) {
        Value *frame = f.slots.data();
        f.probes += f.indexes[index].probe(std::span<const Value>{}, [&](const Value *row) {
            for (const auto &[col, slot] : binds)
                frame[slot] = row[col];
            next(f);
        });
    };
}

inline Stage hash_join(std::size_t index, std::vector<std::uint32_t> key_slots,
                       std::vector<std::pair<std::size_t, std::uint32_t>> binds, Stage next) {
    return [index, key_slots = std::move(key_slots), binds = std::move(binds), next = std::move(next)](CQFrame &f) {
        Value *frame = f.slots.data();
        Value key[8];
        std::vector<Value> big;
        Value *k = key;
        if (key_slots.size() > 8) {
            big.resize(key_slots.size());
            k = big.data();
        }
        for (std::size_t i = 0; i < key_slots.size(); ++i)
            k[i] = frame[key_slots[i]];
        f.probes += 1 + f.indexes[index].probe(std::span<const Value>(k, key_slots.size()), [&](const Value *row) {
            for (const auto &[col, slot] : binds)
                frame[slot] = row[col];
            next(f);
        });
    };
}

inline Stage filter(CompareStep c, Stage next) {
    return [c, next = std::move(next)](CQFrame &f) {
        const Value *frame = f.slots.data();
        if (compare(c.op, c.lhs.get(frame), c.rhs.get(frame)))
            next(f);
    };
}

inline Stage bind(BindStep b, Stage next) {
    if (b.check_only)
        return [b, next = std::move(next)](CQFrame &f) {
            const Value *frame = f.slots.data();
            if (frame[b.target] == arith(b.op, b.lhs.get(frame), b.rhs.get(frame)))
                next(f);
        };
    return [b, next = std::move(next)](CQFrame &f) {
        Value *frame = f.slots.data();
        frame[b.target] = arith(b.op, b.lhs.get(frame), b.rhs.get(frame));
        next(f);
    };
}

} // namespace ops

/// A CQ compiled to a closure chain. Copyable and free of storage state.
class CompiledCQ {
public:
    explicit CompiledCQ(PhysicalCQ pq) : pq_(std::make_shared<const PhysicalCQ>(std::move(pq))) {
        Stage s = ops::insert_head(pq_->head);
        for (std::size_t k = pq_->steps.size(); k-- > 0;) {
            const auto &step = pq_->steps[k];
            switch (step.kind) {
            case PhysicalStep::Kind::Atom: {
                const auto &a = pq_->atoms[step.index];
                s = a.key_slots.empty() ? ops::scan(step.index, a.binds, std::move(s))
                                        : ops::hash_join(step.index, a.key_slots, a.binds, std::move(s));
                break;
            }
            case PhysicalStep::Kind::Compare: s = ops::filter(pq_->compares[step.index], std::move(s)); break;
            case PhysicalStep::Kind::Bind: s = ops::bind(pq_->binds[step.index], std::move(s)); break;
            }
        }
        entry_ = std::move(s);
    }

    CQResult operator()(RelationalLayer &store) const {
        CQFrame f;
        store.begin_cq();
        if (f.open(*pq_, store))
            entry_(f);
        store.end_cq();
        return {f.inserted, f.probes};
    }

    const PhysicalCQ &plan() const { return *pq_; }

private:
    std::shared_ptr<const PhysicalCQ> pq_;
    Stage entry_;
};

} // namespace carapace
