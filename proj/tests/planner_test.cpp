#include <gtest/gtest.h>

#include "carapace/interpreter.hpp"
#include "carapace/planner.hpp"
#include "support.hpp"

using namespace carapace;

namespace {

IROp semi_naive(const Program &p) { return lower_semi_naive(p, build_precedence(p)); }
IROp naive(const Program &p) { return lower_naive(p, build_precedence(p)); }

std::vector<const IROp *> cqs_of(const IROp &n) { return collect(n, OpKind::CQ); }

} // namespace

TEST(Rewrite, AliasIsInlinedAndRemoved) {
    auto p = parse("edge(1, 2).\nalias(x,y) :- edge(x,y).\np(x,z) :- alias(x,y), p(y,z).");
    auto r = rewrite(p);
    ASSERT_EQ(r.rules.size(), 1u);
    EXPECT_EQ(print_rule(r.rules[0], *r.symbols), "p(x, z) :- edge(x, y), p(y, z).");
    EXPECT_FALSE(r.is_idb("alias"));
    EXPECT_FALSE(r.relations.count("alias"));
}

TEST(Rewrite, AliasKeptWhenRequested) {
    auto p = parse("edge(1, 2).\nalias(x,y) :- edge(x,y).\np(x,z) :- alias(x,y), p(y,z).");
    auto r = rewrite(p, {"alias"});
    EXPECT_EQ(r.rules.size(), 2u);
    EXPECT_EQ(print_rule(r.rules[1], *r.symbols), "p(x, z) :- edge(x, y), p(y, z).");
}

TEST(Rewrite, ReorderedVariablesAreNotAnAlias) {
    auto p = parse("edge(1, 2).\nflip(y,x) :- edge(x,y).\np(x) :- flip(x,y).");
    EXPECT_EQ(rewrite(p).rules.size(), 2u);
}

TEST(Rewrite, ConstantBecomesScanFilter) {
    auto p = parse("q(\"a\", \"c\").\np(x) :- q(x, \"c\").");
    auto plan = semi_naive(rewrite(p));
    auto cqs = cqs_of(plan);
    ASSERT_EQ(cqs.size(), 1u);
    const auto &lit = cqs[0]->cq->literals.at(0);
    ASSERT_EQ(lit.pushdown.constants.size(), 1u);
    EXPECT_EQ(lit.pushdown.constants[0].column, 1u);
    EXPECT_EQ(lit.pushdown.constants[0].value, p.symbols->intern("c"));
}

TEST(Rewrite, RepeatedVariableBecomesEqualityFilter) {
    auto plan = semi_naive(parse("q(1, 1).\np(x) :- q(x, x)."));
    const auto &lit = cqs_of(plan).at(0)->cq->literals.at(0);
    ASSERT_EQ(lit.pushdown.equalities.size(), 1u);
    EXPECT_EQ(lit.pushdown.equalities[0], (ColumnEquality{0, 1}));
}

TEST(Rewrite, IdentityWithoutAliases) {
    auto p = parse(support::kTc);
    auto r = rewrite(p);
    ASSERT_EQ(r.rules.size(), p.rules.size());
    for (std::size_t i = 0; i < p.rules.size(); ++i)
        EXPECT_EQ(print_rule(r.rules[i], *r.symbols), print_rule(p.rules[i], *p.symbols));
}

TEST(LowerSemiNaive, TransitiveClosureShape) {
    auto plan = semi_naive(parse(support::kTc));
    auto loops = collect(plan, OpKind::DoWhile);
    ASSERT_EQ(loops.size(), 1u);
    EXPECT_EQ(loops[0]->relations, std::vector<std::string>{"path"});
    auto inner = collect(*loops[0], OpKind::RuleUnion);
    ASSERT_EQ(inner.size(), 1u);
    ASSERT_EQ(inner[0]->children.size(), 1u);
    const auto &d = *inner[0]->children[0].cq;
    EXPECT_EQ(d.delta_index, std::optional<std::size_t>(1));
    EXPECT_EQ(d.literals[1].view, View::KnownDelta);
    EXPECT_EQ(d.literals[0].view, View::Edb);
    // Base case outside the loop.
    EXPECT_EQ(cqs_of(plan).size(), 2u);
    const auto &base = *cqs_of(plan)[0]->cq;
    EXPECT_FALSE(base.delta_index);
    EXPECT_EQ(base.rule_id, 0u);
}

TEST(LowerSemiNaive, OneDeltaVersionPerRecursiveAtom) {
    auto plan = semi_naive(parse("e(1,2).\nr(x,y) :- e(x,y).\nr(x,z) :- r(x,y), r(y,z)."));
    auto loop = collect(plan, OpKind::DoWhile).at(0);
    auto unions = collect(*loop, OpKind::RuleUnion);
    ASSERT_EQ(unions.size(), 1u);
    ASSERT_EQ(unions[0]->children.size(), 2u);
    const auto &a = *unions[0]->children[0].cq;
    const auto &b = *unions[0]->children[1].cq;
    EXPECT_EQ(a.delta_index, std::optional<std::size_t>(0));
    EXPECT_EQ(a.literals[0].view, View::KnownDelta);
    EXPECT_EQ(a.literals[1].view, View::KnownDerived);
    EXPECT_EQ(b.delta_index, std::optional<std::size_t>(1));
    EXPECT_EQ(b.literals[0].view, View::KnownDerived);
    EXPECT_EQ(b.literals[1].view, View::KnownDelta);
}

TEST(LowerSemiNaive, NonRecursiveRuleHasNoLoop) {
    auto plan = semi_naive(parse("e(1).\np(x) :- e(x)."));
    EXPECT_TRUE(collect(plan, OpKind::DoWhile).empty());
    EXPECT_EQ(cqs_of(plan).size(), 1u);
}

TEST(LowerSemiNaive, GoldenPrint) {
    auto p = parse(support::kTc);
    EXPECT_EQ(print_ir(semi_naive(p), *p.symbols),
              "ProgramRoot\n"
              "  EdbLoad edge\n"
              "  IterationSeq\n"
              "    RuleUnion path rule=0\n"
              "      CQ path delta=none perm=[0] : edge(x, y)@edb\n"
              "    SwapClear path\n"
              "  DoWhile path\n"
              "    IterationSeq\n"
              "      RuleUnion path rule=1\n"
              "        CQ path delta=1 perm=[0,1] : edge(x, y)@edb path(y, z)@known-delta\n"
              "      SwapClear path\n");
}

TEST(LowerNaive, AllViewsFull) {
    auto plan = naive(parse(support::kTc));
    auto loop = collect(plan, OpKind::DoWhile).at(0);
    auto cqs = cqs_of(*loop);
    ASSERT_EQ(cqs.size(), 2u); // one per rule per iteration
    for (const auto *c : cqs) {
        EXPECT_FALSE(c->cq->delta_index);
        for (const auto &l : c->cq->literals)
            EXPECT_NE(l.view, View::KnownDelta);
    }
}

TEST(LowerNaive, NoDeltaVersions) {
    auto plan = naive(parse("e(1,2).\nr(x,y) :- e(x,y).\nr(x,z) :- r(x,y), r(y,z)."));
    auto loop = collect(plan, OpKind::DoWhile).at(0);
    std::size_t recursive = 0;
    for (const auto *u : collect(*loop, OpKind::RuleUnion))
        if (u->rule_id == 1) {
            ++recursive;
            EXPECT_EQ(u->children.size(), 1u);
        }
    EXPECT_EQ(recursive, 1u);
}

TEST(Lowering, BuiltinsMovedToEarliestAdmissibleSlot) {
    auto p = parse("e(1).\np(z) :- z = x + 1, e(x).");
    auto plan = semi_naive(p);
    const auto &d = *cqs_of(plan).at(0)->cq;
    EXPECT_EQ(d.permutation, (Permutation{1, 0}));
    EXPECT_TRUE(admissible(d, d.permutation));
}

// Properties over the corpus.

TEST(PlannerProperty, DeltaCoverage) {
    for (const auto &b : gen_corpus(21, 150)) {
        auto p = load_bundle(b);
        auto g = build_precedence(p);
        auto plan = lower_semi_naive(p, g);
        for (const auto *loop : collect(plan, OpKind::DoWhile)) {
            const auto &stratum = g.strata.at(loop->stratum);
            for (const auto *u : collect(*loop, OpKind::RuleUnion)) {
                const Rule &r = *p.rule_by_id(u->rule_id);
                std::multiset<std::size_t> expected, got;
                for (std::size_t i = 0; i < r.body.size(); ++i)
                    if (const auto *a = std::get_if<Atom>(&r.body[i]); a && stratum.contains(a->predicate))
                        expected.insert(i);
                for (const auto &c : u->children) {
                    ASSERT_TRUE(c.cq->delta_index);
                    got.insert(*c.cq->delta_index);
                    std::size_t deltas = 0;
                    for (const auto &l : c.cq->literals)
                        deltas += l.is_atom() && l.view == View::KnownDelta;
                    EXPECT_EQ(deltas, 1u);
                }
                EXPECT_EQ(got, expected) << b.name;
            }
        }
    }
}

TEST(PlannerProperty, InitialPermutationsAdmissibleAndTextualWhenPossible) {
    for (const auto &b : gen_corpus(22, 150)) {
        auto p = load_bundle(b);
        auto plan = lower_semi_naive(p, build_precedence(p));
        for (const auto *c : cqs_of(plan)) {
            const auto &d = *c->cq;
            EXPECT_TRUE(admissible(d, d.permutation)) << b.name;
            Permutation textual(d.literals.size());
            std::iota(textual.begin(), textual.end(), 0u);
            if (admissible(d, textual)) {
                EXPECT_EQ(d.permutation, textual) << b.name;
            }
            for (const auto &l : d.literals) {
                if (l.is_atom()) {
                    EXPECT_TRUE(p.relations.count(l.atom().predicate));
                }
            }
        }
    }
}

TEST(PlannerProperty, OneLoopPerRecursiveStratum) {
    for (const auto &b : gen_corpus(23, 150)) {
        auto p = load_bundle(b);
        auto g = build_precedence(p);
        auto plan = lower_semi_naive(p, g);
        std::size_t recursive = 0;
        for (const auto &s : g.strata)
            recursive += s.recursive;
        EXPECT_EQ(collect(plan, OpKind::DoWhile).size(), recursive) << b.name;
    }
}

TEST(PlannerProperty, SemiNaiveMatchesNaive) {
    for (const auto &b : gen_corpus(24, 150)) {
        auto p = load_bundle(b);
        EngineOptions n;
        n.naive = true;
        auto expected = support::to_relations(oracle::fixpoint(p));
        EXPECT_EQ(support::run(p), expected) << b.name << "\n" << b.program;
        EXPECT_EQ(support::run(p, n), expected) << b.name;
    }
}
