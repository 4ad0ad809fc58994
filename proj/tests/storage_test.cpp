#include <random>

#include <gtest/gtest.h>

#include "carapace/relops.hpp"
#include "support.hpp"

using namespace carapace;

namespace {

struct Fixture {
    MemoryStore store;
    RelId edge, path;
    Fixture() {
        edge = store.add_relation("edge", 2, true);
        path = store.add_relation("path", 2, false);
    }
};

std::set<Tuple> as_set(const TupleStream &s) { return {s.begin(), s.end()}; }

} // namespace

TEST(Insert, NewTupleLandsInBothNewViews) {
    Fixture f;
    Tuple t{1, 3};
    EXPECT_TRUE(f.store.insert(f.path, View::NewDelta, t));
    EXPECT_EQ(f.store.cardinality(f.path, View::NewDelta), 1u);
    EXPECT_EQ(f.store.cardinality(f.path, View::NewDerived), 1u);
    EXPECT_TRUE(f.store.contains(f.path, View::NewDerived, t));
}

TEST(Insert, DuplicateIsRejected) {
    Fixture f;
    Tuple t{1, 3};
    f.store.insert(f.path, View::NewDelta, t);
    EXPECT_FALSE(f.store.insert(f.path, View::NewDerived, t));
    EXPECT_EQ(f.store.cardinality(f.path, View::NewDelta), 1u);
}

TEST(Insert, KnownTupleIsNotNew) {
    Fixture f;
    Tuple t{1, 3};
    f.store.insert(f.path, View::NewDelta, t);
    RelId rels[] = {f.path};
    f.store.swap_and_clear(rels);
    EXPECT_FALSE(f.store.insert(f.path, View::NewDelta, t));
    EXPECT_EQ(f.store.cardinality(f.path, View::NewDelta), 0u);
}

TEST(Insert, RejectsKnownViewsAndInputRelations) {
    Fixture f;
    Tuple t{1, 2};
    EXPECT_THROW(f.store.insert(f.path, View::KnownDerived, t), std::logic_error);
    EXPECT_THROW(f.store.insert(f.edge, View::NewDelta, t), std::logic_error);
    Tuple wrong{1};
    EXPECT_THROW(f.store.insert(f.path, View::NewDelta, wrong), std::logic_error);
}

TEST(SwapAndClear, PromotesDelta) {
    Fixture f;
    Tuple t1{1, 2};
    f.store.insert(f.path, View::NewDelta, t1);
    RelId rels[] = {f.path};
    f.store.swap_and_clear(rels);
    EXPECT_EQ(sorted_tuples(f.store, f.path, View::KnownDelta), std::vector<Tuple>{t1});
    EXPECT_EQ(f.store.cardinality(f.path, View::NewDelta), 0u);
    EXPECT_EQ(f.store.cardinality(f.path, View::NewDerived), 1u); // mirrors KnownDerived
}

TEST(SwapAndClear, EmptyIterationEmptiesDelta) {
    Fixture f;
    Tuple t1{1, 2};
    f.store.insert(f.path, View::NewDelta, t1);
    RelId rels[] = {f.path};
    f.store.swap_and_clear(rels);
    f.store.swap_and_clear(rels);
    EXPECT_EQ(f.store.cardinality(f.path, View::KnownDelta), 0u);
    EXPECT_EQ(f.store.cardinality(f.path, View::KnownDerived), 1u);
}

TEST(SwapAndClear, DeltaHoldsOnlyPreviousIteration) {
    Fixture f;
    Tuple t1{1, 2}, t2{2, 3};
    RelId rels[] = {f.path};
    f.store.insert(f.path, View::NewDelta, t1);
    f.store.swap_and_clear(rels);
    f.store.insert(f.path, View::NewDelta, t2);
    f.store.swap_and_clear(rels);
    EXPECT_FALSE(f.store.contains(f.path, View::KnownDelta, t1));
    EXPECT_TRUE(f.store.contains(f.path, View::KnownDelta, t2));
    EXPECT_EQ(f.store.cardinality(f.path, View::KnownDerived), 2u);
}

TEST(Diff, EmptyDeltasTerminate) {
    Fixture f;
    RelId rels[] = {f.path};
    f.store.swap_and_clear(rels);
    EXPECT_FALSE(f.store.diff_nonempty(rels));
}

TEST(Diff, OneDeltaTupleContinues) {
    Fixture f;
    RelId rels[] = {f.path};
    Tuple t{4, 4};
    f.store.insert(f.path, View::NewDelta, t);
    f.store.swap_and_clear(rels);
    EXPECT_TRUE(f.store.diff_nonempty(rels));
}

TEST(Diff, FirstTcIterationIsProductive) {
    auto p = support::tc_chain();
    MemoryStore store(p);
    auto g = build_precedence(p);
    auto plan = lower_semi_naive(p, g);
    ExecContext ctx(store);
    interpret(plan.children.at(1), ctx); // EdbLoad, then the base-case IterationSeq
    RelId rels[] = {store.id("path")};
    EXPECT_TRUE(store.diff_nonempty(rels));
}

TEST(Select, ConstantFilter) {
    auto p = parse("edge(\"a\", \"b\").\nedge(\"b\", \"c\").");
    MemoryStore s(p);
    Filters f;
    f.constants.push_back({1, p.symbols->intern("b")});
    auto out = select(s, s.id("edge"), View::Edb, f);
    EXPECT_EQ(as_set(out), (std::set<Tuple>{{p.symbols->intern("a"), p.symbols->intern("b")}}));
}

TEST(Select, RepeatedVariableFilter) {
    auto p = parse("edge(\"a\", \"a\").\nedge(\"a\", \"b\").");
    MemoryStore s(p);
    Filters f;
    f.equalities.push_back({0, 1});
    auto a = p.symbols->intern("a");
    EXPECT_EQ(as_set(select(s, s.id("edge"), View::Edb, f)), (std::set<Tuple>{{a, a}}));
}

TEST(Select, NoFiltersIsWholeView) {
    auto p = parse("edge(1, 2).\nedge(2, 3).");
    MemoryStore s(p);
    EXPECT_EQ(select(s, s.id("edge"), View::Edb, {}).size(), 2u);
}

TEST(Join, MatchingPairsByNestedLoop) {
    auto p = parse("edge(\"a\", \"b\").\nedge(\"b\", \"c\").");
    MemoryStore s(p);
    auto rel = s.id("edge");
    auto left = select(s, rel, View::Edb, {});
    // Oracle: enumerate all pairs and keep those with l[1] == r[0].
    std::set<Tuple> expected;
    for (const auto &l : left)
        for (const auto &r : left)
            if (l[1] == r[0])
                expected.insert({l[0], l[1], r[0], r[1]});
    ASSERT_EQ(expected.size(), 1u);
    auto sym = [&](const char *x) { return p.symbols->intern(x); };
    EXPECT_EQ(*expected.begin(), (Tuple{sym("a"), sym("b"), sym("b"), sym("c")}));
    EXPECT_EQ(as_set(join(left, s, rel, View::Edb, {{1, 0}})), expected);
}

TEST(Join, EmptyLeft) {
    auto p = parse("edge(1, 2).");
    MemoryStore s(p);
    EXPECT_TRUE(join({}, s, s.id("edge"), View::Edb, {{1, 0}}).empty());
}

TEST(Join, NoKeysIsCrossProduct) {
    auto p = parse("edge(1, 2).\nedge(2, 3).\nedge(3, 4).\nnode(1).\nnode(2).");
    MemoryStore s(p);
    auto left = select(s, s.id("node"), View::Edb, {});
    EXPECT_EQ(join(left, s, s.id("edge"), View::Edb, {}).size(), 2u * 3u);
}

TEST(RelOps, ProjectUnionCardinality) {
    EXPECT_EQ(project({{1, 2, 3}}, {2, 0}), (TupleStream{{3, 1}}));
    EXPECT_EQ(as_set(union_all({{{1}}, {{2}}})), (std::set<Tuple>{{1}, {2}}));
    Fixture f;
    EXPECT_EQ(cardinality(f.store, f.path, View::KnownDerived), 0u);
}

TEST(QuadrantDiscipline, NewViewsAreUnreadableDuringCq) {
    Fixture f;
    f.store.set_quadrant_checks(true);
    f.store.begin_cq();
    EXPECT_THROW(f.store.read(f.path, View::NewDelta), std::logic_error);
    RelId rels[] = {f.path};
    EXPECT_THROW(f.store.swap_and_clear(rels), std::logic_error);
    f.store.end_cq();
    EXPECT_NO_THROW(f.store.swap_and_clear(rels));
}

// Properties

TEST(StorageProperty, TupleSetMatchesStdSet) {
    std::mt19937_64 rng(5);
    for (std::size_t arity : {0u, 1u, 2u, 3u}) {
        TupleSet ts(arity);
        std::set<Tuple> model;
        for (int i = 0; i < 3000; ++i) {
            Tuple t(arity);
            for (auto &v : t)
                v = static_cast<Value>(rng() % 20) - 10;
            EXPECT_EQ(ts.insert(t), model.insert(t).second);
            Tuple q(arity);
            for (auto &v : q)
                v = static_cast<Value>(rng() % 20) - 10;
            EXPECT_EQ(ts.contains(q), model.count(q) == 1);
        }
        EXPECT_EQ(ts.size(), model.size());
        auto all = ts.tuples();
        EXPECT_EQ(std::set<Tuple>(all.begin(), all.end()), model);
    }
}

TEST(StorageProperty, DuplicateFreedom) {
    Fixture f;
    Tuple t{7, 7};
    for (int i = 0; i < 50; ++i)
        f.store.insert(f.path, View::NewDelta, t);
    EXPECT_EQ(f.store.cardinality(f.path, View::NewDelta), 1u);
}

TEST(StorageProperty, JoinIndexMatchesScan) {
    std::mt19937_64 rng(9);
    TupleSet rows(3);
    for (int i = 0; i < 500; ++i) {
        Tuple t{static_cast<Value>(rng() % 8), static_cast<Value>(rng() % 8), static_cast<Value>(rng() % 8)};
        rows.insert(t);
    }
    JoinIndex idx;
    idx.build(rows, {0, 2}, [](auto row) { return row[1] != 3; });
    for (Value a = 0; a < 8; ++a)
        for (Value c = 0; c < 8; ++c) {
            std::set<Tuple> expected, got;
            for (auto r : rows)
                if (r[0] == a && r[2] == c && r[1] != 3)
                    expected.emplace(r.begin(), r.end());
            Value key[] = {a, c};
            idx.probe(key, [&](const Value *r) { got.insert({r[0], r[1], r[2]}); });
            EXPECT_EQ(got, expected);
        }
}

TEST(StorageProperty, DeltaSoundnessAndMonotonicity) {
    for (const auto &b : gen_corpus(31, 60)) {
        auto p = load_bundle(b);
        support::DeltaCheckingStore store(p);
        solve(p, store, support::keep_all(p));
        EXPECT_GT(store.checks, 0u);
        EXPECT_EQ(store.violations, 0u) << b.name;
    }
}
