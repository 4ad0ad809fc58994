#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "carapace/fact_io.hpp"
#include "carapace/parser.hpp"
#include "carapace/precedence.hpp"
#include "carapace/printer.hpp"
#include "support.hpp"

using namespace carapace;

namespace {

bool has_kind(const std::vector<Diagnostic> &d, DiagnosticKind k, const std::string &rel) {
    return std::any_of(d.begin(), d.end(), [&](const Diagnostic &x) { return x.kind == k && x.relation == rel; });
}

// Rules compared through their printed form, so symbol ids may differ.
bool same_rules(const Program &a, const Program &b) {
    if (a.rules.size() != b.rules.size())
        return false;
    for (std::size_t i = 0; i < a.rules.size(); ++i)
        if (a.rules[i].id != b.rules[i].id ||
            print_rule(a.rules[i], *a.symbols) != print_rule(b.rules[i], *b.symbols))
            return false;
    return true;
}

std::map<std::string, std::set<std::string>> rendered_facts(const Program &p) {
    std::map<std::string, std::set<std::string>> out;
    for (const auto &[rel, facts] : p.edb_facts)
        for (const auto &t : facts)
            out[rel].insert(render_tuple(t, p.relations.at(rel).columns, *p.symbols));
    return out;
}

} // namespace

TEST(Parse, TransitiveClosureWithOneFact) {
    auto p = parse("path(x,y) :- edge(x,y).\npath(x,z) :- edge(x,y), path(y,z).\nedge(\"a\",\"b\").");
    EXPECT_EQ(p.rules.size(), 2u);
    ASSERT_EQ(p.edb_facts.size(), 1u);
    EXPECT_EQ(p.edb_facts.at("edge").size(), 1u);
    EXPECT_EQ(p.idb, std::set<std::string>{"path"});
    EXPECT_EQ(p.edb(), std::set<std::string>{"edge"});
}

TEST(Parse, RepeatedVariableMetadata) {
    auto p = parse("p(x) :- q(x,x).");
    auto m = rule_metadata(p.rules.at(0));
    ASSERT_EQ(m.atoms.size(), 1u);
    EXPECT_EQ(m.atoms[0].literal, 0u);
    ASSERT_EQ(m.atoms[0].repeated.size(), 1u);
    EXPECT_EQ(m.atoms[0].repeated[0], (std::vector<std::size_t>{0, 1}));
}

TEST(Parse, UnboundHeadVariableIsRejected) {
    try {
        parse("p(x,y) :- q(x).");
        FAIL() << "expected a validation error";
    } catch (const ValidationError &e) {
        EXPECT_TRUE(has_kind(e.diagnostics(), DiagnosticKind::RangeRestriction, "p"));
        EXPECT_NE(std::string(e.what()).find("y"), std::string::npos);
    }
}

TEST(Parse, SyntaxErrorCarriesPosition) {
    try {
        parse_unchecked("p(x) :- q(x).\nq(1) q(2).");
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 6u);
    }
}

TEST(Parse, ArityMismatchNamesRelation) {
    try {
        parse_unchecked("q(1, 2).\np(x) :- q(x).");
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_NE(e.message().find("q"), std::string::npos);
        EXPECT_NE(e.message().find("arity"), std::string::npos);
    }
}

TEST(Parse, FactsMustBeGround) { EXPECT_THROW(parse_unchecked("q(x)."), ParseError); }

TEST(Parse, CommentsStringsAndNegativeNumbers) {
    auto p = parse("// header\nq(\"a b\", -3). // trailing\nr(x, y) :- q(x, y), y < 0.\n");
    EXPECT_EQ(p.edb_facts.at("q").size(), 1u);
    const auto &t = *p.edb_facts.at("q").begin();
    EXPECT_EQ(p.symbols->resolve(t[0]), "a b");
    EXPECT_EQ(t[1], -3);
}

TEST(Parse, FactsOfRuleDefinedRelationMoveToSyntheticInput) {
    auto p = parse("fib(0, 0).\nfib(1, 1).\nfib(n, r) :- fib(m, r), n = m + 1, n < 5.");
    EXPECT_TRUE(p.is_idb("fib"));
    EXPECT_FALSE(p.edb_facts.count("fib"));
    ASSERT_TRUE(p.edb_facts.count("fib__edb"));
    EXPECT_EQ(p.edb_facts.at("fib__edb").size(), 2u);
    // EDB and IDB name sets are disjoint.
    for (const auto &r : p.edb())
        EXPECT_FALSE(p.is_idb(r));
}

TEST(Parse, TypeConflictIsReported) {
    auto d = validate(parse_unchecked("q(1).\nr(\"a\").\np(x) :- q(x), r(x)."));
    EXPECT_TRUE(std::any_of(d.begin(), d.end(), [](const auto &x) { return x.kind == DiagnosticKind::TypeConflict; }));
}

TEST(Validate, TransitiveClosureIsClean) { EXPECT_TRUE(validate(parse_unchecked(support::kTc)).empty()); }

TEST(Validate, RangeRestrictionViolation) {
    auto d = validate(parse_unchecked("p(x) :- q(y)."));
    EXPECT_TRUE(has_kind(d, DiagnosticKind::RangeRestriction, "p"));
}

TEST(Validate, UnorderableBuiltinIsNamed) {
    auto p = parse_unchecked("f(n,r) :- f(m,a), n = m, r = a.");
    const auto &body = p.rules.at(0).body;
    // Brute-force every order of the body: none binds n before `n = m`.
    std::vector<std::size_t> perm(body.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::size_t admissible_orders = 0;
    do {
        std::set<std::string> bound;
        bool ok = true;
        for (auto i : perm) {
            if (const auto *a = std::get_if<Atom>(&body[i])) {
                for (const auto &v : variables_of(a->terms))
                    bound.insert(v);
            } else {
                for (const auto &v : builtin_inputs(body[i]))
                    ok = ok && bound.count(v);
            }
        }
        admissible_orders += ok;
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(admissible_orders, 0u);

    auto d = validate(p);
    auto it = std::find_if(d.begin(), d.end(), [](const auto &x) { return x.kind == DiagnosticKind::UnorderableBuiltin; });
    ASSERT_NE(it, d.end());
    EXPECT_NE(it->message.find("n = m"), std::string::npos) << it->message;
}

TEST(Validate, BindingBuiltinBindsHeadVariable) {
    EXPECT_TRUE(validate(parse_unchecked("q(1).\np(y) :- q(x), y = x + 1.")).empty());
}

TEST(Validate, BodyNeedsARelationAtom) {
    auto d = validate(parse_unchecked("p(1) :- 1 < 2."));
    EXPECT_TRUE(has_kind(d, DiagnosticKind::NoRelationAtom, "p"));
}

TEST(Precedence, SingleRecursiveStratum) {
    auto g = build_precedence(parse(support::kTc));
    ASSERT_EQ(g.strata.size(), 1u);
    EXPECT_EQ(g.strata[0].relations, std::vector<std::string>{"path"});
    EXPECT_TRUE(g.strata[0].recursive);
    EXPECT_TRUE(g.nodes.count("edge"));
}

TEST(Precedence, MutualRecursionSharesAStratum) {
    auto g = build_precedence(parse("x(1).\na(v) :- b(v).\nb(v) :- a(v).\nb(v) :- x(v).\nc(v) :- a(v)."));
    ASSERT_EQ(g.strata.size(), 2u);
    EXPECT_EQ(g.strata[0].relations, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(g.strata[1].relations, std::vector<std::string>{"c"});
    EXPECT_FALSE(g.strata[1].recursive);
}

TEST(Precedence, IndependentRulesGetSingletonStrata) {
    auto g = build_precedence(parse("x(1).\na(v) :- x(v).\nb(v) :- x(v).\nc(v) :- x(v)."));
    ASSERT_EQ(g.strata.size(), 3u);
    std::set<std::string> seen;
    for (const auto &s : g.strata) {
        EXPECT_EQ(s.relations.size(), 1u);
        seen.insert(s.relations[0]);
    }
    EXPECT_EQ(seen, (std::set<std::string>{"a", "b", "c"}));
}

// Properties over the randomized corpus.

TEST(FrontendProperty, PrintParseRoundTrip) {
    for (const auto &b : gen_corpus(11, 120)) {
        auto p = load_bundle(b);
        auto text = print_program(p);
        auto q = parse(text);
        EXPECT_EQ(print_program(q), text) << b.name;
        EXPECT_TRUE(same_rules(p, q)) << b.name;
        EXPECT_EQ(rendered_facts(p), rendered_facts(q)) << b.name;
        EXPECT_EQ(p.idb, q.idb) << b.name;
        for (const auto &[rel, info] : p.relations) {
            ASSERT_TRUE(q.relations.count(rel));
            EXPECT_EQ(q.relations.at(rel).columns, info.columns);
        }
    }
}

TEST(FrontendProperty, StrataRespectDependencies) {
    for (const auto &b : gen_corpus(12, 120)) {
        auto p = load_bundle(b);
        auto g = build_precedence(p);
        std::set<std::string> placed;
        for (const auto &s : g.strata)
            for (const auto &r : s.relations)
                EXPECT_TRUE(placed.insert(r).second) << r << " in two strata";
        EXPECT_EQ(placed, p.idb);
        for (const auto &r : p.rules)
            for (const auto &l : r.body)
                if (const auto *a = std::get_if<Atom>(&l); a && p.is_idb(a->predicate)) {
                    EXPECT_GE(g.stratum_of(r.head.predicate), g.stratum_of(a->predicate)) << b.name;
                }
    }
}

TEST(FrontendProperty, HeadProjectionCoversHeadVariables) {
    for (const auto &b : gen_corpus(13, 120)) {
        auto p = load_bundle(b);
        for (const auto &r : p.rules) {
            auto m = rule_metadata(r);
            ASSERT_EQ(m.head.size(), r.head.arity());
            for (std::size_t i = 0; i < m.head.size(); ++i) {
                const auto &src = m.head[i];
                ASSERT_NE(src.kind, HeadSource::Kind::Unbound) << b.name;
                if (src.kind == HeadSource::Kind::AtomPosition) {
                    const auto &atom = std::get<Atom>(r.body.at(src.literal));
                    EXPECT_EQ(atom.terms.at(src.position), r.head.terms[i]);
                } else if (src.kind == HeadSource::Kind::Builtin) {
                    EXPECT_EQ(std::get<Binding>(r.body.at(src.literal)).target, var_name(r.head.terms[i]));
                }
            }
        }
    }
}
