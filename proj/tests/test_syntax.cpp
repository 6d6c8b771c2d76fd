#include "doctest.h"

#include "dmtl/parser.hpp"
#include "random_instances.hpp"

using namespace dmtl;

TEST_CASE("parse a box rule") {
    Program p = parse_program("Immune(X) :- BOXMINUS[0,7] NoSympt(X) .");
    REQUIRE(p.rules.size() == 1);
    const Rule& r = p.rules[0];
    CHECK(r.head.op() == Op::Rel);
    CHECK(r.head.atom().predicate == "Immune");
    CHECK(r.head.atom().args.size() == 1);
    REQUIRE(r.body.size() == 1);
    CHECK(r.body[0].op() == Op::BoxMinus);
    CHECK(r.body[0].range() == Interval::parse("[0,7]"));
    CHECK(r.body[0].sub().op() == Op::Rel);
}

TEST_CASE("box heads are accepted") {
    Program p = parse_program(
        "BOXMINUS[0,1] ExcHeat(X) :- BOXMINUS[0,1] Temp24(X), DIAMONDMINUS[0,1] Temp41(X) .");
    REQUIRE(p.rules.size() == 1);
    CHECK(p.rules[0].head.op() == Op::BoxMinus);
    CHECK(p.rules[0].head_predicate() == "ExcHeat");
}

TEST_CASE("rejected programs") {
    CHECK_THROWS_AS(parse_program("P(X) :- DIAMONDPLUS[0,1] Q(Y) ."), SyntaxError);
    CHECK_THROWS_AS(parse_program("DIAMONDMINUS[0,1] P(X) :- Q(X) ."), SyntaxError);
    CHECK_THROWS_AS(parse_program("P(X) SINCE[0,1] R(X) :- Q(X) ."), SyntaxError);
    CHECK_THROWS_AS(parse_program("TOP :- Q(a) ."), SyntaxError);
    CHECK_THROWS_AS(parse_program("P(X) :- BOXMINUS[-1,1] Q(X) ."), SyntaxError);
    CHECK_THROWS_AS(parse_program("P(X) :- BOXMINUS[2,1] Q(X) ."), SyntaxError);
    CHECK_THROWS_AS(parse_program("P(X) :- Q(X)"), SyntaxError);
    CHECK_THROWS_AS(parse_program("P(X) :- Q(X), Q(X,Y) ."), SyntaxError);
    CHECK_THROWS_AS(parse_program("P(X) :- Q(X) ; ."), SyntaxError);
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse_program("P(X) :- Q(X) .\nP(X) :- ? .");
        FAIL("expected an error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 9);
    }
}

TEST_CASE("since, until, constants, comments") {
    Program p = parse_program(
        "# comment line\n"
        "A :- B SINCE[1,2] C .   # trailing comment\n"
        "D(x1) :- (E UNTIL(0,+inf) F), TOP .\n"
        "BOTTOM :- BOXPLUS[0,1.5] G(12), DIAMONDMINUS(1/2,3) (H SINCE[0,0] I) .\n");
    REQUIRE(p.rules.size() == 3);
    CHECK(p.rules[0].body[0].op() == Op::Since);
    CHECK(p.rules[0].head.atom().args.empty());
    CHECK(p.rules[1].body[0].op() == Op::Until);
    CHECK(p.rules[1].body[0].range().right().infinite());
    CHECK(p.rules[1].body[1].op() == Op::Top);
    CHECK(p.rules[2].bottom_head());
    CHECK(p.rules[2].body[0].range().right().value() == Rational(3, 2));
    CHECK(p.rules[2].body[1].sub().op() == Op::Since);
}

TEST_CASE("parse_dataset") {
    auto facts = parse_dataset("NoSympt(james)@[0,14]\n\n# c\nBday(turing)@[0,0]\nP@(-inf,3)\n");
    REQUIRE(facts.size() == 3);
    CHECK(facts[0].atom.str() == "NoSympt(james)");
    CHECK(facts[0].interval == Interval::parse("[0,14]"));
    CHECK(facts[1].interval.punctual());
    CHECK(facts[2].atom.args.empty());
    CHECK_THROWS_AS(parse_dataset("P(X)@[0,1]"), SyntaxError);
    CHECK_THROWS_AS(parse_dataset("P(a)@[1,0]"), SyntaxError);
    CHECK_THROWS_AS(parse_dataset("P(a)@[0,1] extra"), SyntaxError);
    CHECK_THROWS_AS(parse_dataset("P(a)@[-inf,1]"), SyntaxError);
    try {
        parse_dataset("P(a)@[0,1]\nQ(b)@[0,1\n");
        FAIL("expected an error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("arity conflicts across program and data") {
    Program p = parse_program("P(X) :- Q(X) .");
    CHECK_NOTHROW(check_arities(p, parse_dataset("Q(a)@[0,1]")));
    CHECK_THROWS_AS(check_arities(p, parse_dataset("Q(a,b)@[0,1]")), SyntaxError);
}

TEST_CASE("ground") {
    Program one = parse_program("P(X) :- Q(X) .");
    CHECK(ground(one, {"a", "b"}).size() == 2);
    Program g = parse_program("P(a) :- Q(a) .");
    auto gg = ground(g, {"a", "b", "c"});
    REQUIRE(gg.size() == 1);
    CHECK(gg[0] == g.rules[0]);
    Program two = parse_program("P(X) :- Q(X,Y) .");
    auto r = ground(two, {"a", "b", "c"});
    CHECK(r.size() == 9);
    for (const auto& x : r) {
        CHECK(x.head.ground());
        CHECK(x.body[0].ground());
    }
}

namespace {
using testgen::pick;

MetricAtom random_ast(testgen::Rng& rng, int depth) {
    auto range = [&] {
        while (true) {
            Rational a(pick(rng, 0, 12), pick(rng, 1, 4));
            Bound right = pick(rng, 0, 5) == 0 ? Bound::pos_inf() : Bound(a + Rational(pick(rng, 0, 9), pick(rng, 1, 3)));
            Interval i = Interval::normalize(a, right, pick(rng, 0, 1), pick(rng, 0, 1));
            if (!i.is_empty()) return i;
        }
    };
    int c = depth <= 0 ? pick(rng, 0, 2) : pick(rng, 0, 8);
    switch (c) {
        case 0: return MetricAtom::top();
        case 1:
        case 2: {
            RelationalAtom a{std::string(1, static_cast<char>('A' + pick(rng, 0, 5))) + "p", {}};
            int n = pick(rng, 0, 3);
            for (int i = 0; i < n; ++i) {
                int k = pick(rng, 0, 3);
                if (k == 0) a.args.push_back(Term::variable("X" + std::to_string(pick(rng, 0, 2))));
                else if (k == 1) a.args.push_back(Term::constant(std::to_string(pick(rng, 0, 99))));
                else a.args.push_back(Term::constant(std::string(1, static_cast<char>('a' + pick(rng, 0, 3)))));
            }
            return MetricAtom::rel(a);
        }
        case 3: return MetricAtom::unary(Op::DiamondMinus, range(), random_ast(rng, depth - 1));
        case 4: return MetricAtom::unary(Op::DiamondPlus, range(), random_ast(rng, depth - 1));
        case 5: return MetricAtom::unary(Op::BoxMinus, range(), random_ast(rng, depth - 1));
        case 6: return MetricAtom::unary(Op::BoxPlus, range(), random_ast(rng, depth - 1));
        case 7: return MetricAtom::binary(Op::Since, range(), random_ast(rng, depth - 1), random_ast(rng, depth - 1));
        default: return MetricAtom::binary(Op::Until, range(), random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    }
}
}  // namespace

TEST_CASE("print then parse is the identity on random metric atoms") {
    testgen::Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        MetricAtom m = random_ast(rng, 4);
        std::string text = m.str();
        MetricAtom back = parse_metric_atom(text);
        CHECK_MESSAGE(back == m, text);
        CHECK(back.str() == text);
    }
}

TEST_CASE("print then parse is the identity on facts") {
    testgen::Rng rng(99);
    testgen::Params p;
    for (int i = 0; i < 100; ++i) {
        auto facts = testgen::random_facts(rng, p);
        CHECK(parse_dataset(dataset_str(facts)) == facts);
        CHECK(parse_fact(facts[0].str()) == facts[0]);
    }
    Fact f{RelationalAtom{"P", {}}, Interval::parse("(-inf,-3/2]")};
    CHECK(parse_fact(f.str()) == f);
}
