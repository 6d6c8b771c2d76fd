#include "doctest.h"

#include "dmtl/evaluation.hpp"
#include "dmtl/parser.hpp"
#include "grid_oracle.hpp"
#include "random_instances.hpp"

using namespace dmtl;

namespace {
Interval iv(const char* s) { return Interval::parse(s); }
FactStore store_of(const char* text) { return FactStore(parse_dataset(text)); }
IntervalList eval(const char* lit, const FactStore& s) { return apply_operator(parse_metric_atom(lit), s); }
IntervalList L(std::initializer_list<const char*> xs) {
    IntervalList l;
    for (auto x : xs) l.push_back(iv(x));
    return l;
}
}  // namespace

TEST_CASE("apply_operator examples") {
    CHECK(eval("BOXMINUS[0,7] NoSympt(james)", store_of("NoSympt(james)@[0,14]")) == L({"[7,14]"}));
    CHECK(eval("DIAMONDMINUS[1,2] Bday(t)", store_of("Bday(t)@[0,0]")) == L({"[1,2]"}));
    CHECK(eval("BOXPLUS[0,1] P(a)", store_of("P(a)@[3,5]")) == L({"[3,4]"}));
    CHECK(eval("Q(a) UNTIL[0,2] R(a)", store_of("Q(a)@[0,5]\nR(a)@[4,4]")) == L({"[2,4]"}));
    CHECK(eval("TOP", FactStore()) == L({"(-inf,+inf)"}));
    CHECK(eval("P(a)", FactStore()).empty());
    auto unb = eval("DIAMONDMINUS[0,+inf) P(a)", store_of("P(a)@[3,5]"));
    REQUIRE(unb.size() == 1);
    CHECK(unb[0].right().kind() == Bound::Kind::PosInf);
}

TEST_CASE("since and until boundary cases") {
    // A left-open range starting at 0 needs the left operand on a stretch before t.
    FactStore s = store_of("A@[0,4]\nB@[2,2]");
    CHECK(eval("A SINCE(0,1] B", s) == L({"(2,3]"}));
    CHECK(eval("A SINCE[0,1] B", s) == L({"[2,3]"}));
    CHECK(eval("A UNTIL(0,1] B", s) == L({"[1,2)"}));
    // No left operand: only the zero offset survives.
    FactStore t = store_of("B@[2,2]");
    CHECK(eval("A SINCE[0,1] B", t) == L({"[2,2]"}));
    CHECK(eval("A SINCE(0,1] B", t).empty());
    // Witness on an open segment: the gap is the open stretch after it.
    FactStore u = store_of("A@(1,3)\nB@(1,2)");
    auto r = eval("A SINCE(0,1] B", u);
    oracle::Grid g(Rational(1), Rational(-5), Rational(10));
    auto m = oracle::from_store(g, u);
    CHECK(oracle::agree(g, r, oracle::eval(parse_metric_atom("A SINCE(0,1] B"), m), g.kmin + 8, g.kmax - 8));
}

TEST_CASE("merge_intervals") {
    CHECK(merge_intervals({L({"[0,5]", "[7,10]"}), L({"[4,8]"})}) == L({"[4,5]", "[7,8]"}));
    CHECK(merge_intervals({L({"[0,5]", "[7,10]"})}) == L({"[0,5]", "[7,10]"}));
    CHECK(merge_intervals({L({"[0,5]"}), L({})}).empty());
    CHECK(merge_intervals({L({"[0,2)", "(2,4]"}), L({"[1,3]"}), L({"(-inf,+inf)"})}) == L({"[1,2)", "(2,3]"}));
}

TEST_CASE("merge_intervals against pairwise intersection") {
    testgen::Rng rng(8);
    testgen::Params p;
    oracle::Grid g(Rational(1), Rational(-2), Rational(30));
    for (int round = 0; round < 300; ++round) {
        int n = testgen::pick(rng, 1, 4);
        std::vector<IntervalList> lists;
        for (int i = 0; i < n; ++i) {
            IntervalList l;
            int k = testgen::pick(rng, 0, 4);
            for (int j = 0; j < k; ++j) l.push_back(testgen::random_fact_interval(rng, p));
            lists.push_back(coalesce(l));
        }
        IntervalList brute = lists[0];
        for (std::size_t i = 1; i < lists.size(); ++i) {
            IntervalList next;
            for (const auto& a : brute)
                for (const auto& b : lists[i]) next.push_back(intersect(a, b));
            brute = coalesce(next);
        }
        CHECK(merge_intervals(lists) == brute);
    }
}

TEST_CASE("reverse_head") {
    auto d = reverse_head(parse_metric_atom("BOXMINUS[0,1] ExcHeat(d)"), iv("[2,3]"));
    CHECK(d.fact() == parse_fact("ExcHeat(d)@[1,3]"));
    CHECK(reverse_head(parse_metric_atom("P(a)"), iv("[0,5]")).fact() == parse_fact("P(a)@[0,5]"));
    CHECK(reverse_head(parse_metric_atom("BOXPLUS[1,1] Bday(t)"), iv("[0,0]")).fact() == parse_fact("Bday(t)@[1,1]"));
    CHECK(reverse_head(parse_metric_atom("BOTTOM"), iv("[0,0]")).bottom);
    CHECK(reverse_head(parse_metric_atom("BOXPLUS[1,2] BOXMINUS[0,1] P"), iv("[0,0]")).fact() == parse_fact("P@[0,2]"));
    CHECK_THROWS(reverse_head(parse_metric_atom("DIAMONDMINUS[0,1] P"), iv("[0,0]")));
}

TEST_CASE("evaluate_rule examples") {
    Program immune = parse_program("Immune(X) :- BOXMINUS[0,7] NoSympt(X) .");
    auto d = evaluate_rule(immune.rules[0], store_of("NoSympt(james)@[0,14]"));
    REQUIRE(d.size() == 1);
    CHECK(d[0].fact() == parse_fact("Immune(james)@[7,14]"));

    Program heat = parse_program(
        "BOXMINUS[0,1] ExcHeat(X) :- BOXMINUS[0,1] Temp24(X), DIAMONDMINUS[0,1] Temp41(X) .");
    auto e = evaluate_rule(heat.rules[0], store_of("Temp24(d)@[0,3]\nTemp41(d)@[2,2]"));
    REQUIRE(e.size() == 1);
    CHECK(e[0].fact() == parse_fact("ExcHeat(d)@[1,3]"));

    CHECK(evaluate_rule(heat.rules[0], store_of("Temp24(d)@[0,3]")).empty());
}

TEST_CASE("variables bound only by the left side of since range over the domain") {
    Program p = parse_program("R(X) :- Q(X) SINCE[0,1] P .");
    auto d = evaluate_rule(p.rules[0], store_of("P@[0,0]\nS(a)@[5,5]"));
    REQUIRE(d.size() == 1);
    CHECK(d[0].fact() == parse_fact("R(a)@[0,0]"));
}

namespace {
// Oracle comparison for one random instance; returns false on the first mismatch.
bool check_instance(const Program& prog, const std::vector<Fact>& facts, std::string& why) {
    FactStore store(facts);
    Rational d = oracle::instance_spacing(prog, facts);
    Rational B = oracle::operator_bound_sum(prog) + d;
    Rational margin = B * Rational(static_cast<long>(prog.rules.size()) + 2);
    oracle::Grid g(d, Rational(0) - margin * Rational(2), Rational(20) + margin * Rational(2));
    long from = g.rep(Rational(0) - margin), to = g.rep(Rational(20) + margin);
    oracle::Model m = oracle::from_store(g, store);
    std::set<std::string> consts = prog.constants();
    for (const auto& c : dataset_constants(facts)) consts.insert(c);
    for (const auto& r : ground(prog, consts)) {
        for (const auto& lit : r.body) {
            if (!oracle::agree(g, apply_operator(lit, store), oracle::eval(lit, m), from, to)) {
                why = "apply_operator " + lit.str();
                return false;
            }
        }
    }
    return true;
}
}  // namespace

TEST_CASE("apply_operator agrees with the grid oracle on random literals") {
    testgen::Rng rng(123);
    testgen::Params p;
    for (int round = 0; round < 200; ++round) {
        Program prog = testgen::random_program(rng, p);
        auto facts = testgen::random_facts(rng, p);
        std::string why;
        CHECK_MESSAGE(check_instance(prog, facts, why), (why + "\n" + prog.str() + dataset_str(facts)));
    }
}
