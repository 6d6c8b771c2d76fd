#include "doctest.h"

#include "dmtl/materialisation.hpp"
#include "dmtl/parser.hpp"
#include "grid_oracle.hpp"
#include "random_instances.hpp"

using namespace dmtl;

namespace {
FactStore store_of(const char* text) { return FactStore(parse_dataset(text)); }
const char* kBirthday = "BOXPLUS[1,1] Bday(X) :- Bday(X) .";
}  // namespace

TEST_CASE("apply_rules examples") {
    Program immune = parse_program("Immune(X) :- BOXMINUS[0,7] NoSympt(X) .");
    FactStore out = apply_rules(immune, store_of("NoSympt(james)@[0,14]"));
    CHECK(out.entails(parse_fact("Immune(james)@[7,14]")));
    CHECK_FALSE(out.entails(parse_fact("Immune(james)@[6,14]")));

    FactStore in = store_of("P(a)@[0,1]");
    CHECK(store_equal(apply_rules(Program{}, in), in));

    Program bot = parse_program("BOTTOM :- P(a) .");
    CHECK(apply_rules(bot, in).inconsistent());
}

TEST_CASE("rules read the round input, not same-round derivations") {
    Program chain = parse_program("Q(X) :- P(X) .\nR(X) :- Q(X) .");
    FactStore one = apply_rules(chain, store_of("P(a)@[0,1]"));
    CHECK(one.entails(parse_fact("Q(a)@[0,1]")));
    CHECK(one.find(parse_fact("R(a)@[0,0]").atom) == nullptr);
}

TEST_CASE("materialise examples") {
    Program bday = parse_program(kBirthday);
    MaterialisationOptions o;
    o.target = parse_fact("Bday(t)@[2,2]");
    auto r = materialise(bday, store_of("Bday(t)@[0,0]"), o);
    CHECK(r.status == MatStatus::TargetEntailed);
    CHECK(r.rounds == 2);

    Program immune = parse_program("Immune(X) :- BOXMINUS[0,7] NoSympt(X) .");
    auto f = materialise(immune, store_of("NoSympt(james)@[0,14]"));
    CHECK(f.status == MatStatus::Fixpoint);
    CHECK(f.rounds == 2);
    CHECK(store_equal(apply_rules(immune, f.store), f.store));

    MaterialisationOptions lim;
    lim.max_rounds = 5;
    auto l = materialise(bday, store_of("Bday(t)@[0,0]"), lim);
    CHECK(l.status == MatStatus::RoundLimit);
    CHECK(l.rounds == 5);
    CHECK(l.store.entails(parse_fact("Bday(t)@[5,5]")));
    CHECK(l.round_coalescing.size() == 5);

    MaterialisationOptions already;
    already.target = parse_fact("Bday(t)@[0,0]");
    CHECK(materialise(bday, store_of("Bday(t)@[0,0]"), already).rounds == 0);

    Program bot = parse_program("BOTTOM :- BOXPLUS[1,1] P .");
    auto i = materialise(bot, store_of("P@[0,3]"));
    CHECK(i.status == MatStatus::Inconsistent);
    CHECK(i.rounds == 1);
}

TEST_CASE("horizon clipping") {
    Program bday = parse_program(kBirthday);
    MaterialisationOptions o;
    o.horizon = Interval::parse("[-3,3]");
    auto r = materialise(bday, store_of("Bday(t)@[0,0]"), o);
    CHECK(r.status == MatStatus::Fixpoint);
    CHECK(r.store.find(parse_fact("Bday(t)@[0,0]").atom)->size() == 4);
    CHECK_FALSE(r.store.entails(parse_fact("Bday(t)@[4,4]")));
}

TEST_CASE("target answers are stable under larger round limits") {
    Program bday = parse_program(kBirthday);
    for (std::size_t lim : {3u, 10u, 50u}) {
        MaterialisationOptions o;
        o.target = parse_fact("Bday(t)@[3,3]");
        o.max_rounds = lim;
        auto r = materialise(bday, store_of("Bday(t)@[0,0]"), o);
        CHECK(r.status == MatStatus::TargetEntailed);
        CHECK(r.rounds == 3);
    }
}

TEST_CASE("non-recursive materialisation equals the oracle least model") {
    testgen::Rng rng(77);
    testgen::Params p;
    p.max_rules = 4;
    for (int round = 0; round < 150; ++round) {
        Program prog = testgen::random_program(rng, p);
        auto facts = testgen::random_facts(rng, p);
        std::vector<FactStore> history;
        MaterialisationOptions o;
        o.max_rounds = 50;
        o.on_round = [&](std::size_t, const FactStore& s) { history.push_back(s); };
        FactStore start(facts);
        auto res = materialise(prog, start, o);
        REQUIRE(res.status == MatStatus::Fixpoint);
        // monotone growth across rounds
        FactStore prev = start;
        for (const auto& h : history) {
            prev.for_each([&](const RelationalAtom& a, const IntervalList& l) {
                for (const auto& iv : l) CHECK(h.entails(a, iv));
            });
            prev = h;
        }
        Rational d = oracle::instance_spacing(prog, facts);
        Rational margin = (oracle::operator_bound_sum(prog) + d) * Rational(static_cast<long>(prog.rules.size()) + 2);
        oracle::Grid g(d, Rational(0) - margin * Rational(2), Rational(20) + margin * Rational(2));
        long from = g.rep(Rational(0) - margin), to = g.rep(Rational(20) + margin);
        std::set<std::string> consts = prog.constants();
        for (const auto& c : dataset_constants(facts)) consts.insert(c);
        oracle::Model m = oracle::materialise(ground(prog, consts), oracle::from_store(g, start));
        for (const auto& [a, truth] : m.atoms) {
            const IntervalList* l = res.store.find(a);
            CHECK_MESSAGE(oracle::agree(g, l ? *l : IntervalList{}, truth, from, to), (a.str() + "\n" + prog.str() + dataset_str(facts)));
        }
        res.store.for_each([&](const RelationalAtom& a, const IntervalList&) { CHECK(m.atoms.count(a)); });
    }
}
