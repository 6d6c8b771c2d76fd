#include "doctest.h"

#include "dmtl/bench.hpp"
#include "dmtl/parser.hpp"

#include <json.hpp>

#include <set>

using namespace dmtl;

namespace {
std::string data(const char* name) { return std::string(DMTL_DATA_DIR) + "/" + name; }

GeneratorSpec small_spec() {
    GeneratorSpec s;
    s.predicates = {{"A", 1}, {"B", 2}, {"C", 0}};
    s.constant_pool = 7;
    s.fact_count = 1000;
    s.endpoint_range = Interval::closed(Rational(0), Rational(100));
    s.max_interval_length = Rational(5);
    s.granularity = Rational(1, 2);
    s.seed = 11;
    return s;
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }
}  // namespace

TEST_CASE("generate_dataset follows the spec") {
    GeneratorSpec s = small_spec();
    auto facts = generate_dataset(s);
    CHECK(facts.size() == 1000);
    std::string text = dataset_str(facts);
    CHECK(lines(text) == 1000);
    CHECK(text == dataset_str(generate_dataset(s)));
    s.seed = 12;
    CHECK(text != dataset_str(generate_dataset(s)));

    std::set<std::string> names{"A", "B", "C"};
    for (const auto& f : facts) {
        REQUIRE(f.interval.bounded());
        Rational l = f.interval.left().value(), r = f.interval.right().value();
        CHECK(l >= Rational(0));
        CHECK(r <= Rational(100));
        CHECK(r - l <= Rational(5));
        CHECK((l / Rational(1, 2)).is_integer());
        CHECK((r / Rational(1, 2)).is_integer());
        CHECK(names.count(f.atom.predicate));
        CHECK(f.atom.args.size() == (f.atom.predicate == "A" ? 1u : f.atom.predicate == "B" ? 2u : 0u));
    }
}

TEST_CASE("generated datasets round-trip through the parser and the store") {
    auto facts = generate_dataset(small_spec());
    FactStore direct(facts);
    FactStore reparsed(parse_dataset(dataset_str(facts)));
    std::string why;
    CHECK(direct.check_invariants(&why));
    CHECK(store_equal(direct, reparsed));
    for (const auto& f : facts) CHECK(direct.entails(f));
}

TEST_CASE("generator spec validation and JSON") {
    GeneratorSpec s = small_spec();
    s.fact_count = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = small_spec();
    s.endpoint_range = Interval::parse("[0,inf)");
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = small_spec();
    s.endpoint_range = Interval::closed(Rational(1, 3), Rational(2));
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    GeneratorSpec j = parse_generator_spec(R"({"predicates":[{"name":"P","arity":2}],"factCount":3,
        "endpointRange":"[0,10]","maxIntervalLength":"3/2","granularity":0.5,"seed":9})");
    CHECK(j.predicates.size() == 1);
    CHECK(j.predicates[0].arity == 2);
    CHECK(j.fact_count == 3);
    CHECK(j.max_interval_length == Rational(3, 2));
    CHECK(j.granularity == Rational(1, 2));
    CHECK(j.seed == 9);

    auto uni = parse_generator_spec(read_file(data("university_spec.json")));
    CHECK(generate_dataset(uni).size() == uni.fact_count);
}

TEST_CASE("generate_queries") {
    Program p = load_program(data("university.dmtl"));
    auto facts = generate_dataset(small_spec());
    auto q = generate_queries(p, facts, 10, 3);
    CHECK(q.size() == 10);
    CHECK(dataset_str(q) == dataset_str(generate_queries(p, facts, 10, 3)));
    std::set<std::string> preds;
    for (const auto& f : facts) preds.insert(f.atom.predicate);
    for (const auto& f : generate_queries(p, facts, 200, 4)) {
        CHECK(preds.count(f.atom.predicate));
        CHECK(f.atom.ground());
        CHECK(f.interval.left().value() >= Rational(0));
        CHECK(f.interval.right().value() <= Rational(100));
    }
    CHECK_THROWS_AS(generate_queries(p, {}, 1, 0), std::invalid_argument);
}

TEST_CASE("census examples") {
    Program bday = load_program(data("birthday.dmtl"));
    FactStore bd(load_dataset(data("birthday.dtf")));
    Census c = census(bday, bd, parse_dataset("Bday(t)@[2,2]\nBday(t)@[1/2,1/2]"));
    CHECK(c.total == 2);
    CHECK(c.count(FactType::T4) == 1);
    CHECK(c.count(FactType::T5) == 1);

    Program imm = load_program(data("immune.dmtl"));
    FactStore id(load_dataset(data("immune.dtf")));
    Census ci = census(imm, id, parse_dataset("Immune(james)@[7,10]\nImmune(james)@[1,2]\nImmune(james)@[8,14]"));
    CHECK(ci.count(FactType::T2) == 3);
    CHECK(ci.percent(FactType::T2) == doctest::Approx(100.0));

    auto facts = generate_dataset(small_spec());
    FactStore fs(facts);
    std::vector<Fact> subsumed(facts.begin(), facts.begin() + 20);
    Census all = census(imm, fs, subsumed);
    CHECK(all.percent(FactType::T1) == doctest::Approx(100.0));
}

TEST_CASE("taxonomy fixtures classify as listed") {
    Program p = load_program(data("taxonomy.dmtl"));
    FactStore d(load_dataset(data("taxonomy.dtf")));
    auto queries = load_dataset(data("taxonomy_queries.dtf"));
    std::istringstream expected(read_file(data("taxonomy_expected.txt")));
    PipelineOptions o;
    o.sequential = true;
    for (const auto& q : queries) {
        std::string type, answer;
        expected >> type >> answer;
        auto r = check_entailment(p, d, q, o);
        INFO(q.str());
        CHECK(to_string(r.type) == type);
        CHECK((r.answer ? "true" : "false") == answer);
    }
    Census c = census(p, d, queries);
    double sum = 0;
    for (FactType t : {FactType::T1, FactType::T2, FactType::T3, FactType::T4, FactType::T5}) {
        CHECK(c.count(t) == 1);
        sum += c.percent(t);
    }
    CHECK(sum == doctest::Approx(100.0));
}

TEST_CASE("bench report shapes") {
    Program p = load_program(data("taxonomy.dmtl"));
    FactStore d(load_dataset(data("taxonomy.dtf")));
    PipelineOptions o;
    o.sequential = true;
    BenchReport rep = run_bench(p, d, load_dataset(data("taxonomy_queries.dtf")), o);
    CHECK(rep.rows.size() == 5);
    CHECK(rep.rules == 4);
    auto j = nlohmann::json::parse(rep.json());
    CHECK(j["queries"] == 5);
    CHECK(j["undecided"] == 0);
    CHECK(j["types"]["T4"]["count"] == 1);
    CHECK(j["types"]["T4"]["meanRounds"] == doctest::Approx(2.0));
    CHECK(j["rows"].size() == 5);
    CHECK(j["rows"][4]["factType"] == "T5");
    std::string table = rep.table();
    CHECK(lines(table) == 7);
    CHECK(table.find("T5") != std::string::npos);
}
