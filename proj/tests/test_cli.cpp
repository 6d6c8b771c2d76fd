#include "doctest.h"

#include "dmtl/cli.hpp"
#include "dmtl/parser.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

using namespace dmtl;
using nlohmann::json;

namespace {
std::string data(const std::string& name) { return std::string(DMTL_DATA_DIR) + "/" + name; }
std::string golden(const std::string& name) { return std::string(DMTL_GOLDEN_DIR) + "/" + name; }

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Timings vary between runs, so every *Ms key is dropped before comparing.
json strip(const json& j) {
    if (j.is_object()) {
        json o = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            if (k.size() > 2 && k.compare(k.size() - 2, 2, "Ms") == 0) continue;
            o[k] = strip(it.value());
        }
        return o;
    }
    if (j.is_array()) {
        json a = json::array();
        for (const auto& x : j) a.push_back(strip(x));
        return a;
    }
    return j;
}

void check_golden(const std::vector<std::string>& args, const std::string& file) {
    Run r = run(args);
    INFO(r.err);
    REQUIRE(r.code == 0);
    CHECK(strip(json::parse(r.out)) == json::parse(read_file(golden(file))));
}
}  // namespace

TEST_CASE("check prints the answer") {
    Run r = run({"check", "-p", data("immune.dmtl"), "-d", data("immune.dtf"), "-f", "Immune(james)@[7,10]"});
    CHECK(r.code == 0);
    CHECK(r.out == "true\n");
    Run no = run({"check", "-p", data("immune.dmtl"), "-d", data("immune.dtf"), "-f", "Immune(james)@[6,10]"});
    CHECK(no.code == 0);
    CHECK(no.out == "false\n");
}

TEST_CASE("load and usage errors map to exit codes") {
    Run missing = run({"check", "-p", "no/such/file.dmtl", "-d", data("immune.dtf"), "-f", "Immune(james)@[7,10]"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("no/such/file.dmtl") != std::string::npos);

    std::string bad = "cli_bad_program.dmtl";
    {
        std::FILE* f = std::fopen(bad.c_str(), "w");
        REQUIRE(f);
        std::fputs("P(X) :- Q(X) .\nR(X) :- BOXMINUS[0,1 Q(X) .\n", f);
        std::fclose(f);
    }
    Run syntax = run({"analyze", "-p", bad});
    CHECK(syntax.code == 2);
    CHECK(syntax.err.find(bad + ":2:") != std::string::npos);
    std::remove(bad.c_str());

    Run query = run({"check", "-p", data("immune.dmtl"), "-d", data("immune.dtf"), "-f", "Immune(james)@["});
    CHECK(query.code == 2);

    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"check", "-p", data("immune.dmtl")}).code == 1);
    CHECK(run({"bench", "-p", data("immune.dmtl"), "-d", data("immune.dtf")}).code == 1);
    CHECK(run({"bench", "-p", data("immune.dmtl"), "-d", data("immune.dtf"), "-q", data("immune.dtf"), "--generate", "3"})
              .code == 1);
    CHECK(run({"consistency", "-p", data("birthday.dmtl"), "-d", data("birthday.dtf"), "--json", "--dot", "-"}).code ==
          1);

    Run help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("DIAMONDMINUS") != std::string::npos);
    CHECK(help.out.find("atom \"@\" interval") != std::string::npos);
}

TEST_CASE("materialize honours the round limit") {
    Run r = run({"materialize", "-p", data("birthday.dmtl"), "-d", data("birthday.dtf"), "--max-rounds", "3"});
    CHECK(r.code == 3);
    CHECK(r.out == "Bday(t)@[0,0]\nBday(t)@[1,1]\nBday(t)@[2,2]\nBday(t)@[3,3]\n");
    Run ex = run({"materialize", "-p", data("excheat.dmtl"), "-d", data("excheat.dtf")});
    CHECK(ex.code == 0);
    CHECK(ex.out.find("ExcHeat(d)@[1,3]") != std::string::npos);
    Run t = run({"materialize", "-p", data("birthday.dmtl"), "-d", data("birthday.dtf"), "--target", "Bday(t)@[5,5]",
                 "--json"});
    CHECK(t.code == 0);
    auto j = json::parse(t.out);
    CHECK(j["status"] == "TargetEntailed");
    CHECK(j["rounds"] == 5);
}

TEST_CASE("analyze shows the professor cycle") {
    Run r = run({"analyze", "-p", data("professor.dmtl")});
    CHECK(r.code == 0);
    CHECK(r.out.find("digraph") != std::string::npos);
    CHECK(r.out.find("\"Chair\" -> \"FullProfessor\"") != std::string::npos);
    CHECK(r.out.find("\"FullProfessor\" -> \"Chair\"") != std::string::npos);
    CHECK(r.out.find("recursive: Chair FullProfessor\n") != std::string::npos);
    CHECK(r.out.find("  AssistantProfessor 1\n") != std::string::npos);
}

TEST_CASE("consistency with trace and graph output") {
    std::string trace = "cli_trace.txt", dot = "cli_graph.dot";
    Run r = run({"consistency", "-p", golden("clash.dmtl"), "-d", golden("clash.dtf"), "--trace", trace, "--dot", dot});
    CHECK(r.code == 0);
    CHECK(r.out == "true\n");
    CHECK(read_file(trace).find("span") != std::string::npos);
    CHECK(read_file(dot).rfind("digraph", 0) == 0);
    std::remove(trace.c_str());
    std::remove(dot.c_str());

    Run clash = run({"consistency", "-p", golden("clash.dmtl"), "-d", data("birthday.dtf")});
    CHECK(clash.out == "true\n");
}

TEST_CASE("json output matches the golden files") {
    check_golden({"check", "-p", data("immune.dmtl"), "-d", data("immune.dtf"), "-f", "Immune(james)@[7,10]", "--json"},
                 "check_immune.json");
    check_golden({"check", "-p", data("birthday.dmtl"), "-d", data("birthday.dtf"), "-f", "Bday(t)@[1/2,1/2]", "--json",
                  "--sequential"},
                 "check_birthday.json");
    check_golden({"materialize", "-p", data("immune.dmtl"), "-d", data("immune.dtf"), "--json"}, "materialize_immune.json");
    check_golden({"consistency", "-p", golden("clash.dmtl"), "-d", golden("clash.dtf"), "--json"},
                 "consistency_clash.json");
    check_golden({"analyze", "-p", data("professor.dmtl"), "--json"}, "analyze_professor.json");
    check_golden({"bench", "-p", data("taxonomy.dmtl"), "-d", data("taxonomy.dtf"), "-q", data("taxonomy_queries.dtf"),
                  "--sequential", "--json"},
                 "bench_taxonomy.json");
}

TEST_CASE("generate is byte-deterministic") {
    Run a = run({"generate", "-s", golden("generate_spec.json")});
    CHECK(a.code == 0);
    CHECK(a.out == read_file(golden("generate_small.dtf")));
    std::string file = "cli_generated.dtf";
    Run b = run({"generate", "-s", golden("generate_spec.json"), "-o", file, "--count", "40", "--seed", "5"});
    CHECK(b.code == 0);
    CHECK(parse_dataset(read_file(file)).size() == 40);
    Run c = run({"generate", "-s", golden("generate_spec.json"), "--count", "40", "--seed", "5"});
    CHECK(c.out == read_file(file));
    std::remove(file.c_str());
    CHECK(run({"generate", "-s", "missing.json"}).code == 2);
}
