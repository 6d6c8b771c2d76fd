#include "dmtl/cli.hpp"

#include "dmtl/analysis.hpp"
#include "dmtl/bench.hpp"
#include "dmtl/parser.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace dmtl {

namespace {

using ojson = nlohmann::ordered_json;

const char* kGrammar = R"grammar(
Program files (.dmtl), one rule per '.':
  rule     := head ":-" literal ("," literal)* "."
  head     := "BOTTOM" | atom | ("BOXMINUS" | "BOXPLUS") interval head
  literal  := unary (("SINCE" | "UNTIL") interval unary)?
  unary    := "TOP" | "BOTTOM" | OP interval unary | atom | "(" literal ")"
  OP       := "DIAMONDMINUS" | "DIAMONDPLUS" | "BOXMINUS" | "BOXPLUS"
  atom     := Name ("(" term ("," term)* ")")?
  interval := ("[" | "(") bound "," bound ("]" | ")")    bounds: 3, -3/2, 1.25, inf, -inf
Terms starting with an uppercase letter or '_' are variables. '#' comments run to end of line.

Dataset files (.dtf), one fact per line:
  fact     := atom "@" interval        e.g. NoSympt(james)@[0,14]

Exit codes: 0 answer computed, 1 usage error, 2 parse or load error, 3 internal limit reached.
)grammar";

// Load failures carry the file name and, for syntax errors, line and column.
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class F>
auto load(const std::string& path, F parse) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw LoadError(e.what());
    }
    try {
        return parse(text);
    } catch (const std::exception& e) {
        throw LoadError(path + ":" + e.what());
    }
}

Program program_file(const std::string& path) { return load(path, [](const std::string& t) { return parse_program(t); }); }
std::vector<Fact> dataset_file(const std::string& path) {
    return load(path, [](const std::string& t) { return parse_dataset(t); });
}
Fact fact_arg(const std::string& text) {
    try {
        return parse_fact(text);
    } catch (const std::exception& e) {
        throw LoadError("fact '" + text + "': " + e.what());
    }
}

double ms(std::chrono::nanoseconds t) { return std::chrono::duration<double, std::milli>(t).count(); }

ojson result_json(const Fact& q, const EntailmentResult& r) {
    return ojson{{"query", q.str()},
                 {"answer", r.answer},
                 {"factType", to_string(r.type)},
                 {"rounds", r.rounds},
                 {"preRounds", r.pre_rounds},
                 {"winner", to_string(r.winner)},
                 {"inconsistent", r.inconsistent},
                 {"relevantRules", r.relevant_rules},
                 {"recursive", r.recursive},
                 {"timings",
                  {{"fastPathMs", ms(r.timings.fast_path)},
                   {"relevantRulesMs", ms(r.timings.relevant_rules)},
                   {"preMaterialisationMs", ms(r.timings.pre_materialisation)},
                   {"materialisationMs", ms(r.timings.materialisation)},
                   {"automataMs", ms(r.timings.automata)},
                   {"coalescingMs", ms(r.timings.coalescing)},
                   {"totalMs", ms(r.timings.total)}}}};
}

// Writes to the named file, or to out for "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw LoadError("cannot write " + path);
    f << text;
}

struct Logger {
    std::ostream& err;
    int level = 0;
    void info(const std::string& m) const {
        if (level >= 1) err << "[info] " << m << "\n";
    }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Temporal rule reasoner: entailment, materialisation, consistency and benchmarks", "dmtl"};
    app.footer(kGrammar);
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "More diagnostics on stderr (repeatable)");

    std::string program, dataset, fact, spec_path, output = "-", queries_path, trace_path, dot_path;
    bool json = false, sequential = false;
    std::optional<std::size_t> max_rounds, max_states, generate_count, fact_count;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> target;

    auto common = [&](CLI::App* sub, bool with_data) {
        sub->add_option("-p,--program", program, "Program file (.dmtl)")->required();
        if (with_data) sub->add_option("-d,--data", dataset, "Dataset file (.dtf)")->required();
        sub->add_flag("--json", json, "Machine-readable output");
    };

    auto* check = app.add_subcommand("check", "Decide whether program and data entail a fact");
    common(check, true);
    check->add_option("-f,--fact", fact, "Query fact, e.g. 'P(a)@[1,2]'")->required();
    check->add_flag("--sequential", sequential, "Deterministic mode: materialise to a budget, then run the automata");
    check->add_option("--max-rounds", max_rounds, "Round cap for materialisation (the budget in sequential mode)");
    check->add_option("--max-states", max_states, "State cap for the automata");

    auto* mat = app.add_subcommand("materialize", "Forward-chain to a fixpoint or round limit");
    common(mat, true);
    mat->add_option("--max-rounds", max_rounds, "Stop after this many rounds (exit 3 when reached)");
    mat->add_option("--target", target, "Stop once this fact is entailed");
    mat->add_option("-o,--output", output, "Where to write the facts ('-' for stdout)");

    auto* cons = app.add_subcommand("consistency", "Decide whether program and data have a model");
    common(cons, true);
    cons->add_option("--max-states", max_states, "State cap for the automata");
    auto* trace_opt = cons->add_option("--trace", trace_path, "Write explored windows as text ('-' for stderr)");
    cons->add_option("--dot", dot_path, "Write the explored state graph as DOT");

    auto* analyze = app.add_subcommand("analyze", "Dependency graph, recursive predicates, relevant rule counts");
    common(analyze, false);

    auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset from a JSON spec");
    gen->add_option("-s,--spec", spec_path, "Generator spec (JSON)")->required();
    gen->add_option("-o,--output", output, "Dataset file to write ('-' for stdout)");
    gen->add_option("--seed", seed, "Override the spec's seed");
    gen->add_option("--count", fact_count, "Override the spec's fact count");

    auto* bench = app.add_subcommand("bench", "Time entailment checks and tally fact types");
    common(bench, true);
    auto* qopt = bench->add_option("-q,--queries", queries_path, "Query facts (.dtf)");
    auto* gopt = bench->add_option("--generate", generate_count, "Generate this many queries instead");
    qopt->excludes(gopt);
    bench->add_option("--seed", seed, "Seed for generated queries");
    bench->add_flag("--sequential", sequential, "Deterministic per-query mode");
    bench->add_option("--max-rounds", max_rounds, "Round cap for materialisation");
    bench->add_option("--max-states", max_states, "State cap for the automata");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if (bench->parsed() && queries_path.empty() && !generate_count)
            throw CLI::ValidationError("bench", "one of --queries or --generate is required");
        if (cons->parsed() && json && dot_path == "-")
            throw CLI::ValidationError("consistency", "--json and --dot - would both write to stdout");
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitUsage;
    }

    Logger log{err, verbosity};
    auto pipeline_options = [&] {
        PipelineOptions o;
        o.sequential = sequential;
        if (max_rounds) {
            o.max_rounds = max_rounds;
            o.round_budget = *max_rounds;
        }
        if (max_states) o.automata.max_states = *max_states;
        return o;
    };

    try {
        if (check->parsed()) {
            Program p = program_file(program);
            FactStore d(dataset_file(dataset));
            Fact q = fact_arg(fact);
            log.info("loaded " + std::to_string(p.rules.size()) + " rules, " + std::to_string(d.interval_count()) + " facts");
            EntailmentResult r = check_entailment(p, d, q, pipeline_options());
            if (json)
                out << result_json(q, r).dump(2) << "\n";
            else
                out << (r.answer ? "true" : "false") << "\n";
            log.info(std::string("type ") + to_string(r.type) + ", winner " + to_string(r.winner) + ", rounds " +
                     std::to_string(r.rounds) + (r.inconsistent ? ", program and data are inconsistent" : ""));
            return kExitOk;
        }
        if (mat->parsed()) {
            Program p = program_file(program);
            FactStore d(dataset_file(dataset));
            MaterialisationOptions mo;
            mo.max_rounds = max_rounds;
            if (target) mo.target = fact_arg(*target);
            auto res = materialise(p, std::move(d), mo);
            std::vector<Fact> facts = res.store.facts();
            if (json) {
                ojson list = ojson::array();
                for (const auto& f : facts) list.push_back(f.str());
                ojson j{{"status", to_string(res.status)},
                        {"rounds", res.rounds},
                        {"inconsistent", res.store.inconsistent()},
                        {"facts", list},
                        {"coalescingMs", ms(res.coalescing_time)}};
                emit(output, j.dump(2) + "\n", out);
            } else {
                emit(output, dataset_str(facts), out);
            }
            log.info(std::string("status ") + to_string(res.status) + " after " + std::to_string(res.rounds) + " rounds");
            if (res.status == MatStatus::RoundLimit) {
                err << "round limit reached before a fixpoint\n";
                return kExitLimit;
            }
            return kExitOk;
        }
        if (cons->parsed()) {
            Program p = program_file(program);
            auto d = dataset_file(dataset);
            AutomataOptions ao;
            if (max_states) ao.max_states = *max_states;
            std::ostringstream trace;
            if (trace_opt->count()) ao.trace = &trace;
            ao.record_graph = !dot_path.empty();
            AutomataStats st;
            bool ok = consistent(p, d, ao, &st);
            if (trace_opt->count()) {
                if (trace_path == "-")
                    err << trace.str();
                else
                    emit(trace_path, trace.str(), out);
            }
            if (!dot_path.empty()) emit(dot_path, st.dot, out);
            if (json) {
                ojson j{{"consistent", ok},
                        {"shortCircuit", st.short_circuit},
                        {"bottomInSpan", st.bottom_in_span},
                        {"spanIndex", st.span_index},
                        {"windowSize", st.window_size},
                        {"trackedLiterals", st.tracked_literals},
                        {"groundRules", st.ground_rules},
                        {"spanExpansions", st.span_expansions},
                        {"buchiStates", st.buchi_states},
                        {"letters", st.letters}};
                out << j.dump(2) << "\n";
            } else {
                out << (ok ? "true" : "false") << "\n";
            }
            return kExitOk;
        }
        if (analyze->parsed()) {
            Program p = program_file(program);
            DependencyInfo info = dependency_info(p);
            std::map<std::string, std::size_t> counts;
            for (const auto& v : info.vertices) counts[v] = relevant_rules(p, v).rules.size();
            if (json) {
                ojson sccs = ojson::array();
                for (const auto& s : info.sccs) sccs.push_back(s);
                ojson j{{"vertices", info.vertices},
                        {"recursive", std::vector<std::string>(info.recursive.begin(), info.recursive.end())},
                        {"sccs", sccs},
                        {"relevantRules", counts},
                        {"dot", info.dot()}};
                out << j.dump(2) << "\n";
            } else {
                out << info.dot();
                out << "recursive:";
                for (const auto& r : info.recursive) out << " " << r;
                out << "\nrelevant rules:\n";
                for (const auto& [pred, n] : counts) out << "  " << pred << " " << n << "\n";
            }
            return kExitOk;
        }
        if (gen->parsed()) {
            GeneratorSpec spec = load(spec_path, [](const std::string& t) { return parse_generator_spec(t); });
            if (seed) spec.seed = *seed;
            if (fact_count) spec.fact_count = *fact_count;
            auto facts = generate_dataset(spec);
            emit(output, dataset_str(facts), out);
            log.info("wrote " + std::to_string(facts.size()) + " facts");
            return kExitOk;
        }
        if (bench->parsed()) {
            Program p = program_file(program);
            auto facts = dataset_file(dataset);
            std::vector<Fact> queries =
                generate_count ? generate_queries(p, facts, *generate_count, seed.value_or(0)) : dataset_file(queries_path);
            BenchReport rep = run_bench(p, FactStore(facts), queries, pipeline_options());
            out << (json ? rep.json() + "\n" : rep.table());
            return kExitOk;
        }
    } catch (const LoadError& e) {
        err << "error: " << e.what() << "\n";
        return kExitLoad;
    } catch (const PipelineLimit& e) {
        err << "limit: " << e.what() << "\n";
        return kExitLimit;
    } catch (const AutomataLimit& e) {
        err << "limit: " << e.what() << "\n";
        return kExitLimit;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitLimit;
    }
    return kExitUsage;
}

}  // namespace dmtl
