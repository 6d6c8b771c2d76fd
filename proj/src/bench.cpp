#include "dmtl/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace dmtl {

namespace {

using json = nlohmann::ordered_json;

// Uniform integer in [0, n] without relying on a library distribution, so output is identical
// across standard libraries.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) {
    if (n == std::numeric_limits<std::uint64_t>::max()) return rng();
    std::uint64_t span = n + 1;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t v;
    do v = rng();
    while (v >= limit);
    return v % span;
}

Rational rational_of(const json& v, const char* key) {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number()) return Rational::parse(v.dump());
    throw std::invalid_argument(std::string("expected a number for ") + key);
}

long steps(const Rational& length, const Rational& unit) { return length.floor_div(unit); }

double ms(std::chrono::nanoseconds t) { return std::chrono::duration<double, std::milli>(t).count(); }

}  // namespace

void GeneratorSpec::validate() const {
    if (predicates.empty()) throw std::invalid_argument("generator spec needs at least one predicate");
    for (const auto& p : predicates)
        if (p.name.empty() || p.arity < 0) throw std::invalid_argument("bad predicate in generator spec");
    if (fact_count < 1) throw std::invalid_argument("factCount must be at least 1");
    if (constant_pool < 1) throw std::invalid_argument("constantPool must be at least 1");
    if (!endpoint_range.bounded() || endpoint_range.left_open() || endpoint_range.right_open())
        throw std::invalid_argument("endpointRange must be a closed bounded interval");
    if (granularity.sign() <= 0) throw std::invalid_argument("granularity must be positive");
    if (max_interval_length.sign() < 0) throw std::invalid_argument("maxIntervalLength must be non-negative");
    Rational lo = endpoint_range.left().value(), hi = endpoint_range.right().value();
    if (!(lo / granularity).is_integer() || !(hi / granularity).is_integer())
        throw std::invalid_argument("endpointRange bounds must be multiples of granularity");
}

GeneratorSpec parse_generator_spec(std::string_view text) {
    json j = json::parse(text);
    GeneratorSpec s;
    for (const auto& p : j.at("predicates")) s.predicates.push_back({p.at("name").get<std::string>(), p.value("arity", 1)});
    if (j.contains("constantPool")) s.constant_pool = j["constantPool"].get<std::size_t>();
    if (j.contains("factCount")) s.fact_count = j["factCount"].get<std::size_t>();
    if (j.contains("endpointRange")) s.endpoint_range = Interval::parse(j["endpointRange"].get<std::string>());
    if (j.contains("maxIntervalLength")) s.max_interval_length = rational_of(j["maxIntervalLength"], "maxIntervalLength");
    if (j.contains("granularity")) s.granularity = rational_of(j["granularity"], "granularity");
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    s.validate();
    return s;
}

std::vector<Fact> generate_dataset(const GeneratorSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const Rational& g = spec.granularity;
    Rational lo = spec.endpoint_range.left().value(), hi = spec.endpoint_range.right().value();
    long positions = steps(hi - lo, g);
    long max_len = steps(spec.max_interval_length, g);
    std::vector<Fact> out;
    out.reserve(spec.fact_count);
    for (std::size_t i = 0; i < spec.fact_count; ++i) {
        const PredicateSpec& ps = spec.predicates[draw(rng, spec.predicates.size() - 1)];
        RelationalAtom a{ps.name, {}};
        for (int k = 0; k < ps.arity; ++k)
            a.args.push_back(Term::constant("c" + std::to_string(draw(rng, spec.constant_pool - 1))));
        long start = static_cast<long>(draw(rng, static_cast<std::uint64_t>(positions)));
        long len = static_cast<long>(draw(rng, static_cast<std::uint64_t>(std::min(max_len, positions - start))));
        Rational left = lo + g * Rational(start);
        out.push_back(Fact{std::move(a), Interval::closed(left, left + g * Rational(len))});
    }
    return out;
}

std::vector<Fact> generate_queries(const Program& p, const std::vector<Fact>& d, std::size_t count,
                                   std::uint64_t seed) {
    if (d.empty()) throw std::invalid_argument("cannot generate queries over an empty dataset");
    // Facts whose predicate some rule derives; half the queries come from these when there are any.
    std::set<std::string> heads;
    for (const auto& r : p.rules)
        if (auto h = r.head_predicate()) heads.insert(*h);
    std::vector<std::size_t> derived;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (heads.count(d[i].atom.predicate)) derived.push_back(i);

    // Time range and step from the dataset's finite endpoints.
    std::vector<Rational> ends;
    for (const auto& f : d)
        for (const auto* b : {&f.interval.left(), &f.interval.right()})
            if (b->finite()) ends.push_back(b->value());
    Rational lo(0), hi(0), step(1);
    if (!ends.empty()) {
        lo = *std::min_element(ends.begin(), ends.end());
        hi = *std::max_element(ends.begin(), ends.end());
        std::vector<Rational> mags;
        for (const auto& e : ends)
            if (!e.is_zero()) mags.push_back(e.abs());
        if (!mags.empty()) step = gcd_rationals(mags);
    }

    std::mt19937_64 rng(seed);
    // Closed interval drawn on the step grid inside [from, to], at most a tenth of the range long.
    auto span_in = [&](const Rational& from, const Rational& to) {
        long positions = steps(to - from, step);
        long start = static_cast<long>(draw(rng, static_cast<std::uint64_t>(positions)));
        long reach = std::min(positions - start, steps(hi - lo, step) / 10 + 1);
        long len = static_cast<long>(draw(rng, static_cast<std::uint64_t>(reach)));
        Rational left = from + step * Rational(start);
        return Interval::closed(left, left + step * Rational(len));
    };
    std::vector<Fact> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        bool want_derived = !derived.empty() && draw(rng, 1) == 0;
        const Fact& f = want_derived ? d[derived[draw(rng, derived.size() - 1)]] : d[draw(rng, d.size() - 1)];
        // inside the source fact half of the time, anywhere in the range otherwise
        bool inside = f.interval.bounded() && draw(rng, 1) == 0;
        Interval iv = inside ? span_in(f.interval.left().value(), f.interval.right().value()) : span_in(lo, hi);
        out.push_back(Fact{f.atom, iv});
    }
    return out;
}

double Census::percent(FactType t) const {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(count(t)) / static_cast<double>(total);
}

Census census(const Program& p, const FactStore& d, const std::vector<Fact>& queries, PipelineOptions opts) {
    opts.sequential = true;
    Census c;
    for (const auto& q : queries) {
        try {
            ++c.counts[static_cast<std::size_t>(check_entailment(p, d, q, opts).type)];
            ++c.total;
        } catch (const PipelineLimit&) {
            ++c.undecided;
        }
    }
    return c;
}

BenchReport run_bench(const Program& p, const FactStore& d, const std::vector<Fact>& queries,
                      const PipelineOptions& opts) {
    BenchReport rep;
    rep.facts = d.interval_count();
    rep.rules = p.rules.size();
    for (const auto& q : queries) {
        BenchRow row{q, {}, true, {}};
        try {
            row.result = check_entailment(p, d, q, opts);
            ++rep.census.counts[static_cast<std::size_t>(row.result.type)];
            ++rep.census.total;
        } catch (const PipelineLimit& e) {
            row.decided = false;
            row.note = e.what();
            ++rep.census.undecided;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

namespace {

struct TypeSummary {
    std::size_t count = 0;
    double total = 0, coalescing = 0, pre = 0, rounds = 0;
};

std::array<TypeSummary, 5> summarise(const std::vector<BenchRow>& rows) {
    std::array<TypeSummary, 5> s{};
    for (const auto& row : rows) {
        if (!row.decided) continue;
        auto& t = s[static_cast<std::size_t>(row.result.type)];
        ++t.count;
        t.total += ms(row.result.timings.total);
        t.coalescing += ms(row.result.timings.coalescing);
        t.pre += ms(row.result.timings.pre_materialisation);
        t.rounds += static_cast<double>(row.result.rounds);
    }
    for (auto& t : s)
        if (t.count) {
            double n = static_cast<double>(t.count);
            t.total /= n;
            t.coalescing /= n;
            t.pre /= n;
            t.rounds /= n;
        }
    return s;
}

constexpr std::array<FactType, 5> kTypes{FactType::T1, FactType::T2, FactType::T3, FactType::T4, FactType::T5};

}  // namespace

std::string BenchReport::table() const {
    auto s = summarise(rows);
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << "facts " << facts << ", rules " << rules << ", queries " << census.total + census.undecided
        << ", undecided " << census.undecided << "\n";
    out << "type  count  share%   total_ms   c_ms       n       p_ms\n";
    for (FactType t : kTypes) {
        const auto& x = s[static_cast<std::size_t>(t)];
        out << std::left << std::setw(6) << to_string(t) << std::right << std::setw(5) << x.count << std::setw(9)
            << std::setprecision(1) << census.percent(t) << std::setprecision(3) << std::setw(11) << x.total
            << std::setw(11) << x.coalescing << std::setw(8) << std::setprecision(1) << x.rounds
            << std::setprecision(3) << std::setw(11) << x.pre << "\n";
    }
    return out.str();
}

std::string BenchReport::json() const {
    auto s = summarise(rows);
    using nlohmann::ordered_json;
    ordered_json j;
    j["facts"] = facts;
    j["rules"] = rules;
    j["queries"] = census.total + census.undecided;
    j["undecided"] = census.undecided;
    ordered_json types = ordered_json::object();
    for (FactType t : kTypes) {
        const auto& x = s[static_cast<std::size_t>(t)];
        types[to_string(t)] = {{"count", x.count},
                               {"percent", census.percent(t)},
                               {"meanTotalMs", x.total},
                               {"meanCoalescingMs", x.coalescing},
                               {"meanRounds", x.rounds},
                               {"meanPreMaterialisationMs", x.pre}};
    }
    j["types"] = types;
    ordered_json list = ordered_json::array();
    for (const auto& row : rows) {
        if (!row.decided) {
            list.push_back({{"query", row.query.str()}, {"decided", false}, {"note", row.note}});
            continue;
        }
        list.push_back({{"query", row.query.str()},
                        {"decided", true},
                        {"answer", row.result.answer},
                        {"factType", to_string(row.result.type)},
                        {"rounds", row.result.rounds},
                        {"winner", to_string(row.result.winner)},
                        {"inconsistent", row.result.inconsistent},
                        {"totalMs", ms(row.result.timings.total)}});
    }
    j["rows"] = list;
    return j.dump(2);
}

}  // namespace dmtl
