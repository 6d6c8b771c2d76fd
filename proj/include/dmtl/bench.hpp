#pragma once

#include "dmtl/pipeline.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace dmtl {

struct PredicateSpec {
    std::string name;
    int arity = 1;
};

struct GeneratorSpec {
    std::vector<PredicateSpec> predicates;
    std::size_t constant_pool = 100;  // constants c0, c1, ...
    std::size_t fact_count = 1000;
    Interval endpoint_range = Interval::closed(Rational(0), Rational(100));
    Rational max_interval_length = Rational(5);
    Rational granularity = Rational(1);
    std::uint64_t seed = 0;

    // Throws std::invalid_argument when the spec cannot be honoured.
    void validate() const;
};

// Reads a spec from JSON. Keys: predicates [{name, arity}], constantPool, factCount,
// endpointRange "[lo,hi]", maxIntervalLength, granularity, seed. Rationals may be numbers or strings.
GeneratorSpec parse_generator_spec(std::string_view json);

std::vector<Fact> generate_dataset(const GeneratorSpec& spec);

// Query facts over ground atoms of d, with closed intervals inside d's finite time range.
std::vector<Fact> generate_queries(const Program& p, const std::vector<Fact>& d, std::size_t count,
                                   std::uint64_t seed);

struct Census {
    std::array<std::size_t, 5> counts{};
    std::size_t total = 0;      // classified queries
    std::size_t undecided = 0;  // queries where both workers hit their limits

    std::size_t count(FactType t) const { return counts[static_cast<std::size_t>(t)]; }
    double percent(FactType t) const;
};

// Classifies each query by the code path answering it, always in sequential mode.
// Percentages are over the classified queries.
Census census(const Program& p, const FactStore& d, const std::vector<Fact>& queries,
              PipelineOptions opts = {});

struct BenchRow {
    Fact query;
    EntailmentResult result;
    bool decided = true;
    std::string note;  // why the query stayed undecided
};

struct BenchReport {
    std::vector<BenchRow> rows;
    Census census;
    std::size_t facts = 0;
    std::size_t rules = 0;

    // Per fact type: mean total time, coalescing time c, rounds n and pre-materialisation time p.
    std::string table() const;
    std::string json() const;
};

BenchReport run_bench(const Program& p, const FactStore& d, const std::vector<Fact>& queries,
                      const PipelineOptions& opts = {});

}  // namespace dmtl
