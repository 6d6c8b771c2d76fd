#pragma once

#include "dmtl/automata.hpp"
#include "dmtl/materialisation.hpp"

#include <chrono>
#include <optional>
#include <stdexcept>

namespace dmtl {

// Where the answer came from. T1 is the dataset itself, T2 a non-recursive relevant program,
// T3 a fixpoint without the query, T4 a derivation after finitely many rounds, T5 the automata.
enum class FactType { T1, T2, T3, T4, T5 };
enum class Winner { FastPath, Materialisation, Automata };

const char* to_string(FactType t);
const char* to_string(Winner w);

struct EntailmentTimings {
    std::chrono::nanoseconds fast_path{0};
    std::chrono::nanoseconds relevant_rules{0};
    std::chrono::nanoseconds pre_materialisation{0};
    std::chrono::nanoseconds materialisation{0};
    std::chrono::nanoseconds automata{0};
    std::chrono::nanoseconds coalescing{0};
    std::chrono::nanoseconds total{0};
};

struct EntailmentResult {
    bool answer = false;
    FactType type = FactType::T1;
    std::size_t rounds = 0;      // rule applications, pre-materialisation included
    std::size_t pre_rounds = 0;  // of which spent pre-materialising
    Winner winner = Winner::FastPath;
    // Π and D have no model, so every fact is entailed.
    bool inconsistent = false;
    std::size_t relevant_rules = 0;
    bool recursive = false;
    EntailmentTimings timings;
};

struct PipelineOptions {
    // Deterministic mode: materialise up to round_budget rounds, then ask the automata.
    bool sequential = false;
    std::size_t round_budget = 200;
    // Caps materialisation in concurrent mode; unlimited when empty.
    std::optional<std::size_t> max_rounds;
    // Pre-materialisation stops after this many rounds even if non-recursive facts keep growing.
    std::size_t pre_round_limit = 64;
    AutomataOptions automata;
};

// Neither worker reached an answer within its limits.
struct PipelineLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreMaterialisation {
    FactStore pre;      // D^pre, the store before the confirming round
    FactStore current;  // store after the last round applied
    // Set when a target, fixpoint or inconsistency exit fired before the loop broke.
    std::optional<MatStatus> exit;
    std::size_t rounds = 0;
    std::chrono::nanoseconds coalescing{0};
};

// Applies rounds until one adds nothing over predicates that are non-recursive in p.
PreMaterialisation pre_materialise(const Program& p, const FactStore& d, const std::optional<Fact>& target,
                                   std::size_t round_limit = 64);
FactStore pre_materialise(const Program& p, const FactStore& d);

EntailmentResult check_entailment(const Program& p, const FactStore& d, const Fact& query,
                                  const PipelineOptions& opts = {});

}  // namespace dmtl
