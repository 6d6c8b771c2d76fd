#pragma once

#include "dmtl/evaluation.hpp"

#include <chrono>
#include <optional>
#include <stop_token>

namespace dmtl {

struct ApplyStats {
    std::chrono::nanoseconds coalescing{0};  // time spent inserting (and so coalescing) derivations
    std::size_t derivations = 0;
};

// One application of the immediate consequence operator. Every rule reads the input store;
// derived facts are clipped to horizon when one is given.
FactStore apply_rules(const Program& p, const FactStore& input, ApplyStats* stats = nullptr,
                      const Interval* horizon = nullptr);

enum class MatStatus { Fixpoint, TargetEntailed, RoundLimit, Inconsistent, Cancelled };
const char* to_string(MatStatus s);

struct MaterialisationOptions {
    std::optional<std::size_t> max_rounds;
    std::optional<Fact> target;
    std::optional<Interval> horizon;
    std::stop_token stop;
    // Called after every round with the round number and the new store.
    std::function<void(std::size_t, const FactStore&)> on_round;
};

struct MaterialisationOutcome {
    FactStore store;
    MatStatus status = MatStatus::Fixpoint;
    std::size_t rounds = 0;
    std::chrono::nanoseconds coalescing_time{0};
    std::vector<std::chrono::nanoseconds> round_coalescing;
};

MaterialisationOutcome materialise(const Program& p, FactStore store, const MaterialisationOptions& opts = {});

}  // namespace dmtl
