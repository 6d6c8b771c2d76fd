#pragma once

#include "dmtl/store.hpp"

#include <string>
#include <vector>

namespace dmtl {

// List-level operator semantics; inputs must be coalesced.
IntervalList diamond_minus(const IntervalList& m, const Interval& range);
IntervalList diamond_plus(const IntervalList& m, const Interval& range);
IntervalList box_minus(const IntervalList& m, const Interval& range);
IntervalList box_plus(const IntervalList& m, const Interval& range);
IntervalList since(const IntervalList& m1, const IntervalList& m2, const Interval& range);
IntervalList until(const IntervalList& m1, const IntervalList& m2, const Interval& range);

// Points where the ground literal holds given exactly the store's facts.
IntervalList apply_operator(const MetricAtom& literal, const FactStore& store);

// Intersection of all lists by a simultaneous sweep.
IntervalList merge_intervals(const std::vector<IntervalList>& lists);

// A head derivation: a fact, or an inconsistency on the interval when bottom is set.
struct Derivation {
    bool bottom = false;
    RelationalAtom atom;
    Interval interval;

    Fact fact() const { return Fact{atom, interval}; }
};

Derivation reverse_head(const MetricAtom& head, const Interval& interval);

// All head derivations of one application of the rule to the store. Variables that are
// only bound by optional positions (the left side of SINCE/UNTIL) range over domain, or over
// the constants of the store and rule when domain is null.
std::vector<Derivation> evaluate_rule(const Rule& rule, const FactStore& store,
                                      const std::vector<std::string>* domain = nullptr);

}  // namespace dmtl
