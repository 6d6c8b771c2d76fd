#pragma once

// Brute-force pointwise semantics used only by the tests. Truth values are sampled at the
// representatives of ruler intervals (points k*d and midpoints of (k*d,(k+1)*d)); witnesses
// are searched on a d/4 grid and Since/Until gaps are checked on a d/8 grid, which is enough
// to see every ruler interval an operator window touches.

#include "dmtl/store.hpp"

#include <map>
#include <vector>

namespace oracle {

using dmtl::Interval;
using dmtl::IntervalList;
using dmtl::MetricAtom;
using dmtl::Rational;
using dmtl::RelationalAtom;

struct Grid {
    Rational d;
    long kmin = 0, kmax = 0;  // representative index k stands for time k*d/2

    Grid(Rational spacing, const Rational& lo, const Rational& hi);
    Rational time(long k) const;
    long rep(const Rational& t) const;  // ruler interval containing t
    bool inside(long k) const { return k >= kmin && k <= kmax; }
    std::size_t size() const { return static_cast<std::size_t>(kmax - kmin + 1); }
};

using Truth = std::vector<char>;

struct Model {
    Grid grid;
    std::map<RelationalAtom, Truth> atoms;
    Truth bottom;

    explicit Model(Grid g) : grid(std::move(g)), bottom(grid.size(), 0) {}
    Truth& atom(const RelationalAtom& a);
    bool holds(const RelationalAtom& a, long k) const;
};

Truth from_list(const Grid& g, const IntervalList& list);
Model from_store(const Grid& g, const dmtl::FactStore& store);
bool eval_at(const MetricAtom& m, const Model& model, long k);
Truth eval(const MetricAtom& m, const Model& model);
// Least model of the ground rules over the grid, starting from the model's atoms.
Model materialise(const std::vector<dmtl::Rule>& ground_rules, Model start);
// True iff list and truth agree on every representative with index in [from, to].
bool agree(const Grid& g, const IntervalList& list, const Truth& truth, long from, long to);

// d for an instance: gcd of every finite number in the program and data, or 1.
Rational instance_spacing(const dmtl::Program& p, const std::vector<dmtl::Fact>& facts);
// Sum of all finite operator bounds in the program.
Rational operator_bound_sum(const dmtl::Program& p);

}  // namespace oracle
