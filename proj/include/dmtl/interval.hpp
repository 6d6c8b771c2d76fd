#pragma once

#include "dmtl/rational.hpp"

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmtl {

// A point of the extended timeline: -inf, a rational, or +inf.
class Bound {
public:
    enum class Kind { NegInf, Finite, PosInf };

    Bound() = default;
    Bound(Rational v) : kind_(Kind::Finite), value_(std::move(v)) {}  // NOLINT(implicit)
    Bound(long v) : kind_(Kind::Finite), value_(v) {}                 // NOLINT(implicit)
    static Bound neg_inf() { Bound b; b.kind_ = Kind::NegInf; return b; }
    static Bound pos_inf() { Bound b; b.kind_ = Kind::PosInf; return b; }

    Kind kind() const { return kind_; }
    bool finite() const { return kind_ == Kind::Finite; }
    bool infinite() const { return kind_ != Kind::Finite; }
    const Rational& value() const;  // throws when infinite
    std::string str() const;

    // The dominating-infinity convention: an infinite left operand wins, otherwise
    // an infinite right operand yields the signed infinity.
    friend Bound operator+(const Bound& a, const Bound& b);
    friend Bound operator-(const Bound& a, const Bound& b);
    Bound operator-() const;

    friend bool operator==(const Bound& a, const Bound& b);
    friend std::strong_ordering operator<=>(const Bound& a, const Bound& b);

private:
    Kind kind_ = Kind::Finite;
    Rational value_;
};

enum class IntervalOp { Closure, Minus, CircleMinus, Plus, CirclePlus };

class Interval {
public:
    // Builds the canonical form; yields Empty when no point is denoted.
    static Interval normalize(Bound left, Bound right, bool left_open, bool right_open);
    static Interval empty() { return Interval(); }
    static Interval closed(Rational a, Rational b) { return normalize(std::move(a), std::move(b), false, false); }
    static Interval point(Rational t) { return closed(t, t); }
    static Interval all() { return normalize(Bound::neg_inf(), Bound::pos_inf(), true, true); }
    // Parses "[a,b]", "(a,+inf)", and so on.
    static Interval parse(std::string_view text);

    Interval() = default;  // Empty

    bool is_empty() const { return empty_; }
    const Bound& left() const { return left_; }
    const Bound& right() const { return right_; }
    bool left_open() const { return left_open_; }
    bool right_open() const { return right_open_; }
    bool bounded() const { return !empty_ && left_.finite() && right_.finite(); }
    bool punctual() const { return !empty_ && left_ == right_; }
    bool contains(const Rational& t) const;
    std::string str() const;

    friend bool operator==(const Interval& a, const Interval& b);
    // Sort key: left bound, closed-left first, right bound, closed-right first; Empty sorts first.
    friend std::strong_ordering operator<=>(const Interval& a, const Interval& b);

private:
    bool empty_ = true;
    Bound left_, right_;
    bool left_open_ = false, right_open_ = false;
};

Interval interval_op(IntervalOp kind, const Interval& a, const Interval& b = Interval::all());
Interval intersect(const Interval& a, const Interval& b);
std::optional<Interval> union_if_coalescable(const Interval& a, const Interval& b);
bool subset(const Interval& a, const Interval& b);

// Sorted, pairwise disjoint and non-coalescable intervals.
using IntervalList = std::vector<Interval>;

// Sorts and merges any overlapping or adjacent members; drops empties.
IntervalList coalesce(IntervalList list);

}  // namespace dmtl
