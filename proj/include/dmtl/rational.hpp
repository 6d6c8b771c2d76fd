#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dmtl {

// Exact rational number kept in lowest terms by GMP.
class Rational {
public:
    Rational() = default;
    Rational(long v) : q_(v) {}  // NOLINT(implicit)
    Rational(long num, long den);
    explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

    static Rational parse(std::string_view text);  // "3", "-3/2", "1.25"

    const mpq_class& raw() const { return q_; }
    std::string numerator_str() const { return q_.get_num().get_str(); }
    std::string denominator_str() const { return q_.get_den().get_str(); }
    bool is_integer() const { return q_.get_den() == 1; }
    bool is_zero() const { return sgn(q_) == 0; }
    int sign() const { return sgn(q_); }
    double to_double() const { return q_.get_d(); }
    std::string str() const;  // integer or "n/d"

    Rational operator-() const { return Rational(mpq_class(-q_)); }
    Rational abs() const { return Rational(mpq_class(::abs(q_))); }
    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ + b.q_)); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ - b.q_)); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ * b.q_)); }
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    // floor(this / unit) for a positive unit; used to map times onto the ruler.
    long floor_div(const Rational& unit) const;
    std::size_t hash() const;

private:
    mpq_class q_;
};

// Largest d such that every value is an integer multiple of d. Throws on all-zero input.
Rational gcd_rationals(const std::vector<Rational>& values);

}  // namespace dmtl

template <>
struct std::hash<dmtl::Rational> {
    std::size_t operator()(const dmtl::Rational& r) const { return r.hash(); }
};
