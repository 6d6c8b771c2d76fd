#include "dmtl/rational.hpp"

#include <cctype>
#include <functional>
#include <stdexcept>

namespace dmtl {

Rational::Rational(long num, long den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    return Rational(mpq_class(a.q_ / b.q_));
}

namespace {
bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}
}  // namespace

Rational Rational::parse(std::string_view text) {
    std::string_view s = text;
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s.remove_prefix(1);
    }
    mpq_class q;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto n = s.substr(0, slash), d = s.substr(slash + 1);
        if (!all_digits(n) || !all_digits(d)) throw std::invalid_argument("bad rational: " + std::string(text));
        mpz_class den{std::string(d)};
        if (den == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
        q = mpq_class(mpz_class(std::string(n)), den);
    } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
        auto i = s.substr(0, dot), f = s.substr(dot + 1);
        if ((!i.empty() && !all_digits(i)) || !all_digits(f) || (i.empty() && f.empty()))
            throw std::invalid_argument("bad rational: " + std::string(text));
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, f.size());
        mpz_class whole(i.empty() ? std::string("0") : std::string(i));
        q = mpq_class(whole * scale + mpz_class(std::string(f)), scale);
    } else {
        if (!all_digits(s)) throw std::invalid_argument("bad rational: " + std::string(text));
        q = mpq_class(mpz_class(std::string(s)));
    }
    q.canonicalize();
    if (neg) q = -q;
    return Rational(q);
}

std::string Rational::str() const {
    if (is_integer()) return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

long Rational::floor_div(const Rational& unit) const {
    mpq_class r = q_ / unit.q_;
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    if (!f.fits_slong_p()) throw std::overflow_error("time index out of range");
    return f.get_si();
}

std::size_t Rational::hash() const {
    std::size_t h1 = mpz_get_ui(q_.get_num_mpz_t()) ^ (mpz_sgn(q_.get_num_mpz_t()) < 0 ? 0x9e3779b97f4a7c15ULL : 0);
    std::size_t h2 = mpz_get_ui(q_.get_den_mpz_t());
    return h1 * 1000003u ^ h2;
}

Rational gcd_rationals(const std::vector<Rational>& values) {
    mpz_class g = 0, l = 1;
    for (const auto& v : values) {
        if (v.sign() < 0) throw std::invalid_argument("gcd_rationals expects non-negative values");
        if (v.is_zero()) continue;
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.raw().get_num_mpz_t());
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.raw().get_den_mpz_t());
    }
    if (g == 0) throw std::invalid_argument("gcd_rationals needs a nonzero value");
    return Rational(mpq_class(g, l));
}

}  // namespace dmtl
