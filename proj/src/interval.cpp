#include "dmtl/interval.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace dmtl {

const Rational& Bound::value() const {
    if (!finite()) throw std::logic_error("value of an infinite bound");
    return value_;
}

std::string Bound::str() const {
    switch (kind_) {
        case Kind::NegInf: return "-inf";
        case Kind::PosInf: return "+inf";
        default: return value_.str();
    }
}

Bound operator+(const Bound& a, const Bound& b) {
    if (a.infinite()) return a;
    if (b.infinite()) return b;
    return Bound(a.value_ + b.value_);
}

Bound Bound::operator-() const {
    if (kind_ == Kind::NegInf) return pos_inf();
    if (kind_ == Kind::PosInf) return neg_inf();
    return Bound(-value_);
}

Bound operator-(const Bound& a, const Bound& b) {
    if (a.infinite()) return a;
    if (b.infinite()) return -b;
    return Bound(a.value_ - b.value_);
}

bool operator==(const Bound& a, const Bound& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != Bound::Kind::Finite || a.value_ == b.value_;
}

std::strong_ordering operator<=>(const Bound& a, const Bound& b) {
    if (a.kind_ != b.kind_ || a.kind_ != Bound::Kind::Finite) {
        auto rank = [](Bound::Kind k) { return k == Bound::Kind::NegInf ? 0 : k == Bound::Kind::Finite ? 1 : 2; };
        if (rank(a.kind_) != rank(b.kind_)) return rank(a.kind_) <=> rank(b.kind_);
        return std::strong_ordering::equal;
    }
    return a.value_ <=> b.value_;
}

Interval Interval::normalize(Bound left, Bound right, bool left_open, bool right_open) {
    if (left.kind() == Bound::Kind::PosInf || right.kind() == Bound::Kind::NegInf) return Interval();
    if (left.infinite()) left_open = true;
    if (right.infinite()) right_open = true;
    auto c = left <=> right;
    if (c > 0) return Interval();
    if (c == 0 && (left_open || right_open)) return Interval();
    Interval i;
    i.empty_ = false;
    i.left_ = std::move(left);
    i.right_ = std::move(right);
    i.left_open_ = left_open;
    i.right_open_ = right_open;
    return i;
}

namespace {
std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

Bound parse_bound(const std::string& s, bool is_left, bool open) {
    if (s == "-inf" || s == "+inf" || s == "inf") {
        bool neg = s == "-inf";
        if (neg != is_left) throw std::invalid_argument("infinite bound on the wrong side: " + s);
        if (!open) throw std::invalid_argument("infinite bound requires an open bracket");
        return neg ? Bound::neg_inf() : Bound::pos_inf();
    }
    return Bound(Rational::parse(s));
}
}  // namespace

Interval Interval::parse(std::string_view text) {
    std::string s = trim(text);
    if (s.size() < 5) throw std::invalid_argument("bad interval: " + s);
    char lb = s.front(), rb = s.back();
    if ((lb != '[' && lb != '(') || (rb != ']' && rb != ')')) throw std::invalid_argument("bad interval brackets: " + s);
    auto comma = s.find(',');
    if (comma == std::string::npos || s.find(',', comma + 1) != std::string::npos)
        throw std::invalid_argument("bad interval: " + s);
    bool lo = lb == '(', ro = rb == ')';
    Bound l = parse_bound(trim(std::string_view(s).substr(1, comma - 1)), true, lo);
    Bound r = parse_bound(trim(std::string_view(s).substr(comma + 1, s.size() - comma - 2)), false, ro);
    return normalize(std::move(l), std::move(r), lo, ro);
}

bool Interval::contains(const Rational& t) const {
    if (empty_) return false;
    Bound b(t);
    auto cl = left_ <=> b, cr = b <=> right_;
    if (cl > 0 || (cl == 0 && left_open_)) return false;
    if (cr > 0 || (cr == 0 && right_open_)) return false;
    return true;
}

std::string Interval::str() const {
    if (empty_) return "empty";
    return std::string(left_open_ ? "(" : "[") + left_.str() + "," + right_.str() + (right_open_ ? ")" : "]");
}

bool operator==(const Interval& a, const Interval& b) {
    if (a.empty_ || b.empty_) return a.empty_ == b.empty_;
    return a.left_ == b.left_ && a.right_ == b.right_ && a.left_open_ == b.left_open_ && a.right_open_ == b.right_open_;
}

std::strong_ordering operator<=>(const Interval& a, const Interval& b) {
    if (a.empty_ || b.empty_) return b.empty_ <=> a.empty_;
    if (auto c = a.left_ <=> b.left_; c != 0) return c;
    if (a.left_open_ != b.left_open_) return a.left_open_ <=> b.left_open_;
    if (auto c = a.right_ <=> b.right_; c != 0) return c;
    return a.right_open_ <=> b.right_open_;
}

Interval interval_op(IntervalOp kind, const Interval& a, const Interval& b) {
    if (a.is_empty() || (kind != IntervalOp::Closure && b.is_empty()))
        throw std::invalid_argument("interval_op on an empty interval");
    switch (kind) {
        case IntervalOp::Closure:
            return Interval::normalize(a.left(), a.right(), false, false);
        case IntervalOp::Minus:
            return Interval::normalize(a.left() - b.right(), a.right() - b.left(), a.left_open() || b.right_open(),
                                       a.right_open() || b.left_open());
        case IntervalOp::CircleMinus:
            return Interval::normalize(a.left() - b.left(), a.right() - b.right(), a.left_open() && !b.left_open(),
                                       a.right_open() && !b.right_open());
        case IntervalOp::Plus:
            return Interval::normalize(a.left() + b.left(), a.right() + b.right(), a.left_open() || b.left_open(),
                                       a.right_open() || b.right_open());
        case IntervalOp::CirclePlus:
            return Interval::normalize(a.left() + b.right(), a.right() + b.left(), a.left_open() && !b.right_open(),
                                       a.right_open() && !b.left_open());
    }
    throw std::logic_error("unknown interval op");
}

Interval intersect(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval();
    Bound l, r;
    bool lo, ro;
    auto cl = a.left() <=> b.left();
    if (cl == 0) {
        l = a.left();
        lo = a.left_open() || b.left_open();
    } else {
        const Interval& w = cl > 0 ? a : b;
        l = w.left();
        lo = w.left_open();
    }
    auto cr = a.right() <=> b.right();
    if (cr == 0) {
        r = a.right();
        ro = a.right_open() || b.right_open();
    } else {
        const Interval& w = cr < 0 ? a : b;
        r = w.right();
        ro = w.right_open();
    }
    return Interval::normalize(std::move(l), std::move(r), lo, ro);
}

std::optional<Interval> union_if_coalescable(const Interval& x, const Interval& y) {
    if (x.is_empty()) return y;
    if (y.is_empty()) return x;
    const Interval& a = (x <=> y) <= 0 ? x : y;
    const Interval& b = (x <=> y) <= 0 ? y : x;
    auto c = a.right() <=> b.left();
    if (c < 0 || (c == 0 && a.right_open() && b.left_open())) return std::nullopt;
    bool lo = a.left() == b.left() ? (a.left_open() && b.left_open()) : a.left_open();
    auto cr = a.right() <=> b.right();
    const Bound& r = cr >= 0 ? a.right() : b.right();
    bool ro = cr == 0 ? (a.right_open() && b.right_open()) : (cr > 0 ? a.right_open() : b.right_open());
    return Interval::normalize(a.left(), r, lo, ro);
}

bool subset(const Interval& a, const Interval& b) {
    if (a.is_empty()) return true;
    if (b.is_empty()) return false;
    auto cl = b.left() <=> a.left();
    if (cl > 0 || (cl == 0 && b.left_open() && !a.left_open())) return false;
    auto cr = a.right() <=> b.right();
    if (cr > 0 || (cr == 0 && b.right_open() && !a.right_open())) return false;
    return true;
}

IntervalList coalesce(IntervalList list) {
    std::erase_if(list, [](const Interval& i) { return i.is_empty(); });
    if (list.size() < 2) return list;
    std::sort(list.begin(), list.end());
    IntervalList out;
    out.reserve(list.size());
    out.push_back(list[0]);
    for (size_t i = 1; i < list.size(); ++i) {
        if (auto u = union_if_coalescable(out.back(), list[i]))
            out.back() = *u;
        else
            out.push_back(list[i]);
    }
    return out;
}

}  // namespace dmtl
