#include "dmtl/evaluation.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dmtl {

namespace {

IntervalList map_each(const IntervalList& m, const Interval& range, IntervalOp op) {
    IntervalList out;
    out.reserve(m.size());
    for (const auto& t : m) {
        Interval r = interval_op(op, t, range);
        if (!r.is_empty()) out.push_back(std::move(r));
    }
    return coalesce(std::move(out));
}

// The strictly positive part of an operator range.
Interval positive_part(const Interval& range) {
    return intersect(range, Interval::normalize(Rational(0), Bound::pos_inf(), true, true));
}

bool ends_before(const Interval& a, const Interval& b) {
    auto c = a.right() <=> b.right();
    if (c != 0) return c < 0;
    return a.right_open() && !b.right_open();
}

}  // namespace

IntervalList diamond_minus(const IntervalList& m, const Interval& range) { return map_each(m, range, IntervalOp::Plus); }
IntervalList diamond_plus(const IntervalList& m, const Interval& range) { return map_each(m, range, IntervalOp::Minus); }
IntervalList box_minus(const IntervalList& m, const Interval& range) {
    return map_each(m, range, IntervalOp::CirclePlus);
}
IntervalList box_plus(const IntervalList& m, const Interval& range) {
    return map_each(m, range, IntervalOp::CircleMinus);
}

IntervalList since(const IntervalList& m1, const IntervalList& m2, const Interval& range) {
    IntervalList out;
    if (range.contains(Rational(0))) out = m2;
    Interval pos = positive_part(range);
    if (!pos.is_empty()) {
        for (const auto& i1 : m1) {
            // Witnesses t' with (t', t) inside i1: t' in [i1-, i1+), and t <= i1+.
            Interval window = Interval::normalize(i1.left(), i1.right(), false, true);
            Interval cap = Interval::normalize(Bound::neg_inf(), i1.right(), true, false);
            for (const auto& i2 : m2) {
                Interval a = intersect(i2, window);
                if (a.is_empty()) continue;
                out.push_back(intersect(interval_op(IntervalOp::Plus, a, pos), cap));
            }
        }
    }
    return coalesce(std::move(out));
}

IntervalList until(const IntervalList& m1, const IntervalList& m2, const Interval& range) {
    IntervalList out;
    if (range.contains(Rational(0))) out = m2;
    Interval pos = positive_part(range);
    if (!pos.is_empty()) {
        for (const auto& i1 : m1) {
            Interval window = Interval::normalize(i1.left(), i1.right(), true, false);
            Interval cap = Interval::normalize(i1.left(), Bound::pos_inf(), false, true);
            for (const auto& i2 : m2) {
                Interval a = intersect(i2, window);
                if (a.is_empty()) continue;
                out.push_back(intersect(interval_op(IntervalOp::Minus, a, pos), cap));
            }
        }
    }
    return coalesce(std::move(out));
}

IntervalList apply_operator(const MetricAtom& m, const FactStore& store) {
    switch (m.op()) {
        case Op::Top: return {Interval::all()};
        case Op::Bottom: return store.bottom();
        case Op::Rel: {
            const IntervalList* l = store.find(m.atom());
            return l ? *l : IntervalList{};
        }
        case Op::DiamondMinus: return diamond_minus(apply_operator(m.sub(), store), m.range());
        case Op::DiamondPlus: return diamond_plus(apply_operator(m.sub(), store), m.range());
        case Op::BoxMinus: return box_minus(apply_operator(m.sub(), store), m.range());
        case Op::BoxPlus: return box_plus(apply_operator(m.sub(), store), m.range());
        case Op::Since: return since(apply_operator(m.lhs(), store), apply_operator(m.rhs(), store), m.range());
        case Op::Until: return until(apply_operator(m.lhs(), store), apply_operator(m.rhs(), store), m.range());
    }
    throw std::logic_error("unknown operator");
}

IntervalList merge_intervals(const std::vector<IntervalList>& lists) {
    if (lists.empty()) return {Interval::all()};
    if (lists.size() == 1) return lists[0];
    for (const auto& l : lists)
        if (l.empty()) return {};
    std::vector<std::size_t> cur(lists.size(), 0);
    IntervalList out;
    while (true) {
        Interval acc = lists[0][cur[0]];
        std::size_t first = 0;
        for (std::size_t i = 1; i < lists.size(); ++i) {
            const Interval& x = lists[i][cur[i]];
            acc = intersect(acc, x);
            if (ends_before(x, lists[first][cur[first]])) first = i;
        }
        if (!acc.is_empty()) out.push_back(acc);
        Interval earliest = lists[first][cur[first]];
        bool done = false;
        for (std::size_t i = 0; i < lists.size(); ++i) {
            const Interval& x = lists[i][cur[i]];
            if (!ends_before(earliest, x) && !ends_before(x, earliest)) {
                if (++cur[i] == lists[i].size()) done = true;
            }
        }
        if (done) break;
    }
    return coalesce(std::move(out));
}

Derivation reverse_head(const MetricAtom& head, const Interval& interval) {
    switch (head.op()) {
        case Op::Rel: return Derivation{false, head.atom(), interval};
        case Op::Bottom: return Derivation{true, {}, interval};
        case Op::BoxMinus: return reverse_head(head.sub(), interval_op(IntervalOp::Minus, interval, head.range()));
        case Op::BoxPlus: return reverse_head(head.sub(), interval_op(IntervalOp::Plus, interval, head.range()));
        default: throw std::invalid_argument("forbidden operator in rule head: " + head.str());
    }
}

namespace {

struct RuleJoin {
    const Rule& rule;
    const FactStore& store;
    const std::vector<std::string>* domain;
    std::vector<RelationalAtom> required;
    std::vector<std::string> free_vars;
    std::vector<std::string> own_domain;
    std::vector<Derivation> out;

    const std::vector<std::string>& dom() {
        if (domain) return *domain;
        if (own_domain.empty()) {
            std::set<std::string> c = Program{{rule}}.constants();
            store.for_each([&](const RelationalAtom& a, const IntervalList&) {
                for (const auto& t : a.args) c.insert(t.name);
            });
            own_domain.assign(c.begin(), c.end());
        }
        return own_domain;
    }

    void emit(const Substitution& s) {
        std::vector<IntervalList> parts;
        parts.reserve(rule.body.size());
        for (const auto& lit : rule.body) {
            if (lit.op() == Op::Top) continue;
            parts.push_back(apply_operator(dmtl::apply(lit, s), store));
            if (parts.back().empty()) return;
        }
        IntervalList t = merge_intervals(parts);
        if (t.empty()) return;
        MetricAtom head = dmtl::apply(rule.head, s);
        for (const auto& iv : t) {
            Derivation d = reverse_head(head, iv);
            if (!d.interval.is_empty()) out.push_back(std::move(d));
        }
    }

    void bind_free(std::size_t k, Substitution& s) {
        if (k == free_vars.size()) {
            emit(s);
            return;
        }
        if (s.count(free_vars[k])) {
            bind_free(k + 1, s);
            return;
        }
        for (const auto& c : dom()) {
            s[free_vars[k]] = c;
            bind_free(k + 1, s);
        }
        s.erase(free_vars[k]);
    }

    void join(std::size_t k, const Substitution& s) {
        if (k == required.size()) {
            Substitution t = s;
            bind_free(0, t);
            return;
        }
        store.match(required[k], s, [&](const Substitution& ext, const IntervalList&) { join(k + 1, ext); });
    }
};

}  // namespace

std::vector<Derivation> evaluate_rule(const Rule& rule, const FactStore& store, const std::vector<std::string>* domain) {
    RuleJoin j{rule, store, domain, {}, {}, {}, {}};
    for (const auto& lit : rule.body) collect_required_atoms(lit, j.required);
    std::stable_partition(j.required.begin(), j.required.end(), [](const RelationalAtom& a) { return a.ground(); });
    std::set<std::string> bound;
    for (const auto& a : j.required)
        for (const auto& t : a.args)
            if (t.is_variable()) bound.insert(t.name);
    for (const auto& v : rule.variables())
        if (!bound.count(v)) j.free_vars.push_back(v);
    j.join(0, {});
    return std::move(j.out);
}

}  // namespace dmtl
