#include "random_instances.hpp"

#include <set>

namespace testgen {

using namespace dmtl;

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Interval random_range(Rng& rng, const Params& p) {
    while (true) {
        int a = pick(rng, 0, p.max_bound), b = pick(rng, a, p.max_bound);
        bool lo = pick(rng, 0, 3) == 0, ro = pick(rng, 0, 3) == 0;
        Bound right = (p.unbounded_ops && pick(rng, 0, 4) == 0) ? Bound::pos_inf() : Bound(Rational(b));
        Interval i = Interval::normalize(Rational(a), right, lo, ro);
        if (!i.is_empty()) return i;
    }
}

Interval random_fact_interval(Rng& rng, const Params& p) {
    while (true) {
        int a = pick(rng, 0, p.max_endpoint), b = pick(rng, a, std::min(p.max_endpoint, a + pick(rng, 0, 8)));
        bool lo = pick(rng, 0, 2) == 0, ro = pick(rng, 0, 2) == 0;
        Interval i = Interval::normalize(Rational(a), Rational(b), lo, ro);
        if (!i.is_empty()) return i;
    }
}

RelationalAtom random_atom(Rng& rng, const Params& p, int pred, bool ground) {
    RelationalAtom a{"P" + std::to_string(pred), {}};
    if (p.unary) {
        if (ground || pick(rng, 0, 3) == 0)
            a.args.push_back(Term::constant(std::string(1, static_cast<char>('a' + pick(rng, 0, p.constants - 1)))));
        else
            a.args.push_back(Term::variable("X"));
    }
    return a;
}

MetricAtom random_literal(Rng& rng, const Params& p, int max_pred, int depth, bool ground) {
    int choice = depth <= 0 ? 0 : pick(rng, 0, p.since_until ? 7 : 5);
    switch (choice) {
        case 0:
        case 1: return MetricAtom::rel(random_atom(rng, p, pick(rng, 0, max_pred), ground));
        case 2: return MetricAtom::unary(Op::DiamondMinus, random_range(rng, p), random_literal(rng, p, max_pred, depth - 1, ground));
        case 3: return MetricAtom::unary(Op::DiamondPlus, random_range(rng, p), random_literal(rng, p, max_pred, depth - 1, ground));
        case 4: return MetricAtom::unary(Op::BoxMinus, random_range(rng, p), random_literal(rng, p, max_pred, depth - 1, ground));
        case 5: return MetricAtom::unary(Op::BoxPlus, random_range(rng, p), random_literal(rng, p, max_pred, depth - 1, ground));
        case 6: {
            MetricAtom l = pick(rng, 0, 4) == 0 ? MetricAtom::top() : random_literal(rng, p, max_pred, depth - 1, ground);
            return MetricAtom::binary(Op::Since, random_range(rng, p), l, random_literal(rng, p, max_pred, depth - 1, ground));
        }
        default: {
            MetricAtom l = pick(rng, 0, 4) == 0 ? MetricAtom::top() : random_literal(rng, p, max_pred, depth - 1, ground);
            return MetricAtom::binary(Op::Until, random_range(rng, p), l, random_literal(rng, p, max_pred, depth - 1, ground));
        }
    }
}

Program random_program(Rng& rng, const Params& p) {
    Program prog;
    int n = pick(rng, 1, p.max_rules);
    for (int i = 0; i < n; ++i) {
        int head_pred = pick(rng, 1, p.predicates - 1);
        int body_max = p.recursive ? p.predicates - 1 : head_pred - 1;
        Rule r;
        int nb = pick(rng, 1, p.max_body);
        for (int j = 0; j < nb; ++j) r.body.push_back(random_literal(rng, p, body_max, pick(rng, 0, p.max_depth), false));
        std::set<std::string> vars;
        for (const auto& b : r.body) collect_variables(b, vars);
        RelationalAtom h{"P" + std::to_string(head_pred), {}};
        if (p.unary) h.args.push_back(vars.count("X") ? Term::variable("X") : Term::constant("a"));
        r.head = MetricAtom::rel(h);
        if (p.head_boxes && pick(rng, 0, 2) == 0)
            r.head = MetricAtom::unary(pick(rng, 0, 1) ? Op::BoxMinus : Op::BoxPlus, random_range(rng, p), r.head);
        prog.rules.push_back(std::move(r));
    }
    return prog;
}

std::vector<Fact> random_facts(Rng& rng, const Params& p) {
    std::vector<Fact> out;
    int n = pick(rng, 1, p.max_facts);
    for (int i = 0; i < n; ++i) out.push_back(Fact{random_atom(rng, p, pick(rng, 0, p.predicates - 1), true), random_fact_interval(rng, p)});
    return out;
}

}  // namespace testgen
