#include "dmtl/automata.hpp"

#include "dmtl/evaluation.hpp"
#include "dmtl/materialisation.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace dmtl {

ReductionOutput entail_to_inconsist(const Program& p, const std::vector<Fact>& d, const Fact& query) {
    const Interval& q = query.interval;
    if (q.is_empty()) throw std::invalid_argument("empty query interval");
    if (q.left().infinite() && q.right().infinite())
        throw std::invalid_argument("query interval unbounded on both sides is not supported");
    if (!query.atom.ground()) throw std::invalid_argument("query atom must be ground");

    std::set<std::string> used;
    for (const auto& r : p.rules) {
        collect_predicates(r.head, used);
        for (const auto& b : r.body) collect_predicates(b, used);
    }
    for (const auto& f : d) used.insert(f.atom.predicate);
    used.insert(query.atom.predicate);
    std::string fresh = "QueryAnchor";
    for (int i = 1; used.count(fresh); ++i) fresh = "QueryAnchor" + std::to_string(i);

    MetricAtom m = MetricAtom::rel(query.atom);
    MetricAtom check;
    Rational anchor;
    if (q.bounded()) {
        anchor = q.right().value();
        check = q.punctual() ? m
                             : MetricAtom::unary(Op::BoxMinus,
                                                 Interval::normalize(Rational(0), q.right().value() - q.left().value(),
                                                                     q.right_open(), q.left_open()),
                                                 m);
    } else if (q.right().infinite()) {
        anchor = q.left().value();
        check = MetricAtom::unary(Op::BoxPlus, Interval::normalize(Rational(0), Bound::pos_inf(), q.left_open(), true), m);
    } else {
        anchor = q.right().value();
        check = MetricAtom::unary(Op::BoxMinus, Interval::normalize(Rational(0), Bound::pos_inf(), q.right_open(), true), m);
    }

    RelationalAtom anchor_atom{fresh, {}};
    ReductionOutput out{p, d, fresh};
    out.program.rules.push_back(Rule{MetricAtom::bottom(), {MetricAtom::rel(anchor_atom), check}, 0});
    out.dataset.push_back(Fact{anchor_atom, Interval::point(anchor)});
    return out;
}

namespace {

void for_each_range(const MetricAtom& m, const std::function<void(const Interval&)>& f) {
    if (is_unary(m.op())) {
        f(m.range());
        for_each_range(m.sub(), f);
    } else if (is_binary(m.op())) {
        f(m.range());
        for_each_range(m.lhs(), f);
        for_each_range(m.rhs(), f);
    }
}

long to_long(const Rational& r) { return r.raw().get_num().get_si(); }

}  // namespace

RulerGrid RulerGrid::of(const Program& p, const std::vector<Fact>& d) {
    RulerGrid g;
    std::vector<Rational> values;
    auto note = [&](const Bound& b, Rational& biggest) {
        if (!b.finite()) return;
        Rational a = b.value().abs();
        if (!a.is_zero()) values.push_back(a);
        if (a > biggest) biggest = a;
    };
    for (const auto& f : d) {
        note(f.interval.left(), g.x);
        note(f.interval.right(), g.x);
    }
    for (const auto& r : p.rules) {
        auto visit = [&](const Interval& i) {
            note(i.left(), g.z);
            note(i.right(), g.z);
        };
        for_each_range(r.head, visit);
        for (const auto& b : r.body) for_each_range(b, visit);
    }
    g.d = values.empty() ? Rational(1) : gcd_rationals(values);
    g.span = Interval::closed(Rational(0) - (g.x + g.z), g.x + g.z);
    return g;
}

Interval RulerGrid::ruler_interval(long k) const {
    Rational u = d / Rational(2);
    if (k % 2 == 0) return Interval::point(Rational(k) * u);
    return Interval::normalize(Rational(k - 1) * u, Rational(k + 1) * u, true, true);
}

long RulerGrid::index_of(const Rational& t) const {
    Rational q = t / (d / Rational(2));
    if (!q.is_integer() || !q.raw().get_num().fits_slong_p() || to_long(q) % 2 != 0)
        throw std::invalid_argument("time point " + t.str() + " is not on the ruler");
    return to_long(q);
}

std::vector<MetricAtom> literal_universe(const Program& p, const std::vector<Fact>& d) {
    std::set<std::string> consts = p.constants();
    for (const auto& c : dataset_constants(d)) consts.insert(c);
    std::set<MetricAtom> out{MetricAtom::top()};
    std::function<void(const MetricAtom&)> add = [&](const MetricAtom& m) {
        if (m.op() == Op::Bottom) return;
        out.insert(m);
        if (is_unary(m.op())) add(m.sub());
        if (is_binary(m.op())) {
            add(m.lhs());
            add(m.rhs());
        }
    };
    for (const auto& r : ground(p, consts)) {
        add(r.head);
        for (const auto& b : r.body) add(b);
    }
    for (const auto& f : d) {
        MetricAtom a = MetricAtom::rel(f.atom);
        for (Op op : {Op::BoxMinus, Op::BoxPlus})
            for (bool open : {false, true})
                out.insert(MetricAtom::unary(op, Interval::normalize(Rational(0), Bound::pos_inf(), open, true), a));
    }
    return {out.begin(), out.end()};
}

namespace {

struct Bits {
    std::vector<std::uint64_t> w;
    Bits() = default;
    explicit Bits(std::size_t n) : w((n + 63) / 64, 0) {}
    bool test(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1U; }
    void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    bool operator==(const Bits&) const = default;
    Bits& operator|=(const Bits& o) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] |= o.w[i];
        return *this;
    }
    bool intersects(const Bits& o) const {
        for (std::size_t i = 0; i < w.size(); ++i)
            if (w[i] & o.w[i]) return true;
        return false;
    }
};

std::size_t mix_hash(std::size_t h, std::uint64_t v) {
    return h ^ (static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

struct BitsHash {
    std::size_t operator()(const Bits& b) const {
        std::size_t h = 0;
        for (auto x : b.w) h = mix_hash(h, x);
        return h;
    }
};

struct StateKey {
    std::vector<std::uint32_t> ids;
    long tag;  // parity of the first position, or the ruler index during the span scan
    bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const {
        std::size_t h = static_cast<std::size_t>(k.tag);
        for (auto x : k.ids) h = mix_hash(h, x);
        return h;
    }
};

// Kleene values.
using V = std::uint8_t;
constexpr V kF = 0, kT = 1, kU = 2;
V and3(V a, V b) { return (a == kF || b == kF) ? kF : (a == kU || b == kU) ? kU : kT; }
V or3(V a, V b) { return (a == kT || b == kT) ? kT : (a == kU || b == kU) ? kU : kF; }

int parity(long k) { return static_cast<int>(k & 1); }

// Sentinels for the outside-the-span bounds of a tape.
constexpr long kNone = std::numeric_limits<long>::min();
constexpr long kAll = std::numeric_limits<long>::max();

// Ruler indices whose interval meets the unit-time interval ⟨lo, hi⟩.
std::vector<long> meeting(long lo, long hi, bool lo_open, bool hi_open) {
    std::vector<long> out;
    for (long m = lo - 1; m <= hi + 1; ++m) {
        bool meets = parity(m) == 0 ? (m > lo || (m == lo && !lo_open)) && (m < hi || (m == hi && !hi_open))
                                    : (m - 1 < hi && m + 1 > lo);
        if (meets) out.push_back(m);
    }
    return out;
}

enum class Side { None, Past, Future };

struct Lit {
    MetricAtom m;
    Op op = Op::Top;
    int a = -1, b = -1;
    Side side = Side::None;
    bool unbounded = false;
    bool zero_in_range = false;
    std::array<std::vector<long>, 2> touch;  // offsets met by the (base) range, per parity
    std::array<long, 2> smin{0, 0}, smax{0, 0};
    // An obligation entry records that a rule derived the box `sem` here. Only obligations and boxes
    // nested inside rule heads push their operand onto other positions, so atoms are never true merely
    // because a guessed body box asked for them.
    int sem = -1;
    bool pushes = false;
    bool obligation() const { return sem >= 0; }
};

// A guessed atom, or a guessed unbounded obligation, must be pushed there by some derived box
// or derived on the spot. src lists (pushing literal, source offset) pairs per parity of the position.
struct Justified {
    int item = -1;
    std::array<std::vector<std::pair<int, long>>, 2> src;
    std::array<long, 2> jmin{0, 0}, jmax{0, 0};
};

struct GRule {
    std::vector<int> body;
    int head = -1;  // semantic head literal, -1 for ⊥
    int fire = -1;  // bit set when the rule fires: the atom, or the obligation of a box head
};

}  // namespace

struct ConsistencyChecker::Impl {
    AutomataOptions opts;
    AutomataStats stats;
    RulerGrid grid;
    Rational unit;
    std::vector<Fact> facts;
    std::vector<Lit> lits;
    std::vector<MetricAtom> tracked_atoms;
    std::unordered_map<MetricAtom, int> index;
    std::vector<GRule> rules;
    std::vector<int> boxes, diamonds, pushers, computable_order;
    std::vector<Justified> justified;
    std::unordered_map<MetricAtom, int> obligation_index;
    std::array<std::vector<int>, 2> conds;  // unbounded literals by direction (0 left, 1 right)
    Bits guess_right, guess_left;           // atoms a not-yet-scanned head may force
    std::array<Bits, 2> maybe_outside;      // atoms that may hold left (0) or right (1) of the span
    Bits forced_left, forced_right;
    std::vector<Bits> forced_span;
    long R = 2, W = 3, K = 3;

    std::vector<Bits> labels;
    std::unordered_map<Bits, std::uint32_t, BitsHash> label_ids;

    std::unordered_set<StateKey, StateKeyHash> span_failed;
    std::array<std::unordered_map<StateKey, std::uint32_t, StateKeyHash>, 2> state_ids;
    std::array<std::vector<StateKey>, 2> states;
    std::array<std::vector<char>, 2> verdict;  // 0 unknown, 1 accepting run exists, 2 none
    std::ostringstream dot;
    std::size_t dot_edges = 0;

    Impl(const Program& p, const std::vector<Fact>& d, AutomataOptions o, const FactStore* lower);

    std::size_t n() const { return lits.size(); }
    // Labels also carry one bit per justified item telling whether it was derived in place.
    std::size_t nbits() const { return lits.size() + justified.size(); }

    int add_literal(const MetricAtom& m) {
        if (auto it = index.find(m); it != index.end()) return it->second;
        Lit l;
        l.m = m;
        l.op = m.op();
        if (is_unary(m.op())) l.a = add_literal(m.sub());
        if (is_binary(m.op())) {
            l.a = add_literal(m.lhs());
            l.b = add_literal(m.rhs());
        }
        int id = static_cast<int>(lits.size());
        lits.push_back(std::move(l));
        index.emplace(m, id);
        return id;
    }

    long units(const Rational& t) const {
        Rational q = t / unit;
        if (!q.is_integer()) throw std::logic_error("value off the ruler: " + t.str());
        return to_long(q);
    }

    void prepare_literal(Lit& l) {
        if (!is_unary(l.op) && !is_binary(l.op)) return;
        const Interval& r = l.m.range();
        l.side = is_past(l.op) ? Side::Past : Side::Future;
        l.unbounded = r.right().infinite();
        l.zero_in_range = r.contains(Rational(0));
        long lo = units(r.left().value());
        long hi = l.unbounded ? lo + 2 : units(r.right().value());
        bool lo_open = r.left_open(), hi_open = l.unbounded ? false : r.right_open();
        for (int p = 0; p < 2; ++p) {
            std::vector<long> ms = l.side == Side::Future ? meeting(p + lo, p + hi, lo_open, hi_open)
                                                          : meeting(p - hi, p - lo, hi_open, lo_open);
            for (long m : ms) l.touch[p].push_back(m - p);
        }
    }

    // Value of literal i at ruler index k. get(pos, lit) yields a Kleene value. With base_only the
    // recurrence term of an unbounded operator is left out.
    template <class Get>
    V eval(int i, long k, const Get& get, bool base_only = false) const {
        const Lit& l = lits[i];
        const auto& touch = l.touch[parity(k)];
        long step = l.side == Side::Past ? -2 : 2;
        switch (l.op) {
            case Op::Top:
                return kT;
            case Op::Bottom:
                return kF;
            case Op::Rel:
                return get(k, i);
            case Op::DiamondMinus:
            case Op::DiamondPlus: {
                V r = kF;
                for (long o : touch) r = or3(r, get(k + o, l.a));
                if (l.unbounded && !base_only) r = or3(r, get(k + step, i));
                return r;
            }
            case Op::BoxMinus:
            case Op::BoxPlus: {
                V r = kT;
                for (long o : touch) r = and3(r, get(k + o, l.a));
                if (l.unbounded && !base_only) r = and3(r, get(k + step, i));
                return r;
            }
            case Op::Since:
            case Op::Until: {
                long dir = l.op == Op::Since ? -1 : 1;
                V r = kF;
                for (long o : touch) {
                    long j = k + o;
                    V term = get(j, l.b);
                    if (j == k) {
                        if (!l.zero_in_range) term = and3(term, get(k, l.a));
                    } else {
                        if (parity(j)) term = and3(term, get(j, l.a));
                        for (long m = k + dir; m != j; m += dir) term = and3(term, get(m, l.a));
                        if (parity(k)) term = and3(term, get(k, l.a));
                    }
                    r = or3(r, term);
                }
                if (l.unbounded && !base_only) {
                    V chain = and3(get(k + 2 * dir, i), and3(get(k + 2 * dir, l.a), get(k + dir, l.a)));
                    if (parity(k)) chain = and3(chain, get(k, l.a));
                    r = or3(r, chain);
                }
                return r;
            }
        }
        return kU;
    }

    const Bits& label(std::uint32_t id) const { return labels[id]; }

    std::uint32_t intern(const Bits& b) {
        auto [it, fresh] = label_ids.emplace(b, static_cast<std::uint32_t>(labels.size()));
        if (fresh) labels.push_back(b);
        return it->second;
    }

    std::string label_str(const Bits& b) const {
        std::string s = "{";
        bool first = true;
        for (std::size_t i = 0; i < n(); ++i) {
            if (!b.test(i) || lits[i].op == Op::Top || lits[i].obligation()) continue;
            if (!first) s += ", ";
            first = false;
            s += lits[i].m.str();
        }
        return s + "}";
    }

    void tick_span() {
        ++stats.span_expansions;
        poll();
    }
    void poll() const {
        if (opts.stop.stop_requested()) throw AutomataCancelled("automata search cancelled");
        if (opts.max_states && stats.span_expansions + stats.buchi_states > opts.max_states)
            throw AutomataLimit("automata state limit reached");
    }

    // A run segment: labels of consecutive positions [first, first + ids.size()).
    struct Tape {
        const Impl* self;
        long first;
        const std::vector<std::uint32_t>* ids;
        long known_lo, known_hi;  // outside this range positions are unknown
        long out_lo, out_hi;      // unknown positions below out_lo or above out_hi lie outside the span
        long cur_pos = 0;         // position whose label is under construction, if cur is set
        const Bits* cur = nullptr;
        V operator()(long pos, int lit) const {
            if (pos < known_lo || pos > known_hi) {
                int side = pos < known_lo && pos < out_lo ? 0 : pos > known_hi && pos > out_hi ? 1 : -1;
                if (side < 0) return kU;
                const Lit& l = self->lits[lit];
                if (l.op == Op::Rel) return self->maybe_outside[side].test(static_cast<std::size_t>(lit)) ? kU : kF;
                if (l.op == Op::Top) return kT;
                if (l.unbounded || l.obligation()) return kU;
                return self->eval(lit, pos, *this);
            }
            if (cur && pos == cur_pos) return cur->test(lit) ? kT : kF;
            long off = pos - first;
            if (off < 0 || off >= static_cast<long>(ids->size())) return kU;
            return self->label((*ids)[off]).test(lit) ? kT : kF;
        }
    };

    struct Gen {
        long pos;
        int dir;  // +1 appending on the right, -1 on the left
        long first;
        const std::vector<std::uint32_t>* ids;
        long known_lo, known_hi;  // including pos
        long out_lo, out_hi;
        bool left_unknown, right_unknown;
        const Bits* forced;
    };

    // Candidate labels for position g.pos, deduplicated, smallest guesses first.
    std::vector<std::uint32_t> letters(const Gen& g) {
        Bits need = *g.forced;
        Bits forbid(nbits());
        need.set(0);  // ⊤
        Tape tape{this, g.first, g.ids, g.known_lo, g.known_hi, g.out_lo, g.out_hi};
        auto known = [&](long pos, int lit) { return tape(pos, lit); };
        int par = parity(g.pos);

        long last = g.first + static_cast<long>(g.ids->size()) - 1;
        // Derived boxes already placed force their operand here.
        for (int bi : pushers) {
            const Lit& l = lits[bi];
            for (long k = g.first; k <= last; ++k) {
                if (known(k, bi) != kT) continue;
                for (long o : l.touch[parity(k)])
                    if (k + o == g.pos) need.set(l.a);
                if (l.unbounded && k + (l.side == Side::Past ? -2 : 2) == g.pos) need.set(bi);
            }
        }
        if (opts.monotone_pruning) {
            for (int bi : boxes) {
                const Lit& l = lits[bi];
                if (l.unbounded && known(g.pos - (l.side == Side::Past ? -2 : 2), bi) == kT) need.set(bi);
            }
        }
        if (opts.monotone_pruning) {
            for (int di : diamonds) {
                const Lit& l = lits[di];
                if (!l.unbounded) continue;
                long from = g.pos - (l.side == Side::Past ? -2 : 2);
                if (known(from, di) == kF) forbid.set(di);
            }
        }

        // Literals that cannot be computed here are guessed.
        Bits guessed(nbits());
        std::vector<int> branch;
        for (std::size_t i = 0; i < n(); ++i) {
            const Lit& l = lits[i];
            bool guess;
            if (l.op == Op::Top) {
                guess = false;
            } else if (l.op == Op::Rel || l.obligation()) {
                guess = (g.right_unknown && guess_right.test(i)) || (g.left_unknown && guess_left.test(i));
                // beyond the span only atoms that may hold there are worth guessing
                if (l.op == Op::Rel && g.out_lo == kAll) guess = guess && maybe_outside[0].test(i);
                if (l.op == Op::Rel && g.out_hi == kNone) guess = guess && maybe_outside[1].test(i);
            } else {
                guess = g.pos + l.smin[par] < g.known_lo || g.pos + l.smax[par] > g.known_hi;
            }
            if (!guess) continue;
            guessed.set(i);
            if (!need.test(i) && !forbid.test(i)) branch.push_back(static_cast<int>(i));
        }
        if (branch.size() > 24) throw AutomataLimit("too many undetermined literals at one ruler interval");

        std::vector<std::uint32_t> out;
        std::unordered_set<std::uint32_t> seen;
        const std::uint64_t limit = std::uint64_t{1} << branch.size();
        for (std::size_t s = 0; s <= branch.size(); ++s) {
            std::uint64_t mask = (std::uint64_t{1} << s) - 1;
            while (mask < limit) {
                Bits chosen(nbits());
                for (std::size_t j = 0; j < branch.size(); ++j)
                    if (mask >> j & 1U) chosen.set(branch[j]);
                if (auto lab = close(g, tape, need, chosen, guessed, forbid)) {
                    std::uint32_t id = intern(*lab);
                    if (seen.insert(id).second) out.push_back(id);
                }
                if (s == 0) break;
                std::uint64_t c = mask & (~mask + 1), r = mask + c;
                mask = (((r ^ mask) >> 2) / c) | r;
            }
        }
        stats.letters += out.size();
        return out;
    }

    // Least label containing `need` that is closed under the rules and exact on computable literals.
    std::optional<Bits> close(const Gen& g, Tape tape, Bits base, const Bits& chosen, const Bits& guessed,
                              const Bits& forbid) const {
        Bits need = base;
        need |= chosen;
        Bits cur(nbits());
        tape.cur_pos = g.pos;
        tape.cur = &cur;
        int par = parity(g.pos);
        while (true) {
            cur = Bits(nbits());
            for (int i : computable_order) {
                const Lit& l = lits[i];
                bool v;
                if (l.op == Op::Top) v = true;
                else if (l.op == Op::Rel || l.obligation() || guessed.test(i)) v = need.test(i);
                else v = eval(i, g.pos, tape) == kT;
                if (v) cur.set(i);
            }
            bool changed = false;
            for (const auto& r : rules) {
                bool fire = std::all_of(r.body.begin(), r.body.end(), [&](int b) { return cur.test(b); });
                if (!fire) continue;
                if (r.head < 0) return std::nullopt;
                base.set(r.fire);
                if (!need.test(r.fire)) {
                    need.set(r.fire);
                    changed = true;
                }
            }
            for (int bi : pushers) {
                const Lit& l = lits[bi];
                if (!need.test(bi)) continue;
                if (l.obligation() && !need.test(l.sem)) {
                    need.set(l.sem);
                    changed = true;
                }
                if (std::find(l.touch[par].begin(), l.touch[par].end(), 0) != l.touch[par].end()) {
                    base.set(l.a);
                    if (!need.test(l.a)) {
                        need.set(l.a);
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (cur.intersects(forbid)) return std::nullopt;
        for (std::size_t i = 0; i < n(); ++i) {
            if (need.test(i) && !cur.test(i)) return std::nullopt;
            if (guessed.test(i) && lits[i].op != Op::Rel && !lits[i].obligation()) {
                V v = eval(static_cast<int>(i), g.pos, tape);
                if (v != kU && (v == kT) != cur.test(i)) return std::nullopt;
            }
        }
        for (std::size_t j = 0; j < justified.size(); ++j)
            if (base.test(static_cast<std::size_t>(justified[j].item))) cur.set(n() + j);
        return cur;
    }

    // Exactness of every literal whose support closes at `closing` (the lowest support position when
    // moving left, the highest when moving right). Positions below `floor` are not available.
    bool closing_checks(long first, const std::vector<std::uint32_t>& ids, long closing, int dir, long floor) const {
        Tape tape{this, first, &ids, first, first + static_cast<long>(ids.size()) - 1, kNone, kAll};
        for (long k = first; k < first + static_cast<long>(ids.size()); ++k) {
            int par = parity(k);
            const Bits& lab = label(ids[k - first]);
            for (std::size_t i = 0; i < n(); ++i) {
                const Lit& l = lits[i];
                if (l.op == Op::Top || l.op == Op::Rel || l.obligation()) continue;
                long lo = k + l.smin[par], hi = k + l.smax[par];
                if ((dir > 0 ? hi : lo) != closing || lo < floor) continue;
                V v = eval(static_cast<int>(i), k, tape);
                if (v == kU || (v == kT) != lab.test(i)) return false;
            }
            for (std::size_t j = 0; j < justified.size(); ++j) {
                const Justified& js = justified[j];
                if (!lab.test(static_cast<std::size_t>(js.item)) || lab.test(n() + j)) continue;
                long lo = k + js.jmin[par], hi = k + js.jmax[par];
                if ((dir > 0 ? hi : lo) != closing || lo < floor) continue;
                bool pushed = false;
                for (auto [lit, delta] : js.src[par]) pushed |= tape(k + delta, lit) == kT;
                if (!pushed) return false;
            }
        }
        return true;
    }

    // ---- infinite directions

    Bits accepting(int d, const StateKey& key) const {
        const auto& cs = conds[d];
        Bits acc(2 * cs.size() + 1);
        long first = key.tag;
        Tape tape{this, first, &key.ids, first, first + W - 1, kNone, kAll};
        for (std::size_t c = 0; c < cs.size(); ++c) {
            int i = cs[c];
            const Lit& l = lits[i];
            for (long k : d == 1 ? std::array<long, 2>{first, first + 1} : std::array<long, 2>{first + W - 1, first + W - 2}) {
                bool here = label(key.ids[k - first]).test(i);
                bool base = eval(i, k, tape, true) == kT;
                bool box = l.op == Op::BoxMinus || l.op == Op::BoxPlus;
                bool settled = box ? (here || !base) : (!here || base);
                if (settled) acc.set(2 * c + static_cast<std::size_t>(parity(k)));
            }
        }
        return acc;
    }

    std::uint32_t state_id(int d, StateKey key) {
        auto [it, fresh] = state_ids[d].emplace(key, static_cast<std::uint32_t>(states[d].size()));
        if (fresh) {
            states[d].push_back(std::move(key));
            verdict[d].push_back(0);
            ++stats.buchi_states;
            poll();
        }
        return it->second;
    }

    std::vector<std::uint32_t> successors(int d, std::uint32_t sid) {
        StateKey key = states[d][sid];
        long first = key.tag;
        long pos = d == 1 ? first + W : first - 1;
        Gen g{pos,
              d == 1 ? 1 : -1,
              first,
              &key.ids,
              d == 1 ? first : pos,
              d == 1 ? pos : first + W - 1,
              d == 1 ? kNone : kAll,
              d == 1 ? kNone : kAll,
              d == 0,
              d == 1,
              d == 1 ? &forced_right : &forced_left};
        std::vector<std::uint32_t> out;
        for (std::uint32_t letter : letters(g)) {
            std::vector<std::uint32_t> ids;
            long nfirst;
            if (d == 1) {
                ids.assign(key.ids.begin(), key.ids.end());
                ids.push_back(letter);
                if (!closing_checks(first, ids, pos, 1, first)) continue;
                ids.erase(ids.begin());
                nfirst = first + 1;
            } else {
                ids.push_back(letter);
                ids.insert(ids.end(), key.ids.begin(), key.ids.end());
                if (!closing_checks(pos, ids, pos, -1, pos)) continue;
                ids.pop_back();
                nfirst = pos;
            }
            std::uint32_t t = state_id(d, StateKey{std::move(ids), parity(nfirst)});
            out.push_back(t);
            if (opts.record_graph && dot_edges < 20000) {
                dot << "  " << (d ? "r" : "l") << sid << " -> " << (d ? "r" : "l") << t << ";\n";
                ++dot_edges;
            }
        }
        if (opts.trace)
            *opts.trace << (d ? "right" : "left") << " state " << sid << ": " << out.size() << " successors\n";
        return out;
    }

    // Generalized Büchi emptiness by the on-the-fly SCC algorithm of Couvreur.
    bool buchi(int d, const StateKey& start) {
        std::uint32_t s0 = state_id(d, start);
        if (verdict[d][s0]) return verdict[d][s0] == 1;
        Bits all(2 * conds[d].size() + 1);
        for (std::size_t c = 0; c < 2 * conds[d].size(); ++c) all.set(c);

        struct Frame {
            std::uint32_t s;
            std::vector<std::uint32_t> succ;
            std::size_t next = 0;
        };
        std::unordered_map<std::uint32_t, std::size_t> num;
        std::vector<std::pair<std::size_t, Bits>> roots;
        std::vector<std::uint32_t> active;
        std::vector<Frame> stack;
        std::size_t counter = 0;

        auto push = [&](std::uint32_t s) {
            num[s] = ++counter;
            roots.emplace_back(counter, accepting(d, states[d][s]));
            active.push_back(s);
            stack.push_back(Frame{s, successors(d, s)});
        };
        auto succeed = [&] {
            for (auto s : active) verdict[d][s] = 1;
            return true;
        };

        push(s0);
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next < f.succ.size()) {
                std::uint32_t t = f.succ[f.next++];
                if (verdict[d][t] == 2) continue;
                if (verdict[d][t] == 1) return succeed();
                auto it = num.find(t);
                if (it == num.end()) {
                    push(t);
                    continue;
                }
                Bits acc(all.w.size() * 64);
                acc.w.assign(all.w.size(), 0);
                while (roots.back().first > it->second) {
                    acc |= roots.back().second;
                    roots.pop_back();
                }
                roots.back().second |= acc;
                bool full = true;
                for (std::size_t c = 0; c < 2 * conds[d].size(); ++c)
                    if (!roots.back().second.test(c)) full = false;
                if (full) return succeed();
            } else {
                std::uint32_t s = f.s;
                stack.pop_back();
                if (roots.back().first == num[s]) {
                    roots.pop_back();
                    while (true) {
                        std::uint32_t x = active.back();
                        active.pop_back();
                        verdict[d][x] = 2;
                        if (x == s) break;
                    }
                }
            }
        }
        return false;
    }

    // ---- span

    std::optional<std::vector<std::uint32_t>> span(bool directional) {
        std::vector<std::uint32_t> path;
        struct Frame {
            std::vector<std::uint32_t> options;
            std::size_t next = 0;
        };
        std::vector<Frame> frames;
        span_failed.clear();

        // the labels before pos that can still matter, path[i] being the label of index i - K
        auto window_of = [&](long pos) {
            long first = std::max(-K, pos - W + 1);
            return std::pair<long, std::vector<std::uint32_t>>(
                first, std::vector<std::uint32_t>(path.begin() + (first + K), path.begin() + (pos + K)));
        };
        auto expand = [&](long pos) {
            tick_span();
            auto [first, ids] = window_of(pos);
            if (span_failed.count(StateKey{ids, pos})) return Frame{};
            Gen g{pos, 1, first, &ids, first, pos, -K, K, pos - R < -K, true, &forced_span[pos + K]};
            Frame fr;
            for (std::uint32_t letter : letters(g)) {
                std::vector<std::uint32_t> next = ids;
                next.push_back(letter);
                if (!closing_checks(first, next, pos, 1, -K)) continue;
                fr.options.push_back(letter);
            }
            if (opts.trace)
                *opts.trace << "span " << pos << ": " << fr.options.size() << " letters\n";
            return fr;
        };

        frames.push_back(expand(-K));
        while (!frames.empty()) {
            long pos = -K + static_cast<long>(frames.size()) - 1;
            Frame& fr = frames.back();
            if (fr.next >= fr.options.size()) {
                auto [first, ids] = window_of(pos);
                span_failed.insert(StateKey{std::move(ids), pos});
                frames.pop_back();
                path.resize(frames.size());
                continue;
            }
            std::uint32_t letter = fr.options[fr.next++];
            path.resize(static_cast<std::size_t>(pos + K));
            path.push_back(letter);
            if (opts.trace) *opts.trace << "  at " << pos << " try " << label_str(label(letter)) << "\n";
            if (directional && pos == -K + W - 1) {
                StateKey key{std::vector<std::uint32_t>(path.begin(), path.begin() + W), parity(-K)};
                if (!buchi(0, key)) continue;
            }
            if (pos == K) {
                if (!directional) return path;
                StateKey key{std::vector<std::uint32_t>(path.end() - W, path.end()), parity(K - W + 1)};
                if (buchi(1, key)) return path;
                continue;
            }
            frames.push_back(expand(pos + 1));
        }
        return std::nullopt;
    }

    // Over-approximates the atoms that can hold strictly beyond the span in the least model. Facts lie
    // inside the span unless unbounded, so on the left an atom needs a left-unbounded fact, a rule
    // that may fire out there (judged by its past-looking body parts, future ones assumed possible),
    // or a head box reaching leftwards. The right side mirrors this.
    void compute_maybe_outside(const std::vector<Fact>& d) {
        for (int side = 0; side < 2; ++side) {
            Bits& maybe = maybe_outside[side];
            maybe = Bits(nbits());
            for (const auto& f : d) {
                const Bound& b = side == 0 ? f.interval.left() : f.interval.right();
                if (b.infinite()) maybe.set(static_cast<std::size_t>(index.at(MetricAtom::rel(f.atom))));
            }
            std::function<bool(int)> possible = [&](int i) -> bool {
                const Lit& l = lits[i];
                if (l.op == Op::Top) return true;
                if (l.op == Op::Rel) return maybe.test(static_cast<std::size_t>(i));
                bool inward = side == 0 ? l.side == Side::Future : l.side == Side::Past;
                if (inward) return true;
                return possible(is_binary(l.op) ? l.b : l.a);
            };
            for (bool grew = true; grew;) {
                grew = false;
                for (const auto& r : rules) {
                    if (r.head < 0) continue;
                    bool fires = std::all_of(r.body.begin(), r.body.end(), possible);
                    bool reaches = false;
                    int i = r.head;
                    for (; lits[i].op != Op::Rel; i = lits[i].a)
                        reaches |= side == 0 ? lits[i].side == Side::Past : lits[i].side == Side::Future;
                    if ((fires || reaches) && !maybe.test(static_cast<std::size_t>(i))) {
                        maybe.set(static_cast<std::size_t>(i));
                        grew = true;
                    }
                }
            }
        }
    }

    Bits to_bits(const std::set<MetricAtom>& s) const {
        Bits b(nbits());
        b.set(0);
        for (const auto& m : s) {
            auto it = index.find(m);
            if (it == index.end()) throw std::invalid_argument("literal not tracked by the automaton: " + m.str());
            b.set(static_cast<std::size_t>(it->second));
        }
        for (const auto& r : rules) {
            if (r.fire < 0 || r.fire == r.head) continue;
            if (std::all_of(r.body.begin(), r.body.end(), [&](int x) { return b.test(static_cast<std::size_t>(x)); }))
                b.set(static_cast<std::size_t>(r.fire));
        }
        for (std::size_t j = 0; j < justified.size(); ++j)
            if (b.test(static_cast<std::size_t>(justified[j].item))) b.set(n() + j);
        return b;
    }

    Window to_window(long first, const std::vector<std::uint32_t>& ids) const {
        Window w{first, {}};
        for (auto id : ids) {
            std::set<MetricAtom> s;
            for (std::size_t i = 0; i < n(); ++i)
                if (label(id).test(i) && lits[i].op != Op::Top && !lits[i].obligation()) s.insert(lits[i].m);
            w.labels.push_back(std::move(s));
        }
        return w;
    }
};

ConsistencyChecker::Impl::Impl(const Program& p, const std::vector<Fact>& d, AutomataOptions o, const FactStore* lower)
    : opts(std::move(o)), facts(d) {
    grid = RulerGrid::of(p, d);
    unit = grid.d / Rational(2);

    std::set<std::string> consts = p.constants();
    for (const auto& c : dataset_constants(d)) consts.insert(c);
    std::vector<Rule> grounded = ground(p, consts);

    // Keep ground rules whose required atoms can ever hold.
    std::set<RelationalAtom> possible;
    for (const auto& f : d) possible.insert(f.atom);
    auto required_ok = [&](const Rule& r) {
        std::vector<RelationalAtom> req;
        for (const auto& b : r.body) collect_required_atoms(b, req);
        return std::all_of(req.begin(), req.end(), [&](const RelationalAtom& a) { return possible.count(a) > 0; });
    };
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& r : grounded) {
            if (!required_ok(r)) continue;
            std::vector<RelationalAtom> heads;
            collect_all_atoms(r.head, heads);
            for (auto& a : heads) grew |= possible.insert(a).second;
        }
    }
    std::vector<Rule> kept;
    for (auto& r : grounded)
        if (required_ok(r)) kept.push_back(std::move(r));

    add_literal(MetricAtom::top());
    for (const auto& r : kept) {
        GRule g;
        g.head = r.head.op() == Op::Bottom ? -1 : add_literal(r.head);
        for (const auto& b : r.body) g.body.push_back(add_literal(b));
        rules.push_back(std::move(g));
    }
    for (const auto& f : d) add_literal(MetricAtom::rel(f.atom));
    if (opts.track_dataset_boxes)
        for (const auto& f : d)
            for (Op op : {Op::BoxMinus, Op::BoxPlus})
                for (bool open : {false, true})
                    add_literal(MetricAtom::unary(op, Interval::normalize(Rational(0), Bound::pos_inf(), open, true),
                                                  MetricAtom::rel(f.atom)));

    for (auto& l : lits) prepare_literal(l);
    std::size_t semantic = n();

    // Obligations for box heads; the boxes nested inside them push their operand themselves.
    for (auto& r : rules) {
        if (r.head < 0) continue;
        r.fire = r.head;
        if (lits[r.head].op != Op::BoxMinus && lits[r.head].op != Op::BoxPlus) continue;
        auto [it, fresh] = obligation_index.emplace(lits[r.head].m, static_cast<int>(lits.size()));
        if (fresh) {
            Lit o = lits[r.head];
            o.sem = r.head;
            lits.push_back(std::move(o));
            pushers.push_back(it->second);
            for (int i = lits[r.head].a; lits[i].op != Op::Rel; i = lits[i].a) {
                if (lits[i].pushes) continue;
                lits[i].pushes = true;
                pushers.push_back(i);
            }
        }
        r.fire = it->second;
    }

    for (std::size_t i = 0; i < n(); ++i) {
        computable_order.push_back(static_cast<int>(i));
        if (lits[i].obligation()) continue;
        for (int p = 0; p < 2; ++p) {
            long lo = 0, hi = 0;
            auto rec = [&](long pos, int) {
                lo = std::min(lo, pos - p);
                hi = std::max(hi, pos - p);
                return kU;
            };
            if (lits[i].op != Op::Rel) eval(static_cast<int>(i), p, rec);
            lits[i].smin[p] = lo;
            lits[i].smax[p] = hi;
            R = std::max(R, hi - lo);
        }
        Op op = lits[i].op;
        if (op == Op::BoxMinus || op == Op::BoxPlus) boxes.push_back(static_cast<int>(i));
        if (op == Op::DiamondMinus || op == Op::DiamondPlus) diamonds.push_back(static_cast<int>(i));
        if (lits[i].unbounded) conds[lits[i].side == Side::Future ? 1 : 0].push_back(static_cast<int>(i));
    }
    guess_right = Bits(n());
    guess_left = Bits(n());
    for (const auto& r : rules) {
        if (r.head < 0) continue;
        bool past = false, future = false;
        int i = r.head;
        while (lits[i].op != Op::Rel) {
            (lits[i].side == Side::Past ? past : future) = true;
            i = lits[i].a;
        }
        if (past) guess_right.set(static_cast<std::size_t>(i));
        if (future) guess_left.set(static_cast<std::size_t>(i));
        if (r.fire != r.head && lits[r.fire].unbounded)
            (lits[r.fire].side == Side::Past ? guess_right : guess_left).set(static_cast<std::size_t>(r.fire));
    }
    for (std::size_t i = 0; i < n(); ++i) {
        if (!guess_right.test(i) && !guess_left.test(i)) continue;
        Justified js;
        js.item = static_cast<int>(i);
        if (lits[i].obligation()) {
            long back = lits[i].side == Side::Past ? 2 : -2;
            for (int p = 0; p < 2; ++p) js.src[p].emplace_back(static_cast<int>(i), back);
        } else {
            for (int pi : pushers) {
                if (lits[pi].a != static_cast<int>(i)) continue;
                for (int pk = 0; pk < 2; ++pk)
                    for (long o : lits[pi].touch[pk])
                        if (o != 0) js.src[parity(pk + o)].emplace_back(pi, -o);
            }
        }
        for (int p = 0; p < 2; ++p) {
            for (auto [lit, delta] : js.src[p]) {
                js.jmin[p] = std::min(js.jmin[p], delta);
                js.jmax[p] = std::max(js.jmax[p], delta);
            }
            R = std::max(R, js.jmax[p] - js.jmin[p]);
        }
        justified.push_back(std::move(js));
    }
    compute_maybe_outside(d);
    // guess masks are read at full label width
    guess_right.w.resize(Bits(nbits()).w.size(), 0);
    guess_left.w.resize(Bits(nbits()).w.size(), 0);
    W = R + 1;
    K = std::max(units(grid.x + grid.z), W);

    forced_left = Bits(nbits());
    forced_right = Bits(nbits());
    forced_span.assign(static_cast<std::size_t>(2 * K + 1), Bits(nbits()));
    auto install = [&](int lit, const IntervalList& list) {
        for (const auto& iv : list) {
            if (iv.left().kind() == Bound::Kind::NegInf) forced_left.set(static_cast<std::size_t>(lit));
            if (iv.right().kind() == Bound::Kind::PosInf) forced_right.set(static_cast<std::size_t>(lit));
            long lo = iv.left().finite() ? std::max(-K, units(iv.left().value()) - 1) : -K;
            long hi = iv.right().finite() ? std::min(K, units(iv.right().value()) + 1) : K;
            for (long m = lo; m <= hi; ++m)
                if (iv.contains(Rational(m) * unit)) forced_span[static_cast<std::size_t>(m + K)].set(static_cast<std::size_t>(lit));
        }
    };
    for (const auto& f : d) install(index.at(MetricAtom::rel(f.atom)), {f.interval});
    if (lower) {
        for (std::size_t i = 1; i < semantic; ++i) {
            IntervalList list;
            if (lits[i].op == Op::Rel) {
                if (const IntervalList* l = lower->find(lits[i].m.atom())) list = *l;
            } else {
                list = apply_operator(lits[i].m, *lower);
            }
            // the lower store says nothing beyond the span
            IntervalList inside;
            for (const auto& iv : list) inside.push_back(intersect(iv, grid.span));
            install(static_cast<int>(i), coalesce(inside));
        }
    }

    stats.tracked_literals = semantic;
    stats.ground_rules = rules.size();
    stats.window_size = static_cast<std::size_t>(W);
    stats.span_index = K;
    if (opts.record_graph) dot << "digraph states {\n";
}

ConsistencyChecker::ConsistencyChecker(const Program& p, const std::vector<Fact>& d, AutomataOptions opts,
                                       const FactStore* lower)
    : impl_(std::make_unique<Impl>(p, d, std::move(opts), lower)) {}

ConsistencyChecker::~ConsistencyChecker() = default;

const RulerGrid& ConsistencyChecker::grid() const { return impl_->grid; }
long ConsistencyChecker::span_index() const { return impl_->K; }
std::size_t ConsistencyChecker::window_size() const { return static_cast<std::size_t>(impl_->W); }

const std::vector<MetricAtom>& ConsistencyChecker::tracked() const {
    if (impl_->tracked_atoms.empty())
        for (const auto& l : impl_->lits)
            if (!l.obligation()) impl_->tracked_atoms.push_back(l.m);
    return impl_->tracked_atoms;
}

bool ConsistencyChecker::check_satisfiability(const Window& w) const {
    const Impl& m = *impl_;
    std::vector<Bits> labs;
    for (const auto& s : w.labels) labs.push_back(m.to_bits(s));
    long first = w.first, last = w.first + static_cast<long>(labs.size()) - 1;
    auto at = [&](long pos, int lit) -> V {
        if (pos < first || pos > last) return kU;
        return labs[static_cast<std::size_t>(pos - first)].test(static_cast<std::size_t>(lit)) ? kT : kF;
    };
    for (const auto& f : m.facts) {
        int lit = m.index.at(MetricAtom::rel(f.atom));
        for (long k = first; k <= last; ++k)
            if (subset(grid().ruler_interval(k), f.interval) && at(k, lit) != kT) return false;
    }
    for (long k = first; k <= last; ++k) {
        const Bits& lab = labs[static_cast<std::size_t>(k - first)];
        for (std::size_t i = 0; i < m.n(); ++i) {
            const Lit& l = m.lits[i];
            if (l.op == Op::Rel || l.obligation()) continue;
            int par = parity(k);
            if (k + l.smin[par] < first || k + l.smax[par] > last) continue;
            if ((m.eval(static_cast<int>(i), k, at) == kT) != lab.test(i)) return false;
        }
        for (const auto& r : m.rules) {
            bool fire = std::all_of(r.body.begin(), r.body.end(), [&](int b) { return lab.test(static_cast<std::size_t>(b)); });
            if (fire && (r.head < 0 || !lab.test(static_cast<std::size_t>(r.head)))) return false;
        }
    }
    return true;
}

std::optional<Window> ConsistencyChecker::search_window(bool directional) {
    auto path = impl_->span(directional);
    if (!path) return std::nullopt;
    return impl_->to_window(-impl_->K, *path);
}

bool ConsistencyChecker::has_accepting_run(Direction dir, const Window& w0) {
    if (static_cast<long>(w0.labels.size()) != impl_->W)
        throw std::invalid_argument("window must have exactly window_size() labels");
    StateKey key;
    key.tag = parity(w0.first);
    for (const auto& s : w0.labels) key.ids.push_back(impl_->intern(impl_->to_bits(s)));
    return impl_->buchi(dir == Direction::Right ? 1 : 0, key);
}

bool ConsistencyChecker::decide() { return impl_->span(true).has_value(); }

const AutomataStats& ConsistencyChecker::stats() const {
    if (impl_->opts.record_graph) impl_->stats.dot = impl_->dot.str() + "}\n";
    return impl_->stats;
}

bool consistent(const Program& p, const std::vector<Fact>& d, const AutomataOptions& opts, AutomataStats* stats) {
    AutomataStats local;
    AutomataStats& st = stats ? *stats : local;
    st = AutomataStats{};
    if (std::none_of(p.rules.begin(), p.rules.end(), [](const Rule& r) { return r.bottom_head(); })) {
        st.short_circuit = true;
        return true;
    }
    FactStore restricted = restrict_to_body_predicates(FactStore(d), p);
    std::vector<Fact> facts = restricted.facts();
    RulerGrid g = RulerGrid::of(p, facts);
    MaterialisationOptions mo;
    mo.horizon = g.span;
    mo.stop = opts.stop;
    auto mat = materialise(p, restricted, mo);
    if (mat.status == MatStatus::Cancelled) throw AutomataCancelled("automata search cancelled");
    if (mat.status == MatStatus::Inconsistent) {
        st.bottom_in_span = true;
        return false;
    }
    ConsistencyChecker checker(p, facts, opts, &mat.store);
    bool ok = checker.decide();
    st = checker.stats();
    return ok;
}

}  // namespace dmtl
