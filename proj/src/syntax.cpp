#include "dmtl/syntax.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace dmtl {

bool RelationalAtom::ground() const {
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

std::string RelationalAtom::str() const {
    if (args.empty()) return predicate;
    std::string s = predicate + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) s += ",";
        s += args[i].name;
    }
    return s + ")";
}

RelationalAtom apply(const RelationalAtom& a, const Substitution& s) {
    RelationalAtom r{a.predicate, a.args};
    for (auto& t : r.args) {
        if (!t.is_variable()) continue;
        if (auto it = s.find(t.name); it != s.end()) t = Term::constant(it->second);
    }
    return r;
}

bool is_unary(Op op) {
    return op == Op::DiamondMinus || op == Op::DiamondPlus || op == Op::BoxMinus || op == Op::BoxPlus;
}
bool is_binary(Op op) { return op == Op::Since || op == Op::Until; }
bool is_past(Op op) { return op == Op::DiamondMinus || op == Op::BoxMinus || op == Op::Since; }

const char* op_keyword(Op op) {
    switch (op) {
        case Op::Top: return "TOP";
        case Op::Bottom: return "BOTTOM";
        case Op::Rel: return "";
        case Op::DiamondMinus: return "DIAMONDMINUS";
        case Op::DiamondPlus: return "DIAMONDPLUS";
        case Op::BoxMinus: return "BOXMINUS";
        case Op::BoxPlus: return "BOXPLUS";
        case Op::Since: return "SINCE";
        case Op::Until: return "UNTIL";
    }
    return "";
}

struct MetricAtom::Node {
    Op op = Op::Top;
    Interval range;
    RelationalAtom atom;
    MetricAtom a{std::shared_ptr<const Node>()}, b{std::shared_ptr<const Node>()};
    std::size_t hash = 0;
    bool ground = true;
};

namespace {
std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

std::size_t hash_bound(const Bound& b) {
    return b.finite() ? b.value().hash() : (b.kind() == Bound::Kind::NegInf ? 17 : 19);
}

std::size_t hash_interval(const Interval& i) {
    if (i.is_empty()) return 7;
    return mix(mix(hash_bound(i.left()), hash_bound(i.right())), (i.left_open() ? 2 : 0) + (i.right_open() ? 1 : 0));
}
}  // namespace

MetricAtom::MetricAtom() : MetricAtom(top()) {}

MetricAtom MetricAtom::top() {
    static const auto n = [] {
        auto p = std::make_shared<Node>();
        p->op = Op::Top;
        p->hash = 11;
        return p;
    }();
    return MetricAtom(std::shared_ptr<const Node>(n));
}

MetricAtom MetricAtom::bottom() {
    static const auto n = [] {
        auto p = std::make_shared<Node>();
        p->op = Op::Bottom;
        p->hash = 13;
        return p;
    }();
    return MetricAtom(std::shared_ptr<const Node>(n));
}

MetricAtom MetricAtom::rel(RelationalAtom a) {
    auto p = std::make_shared<Node>();
    p->op = Op::Rel;
    std::size_t h = std::hash<std::string>{}(a.predicate);
    for (const auto& t : a.args) h = mix(h, std::hash<std::string>{}(t.name) * (t.is_variable() ? 3 : 1));
    p->hash = h;
    p->ground = a.ground();
    p->atom = std::move(a);
    return MetricAtom(std::shared_ptr<const Node>(std::move(p)));
}

MetricAtom MetricAtom::unary(Op op, Interval range, MetricAtom sub) {
    if (!is_unary(op)) throw std::invalid_argument("not a unary operator");
    auto p = std::make_shared<Node>();
    p->op = op;
    p->hash = mix(mix(static_cast<std::size_t>(op) * 31, hash_interval(range)), sub.hash());
    p->ground = sub.ground();
    p->range = std::move(range);
    p->a = std::move(sub);
    return MetricAtom(std::shared_ptr<const Node>(std::move(p)));
}

MetricAtom MetricAtom::binary(Op op, Interval range, MetricAtom lhs, MetricAtom rhs) {
    if (!is_binary(op)) throw std::invalid_argument("not a binary operator");
    auto p = std::make_shared<Node>();
    p->op = op;
    p->hash = mix(mix(mix(static_cast<std::size_t>(op) * 31, hash_interval(range)), lhs.hash()), rhs.hash());
    p->ground = lhs.ground() && rhs.ground();
    p->range = std::move(range);
    p->a = std::move(lhs);
    p->b = std::move(rhs);
    return MetricAtom(std::shared_ptr<const Node>(std::move(p)));
}

Op MetricAtom::op() const { return n_->op; }
const Interval& MetricAtom::range() const { return n_->range; }
const RelationalAtom& MetricAtom::atom() const { return n_->atom; }
const MetricAtom& MetricAtom::sub() const { return n_->a; }
const MetricAtom& MetricAtom::lhs() const { return n_->a; }
const MetricAtom& MetricAtom::rhs() const { return n_->b; }
std::size_t MetricAtom::hash() const { return n_->hash; }
bool MetricAtom::ground() const { return n_->ground; }

bool operator==(const MetricAtom& x, const MetricAtom& y) {
    if (x.n_ == y.n_) return true;
    if (x.n_->hash != y.n_->hash || x.n_->op != y.n_->op) return false;
    switch (x.op()) {
        case Op::Top:
        case Op::Bottom: return true;
        case Op::Rel: return x.atom() == y.atom();
        case Op::Since:
        case Op::Until: return x.range() == y.range() && x.lhs() == y.lhs() && x.rhs() == y.rhs();
        default: return x.range() == y.range() && x.sub() == y.sub();
    }
}

bool operator<(const MetricAtom& x, const MetricAtom& y) {
    if (x.n_ == y.n_) return false;
    if (x.op() != y.op()) return x.op() < y.op();
    switch (x.op()) {
        case Op::Top:
        case Op::Bottom: return false;
        case Op::Rel: return x.atom() < y.atom();
        default: break;
    }
    if (x.range() != y.range()) return x.range() < y.range();
    if (is_binary(x.op())) {
        if (x.lhs() != y.lhs()) return x.lhs() < y.lhs();
        return x.rhs() < y.rhs();
    }
    return x.sub() < y.sub();
}

namespace {
std::string operand_str(const MetricAtom& m) {
    if (is_binary(m.op())) return "(" + m.str() + ")";
    return m.str();
}
}  // namespace

std::string MetricAtom::str() const {
    switch (op()) {
        case Op::Top:
        case Op::Bottom: return op_keyword(op());
        case Op::Rel: return atom().str();
        case Op::Since:
        case Op::Until:
            return operand_str(lhs()) + " " + op_keyword(op()) + range().str() + " " + operand_str(rhs());
        default: return std::string(op_keyword(op())) + range().str() + " " + operand_str(sub());
    }
}

MetricAtom apply(const MetricAtom& m, const Substitution& s) {
    if (m.ground()) return m;
    switch (m.op()) {
        case Op::Rel: return MetricAtom::rel(dmtl::apply(m.atom(), s));
        case Op::Since:
        case Op::Until: return MetricAtom::binary(m.op(), m.range(), dmtl::apply(m.lhs(), s), dmtl::apply(m.rhs(), s));
        default:
            if (is_unary(m.op())) return MetricAtom::unary(m.op(), m.range(), dmtl::apply(m.sub(), s));
            return m;
    }
}

namespace {
template <typename F>
void visit_atoms(const MetricAtom& m, F&& f) {
    switch (m.op()) {
        case Op::Top:
        case Op::Bottom: return;
        case Op::Rel: f(m.atom()); return;
        case Op::Since:
        case Op::Until:
            visit_atoms(m.lhs(), f);
            visit_atoms(m.rhs(), f);
            return;
        default: visit_atoms(m.sub(), f);
    }
}
}  // namespace

void collect_variables(const MetricAtom& m, std::set<std::string>& out) {
    visit_atoms(m, [&](const RelationalAtom& a) {
        for (const auto& t : a.args)
            if (t.is_variable()) out.insert(t.name);
    });
}

void collect_predicates(const MetricAtom& m, std::set<std::string>& out) {
    visit_atoms(m, [&](const RelationalAtom& a) { out.insert(a.predicate); });
}

void collect_constants(const MetricAtom& m, std::set<std::string>& out) {
    visit_atoms(m, [&](const RelationalAtom& a) {
        for (const auto& t : a.args)
            if (!t.is_variable()) out.insert(t.name);
    });
}

void collect_all_atoms(const MetricAtom& m, std::vector<RelationalAtom>& out) {
    visit_atoms(m, [&](const RelationalAtom& a) { out.push_back(a); });
}

void collect_required_atoms(const MetricAtom& m, std::vector<RelationalAtom>& out) {
    switch (m.op()) {
        case Op::Top:
        case Op::Bottom: return;
        case Op::Rel: out.push_back(m.atom()); return;
        case Op::Since:
        case Op::Until: collect_required_atoms(m.rhs(), out); return;
        default: collect_required_atoms(m.sub(), out);
    }
}

bool contains_bottom(const MetricAtom& m) {
    switch (m.op()) {
        case Op::Bottom: return true;
        case Op::Top:
        case Op::Rel: return false;
        case Op::Since:
        case Op::Until: return contains_bottom(m.lhs()) || contains_bottom(m.rhs());
        default: return contains_bottom(m.sub());
    }
}

std::optional<std::string> Rule::head_predicate() const {
    const MetricAtom* h = &head;
    while (h->op() == Op::BoxMinus || h->op() == Op::BoxPlus) h = &h->sub();
    if (h->op() == Op::Rel) return h->atom().predicate;
    return std::nullopt;
}

std::set<std::string> Rule::body_predicates() const {
    std::set<std::string> out;
    for (const auto& b : body) collect_predicates(b, out);
    return out;
}

std::set<std::string> Rule::variables() const {
    std::set<std::string> out;
    collect_variables(head, out);
    for (const auto& b : body) collect_variables(b, out);
    return out;
}

std::string Rule::str() const {
    std::string s = head.str() + " :- ";
    for (size_t i = 0; i < body.size(); ++i) {
        if (i) s += ", ";
        s += body[i].str();
    }
    return s + " .";
}

std::set<std::string> Program::constants() const {
    std::set<std::string> out;
    for (const auto& r : rules) {
        collect_constants(r.head, out);
        for (const auto& b : r.body) collect_constants(b, out);
    }
    return out;
}

std::string Program::str() const {
    std::string s;
    for (const auto& r : rules) s += r.str() + "\n";
    return s;
}

std::string Fact::str() const { return atom.str() + "@" + interval.str(); }

std::string dataset_str(const std::vector<Fact>& facts) {
    std::string s;
    for (const auto& f : facts) s += f.str() + "\n";
    return s;
}

std::set<std::string> dataset_constants(const std::vector<Fact>& facts) {
    std::set<std::string> out;
    for (const auto& f : facts)
        for (const auto& t : f.atom.args) out.insert(t.name);
    return out;
}

namespace {
bool valid_head(const MetricAtom& m) {
    switch (m.op()) {
        case Op::Bottom:
        case Op::Rel: return true;
        case Op::BoxMinus:
        case Op::BoxPlus: return valid_head(m.sub());
        default: return false;
    }
}
}  // namespace

void validate_rule(const Rule& r) {
    if (r.body.empty()) throw SyntaxError("rule body is empty", r.line, 1);
    if (!valid_head(r.head)) throw SyntaxError("forbidden operator in rule head: " + r.head.str(), r.line, 1);
    std::set<std::string> hv, bv;
    collect_variables(r.head, hv);
    for (const auto& b : r.body) collect_variables(b, bv);
    for (const auto& v : hv)
        if (!bv.count(v)) throw SyntaxError("unsafe rule: head variable " + v + " does not occur in the body", r.line, 1);
}

void check_arities(const Program& p, const std::vector<Fact>& facts) {
    std::map<std::string, size_t> arity;
    auto note = [&](const RelationalAtom& a, int line) {
        auto [it, fresh] = arity.emplace(a.predicate, a.args.size());
        if (!fresh && it->second != a.args.size())
            throw SyntaxError("predicate " + a.predicate + " used with arities " + std::to_string(it->second) + " and " +
                                  std::to_string(a.args.size()),
                              line, 1);
    };
    for (const auto& r : p.rules) {
        std::vector<RelationalAtom> atoms;
        collect_all_atoms(r.head, atoms);
        for (const auto& b : r.body) collect_all_atoms(b, atoms);
        for (const auto& a : atoms) note(a, r.line);
    }
    for (size_t i = 0; i < facts.size(); ++i) note(facts[i].atom, static_cast<int>(i + 1));
}

std::vector<Rule> ground(const Program& p, const std::set<std::string>& constants) {
    std::vector<Rule> out;
    std::vector<std::string> consts(constants.begin(), constants.end());
    for (const auto& r : p.rules) {
        auto vs = r.variables();
        std::vector<std::string> vars(vs.begin(), vs.end());
        if (vars.empty()) {
            out.push_back(r);
            continue;
        }
        if (consts.empty()) continue;
        std::vector<size_t> idx(vars.size(), 0);
        while (true) {
            Substitution s;
            for (size_t i = 0; i < vars.size(); ++i) s[vars[i]] = consts[idx[i]];
            Rule g{dmtl::apply(r.head, s), {}, r.line};
            for (const auto& b : r.body) g.body.push_back(dmtl::apply(b, s));
            out.push_back(std::move(g));
            size_t k = 0;
            while (k < idx.size() && ++idx[k] == consts.size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
    }
    return out;
}

}  // namespace dmtl
