#pragma once

#include "dmtl/interval.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmtl {

struct Term {
    enum class Kind { Constant, Variable };
    Kind kind = Kind::Constant;
    std::string name;

    static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }
    static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }
    bool is_variable() const { return kind == Kind::Variable; }
    friend auto operator<=>(const Term&, const Term&) = default;
};

struct RelationalAtom {
    std::string predicate;
    std::vector<Term> args;

    bool ground() const;
    std::string str() const;
    friend auto operator<=>(const RelationalAtom&, const RelationalAtom&) = default;
};

using Substitution = std::map<std::string, std::string>;

RelationalAtom apply(const RelationalAtom& a, const Substitution& s);

enum class Op { Top, Bottom, Rel, DiamondMinus, DiamondPlus, BoxMinus, BoxPlus, Since, Until };

bool is_unary(Op op);
bool is_binary(Op op);
bool is_past(Op op);  // DiamondMinus, BoxMinus, Since
const char* op_keyword(Op op);

// Immutable metric atom; copies share structure.
class MetricAtom {
public:
    MetricAtom();  // TOP
    static MetricAtom top();
    static MetricAtom bottom();
    static MetricAtom rel(RelationalAtom a);
    static MetricAtom unary(Op op, Interval range, MetricAtom sub);
    static MetricAtom binary(Op op, Interval range, MetricAtom lhs, MetricAtom rhs);

    Op op() const;
    const Interval& range() const;
    const RelationalAtom& atom() const;  // Rel only
    const MetricAtom& sub() const;       // unary operand
    const MetricAtom& lhs() const;       // Since/Until left operand
    const MetricAtom& rhs() const;       // Since/Until right operand
    std::size_t hash() const;
    bool ground() const;

    std::string str() const;
    friend bool operator==(const MetricAtom& a, const MetricAtom& b);
    friend bool operator<(const MetricAtom& a, const MetricAtom& b);

private:
    struct Node;
    explicit MetricAtom(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
    std::shared_ptr<const Node> n_;
};

MetricAtom apply(const MetricAtom& m, const Substitution& s);
void collect_variables(const MetricAtom& m, std::set<std::string>& out);
void collect_predicates(const MetricAtom& m, std::set<std::string>& out);
void collect_constants(const MetricAtom& m, std::set<std::string>& out);
// Relational atoms whose presence in the store is necessary for m to hold anywhere.
void collect_required_atoms(const MetricAtom& m, std::vector<RelationalAtom>& out);
void collect_all_atoms(const MetricAtom& m, std::vector<RelationalAtom>& out);
bool contains_bottom(const MetricAtom& m);

struct Rule {
    MetricAtom head;
    std::vector<MetricAtom> body;
    int line = 0;

    // Predicate of the innermost head atom, or nullopt for a bottom head.
    std::optional<std::string> head_predicate() const;
    bool bottom_head() const { return !head_predicate().has_value(); }
    std::set<std::string> body_predicates() const;
    std::set<std::string> variables() const;
    std::string str() const;
    friend bool operator==(const Rule& a, const Rule& b) { return a.head == b.head && a.body == b.body; }
};

struct Program {
    std::vector<Rule> rules;

    std::set<std::string> constants() const;
    std::string str() const;
    friend bool operator==(const Program& a, const Program& b) { return a.rules == b.rules; }
};

struct Fact {
    RelationalAtom atom;
    Interval interval;

    std::string str() const;
    friend bool operator==(const Fact&, const Fact&) = default;
};

std::string dataset_str(const std::vector<Fact>& facts);
std::set<std::string> dataset_constants(const std::vector<Fact>& facts);

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& msg, int line, int col)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line_(line), col_(col) {}
    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_, col_;
};

// Throws SyntaxError when the head uses a forbidden operator or a head variable is missing from the body.
void validate_rule(const Rule& r);
// Throws SyntaxError when a predicate is used with two different arities.
void check_arities(const Program& p, const std::vector<Fact>& facts);

std::vector<Rule> ground(const Program& p, const std::set<std::string>& constants);

}  // namespace dmtl

template <>
struct std::hash<dmtl::MetricAtom> {
    std::size_t operator()(const dmtl::MetricAtom& m) const { return m.hash(); }
};
