#include "dmtl/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dmtl {

namespace {

enum class Tok { Ident, Number, LParen, RParen, LBrack, RBrack, Comma, Dot, Turnstile, At, Minus, Plus, End };

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    Lexer(std::string_view src, int first_line = 1) : s_(src), line_(first_line) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip();
            int l = line_, c = col_;
            if (i_ >= s_.size()) {
                out.push_back({Tok::End, "", l, c});
                return out;
            }
            char ch = s_[i_];
            if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
                size_t b = i_;
                while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) adv();
                out.push_back({Tok::Ident, std::string(s_.substr(b, i_ - b)), l, c});
            } else if (std::isdigit(static_cast<unsigned char>(ch))) {
                size_t b = i_;
                while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) adv();
                if (i_ + 1 < s_.size() && (s_[i_] == '.' || s_[i_] == '/') &&
                    std::isdigit(static_cast<unsigned char>(s_[i_ + 1]))) {
                    adv();
                    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) adv();
                }
                out.push_back({Tok::Number, std::string(s_.substr(b, i_ - b)), l, c});
            } else if (ch == ':' && i_ + 1 < s_.size() && s_[i_ + 1] == '-') {
                adv();
                adv();
                out.push_back({Tok::Turnstile, ":-", l, c});
            } else {
                Tok k;
                switch (ch) {
                    case '(': k = Tok::LParen; break;
                    case ')': k = Tok::RParen; break;
                    case '[': k = Tok::LBrack; break;
                    case ']': k = Tok::RBrack; break;
                    case ',': k = Tok::Comma; break;
                    case '.': k = Tok::Dot; break;
                    case '@': k = Tok::At; break;
                    case '-': k = Tok::Minus; break;
                    case '+': k = Tok::Plus; break;
                    default: throw SyntaxError(std::string("unexpected character '") + ch + "'", l, c);
                }
                adv();
                out.push_back({k, std::string(1, ch), l, c});
            }
        }
    }

private:
    void adv() {
        if (s_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }
    void skip() {
        while (i_ < s_.size()) {
            if (s_[i_] == '#') {
                while (i_ < s_.size() && s_[i_] != '\n') adv();
            } else if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
                adv();
            } else {
                break;
            }
        }
    }

    std::string_view s_;
    size_t i_ = 0;
    int line_, col_ = 1;
};

bool is_keyword(const std::string& s) {
    return s == "TOP" || s == "BOTTOM" || s == "DIAMONDMINUS" || s == "DIAMONDPLUS" || s == "BOXMINUS" ||
           s == "BOXPLUS" || s == "SINCE" || s == "UNTIL" || s == "inf";
}

bool variable_name(const std::string& s) { return std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_'; }

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    bool at_end() const { return peek().kind == Tok::End; }
    const Token& peek(size_t k = 0) const { return t_[std::min(p_ + k, t_.size() - 1)]; }

    [[noreturn]] void fail(const std::string& msg, const Token& at) const {
        throw SyntaxError(msg + (at.kind == Tok::End ? " at end of input" : " near '" + at.text + "'"), at.line, at.col);
    }

    const Token& expect(Tok k, const char* what) {
        if (peek().kind != k) fail(std::string("expected ") + what, peek());
        return t_[p_++];
    }

    Rule rule() {
        Rule r;
        r.line = peek().line;
        r.head = literal();
        expect(Tok::Turnstile, "':-'");
        r.body.push_back(literal());
        while (peek().kind == Tok::Comma) {
            ++p_;
            r.body.push_back(literal());
        }
        expect(Tok::Dot, "'.' ending the rule");
        validate_rule(r);
        return r;
    }

    MetricAtom literal() {
        MetricAtom left = unary();
        while (peek().kind == Tok::Ident && (peek().text == "SINCE" || peek().text == "UNTIL")) {
            Op op = peek().text == "SINCE" ? Op::Since : Op::Until;
            ++p_;
            Interval range = op_interval();
            MetricAtom right = unary();
            left = MetricAtom::binary(op, std::move(range), std::move(left), std::move(right));
        }
        return left;
    }

    MetricAtom unary() {
        const Token& t = peek();
        if (t.kind == Tok::LParen) {
            ++p_;
            MetricAtom m = literal();
            expect(Tok::RParen, "')'");
            return m;
        }
        if (t.kind != Tok::Ident) fail("expected a metric atom", t);
        if (t.text == "TOP") {
            ++p_;
            return MetricAtom::top();
        }
        if (t.text == "BOTTOM") {
            ++p_;
            return MetricAtom::bottom();
        }
        Op op;
        if (t.text == "DIAMONDMINUS")
            op = Op::DiamondMinus;
        else if (t.text == "DIAMONDPLUS")
            op = Op::DiamondPlus;
        else if (t.text == "BOXMINUS")
            op = Op::BoxMinus;
        else if (t.text == "BOXPLUS")
            op = Op::BoxPlus;
        else
            return MetricAtom::rel(atom(false));
        ++p_;
        Interval range = op_interval();
        return MetricAtom::unary(op, std::move(range), unary());
    }

    RelationalAtom atom(bool ground_only) {
        const Token& name = expect(Tok::Ident, "a predicate name");
        if (is_keyword(name.text)) fail("keyword used as a predicate", name);
        RelationalAtom a{name.text, {}};
        if (peek().kind != Tok::LParen) return a;
        ++p_;
        if (peek().kind == Tok::RParen) {
            ++p_;
            return a;
        }
        while (true) {
            const Token& tk = peek();
            if (tk.kind == Tok::Ident) {
                if (is_keyword(tk.text)) fail("keyword used as a term", tk);
                if (variable_name(tk.text)) {
                    if (ground_only) fail("variable in a fact", tk);
                    a.args.push_back(Term::variable(tk.text));
                } else {
                    a.args.push_back(Term::constant(tk.text));
                }
            } else if (tk.kind == Tok::Number && tk.text.find_first_of("./") == std::string::npos) {
                a.args.push_back(Term::constant(tk.text));
            } else {
                fail("expected a term", tk);
            }
            ++p_;
            if (peek().kind == Tok::Comma) {
                ++p_;
                continue;
            }
            expect(Tok::RParen, "')' or ','");
            return a;
        }
    }

    Bound bound(bool left, bool open) {
        const Token& t = peek();
        bool neg = false, sign = false;
        if (t.kind == Tok::Minus || t.kind == Tok::Plus) {
            neg = t.kind == Tok::Minus;
            sign = true;
            ++p_;
        }
        const Token& v = peek();
        if (v.kind == Tok::Ident && v.text == "inf") {
            ++p_;
            if (!sign && left) fail("left infinite bound must be written -inf", v);
            if (neg != left) fail("infinite bound on the wrong side", v);
            if (!open) fail("infinite bound requires an open bracket", v);
            return left ? Bound::neg_inf() : Bound::pos_inf();
        }
        if (v.kind != Tok::Number) fail("expected a number", v);
        ++p_;
        Rational r = Rational::parse(v.text);
        return Bound(neg ? -r : r);
    }

    Interval interval() {
        const Token& open = peek();
        if (open.kind != Tok::LBrack && open.kind != Tok::LParen) fail("expected an interval", open);
        ++p_;
        bool lo = open.kind == Tok::LParen;
        // The closing bracket decides right openness; read ahead to find it.
        size_t q = p_;
        while (q < t_.size() && t_[q].kind != Tok::RBrack && t_[q].kind != Tok::RParen && t_[q].kind != Tok::End) ++q;
        bool ro = q < t_.size() && t_[q].kind == Tok::RParen;
        Bound l = bound(true, lo);
        expect(Tok::Comma, "',' in interval");
        Bound r = bound(false, ro);
        if (peek().kind != Tok::RBrack && peek().kind != Tok::RParen) fail("expected ']' or ')'", peek());
        ++p_;
        return Interval::normalize(std::move(l), std::move(r), lo, ro);
    }

    Interval op_interval() {
        const Token& at = peek();
        Interval i = interval();
        if (i.is_empty()) fail("empty operator interval", at);
        if (i.left().infinite() || i.left().value().sign() < 0) fail("negative operator bound", at);
        return i;
    }

    Fact fact() {
        RelationalAtom a = atom(true);
        expect(Tok::At, "'@'");
        const Token& at = peek();
        Interval i = interval();
        if (i.is_empty()) fail("empty interval in a fact", at);
        return Fact{std::move(a), std::move(i)};
    }

private:
    std::vector<Token> t_;
    size_t p_ = 0;
};

}  // namespace

Program parse_program(std::string_view text) {
    Parser p(Lexer(text).run());
    Program prog;
    while (!p.at_end()) prog.rules.push_back(p.rule());
    check_arities(prog, {});
    return prog;
}

std::vector<Fact> parse_dataset(std::string_view text) {
    std::vector<Fact> out;
    int line = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view ln = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++line;
        Parser p(Lexer(ln, line).run());
        if (!p.at_end()) {
            out.push_back(p.fact());
            if (!p.at_end()) p.fail("trailing input after fact", p.peek());
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

Fact parse_fact(std::string_view text) {
    Parser p(Lexer(text).run());
    Fact f = p.fact();
    if (!p.at_end()) p.fail("trailing input after fact", p.peek());
    return f;
}

MetricAtom parse_metric_atom(std::string_view text) {
    Parser p(Lexer(text).run());
    MetricAtom m = p.literal();
    if (!p.at_end()) p.fail("trailing input after metric atom", p.peek());
    return m;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Program load_program(const std::string& path) { return parse_program(read_file(path)); }
std::vector<Fact> load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

}  // namespace dmtl
