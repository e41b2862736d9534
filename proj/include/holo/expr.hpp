#pragma once

// Shared expression DSL. One grammar and one evaluator serve literal
// arguments ("2x+1"), model constraints ("measure(a1) + measure(a2) = 180"),
// equation templates ("length(s1) = length(s3)") and the equation engine's
// instantiated equations.
//
// Trees are immutable and shared; rebuilding via substitution returns new
// trees. Trigonometric functions work in degrees.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "holo/error.hpp"

namespace holo {

enum class ExprOp {
    Num,   // numeric constant
    Sym,   // named symbol (literal variable or placeholder argument)
    Var,   // engine variable, identified by integer id
    Call,  // named function application: sin, cos, tan, sqrt, length(s1), ...
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprOp op;
    double num = 0.0;       // Num
    std::string sym;        // Sym name or Call name
    int var = -1;           // Var id
    std::vector<Expr> args; // operands / call arguments
};

namespace ex {

inline Expr num(double v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Num;
    n->num = v;
    return n;
}

inline Expr sym(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Sym;
    n->sym = std::move(name);
    return n;
}

inline Expr var(int id) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Var;
    n->var = id;
    return n;
}

inline Expr call(std::string name, std::vector<Expr> args) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Call;
    n->sym = std::move(name);
    n->args = std::move(args);
    return n;
}

inline Expr unary(ExprOp op, Expr a) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->args = {std::move(a)};
    return n;
}

inline Expr binary(ExprOp op, Expr a, Expr b) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
}

inline Expr neg(Expr a) { return unary(ExprOp::Neg, std::move(a)); }
inline Expr add(Expr a, Expr b) { return binary(ExprOp::Add, std::move(a), std::move(b)); }
inline Expr sub(Expr a, Expr b) { return binary(ExprOp::Sub, std::move(a), std::move(b)); }
inline Expr mul(Expr a, Expr b) { return binary(ExprOp::Mul, std::move(a), std::move(b)); }
inline Expr div(Expr a, Expr b) { return binary(ExprOp::Div, std::move(a), std::move(b)); }
inline Expr pow(Expr a, Expr b) { return binary(ExprOp::Pow, std::move(a), std::move(b)); }

}  // namespace ex

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

inline bool expr_equal(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op) return false;
    switch (a->op) {
        case ExprOp::Num:
            return a->num == b->num;
        case ExprOp::Sym:
            return a->sym == b->sym;
        case ExprOp::Var:
            return a->var == b->var;
        case ExprOp::Call:
            if (a->sym != b->sym) return false;
            break;
        default:
            break;
    }
    if (a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (!expr_equal(a->args[i], b->args[i])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Printing (minimal-paren infix; parse(to_string(e)) reproduces e)
// ---------------------------------------------------------------------------

using VarNamer = std::function<std::string(int)>;

namespace detail {

inline int precedence(ExprOp op) {
    switch (op) {
        case ExprOp::Add:
        case ExprOp::Sub: return 1;
        case ExprOp::Mul:
        case ExprOp::Div: return 2;
        case ExprOp::Neg: return 3;
        case ExprOp::Pow: return 4;
        default: return 5;
    }
}

inline std::string format_number(double v) {
    if (v == (std::int64_t)v && std::abs(v) < 1e15) {
        return std::to_string((std::int64_t)v);
    }
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

inline void print_expr(const Expr& e, std::ostream& os, int parent_prec, bool right_operand,
                       const VarNamer& namer) {
    int prec = precedence(e->op);
    bool need_paren = prec < parent_prec ||
                      (prec == parent_prec && right_operand && (parent_prec == 1 || parent_prec == 2));
    switch (e->op) {
        case ExprOp::Num:
            if (e->num < 0) {
                os << '(' << format_number(e->num) << ')';
            } else {
                os << format_number(e->num);
            }
            return;
        case ExprOp::Sym:
            os << e->sym;
            return;
        case ExprOp::Var:
            if (namer) {
                os << namer(e->var);
            } else {
                os << "$" << e->var;
            }
            return;
        case ExprOp::Call: {
            os << e->sym << '(';
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i) os << ", ";
                print_expr(e->args[i], os, 0, false, namer);
            }
            os << ')';
            return;
        }
        case ExprOp::Neg:
            if (need_paren) os << '(';
            os << '-';
            print_expr(e->args[0], os, prec, true, namer);
            if (need_paren) os << ')';
            return;
        default:
            break;
    }
    const char* sep = e->op == ExprOp::Add ? " + "
                    : e->op == ExprOp::Sub ? " - "
                    : e->op == ExprOp::Mul ? " * "
                    : e->op == ExprOp::Div ? " / "
                                           : " ^ ";
    if (need_paren) os << '(';
    print_expr(e->args[0], os, prec, false, namer);
    os << sep;
    print_expr(e->args[1], os, e->op == ExprOp::Pow ? prec - 1 : prec, true, namer);
    if (need_paren) os << ')';
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
    std::ostringstream os;
    detail::print_expr(e, os, 0, false, nullptr);
    return os.str();
}

// Infix rendering with human-readable variable names.
inline std::string to_string(const Expr& e, const VarNamer& namer) {
    std::ostringstream os;
    detail::print_expr(e, os, 0, false, namer);
    return os.str();
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------
//
// expr    := term (('+'|'-') term)*
// term    := factor (('*'|'/') factor | <implicit mul>)*
// factor  := '-' factor | atom ('^' factor)?
// atom    := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')' | '$' NUMBER
//
// Implicit multiplication covers the "2x" and "3(x+1)" forms that appear in
// problem annotations.

enum class CmpOp { Eq, Ne, Lt, Le };

struct Comparison {
    Expr lhs;
    Expr rhs;
    CmpOp op = CmpOp::Eq;
};

namespace detail {

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    Expr parse_full() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

    Comparison parse_comparison_full() {
        Comparison c;
        c.lhs = parse_expr();
        skip_ws();
        if (pos_ >= s_.size()) fail("expected comparison operator");
        if (peek() == '=') {
            ++pos_;
            c.op = CmpOp::Eq;
        } else if (peek() == '!') {
            expect('!');
            expect('=');
            c.op = CmpOp::Ne;
        } else if (peek() == '<') {
            ++pos_;
            if (pos_ < s_.size() && peek() == '=') {
                ++pos_;
                c.op = CmpOp::Le;
            } else {
                c.op = CmpOp::Lt;
            }
        } else {
            fail("expected comparison operator");
        }
        c.rhs = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return c;
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            skip_ws();
            if (pos_ < s_.size() && (peek() == '+' || peek() == '-')) {
                char op = s_[pos_++];
                Expr r = parse_term();
                e = op == '+' ? ex::add(e, r) : ex::sub(e, r);
            } else {
                return e;
            }
        }
    }

private:
    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            skip_ws();
            if (pos_ < s_.size() && (peek() == '*' || peek() == '/')) {
                char op = s_[pos_++];
                Expr r = parse_factor();
                e = op == '*' ? ex::mul(e, r) : ex::div(e, r);
            } else if (pos_ < s_.size() && (std::isalpha((unsigned char)peek()) || peek() == '(') &&
                       !is_cmp_boundary()) {
                // implicit multiplication: 2x, 2(x+1), x y
                Expr r = parse_factor();
                e = ex::mul(e, r);
            } else {
                return e;
            }
        }
    }

    Expr parse_factor() {
        skip_ws();
        if (pos_ < s_.size() && peek() == '-') {
            ++pos_;
            return ex::neg(parse_factor());
        }
        Expr a = parse_atom();
        skip_ws();
        if (pos_ < s_.size() && peek() == '^') {
            ++pos_;
            return ex::pow(a, parse_factor());
        }
        return a;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = peek();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            skip_ws();
            expect(')');
            return e;
        }
        if (c == '$') {
            ++pos_;
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit((unsigned char)peek())) ++pos_;
            if (pos_ == start) fail("expected variable id after '$'");
            return ex::var(std::stoi(s_.substr(start, pos_ - start)));
        }
        if (std::isdigit((unsigned char)c) || c == '.') {
            return parse_number();
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            std::string name = parse_ident();
            skip_ws();
            if (pos_ < s_.size() && peek() == '(') {
                ++pos_;
                std::vector<Expr> args;
                skip_ws();
                if (pos_ < s_.size() && peek() == ')') {
                    ++pos_;
                } else {
                    for (;;) {
                        args.push_back(parse_expr());
                        skip_ws();
                        if (pos_ < s_.size() && peek() == ',') {
                            ++pos_;
                            continue;
                        }
                        expect(')');
                        break;
                    }
                }
                return ex::call(name, std::move(args));
            }
            return ex::sym(name);
        }
        fail(std::string("unexpected character '") + c + "'");
        return nullptr;  // unreachable
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit((unsigned char)peek()) || peek() == '.')) {
            ++pos_;
        }
        // exponent form 1e-3
        if (pos_ < s_.size() && (peek() == 'e' || peek() == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (peek() == '+' || peek() == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit((unsigned char)peek())) {
                while (pos_ < s_.size() && std::isdigit((unsigned char)peek())) ++pos_;
            } else {
                pos_ = save;  // 'e' belongs to an identifier, not this number
            }
        }
        try {
            return ex::num(std::stod(s_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            fail("malformed number");
        }
        return nullptr;  // unreachable
    }

    std::string parse_ident() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum((unsigned char)peek()) || peek() == '_' || peek() == '\'')) {
            ++pos_;
        }
        return s_.substr(start, pos_ - start);
    }

    bool is_cmp_boundary() const { return false; }

    char peek() const { return s_[pos_]; }

    void expect(char c) {
        if (pos_ >= s_.size() || s_[pos_] != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace((unsigned char)s_[pos_])) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(const std::string& s) {
    if (s.empty()) throw ParseError(0, "empty expression");
    return detail::ExprParser(s).parse_full();
}

inline Comparison parse_comparison(const std::string& s) {
    if (s.empty()) throw ParseError(0, "empty comparison");
    return detail::ExprParser(s).parse_comparison_full();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kPi = 3.14159265358979323846;

// Evaluates an expression; returns nullopt if any Var/Sym is unbound or the
// value is undefined (division by zero, sqrt of a negative, ...).
// var_lookup(id) supplies Var values; symbols other than "pi" are unbound.
template <typename VarLookup>
    requires std::invocable<VarLookup, int>
inline std::optional<double> eval_expr(const Expr& e, VarLookup&& var_lookup) {
    switch (e->op) {
        case ExprOp::Num:
            return e->num;
        case ExprOp::Sym:
            if (e->sym == "pi") return kPi;
            return std::nullopt;
        case ExprOp::Var:
            return var_lookup(e->var);
        case ExprOp::Neg: {
            auto a = eval_expr(e->args[0], var_lookup);
            if (!a) return std::nullopt;
            return -*a;
        }
        case ExprOp::Call: {
            if (e->args.size() != 1) return std::nullopt;
            auto a = eval_expr(e->args[0], var_lookup);
            if (!a) return std::nullopt;
            if (e->sym == "sin") return std::sin(*a * kDegToRad);
            if (e->sym == "cos") return std::cos(*a * kDegToRad);
            if (e->sym == "tan") {
                double c = std::cos(*a * kDegToRad);
                if (std::abs(c) < 1e-12) return std::nullopt;
                return std::tan(*a * kDegToRad);
            }
            if (e->sym == "sqrt") {
                if (*a < 0) return std::nullopt;
                return std::sqrt(*a);
            }
            if (e->sym == "abs") return std::abs(*a);
            return std::nullopt;
        }
        default:
            break;
    }
    auto a = eval_expr(e->args[0], var_lookup);
    auto b = eval_expr(e->args[1], var_lookup);
    if (!a || !b) return std::nullopt;
    switch (e->op) {
        case ExprOp::Add: return *a + *b;
        case ExprOp::Sub: return *a - *b;
        case ExprOp::Mul: return *a * *b;
        case ExprOp::Div:
            if (std::abs(*b) < 1e-300) return std::nullopt;
            return *a / *b;
        case ExprOp::Pow: {
            double r = std::pow(*a, *b);
            if (!std::isfinite(r)) return std::nullopt;
            return r;
        }
        default:
            return std::nullopt;
    }
}

inline std::optional<double> eval_expr(const Expr& e,
                                       const std::map<int, double>& bindings) {
    return eval_expr(e, [&](int id) -> std::optional<double> {
        auto it = bindings.find(id);
        if (it == bindings.end()) return std::nullopt;
        return it->second;
    });
}

inline std::optional<double> eval_const(const Expr& e) {
    return eval_expr(e, [](int) -> std::optional<double> { return std::nullopt; });
}

// ---------------------------------------------------------------------------
// Transformations
// ---------------------------------------------------------------------------

// Rebuilds the tree, replacing each Var node that has a binding with its value.
inline Expr substitute(const Expr& e, const std::map<int, double>& bindings) {
    switch (e->op) {
        case ExprOp::Num:
        case ExprOp::Sym:
            return e;
        case ExprOp::Var: {
            auto it = bindings.find(e->var);
            if (it == bindings.end()) return e;
            return ex::num(it->second);
        }
        default: {
            std::vector<Expr> args;
            args.reserve(e->args.size());
            bool changed = false;
            for (const auto& a : e->args) {
                Expr t = substitute(a, bindings);
                changed = changed || t != a;
                args.push_back(std::move(t));
            }
            if (!changed) return e;
            auto n = std::make_shared<ExprNode>(*e);
            n->args = std::move(args);
            return n;
        }
    }
}

// Rebuilds the tree, mapping leaf nodes (Sym and Call) through fn. fn returns
// nullptr to keep a node unchanged; Call arguments are not descended into when
// fn rewrites the call itself.
template <typename Fn>
inline Expr map_leaves(const Expr& e, Fn&& fn) {
    if (e->op == ExprOp::Sym || e->op == ExprOp::Call) {
        if (Expr r = fn(e)) return r;
    }
    if (e->args.empty()) return e;
    std::vector<Expr> args;
    args.reserve(e->args.size());
    bool changed = false;
    for (const auto& a : e->args) {
        Expr t = map_leaves(a, fn);
        changed = changed || t != a;
        args.push_back(std::move(t));
    }
    if (!changed) return e;
    auto n = std::make_shared<ExprNode>(*e);
    n->args = std::move(args);
    return n;
}

inline void collect_vars(const Expr& e, std::set<int>& out) {
    if (e->op == ExprOp::Var) out.insert(e->var);
    for (const auto& a : e->args) collect_vars(a, out);
}

inline std::set<int> vars_of(const Expr& e) {
    std::set<int> s;
    collect_vars(e, s);
    return s;
}

inline bool contains_var(const Expr& e) {
    if (e->op == ExprOp::Var) return true;
    for (const auto& a : e->args) {
        if (contains_var(a)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Linear form extraction
// ---------------------------------------------------------------------------

// expr == sum(coeff[v] * v) + constant, or nullopt if the expression is not
// linear in its variables. Subtrees without variables are folded numerically.
struct LinearForm {
    std::map<int, double> coeff;
    double constant = 0.0;
};

inline std::optional<LinearForm> linear_form(const Expr& e) {
    if (!contains_var(e)) {
        auto v = eval_const(e);
        if (!v) return std::nullopt;
        LinearForm f;
        f.constant = *v;
        return f;
    }
    switch (e->op) {
        case ExprOp::Var: {
            LinearForm f;
            f.coeff[e->var] = 1.0;
            return f;
        }
        case ExprOp::Neg: {
            auto a = linear_form(e->args[0]);
            if (!a) return std::nullopt;
            for (auto& [v, c] : a->coeff) c = -c;
            a->constant = -a->constant;
            return a;
        }
        case ExprOp::Add:
        case ExprOp::Sub: {
            auto a = linear_form(e->args[0]);
            auto b = linear_form(e->args[1]);
            if (!a || !b) return std::nullopt;
            double s = e->op == ExprOp::Add ? 1.0 : -1.0;
            for (const auto& [v, c] : b->coeff) a->coeff[v] += s * c;
            a->constant += s * b->constant;
            return a;
        }
        case ExprOp::Mul: {
            // linear only when one side is constant
            const Expr& l = e->args[0];
            const Expr& r = e->args[1];
            const Expr* linside = nullptr;
            double k = 0.0;
            if (!contains_var(l)) {
                auto v = eval_const(l);
                if (!v) return std::nullopt;
                k = *v;
                linside = &r;
            } else if (!contains_var(r)) {
                auto v = eval_const(r);
                if (!v) return std::nullopt;
                k = *v;
                linside = &l;
            } else {
                return std::nullopt;
            }
            auto a = linear_form(*linside);
            if (!a) return std::nullopt;
            for (auto& [v, c] : a->coeff) c *= k;
            a->constant *= k;
            return a;
        }
        case ExprOp::Div: {
            if (contains_var(e->args[1])) return std::nullopt;
            auto d = eval_const(e->args[1]);
            if (!d || std::abs(*d) < 1e-300) return std::nullopt;
            auto a = linear_form(e->args[0]);
            if (!a) return std::nullopt;
            for (auto& [v, c] : a->coeff) c /= *d;
            a->constant /= *d;
            return a;
        }
        default:
            return std::nullopt;  // Pow/Call over variables: nonlinear
    }
}

// ---------------------------------------------------------------------------
// Canonical keys (for equation deduplication)
// ---------------------------------------------------------------------------

namespace detail {

// Canonical s-expression string: constants folded, commutative chains sorted.
inline std::string normal_key(const Expr& e);

inline void flatten(const Expr& e, ExprOp op, std::vector<Expr>& out) {
    if (e->op == op) {
        flatten(e->args[0], op, out);
        flatten(e->args[1], op, out);
    } else {
        out.push_back(e);
    }
}

inline std::string key_number(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

inline std::string normal_key(const Expr& e) {
    if (!contains_var(e)) {
        if (auto v = eval_const(e)) return key_number(*v);
    }
    switch (e->op) {
        case ExprOp::Num:
            return key_number(e->num);
        case ExprOp::Sym:
            return "'" + e->sym;
        case ExprOp::Var:
            return "$" + std::to_string(e->var);
        case ExprOp::Call: {
            std::string s = "(" + e->sym;
            for (const auto& a : e->args) s += " " + normal_key(a);
            return s + ")";
        }
        case ExprOp::Neg:
            return "(* -1 " + normal_key(e->args[0]) + ")";
        case ExprOp::Sub:
            return normal_key(ex::add(e->args[0], ex::neg(e->args[1])));
        case ExprOp::Add:
        case ExprOp::Mul: {
            std::vector<Expr> parts;
            flatten(e, e->op, parts);
            std::vector<std::string> keys;
            keys.reserve(parts.size());
            for (const auto& p : parts) keys.push_back(normal_key(p));
            std::sort(keys.begin(), keys.end());
            std::string s = e->op == ExprOp::Add ? "(+" : "(*";
            for (const auto& k : keys) s += " " + k;
            return s + ")";
        }
        case ExprOp::Div:
            return "(/ " + normal_key(e->args[0]) + " " + normal_key(e->args[1]) + ")";
        case ExprOp::Pow:
            return "(^ " + normal_key(e->args[0]) + " " + normal_key(e->args[1]) + ")";
    }
    return "?";
}

}  // namespace detail

inline std::string normal_key(const Expr& e) { return detail::normal_key(e); }

}  // namespace holo
