#pragma once

// =============================================================================
// Expression trees for ODE right-hand sides
// =============================================================================
// A small immutable AST over the variables t, x1, x2, u, du with a parser,
// evaluator, symbolic differentiation, a rule-based simplifier and a
// canonical printer. Every model right-hand side in the library lives here.
// =============================================================================

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace hysteresis {

// =============================================================================
// Errors
// =============================================================================

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax or lexical error, carrying the 0-based character offset.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position)
        : Error(message + " at position " + std::to_string(position)), position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Raised when an expression is evaluated at a singular point (exact zero
/// denominator).
class EvalError : public Error {
public:
    using Error::Error;
};

// =============================================================================
// Variables and environments
// =============================================================================

enum class Var : std::uint8_t { t, x1, x2, u, du };

inline constexpr std::array<Var, 5> all_vars{Var::t, Var::x1, Var::x2, Var::u, Var::du};

[[nodiscard]] inline std::string_view var_name(Var v) noexcept {
    switch (v) {
        case Var::t: return "t";
        case Var::x1: return "x1";
        case Var::x2: return "x2";
        case Var::u: return "u";
        case Var::du: return "du";
    }
    return "?";
}

/// Bindings for all five variables; unused ones are simply ignored.
struct Env {
    double t = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
    double u = 0.0;
    double du = 0.0;

    [[nodiscard]] double operator[](Var v) const noexcept {
        switch (v) {
            case Var::t: return t;
            case Var::x1: return x1;
            case Var::x2: return x2;
            case Var::u: return u;
            case Var::du: return du;
        }
        return 0.0;
    }

    [[nodiscard]] double& operator[](Var v) noexcept {
        switch (v) {
            case Var::t: return t;
            case Var::x1: return x1;
            case Var::x2: return x2;
            case Var::u: return u;
            case Var::du: break;
        }
        return du;
    }
};

// =============================================================================
// Expr
// =============================================================================

enum class Op : std::uint8_t {
    constant,
    variable,
    add,
    sub,
    mul,
    div,
    neg,
    pow_int,
    abs,
    sign,
    sin,
    cos,
    exp,
};

/// Immutable expression handle. Copies share the underlying tree.
class Expr {
public:
    Expr() : Expr(constant(0.0)) {}

    [[nodiscard]] static Expr constant(double value) {
        return Expr(std::make_shared<const Node>(Node{Op::constant, value, Var::t, 0, nullptr, nullptr}));
    }
    [[nodiscard]] static Expr variable(Var v) {
        return Expr(std::make_shared<const Node>(Node{Op::variable, 0.0, v, 0, nullptr, nullptr}));
    }
    [[nodiscard]] static Expr binary(Op op, const Expr& lhs, const Expr& rhs) {
        return Expr(std::make_shared<const Node>(Node{op, 0.0, Var::t, 0, lhs.node_, rhs.node_}));
    }
    [[nodiscard]] static Expr unary(Op op, const Expr& arg) {
        return Expr(std::make_shared<const Node>(Node{op, 0.0, Var::t, 0, arg.node_, nullptr}));
    }
    [[nodiscard]] static Expr pow(const Expr& base, int exponent) {
        if (exponent < 0) {
            throw Error("integer exponent must be non-negative");
        }
        return Expr(std::make_shared<const Node>(Node{Op::pow_int, 0.0, Var::t, exponent, base.node_, nullptr}));
    }

    [[nodiscard]] Op op() const noexcept { return node_->op; }
    [[nodiscard]] double value() const noexcept { return node_->value; }
    [[nodiscard]] Var var() const noexcept { return node_->var; }
    [[nodiscard]] int exponent() const noexcept { return node_->exponent; }
    [[nodiscard]] Expr lhs() const { return Expr(node_->lhs); }
    [[nodiscard]] Expr rhs() const { return Expr(node_->rhs); }
    [[nodiscard]] Expr arg() const { return Expr(node_->lhs); }

    [[nodiscard]] bool is_constant() const noexcept { return node_->op == Op::constant; }
    [[nodiscard]] bool is_constant(double v) const noexcept {
        return node_->op == Op::constant && node_->value == v;
    }

    [[nodiscard]] bool references(Var v) const noexcept { return references(node_.get(), v); }

    /// Structural equality.
    friend bool operator==(const Expr& a, const Expr& b) noexcept { return equal(a.node_.get(), b.node_.get()); }

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(Op::add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(Op::sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(Op::mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(Op::div, a, b); }
    friend Expr operator-(const Expr& a) { return unary(Op::neg, a); }

private:
    struct Node {
        Op op;
        double value;
        Var var;
        int exponent;
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };

    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    static bool equal(const Node* a, const Node* b) noexcept {
        if (a == b) return true;
        if (a == nullptr || b == nullptr) return false;
        if (a->op != b->op) return false;
        switch (a->op) {
            case Op::constant: return a->value == b->value;
            case Op::variable: return a->var == b->var;
            case Op::pow_int: return a->exponent == b->exponent && equal(a->lhs.get(), b->lhs.get());
            default: return equal(a->lhs.get(), b->lhs.get()) && equal(a->rhs.get(), b->rhs.get());
        }
    }

    static bool references(const Node* n, Var v) noexcept {
        if (n == nullptr) return false;
        if (n->op == Op::variable) return n->var == v;
        return references(n->lhs.get(), v) || references(n->rhs.get(), v);
    }

    std::shared_ptr<const Node> node_;
};

[[nodiscard]] inline bool is_binary(Op op) noexcept {
    return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div;
}

[[nodiscard]] inline bool is_function(Op op) noexcept {
    return op == Op::abs || op == Op::sign || op == Op::sin || op == Op::cos || op == Op::exp;
}

[[nodiscard]] inline std::string_view function_name(Op op) noexcept {
    switch (op) {
        case Op::abs: return "abs";
        case Op::sign: return "sign";
        case Op::sin: return "sin";
        case Op::cos: return "cos";
        case Op::exp: return "exp";
        default: return "";
    }
}

/// sign(0) is 0, matching the kink convention of the |.| derivative.
[[nodiscard]] inline double sign_of(double z) noexcept { return static_cast<double>((z > 0.0) - (z < 0.0)); }

// =============================================================================
// Evaluation
// =============================================================================

[[nodiscard]] inline double eval(const Expr& e, const Env& env) {
    switch (e.op()) {
        case Op::constant: return e.value();
        case Op::variable: return env[e.var()];
        case Op::add: return eval(e.lhs(), env) + eval(e.rhs(), env);
        case Op::sub: return eval(e.lhs(), env) - eval(e.rhs(), env);
        case Op::mul: return eval(e.lhs(), env) * eval(e.rhs(), env);
        case Op::div: {
            const double num = eval(e.lhs(), env);
            const double den = eval(e.rhs(), env);
            if (den == 0.0) {
                throw EvalError("division by zero");
            }
            return num / den;
        }
        case Op::neg: return -eval(e.arg(), env);
        case Op::pow_int: {
            const double base = eval(e.arg(), env);
            double result = 1.0;
            for (int i = 0; i < e.exponent(); ++i) result *= base;
            return result;
        }
        case Op::abs: return std::fabs(eval(e.arg(), env));
        case Op::sign: return sign_of(eval(e.arg(), env));
        case Op::sin: return std::sin(eval(e.arg(), env));
        case Op::cos: return std::cos(eval(e.arg(), env));
        case Op::exp: return std::exp(eval(e.arg(), env));
    }
    return 0.0;
}

/// Flattened postfix form of an Expr for repeated evaluation in hot loops.
/// Produces results identical to eval().
class CompiledExpr {
public:
    CompiledExpr() : CompiledExpr(Expr::constant(0.0)) {}
    explicit CompiledExpr(const Expr& e) : source_(e) {
        int depth = 0;
        emit(e, depth);
    }

    [[nodiscard]] double operator()(const Env& env) const {
        if (max_depth_ > kStack) return eval(source_, env);
        std::array<double, kStack> stack;
        int top = -1;
        for (const Instr& in : code_) {
            switch (in.op) {
                case Op::constant: stack[++top] = in.value; break;
                case Op::variable: stack[++top] = env[in.var]; break;
                case Op::add: --top; stack[top] += stack[top + 1]; break;
                case Op::sub: --top; stack[top] -= stack[top + 1]; break;
                case Op::mul: --top; stack[top] *= stack[top + 1]; break;
                case Op::div:
                    --top;
                    if (stack[top + 1] == 0.0) throw EvalError("division by zero");
                    stack[top] /= stack[top + 1];
                    break;
                case Op::neg: stack[top] = -stack[top]; break;
                case Op::pow_int: {
                    const double base = stack[top];
                    double r = 1.0;
                    for (int i = 0; i < in.exponent; ++i) r *= base;
                    stack[top] = r;
                    break;
                }
                case Op::abs: stack[top] = std::fabs(stack[top]); break;
                case Op::sign: stack[top] = sign_of(stack[top]); break;
                case Op::sin: stack[top] = std::sin(stack[top]); break;
                case Op::cos: stack[top] = std::cos(stack[top]); break;
                case Op::exp: stack[top] = std::exp(stack[top]); break;
            }
        }
        return stack[0];
    }

    [[nodiscard]] const Expr& source() const noexcept { return source_; }

private:
    static constexpr int kStack = 64;

    struct Instr {
        Op op;
        Var var;
        int exponent;
        double value;
    };

    void emit(const Expr& e, int& depth) {
        switch (e.op()) {
            case Op::constant:
            case Op::variable:
                code_.push_back({e.op(), e.var(), 0, e.value()});
                max_depth_ = std::max(max_depth_, ++depth);
                return;
            default: break;
        }
        if (is_binary(e.op())) {
            emit(e.lhs(), depth);
            emit(e.rhs(), depth);
            --depth;
        } else {
            emit(e.arg(), depth);
        }
        code_.push_back({e.op(), Var::t, e.exponent(), 0.0});
    }

    Expr source_;
    std::vector<Instr> code_;
    int max_depth_ = 0;
};

// =============================================================================
// Substitution and simplification
// =============================================================================

/// Replaces every occurrence of `v` by `replacement`.
[[nodiscard]] inline Expr substitute(const Expr& e, Var v, const Expr& replacement) {
    switch (e.op()) {
        case Op::constant: return e;
        case Op::variable: return e.var() == v ? replacement : e;
        case Op::pow_int: return Expr::pow(substitute(e.arg(), v, replacement), e.exponent());
        default:
            if (is_binary(e.op())) {
                return Expr::binary(e.op(), substitute(e.lhs(), v, replacement), substitute(e.rhs(), v, replacement));
            }
            return Expr::unary(e.op(), substitute(e.arg(), v, replacement));
    }
}

namespace detail {

inline double fold_unary(Op op, double a) {
    switch (op) {
        case Op::neg: return -a;
        case Op::abs: return std::fabs(a);
        case Op::sign: return sign_of(a);
        case Op::sin: return std::sin(a);
        case Op::cos: return std::cos(a);
        case Op::exp: return std::exp(a);
        default: return a;
    }
}

inline Expr simplify_once(const Expr& e) {
    switch (e.op()) {
        case Op::constant:
        case Op::variable: return e;
        case Op::pow_int: {
            const Expr base = simplify_once(e.arg());
            if (e.exponent() == 0) return Expr::constant(1.0);
            if (e.exponent() == 1) return base;
            if (base.is_constant()) {
                double r = 1.0;
                for (int i = 0; i < e.exponent(); ++i) r *= base.value();
                return Expr::constant(r);
            }
            return Expr::pow(base, e.exponent());
        }
        case Op::neg: {
            const Expr a = simplify_once(e.arg());
            if (a.is_constant()) return Expr::constant(-a.value());
            if (a.op() == Op::neg) return a.arg();
            return -a;
        }
        case Op::abs:
        case Op::sign:
        case Op::sin:
        case Op::cos:
        case Op::exp: {
            Expr a = simplify_once(e.arg());
            if (a.is_constant()) return Expr::constant(fold_unary(e.op(), a.value()));
            if ((e.op() == Op::abs || e.op() == Op::cos) && a.op() == Op::neg) a = a.arg();
            if (e.op() == Op::abs && (a.op() == Op::abs)) return a;
            return Expr::unary(e.op(), a);
        }
        default: break;
    }

    const Expr a = simplify_once(e.lhs());
    const Expr b = simplify_once(e.rhs());
    switch (e.op()) {
        case Op::add:
            if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
            if (a.is_constant(0.0)) return b;
            if (b.is_constant(0.0)) return a;
            if (b.op() == Op::neg) return a - b.arg();
            if (a.op() == Op::neg) return b - a.arg();
            return a + b;
        case Op::sub:
            if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
            if (b.is_constant(0.0)) return a;
            if (a == b) return Expr::constant(0.0);
            if (a.is_constant(0.0)) return -b;
            if (b.op() == Op::neg) return a + b.arg();
            return a - b;
        case Op::mul:
            if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
            if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
            if (a.is_constant(1.0)) return b;
            if (b.is_constant(1.0)) return a;
            if (a.is_constant(-1.0)) return -b;
            if (b.is_constant(-1.0)) return -a;
            if (a.op() == Op::neg && b.op() == Op::neg) return a.arg() * b.arg();
            return a * b;
        case Op::div:
            if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
                return Expr::constant(a.value() / b.value());
            }
            if (a.is_constant(0.0) && !b.is_constant()) return Expr::constant(0.0);
            if (b.is_constant(1.0)) return a;
            return a / b;
        default: return e;
    }
}

}  // namespace detail

/// Constant folding, 0/1 identities, negation cleanup. Iterated to a fixed
/// point so the result is idempotent under further simplification.
[[nodiscard]] inline Expr simplify(const Expr& e) {
    Expr current = e;
    for (int pass = 0; pass < 16; ++pass) {
        Expr next = detail::simplify_once(current);
        if (next == current) return next;
        current = std::move(next);
    }
    return current;
}

// =============================================================================
// Differentiation
// =============================================================================

namespace detail {

inline Expr derive(const Expr& e, Var v) {
    const Expr zero = Expr::constant(0.0);
    switch (e.op()) {
        case Op::constant: return zero;
        case Op::variable: return Expr::constant(e.var() == v ? 1.0 : 0.0);
        case Op::add: return derive(e.lhs(), v) + derive(e.rhs(), v);
        case Op::sub: return derive(e.lhs(), v) - derive(e.rhs(), v);
        case Op::mul: return derive(e.lhs(), v) * e.rhs() + e.lhs() * derive(e.rhs(), v);
        case Op::div:
            return (derive(e.lhs(), v) * e.rhs() - e.lhs() * derive(e.rhs(), v)) / Expr::pow(e.rhs(), 2);
        case Op::neg: return -derive(e.arg(), v);
        case Op::pow_int:
            if (e.exponent() == 0) return zero;
            return Expr::constant(static_cast<double>(e.exponent())) * Expr::pow(e.arg(), e.exponent() - 1) *
                   derive(e.arg(), v);
        case Op::abs: return Expr::unary(Op::sign, e.arg()) * derive(e.arg(), v);
        case Op::sign: return zero;
        case Op::sin: return Expr::unary(Op::cos, e.arg()) * derive(e.arg(), v);
        case Op::cos: return -(Expr::unary(Op::sin, e.arg()) * derive(e.arg(), v));
        case Op::exp: return e * derive(e.arg(), v);
    }
    return zero;
}

}  // namespace detail

/// Exact symbolic derivative, simplified. d|z| = sign(z) dz with sign(0) = 0.
[[nodiscard]] inline Expr differentiate(const Expr& e, Var v) { return simplify(detail::derive(e, v)); }

// =============================================================================
// Printing
// =============================================================================

namespace detail {

// Binding strength used to decide where parentheses are required.
inline int precedence(const Expr& e) {
    switch (e.op()) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow_int: return 4;
        case Op::constant: return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
        default: return 5;
    }
}

inline std::string format_number(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), ptr);
}

inline std::string render(const Expr& e);

inline std::string wrap(const Expr& e, bool parens) { return parens ? "(" + render(e) + ")" : render(e); }

inline std::string render(const Expr& e) {
    switch (e.op()) {
        case Op::constant: return format_number(e.value());
        case Op::variable: return std::string(var_name(e.var()));
        case Op::neg: return "-" + wrap(e.arg(), precedence(e.arg()) < 3);
        case Op::pow_int:
            return wrap(e.arg(), precedence(e.arg()) < 5) + "^" + std::to_string(e.exponent());
        case Op::add:
        case Op::sub: {
            const char* sym = e.op() == Op::add ? " + " : " - ";
            return wrap(e.lhs(), precedence(e.lhs()) < 1) + sym + wrap(e.rhs(), precedence(e.rhs()) <= 1);
        }
        case Op::mul:
        case Op::div: {
            const char* sym = e.op() == Op::mul ? "*" : "/";
            return wrap(e.lhs(), precedence(e.lhs()) < 2) + sym + wrap(e.rhs(), precedence(e.rhs()) <= 2);
        }
        default: return std::string(function_name(e.op())) + "(" + render(e.arg()) + ")";
    }
}

}  // namespace detail

/// Canonical rendering with the minimal parentheses needed so that
/// parse(to_text(e)) rebuilds the same tree for simplified expressions.
[[nodiscard]] inline std::string to_text(const Expr& e) { return detail::render(e); }

// =============================================================================
// Parsing
// =============================================================================
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' INTEGER)*
//   primary := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'
//
// Variables: t, x (alias of x1), x1, x2, u, du.  Functions: abs, sign, sin,
// cos, exp.

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse_all() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
        Expr e = parse_expr();
        skip_space();
        if (pos_ < text_.size()) {
            throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
        }
        return e;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but reached end", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = lhs + parse_term();
            } else if (accept('-')) {
                lhs = lhs - parse_term();
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = lhs * parse_unary();
            } else if (accept('/')) {
                lhs = lhs / parse_unary();
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary() {
        if (accept('-')) {
            Expr operand = parse_unary();
            if (operand.is_constant()) return Expr::constant(-operand.value());
            return -operand;
        }
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        while (accept('^')) {
            skip_space();
            const std::size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
            const bool trailing_number =
                pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E');
            if (pos_ == start || trailing_number) {
                throw ParseError("exponent must be a non-negative integer literal", start);
            }
            int exponent = 0;
            auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, exponent);
            if (ec != std::errc{} || ptr != text_.data() + pos_) {
                throw ParseError("exponent out of range", start);
            }
            base = Expr::pow(base, exponent);
        }
        return base;
    }

    Expr parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expr();
            expect(')');
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (is_ident_start(c)) return parse_identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            const std::size_t exp_digits = pos_;
            digits();
            if (pos_ == exp_digits) pos_ = save;
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc{} || ptr != text_.data() + pos_) {
            throw ParseError("malformed number", start);
        }
        return Expr::constant(value);
    }

    static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);

        if (name == "t") return Expr::variable(Var::t);
        if (name == "x" || name == "x1") return Expr::variable(Var::x1);
        if (name == "x2") return Expr::variable(Var::x2);
        if (name == "u") return Expr::variable(Var::u);
        if (name == "du") return Expr::variable(Var::du);

        Op fn{};
        if (name == "abs") {
            fn = Op::abs;
        } else if (name == "sign") {
            fn = Op::sign;
        } else if (name == "sin") {
            fn = Op::sin;
        } else if (name == "cos") {
            fn = Op::cos;
        } else if (name == "exp") {
            fn = Op::exp;
        } else {
            throw ParseError("unknown identifier '" + std::string(name) + "'", start);
        }
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != '(') {
            throw ParseError("function '" + std::string(name) + "' requires parentheses", pos_);
        }
        ++pos_;
        Expr arg = parse_expr();
        expect(')');
        return Expr::unary(fn, arg);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an expression; throws ParseError with the failing position.
[[nodiscard]] inline Expr parse(std::string_view text) { return detail::Parser(text).parse_all(); }

}  // namespace hysteresis
