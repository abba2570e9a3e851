#include "fracdrift/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "fracdrift/errors.hpp"

namespace fracdrift {

using cd = std::complex<double>;

struct Expression::Node {
    enum class Kind { constant, var_u1, var_u2, neg, add, sub, mul, div, pow, call } kind;
    cd value{};
    std::string fn;
    std::vector<std::shared_ptr<const Node>> args;

    cd eval(double u1, double u2) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::var_u1: return u1;
            case Kind::var_u2: return u2;
            case Kind::neg: return -args[0]->eval(u1, u2);
            case Kind::add: return args[0]->eval(u1, u2) + args[1]->eval(u1, u2);
            case Kind::sub: return args[0]->eval(u1, u2) - args[1]->eval(u1, u2);
            case Kind::mul: return args[0]->eval(u1, u2) * args[1]->eval(u1, u2);
            case Kind::div: return args[0]->eval(u1, u2) / args[1]->eval(u1, u2);
            case Kind::pow: {
                const cd b = args[0]->eval(u1, u2), e = args[1]->eval(u1, u2);
                if (e.imag() == 0.0 && b.imag() == 0.0 && e.real() == std::round(e.real()))
                    return std::pow(b.real(), e.real());
                return std::pow(b, e);
            }
            case Kind::call: {
                const cd a = args[0]->eval(u1, u2);
                if (fn == "sin") return std::sin(a);
                if (fn == "cos") return std::cos(a);
                if (fn == "exp") return std::exp(a);
                if (fn == "sqrt") return std::sqrt(a);
                if (fn == "abs") return std::abs(a);
                if (fn == "re") return a.real();
                if (fn == "im") return a.imag();
                if (fn == "conj") return std::conj(a);
                // sgn
                return a.real() > 0.0 ? 1.0 : (a.real() < 0.0 ? -1.0 : 0.0);
            }
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, std::vector<NodePtr> args = {}, cd value = {}, std::string fn = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->args = std::move(args);
    n->value = value;
    n->fn = std::move(fn);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression: " + what + " at column " + std::to_string(pos_ + 1) + " in '" +
                          std::string(s_) + "'");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+')) lhs = make(Kind::add, {lhs, term()});
            else if (eat('-')) lhs = make(Kind::sub, {lhs, term()});
            else return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make(Kind::mul, {lhs, unary()});
            else if (eat('/')) lhs = make(Kind::div, {lhs, unary()});
            else return lhs;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(Kind::neg, {unary()});
        if (eat('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make(Kind::pow, {base, unary()});
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::string tail(s_.substr(pos_));
            char* end = nullptr;
            const double v = std::strtod(tail.c_str(), &end);
            if (end == tail.c_str()) fail("bad number");
            pos_ += static_cast<std::size_t>(end - tail.c_str());
            return make(Kind::constant, {}, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string id(s_.substr(start, pos_ - start));
            if (id == "u1") return make(Kind::var_u1);
            if (id == "u2") return make(Kind::var_u2);
            if (id == "i") return make(Kind::constant, {}, cd(0.0, 1.0));
            if (id == "pi") return make(Kind::constant, {}, std::numbers::pi);
            static const char* fns[] = {"sin", "cos", "exp", "sqrt", "abs", "sgn", "re", "im", "conj"};
            for (const char* f : fns)
                if (id == f) {
                    if (!eat('(')) fail("expected '(' after " + id);
                    NodePtr a = expr();
                    if (!eat(')')) fail("expected ')'");
                    return make(Kind::call, {a}, {}, id);
                }
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected character");
    }
};

}  // namespace

Expression Expression::parse(std::string_view text) {
    Expression e;
    e.text_ = std::string(text);
    e.root_ = Parser(text).parse();
    return e;
}

std::complex<double> Expression::eval(double u1, double u2) const { return root_->eval(u1, u2); }

}  // namespace fracdrift
