#include "elab/expression.hpp"

#include "elab/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace elab {

struct Expression::Node {
    enum class Kind { number, var_x, var_y, var_r, var_d, neg, add, sub, mul, div, pow, call };
    Kind kind = Kind::number;
    double value = 0.0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(const ExpressionScope& s) const
    {
        switch (kind) {
        case Kind::number: return value;
        case Kind::var_x: return s.x;
        case Kind::var_y: return s.y;
        case Kind::var_r: return std::hypot(s.x, s.y);
        case Kind::var_d: return s.d;
        case Kind::neg: return -args[0]->eval(s);
        case Kind::add: return args[0]->eval(s) + args[1]->eval(s);
        case Kind::sub: return args[0]->eval(s) - args[1]->eval(s);
        case Kind::mul: return args[0]->eval(s) * args[1]->eval(s);
        case Kind::div: return args[0]->eval(s) / args[1]->eval(s);
        case Kind::pow: return std::pow(args[0]->eval(s), args[1]->eval(s));
        case Kind::call:
            return fn1 ? fn1(args[0]->eval(s)) : fn2(args[0]->eval(s), args[1]->eval(s));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

double f_abs(double v) { return std::fabs(v); }
double f_sin(double v) { return std::sin(v); }
double f_cos(double v) { return std::cos(v); }
double f_tan(double v) { return std::tan(v); }
double f_exp(double v) { return std::exp(v); }
double f_log(double v) { return std::log(v); }
double f_sqrt(double v) { return std::sqrt(v); }
double f_atan2(double a, double b) { return std::atan2(a, b); }
double f_min(double a, double b) { return std::fmin(a, b); }
double f_max(double a, double b) { return std::fmax(a, b); }
double f_pow(double a, double b) { return std::pow(a, b); }

NodePtr leaf(Kind k, double v = 0.0)
{
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->value = v;
    return n;
}

NodePtr branch(Kind k, std::vector<NodePtr> args)
{
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->args = std::move(args);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr parse()
    {
        auto n = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

    bool uses_distance = false;

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw Error("expression '" + s_ + "' column " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NodePtr sum()
    {
        auto n = product();
        while (true) {
            if (accept('+')) n = branch(Kind::add, {n, product()});
            else if (accept('-')) n = branch(Kind::sub, {n, product()});
            else return n;
        }
    }

    NodePtr product()
    {
        auto n = unary();
        while (true) {
            if (accept('*')) n = branch(Kind::mul, {n, unary()});
            else if (accept('/')) n = branch(Kind::div, {n, unary()});
            else return n;
        }
    }

    NodePtr unary()
    {
        if (accept('-')) return branch(Kind::neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    // Right associative; binds tighter than unary minus on its left: -x^2 = -(x^2).
    NodePtr power()
    {
        auto base = primary();
        if (accept('^')) return branch(Kind::pow, {base, unary()});
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (accept('(')) {
            auto n = sum();
            expect(')');
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number()
    {
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const auto [end, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc() || end == first) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - first);
        return leaf(Kind::number, v);
    }

    NodePtr name()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        skip();
        if (pos_ < s_.size() && s_[pos_] == '(') return call(id, start);
        if (id == "x") return leaf(Kind::var_x);
        if (id == "y") return leaf(Kind::var_y);
        if (id == "r") return leaf(Kind::var_r);
        if (id == "d") {
            uses_distance = true;
            return leaf(Kind::var_d);
        }
        if (id == "pi") return leaf(Kind::number, std::numbers::pi);
        if (id == "e") return leaf(Kind::number, std::numbers::e);
        pos_ = start;
        fail("unknown name '" + id + "'");
    }

    NodePtr call(const std::string& id, std::size_t start)
    {
        struct Unary {
            const char* name;
            double (*fn)(double);
        };
        struct Binary {
            const char* name;
            double (*fn)(double, double);
        };
        static constexpr Unary unary_fns[] = {{"abs", f_abs}, {"sin", f_sin},  {"cos", f_cos}, {"tan", f_tan},
                                              {"exp", f_exp}, {"log", f_log}, {"sqrt", f_sqrt}};
        static constexpr Binary binary_fns[] = {{"atan2", f_atan2}, {"min", f_min}, {"max", f_max}, {"pow", f_pow}};

        expect('(');
        std::vector<NodePtr> args{sum()};
        while (accept(',')) args.push_back(sum());
        expect(')');

        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::call;
        n->args = args;
        for (const auto& f : unary_fns) {
            if (id == f.name) {
                if (args.size() != 1) fail(id + " takes one argument");
                n->fn1 = f.fn;
                return n;
            }
        }
        for (const auto& f : binary_fns) {
            if (id == f.name) {
                if (args.size() != 2) fail(id + " takes two arguments");
                n->fn2 = f.fn;
                return n;
            }
        }
        pos_ = start;
        fail("unknown function '" + id + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text)
{
    Parser p(text_);
    root_ = p.parse();
    uses_distance_ = p.uses_distance;
}

Expression::~Expression() = default;
Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;

double Expression::operator()(const ExpressionScope& s) const { return root_->eval(s); }

}  // namespace elab
