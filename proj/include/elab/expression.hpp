#pragma once

#include <memory>
#include <string>

namespace elab {

/// Variables visible to an expression.
struct ExpressionScope {
    double x = 0.0;
    double y = 0.0;
    /// Distance to the boundary.
    double d = 0.0;
};

/// Arithmetic expression in x, y, r (= |(x,y)|) and d, with + - * / ^,
/// the constants pi and e, and the functions sin cos tan exp log sqrt abs
/// atan2 min max pow. Parse errors are elab::Error with a column number.
class Expression {
public:
    explicit Expression(const std::string& text);
    ~Expression();
    Expression(const Expression&);
    Expression& operator=(const Expression&);
    Expression(Expression&&) noexcept;
    Expression& operator=(Expression&&) noexcept;

    [[nodiscard]] double operator()(const ExpressionScope& s) const;
    [[nodiscard]] double operator()(double x, double y, double d = 0.0) const { return (*this)({x, y, d}); }
    [[nodiscard]] const std::string& text() const noexcept { return text_; }
    /// True when the expression reads d.
    [[nodiscard]] bool uses_distance() const noexcept { return uses_distance_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
    bool uses_distance_ = false;
};

}  // namespace elab
