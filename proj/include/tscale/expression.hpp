#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tscale {

/// Syntax, identifier or arity error in an expression; column is 1-based.
class ParseError : public std::invalid_argument {
public:
    enum class Kind { syntax, unknown_identifier, arity_mismatch };

    ParseError(Kind kind, int column, const std::string& message);

    Kind kind() const { return kind_; }
    int column() const { return column_; }

private:
    Kind kind_;
    int column_;
};

/// Scalar expression over x1..xn and t built from numbers, + - * / ^ and
/// sqrt, abs, exp, log, sin, cos. Immutable and safe to evaluate concurrently.
class Expression {
public:
    struct Node;

    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    double evaluate(std::span<const double> x, double t) const;
    std::string to_string() const;

private:
    std::shared_ptr<const Node> root_;
};

struct ExpressionAst {
    std::vector<Expression> components;
    int n_vars = 0;
};

/// Parses comma-separated components over variables x1..x{n_vars} and t.
ExpressionAst parse_expression(std::string_view text, int n_vars);

/// Parses vector dynamics: exactly n components over x1..xn and t.
ExpressionAst parse_dynamics(std::string_view text, int n);

}  // namespace tscale
