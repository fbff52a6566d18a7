#include "tscale/expression.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>

namespace tscale {

ParseError::ParseError(Kind kind, int column, const std::string& message)
    : std::invalid_argument(message + " at column " + std::to_string(column)),
      kind_(kind),
      column_(column) {}

struct Expression::Node {
    enum class Op { number, var_x, var_t, neg, add, sub, mul, div, pow, call };
    enum class Fn { sqrt, abs, exp, log, sin, cos };

    Op op = Op::number;
    double value = 0.0;  // number
    int index = 0;       // var_x (0-based)
    Fn fn = Fn::sqrt;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

double eval(const Node& n, std::span<const double> x, double t) {
    switch (n.op) {
        case Node::Op::number: return n.value;
        case Node::Op::var_x: return x[static_cast<std::size_t>(n.index)];
        case Node::Op::var_t: return t;
        case Node::Op::neg: return -eval(*n.lhs, x, t);
        case Node::Op::add: return eval(*n.lhs, x, t) + eval(*n.rhs, x, t);
        case Node::Op::sub: return eval(*n.lhs, x, t) - eval(*n.rhs, x, t);
        case Node::Op::mul: return eval(*n.lhs, x, t) * eval(*n.rhs, x, t);
        case Node::Op::div: return eval(*n.lhs, x, t) / eval(*n.rhs, x, t);
        case Node::Op::pow: {
            const double e = eval(*n.rhs, x, t);
            const double b = eval(*n.lhs, x, t);
            if (e == 2.0) return b * b;
            return std::pow(b, e);
        }
        case Node::Op::call: {
            const double a = eval(*n.lhs, x, t);
            switch (n.fn) {
                case Node::Fn::sqrt: return std::sqrt(a);
                case Node::Fn::abs: return std::abs(a);
                case Node::Fn::exp: return std::exp(a);
                case Node::Fn::log: return std::log(a);
                case Node::Fn::sin: return std::sin(a);
                case Node::Fn::cos: return std::cos(a);
            }
        }
    }
    return 0.0;
}

const char* fn_name(Node::Fn f) {
    switch (f) {
        case Node::Fn::sqrt: return "sqrt";
        case Node::Fn::abs: return "abs";
        case Node::Fn::exp: return "exp";
        case Node::Fn::log: return "log";
        case Node::Fn::sin: return "sin";
        case Node::Fn::cos: return "cos";
    }
    return "?";
}

std::string print(const Node& n) {
    switch (n.op) {
        case Node::Op::number: {
            char buf[64];
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
            return std::string(buf, end);
        }
        case Node::Op::var_x: return "x" + std::to_string(n.index + 1);
        case Node::Op::var_t: return "t";
        case Node::Op::neg: return "(-" + print(*n.lhs) + ")";
        case Node::Op::call: return std::string(fn_name(n.fn)) + "(" + print(*n.lhs) + ")";
        default: break;
    }
    const char* sym = n.op == Node::Op::add   ? "+"
                      : n.op == Node::Op::sub ? "-"
                      : n.op == Node::Op::mul ? "*"
                      : n.op == Node::Op::div ? "/"
                                              : "^";
    return "(" + print(*n.lhs) + sym + print(*n.rhs) + ")";
}

class Parser {
public:
    Parser(std::string_view text, int n_vars) : s_(text), n_vars_(n_vars) {}

    std::vector<Expression> parse_list() {
        std::vector<Expression> out;
        out.emplace_back(parse_sum());
        skip_ws();
        while (peek() == ',') {
            ++pos_;
            out.emplace_back(parse_sum());
            skip_ws();
        }
        if (pos_ < s_.size())
            fail(ParseError::Kind::syntax, "unexpected '" + std::string(1, s_[pos_]) + "'");
        return out;
    }

private:
    [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg, std::size_t at) const {
        throw ParseError(kind, static_cast<int>(at) + 1, msg);
    }
    [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const {
        fail(kind, msg, pos_);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    static NodePtr make(Node::Op op, NodePtr lhs, NodePtr rhs = nullptr) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            lhs = make(c == '+' ? Node::Op::add : Node::Op::sub, lhs, parse_product());
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            lhs = make(c == '*' ? Node::Op::mul : Node::Op::div, lhs, parse_unary());
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        if (peek() == '-') {
            ++pos_;
            return make(Node::Op::neg, parse_unary());
        }
        if (peek() == '+') {
            ++pos_;
            return parse_unary();
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            return make(Node::Op::pow, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        const char c = peek();
        if (c == '\0') fail(ParseError::Kind::syntax, "expected operand, found end of input");
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_sum();
            skip_ws();
            if (peek() != ')') fail(ParseError::Kind::syntax, "expected ')'");
            ++pos_;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(ParseError::Kind::syntax, "unexpected '" + std::string(1, c) + "'");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    ++pos_;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc() || ptr != s_.data() + pos_)
            fail(ParseError::Kind::syntax, "malformed number", start);
        auto n = std::make_shared<Node>();
        n->op = Node::Op::number;
        n->value = v;
        return n;
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name(s_.substr(start, pos_ - start));

        skip_ws();
        if (peek() == '(') {
            static const std::pair<const char*, Node::Fn> fns[] = {
                {"sqrt", Node::Fn::sqrt}, {"abs", Node::Fn::abs}, {"exp", Node::Fn::exp},
                {"log", Node::Fn::log},   {"sin", Node::Fn::sin}, {"cos", Node::Fn::cos}};
            const Node::Fn* fn = nullptr;
            for (const auto& [fname, f] : fns)
                if (name == fname) fn = &f;
            if (!fn) fail(ParseError::Kind::unknown_identifier, "unknown function '" + name + "'", start);
            ++pos_;
            std::vector<NodePtr> args;
            skip_ws();
            if (peek() != ')') {
                args.push_back(parse_sum());
                skip_ws();
                while (peek() == ',') {
                    ++pos_;
                    args.push_back(parse_sum());
                    skip_ws();
                }
            }
            if (peek() != ')') fail(ParseError::Kind::syntax, "expected ')'");
            ++pos_;
            if (args.size() != 1)
                fail(ParseError::Kind::arity_mismatch,
                     "function '" + name + "' takes 1 argument, got " + std::to_string(args.size()),
                     start);
            auto n = std::make_shared<Node>();
            n->op = Node::Op::call;
            n->fn = *fn;
            n->lhs = args.front();
            return n;
        }

        auto n = std::make_shared<Node>();
        if (name == "t") {
            n->op = Node::Op::var_t;
            return n;
        }
        if (name == "pi") {
            n->op = Node::Op::number;
            n->value = std::numbers::pi;
            return n;
        }
        if (name.size() > 1 && name[0] == 'x' && name[1] != '0' &&
            name.find_first_not_of("0123456789", 1) == std::string::npos) {
            int k = 0;
            std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (k >= 1 && k <= n_vars_) {
                n->op = Node::Op::var_x;
                n->index = k - 1;
                return n;
            }
        }
        fail(ParseError::Kind::unknown_identifier, "unknown identifier '" + name + "'", start);
    }

    std::string_view s_;
    int n_vars_;
    std::size_t pos_ = 0;
};

}  // namespace

double Expression::evaluate(std::span<const double> x, double t) const { return eval(*root_, x, t); }

std::string Expression::to_string() const { return print(*root_); }

ExpressionAst parse_expression(std::string_view text, int n_vars) {
    if (n_vars < 0) throw std::invalid_argument("n_vars must be >= 0");
    Parser p(text, n_vars);
    return ExpressionAst{p.parse_list(), n_vars};
}

ExpressionAst parse_dynamics(std::string_view text, int n) {
    if (n < 1) throw std::invalid_argument("dimension must be >= 1");
    ExpressionAst ast = parse_expression(text, n);
    if (static_cast<int>(ast.components.size()) != n)
        throw ParseError(ParseError::Kind::arity_mismatch, 1,
                         "expected " + std::to_string(n) + " component(s), got " +
                             std::to_string(ast.components.size()));
    return ast;
}

}  // namespace tscale
