#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace blowup::dsl {

// Expression AST for coefficient functions of (t, x).
//
// Grammar (whitespace-insensitive, numbers in decimal or scientific notation):
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?          -- right-associative, binds tighter
//                                       -- than the unary minus it sits under
//   atom  := number | 't' | 'x' | 'e' | 'pi' | fn '(' expr ')' | '(' expr ')'
//   fn    := exp | log | sqrt | abs

enum class node_kind {
    constant,
    var_t,
    var_x,
    add,
    sub,
    mul,
    div,
    pow,
    neg,
    exp,
    log,
    sqrt,
    abs,
};

struct node;
using node_ptr = std::shared_ptr<const node>;

struct node {
    node_kind kind;
    double value = 0.0; // constant only
    node_ptr a;         // sole operand of unary nodes, lhs of binary nodes
    node_ptr b;         // rhs of binary nodes
};

node_ptr make_constant(double v);
node_ptr make_var_t();
node_ptr make_var_x();
node_ptr make_unary(node_kind k, node_ptr a);
node_ptr make_binary(node_kind k, node_ptr a, node_ptr b);

bool structurally_equal(const node_ptr& a, const node_ptr& b);

// Syntax error: carries the byte offset into the source and the set of
// tokens that would have been accepted at that point.
struct parse_error : std::runtime_error {
    std::size_t offset;
    std::vector<std::string> expected;
    parse_error(const std::string& msg, std::size_t off, std::vector<std::string> exp);
};

// Evaluation domain error: carries the rendered offending subexpression.
struct eval_error : std::runtime_error {
    std::string subexpression;
    eval_error(const std::string& what_msg, std::string subexpr);
};

class expression {
public:
    expression() = default;
    explicit expression(node_ptr root) : root_(std::move(root)) {}

    static expression parse(const std::string& source);

    std::string render() const;

    // Pure: same (t, x) gives bit-identical results on repeat calls.
    // Throws eval_error on log(y<=0), sqrt(y<0), division by zero, or any
    // non-finite intermediate (overflow is a domain error at this layer).
    double evaluate(double t, double x) const;
    double operator()(double t, double x) const { return evaluate(t, x); }

    bool empty() const { return root_ == nullptr; }
    const node_ptr& root() const { return root_; }
    bool depends_on_t() const;
    bool depends_on_x() const;

private:
    node_ptr root_;
};

inline bool operator==(const expression& a, const expression& b) {
    return structurally_equal(a.root(), b.root());
}

} // namespace blowup::dsl
