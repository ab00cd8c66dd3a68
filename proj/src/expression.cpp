#include "blowup/expression.hpp"

#include <charconv>
#include <cmath>
#include <utility>

namespace blowup::dsl {

node_ptr make_constant(double v) {
    auto n = std::make_shared<node>();
    n->kind = node_kind::constant;
    n->value = v;
    return n;
}

node_ptr make_var_t() {
    auto n = std::make_shared<node>();
    n->kind = node_kind::var_t;
    return n;
}

node_ptr make_var_x() {
    auto n = std::make_shared<node>();
    n->kind = node_kind::var_x;
    return n;
}

node_ptr make_unary(node_kind k, node_ptr a) {
    auto n = std::make_shared<node>();
    n->kind = k;
    n->a = std::move(a);
    return n;
}

node_ptr make_binary(node_kind k, node_ptr a, node_ptr b) {
    auto n = std::make_shared<node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool structurally_equal(const node_ptr& a, const node_ptr& b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    if (a->kind != b->kind)
        return false;
    if (a->kind == node_kind::constant && a->value != b->value)
        return false;
    return structurally_equal(a->a, b->a) && structurally_equal(a->b, b->b);
}

parse_error::parse_error(const std::string& msg, std::size_t off, std::vector<std::string> exp)
    : std::runtime_error(msg + " at offset " + std::to_string(off)),
      offset(off),
      expected(std::move(exp)) {}

eval_error::eval_error(const std::string& what_msg, std::string subexpr)
    : std::runtime_error(what_msg + " in '" + subexpr + "'"), subexpression(std::move(subexpr)) {}

namespace {

enum class tok_kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct token {
    tok_kind kind;
    std::size_t offset = 0;
    std::string text;   // ident
    double value = 0.0; // number
};

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

std::vector<token> lex(const std::string& src) {
    std::vector<token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        token t;
        t.offset = i;
        if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(src[i + 1]))) {
            std::size_t j = i;
            while (j < n && is_digit(src[j]))
                ++j;
            if (j < n && src[j] == '.') {
                ++j;
                while (j < n && is_digit(src[j]))
                    ++j;
            }
            if (j < n && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < n && (src[k] == '+' || src[k] == '-'))
                    ++k;
                if (k < n && is_digit(src[k])) {
                    ++k;
                    while (k < n && is_digit(src[k]))
                        ++k;
                    j = k; // exponent only consumed when complete
                }
            }
            double v = 0.0;
            auto res = std::from_chars(src.data() + i, src.data() + j, v);
            if (res.ec != std::errc() || res.ptr != src.data() + j)
                throw parse_error("invalid number '" + src.substr(i, j - i) + "'", i, {"number"});
            t.kind = tok_kind::number;
            t.value = v;
            out.push_back(t);
            i = j;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < n && is_ident_char(src[j]))
                ++j;
            t.kind = tok_kind::ident;
            t.text = src.substr(i, j - i);
            out.push_back(t);
            i = j;
            continue;
        }
        switch (c) {
        case '+': t.kind = tok_kind::plus; break;
        case '-': t.kind = tok_kind::minus; break;
        case '*': t.kind = tok_kind::star; break;
        case '/': t.kind = tok_kind::slash; break;
        case '^': t.kind = tok_kind::caret; break;
        case '(': t.kind = tok_kind::lparen; break;
        case ')': t.kind = tok_kind::rparen; break;
        default:
            throw parse_error(std::string("unexpected character '") + c + "'", i,
                              {"number", "identifier", "operator", "'('", "')'"});
        }
        out.push_back(t);
        ++i;
    }
    token e;
    e.kind = tok_kind::end;
    e.offset = n;
    out.push_back(e);
    return out;
}

struct parser {
    std::vector<token> toks;
    std::size_t i = 0;

    const token& peek() const { return toks[i]; }
    token take() { return toks[i++]; }

    node_ptr parse_expr() {
        node_ptr lhs = parse_term();
        while (peek().kind == tok_kind::plus || peek().kind == tok_kind::minus) {
            tok_kind op = take().kind;
            node_ptr rhs = parse_term();
            lhs = make_binary(op == tok_kind::plus ? node_kind::add : node_kind::sub,
                              std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    node_ptr parse_term() {
        node_ptr lhs = parse_unary();
        while (peek().kind == tok_kind::star || peek().kind == tok_kind::slash) {
            tok_kind op = take().kind;
            node_ptr rhs = parse_unary();
            lhs = make_binary(op == tok_kind::star ? node_kind::mul : node_kind::div,
                              std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    node_ptr parse_unary() {
        if (peek().kind == tok_kind::minus) {
            take();
            return make_unary(node_kind::neg, parse_unary());
        }
        return parse_power();
    }

    node_ptr parse_power() {
        node_ptr base = parse_atom();
        if (peek().kind == tok_kind::caret) {
            take();
            node_ptr exponent = parse_unary(); // right-associative; may carry unary minus
            return make_binary(node_kind::pow, std::move(base), std::move(exponent));
        }
        return base;
    }

    node_ptr parse_atom() {
        const token& t = peek();
        switch (t.kind) {
        case tok_kind::number: {
            token num = take();
            return make_constant(num.value);
        }
        case tok_kind::ident: {
            token id = take();
            if (id.text == "t")
                return make_var_t();
            if (id.text == "x")
                return make_var_x();
            if (id.text == "e")
                return make_constant(2.718281828459045235360287);
            if (id.text == "pi")
                return make_constant(3.141592653589793238462643);
            node_kind fk;
            if (id.text == "exp")
                fk = node_kind::exp;
            else if (id.text == "log")
                fk = node_kind::log;
            else if (id.text == "sqrt")
                fk = node_kind::sqrt;
            else if (id.text == "abs")
                fk = node_kind::abs;
            else
                throw parse_error("unknown identifier '" + id.text + "'", id.offset,
                                  {"'t'", "'x'", "'e'", "'pi'", "'exp'", "'log'", "'sqrt'", "'abs'"});
            if (peek().kind != tok_kind::lparen)
                throw parse_error("expected '(' after function name '" + id.text + "'",
                                  peek().offset, {"'('"});
            take();
            node_ptr arg = parse_expr();
            if (peek().kind != tok_kind::rparen)
                throw parse_error("expected ')'", peek().offset, {"')'"});
            take();
            return make_unary(fk, std::move(arg));
        }
        case tok_kind::lparen: {
            take();
            node_ptr inner = parse_expr();
            if (peek().kind != tok_kind::rparen)
                throw parse_error("expected ')'", peek().offset, {"')'"});
            take();
            return inner;
        }
        default:
            throw parse_error("expected an operand", t.offset,
                              {"number", "'t'", "'x'", "'e'", "'pi'", "function", "'('", "'-'"});
        }
    }
};

std::string number_to_string(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Precedence levels used by both parser (implicitly, via the grammar) and
// renderer: add/sub 1, mul/div 2, neg 3, pow 4, atoms 5. render_node wraps
// a child in parentheses whenever its level is below the context level, which
// guarantees parse(render(tree)) reproduces the tree exactly.
int prec(node_kind k) {
    switch (k) {
    case node_kind::add:
    case node_kind::sub: return 1;
    case node_kind::mul:
    case node_kind::div: return 2;
    case node_kind::neg: return 3;
    case node_kind::pow: return 4;
    default: return 5;
    }
}

void render_node(std::string& out, const node* n, int ctx) {
    int p = prec(n->kind);
    bool wrap = p < ctx;
    if (wrap)
        out += '(';
    switch (n->kind) {
    case node_kind::constant: out += number_to_string(n->value); break;
    case node_kind::var_t: out += 't'; break;
    case node_kind::var_x: out += 'x'; break;
    case node_kind::add:
        render_node(out, n->a.get(), 1);
        out += " + ";
        render_node(out, n->b.get(), 2);
        break;
    case node_kind::sub:
        render_node(out, n->a.get(), 1);
        out += " - ";
        render_node(out, n->b.get(), 2);
        break;
    case node_kind::mul:
        render_node(out, n->a.get(), 2);
        out += " * ";
        render_node(out, n->b.get(), 3);
        break;
    case node_kind::div:
        render_node(out, n->a.get(), 2);
        out += " / ";
        render_node(out, n->b.get(), 3);
        break;
    case node_kind::neg:
        out += '-';
        render_node(out, n->a.get(), 3);
        break;
    case node_kind::pow:
        render_node(out, n->a.get(), 5);
        out += '^';
        render_node(out, n->b.get(), 3);
        break;
    case node_kind::exp:
    case node_kind::log:
    case node_kind::sqrt:
    case node_kind::abs: {
        const char* name = n->kind == node_kind::exp    ? "exp"
                           : n->kind == node_kind::log  ? "log"
                           : n->kind == node_kind::sqrt ? "sqrt"
                                                        : "abs";
        out += name;
        out += '(';
        render_node(out, n->a.get(), 0);
        out += ')';
        break;
    }
    }
    if (wrap)
        out += ')';
}

std::string render_subtree(const node* n) {
    std::string out;
    render_node(out, n, 0);
    return out;
}

double check_finite(double v, const node* n) {
    if (!std::isfinite(v))
        throw eval_error("non-finite intermediate", render_subtree(n));
    return v;
}

double eval_node(const node* n, double t, double x) {
    switch (n->kind) {
    case node_kind::constant: return n->value;
    case node_kind::var_t: return t;
    case node_kind::var_x: return x;
    case node_kind::add:
        return check_finite(eval_node(n->a.get(), t, x) + eval_node(n->b.get(), t, x), n);
    case node_kind::sub:
        return check_finite(eval_node(n->a.get(), t, x) - eval_node(n->b.get(), t, x), n);
    case node_kind::mul:
        return check_finite(eval_node(n->a.get(), t, x) * eval_node(n->b.get(), t, x), n);
    case node_kind::div: {
        double num = eval_node(n->a.get(), t, x);
        double den = eval_node(n->b.get(), t, x);
        if (den == 0.0)
            throw eval_error("division by zero", render_subtree(n));
        return check_finite(num / den, n);
    }
    case node_kind::pow: {
        double base = eval_node(n->a.get(), t, x);
        double expo = eval_node(n->b.get(), t, x);
        return check_finite(std::pow(base, expo), n);
    }
    case node_kind::neg: return -eval_node(n->a.get(), t, x);
    case node_kind::exp: return check_finite(std::exp(eval_node(n->a.get(), t, x)), n);
    case node_kind::log: {
        double arg = eval_node(n->a.get(), t, x);
        if (arg <= 0.0)
            throw eval_error("log of non-positive value", render_subtree(n));
        return check_finite(std::log(arg), n);
    }
    case node_kind::sqrt: {
        double arg = eval_node(n->a.get(), t, x);
        if (arg < 0.0)
            throw eval_error("sqrt of negative value", render_subtree(n));
        return std::sqrt(arg);
    }
    case node_kind::abs: return std::abs(eval_node(n->a.get(), t, x));
    }
    throw std::logic_error("unreachable node kind");
}

bool scan_kind(const node* n, node_kind k) {
    if (!n)
        return false;
    if (n->kind == k)
        return true;
    return scan_kind(n->a.get(), k) || scan_kind(n->b.get(), k);
}

} // namespace

expression expression::parse(const std::string& source) {
    parser p;
    p.toks = lex(source);
    node_ptr root = p.parse_expr();
    if (p.peek().kind != tok_kind::end)
        throw parse_error("unexpected trailing input", p.peek().offset,
                          {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    return expression(std::move(root));
}

std::string expression::render() const {
    if (!root_)
        return "";
    return render_subtree(root_.get());
}

double expression::evaluate(double t, double x) const {
    if (!root_)
        throw std::logic_error("evaluate called on empty expression");
    if (!std::isfinite(t) || !std::isfinite(x))
        throw std::invalid_argument("evaluate requires finite (t, x)");
    return eval_node(root_.get(), t, x);
}

bool expression::depends_on_t() const {
    return scan_kind(root_.get(), node_kind::var_t);
}

bool expression::depends_on_x() const {
    return scan_kind(root_.get(), node_kind::var_x);
}

} // namespace blowup::dsl
