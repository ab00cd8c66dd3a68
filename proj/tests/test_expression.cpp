#include "blowup/expression.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace blowup::dsl;

TEST_CASE("parse shapes match the grammar") {
    auto e = expression::parse("x^2 / 2");
    const node* n = e.root().get();
    REQUIRE(n->kind == node_kind::div);
    CHECK(n->a->kind == node_kind::pow);
    CHECK(n->a->a->kind == node_kind::var_x);
    CHECK(n->a->b->kind == node_kind::constant);
    CHECK(n->a->b->value == 2.0);
    CHECK(n->b->kind == node_kind::constant);
    CHECK(n->b->value == 2.0);

    auto m = expression::parse("x*(1/2 + x)");
    const node* r = m.root().get();
    REQUIRE(r->kind == node_kind::mul);
    CHECK(r->a->kind == node_kind::var_x);
    REQUIRE(r->b->kind == node_kind::add);
    CHECK(r->b->a->kind == node_kind::div);
    CHECK(r->b->a->a->value == 1.0);
    CHECK(r->b->a->b->value == 2.0);
    CHECK(r->b->b->kind == node_kind::var_x);
}

TEST_CASE("power is right-associative and binds tighter than unary minus") {
    CHECK(expression::parse("2^3^2").evaluate(0, 0) == 512.0);
    CHECK(expression::parse("2^3^2").evaluate(0, 0) != 64.0);

    auto neg = expression::parse("-x^2");
    REQUIRE(neg.root()->kind == node_kind::neg);
    CHECK(neg.root()->a->kind == node_kind::pow);
    CHECK(neg.evaluate(0, 3) == -9.0);

    auto paren = expression::parse("(-x)^2");
    REQUIRE(paren.root()->kind == node_kind::pow);
    CHECK(paren.evaluate(0, 3) == 9.0);

    CHECK(expression::parse("2^-1").evaluate(0, 0) == 0.5);
    CHECK(expression::parse("2*x^3").evaluate(0, 2) == 16.0);
}

TEST_CASE("evaluate basics") {
    CHECK(expression::parse("x^2/2").evaluate(0, 2) == 2.0);
    CHECK(expression::parse("exp(x) - 1").evaluate(5, 0) == 0.0);
    CHECK(expression::parse("t + x").evaluate(1.5, 2.5) == 4.0);
    CHECK(expression::parse("pi").evaluate(0, 0) == doctest::Approx(3.14159265358979).epsilon(1e-14));
    CHECK(expression::parse("e").evaluate(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(expression::parse("exp(1)").evaluate(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(expression::parse("sqrt(abs(0-4))").evaluate(0, 0) == 2.0);
    CHECK(expression::parse("log(e)").evaluate(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(expression::parse("1e-2 + 2.5E+1").evaluate(0, 0) == 25.01);
    CHECK(expression::parse("2. + .5").evaluate(0, 0) == 2.5);
    CHECK(expression::parse("--x").evaluate(0, 3) == 3.0);
}

TEST_CASE("evaluate is pure: repeat calls bit-identical") {
    auto e = expression::parse("exp(x * t) / (1 + x^2) + sqrt(abs(t - x))");
    double a = e.evaluate(0.7, 1.3);
    for (int i = 0; i < 10; ++i)
        CHECK(e.evaluate(0.7, 1.3) == a);
}

TEST_CASE("domain errors carry the offending subexpression") {
    CHECK_THROWS_AS(expression::parse("log(x)").evaluate(0, -1), eval_error);
    try {
        expression::parse("1 + log(x)").evaluate(0, -1);
        FAIL("expected eval_error");
    } catch (const eval_error& e) {
        CHECK(e.subexpression == "log(x)");
    }
    try {
        expression::parse("sqrt(x - 2)").evaluate(0, 0);
        FAIL("expected eval_error");
    } catch (const eval_error& e) {
        CHECK(e.subexpression == "sqrt(x - 2)");
    }
    try {
        expression::parse("1 / (x - 1)").evaluate(0, 1);
        FAIL("expected eval_error");
    } catch (const eval_error& e) {
        CHECK(e.subexpression == "1 / (x - 1)");
    }
    // overflow to infinity is a domain error at this layer
    CHECK_THROWS_AS(expression::parse("exp(x)").evaluate(0, 1e10), eval_error);
    CHECK_THROWS_AS(expression::parse("x^x").evaluate(0, 1e300), eval_error);
}

TEST_CASE("parse errors carry byte offset and expected set") {
    try {
        expression::parse("x + ");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.offset == 4);
        CHECK(!e.expected.empty());
    }
    try {
        expression::parse("(x + 1");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.offset == 6);
        REQUIRE(e.expected.size() == 1);
        CHECK(e.expected[0] == "')'");
    }
    try {
        expression::parse("foo(x)");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.offset == 0);
        CHECK(std::string(e.what()).find("unknown identifier") != std::string::npos);
    }
    try {
        expression::parse("x $ 2");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.offset == 2);
    }
    try {
        expression::parse("2 3");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.offset == 2);
    }
    CHECK_THROWS_AS(expression::parse("exp x"), parse_error);
    CHECK_THROWS_AS(expression::parse(""), parse_error);
}

namespace {

node_ptr random_tree(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> leaf(0, 3);
    std::uniform_int_distribution<int> any(0, 9);
    std::uniform_real_distribution<double> cval(0.0, 100.0);
    if (depth <= 0) {
        switch (leaf(rng)) {
        case 0: return make_var_t();
        case 1: return make_var_x();
        case 2: return make_constant(static_cast<double>(rng() % 1000));
        default: return make_constant(cval(rng));
        }
    }
    switch (any(rng)) {
    case 0: return make_binary(node_kind::add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 1: return make_binary(node_kind::sub, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 2: return make_binary(node_kind::mul, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 3: return make_binary(node_kind::div, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 4: return make_binary(node_kind::pow, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 5: return make_unary(node_kind::neg, random_tree(rng, depth - 1));
    case 6: return make_unary(node_kind::exp, random_tree(rng, depth - 1));
    case 7: return make_unary(node_kind::log, random_tree(rng, depth - 1));
    case 8: return make_unary(node_kind::sqrt, random_tree(rng, depth - 1));
    default: return make_unary(node_kind::abs, random_tree(rng, depth - 1));
    }
}

} // namespace

TEST_CASE("parse/render round-trip on generated corpus") {
    std::mt19937 rng(20260814u);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        expression e(random_tree(rng, 1 + static_cast<int>(rng() % 5)));
        std::string text = e.render();
        expression back = expression::parse(text);
        CHECK(structurally_equal(e.root(), back.root()));
        CHECK(back.render() == text); // render is a fixpoint
        ++checked;
    }
    CHECK(checked >= 50);
}

TEST_CASE("round-trip of spec-shaped sources") {
    for (const char* src :
         {"x^2 / 2", "x*(1/2 + x)", "2^3^2", "(1 + t)*x^2", "exp(x) - 1", "x*log(1 + x)",
          "abs(x)^1.5", "1/(1 + x^2)", "-x^2", "x^-2", "2e-3*x + 1e+2", "sqrt(1 + t^2)"}) {
        auto e = expression::parse(src);
        auto back = expression::parse(e.render());
        CHECK(structurally_equal(e.root(), back.root()));
    }
}

TEST_CASE("dependence scan") {
    CHECK(expression::parse("x^2").depends_on_x());
    CHECK_FALSE(expression::parse("x^2").depends_on_t());
    CHECK(expression::parse("(1+t)*x^2").depends_on_t());
    CHECK_FALSE(expression::parse("1.5").depends_on_t());
    CHECK_FALSE(expression::parse("1.5").depends_on_x());
}
