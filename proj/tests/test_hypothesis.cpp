#include "blowup/hypothesis.hpp"

#include "doctest.h"

#include <cmath>

using namespace blowup;
using namespace blowup::dsl;

namespace {
const grid_spec dense{40, 200};
}

TEST_CASE("lower-bound-half on derived mean-growth functions") {
    // b(x) = x*(1/2+x): b(x)/x = 1/2 + x stays above 1/2 on (0,10]
    auto b1 = expression::parse("x*(1/2 + x)");
    fn2 bbar1 = [b1](double t, double x) { return b1.evaluate(t, x) / x; };
    auto rep1 = check_hypothesis(bbar1, hypothesis_property::lower_bound_half,
                                 region{0, 0, 1e-3, 10}, dense, 1e-9);
    CHECK(rep1.status == hypothesis_status::passed);

    // b(x) = x^2/2: b(x)/x = x/2 dips below 1/2 for x < 1
    auto b2 = expression::parse("x^2/2");
    fn2 bbar2 = [b2](double t, double x) { return b2.evaluate(t, x) / x; };
    auto rep2 = check_hypothesis(bbar2, hypothesis_property::lower_bound_half,
                                 region{0, 0, 1e-3, 10}, dense, 1e-9);
    REQUIRE(rep2.status == hypothesis_status::failed_with_witness);
    REQUIRE(rep2.witness.has_value());
    CHECK(rep2.witness->x < 1.0);
}

TEST_CASE("monotonicity screens") {
    auto rep = check_hypothesis(expression::parse("t + x"), hypothesis_property::non_decreasing_in_t,
                                region{0, 5, 0, 5}, grid_spec{20, 20}, 1e-12);
    CHECK(rep.status == hypothesis_status::passed);

    auto dec = check_hypothesis(expression::parse("x - t^2"), hypothesis_property::non_decreasing_in_t,
                                region{0, 5, 0, 5}, grid_spec{20, 20}, 1e-12);
    REQUIRE(dec.status == hypothesis_status::failed_with_witness);
    CHECK(dec.witness.has_value());

    auto inx = check_hypothesis(expression::parse("exp(x)"), hypothesis_property::non_decreasing_in_x,
                                region{0, 0, -5, 5}, grid_spec{1, 50}, 1e-12);
    CHECK(inx.status == hypothesis_status::passed);

    // witness reflects a genuine grid violation beyond tol
    auto osc = check_hypothesis(expression::parse("x*(2 + 0 - 1)*(0 - 1)"),
                                hypothesis_property::non_decreasing_in_x, region{0, 0, 0, 5},
                                grid_spec{1, 30}, 1e-12);
    CHECK(osc.status == hypothesis_status::failed_with_witness);
}

TEST_CASE("positivity and non-negativity") {
    auto pos = check_hypothesis(expression::parse("1 + x^2"), hypothesis_property::positivity_on_region,
                                region{0, 1, -10, 10}, grid_spec{5, 100}, 1e-12);
    CHECK(pos.status == hypothesis_status::passed);
    CHECK(pos.note.empty());

    auto zero = check_hypothesis(expression::parse("x^2"), hypothesis_property::positivity_on_region,
                                 region{0, 0, -1, 1}, grid_spec{1, 21}, 1e-12);
    CHECK(zero.status == hypothesis_status::passed); // zero is within tol of the bound...
    CHECK(!zero.note.empty());                       // ...but strictness is flagged

    auto negv = check_hypothesis(expression::parse("x"), hypothesis_property::non_negativity,
                                 region{0, 0, -1, 1}, grid_spec{1, 21}, 1e-9);
    REQUIRE(negv.status == hypothesis_status::failed_with_witness);
    CHECK(negv.witness->value < 0.0);
}

TEST_CASE("soundness: never passed when a grid point violates beyond tol") {
    // f dips to -0.1 at x=0.5 on the grid
    fn2 dip = [](double, double x) { return (x == 0.5) ? -0.1 : 1.0; };
    auto rep = check_hypothesis(dip, hypothesis_property::non_negativity, region{0, 0, 0, 1},
                                grid_spec{1, 3}, 1e-3);
    CHECK(rep.status == hypothesis_status::failed_with_witness);
    CHECK(rep.witness->x == 0.5);
}

TEST_CASE("evaluation failure inside the region is unverifiable with the point") {
    auto rep = check_hypothesis(expression::parse("log(x)"), hypothesis_property::non_negativity,
                                region{0, 0, -1, 1}, grid_spec{1, 5}, 1e-9);
    REQUIRE(rep.status == hypothesis_status::unverifiable);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->x == -1.0);
    CHECK(!rep.note.empty());

    fn2 blows = [](double, double x) { return 1.0 / (x - 0.5) / (x - 0.5) * 0.0 + ((x == 0.5) ? std::nan("") : 1.0); };
    auto nf = check_hypothesis(blows, hypothesis_property::non_negativity, region{0, 0, 0, 1},
                               grid_spec{1, 3}, 1e-9);
    CHECK(nf.status == hypothesis_status::unverifiable);
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(check_hypothesis(expression::parse("x"), hypothesis_property::non_decreasing_in_x,
                                     region{0, 0, 0, 1}, grid_spec{1, 1}, 1e-9),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_hypothesis(expression::parse("x"), hypothesis_property::non_negativity,
                                     region{0, 0, 1, 0}, grid_spec{2, 2}, 1e-9),
                    std::invalid_argument);
}
