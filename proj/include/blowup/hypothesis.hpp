#pragma once

#include "blowup/common.hpp"
#include "blowup/expression.hpp"

#include <optional>
#include <string>

namespace blowup::dsl {

// Sampling-based screening of structural hypotheses on a coefficient
// function over a rectangle. "passed" means no violation was found on the
// grid — explicitly a screen, not a proof.

enum class hypothesis_property {
    non_negativity,       // f(t,x) >= 0 up to tol at every grid point
    positivity_on_region, // f(t,x) > 0; values < -tol fail, non-positive values are noted
    non_decreasing_in_t,  // consecutive differences along t >= -tol
    non_decreasing_in_x,  // consecutive differences along x >= -tol
    lower_bound_half,     // f(t,x) >= 1/2 up to tol at every grid point
};

enum class hypothesis_status { passed, failed_with_witness, unverifiable };

struct region {
    double t_lo = 0.0, t_hi = 0.0;
    double x_lo = 0.0, x_hi = 0.0;
};

struct grid_spec {
    int nt = 2;
    int nx = 2;
};

struct witness_point {
    double t = 0.0;
    double x = 0.0;
    double value = 0.0; // sampled value at the witness (NaN when evaluation failed)
};

struct hypothesis_report {
    hypothesis_property property;
    hypothesis_status status;
    region sampled;
    grid_spec grid;
    std::optional<witness_point> witness; // present when failed, unverifiable,
                                          // or positivity passed only non-strictly
    std::string note;
};

// Grid is inclusive of the rectangle's bounds; pass epsilon-shifted bounds to
// screen open intervals. Monotonicity properties require >= 2 points on the
// screened axis. Evaluation failures inside the region yield "unverifiable"
// with the failing point as witness.
hypothesis_report check_hypothesis(const fn2& f, hypothesis_property prop, const region& reg,
                                   const grid_spec& grid, double tol);
hypothesis_report check_hypothesis(const expression& f, hypothesis_property prop,
                                   const region& reg, const grid_spec& grid, double tol);

const char* to_string(hypothesis_property p);
const char* to_string(hypothesis_status s);

} // namespace blowup::dsl
