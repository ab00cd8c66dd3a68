#pragma once

#include "blowup/common.hpp"
#include "blowup/expression.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace blowup::ode {

// Blow-up-aware integration of y' = f(t, y), y(0) = xi, with an embedded
// Cash-Karp 4(5) pair. The step size is controlled both by the local error
// estimate (mixed absolute/relative tolerance tol*(1+|y|)) and by the slope
// clamp dt <= dt_max/(1+|f|), which keeps steps short exactly where the
// solution stiffens toward a blow-up.

struct step_control {
    double local_tol = 1e-9;
    double dt_max = 0.0;     // <= 0 means horizon/100
    double dt_floor = 1e-14;
    double x_cap = 1e12;
};

enum class blowup_refinement { cap_hit, tail_corrected };

struct blowup_info {
    double t_estimate = 0.0;
    double cap_used = 0.0;
    blowup_refinement refinement = blowup_refinement::cap_hit;
};

struct trajectory_sample {
    std::vector<double> times;
    std::vector<double> values;
    std::optional<blowup_info> blowup;
};

const char* to_string(blowup_refinement r);

// Integrates until the horizon or until blow-up is detected: the value exceeds
// ctrl.x_cap, or the accepted step collapses below ctrl.dt_floor while the
// value grows. On blow-up the estimate is refined by the frozen-coefficient
// tail correction t_last + int_{y_last}^inf ds / f(t_last, s) when that tail
// integral converges (refinement = tail_corrected), else the last time is
// reported as-is (refinement = cap_hit). Recorded values never exceed
// cap_used and t_estimate >= the last recorded time.
//
// When record_at is non-empty it must be strictly increasing within
// [0, horizon]; the trajectory then contains t = 0 plus exactly the requested
// nodes reached before blow-up. Otherwise every accepted step is recorded.
trajectory_sample integrate_blowup(const fn2& f, double xi, double horizon,
                                   const step_control& ctrl = {},
                                   const std::vector<double>& record_at = {});

// Inverts t = int_xi^y ds / b(s) for the autonomous positive drift b: returns
// the solution value y(t) of y' = b(y), y(0) = xi. Throws std::domain_error
// when t lies at or beyond the blow-up time int_xi^inf ds / b(s).
double osgood_inverse(const dsl::expression& b, double xi, double t, double tol = 1e-9);

enum class comparison_side { lower, upper }; // y is a lower / upper solution vs x' = b(x)

struct comparison_report {
    bool passed = false;
    std::optional<double> violation_time;
    double y_value = 0.0; // at the first violation
    double x_value = 0.0;
    std::string note;
};

// Checks the pathwise ordering y(t) <= / >= x(t) at the recorded nodes of y,
// where x solves x' = b(x), x(0) = xi (b autonomous, evaluated at the nodes of
// y). side == lower asserts y >= x - tol, side == upper asserts y <= x + tol.
// If the reference x blows up before the end of y, the ordering is checked up
// to the blow-up time and the report notes the truncation.
comparison_report comparison_check(const trajectory_sample& y, const dsl::expression& b,
                                   double xi, comparison_side side, double tol);

// CSV export: header "time,value", one row per node, and when the trajectory
// blew up a trailing comment line "# blowup t=<estimate> ...".
void write_csv(const trajectory_sample& traj, std::ostream& os);

} // namespace blowup::ode
