#pragma once

#include "blowup/common.hpp"
#include "blowup/expression.hpp"
#include "blowup/ode.hpp"
#include "blowup/problem.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace blowup::sde {

// Pathwise simulation of dX = b(t,X) dt + sigma(t) X dW: the Ito-transform
// solver (exact modulo ODE error), the log-domain solver for sigma == 1, and
// direct Euler-Maruyama as an independent cross-check. All randomness comes
// from a counter-based generator keyed by (master_seed, path_index, step), so
// ensembles are order-independent and bit-reproducible.

// Standard normal draw for the given counter key (splitmix64 chain feeding a
// Box-Muller pair). Stateless: the same key always yields the same value.
double gaussian_draw(std::uint64_t master_seed, std::uint64_t path_index, std::uint64_t step);

struct brownian_path {
    double dt = 0.0;
    std::vector<double> times; // uniform grid, times.front() = 0
    std::vector<double> w;     // W values, w.front() = 0
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

// Cumulative sum of N(0, dt) increments drawn per step. horizon must be an
// integer multiple of dt (within 1e-9 relative); identical arguments give
// bit-identical paths.
brownian_path make_brownian_path(double dt, double horizon, std::uint64_t master_seed,
                                 std::uint64_t path_index);

// The same Brownian motion observed on a grid coarsened by an integer factor
// (which must divide the step count). Used for strong-convergence studies
// where every dt shares one underlying path.
brownian_path coarsen(const brownian_path& path, int factor);

// Node tables of the transform for sigma = sigma(t):
//   S(t)      = int_0^t sigma dW   (left-point Ito sums),
//   Lambda(t) = int_0^t sigma^2 ds (per-step Simpson panels),
//   g(t)      = exp(-S(t) + Lambda(t)/2),  f(t) = 1/g(t).
struct transform_state {
    std::vector<double> times;
    std::vector<double> stoch_integral;
    std::vector<double> lambda;
    std::vector<double> g;
    std::vector<double> f;
};

transform_state girsanov_transform(const dsl::expression& sigma, const brownian_path& path);

// Solves the pathwise random ODE Y' = g(s) b(s, f(s) Y), Y(0) = xi, with the
// blow-up-aware integrator (S and Lambda interpolated linearly inside the
// exponent between nodes), then returns X = f Y sampled at the path nodes.
// X and Y explode together, so the blow-up info of Y is transferred
// unchanged; note that ctrl.x_cap therefore bounds Y, not X. Requires xi > 0
// and b >= 0 (screened on a sample grid).
ode::trajectory_sample solve_transformed(const problem& prob, const brownian_path& path,
                                         const ode::step_control& ctrl = {});

// Log-domain solver for sigma == 1 (enforced): steps
//   Z' = b(s, e^Z)/e^Z - 1/2 + dW/ds over each grid panel, carrying the
// panel's Brownian increment as a linear ramp (the same W-interpolation
// convention the transform solver uses), and returns X = exp(Z). Z is capped
// at log(ctrl.x_cap), which avoids floating overflow for superexponentially
// growing drifts.
ode::trajectory_sample solve_log_domain(const problem& prob, const brownian_path& path,
                                        const ode::step_control& ctrl = {});

// Explicit Euler-Maruyama on the path grid:
//   X_{i+1} = X_i + b(t_i, X_i) dt + sigma(t_i) X_i dW_i,
// stopping with cap-hit blow-up info once |X| exceeds x_cap. The scheme may
// lose positivity (a known discretization artifact); detect it with
// em_positivity_violated rather than expecting X > 0.
ode::trajectory_sample euler_maruyama(const problem& prob, const brownian_path& path,
                                      double x_cap = 1e12);

bool em_positivity_violated(const ode::trajectory_sample& traj);

// Reduction of general sigma(t) to unit noise by the time change
// u = Lambda(t): the reduced drift is (u,x) -> b(Lambda^{-1}(u), x) /
// sigma^2(Lambda^{-1}(u)). Lambda^{-1} is computed by monotone bracketing on
// a growing quadrature table.
struct time_changed_problem {
    problem original;
    bool identity = false; // sigma == 1: the reduction is the identity
    fn2 reduced_drift;
    std::function<double(double)> lambda_at;      // Lambda(t)
    std::function<double(double)> lambda_inverse; // Lambda^{-1}(u)
};

// Requires sigma^2 > 0 (screened) and Lambda(inf) = inf (tail of sigma^2
// classified Divergent); a convergent tail means bounded noise accumulation
// and the reduction is refused with std::domain_error.
time_changed_problem time_change_reduce(const problem& prob);

} // namespace blowup::sde
