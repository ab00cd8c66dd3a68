#pragma once

#include "blowup/criteria.hpp"
#include "blowup/problem.hpp"
#include "blowup/sde.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace blowup::mc {

// Monte Carlo ensembles of pathwise simulations with censored explosion-time
// statistics. A path counts as exploded when its solver reports blow-up with
// t_estimate <= horizon; a path that merely reaches the horizon is censored
// (it contributes only "T_e > horizon", never an extrapolated time).

enum class solver_id { transform, logdomain, em };

solver_id parse_solver(const std::string& name); // "transform" | "logdomain" | "em"
const char* to_string(solver_id s);

struct wilson_interval {
    double low = 0.0;
    double high = 0.0;
};

// 95% Wilson score interval for successes/n. Always a subset of [0,1] and
// always contains the point estimate.
wilson_interval wilson(std::size_t successes, std::size_t n);

struct mc_options {
    double dt = 0.0;          // <= 0: use 2^-10 * horizon
    ode::step_control ctrl{}; // forwarded to the pathwise solver
    unsigned threads = 1;     // 0: hardware concurrency
};

struct mc_summary {
    std::string problem_name;
    std::string problem_hash;
    std::string solver;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    std::size_t n_exploded = 0;
    std::size_t n_errors = 0;
    double horizon = 0.0;
    double dt = 0.0;
    double p_explode = 0.0; // n_exploded / (n_paths - n_errors)
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<double> explosion_times; // exploded paths only, ascending
    std::vector<std::string> errors;     // "path <i>: <what>", index order
};

// Simulates paths 0..n-1 on the shared dt grid, one Brownian path per index
// keyed by (seed, index), and aggregates deterministically by index: the
// result is byte-identical across runs and thread counts. Per-path solver
// failures are recorded, never dropped; more than 1% of them fails the whole
// run with std::runtime_error.
mc_summary run_mc(const problem& prob, double horizon, std::size_t n_paths,
                  std::uint64_t seed, solver_id solver, const mc_options& opts = {});

struct agreement_options {
    double explode_floor = 0.9;   // ASE: Wilson lower bound must exceed this
    double explode_ceiling = 0.05; // NoASE: Wilson upper bound must stay below
};

struct agreement_result {
    bool pass = false;
    std::string explanation;
};

// Statistical agreement between a criterion verdict and an ensemble:
//   almost_sure_explosion        -> exploded Wilson lower bound > floor
//   no_almost_sure_explosion     -> exploded Wilson upper bound < ceiling
//   positive_probability_of_global_solution -> surviving lower bound > 0
// One-sided verdicts (necessary/sufficient/inconclusive) never fail.
// Throws std::invalid_argument when the summary's problem hash does not match
// the problem the report was computed for.
agreement_result agreement_check(const problem& prob, const criteria::criterion_report& report,
                                 const mc_summary& summary, const agreement_options& opts = {});

// Two-horizon variant: for almost_sure_explosion the exploded lower bound must
// additionally be non-decreasing from the shorter to the longer horizon (it is
// allowed to saturate once essentially every path has exploded), and the floor
// applies at the longer horizon. Requires matching problem hashes and
// shorter.horizon < longer.horizon.
agreement_result agreement_check(const problem& prob, const criteria::criterion_report& report,
                                 const mc_summary& shorter, const mc_summary& longer,
                                 const agreement_options& opts = {});

} // namespace blowup::mc
