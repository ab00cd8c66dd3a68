#include "blowup/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <thread>

namespace blowup::mc {

namespace {

struct path_outcome {
    std::optional<ode::blowup_info> blowup;
    std::string error; // empty on success
};

path_outcome simulate_one(const problem& prob, const sde::brownian_path& path,
                          solver_id solver, const ode::step_control& ctrl) {
    path_outcome out;
    try {
        ode::trajectory_sample traj;
        switch (solver) {
        case solver_id::transform: traj = sde::solve_transformed(prob, path, ctrl); break;
        case solver_id::logdomain: traj = sde::solve_log_domain(prob, path, ctrl); break;
        case solver_id::em: traj = sde::euler_maruyama(prob, path, ctrl.x_cap); break;
        }
        out.blowup = traj.blowup;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

} // namespace

solver_id parse_solver(const std::string& name) {
    if (name == "transform") return solver_id::transform;
    if (name == "logdomain") return solver_id::logdomain;
    if (name == "em") return solver_id::em;
    throw std::invalid_argument("unknown solver id: " + name +
                                " (expected transform, logdomain, or em)");
}

const char* to_string(solver_id s) {
    switch (s) {
    case solver_id::transform: return "transform";
    case solver_id::logdomain: return "logdomain";
    case solver_id::em: return "em";
    }
    return "?";
}

wilson_interval wilson(std::size_t successes, std::size_t n) {
    if (n == 0)
        return {0.0, 1.0};
    if (successes > n)
        throw std::invalid_argument("wilson: successes > n");
    const double z = 1.959963984540054; // 97.5% normal quantile
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2n = z * z / nn;
    const double denom = 1.0 + z2n;
    const double center = (p + 0.5 * z2n) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + 0.25 * z2n / nn) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

mc_summary run_mc(const problem& prob, double horizon, std::size_t n_paths,
                  std::uint64_t seed, solver_id solver, const mc_options& opts) {
    if (n_paths < 1)
        throw std::invalid_argument("run_mc requires n_paths >= 1");
    if (!(horizon > 0.0))
        throw std::invalid_argument("run_mc requires horizon > 0");
    const double dt = opts.dt > 0.0 ? opts.dt : std::ldexp(horizon, -10);
    const double steps = std::round(horizon / dt);
    if (std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("run_mc: horizon must be an integer multiple of dt");

    std::vector<path_outcome> outcomes(n_paths);
    unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : opts.threads;
    threads = static_cast<unsigned>(
        std::min<std::size_t>(threads, n_paths));

    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                auto path = sde::make_brownian_path(dt, horizon, seed, i);
                outcomes[i] = simulate_one(prob, path, solver, opts.ctrl);
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };

    if (threads <= 1) {
        work(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_paths + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t lo = static_cast<std::size_t>(t) * chunk;
            if (lo >= n_paths)
                break;
            pool.emplace_back(work, lo, std::min(n_paths, lo + chunk));
        }
        for (auto& th : pool)
            th.join();
    }

    mc_summary out;
    out.problem_name = prob.name;
    out.problem_hash = problem_hash(prob);
    out.solver = to_string(solver);
    out.seed = seed;
    out.n_paths = n_paths;
    out.horizon = horizon;
    out.dt = dt;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const auto& o = outcomes[i];
        if (!o.error.empty()) {
            ++out.n_errors;
            out.errors.push_back("path " + std::to_string(i) + ": " + o.error);
            continue;
        }
        if (o.blowup && o.blowup->t_estimate <= horizon) {
            ++out.n_exploded;
            out.explosion_times.push_back(o.blowup->t_estimate);
        }
    }
    if (static_cast<double>(out.n_errors) > 0.01 * static_cast<double>(n_paths))
        throw std::runtime_error("run_mc: " + std::to_string(out.n_errors) + " of " +
                                 std::to_string(n_paths) + " paths failed (> 1%); first: " +
                                 out.errors.front());
    std::sort(out.explosion_times.begin(), out.explosion_times.end());
    const std::size_t trials = n_paths - out.n_errors;
    out.p_explode = trials == 0 ? 0.0
                                : static_cast<double>(out.n_exploded) / static_cast<double>(trials);
    const auto ci = wilson(out.n_exploded, trials);
    out.ci_low = ci.low;
    out.ci_high = ci.high;
    return out;
}

namespace {

agreement_result check_single(const criteria::criterion_report& report,
                              const mc_summary& summary, const agreement_options& opts) {
    agreement_result out;
    char buf[160];
    switch (report.result) {
    case criteria::verdict::almost_sure_explosion:
        out.pass = summary.ci_low > opts.explode_floor;
        std::snprintf(buf, sizeof buf,
                      "a.s. explosion: exploded fraction %.4f, Wilson lower bound %.4f %s floor "
                      "%.2f at T=%g",
                      summary.p_explode, summary.ci_low, out.pass ? ">" : "<=",
                      opts.explode_floor, summary.horizon);
        out.explanation = buf;
        return out;
    case criteria::verdict::no_almost_sure_explosion:
        out.pass = summary.ci_high < opts.explode_ceiling;
        std::snprintf(buf, sizeof buf,
                      "no a.s. explosion: exploded fraction %.4f, Wilson upper bound %.4f %s "
                      "ceiling %.2f at T=%g",
                      summary.p_explode, summary.ci_high, out.pass ? "<" : ">=",
                      opts.explode_ceiling, summary.horizon);
        out.explanation = buf;
        return out;
    case criteria::verdict::positive_probability_of_global_solution:
        out.pass = 1.0 - summary.ci_high > 0.0;
        std::snprintf(buf, sizeof buf,
                      "positive survival probability: surviving fraction %.4f, Wilson lower "
                      "bound %.4f %s 0 at T=%g",
                      1.0 - summary.p_explode, 1.0 - summary.ci_high, out.pass ? ">" : "<=",
                      summary.horizon);
        out.explanation = buf;
        return out;
    default:
        out.pass = true;
        out.explanation = std::string("verdict '") + criteria::to_string(report.result) +
                          "' is one-sided or inconclusive; not subject to statistical agreement";
        return out;
    }
}

void require_same_problem(const problem& prob, const mc_summary& summary) {
    if (problem_hash(prob) != summary.problem_hash)
        throw std::invalid_argument("agreement_check: incompatible problem hashes (" +
                                    problem_hash(prob) + " vs " + summary.problem_hash + ")");
}

} // namespace

agreement_result agreement_check(const problem& prob, const criteria::criterion_report& report,
                                 const mc_summary& summary, const agreement_options& opts) {
    require_same_problem(prob, summary);
    return check_single(report, summary, opts);
}

agreement_result agreement_check(const problem& prob, const criteria::criterion_report& report,
                                 const mc_summary& shorter, const mc_summary& longer,
                                 const agreement_options& opts) {
    require_same_problem(prob, shorter);
    require_same_problem(prob, longer);
    if (!(shorter.horizon < longer.horizon))
        throw std::invalid_argument("agreement_check: horizons must be strictly ordered");
    agreement_result out = check_single(report, longer, opts);
    if (report.result == criteria::verdict::almost_sure_explosion &&
        longer.ci_low < shorter.ci_low) {
        out.pass = false;
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "; exploded Wilson lower bound decreased with the horizon (%.4f at T=%g "
                      "-> %.4f at T=%g)",
                      shorter.ci_low, shorter.horizon, longer.ci_low, longer.horizon);
        out.explanation += buf;
    }
    return out;
}

} // namespace blowup::mc
