#include "blowup/sde.hpp"

#include "blowup/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

namespace blowup::sde {

namespace {

using quad::integral_kind;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

void validate_path(const brownian_path& path, const char* who) {
    if (path.times.size() < 2 || path.times.size() != path.w.size() || !(path.dt > 0.0))
        throw std::invalid_argument(std::string(who) + ": malformed brownian path");
}

// Screens b >= 0 on [0, horizon] x log-spaced state values, stopping at the
// first point where b no longer evaluates (overflowing coefficients are not
// evidence of a sign violation).
void screen_nonnegative_drift(const dsl::expression& b, double horizon, const char* who) {
    const int nt = 11, nx = 101;
    const double u_lo = std::log(1e-8), u_hi = std::log(1e6);
    for (int j = 0; j < nx; ++j) {
        const double x = std::exp(u_lo + (u_hi - u_lo) * j / (nx - 1.0));
        for (int i = 0; i < nt; ++i) {
            const double t = horizon * i / (nt - 1.0);
            double v;
            try {
                v = b.evaluate(t, x);
            } catch (const dsl::eval_error&) {
                return; // ran off the representable range; screened what we could
            }
            if (v < -1e-9 * (1.0 + std::abs(v)))
                throw std::invalid_argument(std::string(who) +
                                            ": drift must be non-negative (b(" +
                                            std::to_string(t) + ", " + std::to_string(x) +
                                            ") < 0)");
        }
    }
}

bool is_unit_sigma(const dsl::expression& sigma, double horizon) {
    if (sigma.empty() || sigma.depends_on_x())
        return false;
    for (double t : {0.0, 0.25 * horizon, 0.5 * horizon, horizon}) {
        double v;
        try {
            v = sigma.evaluate(t, 0.0);
        } catch (const dsl::eval_error&) {
            return false;
        }
        if (std::abs(v - 1.0) > 1e-12)
            return false;
    }
    return true;
}

} // namespace

double gaussian_draw(std::uint64_t master_seed, std::uint64_t path_index, std::uint64_t step) {
    const std::uint64_t key = splitmix(splitmix(splitmix(master_seed) ^ path_index) ^ step);
    const std::uint64_t a = splitmix(key);
    const std::uint64_t b = splitmix(a + 0x9e3779b97f4a7c15ull);
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53; // in (0,1)
    const double u2 = (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

brownian_path make_brownian_path(double dt, double horizon, std::uint64_t master_seed,
                                 std::uint64_t path_index) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("make_brownian_path: dt must be positive");
    if (!(horizon >= dt) || !std::isfinite(horizon))
        throw std::invalid_argument("make_brownian_path: horizon must be >= dt");
    const long long n = std::llround(horizon / dt);
    if (n < 1 || std::abs(n * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("make_brownian_path: horizon must be an integer multiple "
                                    "of dt");
    brownian_path p;
    p.dt = dt;
    p.master_seed = master_seed;
    p.path_index = path_index;
    p.times.resize(static_cast<std::size_t>(n) + 1);
    p.w.resize(p.times.size());
    p.times[0] = 0.0;
    p.w[0] = 0.0;
    const double root_dt = std::sqrt(dt);
    compensated_sum acc;
    for (long long i = 0; i < n; ++i) {
        acc.add(root_dt * gaussian_draw(master_seed, path_index, static_cast<std::uint64_t>(i)));
        p.times[static_cast<std::size_t>(i) + 1] = (i + 1) * dt;
        p.w[static_cast<std::size_t>(i) + 1] = acc.value();
    }
    p.times.back() = horizon;
    return p;
}

brownian_path coarsen(const brownian_path& path, int factor) {
    validate_path(path, "coarsen");
    const std::size_t n = path.times.size() - 1;
    if (factor < 1 || n % static_cast<std::size_t>(factor) != 0)
        throw std::invalid_argument("coarsen: factor must divide the step count");
    brownian_path p;
    p.dt = path.dt * factor;
    p.master_seed = path.master_seed;
    p.path_index = path.path_index;
    for (std::size_t i = 0; i <= n; i += static_cast<std::size_t>(factor)) {
        p.times.push_back(path.times[i]);
        p.w.push_back(path.w[i]);
    }
    return p;
}

transform_state girsanov_transform(const dsl::expression& sigma, const brownian_path& path) {
    validate_path(path, "girsanov_transform");
    if (sigma.empty())
        throw std::invalid_argument("girsanov_transform: empty sigma");
    if (sigma.depends_on_x())
        throw std::invalid_argument("girsanov_transform: sigma must depend on t only");
    const std::size_t n = path.times.size();
    transform_state ts;
    ts.times = path.times;
    ts.stoch_integral.resize(n);
    ts.lambda.resize(n);
    ts.g.resize(n);
    ts.f.resize(n);
    compensated_sum s_acc, l_acc;
    ts.stoch_integral[0] = 0.0;
    ts.lambda[0] = 0.0;
    ts.g[0] = 1.0;
    ts.f[0] = 1.0;
    auto sq = [&sigma](double t) {
        const double v = sigma.evaluate(t, 0.0);
        return v * v;
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t0 = path.times[i], t1 = path.times[i + 1];
        const double h = t1 - t0;
        s_acc.add(sigma.evaluate(t0, 0.0) * (path.w[i + 1] - path.w[i]));
        l_acc.add((sq(t0) + 4.0 * sq(0.5 * (t0 + t1)) + sq(t1)) * h / 6.0);
        ts.stoch_integral[i + 1] = s_acc.value();
        ts.lambda[i + 1] = l_acc.value();
        ts.g[i + 1] = std::exp(-ts.stoch_integral[i + 1] + 0.5 * ts.lambda[i + 1]);
        ts.f[i + 1] = 1.0 / ts.g[i + 1];
    }
    return ts;
}

ode::trajectory_sample solve_transformed(const problem& prob, const brownian_path& path,
                                         const ode::step_control& ctrl) {
    validate_path(path, "solve_transformed");
    if (prob.drift.empty())
        throw std::invalid_argument("solve_transformed: empty drift");
    if (!(prob.xi > 0.0) || !std::isfinite(prob.xi))
        throw std::invalid_argument("solve_transformed: xi must be positive and finite");
    const double horizon = path.times.back();
    screen_nonnegative_drift(prob.drift, horizon, "solve_transformed");

    const transform_state ts = girsanov_transform(prob.sigma, path);
    const double dt = path.dt;
    const std::size_t last = path.times.size() - 1;
    auto g_at = [&ts, dt, last](double s) {
        std::size_t k = static_cast<std::size_t>(std::max(0.0, std::floor(s / dt)));
        k = std::min(k, last - 1);
        const double th = std::clamp((s - ts.times[k]) / dt, 0.0, 1.0);
        const double sl =
            ts.stoch_integral[k] + th * (ts.stoch_integral[k + 1] - ts.stoch_integral[k]);
        const double ll = ts.lambda[k] + th * (ts.lambda[k + 1] - ts.lambda[k]);
        return std::exp(-sl + 0.5 * ll);
    };
    const dsl::expression& b = prob.drift;
    fn2 rhs = [&b, &g_at](double s, double y) {
        const double gs = g_at(s);
        return gs * b.evaluate(s, y / gs);
    };
    const std::vector<double> record(path.times.begin() + 1, path.times.end());
    ode::trajectory_sample y = ode::integrate_blowup(rhs, prob.xi, horizon, ctrl, record);
    for (std::size_t i = 1; i < y.values.size(); ++i)
        if (y.values[i] < y.values[i - 1])
            throw std::runtime_error("solve_transformed: transformed process lost "
                                     "monotonicity");
    // convert to X = f Y at the recorded nodes (all of which are grid nodes)
    for (std::size_t i = 0; i < y.times.size(); ++i) {
        const std::size_t k =
            std::min(last, static_cast<std::size_t>(std::llround(y.times[i] / dt)));
        y.values[i] *= ts.f[k];
    }
    return y;
}

ode::trajectory_sample solve_log_domain(const problem& prob, const brownian_path& path,
                                        const ode::step_control& ctrl) {
    validate_path(path, "solve_log_domain");
    if (prob.drift.empty())
        throw std::invalid_argument("solve_log_domain: empty drift");
    if (!(prob.xi > 0.0) || !std::isfinite(prob.xi))
        throw std::invalid_argument("solve_log_domain: xi must be positive and finite");
    const double horizon = path.times.back();
    if (!is_unit_sigma(prob.sigma, horizon))
        throw std::invalid_argument("solve_log_domain: requires sigma == 1");
    screen_nonnegative_drift(prob.drift, horizon, "solve_log_domain");

    const double z_cap = std::log(ctrl.x_cap);
    ode::step_control step_ctrl = ctrl;
    step_ctrl.x_cap = z_cap;
    step_ctrl.dt_max = path.dt;

    const dsl::expression& b = prob.drift;
    ode::trajectory_sample out;
    out.times.push_back(0.0);
    out.values.push_back(prob.xi);
    double z = std::log(prob.xi);
    for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
        const double t0 = path.times[i];
        const double h = path.times[i + 1] - path.times[i];
        // the panel's Brownian increment enters as a linear ramp, the same
        // W-interpolation convention the transform solver uses inside g
        const double ramp = (path.w[i + 1] - path.w[i]) / h;
        fn2 drift = [&b, t0, ramp](double tau, double zz) {
            const double ez = std::exp(zz);
            return b.evaluate(t0 + tau, ez) / ez - 0.5 + ramp;
        };
        ode::trajectory_sample panel = ode::integrate_blowup(drift, z, h, step_ctrl, {h});
        if (panel.blowup) {
            out.blowup = ode::blowup_info{t0 + panel.blowup->t_estimate, ctrl.x_cap,
                                          panel.blowup->refinement};
            return out;
        }
        z = panel.values.back();
        out.times.push_back(path.times[i + 1]);
        out.values.push_back(std::exp(z));
    }
    return out;
}

ode::trajectory_sample euler_maruyama(const problem& prob, const brownian_path& path,
                                      double x_cap) {
    validate_path(path, "euler_maruyama");
    if (prob.drift.empty() || prob.sigma.empty())
        throw std::invalid_argument("euler_maruyama: empty coefficient");
    if (prob.sigma.depends_on_x())
        throw std::invalid_argument("euler_maruyama: sigma must depend on t only");
    if (!(x_cap > 0.0) || !std::isfinite(prob.xi))
        throw std::invalid_argument("euler_maruyama: bad xi or x_cap");
    ode::trajectory_sample out;
    out.times.push_back(0.0);
    out.values.push_back(prob.xi);
    double x = prob.xi;
    for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
        const double t = path.times[i];
        const double h = path.times[i + 1] - path.times[i];
        const double dw = path.w[i + 1] - path.w[i];
        x = x + prob.drift.evaluate(t, x) * h + prob.sigma.evaluate(t, 0.0) * x * dw;
        if (!std::isfinite(x) || std::abs(x) > x_cap) {
            out.blowup = ode::blowup_info{path.times[i + 1], x_cap,
                                          ode::blowup_refinement::cap_hit};
            return out;
        }
        out.times.push_back(path.times[i + 1]);
        out.values.push_back(x);
    }
    return out;
}

bool em_positivity_violated(const ode::trajectory_sample& traj) {
    return std::any_of(traj.values.begin(), traj.values.end(),
                       [](double v) { return v <= 0.0; });
}

namespace {

// Growing quadrature table for Lambda(t) = int_0^t sigma^2: node times double
// from 1/16, so even slowly diverging Lambda stays invertible over a huge
// range with few panels.
struct lambda_table {
    fn1 sigma2;
    std::vector<double> t_nodes{0.0};
    std::vector<double> l_nodes{0.0};

    void extend_past_time(double t) {
        while (t_nodes.back() < t) {
            const double next = t_nodes.back() == 0.0 ? 0.0625 : 2.0 * t_nodes.back();
            append(next);
        }
    }
    void extend_past_level(double u) {
        while (l_nodes.back() < u) {
            if (t_nodes.back() > 1e15)
                throw std::runtime_error("time_change_reduce: Lambda inverse beyond table "
                                         "range");
            const double next = t_nodes.back() == 0.0 ? 0.0625 : 2.0 * t_nodes.back();
            append(next);
        }
    }
    void append(double next) {
        const double inc = quad::integrate(sigma2, t_nodes.back(), next, 1e-13, 1e-11).value;
        l_nodes.push_back(l_nodes.back() + inc);
        t_nodes.push_back(next);
    }
    double at(double t) {
        if (!(t >= 0.0))
            throw std::invalid_argument("lambda_at: t must be >= 0");
        extend_past_time(t);
        const auto it = std::upper_bound(t_nodes.begin(), t_nodes.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - t_nodes.begin()) - 1;
        if (t_nodes[k] == t)
            return l_nodes[k];
        return l_nodes[k] + quad::integrate(sigma2, t_nodes[k], t, 1e-13, 1e-11).value;
    }
    double inverse(double u) {
        if (!(u >= 0.0))
            throw std::invalid_argument("lambda_inverse: u must be >= 0");
        if (u == 0.0)
            return 0.0;
        extend_past_level(u);
        const auto it = std::lower_bound(l_nodes.begin(), l_nodes.end(), u);
        std::size_t k = static_cast<std::size_t>(it - l_nodes.begin());
        double lo = t_nodes[k - 1], hi = t_nodes[k];
        for (int iter = 0; iter < 200 && hi - lo > 1e-13 * (1.0 + hi); ++iter) {
            const double mid = 0.5 * (lo + hi);
            (at(mid) < u ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

} // namespace

time_changed_problem time_change_reduce(const problem& prob) {
    if (prob.sigma.empty())
        throw std::invalid_argument("time_change_reduce: empty sigma");
    if (prob.sigma.depends_on_x())
        throw std::invalid_argument("time_change_reduce: sigma must depend on t only");

    time_changed_problem out;
    out.original = prob;
    const dsl::expression sigma = prob.sigma;
    const dsl::expression drift = prob.drift;

    if (is_unit_sigma(prob.sigma, 100.0)) {
        out.identity = true;
        out.reduced_drift = [drift](double t, double x) { return drift.evaluate(t, x); };
        out.lambda_at = [](double t) { return t; };
        out.lambda_inverse = [](double u) { return u; };
        return out;
    }

    fn1 sigma2 = [sigma](double t) {
        const double v = sigma.evaluate(t, 0.0);
        return v * v;
    };
    for (int i = 0; i <= 400; ++i) {
        const double t = 100.0 * i / 400.0;
        if (!(sigma2(t) > 0.0))
            throw std::invalid_argument("time_change_reduce: sigma^2 must be strictly "
                                        "positive (vanishes near t=" + std::to_string(t) + ")");
    }
    const auto tail = quad::classify_tail(sigma2, 1.0, quad::shell_options_from_tol(1e-8));
    if (tail.kind == integral_kind::convergent)
        throw std::domain_error("time_change_reduce: Lambda(inf) < inf (bounded noise "
                                "accumulation); the time change does not reach sigma == 1 — "
                                "use the bounded-Lambda criterion branch");
    if (tail.kind != integral_kind::divergent)
        throw std::domain_error("time_change_reduce: Lambda(inf) could not be classified as "
                                "divergent");

    auto table = std::make_shared<lambda_table>();
    table->sigma2 = sigma2;
    out.reduced_drift = [table, drift, sigma2](double u, double x) {
        const double t = table->inverse(u);
        return drift.evaluate(t, x) / sigma2(t);
    };
    out.lambda_at = [table](double t) { return table->at(t); };
    out.lambda_inverse = [table](double u) { return table->inverse(u); };
    return out;
}

} // namespace blowup::sde
