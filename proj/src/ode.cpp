#include "blowup/ode.hpp"

#include "blowup/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace blowup::ode {

namespace {

// Cash-Karp 4(5) embedded pair.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 3.0 / 5.0, c5 = 1.0, c6 = 7.0 / 8.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 3.0 / 10.0, a42 = -9.0 / 10.0, a43 = 6.0 / 5.0;
constexpr double a51 = -11.0 / 54.0, a52 = 5.0 / 2.0, a53 = -70.0 / 27.0, a54 = 35.0 / 27.0;
constexpr double a61 = 1631.0 / 55296.0, a62 = 175.0 / 512.0, a63 = 575.0 / 13824.0,
                 a64 = 44275.0 / 110592.0, a65 = 253.0 / 4096.0;
constexpr double b1 = 37.0 / 378.0, b3 = 250.0 / 621.0, b4 = 125.0 / 594.0, b6 = 512.0 / 1771.0;
constexpr double d1 = b1 - 2825.0 / 27648.0, d3 = b3 - 18575.0 / 48384.0,
                 d4 = b4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0, d6 = b6 - 1.0 / 4.0;

struct ck_step {
    double y_new = 0.0;
    double err = 0.0;
    bool finite = false;
};

ck_step try_step(const fn2& f, double t, double y, double dt, double k1) {
    ck_step s;
    const double k2 = f(t + c2 * dt, y + dt * (a21 * k1));
    const double k3 = f(t + c3 * dt, y + dt * (a31 * k1 + a32 * k2));
    const double k4 = f(t + c4 * dt, y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(t + c5 * dt, y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 =
        f(t + c6 * dt, y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    s.y_new = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
    s.err = std::abs(dt * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6));
    s.finite = std::isfinite(s.y_new) && std::isfinite(s.err);
    return s;
}

// Frozen-coefficient remainder int_{y_last}^inf ds / f(t_last, s); nullopt
// when that tail does not converge to a finite non-negative value.
std::optional<double> tail_correction(const fn2& f, double t_last, double y_last) {
    if (!(y_last > 0.0) || !std::isfinite(y_last))
        return std::nullopt;
    auto v = quad::classify_tail([&](double s) { return 1.0 / f(t_last, s); }, y_last);
    if (v.kind == quad::integral_kind::convergent && std::isfinite(v.value) && v.value >= 0.0)
        return v.value;
    return std::nullopt;
}

} // namespace

const char* to_string(blowup_refinement r) {
    return r == blowup_refinement::tail_corrected ? "tail-corrected" : "cap-hit";
}

trajectory_sample integrate_blowup(const fn2& f, double xi, double horizon,
                                   const step_control& ctrl,
                                   const std::vector<double>& record_at) {
    if (!std::isfinite(xi))
        throw std::invalid_argument("integrate_blowup: initial value must be finite");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("integrate_blowup: horizon must be positive and finite");
    if (!(ctrl.local_tol > 0.0) || !(ctrl.dt_floor > 0.0) || !(ctrl.x_cap > 0.0))
        throw std::invalid_argument("integrate_blowup: tolerances and cap must be positive");
    const double dt_max = ctrl.dt_max > 0.0 ? ctrl.dt_max : horizon / 100.0;
    for (std::size_t i = 0; i < record_at.size(); ++i) {
        if (!std::isfinite(record_at[i]) || record_at[i] < 0.0 || record_at[i] > horizon)
            throw std::invalid_argument("integrate_blowup: record_at nodes must lie in [0, horizon]");
        if (i > 0 && !(record_at[i] > record_at[i - 1]))
            throw std::invalid_argument("integrate_blowup: record_at must be strictly increasing");
    }

    trajectory_sample traj;
    traj.times.push_back(0.0);
    traj.values.push_back(xi);

    const bool record_all = record_at.empty();
    std::size_t next_node = 0;
    if (!record_all && record_at[0] == 0.0)
        next_node = 1; // t = 0 already recorded

    double t = 0.0, y = xi;
    double dt = dt_max;

    auto declare_blowup = [&](double t_base, double y_base, double t_cross) {
        blowup_info info;
        info.cap_used = ctrl.x_cap;
        if (auto tail = tail_correction(f, t_base, y_base)) {
            info.t_estimate = t_base + *tail;
            info.refinement = blowup_refinement::tail_corrected;
        } else {
            info.t_estimate = t_cross;
            info.refinement = blowup_refinement::cap_hit;
        }
        traj.blowup = info;
    };

    while (t < horizon) {
        double k1;
        try {
            k1 = f(t, y);
        } catch (const std::exception&) {
            throw std::runtime_error("integrate_blowup: drift evaluation failed at t=" +
                                     std::to_string(t));
        }
        if (!std::isfinite(k1)) {
            declare_blowup(t, y, t);
            return traj;
        }
        // Slope clamp: scale by 1/(1+|f|) against the state scale (1+|y|), so
        // the per-step growth stays bounded relative to |y| and the time grid
        // refines like 1/|f| as the solution stiffens toward a blow-up.
        dt = std::min({dt, dt_max, dt_max * (1.0 + std::abs(y)) / (1.0 + std::abs(k1))});

        // Land exactly on the next requested node / the horizon.
        double t_target = t + dt;
        bool landing = false;
        if (!record_all && next_node < record_at.size() && t_target >= record_at[next_node]) {
            t_target = record_at[next_node];
            landing = true;
        }
        bool at_end = false;
        if (t_target >= horizon) {
            t_target = horizon;
            at_end = true;
            landing = !record_all && next_node < record_at.size() &&
                      record_at[next_node] == horizon;
        }
        const double dt_step = t_target - t;
        if (dt_step < ctrl.dt_floor && !landing && !at_end) {
            if (k1 > 0.0) {
                declare_blowup(t, y, t);
                return traj;
            }
            throw std::runtime_error("integrate_blowup: step size collapsed at t=" +
                                     std::to_string(t));
        }

        ck_step s;
        bool eval_ok = true;
        try {
            s = try_step(f, t, y, dt_step, k1);
        } catch (const std::exception&) {
            eval_ok = false;
        }
        const double budget = ctrl.local_tol * (1.0 + std::abs(y));
        if (!eval_ok || !s.finite || s.err > budget) {
            // Reject and shrink; a collapsing step with positive slope means the
            // solution is stiffening beyond resolution, i.e. blowing up.
            const double shrink =
                (eval_ok && s.finite && s.err > 0.0)
                    ? std::clamp(0.9 * std::pow(budget / s.err, 0.25), 0.1, 0.9)
                    : 0.5;
            dt = dt_step * shrink;
            if (dt < ctrl.dt_floor) {
                if (k1 > 0.0) {
                    declare_blowup(t, y, t);
                    return traj;
                }
                throw std::runtime_error("integrate_blowup: step size collapsed at t=" +
                                         std::to_string(t));
            }
            continue;
        }

        if (s.y_new > ctrl.x_cap) {
            declare_blowup(t, y, t_target);
            return traj;
        }
        t = t_target;
        y = s.y_new;
        if (record_all) {
            traj.times.push_back(t);
            traj.values.push_back(y);
        } else if (landing) {
            traj.times.push_back(t);
            traj.values.push_back(y);
            ++next_node;
        }
        if (s.err > 0.0)
            dt = dt_step * std::clamp(0.9 * std::pow(budget / s.err, 0.2), 0.2, 5.0);
        else
            dt = dt_step * 5.0;
    }
    return traj;
}

double osgood_inverse(const dsl::expression& b, double xi, double t, double tol) {
    if (b.depends_on_t())
        throw std::invalid_argument("osgood_inverse: drift must be autonomous");
    if (!std::isfinite(xi) || !std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("osgood_inverse: need finite xi and t >= 0");
    if (!(tol > 0.0))
        throw std::invalid_argument("osgood_inverse: tol must be positive");
    auto inv_b = [&](double s) { return 1.0 / b.evaluate(0.0, s); };

    // Reject times at or beyond the blow-up time int_xi^inf ds / b(s).
    const double theta = std::max(xi, 1.0);
    auto tail = quad::classify_tail(inv_b, theta, quad::shell_options_from_tol(tol / 4.0));
    if (tail.kind == quad::integral_kind::convergent) {
        const double head = xi < theta ? quad::integrate(inv_b, xi, theta).value : 0.0;
        if (t >= head + tail.value - tol)
            throw std::domain_error("osgood_inverse: time at or beyond the blow-up time");
    }
    if (t == 0.0)
        return xi;

    quad::antiderivative B(inv_b, xi, tol / 16.0, tol / 16.0);
    double lo = xi, hi = xi > 0.0 ? 2.0 * xi : 1.0;
    int doublings = 0;
    while (B(hi) < t) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 200 || !std::isfinite(hi))
            throw std::runtime_error("osgood_inverse: failed to bracket the inverse");
    }
    double flo = B(lo) - t, fhi = B(hi) - t;
    for (int it = 0; it < 200; ++it) {
        double mid = hi - fhi * (hi - lo) / (fhi - flo); // secant through the bracket
        const double quarter = 0.25 * (hi - lo);
        if (!std::isfinite(mid) || mid < lo + quarter || mid > hi - quarter)
            mid = 0.5 * (lo + hi); // fall back to bisection
        const double fmid = B(mid) - t;
        if (std::abs(fmid) <= tol)
            return mid;
        if (fmid < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
        if (hi - lo <= tol * (1.0 + std::abs(lo)))
            return 0.5 * (lo + hi);
    }
    return 0.5 * (lo + hi);
}

comparison_report comparison_check(const trajectory_sample& y, const dsl::expression& b,
                                   double xi, comparison_side side, double tol) {
    if (y.times.empty())
        throw std::invalid_argument("comparison_check: empty trajectory");
    if (!(tol >= 0.0))
        throw std::invalid_argument("comparison_check: tol must be non-negative");
    const double horizon = y.times.back();
    std::vector<double> nodes;
    for (double u : y.times)
        if (u > 0.0)
            nodes.push_back(u);

    comparison_report rep;
    if (horizon <= 0.0) { // single node at t = 0: compare initial values only
        rep.passed = side == comparison_side::lower ? y.values.front() >= xi - tol
                                                    : y.values.front() <= xi + tol;
        if (!rep.passed) {
            rep.violation_time = 0.0;
            rep.y_value = y.values.front();
            rep.x_value = xi;
        }
        return rep;
    }

    fn2 f = [&b](double, double x) { return b.evaluate(0.0, x); };
    step_control ctrl;
    ctrl.local_tol = std::min(1e-9, tol > 0.0 ? tol / 16.0 : 1e-9);
    auto x = integrate_blowup(f, xi, horizon, ctrl, nodes);

    rep.passed = true;
    std::size_t j = 0;
    for (std::size_t i = 0; i < x.times.size(); ++i) {
        while (j < y.times.size() && y.times[j] < x.times[i] - 1e-12 * (1.0 + x.times[i]))
            ++j;
        if (j >= y.times.size())
            break;
        if (std::abs(y.times[j] - x.times[i]) > 1e-12 * (1.0 + x.times[i]))
            continue;
        const double yv = y.values[j], xv = x.values[i];
        const bool ok =
            side == comparison_side::lower ? yv >= xv - tol : yv <= xv + tol;
        if (!ok) {
            rep.passed = false;
            rep.violation_time = x.times[i];
            rep.y_value = yv;
            rep.x_value = xv;
            return rep;
        }
    }
    if (x.blowup) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "reference solution blew up at t=%.6g; ordering checked on [0, %.6g)",
                      x.blowup->t_estimate, x.times.back());
        rep.note = buf;
    }
    return rep;
}

void write_csv(const trajectory_sample& traj, std::ostream& os) {
    os << "time,value\n";
    char buf[96];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", traj.times[i], traj.values[i]);
        os << buf;
    }
    if (traj.blowup) {
        std::snprintf(buf, sizeof(buf), "# blowup t=%.17g cap=%.17g refinement=%s\n",
                      traj.blowup->t_estimate, traj.blowup->cap_used,
                      to_string(traj.blowup->refinement));
        os << buf;
    }
}

} // namespace blowup::ode
