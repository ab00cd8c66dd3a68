#include "blowup/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace blowup::criteria {

namespace {

using dsl::check_hypothesis;
using dsl::grid_spec;
using dsl::hypothesis_property;
using dsl::hypothesis_report;
using dsl::hypothesis_status;
using dsl::region;
using dsl::witness_point;
using quad::integral_kind;
using quad::integral_verdict;

constexpr double k_t_hi = 10.0;  // screened time window [0, 10]
constexpr double k_x_lo = 1e-8;  // lower end of positive-axis screen windows
constexpr double k_x_hi = 1e6;   // upper end of screen windows
constexpr double k_z_floor = -0.69314718055994531; // -ln 2
constexpr double k_theta_delta = 1e-3;             // theta = e^c (1 + delta)
constexpr int k_nt = 21;
constexpr int k_nx = 201;

double screen_tol(double tol) { return std::max(tol, 1e-12); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Shrinks the top of a screen axis to where f still evaluates finite at the
// probe times: rapidly growing coefficients (exp drifts) overflow the double
// range far below the nominal window top, and that alone should not render a
// screen unverifiable. Bisection along the screened coordinate.
double cap_screen_hi(const fn2& f, double t_lo, double t_hi, double lo, double hi,
                     std::string& note) {
    auto ok = [&](double v) {
        const double ts[3] = {t_lo, 0.5 * (t_lo + t_hi), t_hi};
        for (double t : ts) {
            try {
                if (!std::isfinite(f(t, v)))
                    return false;
            } catch (const std::exception&) {
                return false;
            }
        }
        return true;
    };
    if (ok(hi))
        return hi;
    if (!ok(lo))
        return hi; // hopeless; let the screen itself report the failure
    double glo = lo, ghi = hi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (glo + ghi);
        if (!(mid > glo && mid < ghi))
            break;
        (ok(mid) ? glo : ghi) = mid;
    }
    // Back off the razor edge: grid arithmetic (lo + span * i / n) can land a
    // few ulps above the bisected bound and re-trigger the overflow there.
    glo = std::max(lo, glo - 1e-9 * (1.0 + std::abs(glo)));
    note = "screen window capped at coordinate " + fmt(glo) + " (overflow beyond)";
    return glo;
}

// Runs a screen over log-spaced x by checking h(t,u) = f(t, e^u) on a linear
// u-grid, then translates the report back to x-coordinates.
hypothesis_report screen_logx(const fn2& f, hypothesis_property prop, double t_lo, double t_hi,
                              int nt, double x_lo, double x_hi, double tol) {
    auto h = [&f](double t, double u) { return f(t, std::exp(u)); };
    std::string cap_note;
    const double u_hi = cap_screen_hi(h, t_lo, t_hi, std::log(x_lo), std::log(x_hi), cap_note);
    region reg{t_lo, t_hi, std::log(x_lo), u_hi};
    auto rep = check_hypothesis(h, prop, reg, grid_spec{nt, k_nx}, tol);
    rep.sampled.x_lo = x_lo;
    rep.sampled.x_hi = std::exp(u_hi);
    if (rep.witness)
        rep.witness->x = std::exp(rep.witness->x);
    rep.note += rep.note.empty() ? "x sampled log-spaced" : "; x sampled log-spaced";
    if (!cap_note.empty())
        rep.note += "; window top lowered to x=" + fmt(std::exp(u_hi)) + " (overflow beyond)";
    return rep;
}

bool passed(const hypothesis_report& r) { return r.status == hypothesis_status::passed; }

// For screens guarding a division (1/b, 1/sigma^2) a positivity pass that
// only holds non-strictly (witness attached) is not good enough.
bool strictly_passed(const hypothesis_report& r) {
    return r.status == hypothesis_status::passed && !r.witness.has_value();
}

bool all_passed(const std::vector<hypothesis_report>& rs) {
    return std::all_of(rs.begin(), rs.end(), [](const hypothesis_report& r) { return passed(r); });
}

struct scan_tally {
    int convergent = 0;
    int divergent = 0;
    int other = 0;
};

void tally(scan_tally& t, integral_kind k) {
    if (k == integral_kind::convergent)
        ++t.convergent;
    else if (k == integral_kind::divergent)
        ++t.divergent;
    else
        ++t.other;
}

// Aggregation for existential criteria over the a-scan: some convergent a
// settles the integral condition; all divergent settles its negation.
verdict iff_verdict(const scan_tally& t, std::vector<std::string>& notes) {
    if (t.convergent > 0)
        return verdict::almost_sure_explosion;
    if (t.other == 0 && t.divergent > 0)
        return verdict::no_almost_sure_explosion;
    notes.push_back("integral classification inconclusive for at least one scanned a");
    return verdict::inconclusive;
}

std::vector<double> scan_of(const criterion_params& params) {
    std::vector<double> scan = params.a_scan.empty() ? default_a_scan() : params.a_scan;
    for (double a : scan)
        if (!(a > 0.0) || !std::isfinite(a))
            throw std::invalid_argument("criterion a-scan values must be positive and finite");
    return scan;
}

// Locates the last zero of denom on the sampled ray [theta, theta*2^40] and
// returns a theta lifted just above it; nullopt when denom is not positive at
// the far end of the ray (not eventually positive as far as we can see). The
// ray is truncated at the first point where denom stops evaluating (overflow
// of a growing drift), which is not evidence against positivity.
std::optional<double> lift_above_last_zero(const std::function<double(double)>& denom,
                                           double theta, std::string& note) {
    const int nsamp = 161;
    auto val = [&](double s) -> std::optional<double> {
        try {
            double v = denom(s);
            if (std::isfinite(v))
                return v;
        } catch (const std::exception&) {
        }
        return std::nullopt;
    };
    std::vector<double> ss, vv;
    for (int j = 0; j < nsamp; ++j) {
        const double s = theta * std::exp2(40.0 * j / (nsamp - 1.0));
        auto v = val(s);
        if (!v)
            break;
        ss.push_back(s);
        vv.push_back(*v);
    }
    if (ss.empty())
        return std::nullopt;
    int last_nonpos = -1;
    for (std::size_t j = 0; j < vv.size(); ++j)
        if (!(vv[j] > 0.0))
            last_nonpos = static_cast<int>(j);
    if (last_nonpos < 0)
        return theta;
    if (last_nonpos + 1 == static_cast<int>(vv.size()))
        return std::nullopt;
    double lo = ss[last_nonpos], hi = ss[last_nonpos + 1];
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto v = val(mid);
        if (v && *v > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    const double lifted = hi * (1.0 + 1e-6);
    note = "theta lifted above a denominator zero near s=" + fmt(hi);
    return lifted;
}

// The iterated integrals p'(y) W(y) (with p' = exp(-2I), W = int 2 e^{2I}/s2)
// are always evaluated as a single integral of exp(-2 (I(y) - I(z))): I is
// non-decreasing for non-negative drifts, so the combined integrand stays
// within [0, 2/s2(z)] no matter how fast the drift grows, whereas e^{+-2I}
// alone overflows the double range near 2I ~ 709.
//
// Evaluates int_zeta^y 2 exp(-2 (I(y) - I(z))) / s2(z) dz with a split at the
// edge of the exponential layer at z = y: for strongly growing drifts the
// layer width ~ 1/m(y) shrinks below the reach of the first coarse panel's
// nodes, which would see zero integrand with zero error estimate and never
// refine. m_y is the local exponent slope I'(y).
double pw_layer_integral(const quad::antiderivative& I, const fn1& s2, double zeta, double y,
                         double m_y) {
    const double Iy = I(y);
    if (std::isinf(Iy))
        return Iy > 0 ? 0.0 : std::numeric_limits<double>::infinity();
    auto g = [&I, &s2, Iy](double z) { return 2.0 * std::exp(-2.0 * (Iy - I(z))) / s2(z); };
    const double half = 0.5 * (y - zeta);
    const double width = m_y > 0.0 ? 30.0 / m_y : half;
    const double cut = y - std::min(half, width);
    return quad::integrate(g, zeta, cut, 1e-12, 1e-9).value +
           quad::integrate(g, cut, y, 1e-12, 1e-9).value;
}

// Direct iterated-quadrature classification of v(inf) for the unit-noise
// semilinear diffusion, anchored at xi.
integral_verdict direct_v_tail(const dsl::expression& b, double xi, double tol) {
    auto m = [&b](double r) { return b.evaluate(0.0, r) / (r * r); };
    quad::antiderivative I(m, xi);
    fn1 s2 = [](double z) { return z * z; };
    auto h = [&I, &s2, &m, xi](double y) { return pw_layer_integral(I, s2, xi, y, m(y)); };
    return quad::classify_tail(h, xi, quad::shell_options_from_tol(tol));
}

// Shared engine for the pathwise criterion; the two public overloads differ
// only in how sigma^2(a) is obtained and which function the screens run on.
criterion_report pathwise_core(const dsl::expression& b, double xi,
                               const std::function<double(double)>& sigma2_at,
                               const fn2& screen_fn, const criterion_params& params, double tol,
                               criterion_report rep) {
    rep.id = "semilinear-pathwise";
    if (b.empty())
        throw std::invalid_argument("semilinear_pathwise: empty drift");
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw std::invalid_argument("semilinear_pathwise: xi must be positive and finite");
    if (!(params.c >= 0.0) || !std::isfinite(params.c))
        throw std::invalid_argument("semilinear_pathwise: c must be finite and >= 0");
    if (!(tol > 0.0))
        throw std::invalid_argument("semilinear_pathwise: tol must be positive");

    const double st = screen_tol(tol);
    const double z_span = std::log(k_x_hi);
    const double zc_lo = params.c + 1e-6;
    const grid_spec g{k_nt, k_nx};
    std::string cap_note;
    const double z_hi = cap_screen_hi(screen_fn, 0.0, k_t_hi, k_z_floor, z_span, cap_note);
    const double zc_hi =
        cap_screen_hi(screen_fn, 0.0, k_t_hi, zc_lo, params.c + z_span, cap_note);
    if (!cap_note.empty())
        rep.notes.push_back(cap_note);
    rep.screens.push_back(check_hypothesis(screen_fn, hypothesis_property::lower_bound_half,
                                           region{0.0, k_t_hi, k_z_floor, z_hi}, g, st));
    rep.screens.push_back(check_hypothesis(screen_fn, hypothesis_property::lower_bound_half,
                                           region{0.0, k_t_hi, zc_lo, zc_hi}, g, st));
    rep.screens.push_back(check_hypothesis(screen_fn, hypothesis_property::non_decreasing_in_t,
                                           region{0.0, k_t_hi, k_z_floor, z_hi}, g, st));
    rep.screens.push_back(check_hypothesis(screen_fn, hypothesis_property::non_decreasing_in_x,
                                           region{0.0, k_t_hi, zc_lo, zc_hi}, g, st));
    if (!all_passed(rep.screens)) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("structural hypotheses on the log-scaled drift not verified");
        return rep;
    }

    const double theta_floor = std::exp(params.c);
    double theta = theta_floor * (1.0 + k_theta_delta);
    if (!std::isnan(params.theta)) {
        if (params.theta > theta_floor)
            theta = params.theta;
        else
            rep.notes.push_back("theta raised to e^c (1+1e-3) = " + fmt(theta) +
                                "; the criterion requires theta > e^c");
    } else {
        rep.notes.push_back("theta defaulted to e^c (1+1e-3) = " + fmt(theta));
    }

    const auto opts = quad::shell_options_from_tol(tol);
    scan_tally t;
    for (double a : scan_of(params)) {
        const double s2 = sigma2_at(a);
        if (!(s2 > 0.0) || !std::isfinite(s2)) {
            labeled_integral li;
            li.label = "tail a=" + fmt(a);
            rep.integrals.push_back(li);
            rep.notes.push_back("sigma^2(a) not positive at a=" + fmt(a));
            tally(t, integral_kind::inconclusive);
            continue;
        }
        auto denom = [&b, a, s2](double s) { return 2.0 * b.evaluate(a, s) - s2 * s; };
        std::string lift_note;
        auto th = lift_above_last_zero(denom, theta, lift_note);
        if (!th) {
            labeled_integral li;
            li.label = "tail a=" + fmt(a);
            rep.integrals.push_back(li);
            rep.notes.push_back("denominator 2b - sigma^2 s not eventually positive at a=" +
                                fmt(a));
            tally(t, integral_kind::inconclusive);
            continue;
        }
        if (!lift_note.empty())
            rep.notes.push_back(lift_note + " (a=" + fmt(a) + ")");
        auto iv = quad::classify_tail([&denom](double s) { return 1.0 / denom(s); }, *th, opts);
        rep.integrals.push_back({"tail a=" + fmt(a), iv});
        tally(t, iv.kind);
    }
    rep.result = iff_verdict(t, rep.notes);
    return rep;
}

} // namespace

const char* to_string(verdict v) {
    switch (v) {
    case verdict::almost_sure_explosion: return "AlmostSureExplosion";
    case verdict::no_almost_sure_explosion: return "NoAlmostSureExplosion";
    case verdict::positive_probability_of_global_solution:
        return "PositiveProbabilityOfGlobalSolution";
    case verdict::necessary_condition_satisfied: return "NecessaryConditionSatisfied";
    case verdict::necessary_condition_violated: return "NecessaryConditionViolated";
    case verdict::sufficient_condition_satisfied: return "SufficientConditionSatisfied";
    case verdict::sufficient_condition_not_satisfied: return "SufficientConditionNotSatisfied";
    case verdict::inconclusive: return "Inconclusive";
    }
    return "?";
}

criterion_report osgood_autonomous(const dsl::expression& b, double xi, double tol) {
    if (b.empty())
        throw std::invalid_argument("osgood_autonomous: empty drift");
    if (b.depends_on_t())
        throw std::invalid_argument("osgood_autonomous: drift must be autonomous");
    if (!std::isfinite(xi) || xi < 0.0)
        throw std::invalid_argument("osgood_autonomous: xi must be finite and >= 0");
    if (!(tol > 0.0))
        throw std::invalid_argument("osgood_autonomous: tol must be positive");

    criterion_report rep;
    rep.id = "osgood-autonomous";
    const double lo = xi > 0.0 ? std::max(xi * (1.0 - 1e-3), k_x_lo) : k_x_lo;
    const double hi = std::max(k_x_hi, 1e3 * std::max(xi, 1.0));
    fn2 f = [&b](double t, double x) { return b.evaluate(t, x); };
    rep.screens.push_back(screen_logx(f, hypothesis_property::positivity_on_region, 0.0, 0.0, 1,
                                      lo, hi, screen_tol(tol)));
    if (!strictly_passed(rep.screens.back())) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("drift positivity on the ray from xi not certified");
        return rep;
    }

    const auto opts = quad::shell_options_from_tol(tol);
    auto inv_b = [&b](double s) { return 1.0 / b.evaluate(0.0, s); };
    integral_verdict head;
    bool has_head = false;
    double theta = xi;
    if (xi <= 0.0) { // tail machinery needs a positive anchor
        theta = 1.0;
        head = quad::classify_singular_left(inv_b, 0.0, theta, opts);
        has_head = true;
        rep.integrals.push_back({"B(0,1)", head});
    }
    auto tail = quad::classify_tail(inv_b, theta, opts);
    rep.integrals.push_back({has_head ? "B(1,inf)" : "B(xi,inf)", tail});

    if (tail.kind == integral_kind::convergent &&
        (!has_head || head.kind == integral_kind::convergent)) {
        rep.result = verdict::almost_sure_explosion;
        rep.explosion_time = tail.value + (has_head ? head.value : 0.0);
        rep.notes.push_back("deterministic ODE: explosion is certain, T_e equals the integral");
    } else if (tail.kind == integral_kind::divergent ||
               (has_head && head.kind == integral_kind::divergent)) {
        rep.result = verdict::no_almost_sure_explosion;
        rep.notes.push_back("deterministic ODE: the solution is global");
    } else {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("integral classification inconclusive");
    }
    return rep;
}

criterion_report osgood_nonautonomous(const dsl::expression& b, double xi,
                                      const criterion_params& params, double tol) {
    if (b.empty())
        throw std::invalid_argument("osgood_nonautonomous: empty drift");
    if (!std::isfinite(xi))
        throw std::invalid_argument("osgood_nonautonomous: xi must be finite");
    if (!(params.c >= 0.0) || !std::isfinite(params.c))
        throw std::invalid_argument("osgood_nonautonomous: c must be finite and >= 0");
    if (!(tol > 0.0))
        throw std::invalid_argument("osgood_nonautonomous: tol must be positive");

    criterion_report rep;
    rep.id = "osgood-nonautonomous";
    if (!(xi > params.c)) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("requires xi > c");
        return rep;
    }
    const double st = screen_tol(tol);
    const double c_lo = params.c > 0.0 ? params.c * (1.0 + 1e-6) : k_x_lo;
    fn2 f = [&b](double t, double x) { return b.evaluate(t, x); };
    rep.screens.push_back(screen_logx(f, hypothesis_property::non_negativity, 0.0, k_t_hi, k_nt,
                                      k_x_lo, k_x_hi, st));
    rep.screens.push_back(screen_logx(f, hypothesis_property::positivity_on_region, 0.0, k_t_hi,
                                      k_nt, c_lo, k_x_hi, st));
    rep.screens.push_back(screen_logx(f, hypothesis_property::non_decreasing_in_t, 0.0, k_t_hi,
                                      k_nt, c_lo, k_x_hi, st));
    rep.screens.push_back(screen_logx(f, hypothesis_property::non_decreasing_in_x, 0.0, k_t_hi,
                                      k_nt, c_lo, k_x_hi, st));
    if (!all_passed(rep.screens) || !strictly_passed(rep.screens[1])) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("structural hypotheses on b not verified");
        return rep;
    }

    const auto opts = quad::shell_options_from_tol(tol);
    scan_tally t;
    for (double a : scan_of(params)) {
        auto iv = quad::classify_tail([&b, a](double s) { return 1.0 / b.evaluate(a, s); }, xi,
                                      opts);
        rep.integrals.push_back({"tail a=" + fmt(a), iv});
        tally(t, iv.kind);
    }
    rep.result = iff_verdict(t, rep.notes);
    if (rep.result == verdict::almost_sure_explosion)
        rep.notes.push_back("deterministic ODE blow-up for the frozen-time drift");
    return rep;
}

criterion_report feller_test(const problem& prob, double tol) {
    const dsl::expression& b = prob.drift;
    const dsl::expression& sig = prob.sigma;
    if (b.empty() || sig.empty())
        throw std::invalid_argument("feller_test: drift and sigma must be set");
    if (b.depends_on_t() || sig.depends_on_t())
        throw std::invalid_argument("feller_test: coefficients must be autonomous");
    const double ell = prob.ell, r = prob.r, zeta = prob.zeta, xi = prob.xi;
    if (!std::isfinite(zeta) || !(ell < zeta && zeta < r))
        throw std::invalid_argument("feller_test: need ell < zeta < r with finite zeta");
    if (!(xi > ell && xi < r))
        throw std::invalid_argument("feller_test: need xi in (ell, r)");
    if (!(tol > 0.0))
        throw std::invalid_argument("feller_test: tol must be positive");

    criterion_report rep;
    rep.id = "feller";

    fn1 sigd;
    if (sig.depends_on_x()) {
        sigd = [&sig](double x) { return sig.evaluate(0.0, x); };
    } else {
        const double k = sig.evaluate(0.0, 0.0);
        sigd = [k](double x) { return k * x; };
        rep.notes.push_back("constant sigma taken as the semilinear diffusion sigma * x");
    }
    fn1 sig2 = [&sigd](double x) {
        const double v = sigd(x);
        return v * v;
    };

    // Screen sigma^2 > 0 strictly inside (ell, r); also scan sigma for an
    // interior sign change, which pins an interior zero the grid may miss.
    {
        const double w_hi =
            std::isfinite(r) ? r - (r - zeta) * 1e-6 : std::max(k_x_hi, 1e3 * std::abs(zeta));
        hypothesis_report s2rep;
        std::vector<double> xs;
        if (ell >= 0.0) {
            const double w_lo = ell + k_x_lo * (1.0 + std::abs(ell));
            s2rep = screen_logx([&sig2](double, double x) { return sig2(x); },
                                hypothesis_property::positivity_on_region, 0.0, 0.0, 1, w_lo,
                                w_hi, screen_tol(tol));
            for (int i = 0; i < k_nx; ++i)
                xs.push_back(w_lo * std::pow(w_hi / w_lo, i / (k_nx - 1.0)));
        } else {
            const double w_lo = std::isfinite(ell) ? ell + (zeta - ell) * 1e-6 : -k_x_hi;
            s2rep = check_hypothesis([&sig2](double, double x) { return sig2(x); },
                                     hypothesis_property::positivity_on_region,
                                     region{0.0, 0.0, w_lo, w_hi}, grid_spec{1, k_nx},
                                     screen_tol(tol));
            for (int i = 0; i < k_nx; ++i)
                xs.push_back(w_lo + (w_hi - w_lo) * i / (k_nx - 1.0));
        }
        bool sign_change = false;
        double cross_lo = 0.0, cross_hi = 0.0;
        double prev = sigd(xs[0]);
        for (int i = 1; i < k_nx; ++i) {
            const double cur = sigd(xs[i]);
            if (prev * cur < 0.0 || (cur == 0.0 && prev != 0.0)) {
                sign_change = true;
                cross_lo = xs[i - 1];
                cross_hi = xs[i];
            }
            prev = cur;
        }
        if (sign_change) {
            for (int it = 0; it < 100 && cross_hi - cross_lo > 1e-12 * (1.0 + cross_hi); ++it) {
                const double mid = 0.5 * (cross_lo + cross_hi);
                if (sigd(cross_lo) * sigd(mid) <= 0.0)
                    cross_hi = mid;
                else
                    cross_lo = mid;
            }
            s2rep.status = hypothesis_status::failed_with_witness;
            s2rep.witness = witness_point{0.0, cross_hi, sigd(cross_hi)};
            s2rep.note = "sigma vanishes inside the interval near x=" + fmt(cross_hi);
        }
        rep.screens.push_back(s2rep);
        if (!strictly_passed(s2rep)) {
            rep.result = verdict::inconclusive;
            rep.notes.push_back("sigma^2 not certified strictly positive on (ell, r)");
            return rep;
        }
    }

    fn1 m = [&b, &sig2](double s) { return b.evaluate(0.0, s) / sig2(s); };
    quad::antiderivative I(m, zeta);
    auto pprime = [&I](double s) { return std::exp(-2.0 * I(s)); };
    // h = p' W on [zeta, r); hhat = p' (-W) >= 0 on (ell, zeta]. hhat needs no
    // layer split: its integrand peaks at the fixed endpoint zeta, which the
    // coarse panels always sample.
    auto h = [&I, &sig2, &m, zeta](double y) { return pw_layer_integral(I, sig2, zeta, y, m(y)); };
    auto hhat = [&I, &sig2, zeta](double y) {
        const double Iy = I(y);
        if (std::isinf(Iy))
            return Iy > 0 ? 0.0 : std::numeric_limits<double>::infinity();
        auto g = [&I, &sig2, Iy](double z) { return 2.0 * std::exp(-2.0 * (Iy - I(z))) / sig2(z); };
        return quad::integrate(g, y, zeta, 1e-12, 1e-9).value;
    };

    const auto opts = quad::shell_options_from_tol(tol);
    auto head_integral = [&](const fn1& f, double a1, double a2) {
        try {
            return quad::integrate(f, a1, a2, tol, tol).value;
        } catch (const std::exception&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    integral_verdict v_r, p_r, v_l, p_l;
    if (std::isfinite(r)) {
        v_r = quad::classify_singular_left([&h, r](double u) { return h(r - u); }, 0.0, r - zeta,
                                           opts);
        p_r = quad::classify_singular_left([&pprime, r](double u) { return pprime(r - u); }, 0.0,
                                           r - zeta, opts);
    } else {
        const double th = std::max(zeta, 1.0);
        v_r = quad::classify_tail(h, th, opts);
        p_r = quad::classify_tail(pprime, th, opts);
        if (zeta < th) {
            if (v_r.kind == integral_kind::convergent)
                v_r.value += head_integral(h, zeta, th);
            if (p_r.kind == integral_kind::convergent)
                p_r.value += head_integral(pprime, zeta, th);
        }
    }
    if (std::isfinite(ell)) {
        v_l = quad::classify_singular_left(hhat, ell, zeta, opts);
        p_l = quad::classify_singular_left(pprime, ell, zeta, opts);
    } else {
        const double th = std::max(-zeta, 1.0);
        v_l = quad::classify_tail([&hhat](double u) { return hhat(-u); }, th, opts);
        p_l = quad::classify_tail([&pprime](double u) { return pprime(-u); }, th, opts);
        if (-th < zeta) {
            if (v_l.kind == integral_kind::convergent)
                v_l.value += head_integral(hhat, -th, zeta);
            if (p_l.kind == integral_kind::convergent)
                p_l.value += head_integral(pprime, -th, zeta);
        }
    }

    rep.integrals.push_back({"v(r-)", v_r});
    rep.integrals.push_back({"v(l+)", v_l});
    {
        integral_verdict signed_pl = p_l; // p(l+) = -int_l^zeta p'
        signed_pl.value = -signed_pl.value;
        rep.integrals.push_back({"p(l+)", signed_pl});
        rep.integrals.push_back({"p(r-)", p_r});
    }

    const auto conv = integral_kind::convergent;
    const auto divg = integral_kind::divergent;
    const bool cond_i = v_r.kind == conv && v_l.kind == conv;
    const bool cond_ii = v_r.kind == conv && p_l.kind == divg;
    const bool cond_iii = v_l.kind == conv && p_r.kind == divg;
    const bool fail_i = v_r.kind == divg || v_l.kind == divg;
    const bool fail_ii = v_r.kind == divg || p_l.kind == conv;
    const bool fail_iii = v_l.kind == divg || p_r.kind == conv;

    if (cond_i || cond_ii || cond_iii) {
        rep.result = verdict::almost_sure_explosion;
        if (cond_i)
            rep.notes.push_back("condition (i): v finite at both ends");
        if (cond_ii)
            rep.notes.push_back("condition (ii): v(r-) finite and p(l+) = -inf");
        if (cond_iii)
            rep.notes.push_back("condition (iii): v(l+) finite and p(r-) = +inf");
    } else if (fail_i && fail_ii && fail_iii) {
        rep.result = verdict::no_almost_sure_explosion;
        rep.notes.push_back("conditions (i)-(iii) all fail");
    } else {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("endpoint classification insufficient to settle (i)-(iii)");
    }
    return rep;
}

criterion_report semilinear_feller(const dsl::expression& b, double xi, double tol) {
    if (b.empty())
        throw std::invalid_argument("semilinear_feller: empty drift");
    if (b.depends_on_t())
        throw std::invalid_argument("semilinear_feller: drift must be autonomous");
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw std::invalid_argument("semilinear_feller: xi must be positive and finite");
    if (!(tol > 0.0))
        throw std::invalid_argument("semilinear_feller: tol must be positive");

    criterion_report rep;
    rep.id = "semilinear-feller";
    fn2 bbar = [&b](double, double x) { return b.evaluate(0.0, x) / x; };
    const double st = screen_tol(tol);
    rep.screens.push_back(screen_logx(bbar, hypothesis_property::lower_bound_half, 0.0, 0.0, 1,
                                      k_x_lo, k_x_hi, st));
    rep.screens.push_back(screen_logx(bbar, hypothesis_property::non_decreasing_in_x, 0.0, 0.0, 1,
                                      k_x_lo, k_x_hi, st));
    if (!all_passed(rep.screens)) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("hypotheses on b(x)/x (non-decreasing, > 1/2) not verified");
        return rep;
    }

    const auto opts = quad::shell_options_from_tol(tol);
    auto denom = [&b](double s) { return 2.0 * b.evaluate(0.0, s) - s; };
    auto main = quad::classify_tail([&denom](double s) { return 1.0 / denom(s); }, xi, opts);
    rep.integrals.push_back({"I(xi,inf) of 1/(2b-s)", main});

    // Analytic bracket: v(inf) <= 2 I and v(inf) >= 2 (I - C) with the
    // correction C = int (xi/y)^{2 bbar(y) - 1} / (2b(y) - y) dy, evaluated in
    // log space to dodge overflow.
    const double log_xi = std::log(xi);
    auto corr_f = [&b, &denom, log_xi](double y) {
        const double bb = b.evaluate(0.0, y) / y;
        return std::exp((2.0 * bb - 1.0) * (log_xi - std::log(y))) / denom(y);
    };
    auto corr = quad::classify_tail(corr_f, xi, opts);
    integral_verdict upper = main;
    upper.value = 2.0 * main.value;
    upper.error_estimate = 2.0 * main.error_estimate;
    rep.integrals.push_back({"v(inf) upper bound", upper});
    bool have_bracket = false;
    double lower_value = 0.0;
    if (main.kind == integral_kind::convergent && corr.kind == integral_kind::convergent) {
        integral_verdict lower = main;
        lower_value = 2.0 * (main.value - corr.value);
        lower.value = lower_value;
        lower.error_estimate = 2.0 * (main.error_estimate + corr.error_estimate);
        rep.integrals.push_back({"v(inf) lower bound", lower});
        have_bracket = true;
    } else {
        rep.integrals.push_back({"v(inf) bracket correction", corr});
    }

    auto direct = direct_v_tail(b, xi, tol);
    rep.integrals.push_back({"v(inf) direct", direct});

    bool mismatch = false;
    if (direct.kind == integral_kind::convergent && main.kind == integral_kind::divergent)
        mismatch = true;
    if (direct.kind == integral_kind::divergent && main.kind == integral_kind::convergent)
        mismatch = true;
    if (direct.kind == integral_kind::convergent && have_bracket) {
        const double slack = 10.0 * tol * (1.0 + std::abs(upper.value)) +
                             10.0 * (direct.error_estimate + upper.error_estimate);
        if (direct.value < lower_value - slack || direct.value > upper.value + slack)
            mismatch = true;
    }
    if (direct.kind == integral_kind::inconclusive)
        rep.notes.push_back("direct v(inf) not numerically resolvable; bracket used alone");
    if (mismatch) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("direct v(inf) disagrees with the analytic bracket");
        return rep;
    }

    if (main.kind == integral_kind::convergent)
        rep.result = verdict::almost_sure_explosion;
    else if (main.kind == integral_kind::divergent)
        rep.result = verdict::no_almost_sure_explosion;
    else {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("integral classification inconclusive");
    }
    return rep;
}

criterion_report semilinear_pathwise(const dsl::expression& b, double xi, double sigma2_at_a,
                                     const criterion_params& params, double tol) {
    if (!(sigma2_at_a > 0.0) || !std::isfinite(sigma2_at_a))
        throw std::invalid_argument("semilinear_pathwise: sigma2_at_a must be positive");
    // Screen the sigma-scaled log drift so that the >= 1/2 bound lines up
    // with positivity of the tail denominator 2b - sigma^2 s.
    fn2 btilde = [&b, sigma2_at_a](double t, double z) {
        const double ez = std::exp(z);
        return b.evaluate(t, ez) / (sigma2_at_a * ez);
    };
    return pathwise_core(
        b, xi, [sigma2_at_a](double) { return sigma2_at_a; }, btilde, params, tol,
        criterion_report{});
}

criterion_report semilinear_pathwise(const dsl::expression& b, double xi,
                                     const dsl::expression& sigma,
                                     const criterion_params& params, double tol) {
    if (sigma.empty())
        throw std::invalid_argument("semilinear_pathwise: empty sigma");
    if (sigma.depends_on_x())
        throw std::invalid_argument("semilinear_pathwise: sigma must depend on t only");
    criterion_report rep;

    // The reduction to unit noise rides on the time change Lambda(t) = int_0^t
    // sigma^2, which must be unbounded: classified on the tail of sigma^2.
    auto s2_of_t = [&sigma](double t) {
        const double v = sigma.evaluate(t, 0.0);
        return v * v;
    };
    auto lam = quad::classify_tail(s2_of_t, 1.0, quad::shell_options_from_tol(tol));
    rep.integrals.push_back({"Lambda tail (sigma^2)", lam});
    if (lam.kind != integral_kind::divergent) {
        rep.id = "semilinear-pathwise";
        rep.result = verdict::inconclusive;
        rep.notes.push_back(lam.kind == integral_kind::convergent
                                ? "Lambda(inf) < inf: bounded time change, criterion requires "
                                  "unbounded noise accumulation"
                                : "Lambda(inf) could not be classified");
        return rep;
    }

    fn2 screen = [&b, &s2_of_t](double t, double z) {
        const double ez = std::exp(z);
        return b.evaluate(t, ez) / (s2_of_t(t) * ez);
    };
    return pathwise_core(
        b, xi, [&s2_of_t](double a) { return s2_of_t(a); }, screen, params, tol, std::move(rep));
}

criterion_report necessity_test(const dsl::expression& b, double xi,
                                const criterion_params& params, double tol) {
    if (b.empty())
        throw std::invalid_argument("necessity_test: empty drift");
    if (!std::isfinite(xi))
        throw std::invalid_argument("necessity_test: xi must be finite");
    if (!(params.c >= 0.0) || !std::isfinite(params.c))
        throw std::invalid_argument("necessity_test: c must be finite and >= 0");
    if (!(tol > 0.0))
        throw std::invalid_argument("necessity_test: tol must be positive");

    criterion_report rep;
    rep.id = "necessity";
    if (!(xi > params.c)) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("requires xi > c");
        return rep;
    }
    const double st = screen_tol(tol);
    const double c_lo = params.c > 0.0 ? params.c * (1.0 + 1e-6) : k_x_lo;
    fn2 f = [&b](double t, double x) { return b.evaluate(t, x); };
    rep.screens.push_back(screen_logx(f, hypothesis_property::positivity_on_region, 0.0, k_t_hi,
                                      k_nt, c_lo, k_x_hi, st));
    rep.screens.push_back(screen_logx(f, hypothesis_property::non_decreasing_in_t, 0.0, k_t_hi,
                                      k_nt, c_lo, k_x_hi, st));
    rep.screens.push_back(screen_logx(f, hypothesis_property::non_decreasing_in_x, 0.0, k_t_hi,
                                      k_nt, c_lo, k_x_hi, st));
    if (!all_passed(rep.screens) || !strictly_passed(rep.screens[0])) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("structural hypotheses on b not verified");
        return rep;
    }

    double theta = std::isnan(params.theta) ? xi : params.theta;
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("necessity_test: theta must be positive");
    if (theta <= params.c) {
        theta = params.c * (1.0 + k_theta_delta);
        rep.notes.push_back("theta raised above c to " + fmt(theta));
    }

    const auto opts = quad::shell_options_from_tol(tol);
    scan_tally t;
    for (double a : scan_of(params)) {
        auto iv = quad::classify_tail([&b, a](double s) { return 1.0 / b.evaluate(a, s); },
                                      theta, opts);
        rep.integrals.push_back({"tail a=" + fmt(a), iv});
        tally(t, iv.kind);
    }
    if (t.convergent > 0) {
        rep.result = verdict::necessary_condition_satisfied;
        rep.notes.push_back("explosion not ruled out; this is not a sufficiency claim");
    } else if (t.other == 0 && t.divergent > 0) {
        rep.result = verdict::necessary_condition_violated;
        rep.notes.push_back("tail integral diverges for every scanned a: finite-time explosion "
                            "is ruled out along the scan");
    } else {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("integral classification inconclusive for at least one scanned a");
    }
    return rep;
}

criterion_report sufficiency_test(const dsl::expression& b, double xi,
                                  const criterion_params& params, double tol) {
    if (b.empty())
        throw std::invalid_argument("sufficiency_test: empty drift");
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw std::invalid_argument("sufficiency_test: xi must be positive and finite");
    if (!(tol > 0.0))
        throw std::invalid_argument("sufficiency_test: tol must be positive");

    criterion_report rep;
    rep.id = "sufficiency";
    const double st = screen_tol(tol);
    const double z_span = std::log(k_x_hi);
    fn2 f = [&b](double t, double x) { return b.evaluate(t, x); };
    fn2 btilde = [&b](double t, double z) {
        const double ez = std::exp(z);
        return b.evaluate(t, ez) / ez;
    };
    std::string cap_note;
    const double z_hi = cap_screen_hi(btilde, 0.0, k_t_hi, 0.0, z_span, cap_note);
    if (!cap_note.empty())
        rep.notes.push_back(cap_note);
    rep.screens.push_back(screen_logx(f, hypothesis_property::positivity_on_region, 0.0, k_t_hi,
                                      k_nt, k_x_lo, k_x_hi, st));
    rep.screens.push_back(check_hypothesis(btilde, hypothesis_property::non_decreasing_in_t,
                                           region{0.0, k_t_hi, 0.0, z_hi},
                                           grid_spec{k_nt, k_nx}, st));
    rep.screens.push_back(check_hypothesis(btilde, hypothesis_property::non_decreasing_in_x,
                                           region{0.0, k_t_hi, 0.0, z_hi},
                                           grid_spec{k_nt, k_nx}, st));
    if (!all_passed(rep.screens) || !strictly_passed(rep.screens[0])) {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("structural hypotheses on b not verified");
        return rep;
    }

    double theta = std::isnan(params.theta) ? std::max(xi, 1.0) : params.theta;
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("sufficiency_test: theta must be positive");

    const auto opts = quad::shell_options_from_tol(tol);
    scan_tally t;
    for (double a : scan_of(params)) {
        auto inv = [&b, a](double s) { return 1.0 / b.evaluate(a, s); };
        auto head = quad::classify_singular_left(inv, 0.0, theta, opts);
        auto tail = quad::classify_tail(inv, theta, opts);
        rep.integrals.push_back({"head a=" + fmt(a) + " on (0,theta]", head});
        rep.integrals.push_back({"tail a=" + fmt(a) + " on [theta,inf)", tail});
        integral_kind combined;
        if (head.kind == integral_kind::convergent && tail.kind == integral_kind::convergent)
            combined = integral_kind::convergent;
        else if (head.kind == integral_kind::divergent || tail.kind == integral_kind::divergent)
            combined = integral_kind::divergent;
        else
            combined = integral_kind::inconclusive;
        tally(t, combined);
    }
    if (t.convergent > 0) {
        rep.result = verdict::sufficient_condition_satisfied;
        rep.notes.push_back("int_0^inf ds/b(a,s) finite for some scanned a: finite-time "
                            "explosion follows");
    } else if (t.other == 0 && t.divergent > 0) {
        rep.result = verdict::sufficient_condition_not_satisfied;
        rep.notes.push_back("the full integral diverges for every scanned a; no conclusion");
    } else {
        rep.result = verdict::inconclusive;
        rep.notes.push_back("integral classification inconclusive for at least one scanned a");
    }
    return rep;
}

std::vector<std::string> criterion_ids() {
    return {"osgood-autonomous", "osgood-nonautonomous", "feller",     "semilinear-feller",
            "semilinear-pathwise", "necessity",           "sufficiency"};
}

criterion_report evaluate(const problem& prob, const std::string& criterion_id,
                          const criterion_params& params) {
    const auto ids = criterion_ids();
    if (std::find(ids.begin(), ids.end(), criterion_id) == ids.end())
        throw std::invalid_argument("unknown criterion id: " + criterion_id);
    try {
        if (criterion_id == "osgood-autonomous")
            return osgood_autonomous(prob.drift, prob.xi, params.tol);
        if (criterion_id == "osgood-nonautonomous")
            return osgood_nonautonomous(prob.drift, prob.xi, params, params.tol);
        if (criterion_id == "feller")
            return feller_test(prob, params.tol);
        if (criterion_id == "semilinear-feller")
            return semilinear_feller(prob.drift, prob.xi, params.tol);
        if (criterion_id == "semilinear-pathwise")
            return semilinear_pathwise(prob.drift, prob.xi, prob.sigma, params, params.tol);
        if (criterion_id == "necessity")
            return necessity_test(prob.drift, prob.xi, params, params.tol);
        return sufficiency_test(prob.drift, prob.xi, params, params.tol);
    } catch (const std::invalid_argument& e) {
        criterion_report rep;
        rep.id = criterion_id;
        rep.result = verdict::inconclusive;
        rep.notes.push_back(std::string("not applicable: ") + e.what());
        return rep;
    }
}

} // namespace blowup::criteria
