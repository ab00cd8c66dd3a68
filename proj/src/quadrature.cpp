#include "blowup/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blowup::quad {

namespace {

// Gauss-Kronrod 7-15 nodes and weights (QUADPACK dqk15). xgk holds the
// positive abscissae; odd indices plus the center are the embedded G7 nodes.
constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct panel {
    double a, b;
    double value;
    double error;
};

panel gk15(const fn1& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    panel p{a, b, 0.0, 0.0};
    double fc = f(c);
    double resk = wgk[7] * fc;
    double resg = wg[3] * fc;
    bool finite = std::isfinite(fc);
    for (int j = 0; j < 7 && finite; ++j) {
        const double dx = h * xgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        finite = std::isfinite(f1) && std::isfinite(f2);
        resk += wgk[j] * (f1 + f2);
        if (j % 2 == 1)
            resg += wg[j / 2] * (f1 + f2);
    }
    if (!finite || !std::isfinite(resk)) {
        p.value = std::numeric_limits<double>::quiet_NaN();
        p.error = std::numeric_limits<double>::infinity();
        return p;
    }
    p.value = resk * h;
    const double d = std::abs((resk - resg) * h);
    p.error = std::min(d, std::pow(200.0 * d, 1.5));
    return p;
}

bool worse(const panel& a, const panel& b) {
    return a.error < b.error; // max-heap on error
}

} // namespace

integrate_result integrate(const fn1& f, double a, double b, double abs_tol, double rel_tol,
                           int max_panels) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integrate: bounds must be finite");
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    if (a == b)
        return {0.0, 0.0, 0, true};

    std::vector<panel> heap;
    heap.push_back(gk15(f, a, b));
    double total_value = heap[0].value;
    double total_error = heap[0].error;

    while (true) {
        if (!std::isfinite(total_value) || !std::isfinite(total_error))
            return {std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::infinity(), static_cast<int>(heap.size()), false};
        const double budget = std::max(abs_tol, rel_tol * std::abs(total_value));
        if (total_error <= budget)
            break;
        if (static_cast<int>(heap.size()) >= max_panels)
            break;
        std::pop_heap(heap.begin(), heap.end(), worse);
        panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // cannot split further in floating point
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), worse);
            break;
        }
        panel left = gk15(f, worst.a, mid);
        panel right = gk15(f, mid, worst.b);
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), worse);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), worse);
    }

    // Deterministic final tally: sum panels in abscissa order with compensation.
    std::sort(heap.begin(), heap.end(), [](const panel& x, const panel& y) { return x.a < y.a; });
    compensated_sum vs, es;
    for (const panel& p : heap) {
        vs.add(p.value);
        es.add(p.error);
    }
    integrate_result res;
    res.value = sign * vs.value();
    res.error_estimate = es.value();
    res.panels = static_cast<int>(heap.size());
    res.converged = std::isfinite(res.value) && std::isfinite(res.error_estimate) &&
                    res.error_estimate <= std::max(abs_tol, rel_tol * std::abs(res.value));
    return res;
}

const char* to_string(integral_kind k) {
    switch (k) {
    case integral_kind::convergent: return "Convergent";
    case integral_kind::divergent: return "Divergent";
    case integral_kind::inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

// Shared shell-sum classifier. shell(k) returns the adaptive integral of f
// over the k-th shell; shells must tile the region in order so that partial
// sums approach the improper integral monotonically in coverage.
//
// Decision order per level (convergence is always probed first; see the
// divergence suppression below for why):
//   1. three consecutive effectively-zero shells      -> convergent
//   2. geometric extrapolation of the shell sums with a Cauchy test on the
//      extrapolated totals                             -> convergent
//   3. five consecutive ratios >= 1.25 (quick growth)  -> divergent
//   4. ten consecutive ratios >= 0.9, unless the recent window is tightly
//      geometric with mean ratio <= 0.985 (a slowly converging geometric
//      series that rule 2 is still resolving)          -> divergent
//   5. shells of non-uniform sign                      -> inconclusive
integral_verdict classify_shells(const std::function<integrate_result(int)>& shell,
                                 const shell_options& opt) {
    const double tiny = std::max(opt.abs_tol / 64.0, std::numeric_limits<double>::min());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    compensated_sum partial;
    compensated_sum err_sum;
    std::vector<double> shells;
    std::vector<double> ratios; // ratios[k-1] = S_k / S_{k-1}, NaN when undefined
    std::vector<double> totals; // extrapolated totals, NaN when no extrapolation
    bool pos_seen = false, neg_seen = false;

    integral_verdict v;
    for (int k = 0; k < opt.max_levels; ++k) {
        integrate_result res;
        try {
            res = shell(k);
        } catch (const std::exception&) {
            v.kind = integral_kind::inconclusive;
            v.value = partial.value();
            v.error_estimate = err_sum.value();
            v.levels_used = k;
            return v;
        }
        v.levels_used = k + 1;
        if (!std::isfinite(res.value)) {
            v.kind = integral_kind::inconclusive;
            v.value = partial.value();
            v.error_estimate = std::numeric_limits<double>::infinity();
            return v;
        }
        const double S = res.value;
        partial.add(S);
        err_sum.add(res.error_estimate);
        shells.push_back(S);
        v.last_shell_contribution = S;
        v.value = partial.value();
        v.error_estimate = err_sum.value();

        if (S > tiny)
            pos_seen = true;
        if (S < -tiny)
            neg_seen = true;
        if (pos_seen && neg_seen) {
            v.kind = integral_kind::inconclusive;
            return v;
        }

        if (k >= 1)
            ratios.push_back(std::abs(shells[k - 1]) > tiny ? shells[k] / shells[k - 1] : nan);

        // rule 1: integrand has effectively died out
        if (k >= 2 && std::abs(shells[k]) <= tiny && std::abs(shells[k - 1]) <= tiny &&
            std::abs(shells[k - 2]) <= tiny) {
            v.kind = integral_kind::convergent;
            v.error_estimate = err_sum.value() + 2.0 * tiny;
            return v;
        }

        // rule 2: geometric extrapolation + Cauchy test on extrapolated totals
        double extrapolated = nan;
        if (ratios.size() >= 4) {
            double rmin = std::numeric_limits<double>::infinity();
            double rmax = -std::numeric_limits<double>::infinity();
            double rsum = 0.0;
            bool window_ok = true;
            for (std::size_t i = ratios.size() - 4; i < ratios.size(); ++i) {
                const double r = ratios[i];
                if (!std::isfinite(r)) {
                    window_ok = false;
                    break;
                }
                rmin = std::min(rmin, r);
                rmax = std::max(rmax, r);
                rsum += r;
            }
            const double rbar = rsum / 4.0;
            if (window_ok && rbar >= 0.0 && rbar <= 0.985)
                extrapolated = partial.value() + S * rbar / (1.0 - rbar);
        }
        totals.push_back(extrapolated);
        if (totals.size() >= 3) {
            const double t0 = totals[totals.size() - 3];
            const double t1 = totals[totals.size() - 2];
            const double t2 = totals[totals.size() - 1];
            if (std::isfinite(t0) && std::isfinite(t1) && std::isfinite(t2)) {
                const double budget = std::max(opt.abs_tol, opt.rel_tol * std::abs(t2));
                const double d1 = std::abs(t1 - t0);
                const double d2 = std::abs(t2 - t1);
                if (d1 <= 0.25 * budget && d2 <= 0.25 * budget) {
                    v.kind = integral_kind::convergent;
                    v.value = t2;
                    v.error_estimate = err_sum.value() + 2.0 * (d1 + d2);
                    return v;
                }
            }
        }

        // rule 3: quick growth
        if (ratios.size() >= 5) {
            bool growing = true;
            for (std::size_t i = ratios.size() - 5; i < ratios.size(); ++i)
                if (!(std::isfinite(ratios[i]) && ratios[i] >= 1.25)) {
                    growing = false;
                    break;
                }
            if (growing) {
                v.kind = integral_kind::divergent;
                return v;
            }
        }

        // rule 4: sustained non-decay
        if (ratios.size() >= 10) {
            bool sustained = true;
            for (std::size_t i = ratios.size() - 10; i < ratios.size(); ++i)
                if (!(std::isfinite(ratios[i]) && ratios[i] >= 0.9)) {
                    sustained = false;
                    break;
                }
            if (sustained) {
                // suppress while the recent window is tightly geometric with
                // ratio bounded away from 1 — rule 2 will resolve it
                double rmin = std::numeric_limits<double>::infinity();
                double rmax = -std::numeric_limits<double>::infinity();
                bool defined = true;
                for (std::size_t i = ratios.size() - 6; i < ratios.size(); ++i) {
                    if (!std::isfinite(ratios[i])) {
                        defined = false;
                        break;
                    }
                    rmin = std::min(rmin, ratios[i]);
                    rmax = std::max(rmax, ratios[i]);
                }
                const bool tight_geometric =
                    defined && (rmax - rmin) <= 0.002 && 0.5 * (rmax + rmin) <= 0.985;
                if (!tight_geometric) {
                    v.kind = integral_kind::divergent;
                    return v;
                }
            }
        }
    }

    v.kind = integral_kind::inconclusive;
    return v;
}

} // namespace

integral_verdict classify_tail(const fn1& f, double theta, const shell_options& opt) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("classify_tail: theta must be positive and finite");
    auto shell = [&](int k) {
        const double lo = theta * std::ldexp(1.0, k);
        const double hi = theta * std::ldexp(1.0, k + 1);
        return integrate(f, lo, hi, opt.abs_tol / 64.0, opt.rel_tol);
    };
    return classify_shells(shell, opt);
}

integral_verdict classify_singular_left(const fn1& f, double ell, double theta,
                                        const shell_options& opt) {
    if (!std::isfinite(ell) || !std::isfinite(theta) || !(ell < theta))
        throw std::invalid_argument("classify_singular_left: need finite ell < theta");
    const double span = theta - ell;
    auto shell = [&](int k) {
        const double lo = ell + span * std::ldexp(1.0, -(k + 1));
        const double hi = ell + span * std::ldexp(1.0, -k);
        if (!(lo < hi) || lo <= ell) {
            // floating-point resolution exhausted before a decision
            integrate_result r;
            r.value = std::numeric_limits<double>::quiet_NaN();
            r.error_estimate = std::numeric_limits<double>::infinity();
            return r;
        }
        return integrate(f, lo, hi, opt.abs_tol / 64.0, opt.rel_tol);
    };
    return classify_shells(shell, opt);
}

cumulative_table cumulative(const fn1& f, double a, const std::vector<double>& points,
                            double abs_tol, double rel_tol) {
    if (!std::isfinite(a))
        throw std::invalid_argument("cumulative: anchor must be finite");
    if (points.empty())
        throw std::invalid_argument("cumulative: need at least one abscissa");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i]))
            throw std::invalid_argument("cumulative: abscissae must be finite");
        if (i > 0 && !(points[i] > points[i - 1]))
            throw std::invalid_argument("cumulative: abscissae must be strictly increasing");
    }
    cumulative_table tbl;
    tbl.anchor = a;
    tbl.s = points;
    tbl.F.resize(points.size());
    tbl.err.resize(points.size());
    compensated_sum cs;
    double err_sum = 0.0;
    auto first = integrate(f, a, points[0], abs_tol, rel_tol);
    cs.add(first.value);
    err_sum += first.error_estimate;
    tbl.F[0] = cs.value();
    tbl.err[0] = err_sum;
    for (std::size_t i = 1; i < points.size(); ++i) {
        auto seg = integrate(f, points[i - 1], points[i], abs_tol, rel_tol);
        cs.add(seg.value);
        err_sum += seg.error_estimate;
        tbl.F[i] = cs.value();
        tbl.err[i] = err_sum;
    }
    return tbl;
}

antiderivative::antiderivative(fn1 f, double anchor, double abs_tol, double rel_tol)
    : f_(std::move(f)), anchor_(anchor), abs_tol_(abs_tol), rel_tol_(rel_tol) {
    if (!std::isfinite(anchor))
        throw std::invalid_argument("antiderivative: anchor must be finite");
    cache_.emplace(anchor, 0.0);
}

double antiderivative::operator()(double s) const {
    auto it = cache_.find(s);
    if (it != cache_.end())
        return it->second;
    auto hi = cache_.lower_bound(s);
    double s0, f0;
    if (hi == cache_.end()) {
        auto lo = std::prev(hi);
        s0 = lo->first;
        f0 = lo->second;
    } else if (hi == cache_.begin()) {
        s0 = hi->first;
        f0 = hi->second;
    } else {
        auto lo = std::prev(hi);
        if (s - lo->first <= hi->first - s) {
            s0 = lo->first;
            f0 = lo->second;
        } else {
            s0 = hi->first;
            f0 = hi->second;
        }
    }
    const double F = f0 + integrate(f_, s0, s, abs_tol_, rel_tol_).value;
    cache_.emplace(s, F);
    return F;
}

} // namespace blowup::quad
