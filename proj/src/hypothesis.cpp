#include "blowup/hypothesis.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace blowup::dsl {

const char* to_string(hypothesis_property p) {
    switch (p) {
    case hypothesis_property::non_negativity: return "non-negativity";
    case hypothesis_property::positivity_on_region: return "positivity-on-region";
    case hypothesis_property::non_decreasing_in_t: return "non-decreasing-in-t";
    case hypothesis_property::non_decreasing_in_x: return "non-decreasing-in-x";
    case hypothesis_property::lower_bound_half: return "lower-bound-half";
    }
    return "?";
}

const char* to_string(hypothesis_status s) {
    switch (s) {
    case hypothesis_status::passed: return "passed";
    case hypothesis_status::failed_with_witness: return "failed-with-witness";
    case hypothesis_status::unverifiable: return "unverifiable";
    }
    return "?";
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n <= 1) {
        out.push_back(0.5 * (lo + hi));
        return out;
    }
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
}

std::string fmt_point(double t, double x, double v) {
    std::ostringstream os;
    os << "(t=" << t << ", x=" << x << ") -> " << v;
    return os.str();
}

} // namespace

hypothesis_report check_hypothesis(const fn2& f, hypothesis_property prop, const region& reg,
                                   const grid_spec& grid, double tol) {
    if (!(std::isfinite(reg.t_lo) && std::isfinite(reg.t_hi) && std::isfinite(reg.x_lo) &&
          std::isfinite(reg.x_hi)))
        throw std::invalid_argument("check_hypothesis: region bounds must be finite");
    if (reg.t_hi < reg.t_lo || reg.x_hi < reg.x_lo)
        throw std::invalid_argument("check_hypothesis: region bounds out of order");
    if (prop == hypothesis_property::non_decreasing_in_t && grid.nt < 2)
        throw std::invalid_argument("check_hypothesis: screened t-axis needs >= 2 grid points");
    if (prop == hypothesis_property::non_decreasing_in_x && grid.nx < 2)
        throw std::invalid_argument("check_hypothesis: screened x-axis needs >= 2 grid points");
    if (grid.nt < 1 || grid.nx < 1)
        throw std::invalid_argument("check_hypothesis: grid needs >= 1 point per axis");
    if (!(tol >= 0.0))
        throw std::invalid_argument("check_hypothesis: tol must be >= 0");

    hypothesis_report rep;
    rep.property = prop;
    rep.sampled = reg;
    rep.grid = grid;

    const std::vector<double> ts = linspace(reg.t_lo, reg.t_hi, grid.nt);
    const std::vector<double> xs = linspace(reg.x_lo, reg.x_hi, grid.nx);

    std::vector<double> vals(ts.size() * xs.size());
    for (std::size_t it = 0; it < ts.size(); ++it) {
        for (std::size_t ix = 0; ix < xs.size(); ++ix) {
            double v;
            try {
                v = f(ts[it], xs[ix]);
            } catch (const eval_error& e) {
                rep.status = hypothesis_status::unverifiable;
                rep.witness = witness_point{ts[it], xs[ix], std::numeric_limits<double>::quiet_NaN()};
                rep.note = std::string("evaluation failed: ") + e.what();
                return rep;
            }
            if (!std::isfinite(v)) {
                rep.status = hypothesis_status::unverifiable;
                rep.witness = witness_point{ts[it], xs[ix], v};
                rep.note = "non-finite sample " + fmt_point(ts[it], xs[ix], v);
                return rep;
            }
            vals[it * xs.size() + ix] = v;
        }
    }

    auto at = [&](std::size_t it, std::size_t ix) { return vals[it * xs.size() + ix]; };

    auto fail = [&](std::size_t it, std::size_t ix, const std::string& why) {
        rep.status = hypothesis_status::failed_with_witness;
        rep.witness = witness_point{ts[it], xs[ix], at(it, ix)};
        rep.note = why;
        return rep;
    };

    switch (prop) {
    case hypothesis_property::non_negativity:
    case hypothesis_property::positivity_on_region: {
        double min_v = std::numeric_limits<double>::infinity();
        std::size_t min_it = 0, min_ix = 0;
        for (std::size_t it = 0; it < ts.size(); ++it)
            for (std::size_t ix = 0; ix < xs.size(); ++ix) {
                double v = at(it, ix);
                if (v < min_v) {
                    min_v = v;
                    min_it = it;
                    min_ix = ix;
                }
                if (v < -tol)
                    return fail(it, ix, "value below zero beyond tol: " + fmt_point(ts[it], xs[ix], v));
            }
        rep.status = hypothesis_status::passed;
        if (prop == hypothesis_property::positivity_on_region && min_v <= 0.0) {
            rep.note = "minimum grid value is non-positive (within tol); strict positivity not certified";
            rep.witness = witness_point{ts[min_it], xs[min_ix], min_v};
        }
        return rep;
    }
    case hypothesis_property::lower_bound_half: {
        for (std::size_t it = 0; it < ts.size(); ++it)
            for (std::size_t ix = 0; ix < xs.size(); ++ix) {
                double v = at(it, ix);
                if (v < 0.5 - tol)
                    return fail(it, ix, "value below 1/2 beyond tol: " + fmt_point(ts[it], xs[ix], v));
            }
        rep.status = hypothesis_status::passed;
        return rep;
    }
    case hypothesis_property::non_decreasing_in_t: {
        for (std::size_t ix = 0; ix < xs.size(); ++ix)
            for (std::size_t it = 0; it + 1 < ts.size(); ++it) {
                double d = at(it + 1, ix) - at(it, ix);
                if (d < -tol) {
                    std::ostringstream os;
                    os << "decrease along t beyond tol: f(" << ts[it] << ", " << xs[ix]
                       << ") = " << at(it, ix) << " -> f(" << ts[it + 1] << ", " << xs[ix]
                       << ") = " << at(it + 1, ix);
                    return fail(it + 1, ix, os.str());
                }
            }
        rep.status = hypothesis_status::passed;
        return rep;
    }
    case hypothesis_property::non_decreasing_in_x: {
        for (std::size_t it = 0; it < ts.size(); ++it)
            for (std::size_t ix = 0; ix + 1 < xs.size(); ++ix) {
                double d = at(it, ix + 1) - at(it, ix);
                if (d < -tol) {
                    std::ostringstream os;
                    os << "decrease along x beyond tol: f(" << ts[it] << ", " << xs[ix]
                       << ") = " << at(it, ix) << " -> f(" << ts[it] << ", " << xs[ix + 1]
                       << ") = " << at(it, ix + 1);
                    return fail(it, ix + 1, os.str());
                }
            }
        rep.status = hypothesis_status::passed;
        return rep;
    }
    }
    throw std::logic_error("unreachable hypothesis property");
}

hypothesis_report check_hypothesis(const expression& f, hypothesis_property prop,
                                   const region& reg, const grid_spec& grid, double tol) {
    fn2 wrapped = [f](double t, double x) { return f.evaluate(t, x); };
    return check_hypothesis(wrapped, prop, reg, grid, tol);
}

} // namespace blowup::dsl
