#pragma once

#include "blowup/common.hpp"

#include <map>
#include <vector>

namespace blowup::quad {

// Adaptive Gauss-Kronrod (G7-K15) quadrature plus shell-based convergence
// classification of improper integrals over [theta, inf) and of integrals
// with a singular left endpoint.

struct integrate_result {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
    bool converged = false; // error_estimate met the requested budget
};

// Finite-interval adaptive quadrature; worst-panel-first refinement with an
// embedded G7 vs K15 error estimate per panel. a > b integrates with sign
// flipped. All Kronrod nodes are interior, so endpoint singularities are
// never sampled.
integrate_result integrate(const fn1& f, double a, double b, double abs_tol = 1e-10,
                           double rel_tol = 1e-8, int max_panels = 4000);

enum class integral_kind { convergent, divergent, inconclusive };

struct integral_verdict {
    integral_kind kind = integral_kind::inconclusive;
    double value = 0.0;            // total integral when convergent, else partial sum
    double error_estimate = 0.0;   // quadrature error + extrapolation spread
    int levels_used = 0;           // number of shells integrated
    double last_shell_contribution = 0.0;
};

struct shell_options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_levels = 60;
};

inline shell_options shell_options_from_tol(double tol) {
    shell_options o;
    o.abs_tol = tol;
    o.rel_tol = tol;
    return o;
}

// Classify int_theta^inf f(s) ds via geometric shells [theta*2^k, theta*2^(k+1)].
// Convergence is decided by geometric extrapolation of the shell sums (the
// reported value includes the extrapolated remainder); divergence by a run of
// shell ratios >= 0.9 over 10 shells that is not tightly geometric with ratio
// <= 0.98, or by a quick-growth run of ratios >= 1.25. Shells of non-uniform
// sign yield inconclusive. Requires theta > 0.
integral_verdict classify_tail(const fn1& f, double theta, const shell_options& opt = {});

// Classify int_ell^theta f(s) ds where f may be singular at ell, via shells
// [ell + (theta-ell)*2^(-k-1), ell + (theta-ell)*2^(-k)] approaching ell.
// Same decision machinery as classify_tail. Requires ell < theta, both finite.
integral_verdict classify_singular_left(const fn1& f, double ell, double theta,
                                        const shell_options& opt = {});

const char* to_string(integral_kind k);

// Signed cumulative integral F(p_i) = int_a^{p_i} f at strictly increasing
// abscissae (which may lie below a).
struct cumulative_table {
    double anchor = 0.0;
    std::vector<double> s;   // strictly increasing abscissae
    std::vector<double> F;   // F[i] = int_anchor^{s[i]} f
    std::vector<double> err; // err[i] = accumulated error estimate for F[i]
};

cumulative_table cumulative(const fn1& f, double a, const std::vector<double>& points,
                            double abs_tol = 1e-10, double rel_tol = 1e-8);

// Memoizing antiderivative F(x) = int_anchor^x f. Each query integrates from
// the nearest previously computed abscissa and caches the result, so nested
// integrals (scale function / speed measure) stay affordable. Not thread-safe.
class antiderivative {
public:
    antiderivative(fn1 f, double anchor, double abs_tol = 1e-12, double rel_tol = 1e-10);
    double operator()(double s) const;
    std::size_t cache_size() const { return cache_.size(); }

private:
    fn1 f_;
    double anchor_;
    double abs_tol_, rel_tol_;
    mutable std::map<double, double> cache_;
};

} // namespace blowup::quad
