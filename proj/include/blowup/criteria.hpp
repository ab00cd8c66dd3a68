#pragma once

#include "blowup/expression.hpp"
#include "blowup/hypothesis.hpp"
#include "blowup/problem.hpp"
#include "blowup/quadrature.hpp"

#include <optional>
#include <string>
#include <vector>

namespace blowup::criteria {

// Explosion criteria for dX = b(t,X) dt + sigma(t) X dW. Each operation
// screens the structural hypotheses it needs on a sample grid, classifies the
// integrals that drive the criterion, and returns a structured report. Binary
// explosion verdicts (AlmostSureExplosion / NoAlmostSureExplosion) are emitted
// only by if-and-only-if criteria with all screens passed; one-sided results
// use the Necessary/Sufficient condition vocabulary so nothing over-claims.

enum class verdict {
    almost_sure_explosion,
    no_almost_sure_explosion,
    positive_probability_of_global_solution,
    necessary_condition_satisfied,
    necessary_condition_violated,
    sufficient_condition_satisfied,
    sufficient_condition_not_satisfied,
    inconclusive,
};

const char* to_string(verdict v);

struct labeled_integral {
    std::string label;
    quad::integral_verdict result;
};

struct criterion_report {
    std::string id;
    verdict result = verdict::inconclusive;
    std::vector<dsl::hypothesis_report> screens;
    std::vector<labeled_integral> integrals;
    std::optional<double> explosion_time;
    std::vector<std::string> notes;
};

// Osgood's criterion for the autonomous ODE y' = b(y), y(0) = xi >= 0:
// explosion iff B_xi(inf) = int_xi^inf ds / b(s) < inf, and then the
// explosion time equals the integral. Deterministic, so the binary verdicts
// really mean certain explosion / certain global existence.
criterion_report osgood_autonomous(const dsl::expression& b, double xi, double tol = 1e-8);

// Non-autonomous extension: explosion iff int_xi^inf ds / b(a,s) < inf for
// some frozen time a > 0, scanned over params.a_scan, provided b is
// non-negative and positive and non-decreasing by components on
// [0,inf) x (c,inf) with xi > c.
criterion_report osgood_nonautonomous(const dsl::expression& b, double xi,
                                      const criterion_params& params, double tol = 1e-8);

// Feller's test for the autonomous diffusion on (ell, r) anchored at zeta.
// The problem's sigma is taken as the full diffusion coefficient when it
// depends on x; a constant sigma means the semilinear form sigma * x. The
// verdict is a.s. explosion iff one of
//   (i) v(r-) and v(l+) finite, (ii) v(r-) finite and p(l+) = -inf,
//   (iii) v(l+) finite and p(r-) = +inf
// holds; all three provably failing yields NoAlmostSureExplosion.
criterion_report feller_test(const problem& prob, double tol = 1e-8);

// Semilinear iff-criterion for autonomous b with b_bar(x) = b(x)/x
// non-decreasing and > 1/2 on (0, inf): a.s. explosion iff
// int_xi^inf ds / (2 b(s) - s) < inf. The report also carries the analytic
// bracket for v(inf) and a direct iterated-quadrature value of v(inf);
// disagreement between the two flags Inconclusive.
criterion_report semilinear_feller(const dsl::expression& b, double xi, double tol = 1e-8);

// Pathwise iff-criterion for b(t,x) with b_tilde(t,x) = b(t,e^x)/e^x
// non-decreasing in t, non-decreasing in x on (c, inf), >= 1/2 on the sampled
// window and > 1/2 beyond c: a.s. explosion iff for some a in the scan
// int_theta^inf ds / (2 b(a,s) - sigma2_at_a * s) < inf for all theta > e^c
// (verified at theta = e^c (1+1e-3), or above the last denominator zero).
// sigma2_at_a = 1 is the unit-noise case; other values implement the
// constant-sigma variant of the criterion.
criterion_report semilinear_pathwise(const dsl::expression& b, double xi, double sigma2_at_a,
                                     const criterion_params& params, double tol = 1e-8);

// Convenience overload for sigma given as an expression in t: evaluates
// sigma^2(a) per scan point, screens b(t,e^x)/(sigma^2(t) e^x) instead of
// b_tilde, and additionally requires the time change Lambda(t) = int sigma^2
// to be unbounded (classified on the tail of sigma^2).
criterion_report semilinear_pathwise(const dsl::expression& b, double xi,
                                     const dsl::expression& sigma,
                                     const criterion_params& params, double tol = 1e-8);

// Necessary condition: explosion implies int_theta^inf ds / b(a,s) < inf.
// Divergent for every scanned a rules explosion out (contrapositive);
// convergence for some a merely fails to rule it out.
criterion_report necessity_test(const dsl::expression& b, double xi,
                                const criterion_params& params, double tol = 1e-8);

// Sufficient condition: int_0^inf ds / b(a,s) < inf for some a forces
// finite-time explosion; the lower limit 0 makes this strictly stronger than
// the necessary condition's tail integral.
criterion_report sufficiency_test(const dsl::expression& b, double xi,
                                  const criterion_params& params, double tol = 1e-8);

// Known criterion ids: osgood-autonomous, osgood-nonautonomous, feller,
// semilinear-feller, semilinear-pathwise, necessity, sufficiency.
std::vector<std::string> criterion_ids();

// Dispatch by id. Structural inapplicability (e.g. a time-dependent drift
// passed to an autonomous criterion) is converted into an Inconclusive report
// with an explanatory note, so evaluating every id is always total.
criterion_report evaluate(const problem& prob, const std::string& criterion_id,
                          const criterion_params& params);

} // namespace blowup::criteria
