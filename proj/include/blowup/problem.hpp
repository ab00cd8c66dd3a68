#pragma once

#include "blowup/expression.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace blowup {

// dX = b(t,X) dt + sigma(t) X dW on the state interval (ell, r), X_0 = xi.
struct problem {
    std::string name;
    double xi = 1.0;
    dsl::expression drift; // b(t,x)
    dsl::expression sigma; // sigma(t)
    double ell = 0.0;
    double r = std::numeric_limits<double>::infinity();
    double zeta = 1.0; // Feller anchor, must lie in (ell, r)
};

struct criterion_params {
    double a = 1.0;                                  // frozen time for the s-integral
    double theta = std::numeric_limits<double>::quiet_NaN(); // NaN -> derived default
    double c = 0.0;                                  // monotonicity-region threshold, >= 0
    std::vector<double> a_scan;                      // empty -> {2^-4, ..., 2^4}
    double tol = 1e-8;
};

inline std::vector<double> default_a_scan() {
    std::vector<double> v;
    for (int k = -4; k <= 4; ++k)
        v.push_back(std::ldexp(1.0, k));
    return v;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string problem_hash(const problem& p);

} // namespace blowup
