#pragma once

#include "blowup/criteria.hpp"
#include "blowup/mc.hpp"
#include "blowup/problem.hpp"

#include <string>

namespace blowup::io {

// JSON serialization boundary: strict problem-file parsing (unknown keys are
// rejected at every level) and deterministic report/summary output whose
// shapes are published as JSON Schema files under schemas/.

struct sim_settings {
    double dt = 0.0; // <= 0: solver default 2^-10 * horizon
    double horizon = 10.0;
    double x_cap = 1e12;
};

struct problem_file {
    problem prob;
    criterion_params params;
    sim_settings sim;
};

// Parses the problem-file document. Required keys: name, xi, drift, sigma.
// Optional: interval {l, r, zeta} (r may be the string "inf"),
// params {a_scan, theta, c}, sim {dt, horizon, x_cap}.
// Throws std::invalid_argument naming the offending key or field.
problem_file parse_problem_file(const std::string& text);

// Reads the file and parses it; errors are prefixed with the path.
problem_file load_problem_file(const std::string& path);

// Deterministic JSON (keys sorted, two-space indent, trailing newline).
std::string report_json(const criteria::criterion_report& report);
std::string summary_json(const mc::mc_summary& summary);

} // namespace blowup::io
