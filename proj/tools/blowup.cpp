#include "CLI11.hpp"
#include "json.hpp"

#include "blowup/criteria.hpp"
#include "blowup/io.hpp"
#include "blowup/mc.hpp"
#include "blowup/ode.hpp"
#include "blowup/sde.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace blowup;

double default_tol() {
    const char* env = std::getenv("BLOWUP_TOL");
    if (!env || !*env)
        return 1e-8;
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0))
        throw std::invalid_argument(std::string("BLOWUP_TOL is not a positive number: ") + env);
    return v;
}

std::string verdict_line(const criteria::criterion_report& report) {
    using criteria::verdict;
    char buf[96];
    switch (report.result) {
    case verdict::almost_sure_explosion:
        if (report.explosion_time) {
            std::snprintf(buf, sizeof buf, "explodes; T_e = %.6f", *report.explosion_time);
            return buf;
        }
        return "explodes almost surely";
    case verdict::no_almost_sure_explosion:
        return "no a.s. explosion; positive probability of global solution";
    case verdict::positive_probability_of_global_solution:
        return "positive probability of global solution";
    case verdict::necessary_condition_satisfied:
        return "necessary condition for explosion satisfied (explosion not ruled out)";
    case verdict::necessary_condition_violated:
        return "necessary condition violated; explosion ruled out";
    case verdict::sufficient_condition_satisfied:
        return "sufficient condition satisfied; explodes in finite time";
    case verdict::sufficient_condition_not_satisfied:
        return "sufficient condition not satisfied (no conclusion from it)";
    case verdict::inconclusive:
        return "inconclusive";
    }
    return "?";
}

void print_report_table(const criteria::criterion_report& report, std::ostream& os) {
    os << "== " << report.id << " ==\n";
    os << "  verdict: " << criteria::to_string(report.result) << " — "
       << verdict_line(report) << "\n";
    for (const auto& s : report.screens) {
        os << "  screen " << dsl::to_string(s.property) << ": " << dsl::to_string(s.status);
        if (s.witness) {
            char buf[96];
            std::snprintf(buf, sizeof buf, " (witness t=%.6g x=%.6g value=%.6g)",
                          s.witness->t, s.witness->x, s.witness->value);
            os << buf;
        }
        if (!s.note.empty())
            os << " [" << s.note << "]";
        os << "\n";
    }
    for (const auto& li : report.integrals) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  integral %-28s %-12s value=%-12.9g err=%.3g",
                      li.label.c_str(), quad::to_string(li.result.kind), li.result.value,
                      li.result.error_estimate);
        os << buf << "\n";
    }
    for (const auto& n : report.notes)
        os << "  note: " << n << "\n";
}

criteria::verdict verdict_from_string(const std::string& s) {
    using criteria::verdict;
    for (verdict v :
         {verdict::almost_sure_explosion, verdict::no_almost_sure_explosion,
          verdict::positive_probability_of_global_solution,
          verdict::necessary_condition_satisfied, verdict::necessary_condition_violated,
          verdict::sufficient_condition_satisfied, verdict::sufficient_condition_not_satisfied,
          verdict::inconclusive})
        if (s == criteria::to_string(v))
            return v;
    throw std::invalid_argument("unknown verdict in report: " + s);
}

ode::trajectory_sample run_one_path(const problem& prob, const io::sim_settings& sim,
                                    mc::solver_id solver, std::uint64_t seed,
                                    std::uint64_t path_index) {
    const double dt = sim.dt > 0.0 ? sim.dt : std::ldexp(sim.horizon, -10);
    auto path = sde::make_brownian_path(dt, sim.horizon, seed, path_index);
    ode::step_control ctrl;
    ctrl.x_cap = sim.x_cap;
    switch (solver) {
    case mc::solver_id::transform: return sde::solve_transformed(prob, path, ctrl);
    case mc::solver_id::logdomain: return sde::solve_log_domain(prob, path, ctrl);
    case mc::solver_id::em: return sde::euler_maruyama(prob, path, ctrl.x_cap);
    }
    throw std::logic_error("unreachable solver id");
}

int cmd_check(const std::string& file, const std::string& criterion, double tol,
              bool as_json) {
    auto pf = io::load_problem_file(file);
    auto params = pf.params;
    params.tol = tol;
    std::vector<std::string> ids;
    if (criterion == "all")
        ids = criteria::criterion_ids();
    else
        ids.push_back(criterion);
    std::vector<criteria::criterion_report> reports;
    for (const auto& id : ids)
        reports.push_back(criteria::evaluate(pf.prob, id, params));
    if (as_json) {
        if (reports.size() == 1) {
            std::cout << io::report_json(reports.front());
        } else {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& r : reports)
                arr.push_back(nlohmann::json::parse(io::report_json(r)));
            std::cout << arr.dump(2) << "\n";
        }
        return 0;
    }
    std::cout << "problem: " << pf.prob.name << "\n";
    std::cout << "  b(t,x) = " << pf.prob.drift.render()
              << "   sigma = " << pf.prob.sigma.render() << "   xi = " << pf.prob.xi
              << "\n\n";
    for (const auto& r : reports)
        print_report_table(r, std::cout);
    return 0;
}

int cmd_simulate(const std::string& file, std::uint64_t seed, std::uint64_t path_index,
                 const std::string& solver_name, const std::string& out) {
    auto pf = io::load_problem_file(file);
    const auto solver = mc::parse_solver(solver_name);
    auto traj = run_one_path(pf.prob, pf.sim, solver, seed, path_index);
    if (out.empty()) {
        ode::write_csv(traj, std::cout);
    } else {
        std::ofstream os(out, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open output file: " + out);
        ode::write_csv(traj, os);
    }
    return 0;
}

int cmd_mc(const std::string& file, std::size_t paths, double horizon_flag,
           std::uint64_t seed, const std::string& solver_name, unsigned threads,
           const std::string& out, const std::string& agree_report) {
    auto pf = io::load_problem_file(file);
    const auto solver = mc::parse_solver(solver_name);
    const double horizon = horizon_flag > 0.0 ? horizon_flag : pf.sim.horizon;
    mc::mc_options opts;
    opts.dt = pf.sim.dt;
    opts.ctrl.x_cap = pf.sim.x_cap;
    opts.threads = threads;
    auto summary = mc::run_mc(pf.prob, horizon, paths, seed, solver, opts);
    const std::string text = io::summary_json(summary);
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(out, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open output file: " + out);
        os << text;
    }
    if (!agree_report.empty()) {
        std::ifstream in(agree_report);
        if (!in)
            throw std::runtime_error("cannot open report file: " + agree_report);
        nlohmann::json j = nlohmann::json::parse(in);
        criteria::criterion_report rep;
        rep.id = j.at("id").get<std::string>();
        rep.result = verdict_from_string(j.at("verdict").get<std::string>());
        // shorter-horizon companion ensemble on the same dt grid
        mc::mc_options half_opts = opts;
        half_opts.dt = summary.dt;
        auto half = mc::run_mc(pf.prob, horizon / 2.0, paths, seed, solver, half_opts);
        auto res = mc::agreement_check(pf.prob, rep, half, summary);
        std::cout << "agreement with " << rep.id << ": " << (res.pass ? "PASS" : "FAIL")
                  << " — " << res.explanation << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-time blow-up analysis for dX = b(t,X) dt + sigma(t) X dW"};
    app.require_subcommand(1);

    std::string file, criterion = "all", solver = "transform", out, agree_report;
    double tol = 0.0, horizon = 0.0;
    bool as_json = false;
    std::uint64_t seed = 42, path_index = 0;
    std::size_t paths = 1000;
    unsigned threads = 1;

    auto* check = app.add_subcommand("check", "run explosion criteria on a problem file");
    check->add_option("file", file, "problem JSON file")->required();
    check->add_option("--criterion", criterion, "criterion id or 'all'");
    check->add_option("--tol", tol, "tolerance (default 1e-8, or BLOWUP_TOL)");
    check->add_flag("--json", as_json, "structured report instead of a table");

    auto* sim = app.add_subcommand("simulate", "simulate one path and write CSV");
    sim->add_option("file", file, "problem JSON file")->required();
    sim->add_option("--seed", seed, "master seed");
    sim->add_option("--path-index", path_index, "path index within the ensemble");
    sim->add_option("--solver", solver, "transform | logdomain | em");
    sim->add_option("--out", out, "output CSV path (default: stdout)");

    auto* ens = app.add_subcommand("mc", "Monte Carlo ensemble summary");
    ens->add_option("file", file, "problem JSON file")->required();
    ens->add_option("--paths", paths, "number of paths");
    ens->add_option("--horizon", horizon, "censor horizon (default: sim.horizon)");
    ens->add_option("--seed", seed, "master seed");
    ens->add_option("--solver", solver, "transform | logdomain | em");
    ens->add_option("--threads", threads, "worker threads (result is identical)");
    ens->add_option("--out", out, "summary JSON path (default: stdout)");
    ens->add_option("--agree", agree_report,
                    "check agreement against a prior 'check --json' report file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check)
            return cmd_check(file, criterion, tol > 0.0 ? tol : default_tol(), as_json);
        if (*sim)
            return cmd_simulate(file, seed, path_index, solver, out);
        if (*ens)
            return cmd_mc(file, paths, horizon, seed, solver, threads, out, agree_report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
