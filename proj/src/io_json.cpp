#include "blowup/io.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blowup::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

void reject_unknown_keys(const json& obj, const char* where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            fail("unknown key '" + item.key() + "' in " + where);
    }
}

double require_number(const json& obj, const char* where, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number())
        fail(std::string(where) + "." + key + " must be a number");
    return v.get<double>();
}

dsl::expression parse_coeff(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string())
        fail(std::string(key) + " must be an expression string");
    try {
        return dsl::expression::parse(v.get<std::string>());
    } catch (const std::exception& e) {
        fail(std::string(key) + ": " + e.what());
    }
}

json witness_json(const dsl::hypothesis_report& screen) {
    if (!screen.witness)
        return nullptr;
    return json{{"t", screen.witness->t},
                {"x", screen.witness->x},
                {"value", screen.witness->value}};
}

} // namespace

problem_file parse_problem_file(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        fail("problem file must be a JSON object");
    reject_unknown_keys(doc, "problem file",
                        {"name", "xi", "drift", "sigma", "interval", "params", "sim"});
    for (const char* k : {"name", "xi", "drift", "sigma"})
        if (!doc.contains(k))
            fail(std::string("missing required key '") + k + "'");

    problem_file out;
    if (!doc.at("name").is_string())
        fail("name must be a string");
    out.prob.name = doc.at("name").get<std::string>();
    out.prob.xi = require_number(doc, "problem", "xi");
    out.prob.drift = parse_coeff(doc, "drift");
    out.prob.sigma = parse_coeff(doc, "sigma");

    if (doc.contains("interval")) {
        const auto& iv = doc.at("interval");
        if (!iv.is_object())
            fail("interval must be an object");
        reject_unknown_keys(iv, "'interval'", {"l", "r", "zeta"});
        if (iv.contains("l"))
            out.prob.ell = require_number(iv, "interval", "l");
        if (iv.contains("r")) {
            const auto& r = iv.at("r");
            if (r.is_string()) {
                const auto s = r.get<std::string>();
                if (s != "inf" && s != "+inf")
                    fail("interval.r must be a number or \"inf\"");
                out.prob.r = std::numeric_limits<double>::infinity();
            } else {
                out.prob.r = require_number(iv, "interval", "r");
            }
        }
        if (iv.contains("zeta"))
            out.prob.zeta = require_number(iv, "interval", "zeta");
    }

    if (doc.contains("params")) {
        const auto& pr = doc.at("params");
        if (!pr.is_object())
            fail("params must be an object");
        reject_unknown_keys(pr, "'params'", {"a_scan", "theta", "c"});
        if (pr.contains("a_scan")) {
            const auto& arr = pr.at("a_scan");
            if (!arr.is_array())
                fail("params.a_scan must be an array of numbers");
            for (const auto& v : arr) {
                if (!v.is_number())
                    fail("params.a_scan must be an array of numbers");
                out.params.a_scan.push_back(v.get<double>());
            }
        }
        if (pr.contains("theta"))
            out.params.theta = require_number(pr, "params", "theta");
        if (pr.contains("c"))
            out.params.c = require_number(pr, "params", "c");
    }

    if (doc.contains("sim")) {
        const auto& sm = doc.at("sim");
        if (!sm.is_object())
            fail("sim must be an object");
        reject_unknown_keys(sm, "'sim'", {"dt", "horizon", "x_cap"});
        if (sm.contains("dt"))
            out.sim.dt = require_number(sm, "sim", "dt");
        if (sm.contains("horizon"))
            out.sim.horizon = require_number(sm, "sim", "horizon");
        if (sm.contains("x_cap"))
            out.sim.x_cap = require_number(sm, "sim", "x_cap");
        if (!(out.sim.horizon > 0.0))
            fail("sim.horizon must be > 0");
        if (!(out.sim.x_cap > 0.0))
            fail("sim.x_cap must be > 0");
    }
    return out;
}

problem_file load_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail("cannot open problem file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_problem_file(buf.str());
    } catch (const std::invalid_argument& e) {
        fail(path + ": " + e.what());
    }
}

std::string report_json(const criteria::criterion_report& report) {
    json j;
    j["id"] = report.id;
    j["verdict"] = criteria::to_string(report.result);
    j["explosion_time"] =
        report.explosion_time ? json(*report.explosion_time) : json(nullptr);
    j["screens"] = json::array();
    for (const auto& s : report.screens)
        j["screens"].push_back(json{{"property", dsl::to_string(s.property)},
                                    {"status", dsl::to_string(s.status)},
                                    {"witness", witness_json(s)},
                                    {"note", s.note}});
    j["integrals"] = json::array();
    for (const auto& li : report.integrals)
        j["integrals"].push_back(json{
            {"label", li.label},
            {"kind", quad::to_string(li.result.kind)},
            {"value", std::isfinite(li.result.value) ? json(li.result.value) : json(nullptr)},
            {"error_estimate", li.result.error_estimate},
            {"levels_used", li.result.levels_used},
            {"last_shell_contribution", li.result.last_shell_contribution}});
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

std::string summary_json(const mc::mc_summary& summary) {
    json j;
    j["problem_name"] = summary.problem_name;
    j["problem_hash"] = summary.problem_hash;
    j["solver"] = summary.solver;
    j["seed"] = summary.seed;
    j["n_paths"] = summary.n_paths;
    j["n_exploded"] = summary.n_exploded;
    j["n_errors"] = summary.n_errors;
    j["horizon"] = summary.horizon;
    j["dt"] = summary.dt;
    j["p_explode"] = summary.p_explode;
    j["ci_low"] = summary.ci_low;
    j["ci_high"] = summary.ci_high;
    j["explosion_times"] = summary.explosion_times;
    j["errors"] = summary.errors;
    return j.dump(2) + "\n";
}

} // namespace blowup::io
