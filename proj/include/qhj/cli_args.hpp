#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qhj/scenario.hpp"

namespace qhj {

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg;
    if (j.contains("scenario")) cfg.scenario = j.at("scenario").get<std::string>();
    if (j.contains("potential")) cfg.potential = j.at("potential").get<std::string>();
    if (j.contains("hbar") || j.contains("mass"))
        cfg.constants = PhysicalConstants(j.value("hbar", 1.0), j.value("mass", 1.0));
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        cfg.grid_spec = {{g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()}};
    }
    if (j.contains("level")) cfg.level = j.at("level").get<int>();
    if (j.contains("energy")) cfg.energy = j.at("energy").get<double>();
    if (j.contains("microstates"))
        for (const auto& t : j.at("microstates")) {
            const double a = t.at(0).get<double>(), b = t.at(1).get<double>(),
                         c = t.at(2).get<double>();
            if (!admissible(a, b, c))
                throw UsageError("config microstate violates admissibility: ab - c^2/4 <= 0");
            cfg.microstates.emplace_back(a, b, c);
        }
    if (j.contains("random_ms")) cfg.random_count = j.at("random_ms").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("delta_e")) cfg.delta_e = j.at("delta_e").get<double>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("tolerances"))
        for (const auto& [k, v] : j.at("tolerances").items()) cfg.tolerances[k] = v.get<double>();
    if (j.contains("psi0")) {
        const auto& p = j.at("psi0");
        cfg.psi0 = {p.at(0).get<double>(), p.at(1).get<double>()};
    }
    if (j.contains("dpsi0")) {
        const auto& p = j.at("dpsi0");
        cfg.dpsi0 = {p.at(0).get<double>(), p.at(1).get<double>()};
    }
    return cfg;
}

// Parse flags into a ScenarioConfig; --config supplies defaults, explicit
// flags override.  Throws UsageError naming the violated invariant.
inline ScenarioConfig parse_args(const std::vector<std::string>& args) {
    CLI::App app{kToolVersion};
    std::string scenario, potential, grid, out_dir, config_file, psi0, dpsi0;
    int level = 0, random_ms = 0;
    double energy = 0.0, delta_e = 0.0, hbar = 1.0, mass = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::string> microstates, tols;

    app.add_option("--scenario", scenario,
                   "bound-microstates | initial-value-unique | step-barrier-node");
    app.add_option("--potential", potential, "e.g. harmonic:1, infinite-well:3.14, step-barrier:2");
    app.add_option("--level", level, "bound-state level n");
    app.add_option("--energy", energy, "energy E");
    app.add_option("--grid", grid, "min:max:n");
    app.add_option("--microstate", microstates, "a,b,c (repeatable)");
    app.add_option("--random-ms", random_ms, "number of seeded random microstates");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--delta-e", delta_e, "energy step for dW/dE");
    app.add_option("--out", out_dir, "output directory (QHJ_OUT_DIR fallback)");
    app.add_option("--tol", tols, "NAME=VALUE (repeatable)");
    app.add_option("--config", config_file, "JSON config file; flags override");
    app.add_option("--psi0", psi0, "initial psi as re,im");
    app.add_option("--dpsi0", dpsi0, "initial psi' as re,im");
    app.add_option("--hbar", hbar, "Planck constant / 2 pi");
    app.add_option("--mass", mass, "particle mass");

    // CLI11 wants argv reversed and will consume it
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string("argument error: ") + e.what());
    }

    ScenarioConfig cfg;
    if (!config_file.empty()) {
        std::ifstream f(config_file);
        if (!f) throw UsageError("cannot open config file '" + config_file + "'");
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::exception& e) {
            throw UsageError(std::string("config parse error: ") + e.what());
        }
        cfg = config_from_json(j);
    }

    if (app.count("--scenario")) cfg.scenario = scenario;
    if (app.count("--potential")) cfg.potential = potential;
    if (app.count("--hbar") || app.count("--mass"))
        cfg.constants = PhysicalConstants(app.count("--hbar") ? hbar : cfg.constants.hbar,
                                          app.count("--mass") ? mass : cfg.constants.mass);
    if (app.count("--grid")) cfg.grid_spec = parse_grid_spec(grid);
    if (app.count("--level")) cfg.level = level;
    if (app.count("--energy")) cfg.energy = energy;
    if (app.count("--microstate")) {
        cfg.microstates.clear();
        for (const auto& t : microstates) cfg.microstates.push_back(parse_microstate(t));
    }
    if (app.count("--random-ms")) cfg.random_count = random_ms;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--delta-e")) cfg.delta_e = delta_e;
    if (app.count("--out")) cfg.out_dir = out_dir;
    for (const auto& t : tols) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw UsageError("--tol expects NAME=VALUE");
        cfg.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    }
    if (app.count("--psi0")) cfg.psi0 = parse_complex(psi0);
    if (app.count("--dpsi0")) cfg.dpsi0 = parse_complex(dpsi0);

    if (cfg.scenario.empty()) throw UsageError("--scenario is required");
    return cfg;
}

}  // namespace qhj
