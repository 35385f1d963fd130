#pragma once

#include <array>
#include <chrono>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhj/qhj.hpp"

namespace qhj {

inline constexpr const char* kToolVersion = "qhj 1.0.0";
inline constexpr const char* kCurveHeader = "x,V,phi,theta,Wp,W,psi_re,psi_im,t";

struct UsageError : ValidationError {
    using ValidationError::ValidationError;
};

struct ScenarioConfig {
    std::string scenario;
    std::string potential;  // "harmonic:1", "infinite-well:3.14", ... empty => scenario default
    PhysicalConstants constants;
    std::optional<std::array<double, 3>> grid_spec;  // min, max, n_points
    std::optional<int> level;
    std::optional<double> energy;
    std::vector<Microstate> microstates;
    int random_count = 0;
    std::uint64_t seed = 0;
    double delta_e = 0.0;  // 0 => scenario default
    std::string out_dir;
    std::map<std::string, double> tolerances;
    std::complex<double> psi0{1.0, 0.0};
    std::complex<double> dpsi0{0.0, 1.0};

    double tol(const std::string& name, double fallback) const {
        auto it = tolerances.find(name);
        return it == tolerances.end() ? fallback : it->second;
    }
};

struct OutputBundle {
    std::filesystem::path dir;
    std::vector<std::string> files;  // relative names, manifest.json last
    nlohmann::json report;
    int exit_code = 0;
};

// ---- parsing helpers -------------------------------------------------------

inline PotentialModel parse_potential(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) params.push_back(std::stod(tok));
    }
    auto need = [&](std::size_t n) {
        if (params.size() != n)
            throw UsageError("potential '" + spec + "': wrong number of parameters");
    };
    PotentialModel model = Harmonic{1.0};
    if (kind == "harmonic") {
        need(1);
        model = Harmonic{params[0]};
    } else if (kind == "infinite-well") {
        need(1);
        model = InfiniteWell{params[0]};
    } else if (kind == "finite-well") {
        need(2);
        model = FiniteWell{params[0], params[1]};
    } else if (kind == "linear-ramp") {
        need(1);
        model = LinearRamp{params[0]};
    } else if (kind == "step-barrier") {
        need(1);
        model = StepBarrier{params[0]};
    } else {
        throw UsageError("unknown potential '" + kind + "'");
    }
    try {
        validate_model(model);
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    return model;
}

inline Microstate parse_microstate(const std::string& triple) {
    std::stringstream ss(triple);
    std::string tok;
    std::vector<double> v;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != 3) throw UsageError("--microstate expects a,b,c");
    if (!admissible(v[0], v[1], v[2]))
        throw UsageError("microstate " + triple +
                         " violates admissibility: require a > 0, b > 0, ab - c^2/4 > 0");
    return Microstate(v[0], v[1], v[2]);
}

inline std::array<double, 3> parse_grid_spec(const std::string& spec) {
    std::stringstream ss(spec);
    std::string tok;
    std::vector<double> v;
    while (std::getline(ss, tok, ':')) v.push_back(std::stod(tok));
    if (v.size() != 3) throw UsageError("--grid expects min:max:n");
    if (!(v[0] < v[1])) throw UsageError("--grid: require min < max");
    if (!(v[2] >= 3.0)) throw UsageError("--grid: require n_points >= 3");
    return {v[0], v[1], v[2]};
}

inline std::complex<double> parse_complex(const std::string& spec) {
    std::stringstream ss(spec);
    std::string tok;
    std::vector<double> v;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (v.empty() || v.size() > 2) throw UsageError("complex value expects re or re,im");
    return {v[0], v.size() == 2 ? v[1] : 0.0};
}

// ---- deterministic output --------------------------------------------------

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string checksum_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

struct CurveColumns {
    std::vector<double> V, phi, theta, Wp, W, psi_re, psi_im, t;
};

inline std::string render_curve_csv(const Grid& grid, const CurveColumns& c) {
    std::string out = kCurveHeader;
    out += '\n';
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        out += format_number(grid.x(i));
        for (const std::vector<double>* col : {&c.V, &c.phi, &c.theta, &c.Wp, &c.W, &c.psi_re,
                                               &c.psi_im, &c.t}) {
            out += ',';
            out += format_number((*col)[i]);
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline void add_check(nlohmann::json& checks, const std::string& name, double value,
                      double tolerance, bool pass) {
    checks.push_back({{"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}});
}

inline nlohmann::json config_echo(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["scenario"] = cfg.scenario;
    j["potential"] = cfg.potential;
    j["hbar"] = cfg.constants.hbar;
    j["mass"] = cfg.constants.mass;
    if (cfg.grid_spec)
        j["grid"] = {(*cfg.grid_spec)[0], (*cfg.grid_spec)[1], (*cfg.grid_spec)[2]};
    if (cfg.level) j["level"] = *cfg.level;
    if (cfg.energy) j["energy"] = *cfg.energy;
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : cfg.microstates) ms.push_back({m.a, m.b, m.c});
    j["microstates"] = ms;
    j["random_ms"] = cfg.random_count;
    j["seed"] = cfg.seed;
    j["delta_e"] = cfg.delta_e;
    j["psi0"] = {cfg.psi0.real(), cfg.psi0.imag()};
    j["dpsi0"] = {cfg.dpsi0.real(), cfg.dpsi0.imag()};
    j["tolerances"] = cfg.tolerances;
    return j;
}

inline Grid default_grid(const PotentialModel& model, const ScenarioConfig& cfg) {
    if (cfg.grid_spec)
        return make_grid((*cfg.grid_spec)[0], (*cfg.grid_spec)[1],
                         static_cast<std::size_t>((*cfg.grid_spec)[2]));
    return std::visit(qhj::detail::overloaded{
                          [](const InfiniteWell& w) { return make_grid(0.0, w.width, 4001); },
                          [](const Harmonic&) { return make_grid(-10.0, 10.0, 20001); },
                          [](const FiniteWell& f) {
                              return make_grid(-3.0 * f.width, 3.0 * f.width, 12001);
                          },
                          [](const LinearRamp&) { return make_grid(0.0, 20.0, 20001); },
                          [](const StepBarrier&) { return make_grid(-8.0, 8.0, 16001); }},
                      model);
}

}  // namespace detail

// ---- scenarios -------------------------------------------------------------

namespace detail {

struct ScenarioResult {
    nlohmann::json checks = nlohmann::json::array();
    nlohmann::json extra;  // scenario-specific report fields
    std::vector<std::pair<std::string, std::string>> files;  // name -> body
};

inline std::vector<Microstate> scenario_microstates(const ScenarioConfig& cfg, int default_count) {
    std::vector<Microstate> ms = cfg.microstates;
    int extra = cfg.random_count;
    if (ms.empty() && extra == 0) extra = default_count;
    if (extra > 0) {
        auto rnd = random_microstates(extra, cfg.seed);
        ms.insert(ms.end(), rnd.begin(), rnd.end());
    }
    return ms;
}

inline CurveColumns make_curve(const PotentialModel& model, const PhysicalConstants& constants,
                               const BasisPair& scaled, const Microstate& ms,
                               const CharacteristicFunction& cf, const TrajectoryCurve& traj) {
    const std::size_t n = scaled.grid.n_points;
    CurveColumns c;
    c.V.resize(n);
    c.phi = scaled.phi;
    c.theta = scaled.theta;
    c.Wp.assign(n, 0.0);
    c.W = cf.samples;
    c.psi_re.assign(n, 0.0);
    c.psi_im.assign(n, 0.0);
    c.t = traj.t_minus_tau;
    for (std::size_t i = 0; i < n; ++i) {
        c.V[i] = potential_eval(model, scaled.grid.x(i));
        c.t[i] += traj.tau;
    }
    const MomentumField wp = conjugate_momentum(scaled, ms, constants);
    c.Wp = wp.samples;
    const PolarSamples psi = reconstruct_polar(scaled, ms, constants);
    for (std::size_t k = 0; k < psi.values.size(); ++k) {
        c.psi_re[psi.lo + k] = psi.values[k].real();
        c.psi_im[psi.lo + k] = psi.values[k].imag();
    }
    return c;
}

inline ScenarioResult run_bound_microstates(const ScenarioConfig& cfg) {
    const std::string pot = cfg.potential.empty() ? "harmonic:1" : cfg.potential;
    const PotentialModel model = parse_potential(pot);
    const Grid grid = default_grid(model, cfg);
    const int level = cfg.level.value_or(0);
    const std::vector<Microstate> ms_list = scenario_microstates(cfg, 10);
    const double inv_tol = cfg.tol("invariance", 1e-6);
    const double res_tol = cfg.tol("residual", 1e-6);
    const double act_tol = cfg.tol("action_spread", 1e-6);
    const double delta_e = cfg.delta_e > 0.0 ? cfg.delta_e : 1e-4;

    const BoundBasis basis = bound_state_basis(model, cfg.constants, level, grid);

    ScenarioResult out;
    out.extra["energy"] = basis.eigen.energy;
    out.extra["node_count"] = basis.eigen.node_count;

    double phi_peak = 0.0;
    for (std::size_t i = basis.pair.lo; i <= basis.pair.hi; ++i)
        phi_peak = std::max(phi_peak, std::abs(basis.eigen.phi[i]));

    double action_min = 0.0, action_max = 0.0, residual_max = 0.0;
    bool nodes_ok = true;
    for (std::size_t k = 0; k < ms_list.size(); ++k) {
        const Microstate& ms = ms_list[k];
        const BasisPair scaled = scale_wronskian(basis.pair, ms, cfg.constants);
        const CharacteristicFunction cf = characteristic_function(scaled, ms, cfg.constants);
        const std::vector<double> trig = reconstruct_trig(scaled, ms, cfg.constants);

        double trig_peak = 0.0;
        std::size_t imax = scaled.lo;
        for (std::size_t i = scaled.lo; i <= scaled.hi; ++i)
            if (std::abs(trig[i]) > trig_peak) {
                trig_peak = std::abs(trig[i]);
                imax = i;
            }
        double factor = phi_peak / trig_peak;
        if (trig[imax] * basis.eigen.phi[imax] < 0.0) factor = -factor;
        double dev = 0.0;
        for (std::size_t i = scaled.lo; i <= scaled.hi; ++i)
            dev = std::max(dev, std::abs(factor * trig[i] - basis.eigen.phi[i]));
        add_check(out.checks, "invariance_ms" + std::to_string(k), dev, inv_tol, dev <= inv_tol);

        const ActionIncrement act = action_increment(scaled, ms, cfg.constants, cf);
        if (k == 0) {
            action_min = action_max = act.value;
        } else {
            action_min = std::min(action_min, act.value);
            action_max = std::max(action_max, act.value);
        }

        residual_max = std::max(residual_max,
                                qshje_residual(model, scaled, ms, cfg.constants).max_abs);
        const NodeCheckReport node = boundary_node_check(model, scaled, ms, cfg.constants);
        if (node.applicable && !node.pass) nodes_ok = false;

        const TrajectoryCurve traj =
            time_of_transit(model, cfg.constants, ms, basis.eigen.energy, grid,
                            basis.pair.anchor_x0, VariationConvention::FixedAnchor, delta_e);
        out.files.emplace_back("curve_ms" + std::to_string(k) + ".csv",
                               render_curve_csv(grid, make_curve(model, cfg.constants, scaled, ms,
                                                                 cf, traj)));
    }
    const double spread = action_max - action_min;
    add_check(out.checks, "action_increment_spread", spread, act_tol, spread <= act_tol);
    add_check(out.checks, "qshje_residual", residual_max, res_tol, residual_max <= res_tol);
    add_check(out.checks, "boundary_nodes", nodes_ok ? 0.0 : 1.0, 0.5, nodes_ok);
    return out;
}

inline ScenarioResult run_initial_value(const ScenarioConfig& cfg) {
    const std::string pot =
        cfg.potential.empty() ? "infinite-well:3.141592653589793" : cfg.potential;
    const PotentialModel model = parse_potential(pot);
    const Grid grid = default_grid(model, cfg);
    const double E = cfg.energy.value_or(0.5);
    const double anchor = 0.5 * (grid.x_min + grid.x_max);
    const double rt_tol = cfg.tol("roundtrip", 1e-9);
    const double delta_e = cfg.delta_e > 0.0 ? cfg.delta_e : 1e-4;

    const BasisPair pair =
        integrate_pair(model, cfg.constants, E, grid, anchor, {1.0, 0.0, 0.0, 1.0});
    const InitialValueState state =
        microstate_from_initial_conditions(cfg.psi0, cfg.dpsi0, pair, anchor, cfg.constants);

    ScenarioResult out;
    out.extra["degenerate_family"] = state.degenerate();
    out.extra["direction"] = state.direction;
    out.extra["alpha"] = {state.coeffs.alpha.real(), state.coeffs.alpha.imag()};
    out.extra["beta"] = {state.coeffs.beta.real(), state.coeffs.beta.imag()};

    Microstate curve_ms{1.0, 1.0, 0.0};  // representative when degenerate
    if (state.degenerate()) {
        add_check(out.checks, "degenerate_family_detected", 1.0, 0.5, true);
        out.extra["microstate"] = nullptr;
        out.extra["note"] = "zero probability current: uncountable microstate family";
    } else {
        const Microstate& ms = *state.microstate;
        out.extra["microstate"] = {ms.a, ms.b, ms.c};
        curve_ms = ms;
        const SuperpositionCoeffs back = microstate_to_superposition(ms);
        const std::complex<double> r1 = state.coeffs.alpha / back.alpha;
        const std::complex<double> r2 = state.coeffs.beta / back.beta;
        const double err = std::abs(r1 - r2) / std::abs(r1);
        add_check(out.checks, "unique_inversion_roundtrip", err, rt_tol, err <= rt_tol);
    }

    const BasisPair scaled = scale_wronskian(pair, curve_ms, cfg.constants);
    const CharacteristicFunction cf = characteristic_function(scaled, curve_ms, cfg.constants);
    const TrajectoryCurve traj = time_of_transit(model, cfg.constants, curve_ms, E, grid, anchor,
                                                 VariationConvention::FixedAnchor, delta_e);
    CurveColumns c = make_curve(model, cfg.constants, scaled, curve_ms, cf, traj);
    // psi columns carry the superposition fixed by the initial data
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const std::complex<double> psi =
            state.coeffs.alpha * pair.phi[i] + state.coeffs.beta * pair.theta[i];
        c.psi_re[i] = psi.real();
        c.psi_im[i] = psi.imag();
    }
    out.files.emplace_back("curve_iv.csv", render_curve_csv(grid, c));
    return out;
}

inline ScenarioResult run_step_barrier(const ScenarioConfig& cfg) {
    const std::string pot = cfg.potential.empty() ? "step-barrier:2" : cfg.potential;
    const PotentialModel model = parse_potential(pot);
    const auto* barrier = std::get_if<StepBarrier>(&model);
    if (!barrier) throw UsageError("step-barrier-node scenario requires a step-barrier potential");
    const double E = cfg.energy.value_or(1.0);
    if (!(E > 0.0 && E < barrier->height))
        throw UsageError("step-barrier-node: require 0 < E < barrier height");
    const Grid grid = default_grid(model, cfg);
    const double refl_tol = cfg.tol("reflection", 1e-9);
    const double node_tol = cfg.tol("node", 1e-6);
    const double delta_e = cfg.delta_e > 0.0 ? cfg.delta_e : 1e-4;

    const double m = cfg.constants.mass, hbar = cfg.constants.hbar;
    const double k = std::sqrt(2.0 * m * E) / hbar;
    const double kappa = std::sqrt(2.0 * m * (barrier->height - E)) / hbar;

    // phi decays inside the barrier; theta is an independent partner.
    const BasisPair pair =
        integrate_pair(model, cfg.constants, E, grid, 0.0, {1.0, -kappa, 0.0, 1.0});
    const Microstate ms = cfg.microstates.empty() ? Microstate{1.0, 1.0, 0.0} : cfg.microstates[0];
    const BasisPair scaled = scale_wronskian(pair, ms, cfg.constants);

    // reflection amplitude from the e^{+-ikx} decomposition on the open side
    const std::complex<double> I{0.0, 1.0};
    const double x0 = grid.x(0);
    const std::complex<double> a_coef =
        0.5 * (pair.phi[0] - I * pair.phi_prime[0] / k) * std::exp(-I * k * x0);
    const std::complex<double> b_coef =
        0.5 * (pair.phi[0] + I * pair.phi_prime[0] / k) * std::exp(I * k * x0);
    const std::complex<double> r = b_coef / a_coef;
    const std::complex<double> r_exact = (k - I * kappa) / (k + I * kappa);

    ScenarioResult out;
    out.extra["energy"] = E;
    out.extra["reflection"] = {r.real(), r.imag()};
    const double mag_err = std::abs(std::abs(r) - 1.0);
    const double oracle_err = std::abs(r - r_exact);
    add_check(out.checks, "reflection_magnitude", mag_err, refl_tol, mag_err <= refl_tol);
    add_check(out.checks, "reflection_vs_oracle", oracle_err, refl_tol, oracle_err <= refl_tol);

    const NodeCheckReport node = boundary_node_check(model, scaled, ms, cfg.constants);
    add_check(out.checks, "barrier_node_ratio", node.right_frontier_ratio, node_tol,
              node.right_checked && node.right_node);

    const CharacteristicFunction cf = characteristic_function(scaled, ms, cfg.constants);
    const TrajectoryCurve traj = time_of_transit(model, cfg.constants, ms, E, grid, 0.0,
                                                 VariationConvention::FixedAnchor, delta_e);
    out.files.emplace_back("curve_step.csv", render_curve_csv(grid, make_curve(model, cfg.constants,
                                                                               scaled, ms, cf,
                                                                               traj)));
    return out;
}

}  // namespace detail

// ---- driver ----------------------------------------------------------------

inline OutputBundle run_scenario(const ScenarioConfig& cfg) {
    namespace fs = std::filesystem;
    const auto t_start = std::chrono::steady_clock::now();

    std::string out_dir = cfg.out_dir;
    if (out_dir.empty()) {
        if (const char* env = std::getenv("QHJ_OUT_DIR")) out_dir = env;
        if (out_dir.empty()) out_dir = "qhj_out";
    }

    detail::ScenarioResult result;
    if (cfg.scenario == "bound-microstates")
        result = detail::run_bound_microstates(cfg);
    else if (cfg.scenario == "initial-value-unique")
        result = detail::run_initial_value(cfg);
    else if (cfg.scenario == "step-barrier-node")
        result = detail::run_step_barrier(cfg);
    else
        throw UsageError("unknown scenario '" + cfg.scenario + "'");

    const auto t_end = std::chrono::steady_clock::now();
    const double elapsed_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t_end - t_start)
            .count();

    bool all_pass = true;
    for (const auto& chk : result.checks)
        if (!chk.at("pass").get<bool>()) all_pass = false;

    OutputBundle bundle;
    bundle.dir = fs::path(out_dir);
    fs::create_directories(bundle.dir);

    nlohmann::json manifest_files = nlohmann::json::array();
    for (const auto& [name, body] : result.files) {
        std::ofstream f(bundle.dir / name, std::ios::binary);
        f << body;
        manifest_files.push_back({{"name", name}, {"checksum", checksum_hex(body)}});
        bundle.files.push_back(name);
    }

    nlohmann::json report;
    report["scenario"] = cfg.scenario;
    report["checks"] = result.checks;
    if (!result.extra.is_null()) report["detail"] = result.extra;
    report["manifest"] = {{"config", detail::config_echo(cfg)},
                          {"version", kToolVersion},
                          {"timings_ms", {{"scenario", elapsed_ms}}},
                          {"files", manifest_files}};
    const std::string report_body = report.dump(2) + "\n";
    {
        std::ofstream f(bundle.dir / "report.json", std::ios::binary);
        f << report_body;
    }
    bundle.files.push_back("report.json");

    nlohmann::json manifest;
    manifest["version"] = kToolVersion;
    manifest["files"] = manifest_files;
    manifest["files"].push_back({{"name", "report.json"}, {"checksum", checksum_hex(report_body)}});
    {
        std::ofstream f(bundle.dir / "manifest.json", std::ios::binary);
        f << manifest.dump(2) << "\n";
    }
    bundle.files.push_back("manifest.json");

    bundle.report = std::move(report);
    bundle.exit_code = all_pass ? 0 : 1;
    return bundle;
}

}  // namespace qhj
