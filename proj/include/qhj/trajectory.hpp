#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "qhj/microstate.hpp"
#include "qhj/schrodinger.hpp"

namespace qhj {

// How the basis pair varies with energy when taking dW/dE.  Jacobi's theorem
// does not fix this by itself; both conventions are first class and labeled
// in output.
enum class VariationConvention {
    FixedAnchor,       // E-independent anchor conditions, numerically integrated
    ClosedFormFamily,  // closed-form basis family (infinite well only)
};

struct TrajectoryCurve {
    Grid grid;
    std::vector<double> t_minus_tau;
    double energy = 0.0;
    Microstate microstate{1.0, 1.0, 0.0};
    double tau = 0.0;
    VariationConvention convention = VariationConvention::FixedAnchor;
    double delta_e = 0.0;
    std::size_t lo = 0, hi = 0;
    double anchor_x0 = 0.0;
};

inline double default_delta_e(double E) { return std::max(1e-6, 1e-6 * std::abs(E)); }

namespace detail {

struct WSlice {
    std::vector<double> w;
    std::size_t lo, hi;
};

inline WSlice characteristic_at(const PotentialModel& model, const PhysicalConstants& constants,
                                const Microstate& ms, double E, const Grid& grid, double anchor_x0,
                                VariationConvention convention) {
    BasisPair pair;
    if (convention == VariationConvention::ClosedFormFamily) {
        const auto* well = std::get_if<InfiniteWell>(&model);
        if (!well)
            throw ValidationError("time_of_transit: closed-form-family requires the infinite well");
        pair = closed_form_well_basis(*well, constants, E, grid, anchor_x0);
    } else {
        pair = integrate_pair(model, constants, E, grid, anchor_x0, {1.0, 0.0, 0.0, 1.0});
    }
    const BasisPair scaled = scale_wronskian(pair, ms, constants);
    CharacteristicFunction cf = characteristic_function(scaled, ms, constants, 0.0);
    return {std::move(cf.samples), cf.lo, cf.hi};
}

}  // namespace detail

// Jacobi's theorem t - tau = dW/dE by central differences at fixed (a,b,c),
// with the Wronskian rescaling reapplied at each probe energy.  A step
// consistency check against delta/2 guards the truncation error.
inline TrajectoryCurve time_of_transit(const PotentialModel& model,
                                       const PhysicalConstants& constants, const Microstate& ms,
                                       double E, const Grid& grid, double anchor_x0,
                                       VariationConvention convention, double delta_e,
                                       double tau = 0.0) {
    if (!(delta_e > 0.0)) throw ValidationError("time_of_transit: delta_e must be positive");

    auto slice = [&](double energy) {
        return detail::characteristic_at(model, constants, ms, energy, grid, anchor_x0, convention);
    };
    const detail::WSlice w_p = slice(E + delta_e);
    const detail::WSlice w_m = slice(E - delta_e);
    const detail::WSlice w_ph = slice(E + 0.5 * delta_e);
    const detail::WSlice w_mh = slice(E - 0.5 * delta_e);

    const std::size_t lo = std::max({w_p.lo, w_m.lo, w_ph.lo, w_mh.lo});
    const std::size_t hi = std::min({w_p.hi, w_m.hi, w_ph.hi, w_mh.hi});
    if (hi < lo) throw DomainError("time_of_transit: empty common unclamped region");

    TrajectoryCurve curve;
    curve.grid = grid;
    curve.energy = E;
    curve.microstate = ms;
    curve.tau = tau;
    curve.convention = convention;
    curve.delta_e = delta_e;
    curve.lo = lo;
    curve.hi = hi;
    curve.anchor_x0 = anchor_x0;
    curve.t_minus_tau.assign(grid.n_points, 0.0);

    double scale = 1.0, maxdiff = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        const double t1 = (w_p.w[i] - w_m.w[i]) / (2.0 * delta_e);
        const double t2 = (w_ph.w[i] - w_mh.w[i]) / delta_e;
        curve.t_minus_tau[i] = t1;
        scale = std::max(scale, std::abs(t2));
        maxdiff = std::max(maxdiff, std::abs(t1 - t2));
    }
    if (maxdiff > 1e-4 * scale)
        throw StepSizeError("time_of_transit: delta_e too large, Richardson check failed");
    for (std::size_t i = 0; i < lo; ++i) curve.t_minus_tau[i] = curve.t_minus_tau[lo];
    for (std::size_t i = hi + 1; i < grid.n_points; ++i) curve.t_minus_tau[i] = curve.t_minus_tau[hi];
    return curve;
}

// Ordered (x, t) pairs for the unclamped region; t is not asserted monotone.
inline std::vector<std::pair<double, double>> sample_trajectory(const TrajectoryCurve& curve) {
    std::vector<std::pair<double, double>> out;
    if (curve.t_minus_tau.empty() || curve.hi < curve.lo) return out;
    out.reserve(curve.hi - curve.lo + 1);
    for (std::size_t i = curve.lo; i <= curve.hi; ++i)
        out.emplace_back(curve.grid.x(i), curve.tau + curve.t_minus_tau[i]);
    return out;
}

}  // namespace qhj
