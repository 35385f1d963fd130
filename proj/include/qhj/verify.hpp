#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qhj/microstate.hpp"
#include "qhj/schrodinger.hpp"

namespace qhj {

struct ResidualReport {
    double max_abs = 0.0;
    double l2 = 0.0;
    std::vector<std::pair<std::string, double>> per_term;
    double grid_h = 0.0;
};

// Residual of the quantum stationary Hamilton-Jacobi equation,
//   (W')^2/(2m) + V - E + (hbar^2/4m) [W'''/W' - (3/2)(W''/W')^2].
// W'' and W''' come from differentiating the closed form of W' and
// substituting phi'' = (2m/hbar^2)(V - E) phi (same for theta), so the
// residual is algebraic in (phi, phi', theta, theta', V - E) and measures
// integration error only, never finite-difference noise.
inline ResidualReport qshje_residual(const PotentialModel& model, const BasisPair& pair,
                                     const Microstate& ms, const PhysicalConstants& constants) {
    detail::require_scaled(pair, ms, constants);
    if (pair.hi <= pair.lo) throw DomainError("qshje_residual: empty evaluable region");
    const double m = constants.mass, hbar = constants.hbar;
    const double E = pair.energy;

    ResidualReport rep;
    rep.grid_h = pair.grid.h;
    double sum2 = 0.0, cls_max = 0.0, sch_max = 0.0;
    for (std::size_t i = pair.lo; i <= pair.hi; ++i) {
        const double phi = pair.phi[i], phip = pair.phi_prime[i];
        const double th = pair.theta[i], thp = pair.theta_prime[i];
        const double v = potential_eval(model, pair.grid.x(i));
        const double q = detail::quad_form(ms, phi, th);
        const double qp =
            2.0 * ms.a * phi * phip + 2.0 * ms.b * th * thp + ms.c * (phip * th + phi * thp);
        const double p = ms.a * phip * phip + ms.b * thp * thp + ms.c * phip * thp;
        const double f = 2.0 * m * (v - E) / (hbar * hbar);
        const double qpp = 2.0 * p + 2.0 * f * q;
        const double wp = std::sqrt(2.0 * m) / q;
        const double classical = wp * wp / (2.0 * m) + v - E;
        const double ratio = qp / q;
        const double schwarzian = (hbar * hbar / (4.0 * m)) * (0.5 * ratio * ratio - qpp / q);
        const double r = classical + schwarzian;
        rep.max_abs = std::max(rep.max_abs, std::abs(r));
        cls_max = std::max(cls_max, std::abs(classical));
        sch_max = std::max(sch_max, std::abs(schwarzian));
        sum2 += r * r;
    }
    rep.l2 = std::sqrt(pair.grid.h * sum2);
    rep.per_term = {{"classical", cls_max}, {"schwarzian", sch_max}};
    return rep;
}

// Per-term residuals of the substitution identity: the two Schrodinger
// brackets and the Wronskian-scaling bracket, each of which must vanish
// identically.  Second derivatives are taken as a 4th-order centered first
// derivative of the stored phi'/theta' samples, so a corrupted solution
// trips exactly its own bracket.
inline ResidualReport substitution_residuals(const PotentialModel& model, const BasisPair& pair,
                                             const Microstate& ms,
                                             const PhysicalConstants& constants) {
    if (pair.hi < pair.lo + 4) throw DomainError("substitution_residuals: empty evaluable region");
    const double m = constants.mass, hbar = constants.hbar;
    const double E = pair.energy;
    const double h = pair.grid.h;

    double phi_max = 0.0, theta_max = 0.0, sum2 = 0.0;
    for (std::size_t i = pair.lo + 2; i + 2 <= pair.hi; ++i) {
        const double v = potential_eval(model, pair.grid.x(i));
        const double phi_pp = (-pair.phi_prime[i + 2] + 8.0 * pair.phi_prime[i + 1] -
                               8.0 * pair.phi_prime[i - 1] + pair.phi_prime[i - 2]) /
                              (12.0 * h);
        const double th_pp = (-pair.theta_prime[i + 2] + 8.0 * pair.theta_prime[i + 1] -
                              8.0 * pair.theta_prime[i - 1] + pair.theta_prime[i - 2]) /
                             (12.0 * h);
        const double t1 = -hbar * hbar * phi_pp / (2.0 * m) - (E - v) * pair.phi[i];
        const double t2 = -hbar * hbar * th_pp / (2.0 * m) - (E - v) * pair.theta[i];
        phi_max = std::max(phi_max, std::abs(t1));
        theta_max = std::max(theta_max, std::abs(t2));
        sum2 += t1 * t1 + t2 * t2;
    }
    const double t3 = std::abs(pair.wronskian * pair.wronskian * hbar * hbar * ms.discriminant() /
                                   (2.0 * m) -
                               1.0);

    ResidualReport rep;
    rep.grid_h = h;
    rep.per_term = {{"phi_equation", phi_max}, {"theta_equation", theta_max},
                    {"wronskian_scaling", t3}};
    rep.max_abs = std::max({phi_max, theta_max, t3});
    rep.l2 = std::sqrt(h * sum2);
    return rep;
}

// Microstate invariance of the trigonometric form: for a bound eigenstate,
// reconstruct_trig must reproduce phi_n for every admissible (a,b,c).
struct InvarianceReport {
    int level = 0;
    double energy = 0.0;
    std::vector<double> deviations;  // one per microstate, after max-abs normalization
    double tol = 0.0;
    bool pass = false;
};

inline InvarianceReport microstate_invariance_check(const PotentialModel& model,
                                                    const PhysicalConstants& constants, int n,
                                                    const std::vector<Microstate>& microstates,
                                                    const Grid& grid, double tol) {
    const BoundBasis basis = bound_state_basis(model, constants, n, grid);
    InvarianceReport rep;
    rep.level = n;
    rep.energy = basis.eigen.energy;
    rep.tol = tol;
    rep.pass = true;

    double phi_peak = 0.0;
    for (std::size_t i = basis.pair.lo; i <= basis.pair.hi; ++i)
        phi_peak = std::max(phi_peak, std::abs(basis.eigen.phi[i]));

    for (const Microstate& ms : microstates) {
        const BasisPair scaled = scale_wronskian(basis.pair, ms, constants);
        const std::vector<double> trig = reconstruct_trig(scaled, ms, constants);
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
        rep.deviations.push_back(dev);
        if (!(dev <= tol)) rep.pass = false;
    }
    return rep;
}

// Nodal behavior of the conjugate momentum at the outer frontiers.
struct NodeCheckReport {
    bool applicable = false;   // false => unbound configuration, check skipped
    bool left_wall = false, right_wall = false;
    bool left_checked = false, right_checked = false;
    bool left_node = false, right_node = false;
    double left_frontier_ratio = 0.0, right_frontier_ratio = 0.0;  // W'(frontier)/max W'
    std::vector<double> wall_positions;
    bool pass = false;
};

inline NodeCheckReport boundary_node_check(const PotentialModel& model, const BasisPair& pair,
                                           const Microstate& ms,
                                           const PhysicalConstants& constants) {
    const MomentumField wp = conjugate_momentum(pair, ms, constants);
    const WallInfo walls = hard_walls(model);
    NodeCheckReport rep;

    double wp_max = 0.0;
    for (std::size_t i = pair.lo; i <= pair.hi; ++i) wp_max = std::max(wp_max, wp.samples[i]);

    const std::size_t tail = std::max<std::size_t>(3, (pair.hi - pair.lo + 1) / 10);
    const double slack = 1e-12 * wp_max;
    const double E = pair.energy;

    auto check_side = [&](bool left) {
        const std::size_t frontier = left ? pair.lo : pair.hi;
        bool monotone = true;
        // W' must fall monotonically toward the frontier over the tail decade
        for (std::size_t k = 0; k + 1 < tail; ++k) {
            const std::size_t i = left ? pair.lo + k : pair.hi - k;
            const std::size_t inner = left ? i + 1 : i - 1;
            if (wp.samples[i] > wp.samples[inner] + slack) {
                monotone = false;
                break;
            }
        }
        const double frontier_value = (left ? pair.lo > 0 : pair.hi + 1 < pair.grid.n_points)
                                          ? 0.0  // clamped: W' = 0 exactly past the frontier
                                          : wp.samples[frontier];
        const double ratio = frontier_value / wp_max;
        const bool node = monotone && ratio < 1e-6;
        if (left) {
            rep.left_checked = true;
            rep.left_node = node;
            rep.left_frontier_ratio = ratio;
        } else {
            rep.right_checked = true;
            rep.right_node = node;
            rep.right_frontier_ratio = ratio;
        }
    };

    // Hard walls take the exception path: turning points sit at the walls.
    if (walls.left) {
        rep.left_wall = true;
        rep.wall_positions.push_back(*walls.left);
    } else if (potential_eval(model, pair.grid.x_min) > E) {
        check_side(true);
    }
    if (walls.right) {
        rep.right_wall = true;
        rep.wall_positions.push_back(*walls.right);
    } else if (potential_eval(model, pair.grid.x_max) > E) {
        check_side(false);
    }

    rep.applicable = rep.left_wall || rep.right_wall || rep.left_checked || rep.right_checked;
    rep.pass = rep.applicable && (!rep.left_checked || rep.left_node) &&
               (!rep.right_checked || rep.right_node);
    return rep;
}

// Total increment of the characteristic function across the grid; for a
// bound level n the oracle value is (n+1) pi hbar.  The analytic bound on
// the truncated tail beyond each decaying frontier is reported alongside.
struct ActionIncrement {
    double value = 0.0;
    double error_bar = 0.0;
};

inline ActionIncrement action_increment(const BasisPair& pair, const Microstate& ms,
                                        const PhysicalConstants& constants,
                                        const CharacteristicFunction& cf) {
    detail::require_scaled(pair, ms, constants);
    const double pi = std::numbers::pi;
    const double s = std::sqrt(ms.discriminant());
    ActionIncrement out;
    out.value = cf.samples[pair.grid.n_points - 1] - cf.samples[0];

    auto tail_bound = [&](std::size_t frontier) {
        const double num = ms.b * pair.theta[frontier] + 0.5 * ms.c * pair.phi[frontier];
        const double den = s * pair.phi[frontier];
        const double g = den != 0.0 ? std::abs(num / den) : std::numeric_limits<double>::infinity();
        return constants.hbar * (0.5 * pi - std::atan(g));
    };
    out.error_bar = tail_bound(pair.lo) + tail_bound(pair.hi);
    return out;
}

// Seeded admissible microstate sampler shared by the CLI and the test
// suites: a, b uniform in [0.5, 5], |c| < 0.9 * 2 sqrt(ab).
inline std::vector<Microstate> random_microstates(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    };
    std::vector<Microstate> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double a = uniform(0.5, 5.0);
        const double b = uniform(0.5, 5.0);
        const double cmax = 0.9 * 2.0 * std::sqrt(a * b);
        const double c = uniform(-cmax, cmax);
        out.emplace_back(a, b, c);
    }
    return out;
}

}  // namespace qhj
