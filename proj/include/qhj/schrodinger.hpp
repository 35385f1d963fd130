#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "qhj/microstate_types.hpp"
#include "qhj/model.hpp"

namespace qhj {

// Magnitude beyond which the exponentially growing partner is no longer
// integrated; samples past the frontier are frozen and flagged clamped.
inline constexpr double kClampThreshold = 1e120;

// Two independent Schrodinger solutions with derivatives on a grid.
// Unclamped samples live on the inclusive index range [lo, hi].
struct BasisPair {
    Grid grid;
    double energy = 0.0;
    std::vector<double> phi, phi_prime, theta, theta_prime;
    double wronskian = 0.0;
    double anchor_x0 = 0.0;
    std::size_t anchor_index = 0;
    std::array<double, 4> anchor_conditions{};  // phi, phi', theta, theta' at anchor
    std::size_t lo = 0, hi = 0;

    bool clamped(std::size_t i) const { return i < lo || i > hi; }
};

struct EigenSolution {
    int level = 0;
    double energy = 0.0;
    std::vector<double> phi;
    int node_count = 0;
};

namespace detail {

// One RK4 step of u'' = f(x) u with f sampled at the endpoints and midpoint.
inline void rk4_step(double& u, double& up, double h, double f0, double fm, double f1) {
    const double k1u = up, k1p = f0 * u;
    const double k2u = up + 0.5 * h * k1p, k2p = fm * (u + 0.5 * h * k1u);
    const double k3u = up + 0.5 * h * k2p, k3p = fm * (u + 0.5 * h * k2u);
    const double k4u = up + h * k3p, k4p = f1 * (u + h * k3u);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    up += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
}

struct SchrodingerRhs {
    const PotentialModel& model;
    double E;
    double scale;  // 2m/hbar^2
    double operator()(double x) const { return scale * (potential_eval(model, x) - E); }
};

}  // namespace detail

// Integrate both basis solutions outward from the anchor in both directions.
// Anchor conditions are E-independent by contract; they define the basis
// family used by the energy-derivative in the trajectory module.
inline BasisPair integrate_pair(const PotentialModel& model, const PhysicalConstants& constants,
                                double E, const Grid& grid, double anchor_x0,
                                const std::array<double, 4>& anchor_conditions) {
    validate_model(model);
    const double w0 = anchor_conditions[0] * anchor_conditions[3] -
                      anchor_conditions[1] * anchor_conditions[2];
    double norm = 0.0;
    for (double v : anchor_conditions) norm = std::max(norm, std::abs(v));
    if (std::abs(w0) <= 1e-14 * std::max(1.0, norm * norm))
        throw ValidationError("integrate_pair: anchor conditions have zero Wronskian");

    const std::size_t ia = nearest_index(grid, anchor_x0);
    const WallInfo walls = hard_walls(model);
    if ((walls.left || walls.right) && (ia == 0 || ia + 1 == grid.n_points))
        throw ValidationError("integrate_pair: anchor must be strictly interior for hard-wall models");

    BasisPair pair;
    pair.grid = grid;
    pair.energy = E;
    pair.anchor_x0 = grid.x(ia);
    pair.anchor_index = ia;
    pair.anchor_conditions = anchor_conditions;
    const std::size_t n = grid.n_points;
    pair.phi.assign(n, 0.0);
    pair.phi_prime.assign(n, 0.0);
    pair.theta.assign(n, 0.0);
    pair.theta_prime.assign(n, 0.0);

    pair.phi[ia] = anchor_conditions[0];
    pair.phi_prime[ia] = anchor_conditions[1];
    pair.theta[ia] = anchor_conditions[2];
    pair.theta_prime[ia] = anchor_conditions[3];

    detail::SchrodingerRhs f{model, E, 2.0 * constants.mass / (constants.hbar * constants.hbar)};

    pair.lo = ia;
    pair.hi = ia;

    // Cell endpoints are sampled a hair inside the cell so that one-sided
    // limits are taken at potential discontinuities (e.g. a sweep starting
    // exactly on the step edge); for smooth potentials the shift is inert.

    // rightward sweep
    {
        double u = pair.phi[ia], up = pair.phi_prime[ia];
        double v = pair.theta[ia], vp = pair.theta_prime[ia];
        for (std::size_t i = ia; i + 1 < n; ++i) {
            const double x0 = grid.x(i), x1 = grid.x(i + 1);
            const double h = x1 - x0;
            const double eps = 1e-9 * h;
            const double f0 = f(x0 + eps), fm = f(0.5 * (x0 + x1)), f1 = f(x1 - eps);
            detail::rk4_step(u, up, h, f0, fm, f1);
            detail::rk4_step(v, vp, h, f0, fm, f1);
            if (std::abs(u) > kClampThreshold || std::abs(up) > kClampThreshold ||
                std::abs(v) > kClampThreshold || std::abs(vp) > kClampThreshold) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    pair.phi[j] = pair.phi[i];
                    pair.phi_prime[j] = pair.phi_prime[i];
                    pair.theta[j] = pair.theta[i];
                    pair.theta_prime[j] = pair.theta_prime[i];
                }
                break;
            }
            pair.phi[i + 1] = u;
            pair.phi_prime[i + 1] = up;
            pair.theta[i + 1] = v;
            pair.theta_prime[i + 1] = vp;
            pair.hi = i + 1;
        }
    }

    // leftward sweep
    {
        double u = pair.phi[ia], up = pair.phi_prime[ia];
        double v = pair.theta[ia], vp = pair.theta_prime[ia];
        for (std::size_t i = ia; i > 0; --i) {
            const double x0 = grid.x(i), x1 = grid.x(i - 1);
            const double h = x1 - x0;
            const double eps = 1e-9 * h;
            const double f0 = f(x0 + eps), fm = f(0.5 * (x0 + x1)), f1 = f(x1 - eps);
            detail::rk4_step(u, up, h, f0, fm, f1);
            detail::rk4_step(v, vp, h, f0, fm, f1);
            if (std::abs(u) > kClampThreshold || std::abs(up) > kClampThreshold ||
                std::abs(v) > kClampThreshold || std::abs(vp) > kClampThreshold) {
                for (std::size_t j = 0; j < i; ++j) {
                    pair.phi[j] = pair.phi[i];
                    pair.phi_prime[j] = pair.phi_prime[i];
                    pair.theta[j] = pair.theta[i];
                    pair.theta_prime[j] = pair.theta_prime[i];
                }
                break;
            }
            pair.phi[i - 1] = u;
            pair.phi_prime[i - 1] = up;
            pair.theta[i - 1] = v;
            pair.theta_prime[i - 1] = vp;
            pair.lo = i - 1;
        }
    }

    // +x-direction convention: Wronskian kept positive by negating theta.
    if (w0 < 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            pair.theta[i] = -pair.theta[i];
            pair.theta_prime[i] = -pair.theta_prime[i];
        }
        pair.anchor_conditions[2] = -pair.anchor_conditions[2];
        pair.anchor_conditions[3] = -pair.anchor_conditions[3];
    }
    pair.wronskian = std::abs(w0);
    return pair;
}

// Rescale both solutions by a common positive factor so the Wronskian equals
// +sqrt(2m / (hbar^2 (ab - c^2/4))).
inline BasisPair scale_wronskian(const BasisPair& pair, const Microstate& ms,
                                 const PhysicalConstants& constants) {
    if (!(pair.wronskian > 0.0)) throw ValidationError("scale_wronskian: pair Wronskian must be positive");
    const double target = std::sqrt(2.0 * constants.mass /
                                    (constants.hbar * constants.hbar * ms.discriminant()));
    const double s = std::sqrt(target / pair.wronskian);
    BasisPair out = pair;
    for (std::size_t i = 0; i < out.phi.size(); ++i) {
        out.phi[i] *= s;
        out.phi_prime[i] *= s;
        out.theta[i] *= s;
        out.theta_prime[i] *= s;
    }
    for (double& v : out.anchor_conditions) v *= s;
    out.wronskian = target;
    return out;
}

// Closed-form basis for the infinite square well: phi = sin(kx), theta = -cos(kx).
inline BasisPair closed_form_well_basis(const InfiniteWell& well, const PhysicalConstants& constants,
                                        double E, const Grid& grid, double anchor_x0) {
    if (!(E > 0.0)) throw ValidationError("closed_form_well_basis: need E > 0");
    const double k = std::sqrt(2.0 * constants.mass * E) / constants.hbar;
    BasisPair pair;
    pair.grid = grid;
    pair.energy = E;
    pair.anchor_index = nearest_index(grid, anchor_x0);
    pair.anchor_x0 = grid.x(pair.anchor_index);
    const std::size_t n = grid.n_points;
    pair.phi.resize(n);
    pair.phi_prime.resize(n);
    pair.theta.resize(n);
    pair.theta_prime.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x(i);
        pair.phi[i] = std::sin(k * x);
        pair.phi_prime[i] = k * std::cos(k * x);
        pair.theta[i] = -std::cos(k * x);
        pair.theta_prime[i] = k * std::sin(k * x);
    }
    pair.anchor_conditions = {pair.phi[pair.anchor_index], pair.phi_prime[pair.anchor_index],
                              pair.theta[pair.anchor_index], pair.theta_prime[pair.anchor_index]};
    pair.wronskian = k;
    pair.lo = 0;
    pair.hi = n - 1;
    (void)well;
    return pair;
}

namespace detail {

struct ShootResult {
    double value = 0.0;
    double deriv = 0.0;
    int nodes = 0;
};

// Inward integration from one grid end to the match index, with rescaling
// to dodge overflow.  Optionally records samples (value and derivative).
inline ShootResult shoot_inward(const PotentialModel& model, const PhysicalConstants& constants,
                                double E, const Grid& grid, bool from_left, std::size_t im,
                                std::vector<double>* u_out, std::vector<double>* up_out) {
    const std::size_t n = grid.n_points;
    const WallInfo walls = hard_walls(model);
    SchrodingerRhs f{model, E, 2.0 * constants.mass / (constants.hbar * constants.hbar)};

    std::size_t i = from_left ? 0 : n - 1;
    const double x_end = grid.x(i);
    double u, up;
    const bool wall = from_left ? (walls.left && std::abs(*walls.left - x_end) <= 0.5 * grid.h)
                                : (walls.right && std::abs(*walls.right - x_end) <= 0.5 * grid.h);
    if (wall) {
        u = 0.0;
        up = from_left ? 1.0 : -1.0;
    } else {
        const double vend = potential_eval(model, x_end);
        const double kappa = std::sqrt(std::max(0.0, f.scale * (vend - E)));
        u = 1e-100;
        up = (from_left ? kappa : -kappa) * u;
    }
    if (u_out) {
        (*u_out)[i] = u;
        (*up_out)[i] = up;
    }

    ShootResult res;
    int prev_sign = (u > 0.0) ? 1 : (u < 0.0 ? -1 : 0);
    while (i != im) {
        const std::size_t j = from_left ? i + 1 : i - 1;
        const double x0 = grid.x(i), x1 = grid.x(j);
        const double h = x1 - x0;
        rk4_step(u, up, h, f(x0), f(0.5 * (x0 + x1)), f(x1));
        if (std::abs(u) > 1e100 || std::abs(up) > 1e100) {
            const double s = 1.0 / std::max(std::abs(u), std::abs(up));
            u *= s;
            up *= s;
            if (u_out) {
                if (from_left)
                    for (std::size_t k = 0; k <= i; ++k) {
                        (*u_out)[k] *= s;
                        (*up_out)[k] *= s;
                    }
                else
                    for (std::size_t k = i; k < n; ++k) {
                        (*u_out)[k] *= s;
                        (*up_out)[k] *= s;
                    }
            }
        }
        const int sign = (u > 0.0) ? 1 : (u < 0.0 ? -1 : 0);
        if (sign != 0 && prev_sign != 0 && sign != prev_sign && j != im) ++res.nodes;
        if (sign != 0) prev_sign = sign;
        if (u_out) {
            (*u_out)[j] = u;
            (*up_out)[j] = up;
        }
        i = j;
    }
    res.value = u;
    res.deriv = up;
    return res;
}

// Log-derivative match point: leftmost classical turning point strictly
// interior to the grid, else the grid middle.
inline std::size_t match_index(const PotentialModel& model, double E, const Grid& grid) {
    if (E > min_potential(model)) {
        for (double t : turning_points(model, E)) {
            if (t > grid.x_min + 2.0 * grid.h && t < grid.x_max - 2.0 * grid.h)
                return nearest_index(grid, t);
        }
    }
    return (grid.n_points - 1) / 2;
}

// Total Pruefer phase at the right end: u = r sin(theta), u' = r cos(theta),
// theta' = cos^2(theta) + (2m/hbar^2)(E - V) sin^2(theta).  The phase is
// strictly increasing in E and free of the log-derivative poles, so the
// eigenvalue predicate never depends on where a node happens to fall.
inline double prufer_phase(const PotentialModel& model, const PhysicalConstants& constants,
                           double E, const Grid& grid) {
    const WallInfo walls = hard_walls(model);
    const double scale = 2.0 * constants.mass / (constants.hbar * constants.hbar);
    auto g = [&](double x, double th) {
        const double s = std::sin(th), c = std::cos(th);
        return c * c + scale * (E - potential_eval(model, x)) * s * s;
    };

    double theta;
    if (walls.left && std::abs(*walls.left - grid.x_min) <= 0.5 * grid.h) {
        theta = 0.0;
    } else {
        const double kappa =
            std::sqrt(std::max(0.0, scale * (potential_eval(model, grid.x_min) - E)));
        theta = std::atan2(1.0, kappa);  // u'/u = kappa, decaying start
    }
    for (std::size_t i = 0; i + 1 < grid.n_points; ++i) {
        const double x0 = grid.x(i), x1 = grid.x(i + 1);
        const double h = x1 - x0, xm = 0.5 * (x0 + x1);
        const double eps = 1e-9 * h;
        const double k1 = g(x0 + eps, theta);
        const double k2 = g(xm, theta + 0.5 * h * k1);
        const double k3 = g(xm, theta + 0.5 * h * k2);
        const double k4 = g(x1 - eps, theta + h * k3);
        theta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return theta;
}

// Phase the n-th eigenfunction must reach at the right end.
inline double prufer_target(const PotentialModel& model, const PhysicalConstants& constants,
                            double E, const Grid& grid, int n) {
    const WallInfo walls = hard_walls(model);
    const double pi = std::numbers::pi;
    if (walls.right && std::abs(*walls.right - grid.x_max) <= 0.5 * grid.h) return (n + 1) * pi;
    const double scale = 2.0 * constants.mass / (constants.hbar * constants.hbar);
    const double kappa =
        std::sqrt(std::max(0.0, scale * (potential_eval(model, grid.x_max) - E)));
    return (n + 1) * pi - std::atan2(1.0, kappa);  // u'/u = -kappa, decaying end
}

inline bool energy_too_high(const PotentialModel& model, const PhysicalConstants& constants,
                            double E, const Grid& grid, int n) {
    return prufer_phase(model, constants, E, grid) > prufer_target(model, constants, E, grid, n);
}

struct BoundSolve {
    double energy = 0.0;
    std::vector<double> phi, phi_prime;
    int node_count = 0;
};

inline BoundSolve solve_bound(const PotentialModel& model, const PhysicalConstants& constants,
                              int n, const Grid& grid, double e_lo, double e_hi) {
    validate_model(model);
    if (n < 0) throw ValidationError("find_eigenvalue: level must be nonnegative");
    if (!(e_lo < e_hi)) throw ValidationError("find_eigenvalue: invalid bracket");
    if (energy_too_high(model, constants, e_lo, grid, n) ||
        !energy_too_high(model, constants, e_hi, grid, n))
        throw BracketError("find_eigenvalue: bracket does not straddle the requested level");

    double lo = e_lo, hi = e_hi, mid = 0.5 * (lo + hi);
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid))) {
            converged = true;
            break;
        }
        if (energy_too_high(model, constants, mid, grid, n))
            hi = mid;
        else
            lo = mid;
    }
    if (!converged) throw ConvergenceError("find_eigenvalue: bisection failed to converge");

    BoundSolve out;
    out.energy = mid;
    const std::size_t nn = grid.n_points;
    const std::size_t im = match_index(model, mid, grid);
    std::vector<double> ul(nn, 0.0), upl(nn, 0.0), ur(nn, 0.0), upr(nn, 0.0);
    shoot_inward(model, constants, mid, grid, true, im, &ul, &upl);
    shoot_inward(model, constants, mid, grid, false, im, &ur, &upr);
    // projection ratio: agrees with ul/ur at the eigenvalue and stays finite
    // when the match point sits on a node
    const double rho =
        (ul[im] * ur[im] + upl[im] * upr[im]) / (ur[im] * ur[im] + upr[im] * upr[im]);
    out.phi.assign(nn, 0.0);
    out.phi_prime.assign(nn, 0.0);
    for (std::size_t i = 0; i <= im; ++i) {
        out.phi[i] = ul[i];
        out.phi_prime[i] = upl[i];
    }
    for (std::size_t i = im + 1; i < nn; ++i) {
        out.phi[i] = rho * ur[i];
        out.phi_prime[i] = rho * upr[i];
    }

    std::size_t imax = 0;
    for (std::size_t i = 1; i < nn; ++i)
        if (std::abs(out.phi[i]) > std::abs(out.phi[imax])) imax = i;
    const double peak = out.phi[imax];
    for (std::size_t i = 0; i < nn; ++i) {
        out.phi[i] /= peak;
        out.phi_prime[i] /= peak;
    }

    int prev_sign = 0;
    for (std::size_t i = 0; i < nn; ++i) {
        const int sign = (out.phi[i] > 0.0) ? 1 : (out.phi[i] < 0.0 ? -1 : 0);
        if (sign != 0 && prev_sign != 0 && sign != prev_sign) ++out.node_count;
        if (sign != 0) prev_sign = sign;
    }
    return out;
}

}  // namespace detail

inline EigenSolution find_eigenvalue(const PotentialModel& model, const PhysicalConstants& constants,
                                     int n, const Grid& grid, std::pair<double, double> bracket) {
    detail::BoundSolve solve =
        detail::solve_bound(model, constants, n, grid, bracket.first, bracket.second);
    EigenSolution out;
    out.level = n;
    out.energy = solve.energy;
    out.phi = std::move(solve.phi);
    out.node_count = solve.node_count;
    return out;
}

// Expanding search for a bracket around the n-th level.
inline std::pair<double, double> auto_bracket(const PotentialModel& model,
                                              const PhysicalConstants& constants, int n,
                                              const Grid& grid) {
    const double vmin = min_potential(model);
    double lo = vmin + 1e-9 * std::max(1.0, std::abs(vmin));
    double hi = lo + 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        if (detail::energy_too_high(model, constants, hi, grid, n)) return {lo, hi};
        hi = lo + 2.0 * (hi - lo);
    }
    throw BracketError("auto_bracket: could not bracket the requested level");
}

struct BoundBasis {
    EigenSolution eigen;
    BasisPair pair;
};

// Basis pair around a bound eigenfunction: phi is the two-sided eigen
// solution, theta is integrated outward from the peak of |phi| so the pair
// stays accurate where phi decays.  Wronskian is 1 at the anchor.
inline BoundBasis bound_state_basis(const PotentialModel& model, const PhysicalConstants& constants,
                                    int n, const Grid& grid, std::pair<double, double> bracket) {
    detail::BoundSolve solve = detail::solve_bound(model, constants, n, grid, bracket.first, bracket.second);
    const std::size_t nn = grid.n_points;

    std::size_t ia = 0;
    for (std::size_t i = 1; i < nn; ++i)
        if (std::abs(solve.phi[i]) > std::abs(solve.phi[ia])) ia = i;

    const double p0 = solve.phi[ia], p1 = solve.phi_prime[ia];
    const double norm = p0 * p0 + p1 * p1;
    const double t0 = -p1 / norm, t1 = p0 / norm;  // Wronskian = 1 at the anchor

    BasisPair pair;
    pair.grid = grid;
    pair.energy = solve.energy;
    pair.anchor_index = ia;
    pair.anchor_x0 = grid.x(ia);
    pair.anchor_conditions = {p0, p1, t0, t1};
    pair.phi = solve.phi;
    pair.phi_prime = solve.phi_prime;
    pair.theta.assign(nn, 0.0);
    pair.theta_prime.assign(nn, 0.0);
    pair.theta[ia] = t0;
    pair.theta_prime[ia] = t1;
    pair.wronskian = 1.0;
    pair.lo = ia;
    pair.hi = ia;

    detail::SchrodingerRhs f{model, solve.energy,
                             2.0 * constants.mass / (constants.hbar * constants.hbar)};
    double v = t0, vp = t1;
    for (std::size_t i = ia; i + 1 < nn; ++i) {
        const double x0 = grid.x(i), x1 = grid.x(i + 1);
        const double eps = 1e-9 * (x1 - x0);
        detail::rk4_step(v, vp, x1 - x0, f(x0 + eps), f(0.5 * (x0 + x1)), f(x1 - eps));
        if (std::abs(v) > kClampThreshold || std::abs(vp) > kClampThreshold) {
            for (std::size_t j = i + 1; j < nn; ++j) {
                pair.theta[j] = pair.theta[i];
                pair.theta_prime[j] = pair.theta_prime[i];
                pair.phi[j] = pair.phi[i];
                pair.phi_prime[j] = pair.phi_prime[i];
            }
            break;
        }
        pair.theta[i + 1] = v;
        pair.theta_prime[i + 1] = vp;
        pair.hi = i + 1;
    }
    v = t0;
    vp = t1;
    for (std::size_t i = ia; i > 0; --i) {
        const double x0 = grid.x(i), x1 = grid.x(i - 1);
        const double eps = 1e-9 * (x1 - x0);
        detail::rk4_step(v, vp, x1 - x0, f(x0 + eps), f(0.5 * (x0 + x1)), f(x1 - eps));
        if (std::abs(v) > kClampThreshold || std::abs(vp) > kClampThreshold) {
            for (std::size_t j = 0; j < i; ++j) {
                pair.theta[j] = pair.theta[i];
                pair.theta_prime[j] = pair.theta_prime[i];
                pair.phi[j] = pair.phi[i];
                pair.phi_prime[j] = pair.phi_prime[i];
            }
            break;
        }
        pair.theta[i - 1] = v;
        pair.theta_prime[i - 1] = vp;
        pair.lo = i - 1;
    }

    BoundBasis out;
    out.eigen.level = n;
    out.eigen.energy = solve.energy;
    out.eigen.phi = std::move(solve.phi);
    out.eigen.node_count = solve.node_count;
    out.pair = std::move(pair);
    return out;
}

inline BoundBasis bound_state_basis(const PotentialModel& model, const PhysicalConstants& constants,
                                    int n, const Grid& grid) {
    return bound_state_basis(model, constants, n, grid, auto_bracket(model, constants, n, grid));
}

}  // namespace qhj
