#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <vector>

#include "qhj/microstate_types.hpp"
#include "qhj/schrodinger.hpp"

namespace qhj {

// Conjugate momentum W'(x) samples; zero exactly at clamped points.
struct MomentumField {
    Grid grid;
    std::vector<double> samples;
    Microstate microstate;
    int direction = +1;
    std::size_t lo = 0, hi = 0;
};

// Branch-unwrapped Hamilton characteristic function W(x).
struct CharacteristicFunction {
    Grid grid;
    std::vector<double> samples;
    std::vector<int> branch_count;
    double K = 0.0;
    std::size_t lo = 0, hi = 0;
};

struct PolarSamples {
    std::size_t lo = 0;  // grid index of values.front(); clamped points omitted
    std::vector<std::complex<double>> values;
};

namespace detail {

inline void require_scaled(const BasisPair& pair, const Microstate& ms,
                           const PhysicalConstants& constants) {
    const double target = target_wronskian(ms, constants);
    if (std::abs(pair.wronskian - target) > 1e-8 * target)
        throw ValidationError("basis pair is not Wronskian-scaled for this microstate");
}

inline double quad_form(const Microstate& ms, double phi, double theta) {
    return ms.a * phi * phi + ms.b * theta * theta + ms.c * phi * theta;
}

}  // namespace detail

inline MomentumField conjugate_momentum(const BasisPair& pair, const Microstate& ms,
                                        const PhysicalConstants& constants) {
    detail::require_scaled(pair, ms, constants);
    const double root2m = std::sqrt(2.0 * constants.mass);
    MomentumField field{pair.grid, {}, ms, +1, pair.lo, pair.hi};
    field.samples.assign(pair.grid.n_points, 0.0);
    for (std::size_t i = pair.lo; i <= pair.hi; ++i)
        field.samples[i] = root2m / detail::quad_form(ms, pair.phi[i], pair.theta[i]);
    return field;
}

// Continuous branch of W = hbar * arctan((b theta/phi + c/2) / sqrt(ab - c^2/4)) + K.
// The winding angle of (sqrt(ab - c^2/4) phi, b theta + c phi/2) is unwrapped
// across the atan2 cut; it gains pi at every zero of phi.  W is anchored so
// the anchor point sits on the principal branch plus K.
inline CharacteristicFunction characteristic_function(const BasisPair& pair, const Microstate& ms,
                                                      const PhysicalConstants& constants,
                                                      double K = 0.0) {
    detail::require_scaled(pair, ms, constants);
    const double s = std::sqrt(ms.discriminant());
    const double hbar = constants.hbar;
    const double root2m = std::sqrt(2.0 * constants.mass);
    const double pi = std::numbers::pi;
    const std::size_t n = pair.grid.n_points;

    CharacteristicFunction cf{pair.grid, {}, {}, K, pair.lo, pair.hi};
    cf.samples.assign(n, 0.0);
    cf.branch_count.assign(n, 0);

    std::vector<double> angle(n, 0.0);
    double prev = 0.0;
    for (std::size_t i = pair.lo; i <= pair.hi; ++i) {
        const double num = ms.b * pair.theta[i] + 0.5 * ms.c * pair.phi[i];
        const double den = s * pair.phi[i];
        double a = std::atan2(num, den);
        if (i > pair.lo) {
            double d = a - prev;
            d -= 2.0 * pi * std::round(d / (2.0 * pi));
            a = angle[i - 1] + d;
        }
        angle[i] = a;
        prev = std::atan2(num, den);
    }

    // A missed winding shows up as a mismatch between the unwrapped step and
    // the trapezoid of W' over the cell.
    for (std::size_t i = pair.lo; i < pair.hi; ++i) {
        const double q0 = detail::quad_form(ms, pair.phi[i], pair.theta[i]);
        const double q1 = detail::quad_form(ms, pair.phi[i + 1], pair.theta[i + 1]);
        const double est = 0.5 * (root2m / q0 + root2m / q1) * (pair.grid.x(i + 1) - pair.grid.x(i));
        const double got = hbar * (angle[i + 1] - angle[i]);
        if (std::abs(est - got) > 0.5 * pi * hbar)
            throw ResolutionError("characteristic_function: grid too coarse to isolate phi zeros");
    }

    // anchor to the principal branch plus K
    std::size_t ia = pair.anchor_index;
    if (ia < pair.lo) ia = pair.lo;
    if (ia > pair.hi) ia = pair.hi;
    const double num_a = ms.b * pair.theta[ia] + 0.5 * ms.c * pair.phi[ia];
    const double den_a = s * pair.phi[ia];
    const double principal_a =
        den_a != 0.0 ? std::atan(num_a / den_a) : (num_a > 0.0 ? 0.5 * pi : -0.5 * pi);
    const double shift = hbar * principal_a + K - hbar * angle[ia];

    for (std::size_t i = pair.lo; i <= pair.hi; ++i) {
        cf.samples[i] = hbar * angle[i] + shift;
        const double num = ms.b * pair.theta[i] + 0.5 * ms.c * pair.phi[i];
        const double den = s * pair.phi[i];
        if (den != 0.0) {
            const double principal = std::atan(num / den);
            cf.branch_count[i] =
                static_cast<int>(std::lround((cf.samples[i] - K - hbar * principal) / (hbar * pi)));
        } else {
            cf.branch_count[i] = (i > pair.lo) ? cf.branch_count[i - 1] : 0;
        }
    }
    for (std::size_t i = 0; i < pair.lo; ++i) {
        cf.samples[i] = cf.samples[pair.lo];
        cf.branch_count[i] = cf.branch_count[pair.lo];
    }
    for (std::size_t i = pair.hi + 1; i < n; ++i) {
        cf.samples[i] = cf.samples[pair.hi];
        cf.branch_count[i] = cf.branch_count[pair.hi];
    }
    return cf;
}

// Polar reconstruction psi = (2m)^{1/4} exp(iW/hbar) / ((W')^{1/2} [a - c^2/(4b)]^{1/2}).
// exp(iW/hbar) is evaluated as the unit vector along (s phi, b theta + c phi/2),
// which is the same unwrapped phase without cancellation where theta is large.
inline PolarSamples reconstruct_polar(const BasisPair& pair, const Microstate& ms,
                                      const PhysicalConstants& constants) {
    detail::require_scaled(pair, ms, constants);
    const double s = std::sqrt(ms.discriminant());
    const double denom = std::sqrt(ms.a - ms.c * ms.c / (4.0 * ms.b));
    PolarSamples out;
    out.lo = pair.lo;
    out.values.reserve(pair.hi - pair.lo + 1);
    for (std::size_t i = pair.lo; i <= pair.hi; ++i) {
        const double num = ms.b * pair.theta[i] + 0.5 * ms.c * pair.phi[i];
        const double den = s * pair.phi[i];
        const double hyp = std::hypot(den, num);
        const double mag = std::sqrt(detail::quad_form(ms, pair.phi[i], pair.theta[i])) / denom;
        out.values.emplace_back(mag * den / hyp, mag * num / hyp);
    }
    return out;
}

// Trigonometric form psi = (2m)^{1/4} cos(W/hbar) / ((W')^{1/2} [a - c^2/(4b)]^{1/2}),
// same stable phase evaluation.  Clamped points carry frozen basis values.
inline std::vector<double> reconstruct_trig(const BasisPair& pair, const Microstate& ms,
                                            const PhysicalConstants& constants) {
    detail::require_scaled(pair, ms, constants);
    const double s = std::sqrt(ms.discriminant());
    const double denom = std::sqrt(ms.a - ms.c * ms.c / (4.0 * ms.b));
    std::vector<double> out(pair.grid.n_points, 0.0);
    for (std::size_t i = 0; i < pair.grid.n_points; ++i) {
        const double num = ms.b * pair.theta[i] + 0.5 * ms.c * pair.phi[i];
        const double den = s * pair.phi[i];
        const double hyp = std::hypot(den, num);
        const double mag = std::sqrt(detail::quad_form(ms, pair.phi[i], pair.theta[i])) / denom;
        out[i] = mag * den / hyp;
    }
    return out;
}

inline SuperpositionCoeffs microstate_to_superposition(const Microstate& ms) {
    const std::complex<double> I{0.0, 1.0};
    SuperpositionCoeffs out;
    out.alpha = 1.0 + I * ms.c / std::sqrt(4.0 * ms.a * ms.b - ms.c * ms.c);
    out.beta = I * ms.b / std::sqrt(ms.discriminant());
    return out;
}

inline SuperpositionCoeffs superposition_from_initial_conditions(std::complex<double> psi0,
                                                                 std::complex<double> dpsi0,
                                                                 const BasisPair& pair, double x0) {
    if (psi0 == std::complex<double>{} && dpsi0 == std::complex<double>{})
        throw ValidationError("superposition_from_initial_conditions: zero initial data");
    const std::size_t i = nearest_index(pair.grid, x0);
    if (pair.clamped(i))
        throw ValidationError("superposition_from_initial_conditions: x0 in clamped region");
    const double w = pair.phi[i] * pair.theta_prime[i] - pair.phi_prime[i] * pair.theta[i];
    SuperpositionCoeffs out;
    out.alpha = (psi0 * pair.theta_prime[i] - dpsi0 * pair.theta[i]) / w;
    out.beta = -(psi0 * pair.phi_prime[i] - dpsi0 * pair.phi[i]) / w;
    return out;
}

// Marker for the real-psi (zero probability current) case: an uncountable
// family of microstates is consistent with the data, not a single triple.
struct DegenerateFamily {
    SuperpositionCoeffs coeffs;
};

struct InitialValueState {
    std::optional<Microstate> microstate;  // empty => degenerate family
    SuperpositionCoeffs coeffs;            // raw (alpha, beta) from the data
    int direction = +1;

    bool degenerate() const { return !microstate.has_value(); }
};

// Invert initial data to the unique (a,b,c) when the probability current is
// nonzero; otherwise report the degenerate family.  -x motion is mapped back
// by conjugation with direction = -1.
inline InitialValueState microstate_from_initial_conditions(std::complex<double> psi0,
                                                            std::complex<double> dpsi0,
                                                            const BasisPair& pair, double x0,
                                                            const PhysicalConstants& constants) {
    InitialValueState out;
    out.coeffs = superposition_from_initial_conditions(psi0, dpsi0, pair, x0);
    const std::complex<double> alpha = out.coeffs.alpha, beta = out.coeffs.beta;

    const double current = std::imag(std::conj(alpha) * beta);
    if (std::abs(current) <= 1e-12 * std::abs(alpha) * std::abs(beta)) {
        out.microstate.reset();
        return out;
    }

    const double d_scale = std::sqrt(2.0 * constants.mass) / (constants.hbar * pair.wronskian);
    auto invert = [&](std::complex<double> al, std::complex<double> be) -> std::optional<Microstate> {
        // gamma with Re(gamma*al) = 1, Re(gamma*be) = 0
        const double det = -al.real() * be.imag() + al.imag() * be.real();
        const double gr = -be.imag() / det;
        const double gi = -be.real() / det;
        const std::complex<double> gamma{gr, gi};
        const double c = 2.0 * d_scale * std::imag(gamma * al);
        const double b = d_scale * std::imag(gamma * be);
        if (!(b > 0.0)) return std::nullopt;
        const double a = (d_scale * d_scale + 0.25 * c * c) / b;
        return Microstate(a, b, c);
    };

    if (auto ms = invert(alpha, beta)) {
        out.microstate = *ms;
        out.direction = +1;
    } else if (auto msr = invert(std::conj(alpha), std::conj(beta))) {
        out.microstate = *msr;
        out.direction = -1;
    } else {
        throw ValidationError("microstate_from_initial_conditions: inversion failed");
    }
    return out;
}

}  // namespace qhj
