#pragma once

#include <cmath>
#include <complex>

#include "qhj/model.hpp"

namespace qhj {

inline bool admissible(double a, double b, double c) {
    return a > 0.0 && b > 0.0 && a * b - 0.25 * c * c > 0.0;
}

// Coefficient triple selecting one trajectory among those consistent with a
// bound-state wave function.  Validated on construction.
struct Microstate {
    double a, b, c;

    Microstate(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
        if (!admissible(a, b, c))
            throw ValidationError("Microstate: require a > 0, b > 0, ab - c^2/4 > 0");
    }

    double discriminant() const { return a * b - 0.25 * c * c; }

    Microstate scaled(double lambda) const {
        if (!(lambda > 0.0)) throw ValidationError("Microstate::scaled: lambda must be positive");
        return Microstate(lambda * a, lambda * b, lambda * c);
    }

    // Representative on the same ray with ab - c^2/4 = disc.
    Microstate canonical(double disc) const {
        return scaled(std::sqrt(disc / discriminant()));
    }
};

struct SuperpositionCoeffs {
    std::complex<double> alpha, beta;
};

inline double target_wronskian(const Microstate& ms, const PhysicalConstants& constants) {
    return std::sqrt(2.0 * constants.mass / (constants.hbar * constants.hbar * ms.discriminant()));
}

}  // namespace qhj
