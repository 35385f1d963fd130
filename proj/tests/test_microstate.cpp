#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qhj/microstate.hpp"

using namespace qhj;

namespace {
constexpr double kPi = std::numbers::pi;
const PhysicalConstants kUnits{};
const double kRoot2 = std::sqrt(2.0);

BasisPair well_pair(std::size_t n = 4001) {
    return closed_form_well_basis(InfiniteWell{kPi}, kUnits, 0.5, make_grid(0.0, kPi, n), kPi / 2);
}
}  // namespace

TEST_CASE("microstate admissibility and scaling") {
    CHECK_THROWS_AS(Microstate(1.0, 1.0, 3.0), ValidationError);
    CHECK_THROWS_AS(Microstate(-1.0, 1.0, 0.0), ValidationError);
    const Microstate ms{1.5, 1.5, 1.0};
    CHECK(ms.discriminant() == doctest::Approx(2.0).epsilon(1e-15));
    const Microstate up = ms.scaled(4.0);
    CHECK(up.discriminant() == doctest::Approx(32.0).epsilon(1e-15));
    const Microstate back = up.canonical(2.0);
    CHECK(back.a == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(back.c == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conjugate momentum on the closed-form well") {
    const BasisPair pair = well_pair();

    SUBCASE("a = b = sqrt(2), c = 0 gives the free momentum W' = 1") {
        const MomentumField f = conjugate_momentum(pair, Microstate{kRoot2, kRoot2, 0.0}, kUnits);
        for (std::size_t i = f.lo; i <= f.hi; ++i)
            CHECK(f.samples[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("(2,1,0) at the well midpoint") {
        const MomentumField f = conjugate_momentum(pair, Microstate{2.0, 1.0, 0.0}, kUnits);
        const std::size_t mid = nearest_index(pair.grid, kPi / 2);
        CHECK(f.samples[mid] == doctest::Approx(kRoot2 / 2.0).epsilon(1e-12));
        // W' > 0 everywhere for an admissible triple
        for (std::size_t i = f.lo; i <= f.hi; ++i) CHECK(f.samples[i] > 0.0);
    }
    SUBCASE("pair must carry the microstate's Wronskian") {
        CHECK_THROWS_AS(conjugate_momentum(pair, Microstate{1.0, 1.0, 0.0}, kUnits),
                        ValidationError);
    }
}

TEST_CASE("characteristic function on the closed-form well") {
    const BasisPair pair = well_pair();
    const Microstate ms{kRoot2, kRoot2, 0.0};
    const CharacteristicFunction cf = characteristic_function(pair, ms, kUnits);

    SUBCASE("W(x) = x - pi/2 for the free microstate") {
        for (std::size_t i = cf.lo; i <= cf.hi; ++i)
            CHECK(std::abs(cf.samples[i] - (pair.grid.x(i) - kPi / 2)) <= 1e-10);
        CHECK(std::abs(cf.samples[nearest_index(pair.grid, kPi / 2)]) <= 1e-10);
        CHECK(cf.samples[cf.hi] - cf.samples[cf.lo] == doctest::Approx(kPi).epsilon(1e-12));
    }
    SUBCASE("constant offset K shifts W rigidly") {
        const CharacteristicFunction cfk = characteristic_function(pair, ms, kUnits, 0.75);
        for (std::size_t i = cf.lo; i <= cf.hi; ++i)
            CHECK(cfk.samples[i] - cf.samples[i] == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("W is strictly increasing") {
        const CharacteristicFunction cfm =
            characteristic_function(pair, Microstate{2.0, 1.0, 0.0}, kUnits);
        for (std::size_t i = cfm.lo; i < cfm.hi; ++i)
            CHECK(cfm.samples[i + 1] > cfm.samples[i]);
    }
}

TEST_CASE("finite difference of W converges to W' at second order") {
    const Microstate ms{2.0, 1.0, 0.0};
    auto fd_error = [&](std::size_t n) {
        const BasisPair pair = well_pair(n);
        const CharacteristicFunction cf = characteristic_function(pair, ms, kUnits);
        const MomentumField f = conjugate_momentum(pair, ms, kUnits);
        const double h = pair.grid.h;
        double err = 0.0;
        for (std::size_t i = cf.lo + 1; i < cf.hi; ++i) {
            const double fd = (cf.samples[i + 1] - cf.samples[i - 1]) / (2.0 * h);
            err = std::max(err, std::abs(fd - f.samples[i]));
        }
        return err;
    };
    const double coarse = fd_error(2001);
    const double fine = fd_error(4001);
    CHECK(coarse / fine >= 3.5);
    CHECK(coarse / fine <= 4.5);
}

TEST_CASE("coarse grids that alias a winding are rejected") {
    // k = 10 and h ~ 0.45 puts more than half a turn in one cell
    const Grid grid = make_grid(0.0, kPi, 8);
    const BasisPair pair = closed_form_well_basis(InfiniteWell{kPi}, kUnits, 50.0, grid, kPi / 2);
    const Microstate ms{kRoot2 / 10.0, kRoot2 / 10.0, 0.0};
    CHECK_THROWS_AS(characteristic_function(pair, ms, kUnits), ResolutionError);
}

TEST_CASE("polar reconstruction") {
    const BasisPair pair = well_pair();

    SUBCASE("free microstate reproduces sin x - i cos x") {
        const PolarSamples ps = reconstruct_polar(pair, Microstate{kRoot2, kRoot2, 0.0}, kUnits);
        double err = 0.0;
        for (std::size_t k = 0; k < ps.values.size(); ++k) {
            const double x = pair.grid.x(ps.lo + k);
            err = std::max(err, std::abs(ps.values[k] -
                                         std::complex<double>{std::sin(x), -std::cos(x)}));
        }
        CHECK(err <= 1e-12);
        CHECK(std::abs(ps.values[nearest_index(pair.grid, kPi / 2) - ps.lo] - 1.0) <= 1e-12);
    }
    SUBCASE("(2,1,0) gives phi + i theta / sqrt(2)") {
        const PolarSamples ps = reconstruct_polar(pair, Microstate{2.0, 1.0, 0.0}, kUnits);
        double err = 0.0;
        for (std::size_t k = 0; k < ps.values.size(); ++k) {
            const std::size_t i = ps.lo + k;
            const std::complex<double> expect{pair.phi[i], pair.theta[i] / kRoot2};
            err = std::max(err, std::abs(ps.values[k] - expect));
        }
        CHECK(err <= 1e-10);
    }
    SUBCASE("polar form equals alpha phi + beta theta for random triples") {
        std::mt19937_64 rng(7);
        auto uni = [&](double lo, double hi) {
            return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        };
        for (int trial = 0; trial < 20; ++trial) {
            const double a = uni(0.5, 5.0), b = uni(0.5, 5.0);
            const double c = uni(-0.9, 0.9) * 2.0 * std::sqrt(a * b);
            const Microstate ms{a, b, c};
            const BasisPair scaled = scale_wronskian(pair, ms, kUnits);
            const PolarSamples ps = reconstruct_polar(scaled, ms, kUnits);
            const SuperpositionCoeffs co = microstate_to_superposition(ms);
            double err = 0.0;
            for (std::size_t k = 0; k < ps.values.size(); ++k) {
                const std::size_t i = ps.lo + k;
                const std::complex<double> lin =
                    co.alpha * scaled.phi[i] + co.beta * scaled.theta[i];
                err = std::max(err, std::abs(ps.values[k] - lin));
            }
            CHECK(err <= 1e-9);
        }
    }
}

TEST_CASE("trigonometric reconstruction") {
    const BasisPair pair = well_pair();
    const std::vector<double> psi =
        reconstruct_trig(pair, Microstate{kRoot2, kRoot2, 0.0}, kUnits);
    double err = 0.0;
    for (std::size_t i = 0; i < pair.grid.n_points; ++i)
        err = std::max(err, std::abs(psi[i] - std::sin(pair.grid.x(i))));
    CHECK(err <= 1e-12);

    // real part of the polar form, for any admissible triple
    const Microstate ms{1.7, 0.8, -0.6};
    const BasisPair scaled = scale_wronskian(pair, ms, kUnits);
    const PolarSamples ps = reconstruct_polar(scaled, ms, kUnits);
    const std::vector<double> tr = reconstruct_trig(scaled, ms, kUnits);
    double err2 = 0.0;
    for (std::size_t k = 0; k < ps.values.size(); ++k)
        err2 = std::max(err2, std::abs(tr[ps.lo + k] - ps.values[k].real()));
    CHECK(err2 <= 1e-12);
}

TEST_CASE("ray rescaling leaves W' and W unchanged") {
    const BasisPair pair = well_pair(2001);
    const Microstate ms{1.3, 0.9, 0.4};
    const Microstate up = ms.scaled(7.0);
    const BasisPair p1 = scale_wronskian(pair, ms, kUnits);
    const BasisPair p2 = scale_wronskian(pair, up, kUnits);
    const MomentumField f1 = conjugate_momentum(p1, ms, kUnits);
    const MomentumField f2 = conjugate_momentum(p2, up, kUnits);
    const CharacteristicFunction w1 = characteristic_function(p1, ms, kUnits);
    const CharacteristicFunction w2 = characteristic_function(p2, up, kUnits);
    double dev = 0.0;
    for (std::size_t i = f1.lo; i <= f1.hi; ++i) {
        dev = std::max(dev, std::abs(f1.samples[i] - f2.samples[i]));
        dev = std::max(dev, std::abs(w1.samples[i] - w2.samples[i]));
    }
    CHECK(dev <= 1e-10);
}

TEST_CASE("microstate_to_superposition closed forms") {
    {
        const SuperpositionCoeffs co = microstate_to_superposition(Microstate{kRoot2, kRoot2, 0.0});
        CHECK(std::abs(co.alpha - std::complex<double>{1.0, 0.0}) <= 1e-15);
        CHECK(std::abs(co.beta - std::complex<double>{0.0, 1.0}) <= 1e-15);
    }
    {
        const SuperpositionCoeffs co = microstate_to_superposition(Microstate{2.0, 1.0, 0.0});
        CHECK(std::abs(co.alpha - std::complex<double>{1.0, 0.0}) <= 1e-15);
        CHECK(std::abs(co.beta - std::complex<double>{0.0, 1.0 / kRoot2}) <= 1e-15);
    }
    {
        const SuperpositionCoeffs co = microstate_to_superposition(Microstate{1.5, 1.5, 1.0});
        CHECK(std::abs(co.alpha - std::complex<double>{1.0, 1.0 / std::sqrt(8.0)}) <= 1e-15);
        CHECK(std::abs(co.beta - std::complex<double>{0.0, 1.5 / kRoot2}) <= 1e-15);
    }
}

TEST_CASE("superposition coefficients from initial data") {
    const BasisPair pair = well_pair();
    const std::complex<double> I{0.0, 1.0};

    SUBCASE("anchor point where (phi, theta) = (1, 0)") {
        const SuperpositionCoeffs co =
            superposition_from_initial_conditions(1.0, I, pair, kPi / 2);
        CHECK(std::abs(co.alpha - 1.0) <= 1e-12);
        CHECK(std::abs(co.beta - I) <= 1e-12);
        const SuperpositionCoeffs co2 =
            superposition_from_initial_conditions(2.0 + I, 3.0, pair, kPi / 2);
        CHECK(std::abs(co2.alpha - (2.0 + I)) <= 1e-12);
        CHECK(std::abs(co2.beta - 3.0) <= 1e-12);
    }
    SUBCASE("consistency at a generic point") {
        const double x0 = 1.1;
        const std::size_t i = nearest_index(pair.grid, x0);
        const std::complex<double> psi0 = 0.3 - 0.7 * I, dpsi0 = 1.2 + 0.4 * I;
        const SuperpositionCoeffs co =
            superposition_from_initial_conditions(psi0, dpsi0, pair, x0);
        CHECK(std::abs(co.alpha * pair.phi[i] + co.beta * pair.theta[i] - psi0) <= 1e-12);
        CHECK(std::abs(co.alpha * pair.phi_prime[i] + co.beta * pair.theta_prime[i] - dpsi0) <=
              1e-12);
    }
    SUBCASE("zero data is rejected") {
        CHECK_THROWS_AS(superposition_from_initial_conditions(0.0, 0.0, pair, kPi / 2),
                        ValidationError);
    }
}

TEST_CASE("inversion of initial data to a microstate") {
    const BasisPair pair = well_pair();
    const std::complex<double> I{0.0, 1.0};

    SUBCASE("psi = sin x - i cos x maps to (sqrt2, sqrt2, 0)") {
        const InitialValueState st =
            microstate_from_initial_conditions(1.0, I, pair, kPi / 2, kUnits);
        REQUIRE(!st.degenerate());
        CHECK(st.direction == +1);
        CHECK(st.microstate->a == doctest::Approx(kRoot2).epsilon(1e-12));
        CHECK(st.microstate->b == doctest::Approx(kRoot2).epsilon(1e-12));
        CHECK(std::abs(st.microstate->c) <= 1e-12);
    }
    SUBCASE("psi = phi + i theta/sqrt2 maps to (2, 1, 0)") {
        const InitialValueState st =
            microstate_from_initial_conditions(1.0, I / kRoot2, pair, kPi / 2, kUnits);
        REQUIRE(!st.degenerate());
        CHECK(st.microstate->a == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(st.microstate->b == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(st.microstate->c) <= 1e-12);
    }
    SUBCASE("conjugate data flips the direction, not the triple") {
        const InitialValueState st =
            microstate_from_initial_conditions(1.0, -I, pair, kPi / 2, kUnits);
        REQUIRE(!st.degenerate());
        CHECK(st.direction == -1);
        CHECK(st.microstate->a == doctest::Approx(kRoot2).epsilon(1e-12));
        CHECK(st.microstate->b == doctest::Approx(kRoot2).epsilon(1e-12));
    }
    SUBCASE("real data has zero current and a degenerate family") {
        const InitialValueState st =
            microstate_from_initial_conditions(1.0, 0.5, pair, kPi / 2, kUnits);
        CHECK(st.degenerate());
        CHECK(std::abs(st.coeffs.alpha - 1.0) <= 1e-12);
        CHECK(std::abs(st.coeffs.beta - 0.5) <= 1e-12);
    }
}

TEST_CASE("round trip microstate -> data -> microstate over random triples") {
    const BasisPair pair = well_pair(2001);
    std::mt19937_64 rng(42);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    const double x0 = 1.0;
    const std::size_t i0 = nearest_index(pair.grid, x0);
    int checked = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double a = uni(0.5, 5.0), b = uni(0.5, 5.0);
        const double c = uni(-0.9, 0.9) * 2.0 * std::sqrt(a * b);
        const Microstate ms{a, b, c};
        const BasisPair scaled = scale_wronskian(pair, ms, kUnits);
        const SuperpositionCoeffs co = microstate_to_superposition(ms);
        const std::complex<double> psi0 = co.alpha * scaled.phi[i0] + co.beta * scaled.theta[i0];
        const std::complex<double> dpsi0 =
            co.alpha * scaled.phi_prime[i0] + co.beta * scaled.theta_prime[i0];
        const InitialValueState st =
            microstate_from_initial_conditions(psi0, dpsi0, scaled, x0, kUnits);
        REQUIRE(!st.degenerate());
        CHECK(st.direction == +1);
        const Microstate got = st.microstate->canonical(ms.discriminant());
        const double scale = std::max({a, b, std::abs(c)});
        worst = std::max({worst, std::abs(got.a - a) / scale, std::abs(got.b - b) / scale,
                          std::abs(got.c - c) / scale});
        ++checked;
    }
    CHECK(checked == 100);
    CHECK(worst <= 1e-9);
}
