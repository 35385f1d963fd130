#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qhj {

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StepSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhysicalConstants {
    double hbar = 1.0;
    double mass = 1.0;

    PhysicalConstants() = default;
    PhysicalConstants(double hbar_, double mass_) : hbar(hbar_), mass(mass_) {
        if (!(hbar > 0.0) || !(mass > 0.0))
            throw ValidationError("PhysicalConstants: hbar and mass must be positive");
    }
};

// Potential catalog. Hard walls are metadata, never huge finite values.
struct InfiniteWell {
    double width;  // V = 0 on [0, width], walls at 0 and width
};
struct Harmonic {
    double stiffness;  // V = k x^2 / 2
};
struct FiniteWell {
    double depth;  // V = -depth for |x| < width/2, 0 outside
    double width;
};
struct LinearRamp {
    double slope;  // V = g x for x >= 0, wall at x = 0
};
struct StepBarrier {
    double height;  // V = 0 for x < 0, height for x >= 0
};

using PotentialModel = std::variant<InfiniteWell, Harmonic, FiniteWell, LinearRamp, StepBarrier>;

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

inline void validate_model(const PotentialModel& model) {
    std::visit(detail::overloaded{
                   [](const InfiniteWell& w) {
                       if (!(w.width > 0.0)) throw ValidationError("InfiniteWell: width must be positive");
                   },
                   [](const Harmonic& h) {
                       if (!(h.stiffness > 0.0)) throw ValidationError("Harmonic: stiffness must be positive");
                   },
                   [](const FiniteWell& f) {
                       if (!(f.depth > 0.0) || !(f.width > 0.0))
                           throw ValidationError("FiniteWell: depth and width must be positive");
                   },
                   [](const LinearRamp& r) {
                       if (!(r.slope > 0.0)) throw ValidationError("LinearRamp: slope must be positive");
                   },
                   [](const StepBarrier& s) {
                       if (!(s.height > 0.0)) throw ValidationError("StepBarrier: height must be positive");
                   }},
               model);
}

// Hard-wall positions where psi must vanish exactly, if any.
struct WallInfo {
    std::optional<double> left;
    std::optional<double> right;
};

inline WallInfo hard_walls(const PotentialModel& model) {
    return std::visit(detail::overloaded{
                          [](const InfiniteWell& w) { return WallInfo{0.0, w.width}; },
                          [](const LinearRamp&) { return WallInfo{0.0, std::nullopt}; },
                          [](const auto&) { return WallInfo{}; }},
                      model);
}

inline double min_potential(const PotentialModel& model) {
    return std::visit(detail::overloaded{
                          [](const FiniteWell& f) { return -f.depth; },
                          [](const auto&) { return 0.0; }},
                      model);
}

inline double potential_eval(const PotentialModel& model, double x) {
    return std::visit(detail::overloaded{
                          [&](const InfiniteWell& w) {
                              if (x < 0.0 || x > w.width)
                                  throw DomainError("potential_eval: x outside infinite-well walls");
                              return 0.0;
                          },
                          [&](const Harmonic& h) { return 0.5 * h.stiffness * x * x; },
                          [&](const FiniteWell& f) {
                              return std::abs(x) < 0.5 * f.width ? -f.depth : 0.0;
                          },
                          [&](const LinearRamp& r) {
                              if (x < 0.0) throw DomainError("potential_eval: x behind linear-ramp wall");
                              return r.slope * x;
                          },
                          [&](const StepBarrier& s) { return x < 0.0 ? 0.0 : s.height; }},
                      model);
}

// Classical turning points, sorted ascending.  Hard-wall variants report the
// wall positions; energies above every barrier give an empty list.
inline std::vector<double> turning_points(const PotentialModel& model, double E) {
    return std::visit(detail::overloaded{
                          [&](const InfiniteWell& w) -> std::vector<double> {
                              if (!(E > 0.0)) throw ValidationError("turning_points: need E > min V");
                              return {0.0, w.width};
                          },
                          [&](const Harmonic& h) -> std::vector<double> {
                              if (!(E > 0.0)) throw ValidationError("turning_points: need E > min V");
                              double r = std::sqrt(2.0 * E / h.stiffness);
                              return {-r, r};
                          },
                          [&](const FiniteWell& f) -> std::vector<double> {
                              if (!(E > -f.depth)) throw ValidationError("turning_points: need E > min V");
                              if (E >= 0.0) return {};
                              return {-0.5 * f.width, 0.5 * f.width};
                          },
                          [&](const LinearRamp& r) -> std::vector<double> {
                              if (!(E > 0.0)) throw ValidationError("turning_points: need E > min V");
                              return {0.0, E / r.slope};
                          },
                          [&](const StepBarrier& s) -> std::vector<double> {
                              if (E > 0.0 && E < s.height) return {0.0};
                              return {};
                          }},
                      model);
}

struct Grid {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t n_points = 3;
    double h = 0.5;

    double x(std::size_t i) const {
        if (i + 1 == n_points) return x_max;
        return x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(n_points - 1);
    }
    double span() const { return x_max - x_min; }
};

inline Grid make_grid(double x_min, double x_max, std::size_t n_points) {
    if (!(x_min < x_max)) throw ValidationError("make_grid: require x_min < x_max");
    if (n_points < 3) throw ValidationError("make_grid: require n_points >= 3");
    Grid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n_points = n_points;
    g.h = (x_max - x_min) / static_cast<double>(n_points - 1);
    return g;
}

// Nearest grid index to x; x must lie within the grid (half-cell slack).
inline std::size_t nearest_index(const Grid& g, double x) {
    if (x < g.x_min - 0.5 * g.h || x > g.x_max + 0.5 * g.h)
        throw ValidationError("nearest_index: x outside grid");
    double t = (x - g.x_min) / g.h;
    long i = std::lround(t);
    if (i < 0) i = 0;
    if (i >= static_cast<long>(g.n_points)) i = static_cast<long>(g.n_points) - 1;
    return static_cast<std::size_t>(i);
}

}  // namespace qhj
