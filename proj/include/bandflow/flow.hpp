#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "bandflow/band.hpp"
#include "bandflow/grid.hpp"
#include "bandflow/rng.hpp"
#include "bandflow/signal.hpp"

namespace bandflow {

/// x -> x + omega t (mod 1) on the k-torus.
struct TorusRotation {
    std::vector<double> omega;
};

/// Circle rotation x -> x + rho (mod 1).
struct CircleRotation {
    double rho;
};

/// Permutation i -> perm[i] of {0, ..., p-1}.
struct Permutation {
    std::vector<int> perm;
};

/// Suspension flow with roof 1: (x, s) ~> (phi^n(x), s') with n + s' = s + t.
struct Suspension {
    std::variant<CircleRotation, Permutation> base;
};

struct FlowSpec {
    std::variant<TorusRotation, Suspension> kind;

    static FlowSpec torus(std::vector<double> omega);
    static FlowSpec rotation_suspension(double rho);
    static FlowSpec permutation_suspension(std::vector<int> perm);

    bool is_torus() const noexcept { return std::holds_alternative<TorusRotation>(kind); }
    /// Torus dimension k, or 2 for suspensions ((base, height)).
    std::size_t coordinate_count() const noexcept;
    /// Smallest observable depth that embeds the space.
    std::size_t min_depth() const noexcept;
    std::string describe() const;

    void validate() const;
};

/// Torus: angles in [0, 1). Suspension: {base point, height s in [0, 1)}; a permutation base
/// point is the integer label stored as a double.
struct FlowPoint {
    std::vector<double> coords;

    bool operator==(const FlowPoint&) const = default;
};

FlowPoint flow_step(const FlowSpec& f, const FlowPoint& x, double t);

/// Continuous injective map X -> [0, 1]^depth.
///
/// Torus: ((1 + cos 2 pi x_i)/2, (1 + sin 2 pi x_i)/2) per angle. Rotation suspension: the
/// chart (z, s) = (x + rho s mod 1, s) identifies the space with a 2-torus, embedded as a torus
/// of revolution (radii 2 and 1) rescaled into the unit cube. Permutation suspension: cycle c
/// of length L becomes the circle of angle (position + s)/L at third coordinate c/(C-1).
/// Coordinates beyond the minimum depth repeat the pattern with harmonics 2, 3, ...
class Observable {
public:
    Observable(FlowSpec flow, std::size_t depth);

    std::size_t depth() const noexcept { return depth_; }
    const FlowSpec& flow() const noexcept { return flow_; }
    std::vector<double> operator()(const FlowPoint& x) const;
    /// Symmetric band containing t -> coordinate l of phi(T_t x) for every x.
    double band_limit() const noexcept { return band_limit_; }
    /// Lipschitz constant of each coordinate in the chart angles (sup metric).
    double lipschitz() const noexcept { return lipschitz_; }

private:
    FlowSpec flow_;
    std::size_t depth_;
    double band_limit_;
    double lipschitz_;
    std::vector<std::vector<int>> cycles_;
    std::vector<int> cycle_of_;
    std::vector<int> position_;
};

Observable observable(const FlowSpec& f, std::size_t depth);

/// Coordinate l of phi(T_t x) on the grid, one Signal per coordinate, each declaring the band
/// [-band_limit, band_limit].
std::vector<Signal> orbit_sample(const FlowSpec& f, const FlowPoint& x, const UniformGrid& grid,
                                 const Observable& obs);

/// Torus: max over angles of the circle distance. Suspension: Euclidean distance of the
/// minimum-depth observable images.
double flow_distance(const FlowSpec& f, const FlowPoint& x, const FlowPoint& y);

FlowPoint random_point(const FlowSpec& f, Rng& rng);

/// Deterministic mesh of `count` points spread over the space.
std::vector<FlowPoint> mesh(const FlowSpec& f, std::size_t count);

/// min over `points` of flow_distance(T_t x, x); positive when no point is fixed by T_t.
double min_displacement(const FlowSpec& f, double t, const std::vector<FlowPoint>& points);

}  // namespace bandflow
