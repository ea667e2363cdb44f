#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "bandflow/error.hpp"
#include "bandflow/signal.hpp"

namespace bandflow {

enum class BaseMetric { Sup, D };

/// d_r(x, y) = max_{0 <= t <= r} d(T_t x, T_t y), with t sampled on a step grid that always
/// includes both endpoints.
struct OrbitMetric {
    double r = 0.0;
    double time_step = 0.01;
    BaseMetric base = BaseMetric::Sup;
};

template <typename Point>
double orbit_metric(const OrbitMetric& m, const std::function<Point(double)>& orbit_x,
                    const std::function<Point(double)>& orbit_y,
                    const std::function<double(const Point&, const Point&)>& dist) {
    if (!(m.r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "orbit metric horizon r must be >= 0");
    if (!(m.time_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "orbit metric time step must be > 0");
    const auto steps = static_cast<long>(std::ceil(m.r / m.time_step));
    double best = 0.0;
    for (long i = 0; i <= steps; ++i) {
        const double t = (i == steps) ? m.r : static_cast<double>(i) * m.time_step;
        best = std::max(best, dist(orbit_x(t), orbit_y(t)));
    }
    return best;
}

/// Base distance between two signals per the selector (D uses the largest n the grids cover).
double signal_base_distance(BaseMetric base, const Signal& f, const Signal& g);

}  // namespace bandflow
