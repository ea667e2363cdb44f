#include "bandflow/orbit_metric.hpp"

namespace bandflow {

double signal_base_distance(BaseMetric base, const Signal& f, const Signal& g) {
    if (base == BaseMetric::Sup) return sup_distance(f, g);
    const auto ov = overlap(f.grid(), g.grid());
    const double lo = f.grid().time(ov.first_a);
    const double hi = f.grid().time(ov.first_a + ov.count - 1);
    const int n = static_cast<int>(std::floor(std::min(-lo, hi) + 1e-9));
    if (n < 1) throw Error(ErrorCode::InsufficientCoverage, "common grid does not cover [-1, 1]");
    return distance_D(f, g, n).value;
}

}  // namespace bandflow
