#include "bandflow/grid.hpp"

#include <cmath>
#include <string>

#include "bandflow/error.hpp"

namespace bandflow {

UniformGrid::UniformGrid(double t_min, double spacing, std::size_t count)
    : t_min_(t_min), h_(spacing), count_(count) {
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw Error(ErrorCode::InvalidArgument, "grid spacing must be finite and > 0");
    if (count < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points");
    if (!std::isfinite(t_min) || !std::isfinite(t_min + static_cast<double>(count - 1) * spacing))
        throw Error(ErrorCode::InvalidArgument, "grid end points must be finite");
}

UniformGrid UniformGrid::covering(double lo, double hi, double spacing) {
    if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "covering grid needs lo < hi");
    const double first = std::floor(lo / spacing + 1e-9);
    const double last = std::ceil(hi / spacing - 1e-9);
    return UniformGrid(first * spacing, spacing, static_cast<std::size_t>(last - first) + 1);
}

UniformGrid UniformGrid::slice(std::size_t first, std::size_t n) const {
    if (first + n > count_) throw Error(ErrorCode::InvalidArgument, "grid slice out of range");
    return UniformGrid(time(first), h_, n);
}

UniformGrid UniformGrid::shifted_back(std::int64_t k) const {
    return UniformGrid(t_min_ - static_cast<double>(k) * h_, h_, count_);
}

std::optional<std::size_t> UniformGrid::index_of(double t) const {
    const double x = (t - t_min_) / h_;
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-6 || r < 0.0 || r > static_cast<double>(count_ - 1)) return std::nullopt;
    return static_cast<std::size_t>(r);
}

std::optional<std::int64_t> lattice_offset(const UniformGrid& a, const UniformGrid& b) {
    if (std::abs(a.spacing() - b.spacing()) > 1e-12 * a.spacing()) return std::nullopt;
    const double x = (b.t_min() - a.t_min()) / a.spacing();
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-6) return std::nullopt;
    return static_cast<std::int64_t>(r);
}

Overlap overlap(const UniformGrid& a, const UniformGrid& b) {
    const auto k = lattice_offset(a, b);
    if (!k) throw Error(ErrorCode::GridMismatch, "grids do not share a common lattice");
    const auto na = static_cast<std::int64_t>(a.count());
    const auto nb = static_cast<std::int64_t>(b.count());
    // b index j sits at a index j + k
    const std::int64_t lo = std::max<std::int64_t>(0, *k);
    const std::int64_t hi = std::min<std::int64_t>(na, nb + *k);
    if (hi <= lo) throw Error(ErrorCode::GridMismatch, "grids do not overlap");
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(lo - *k), static_cast<std::size_t>(hi - lo)};
}

}  // namespace bandflow
