#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace bandflow {

/// Uniform sample grid t_i = t_min + i*h, i in [0, count).
///
/// Sample times are always computed from the index, never by accumulation.
class UniformGrid {
public:
    UniformGrid(double t_min, double spacing, std::size_t count);

    /// Smallest grid with spacing h whose points cover [lo, hi]; lo is placed on a multiple of h.
    static UniformGrid covering(double lo, double hi, double spacing);

    double t_min() const noexcept { return t_min_; }
    double spacing() const noexcept { return h_; }
    std::size_t count() const noexcept { return count_; }
    double t_max() const noexcept { return time(count_ - 1); }
    double time(std::size_t i) const noexcept { return t_min_ + static_cast<double>(i) * h_; }

    /// Sub-grid [first, first + n).
    UniformGrid slice(std::size_t first, std::size_t n) const;

    /// Same samples relabelled so that every time moves by -k*h.
    UniformGrid shifted_back(std::int64_t k) const;

    /// Index of t if t is (within 1e-6 h) a grid point.
    std::optional<std::size_t> index_of(double t) const;

    bool operator==(const UniformGrid&) const = default;

private:
    double t_min_;
    double h_;
    std::size_t count_;
};

/// Integer offset k with b.t_min = a.t_min + k*h, if the two grids share spacing and lattice.
std::optional<std::int64_t> lattice_offset(const UniformGrid& a, const UniformGrid& b);

/// Index ranges of the points common to two aligned grids.
struct Overlap {
    std::size_t first_a;
    std::size_t first_b;
    std::size_t count;
};

/// Throws GridMismatch when the grids are not on a common lattice.
Overlap overlap(const UniformGrid& a, const UniformGrid& b);

}  // namespace bandflow
