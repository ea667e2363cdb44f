#pragma once

#include <string>
#include <vector>

namespace bandflow {

struct Interval {
    double lo;
    double hi;

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    double width() const noexcept { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Frequency support made of one or two disjoint closed intervals.
///
/// Overlapping or touching intervals are merged on construction, so [-1,0] u [0,1]
/// is stored as the single interval [-1,1].
class BandSpec {
public:
    explicit BandSpec(Interval a);
    BandSpec(Interval a, Interval b);
    /// Up to two intervals; an empty list is representable but rejected by spectral operations.
    explicit BandSpec(std::vector<Interval> parts);

    static BandSpec symmetric(double half_width) { return BandSpec({-half_width, half_width}); }

    /// I u (-I).
    BandSpec symmetrized() const;

    const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    bool empty() const noexcept { return intervals_.empty(); }
    bool contains(double nu) const noexcept;
    bool is_symmetric() const noexcept;
    /// Every interval widened by `margin` on both sides.
    BandSpec dilated(double margin) const;
    /// max |nu| over the band.
    double max_abs() const noexcept;
    /// True if every point of this band lies in `other`.
    bool subset_of(const BandSpec& other) const noexcept;

    std::string to_string() const;
    bool operator==(const BandSpec&) const = default;

private:
    std::vector<Interval> intervals_;
};

}  // namespace bandflow
