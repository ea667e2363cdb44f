#include "bandflow/band.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bandflow/error.hpp"

namespace bandflow {

namespace {

std::vector<Interval> normalise(std::vector<Interval> parts) {
    for (const auto& p : parts) {
        if (!(p.lo <= p.hi) || !std::isfinite(p.lo) || !std::isfinite(p.hi))
            throw Error(ErrorCode::InvalidArgument, "band interval needs finite lo <= hi");
    }
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& p : parts) {
        if (!out.empty() && p.lo <= out.back().hi) {
            out.back().hi = std::max(out.back().hi, p.hi);
        } else {
            out.push_back(p);
        }
    }
    if (out.size() > 2) throw Error(ErrorCode::InvalidArgument, "band may hold at most two intervals");
    return out;
}

}  // namespace

BandSpec::BandSpec(Interval a) : intervals_(normalise({a})) {}

BandSpec::BandSpec(Interval a, Interval b) : intervals_(normalise({a, b})) {}

BandSpec::BandSpec(std::vector<Interval> parts) : intervals_(normalise(std::move(parts))) {}

BandSpec BandSpec::dilated(double margin) const {
    std::vector<Interval> parts = intervals_;
    for (auto& p : parts) {
        p.lo -= margin;
        p.hi += margin;
    }
    return BandSpec(std::move(parts));
}

BandSpec BandSpec::symmetrized() const {
    std::vector<Interval> parts = intervals_;
    for (const auto& p : intervals_) parts.push_back({-p.hi, -p.lo});
    // Up to four pieces before merging; merge everything that touches.
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (const auto& p : parts) {
        if (!merged.empty() && p.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, p.hi);
        } else {
            merged.push_back(p);
        }
    }
    if (merged.size() > 2) {
        // Keep the representation within two intervals by taking the symmetric hull.
        double m = 0.0;
        for (const auto& p : merged) m = std::max({m, std::abs(p.lo), std::abs(p.hi)});
        return BandSpec(Interval{-m, m});
    }
    return BandSpec(std::move(merged));
}

bool BandSpec::contains(double nu) const noexcept {
    return std::any_of(intervals_.begin(), intervals_.end(), [nu](const Interval& p) { return p.contains(nu); });
}

bool BandSpec::is_symmetric() const noexcept {
    for (const auto& p : intervals_) {
        const bool mirrored = std::any_of(intervals_.begin(), intervals_.end(), [&](const Interval& q) {
            return std::abs(q.lo + p.hi) <= 1e-12 && std::abs(q.hi + p.lo) <= 1e-12;
        });
        if (!mirrored) return false;
    }
    return true;
}

double BandSpec::max_abs() const noexcept {
    double m = 0.0;
    for (const auto& p : intervals_) m = std::max({m, std::abs(p.lo), std::abs(p.hi)});
    return m;
}

bool BandSpec::subset_of(const BandSpec& other) const noexcept {
    return std::all_of(intervals_.begin(), intervals_.end(), [&](const Interval& p) {
        return std::any_of(other.intervals_.begin(), other.intervals_.end(),
                           [&](const Interval& q) { return q.lo <= p.lo && p.hi <= q.hi; });
    });
}

std::string BandSpec::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        if (i) os << " u ";
        os << '[' << intervals_[i].lo << ", " << intervals_[i].hi << ']';
    }
    return os.str();
}

}  // namespace bandflow
