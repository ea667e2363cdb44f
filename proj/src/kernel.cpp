#include "bandflow/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bandflow/error.hpp"

namespace bandflow {

double sinpi(double x) noexcept {
    const double k = std::round(x);
    const double r = x - k;  // exact, |r| <= 1/2
    const double s = std::sin(std::numbers::pi * r);
    return (std::fmod(std::abs(k), 2.0) == 1.0) ? -s : s;
}

double sinc(double x) noexcept {
    if (x == 0.0) return 1.0;
    return sinpi(x) / (std::numbers::pi * x);
}

InterpKernel::InterpKernel(double eps, int order) : eps_(eps), order_(order) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::InvalidArgument, "kernel eps must be > 0");
    if (order < 2) throw Error(ErrorCode::InvalidArgument, "kernel order m must be >= 2");
}

InterpKernel InterpKernel::for_lattice(double a, double d, int order) {
    if (!(2.0 * a * d < 1.0)) throw Error(ErrorCode::NyquistViolation, "2ad must be < 1");
    return InterpKernel(std::min(1.0, 1.0 - 2.0 * a * d), order);
}

double InterpKernel::operator()(double t) const noexcept {
    const double s = sinc(eps_ * t / order_);
    double p = 1.0;
    for (int i = 0; i < order_; ++i) p *= s;
    return sinc(t) * p;
}

double InterpKernel::envelope(double t) const noexcept {
    const double a = std::abs(t);
    const double outer = std::min(1.0, 1.0 / (std::numbers::pi * a));
    const double inner = std::min(1.0, order_ / (std::numbers::pi * eps_ * a));
    return outer * std::pow(inner, order_);
}

int InterpKernel::truncation_radius(double tol) const noexcept {
    const double m = order_;
    const double knee = m / (std::numbers::pi * eps_);
    const double c = std::pow(knee, m) / std::numbers::pi;
    // sum_{|k|>R} c |k|^{-(m+1)} <= 2 c R^{-m} / m
    const double r = std::pow(2.0 * c / (m * tol), 1.0 / m);
    return static_cast<int>(std::min(1e7, std::ceil(std::max(knee, r)) + 1.0));
}

double interp_kernel_eval(const InterpKernel& k, double t) { return k(t); }

double reconstruct_from_lattice(std::span<const LatticeSample> samples, double d, double band_half_width,
                                const InterpKernel& k, double t) {
    if (!(d > 0.0) || !(band_half_width >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "lattice spacing must be > 0 and band half-width >= 0");
    if (!(2.0 * band_half_width * d < 1.0)) throw Error(ErrorCode::NyquistViolation, "2ad must be < 1");
    if (band_half_width * d > k.passband_half_width() + 1e-12)
        throw Error(ErrorCode::KernelTooWide, "kernel passband (1-eps)/2 is narrower than a*d");
    double acc = 0.0;
    for (const auto& s : samples) acc += s.value * k((t - s.position) / d);
    return acc;
}

}  // namespace bandflow
