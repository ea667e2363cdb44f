#pragma once

#include <span>
#include <utility>

namespace bandflow {

/// sin(pi x) with exact zeros at the integers.
double sinpi(double x) noexcept;

/// sin(pi x)/(pi x), sinc(0) = 1.
double sinc(double x) noexcept;

/// Cardinal interpolation kernel K(t) = sinc(t) * sinc(eps t / m)^m.
///
/// K(0) = 1 and K(n) = 0 at every other integer. Its spectrum is the unit box smoothed by an
/// m-fold box of total width eps, so it equals 1 on |nu| <= (1-eps)/2 and vanishes outside
/// |nu| <= (1+eps)/2. Decay is |K(t)| <= (1/(pi|t|)) (m/(pi eps |t|))^m.
class InterpKernel {
public:
    InterpKernel(double eps, int order = 4);

    /// Widest kernel that still reproduces a band of half-width a sampled at spacing d exactly:
    /// eps = min(1, 1 - 2ad).
    static InterpKernel for_lattice(double a, double d, int order = 4);

    double eps() const noexcept { return eps_; }
    int order() const noexcept { return order_; }
    double spectral_half_width() const noexcept { return 0.5 * (1.0 + eps_); }
    /// Half-width of the region where the spectrum is exactly 1.
    double passband_half_width() const noexcept { return 0.5 * (1.0 - eps_); }

    double operator()(double t) const noexcept;

    /// Upper bound of |K(t)| from the envelope (valid for |t| >= 1).
    double envelope(double t) const noexcept;
    /// Radius R (in lattice units) with sum_{|k| > R} envelope(k) <= tol.
    int truncation_radius(double tol) const noexcept;

private:
    double eps_;
    int order_;
};

double interp_kernel_eval(const InterpKernel& k, double t);

struct LatticeSample {
    double position;
    double value;
};

/// sum_n value_n K((t - position_n)/d).
///
/// Throws NyquistViolation when 2ad >= 1 and KernelTooWide when the kernel's flat passband
/// (1-eps)/2 is narrower than a*d.
double reconstruct_from_lattice(std::span<const LatticeSample> samples, double d, double band_half_width,
                                const InterpKernel& k, double t);

}  // namespace bandflow
