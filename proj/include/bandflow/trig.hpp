#pragma once

#include <cstdint>
#include <vector>

#include "bandflow/band.hpp"
#include "bandflow/signal.hpp"

namespace bandflow {

/// f(z) = sum_k c_k e^{2 pi i nu_k z}, evaluated exactly for real and complex z.
struct TrigPolynomial {
    std::vector<double> frequencies;
    std::vector<cplx> coefficients;

    cplx operator()(double t) const noexcept;
    cplx operator()(cplx z) const noexcept;

    double max_abs_frequency() const noexcept;
    /// sum |c_k|, an upper bound of the sup norm.
    double coefficient_l1() const noexcept;
    /// Conjugate-symmetric (real-valued on the line).
    bool is_real() const noexcept;

    Signal sample(const UniformGrid& grid, std::optional<BandSpec> band = std::nullopt) const;
};

/// Real trigonometric polynomial sum_k a_k cos(2 pi nu_k t + phase_k) with nu_k drawn in
/// [lo, hi] (lo >= 0), amplitudes scaled so the coefficient l1 norm equals `l1`.
TrigPolynomial random_real_trig(std::uint64_t seed, int terms, double lo, double hi, double l1 = 1.0);

/// Complex polynomial with frequencies in [lo, hi] and coefficient l1 norm `l1`.
TrigPolynomial random_complex_trig(std::uint64_t seed, int terms, double lo, double hi, double l1 = 1.0);

TrigPolynomial cosine(double amplitude, double frequency, double phase = 0.0);

}  // namespace bandflow
