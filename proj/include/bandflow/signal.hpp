#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "bandflow/band.hpp"
#include "bandflow/grid.hpp"

namespace bandflow {

using cplx = std::complex<double>;

/// Complex samples on a uniform grid with an optional declared spectral band and a
/// sup-norm certificate.
///
/// The value bound defaults to the sample maximum. A caller-supplied bound is checked
/// against the samples.
class Signal {
public:
    Signal(UniformGrid grid, std::vector<cplx> samples, std::optional<BandSpec> band = std::nullopt,
           std::optional<double> value_bound = std::nullopt);

    static Signal from_real(UniformGrid grid, std::span<const double> values,
                            std::optional<BandSpec> band = std::nullopt);

    template <typename F>
    static Signal sample(const UniformGrid& grid, F&& f, std::optional<BandSpec> band = std::nullopt) {
        std::vector<cplx> v(grid.count());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(f(grid.time(i)));
        return Signal(grid, std::move(v), std::move(band));
    }

    const UniformGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> samples() const noexcept { return samples_; }
    const cplx& operator[](std::size_t i) const noexcept { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }
    const std::optional<BandSpec>& band() const noexcept { return band_; }
    double value_bound() const noexcept { return value_bound_; }

    bool is_real(double tol = 0.0) const noexcept;
    std::vector<double> real_part() const;
    std::vector<double> imag_part() const;

    /// Samples restricted to [first, first + n).
    Signal slice(std::size_t first, std::size_t n) const;
    /// Samples on the points of `window` (must be an aligned sub-grid).
    Signal restrict_to(const UniformGrid& window) const;
    /// Grid points with t in [lo, hi].
    Signal crop(double lo, double hi) const;

    Signal with_band(std::optional<BandSpec> band) const;

private:
    UniformGrid grid_;
    std::vector<cplx> samples_;
    std::optional<BandSpec> band_;
    double value_bound_;
};

/// max_i |f_{i+1} - f_i| / h.
double max_difference_quotient(const Signal& f);

/// Sup of |f - g| over the common grid points.
double sup_distance(const Signal& f, const Signal& g);

struct DistanceD {
    double value;
    /// 2^{-n_max} (bound_f + bound_g): the neglected part of the series.
    double tail_bound;
};

/// sum_{n=1}^{n_max} 2^{-n} max_{|t|<=n} |f(t) - g(t)| over grid points.
DistanceD distance_D(const Signal& f, const Signal& g, int n_max = 30);

/// sigma_t f = f(. + t).
///
/// Multiples of the spacing relabel the grid and keep the samples bit-for-bit. Other
/// shifts use band-limited interpolation when a band is declared (output restricted to
/// the interior where the kernel sum is complete), otherwise the nearest grid shift.
Signal translate(const Signal& f, double t);

/// sigma_t f sampled on `target`; every target point must map onto a point of f's grid.
Signal translate_onto(const Signal& f, double t, const UniformGrid& target);

enum class Taper { Rectangular, Hann };

struct SpectralLine {
    double frequency;
    cplx amplitude;
};

/// Tapered discrete Fourier transform, frequencies ascending over (-1/2h, 1/2h].
///
/// Amplitudes are normalised by the taper sum, so e^{2 pi i tau t} on a bin gives
/// amplitude 1 at tau. Phases are referenced to t = 0.
std::vector<SpectralLine> dft_spectrum(const Signal& f, Taper taper = Taper::Hann);

/// Relative tapered L2 energy outside `band`.
///
/// Energy below `energy_floor` (mean power per sample) is treated as zero content: the
/// ratio is taken against max(total, floor). With the default floor of zero, the zero
/// signal returns 0.
double band_energy_outside(const Signal& f, const BandSpec& band, Taper taper = Taper::Hann,
                           double energy_floor = 0.0);

}  // namespace bandflow
