#include "bandflow/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bandflow/error.hpp"
#include "bandflow/kernel.hpp"
#include "fft.hpp"

namespace bandflow {

namespace {

constexpr int kResampleOrder = 6;
constexpr double kResampleTol = 1e-10;

double max_abs(std::span<const cplx> v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

bool near_integer(double x, double tol = 1e-9) { return std::abs(x - std::round(x)) <= tol; }

}  // namespace

Signal::Signal(UniformGrid grid, std::vector<cplx> samples, std::optional<BandSpec> band,
               std::optional<double> value_bound)
    : grid_(grid), samples_(std::move(samples)), band_(std::move(band)), value_bound_(0.0) {
    if (samples_.size() != grid_.count())
        throw Error(ErrorCode::InvalidArgument, "sample count " + std::to_string(samples_.size()) +
                                                    " does not match grid count " + std::to_string(grid_.count()));
    const double m = max_abs(samples_);
    if (!std::isfinite(m)) throw Error(ErrorCode::InvalidArgument, "signal samples must be finite");
    if (value_bound) {
        if (!(*value_bound >= 0.0)) throw Error(ErrorCode::ValueBound, "value bound must be >= 0");
        if (m > *value_bound + 1e-12)
            throw Error(ErrorCode::ValueBound, "sample magnitude exceeds the declared value bound");
        value_bound_ = *value_bound;
    } else {
        value_bound_ = m;
    }
}

Signal Signal::from_real(UniformGrid grid, std::span<const double> values, std::optional<BandSpec> band) {
    std::vector<cplx> v(values.begin(), values.end());
    return Signal(grid, std::move(v), std::move(band));
}

bool Signal::is_real(double tol) const noexcept {
    return std::all_of(samples_.begin(), samples_.end(), [tol](const cplx& z) { return std::abs(z.imag()) <= tol; });
}

std::vector<double> Signal::real_part() const {
    std::vector<double> v(samples_.size());
    std::transform(samples_.begin(), samples_.end(), v.begin(), [](const cplx& z) { return z.real(); });
    return v;
}

std::vector<double> Signal::imag_part() const {
    std::vector<double> v(samples_.size());
    std::transform(samples_.begin(), samples_.end(), v.begin(), [](const cplx& z) { return z.imag(); });
    return v;
}

Signal Signal::slice(std::size_t first, std::size_t n) const {
    auto g = grid_.slice(first, n);
    std::vector<cplx> v(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                        samples_.begin() + static_cast<std::ptrdiff_t>(first + n));
    return Signal(g, std::move(v), band_);
}

Signal Signal::restrict_to(const UniformGrid& window) const {
    const auto ov = overlap(grid_, window);
    if (ov.first_b != 0 || ov.count != window.count())
        throw Error(ErrorCode::InsufficientCoverage, "window is not contained in the signal grid");
    return slice(ov.first_a, ov.count);
}

Signal Signal::crop(double lo, double hi) const {
    const double h = grid_.spacing();
    const double a = std::ceil((lo - grid_.t_min()) / h - 1e-9);
    const double b = std::floor((hi - grid_.t_min()) / h + 1e-9);
    const double first = std::max(0.0, a);
    const double last = std::min(static_cast<double>(grid_.count() - 1), b);
    if (last - first < 1.0) throw Error(ErrorCode::InsufficientCoverage, "crop window holds fewer than 2 points");
    return slice(static_cast<std::size_t>(first), static_cast<std::size_t>(last - first) + 1);
}

Signal Signal::with_band(std::optional<BandSpec> band) const { return Signal(grid_, samples_, std::move(band), value_bound_); }

double max_difference_quotient(const Signal& f) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) m = std::max(m, std::abs(f[i + 1] - f[i]));
    return m / f.grid().spacing();
}

double sup_distance(const Signal& f, const Signal& g) {
    const auto ov = overlap(f.grid(), g.grid());
    double m = 0.0;
    for (std::size_t i = 0; i < ov.count; ++i) m = std::max(m, std::abs(f[ov.first_a + i] - g[ov.first_b + i]));
    return m;
}

DistanceD distance_D(const Signal& f, const Signal& g, int n_max) {
    if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
    const auto ov = overlap(f.grid(), g.grid());
    const double lo = f.grid().time(ov.first_a);
    const double hi = f.grid().time(ov.first_a + ov.count - 1);
    const double slack = 1e-9 * f.grid().spacing();
    if (lo > -n_max + slack || hi < n_max - slack)
        throw Error(ErrorCode::InsufficientCoverage, "common grid [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                                         "] does not cover [-n_max, n_max] for n_max = " +
                                                         std::to_string(n_max));
    // window_max[n] = max |f-g| over grid points with |t| <= n
    std::vector<double> window_max(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (std::size_t i = 0; i < ov.count; ++i) {
        const double t = std::abs(f.grid().time(ov.first_a + i));
        const double level = std::max(1.0, std::ceil(t - slack));
        if (level > n_max) continue;
        auto& slot = window_max[static_cast<std::size_t>(level)];
        slot = std::max(slot, std::abs(f[ov.first_a + i] - g[ov.first_b + i]));
    }
    double value = 0.0;
    double running = 0.0;
    double weight = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        running = std::max(running, window_max[static_cast<std::size_t>(n)]);
        weight *= 0.5;
        value += weight * running;
    }
    return {value, weight * (f.value_bound() + g.value_bound())};
}

Signal translate(const Signal& f, double t) {
    const auto& grid = f.grid();
    const double h = grid.spacing();
    const double steps = t / h;
    if (t == 0.0) return f;
    if (near_integer(steps) || !f.band()) {
        const auto k = static_cast<std::int64_t>(std::llround(steps));
        return Signal(grid.shifted_back(k), std::vector<cplx>(f.samples().begin(), f.samples().end()), f.band(),
                      f.value_bound());
    }
    const double a = f.band()->max_abs();
    if (!(2.0 * a * h < 1.0)) throw Error(ErrorCode::NyquistViolation, "declared band exceeds the grid Nyquist limit");
    const double eps = std::min(1.0, 1.0 - 2.0 * a * h);
    if (eps < 0.05) throw Error(ErrorCode::KernelTooWide, "declared band leaves too little room for interpolation");
    const InterpKernel kernel(eps, kResampleOrder);
    const int radius = kernel.truncation_radius(kResampleTol);
    const auto n = static_cast<std::int64_t>(grid.count());
    const auto base = static_cast<std::int64_t>(std::floor(steps));
    const std::int64_t first = std::max<std::int64_t>(0, radius - base);
    const std::int64_t last = std::min<std::int64_t>(n - 1, n - 2 - radius - base);
    if (last - first < 1)
        throw Error(ErrorCode::InsufficientPadding, "grid too short for band-limited shift by " + std::to_string(t));
    std::vector<cplx> out(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t i = first; i <= last; ++i) {
        const double c = static_cast<double>(i) + steps;
        const std::int64_t centre = i + base;
        cplx acc = 0.0;
        for (std::int64_t k = centre - radius; k <= centre + radius + 1; ++k)
            acc += f[static_cast<std::size_t>(k)] * kernel(c - static_cast<double>(k));
        out[static_cast<std::size_t>(i - first)] = acc;
    }
    const auto out_grid = grid.slice(static_cast<std::size_t>(first), out.size());
    return Signal(out_grid, std::move(out), f.band());
}

Signal translate_onto(const Signal& f, double t, const UniformGrid& target) {
    const auto& grid = f.grid();
    const double x = (target.t_min() + t - grid.t_min()) / grid.spacing();
    if (std::abs(target.spacing() - grid.spacing()) > 1e-12 * grid.spacing() || !near_integer(x, 1e-6))
        throw Error(ErrorCode::GridMismatch, "shifted target grid is not on the signal lattice");
    const auto k = static_cast<std::int64_t>(std::llround(x));
    if (k < 0 || k + static_cast<std::int64_t>(target.count()) > static_cast<std::int64_t>(grid.count()))
        throw Error(ErrorCode::InsufficientPadding, "shift by " + std::to_string(t) + " leaves the padded grid");
    std::vector<cplx> out(f.samples().begin() + k, f.samples().begin() + k + static_cast<std::int64_t>(target.count()));
    return Signal(target, std::move(out), f.band(), f.value_bound());
}

namespace {

std::vector<double> taper_weights(std::size_t n, Taper taper) {
    std::vector<double> w(n, 1.0);
    if (taper == Taper::Hann) {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return w;
}

struct TaperedSpectrum {
    std::vector<SpectralLine> lines;
    double weight_sum;
    double weight_sq_sum;
};

TaperedSpectrum tapered_spectrum(const Signal& f, Taper taper) {
    const std::size_t n = f.size();
    if (n < 16) throw Error(ErrorCode::InvalidArgument, "spectrum needs at least 16 samples");
    const auto w = taper_weights(n, taper);
    std::vector<cplx> x(n);
    double ws = 0.0, ws2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = w[i] * f[i];
        ws += w[i];
        ws2 += w[i] * w[i];
    }
    const auto y = detail::forward_dft(std::move(x));
    const double h = f.grid().spacing();
    const double t0 = f.grid().t_min();
    const auto ni = static_cast<std::int64_t>(n);
    const std::int64_t k_lo = -((ni - 1) / 2);
    const std::int64_t k_hi = ni / 2;
    std::vector<SpectralLine> lines;
    lines.reserve(n);
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        const double nu = static_cast<double>(k) / (static_cast<double>(ni) * h);
        const auto& yk = y[static_cast<std::size_t>((k % ni + ni) % ni)];
        const cplx phase = std::polar(1.0, -2.0 * std::numbers::pi * std::remainder(nu * t0, 1.0));
        lines.push_back({nu, yk * phase / ws});
    }
    return {std::move(lines), ws, ws2};
}

}  // namespace

std::vector<SpectralLine> dft_spectrum(const Signal& f, Taper taper) { return tapered_spectrum(f, taper).lines; }

double band_energy_outside(const Signal& f, const BandSpec& band, Taper taper, double energy_floor) {
    if (band.empty()) throw Error(ErrorCode::EmptyBand, "band holds no interval");
    if (f.size() < 64) throw Error(ErrorCode::InvalidArgument, "band energy needs at least 64 samples");
    const auto spec = tapered_spectrum(f, taper);
    double total = 0.0, outside = 0.0;
    for (const auto& line : spec.lines) {
        const double e = std::norm(line.amplitude);
        total += e;
        if (!band.contains(line.frequency)) outside += e;
    }
    // Parseval: sum_k |X_k|^2 = N sum |w f|^2 / (sum w)^2, so mean tapered power P maps to
    // energy P N sum w^2 / (sum w)^2.
    const double n = static_cast<double>(f.size());
    const double floor_energy = energy_floor * n * spec.weight_sq_sum / (spec.weight_sum * spec.weight_sum);
    const double denom = std::max(total, floor_energy);
    if (denom <= 0.0) return 0.0;
    return std::min(1.0, outside / denom);
}

}  // namespace bandflow
