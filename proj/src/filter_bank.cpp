#include "bandflow/filter_bank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bandflow/error.hpp"
#include "bandflow/kernel.hpp"
#include "bandflow/quadrature.hpp"

namespace bandflow {

namespace {

constexpr double kPi = std::numbers::pi;

// Width of the linear ramps of the roof; the roof is box(alpha) * box(ramp) / ramp.
double ramp_width(double alpha, double beta) { return std::min(beta - alpha, alpha); }

std::size_t taps_for(double half_width, double h) { return static_cast<std::size_t>(std::floor(half_width / h + 1e-9)); }

}  // namespace

void FilterBankConfig::validate() const {
    if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "bank needs N >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "tent alpha and beta must be > 0");
    if (beta < alpha) throw Error(ErrorCode::InvalidArgument, "beta < alpha leaves gaps between the filters");
    if (!(half_width >= 20.0)) throw Error(ErrorCode::InvalidArgument, "kernel half-width A must be >= 20");
    if (!(quadrature_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "quadrature step must be > 0");
}

TentFilter::TentFilter(int n, const FilterBankConfig& cfg)
    : n_(n), alpha_(cfg.alpha), beta_(cfg.beta), ramp_(0.0), half_width_(cfg.half_width), k_{} {
    cfg.validate();
    ramp_ = ramp_width(alpha_, beta_);
    k_ = bandflow::k_norm(*this, half_width_, cfg.quadrature_step);
}

double TentFilter::tent(double nu) const noexcept {
    const double x = std::abs(nu - centre());
    const double top = 0.5 * (alpha_ - ramp_);
    if (x <= top) return 1.0;
    if (x >= top + ramp_) return 0.0;
    return (top + ramp_ - x) / ramp_;
}

cplx TentFilter::phi(double t) const noexcept {
    const double envelope = alpha_ * sinc(alpha_ * t) * sinc(ramp_ * t);
    // Reduce the phase n alpha t modulo 1 so large t keeps full accuracy.
    const double cycles = std::remainder(static_cast<double>(n_) * alpha_ * t, 1.0);
    return std::polar(envelope, 2.0 * kPi * cycles);
}

BandSpec TentFilter::band() const {
    const double half = 0.5 * (alpha_ + ramp_);
    return BandSpec(Interval{centre() - half, centre() + half});
}

BandSpec tent_band(int n, const FilterBankConfig& cfg) {
    const double half = 0.5 * (cfg.alpha + ramp_width(cfg.alpha, cfg.beta));
    const double centre = n * cfg.alpha;
    return BandSpec(Interval{centre - half, centre + half});
}

double tent_eval(const TentFilter& f, double nu) { return f.tent(nu); }

cplx phi_eval(const TentFilter& f, double t) { return f.phi(t); }

KNorm k_norm(const TentFilter& f, double half_width, double panel) {
    const auto panels = static_cast<int>(std::ceil(half_width / panel - 1e-9));
    auto mag = [&f](double t) { return std::abs(f.phi(t)); };
    double value = 0.0;
    double err = 0.0;
    // |phi_n| is even; integrate [0, A] panel by panel so zeros of the envelope cannot fool the
    // error estimate.
    for (int p = 0; p < panels; ++p) {
        const double a = p * panel;
        const double b = std::min(half_width, a + panel);
        const auto r = adaptive_simpson(mag, a, b, 1e-13);
        if (!r.converged)
            throw Error(ErrorCode::QuadratureDiverged, "k_n quadrature did not converge on [" + std::to_string(a) +
                                                           ", " + std::to_string(b) + "]");
        value += 2.0 * r.value;
        err += 2.0 * r.error_estimate;
    }
    // Beyond A, |phi| = |sin(pi alpha t) sin(pi w t)| / (pi^2 w t^2); replace the numerator by its mean.
    const double w = std::min(f.alpha(), f.beta() - f.alpha());
    const double mean = (std::abs(w - f.alpha()) <= 1e-15) ? 0.5 : 4.0 / (kPi * kPi);
    const double tail = 2.0 * mean / (kPi * kPi * w * half_width);
    // Oscillating remainder: |int_A^inf cos(2 pi w t)/t^2| <= 1/(2 pi w A^2) per side.
    const double tail_bound = 1.0 / (kPi * kPi * kPi * w * w * half_width * half_width);
    return {value + tail, err, tail, tail_bound};
}

Signal convolve_kernel(const Signal& h, const TentFilter& f) {
    const auto& grid = h.grid();
    const double step = grid.spacing();
    const std::size_t k = taps_for(f.half_width(), step);
    if (grid.count() < 2 * k + 2)
        throw Error(ErrorCode::InsufficientPadding, "grid of " + std::to_string(grid.count()) +
                                                        " points is too short for kernel half-width " +
                                                        std::to_string(f.half_width()));
    const std::size_t taps = 2 * k + 1;
    std::vector<cplx> kernel(taps);
    for (std::size_t j = 0; j < taps; ++j) {
        const double s = (static_cast<double>(j) - static_cast<double>(k)) * step;
        kernel[j] = step * f.phi(s);
    }
    const std::size_t n_out = grid.count() - 2 * k;
    std::vector<cplx> out(n_out);
    const auto in = h.samples();
    if (h.is_real()) {
        std::vector<double> re(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) re[i] = in[i].real();
        std::vector<double> kr(taps), ki(taps);
        for (std::size_t j = 0; j < taps; ++j) {
            kr[j] = kernel[j].real();
            ki[j] = kernel[j].imag();
        }
        for (std::size_t i = 0; i < n_out; ++i) {
            // output at input index i + k: sum_j h[i + k - (j - k)] phi((j - k) step)
            const double* src = re.data() + i + 2 * k;
            double sr = 0.0, si = 0.0;
            for (std::size_t j = 0; j < taps; ++j) {
                sr += src[-static_cast<std::ptrdiff_t>(j)] * kr[j];
                si += src[-static_cast<std::ptrdiff_t>(j)] * ki[j];
            }
            out[i] = cplx(sr, si);
        }
    } else {
        for (std::size_t i = 0; i < n_out; ++i) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < taps; ++j) acc += in[i + 2 * k - j] * kernel[j];
            out[i] = acc;
        }
    }
    const auto out_grid = grid.slice(k, n_out);
    return Signal(out_grid, std::move(out), f.band());
}

Signal bandpass(const Signal& h, const TentFilter& f) {
    if (h.value_bound() > 1.0)
        throw Error(ErrorCode::ValueBound, "bandpass input needs value bound <= 1, got " + std::to_string(h.value_bound()));
    const auto raw = convolve_kernel(h, f);
    std::vector<cplx> v(raw.samples().begin(), raw.samples().end());
    for (auto& z : v) z /= f.k();
    return Signal(raw.grid(), std::move(v), f.band());
}

Signal partition_reconstruct(const Signal& h, const FilterBankConfig& bank) {
    bank.validate();
    const double reach = bank.n_max * bank.alpha;
    const BandSpec covered = BandSpec::symmetric(reach);
    if (h.band()) {
        if (!h.band()->subset_of(covered))
            throw Error(ErrorCode::BandCoverage, "declared band " + h.band()->to_string() + " exceeds bank coverage " +
                                                     covered.to_string());
    } else if (h.size() >= 64 && band_energy_outside(h, covered) > 1e-3) {
        throw Error(ErrorCode::BandCoverage, "spectrum exceeds bank coverage " + covered.to_string());
    }
    Signal sum = convolve_kernel(h, TentFilter(-bank.n_max, bank));
    std::vector<cplx> acc(sum.samples().begin(), sum.samples().end());
    for (int n = -bank.n_max + 1; n <= bank.n_max; ++n) {
        const auto part = convolve_kernel(h, TentFilter(n, bank));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += part[i];
    }
    return Signal(sum.grid(), std::move(acc), h.band());
}

std::pair<Signal, Signal> real_imag_split(const Signal& g, const BandSpec& band) {
    const auto sym = band.symmetrized();
    const auto re = g.real_part();
    const auto im = g.imag_part();
    return {Signal::from_real(g.grid(), re, sym), Signal::from_real(g.grid(), im, sym)};
}

io::CsvTable kernel_table(const TentFilter& f, double step) {
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "kernel table step must be > 0");
    io::CsvTable t{{"t", "re", "im"}, {}};
    const auto k = static_cast<long>(std::floor(f.half_width() / step + 1e-9));
    for (long i = -k; i <= k; ++i) {
        const double s = static_cast<double>(i) * step;
        const cplx v = f.phi(s);
        t.rows.push_back({io::format_double(s), io::format_double(v.real()), io::format_double(v.imag())});
    }
    return t;
}

}  // namespace bandflow
