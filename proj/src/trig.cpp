#include "bandflow/trig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bandflow/rng.hpp"

namespace bandflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

cplx TrigPolynomial::operator()(double t) const noexcept {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < frequencies.size(); ++k) acc += coefficients[k] * std::polar(1.0, kTwoPi * frequencies[k] * t);
    return acc;
}

cplx TrigPolynomial::operator()(cplx z) const noexcept {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
        // e^{2 pi i nu (x + i y)} = e^{-2 pi nu y} e^{2 pi i nu x}
        const double nu = frequencies[k];
        acc += coefficients[k] * std::exp(-kTwoPi * nu * z.imag()) * std::polar(1.0, kTwoPi * nu * z.real());
    }
    return acc;
}

double TrigPolynomial::max_abs_frequency() const noexcept {
    double m = 0.0;
    for (double f : frequencies) m = std::max(m, std::abs(f));
    return m;
}

double TrigPolynomial::coefficient_l1() const noexcept {
    double s = 0.0;
    for (const auto& c : coefficients) s += std::abs(c);
    return s;
}

bool TrigPolynomial::is_real() const noexcept {
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
        bool found = false;
        for (std::size_t j = 0; j < frequencies.size() && !found; ++j)
            found = frequencies[j] == -frequencies[k] && std::abs(coefficients[j] - std::conj(coefficients[k])) <= 1e-15;
        if (!found) return false;
    }
    return true;
}

Signal TrigPolynomial::sample(const UniformGrid& grid, std::optional<BandSpec> band) const {
    std::vector<cplx> v(grid.count());
    const bool real = is_real();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const cplx z = (*this)(grid.time(i));
        v[i] = real ? cplx(z.real(), 0.0) : z;
    }
    return Signal(grid, std::move(v), std::move(band));
}

TrigPolynomial cosine(double amplitude, double frequency, double phase) {
    if (frequency == 0.0) return {{0.0}, {cplx(amplitude * std::cos(phase), 0.0)}};
    const cplx c = 0.5 * amplitude * std::polar(1.0, phase);
    return {{frequency, -frequency}, {c, std::conj(c)}};
}

TrigPolynomial random_real_trig(std::uint64_t seed, int terms, double lo, double hi, double l1) {
    auto rng = make_rng(seed, 0x7269);
    std::vector<double> amp(terms), freq(terms), phase(terms);
    double total = 0.0;
    for (int k = 0; k < terms; ++k) {
        amp[k] = uniform(rng, 0.2, 1.0);
        freq[k] = uniform(rng, lo, hi);
        phase[k] = uniform(rng, 0.0, kTwoPi);
        total += amp[k];
    }
    TrigPolynomial p;
    for (int k = 0; k < terms; ++k) {
        auto c = cosine(l1 * amp[k] / total, freq[k], phase[k]);
        p.frequencies.insert(p.frequencies.end(), c.frequencies.begin(), c.frequencies.end());
        p.coefficients.insert(p.coefficients.end(), c.coefficients.begin(), c.coefficients.end());
    }
    return p;
}

TrigPolynomial random_complex_trig(std::uint64_t seed, int terms, double lo, double hi, double l1) {
    auto rng = make_rng(seed, 0x6370);
    TrigPolynomial p;
    double total = 0.0;
    for (int k = 0; k < terms; ++k) {
        const double a = uniform(rng, 0.2, 1.0);
        p.frequencies.push_back(uniform(rng, lo, hi));
        p.coefficients.push_back(std::polar(a, uniform(rng, 0.0, kTwoPi)));
        total += a;
    }
    for (auto& c : p.coefficients) c *= l1 / total;
    return p;
}

}  // namespace bandflow
