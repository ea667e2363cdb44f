#pragma once

#include <utility>
#include <vector>

#include "bandflow/band.hpp"
#include "bandflow/io.hpp"
#include "bandflow/signal.hpp"

namespace bandflow {

/// Truncated bank n in [-N, N] of tent filters with centre spacing alpha and support width beta.
///
/// alpha <= beta <= 2 alpha gives trapezoid roofs (tents when beta = 2 alpha) that sum to one.
/// For beta > 2 alpha the bank keeps the width-2alpha tents inside each support, which
/// still covers the line. beta < alpha leaves gaps and is rejected.
struct FilterBankConfig {
    int n_max = 4;
    double alpha = 0.5;
    double beta = 1.0;
    /// Kernel truncation radius A (time units).
    double half_width = 40.0;
    /// Panel width of the adaptive quadrature that computes k_n.
    double quadrature_step = 1.0;

    void validate() const;
};

struct KNorm {
    double value;
    double quadrature_error;
    /// Mean-value estimate of the integral beyond |t| = A, already included in value.
    double tail_correction;
    /// Bound on the error of the tail estimate.
    double tail_bound;
};

class TentFilter {
public:
    explicit TentFilter(int n, const FilterBankConfig& cfg = {});

    int index() const noexcept { return n_; }
    double centre() const noexcept { return n_ * alpha_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double half_width() const noexcept { return half_width_; }

    /// xi_n(nu), in [0, 1].
    double tent(double nu) const noexcept;
    /// phi_n(t) = int xi_n(nu) e^{2 pi i nu t} dnu in closed form.
    cplx phi(double t) const noexcept;
    /// Support of xi_n.
    BandSpec band() const;

    const KNorm& k_norm() const noexcept { return k_; }
    double k() const noexcept { return k_.value; }

private:
    int n_;
    double alpha_;
    double beta_;
    double ramp_;
    double half_width_;
    KNorm k_;
};

/// Support of xi_n without building the filter.
BandSpec tent_band(int n, const FilterBankConfig& cfg);

double tent_eval(const TentFilter& f, double nu);
cplx phi_eval(const TentFilter& f, double t);

/// int |phi_n| over [-A, A] by panelled adaptive Simpson plus the analytic tail estimate.
/// Throws QuadratureDiverged when a panel fails to converge.
KNorm k_norm(const TentFilter& f, double half_width, double panel = 1.0);

/// (h * phi_n)/k_n by direct grid quadrature over |s| <= A.
///
/// The output lives on the input grid shrunk by A at both ends and declares the band of
/// xi_n. Requires value_bound(h) <= 1.
Signal bandpass(const Signal& h, const TentFilter& f);

/// Un-normalised h * phi_n (the quadrature behind bandpass).
Signal convolve_kernel(const Signal& h, const TentFilter& f);

/// sum_{n=-N..N} h * phi_n. Requires the spectrum of h inside [-N/2, N/2] (scaled by 2 alpha).
Signal partition_reconstruct(const Signal& h, const FilterBankConfig& bank);

/// (Re g, Im g), each declaring the symmetrized band.
std::pair<Signal, Signal> real_imag_split(const Signal& g, const BandSpec& band);

/// Columns t, re, im of phi_n sampled at spacing `step` over [-A, A].
io::CsvTable kernel_table(const TentFilter& f, double step);

}  // namespace bandflow
