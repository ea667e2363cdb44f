#pragma once

#include <complex>
#include <vector>

namespace bandflow::detail {

/// Forward DFT X_k = sum_j x_j e^{-2 pi i jk/N} (FFTW, estimate planning).
std::vector<std::complex<double>> forward_dft(std::vector<std::complex<double>> x);

}  // namespace bandflow::detail
