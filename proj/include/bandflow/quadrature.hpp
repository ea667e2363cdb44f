#pragma once

#include <functional>

namespace bandflow {

struct QuadratureResult {
    double value;
    double error_estimate;
    bool converged;
};

/// Adaptive Simpson with Richardson correction.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                                  int max_depth = 48);

/// Composite Gauss-Legendre, `panels` equal panels of 16 nodes each.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels = 1);

}  // namespace bandflow
