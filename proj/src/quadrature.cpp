#include "bandflow/quadrature.hpp"

#include <array>
#include <cmath>

namespace bandflow {

namespace {

struct Panel {
    double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

QuadratureResult refine(const std::function<double(double)>& f, const Panel& p, double tol, int depth) {
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double diff = left + right - p.whole;
    if (std::abs(diff) <= 15.0 * tol) return {left + right + diff / 15.0, std::abs(diff) / 15.0, true};
    if (depth <= 0) return {left + right + diff / 15.0, std::abs(diff) / 15.0, false};
    const auto l = refine(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1);
    const auto r = refine(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
    return {l.value + r.value, l.error_estimate + r.error_estimate, l.converged && r.converged};
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
constexpr std::array<double, 8> kNodes = {
    0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
    0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr std::array<double, 8> kWeights = {
    0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
    0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                                  int max_depth) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return refine(f, {a, b, fa, fm, fb, simpson(a, b, fa, fm, fb)}, tol, max_depth);
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
    const double w = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * w;
        const double half = 0.5 * w;
        const double mid = lo + half;
        double s = 0.0;
        for (std::size_t i = 0; i < kNodes.size(); ++i)
            s += kWeights[i] * (f(mid - half * kNodes[i]) + f(mid + half * kNodes[i]));
        total += half * s;
    }
    return total;
}

}  // namespace bandflow
