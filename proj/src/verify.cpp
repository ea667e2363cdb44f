#include "bandflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "bandflow/error.hpp"
#include "bandflow/io.hpp"
#include "bandflow/rng.hpp"

namespace bandflow {

namespace {

constexpr int kMaxHarmonic = 64;
constexpr double kHarmonicTol = 1e-8;
constexpr double kRatioTol = 1e-9;

RigidityReport rigidity(double gamma, double period, const Signal& probe) {
    if (!(gamma > 0.0) || !(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "need gamma > 0 and T > 0");
    const double h = probe.grid().spacing();
    const double steps = period / h;
    const auto p = static_cast<std::size_t>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(p)) > 1e-9 * steps)
        throw Error(ErrorCode::GridMismatch, "period " + io::format_double(period) + " is not a multiple of the spacing");
    if (p < 2 * kMaxHarmonic + 1)
        throw Error(ErrorCode::InvalidArgument, "need at least 129 samples per period, got " + std::to_string(p));
    if (probe.size() < p) throw Error(ErrorCode::InsufficientCoverage, "probe is shorter than one period");
    const double scale = std::max(1.0, probe.value_bound());
    for (std::size_t i = 0; i + p < probe.size(); ++i)
        if (std::abs(probe[i + p] - probe[i]) > 1e-9 * scale)
            throw Error(ErrorCode::InvalidArgument, "probe is not periodic with period " + io::format_double(period));

    RigidityReport r;
    r.c0 = 0.0;
    r.max_harmonic = 0.0;
    const double t0 = probe.grid().t_min();
    const auto pl = static_cast<long long>(p);
    for (int n = -kMaxHarmonic; n <= kMaxHarmonic; ++n) {
        cplx c = 0.0;
        // Only frequencies |n|/T <= gamma pass the box filter.
        if (std::abs(n) <= gamma * period + 1e-12) {
            for (std::size_t i = 0; i < p; ++i) {
                // Phase 2 pi n t_i / T with n i reduced mod P.
                const auto k = ((static_cast<long long>(n) * static_cast<long long>(i)) % pl + pl) % pl;
                const double phase =
                    2.0 * std::numbers::pi * (static_cast<double>(k) / static_cast<double>(p) + n * t0 / period);
                c += probe[i] * std::polar(1.0, -phase);
            }
            c /= static_cast<double>(p);
        }
        r.coefficients.push_back({n, c});
        if (n == 0)
            r.c0 = c;
        else
            r.max_harmonic = std::max(r.max_harmonic, std::abs(c));
    }
    auto& rep = r.report;
    rep.check = "periodic_rigidity";
    rep.parameters = {{"gamma", gamma}, {"period", period}, {"samples_per_period", p}};
    rep.margin = kHarmonicTol - r.max_harmonic;
    rep.pass = r.max_harmonic <= kHarmonicTol;
    rep.details = {{"c0_re", r.c0.real()}, {"c0_im", r.c0.imag()}, {"max_harmonic", r.max_harmonic}};
    return r;
}

// Squared distance between rows a and b of a flat table with m columns.
double row_distance_sq(const std::vector<double>& table, std::size_t a, std::size_t b, std::size_t m) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double d = table[a * m + k] - table[b * m + k];
        s += d * d;
    }
    return s;
}

}  // namespace

nlohmann::json CheckReport::to_json() const {
    nlohmann::json j{{"check", check},
                     {"parameters", parameters},
                     {"margin", margin},
                     {"verdict", pass ? "pass" : "fail"}};
    if (!details.is_null()) j["details"] = details;
    return j;
}

RigidityReport periodic_rigidity_check(double gamma, double period, const Signal& probe) {
    if (gamma * period >= 1.0)
        throw Error(ErrorCode::NyquistViolation,
                    "gamma T = " + io::format_double(gamma * period) + " is not below 1");
    return rigidity(gamma, period, probe);
}

RigidityReport periodic_rigidity_check_unchecked(double gamma, double period, const Signal& probe) {
    return rigidity(gamma, period, probe);
}

CheckReport paley_wiener_growth_check(const TrigPolynomial& f, double r, const std::vector<double>& ys) {
    if (!(r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be >= 0");
    if (f.frequencies.size() != f.coefficients.size())
        throw Error(ErrorCode::InvalidArgument, "frequency and coefficient counts differ");
    if (f.max_abs_frequency() > r + 1e-12)
        throw Error(ErrorCode::BandCoverage, "frequency " + io::format_double(f.max_abs_frequency()) +
                                                 " lies outside [-r, r] for r = " + io::format_double(r));
    // The root sum of squares is the mean square on the line, a lower bound of the sup norm,
    // once equal frequencies are merged.
    std::map<double, cplx> merged;
    for (std::size_t k = 0; k < f.frequencies.size(); ++k) merged[f.frequencies[k]] += f.coefficients[k];
    double l2 = 0.0;
    for (const auto& [nu, c] : merged) l2 += std::norm(c);
    double sup = std::sqrt(l2);
    for (int i = -5000; i <= 5000; ++i) sup = std::max(sup, std::abs(f(i * 0.01)));

    double ratio = 0.0;
    nlohmann::json per_y = nlohmann::json::array();
    for (double y : ys) {
        double peak = 0.0;
        for (int i = -5000; i <= 5000; ++i) peak = std::max(peak, std::abs(f(cplx(i * 0.01, y))));
        const double q = sup > 0.0 ? peak * std::exp(-2.0 * std::numbers::pi * r * std::abs(y)) / sup : 0.0;
        per_y.push_back({{"y", y}, {"ratio", q}});
        ratio = std::max(ratio, q);
    }
    CheckReport rep;
    rep.check = "paley_wiener_growth";
    rep.parameters = {{"r", r}, {"y", ys}, {"terms", f.frequencies.size()}};
    rep.margin = 1.0 + kRatioTol - ratio;
    rep.pass = ratio <= 1.0 + kRatioTol;
    rep.details = {{"sup_norm", sup}, {"max_ratio", ratio}, {"per_y", per_y}};
    return rep;
}

DelayObservable::DelayObservable(FlowSpec flow, std::vector<FlowPoint> centres, std::vector<double> values,
                                 double rho)
    : flow_(std::move(flow)), centres_(std::move(centres)), values_(std::move(values)), rho_(rho) {
    if (centres_.empty() || centres_.size() != values_.size())
        throw Error(ErrorCode::InvalidArgument, "observable needs one value per centre");
    if (!(rho_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "partition radius must be > 0");
}

double DelayObservable::operator()(const FlowPoint& z) const {
    double num = 0.0, den = 0.0;
    for (std::size_t v = 0; v < centres_.size(); ++v) {
        const double w = std::max(0.0, rho_ - flow_distance(flow_, z, centres_[v]));
        num += w * values_[v];
        den += w;
    }
    if (!(den > 0.0)) throw Error(ErrorCode::InsufficientCoverage, "point lies outside every partition support");
    return num / den;
}

DelayObservable delay_observable(const FlowSpec& f, const std::vector<FlowPoint>& points, const TakensConfig& cfg,
                                 int attempt) {
    if (cfg.net_size == 0) throw Error(ErrorCode::InvalidArgument, "net needs at least one centre");
    auto centres = mesh(f, cfg.net_size);
    double cover = 0.0;
    for (const auto& z : points) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& v : centres) nearest = std::min(nearest, flow_distance(f, z, v));
        cover = std::max(cover, nearest);
    }
    std::vector<double> values(centres.size(), 0.5);
    if (cfg.perturb) {
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(attempt));
        for (auto& q : values) q = uniform(rng, 0.0, 1.0);
    }
    return DelayObservable(f, std::move(centres), std::move(values), std::max(2.0 * cover, 1e-12));
}

TakensReport takens_delay_check(const FlowSpec& f, int d, const std::vector<double>& times,
                                const std::vector<FlowPoint>& points, const TakensConfig& cfg) {
    f.validate();
    if (d < 0) throw Error(ErrorCode::InvalidArgument, "dimension d must be >= 0");
    if (cfg.retries < 1) throw Error(ErrorCode::InvalidArgument, "retry budget must be >= 1");
    auto sorted = times;
    std::sort(sorted.begin(), sorted.end());
    const auto distinct = static_cast<std::size_t>(
        std::unique(sorted.begin(), sorted.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }) -
        sorted.begin());
    const auto needed = static_cast<std::size_t>(2 * d + 1);
    if (distinct < needed || distinct != times.size())
        throw Error(ErrorCode::InvalidArgument, "need " + std::to_string(needed) + " distinct times, got " +
                                                    std::to_string(distinct) + " of " + std::to_string(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = i + 1; j < times.size(); ++j)
            if (!(min_displacement(f, times[j] - times[i], points) > 1e-12))
                throw Error(ErrorCode::InvalidArgument,
                            "a mesh point is fixed by the flow at time " + io::format_double(times[j] - times[i]));

    const std::size_t n = points.size(), m = times.size();
    std::vector<FlowPoint> moved;
    moved.reserve(n * m);
    for (const auto& x : points)
        for (double t : times) moved.push_back(flow_step(f, x, t));

    // Classify pairs once; the classification does not depend on the observable.
    TakensReport out;
    std::vector<std::pair<std::size_t, std::size_t>> tested;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double dist = points[a] == points[b] ? 0.0 : flow_distance(f, points[a], points[b]);
            if (dist == 0.0)
                ++out.duplicates;
            else if (dist < cfg.separation)
                ++out.resolution_limited;
            else
                tested.emplace_back(a, b);
        }
    out.pairs_tested = tested.size();

    const int budget = cfg.perturb ? cfg.retries : 1;
    for (int attempt = 0; attempt < budget; ++attempt) {
        const auto obs = delay_observable(f, moved, cfg, attempt);
        std::vector<double> image(n * m);
        for (std::size_t i = 0; i < n * m; ++i) image[i] = obs(moved[i]);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : tested) {
            const double s = row_distance_sq(image, a, b, m);
            if (s < best) {
                best = s;
                out.worst_a = a;
                out.worst_b = b;
            }
        }
        out.attempts = attempt + 1;
        out.min_image_distance = std::sqrt(best);
        if (out.min_image_distance > 0.0) break;
    }

    auto& rep = out.report;
    rep.check = "takens_delay";
    rep.parameters = {{"flow", f.describe()},     {"d", d},
                      {"times", times},           {"mesh", n},
                      {"seed", cfg.seed},         {"retries", cfg.retries},
                      {"net_size", cfg.net_size}, {"separation", cfg.separation},
                      {"perturb", cfg.perturb}};
    rep.pass = out.min_image_distance > 0.0;
    rep.margin = tested.empty() ? 0.0 : out.min_image_distance;
    rep.details = {{"attempts", out.attempts},
                   {"duplicates", out.duplicates},
                   {"resolution_limited", out.resolution_limited},
                   {"pairs_tested", out.pairs_tested},
                   {"worst_pair", {out.worst_a, out.worst_b}}};
    return out;
}

LipschitzAudit lipschitz_audit(const Signal& f) {
    if (f.size() < 2) throw Error(ErrorCode::InvalidArgument, "Lipschitz audit needs at least two samples");
    const double c = max_difference_quotient(f);
    return {c, c <= 1.0 + 1e-9};
}

}  // namespace bandflow
