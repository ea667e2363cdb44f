#include "bandflow/mdim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "bandflow/error.hpp"
#include "bandflow/parallel.hpp"
#include "bandflow/rng.hpp"

namespace bandflow {

namespace {

constexpr double kCollisionLattice = 1e-10;
constexpr double kCollisionSup = 1e-6;

void require_nyquist(double c, double d) {
    if (!(c >= 0.0) || !(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "need c >= 0 and d > 0");
    if (2.0 * c * d >= 1.0)
        throw Error(ErrorCode::NyquistViolation, "2cd = " + io::format_double(2.0 * c * d) + " is not below 1");
}

LatticeWitnessReport run_witness(double c, double d, std::size_t trial_count, std::uint64_t seed) {
    LatticeWitnessReport r{c, d, trial_count, 0, 0.0, std::nullopt};
    for (std::size_t i = 0; i < trial_count; ++i) {
        const auto f = random_real_trig(mix_seed(seed, 2 * i), 5, 0.0, c);
        const auto g = random_real_trig(mix_seed(seed, 2 * i + 1), 5, 0.0, c);
        const auto check = lattice_pair_check(f, g, d);
        r.max_ratio = std::max(r.max_ratio, check.ratio);
        if (check.collision) ++r.failures;
    }
    return r;
}

}  // namespace

SamplingBound sampling_upper_bound(double c, double d, double r) {
    require_nyquist(c, d);
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon r must be > 0");
    const auto count = static_cast<std::size_t>(std::floor(r / d + 1e-9)) + 1;
    return {count, static_cast<double>(count) / r};
}

LatticePairCheck lattice_pair_check(const TrigPolynomial& f, const TrigPolynomial& g, double d, std::size_t half_count) {
    if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "lattice spacing must be > 0");
    const auto half = static_cast<long>(half_count);
    double lattice = 0.0, sup = 0.0;
    for (long n = -half; n <= half; ++n) {
        const double t = static_cast<double>(n) * d;
        lattice = std::max(lattice, std::abs(f(t) - g(t)));
    }
    for (long i = -8 * half; i <= 8 * half; ++i) {
        const double t = static_cast<double>(i) * d / 8.0;
        sup = std::max(sup, std::abs(f(t) - g(t)));
    }
    const double ratio = lattice > 0.0 ? sup / lattice : (sup > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return {sup, lattice, ratio, lattice <= kCollisionLattice && sup > kCollisionSup};
}

nlohmann::json LatticeWitnessReport::to_json() const {
    nlohmann::json j{{"check", "lattice_injectivity"},
                     {"parameters", {{"c", c}, {"d", d}, {"trials", trials}}},
                     {"margin", max_ratio},
                     {"failures", failures},
                     {"verdict", pass() ? "pass" : "fail"}};
    if (aliasing)
        j["aliasing_pair"] = {{"sup_difference", aliasing->sup_difference},
                              {"lattice_difference", aliasing->lattice_difference},
                              {"collision", aliasing->collision}};
    return j;
}

LatticeWitnessReport lattice_injectivity_witness(double c, double d, std::size_t trial_count, std::uint64_t seed) {
    require_nyquist(c, d);
    return run_witness(c, d, trial_count, seed);
}

LatticeWitnessReport lattice_injectivity_witness_unchecked(double c, double d, std::size_t trial_count,
                                                           std::uint64_t seed) {
    if (!(c >= 0.0) || !(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "need c >= 0 and d > 0");
    auto r = run_witness(c, d, trial_count, seed);
    if (2.0 * c * d >= 1.0) {
        // sin(pi t / d) has frequency 1/(2d) <= c and vanishes on dZ.
        const double nu = 0.5 / d;
        const TrigPolynomial alias{{nu, -nu}, {cplx(0.0, -0.25), cplx(0.0, 0.25)}};
        const TrigPolynomial zero{{0.0}, {cplx(0.0)}};
        r.aliasing = lattice_pair_check(zero, alias, d);
        if (r.aliasing->collision) ++r.failures;
    }
    return r;
}

void LatticeCode::validate() const {
    if (re.size() != im.size()) throw Error(ErrorCode::InvalidArgument, "code needs as many a1 as a2 values");
    for (std::size_t i = 0; i < re.size(); ++i)
        if (!(re[i] >= 0.0 && re[i] <= 1.0 && im[i] >= 0.0 && im[i] <= 1.0))
            throw Error(ErrorCode::InvalidArgument, "code coefficients must lie in [0, 1]");
}

LatticeCode LatticeCode::shifted(int k) const { return {first - k, re, im}; }

LatticeCode random_code(int first, std::size_t count, std::uint64_t seed) {
    auto rng = make_rng(seed, 0x636f);
    LatticeCode a{first, std::vector<double>(count), std::vector<double>(count)};
    for (std::size_t i = 0; i < count; ++i) {
        a.re[i] = uniform(rng, 0.0, 1.0);
        a.im[i] = uniform(rng, 0.0, 1.0);
    }
    return a;
}

double kernel_lattice_norm(const InterpKernel& k) {
    const int radius = k.truncation_radius(1e-9) + 1;
    double best = 0.0;
    // The sum is 1-periodic and even in t.
    for (int s = 0; s <= 500; ++s) {
        const double t = s / 1000.0;
        double sum = 0.0;
        for (int n = -radius; n <= radius; ++n) sum += std::abs(k(t - n));
        best = std::max(best, sum);
    }
    return best;
}

Signal interpolation_lower_bound(const LatticeCode& a, const InterpKernel& k, const UniformGrid& window) {
    a.validate();
    if (a.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty code");
    if (window.t_min() < a.first - 1e-9 || window.t_max() > a.last() + 1e-9)
        throw Error(ErrorCode::InsufficientCoverage, "code indices [" + std::to_string(a.first) + ", " +
                                                         std::to_string(a.last()) + "] do not cover the window");
    const double scale = 0.5 / kernel_lattice_norm(k);
    std::vector<cplx> out(window.count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = window.time(i);
        cplx acc = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n)
            acc += cplx(a.re[n], a.im[n]) * k(t - static_cast<double>(a.first + static_cast<int>(n)));
        out[i] = scale * acc;
    }
    return Signal(window, std::move(out), BandSpec::symmetric(k.spectral_half_width()));
}

LatticeCode lattice_readout(const Signal& g, const InterpKernel& k, int first, std::size_t count) {
    const double scale = 2.0 * kernel_lattice_norm(k);
    LatticeCode a{first, std::vector<double>(count), std::vector<double>(count)};
    for (std::size_t i = 0; i < count; ++i) {
        const auto m = static_cast<double>(first + static_cast<int>(i));
        const auto idx = g.grid().index_of(m);
        if (!idx) throw Error(ErrorCode::GridMismatch, "integer " + io::format_double(m) + " is not a grid point");
        a.re[i] = scale * g[*idx].real();
        a.im[i] = scale * g[*idx].imag();
    }
    return a;
}

Patch Patch::cube(int dim) {
    return {dim, [](const std::vector<double>& u) { return u; },
            [](const std::vector<double>& x, const std::vector<double>& y) {
                double m = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
                return m;
            }};
}

std::string to_string(WidimVerdict v) {
    switch (v) {
        case WidimVerdict::WitnessFound: return "witness_found";
        case WidimVerdict::Counterexample: return "counterexample";
        case WidimVerdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

nlohmann::json WidimEstimate::to_json() const {
    nlohmann::json j{{"check", "widim_probe"},
                     {"parameters", {{"direction", direction}, {"k", k}, {"eps", eps}, {"trials", trials_used}}},
                     {"margin", pair_distance},
                     {"verdict", to_string(verdict)},
                     {"note", note}};
    if (witness_trial) j["witness_trial"] = *witness_trial;
    if (!pair_a.empty()) j["pair"] = {pair_a, pair_b};
    return j;
}

namespace {

struct TrialResult {
    bool witness = false;
    double worst = 0.0;
    std::size_t a = 0;
    std::size_t b = 0;
};

}  // namespace

WidimEstimate widim_probe(const Patch& patch, double eps, int k, const WidimProbeConfig& cfg) {
    if (patch.dim < 1 || k < 0 || !(eps > 0.0) || cfg.grid < 2)
        throw Error(ErrorCode::InvalidArgument, "widim probe needs dim >= 1, k >= 0, eps > 0 and grid >= 2");
    // Parameter grid, row-major over [0,1]^dim.
    std::size_t count = 1;
    for (int i = 0; i < patch.dim; ++i) count *= cfg.grid;
    std::vector<std::vector<double>> params(count), points(count);
    for (std::size_t p = 0; p < count; ++p) {
        std::vector<double> u(patch.dim);
        std::size_t rest = p;
        for (int i = patch.dim - 1; i >= 0; --i) {
            u[i] = static_cast<double>(rest % cfg.grid) / static_cast<double>(cfg.grid - 1);
            rest /= cfg.grid;
        }
        points[p] = patch.map(u);
        params[p] = std::move(u);
    }
    const std::size_t ambient = points.front().size();
    const auto width = static_cast<std::size_t>(k);
    const double tau = (1.0 - 1e-9) / static_cast<double>(cfg.grid - 1);

    // Farthest source pair among images within tau (flat image, `width` values per point).
    // Stops once a pair reaches `cutoff`, since such a map cannot beat an earlier one.
    auto scan = [&](const std::vector<double>& image, double cutoff) {
        TrialResult r;
        std::vector<std::pair<double, std::size_t>> order(count);
        for (std::size_t p = 0; p < count; ++p) order[p] = {width > 0 ? image[p * width] : 0.0, p};
        std::sort(order.begin(), order.end());
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t j = i + 1; j < count; ++j) {
                if (order[j].first - order[i].first > tau) break;
                const auto a = order[i].second, b = order[j].second;
                double sq = 0.0;
                for (std::size_t c = 1; c < width; ++c) {
                    const double diff = image[a * width + c] - image[b * width + c];
                    sq += diff * diff;
                }
                const double lead = order[j].first - order[i].first;
                if (std::sqrt(sq + lead * lead) > tau) continue;
                const double dist = patch.metric(points[a], points[b]);
                if (dist > r.worst) {
                    r = {false, dist, std::min(a, b), std::max(a, b)};
                    if (dist >= cutoff) return r;
                }
            }
        }
        r.witness = r.worst < eps;
        return r;
    };

    WidimEstimate est;
    est.k = k;
    est.eps = eps;
    est.note = "heuristic: a witness is upper-bound evidence on the tested grid only; no lower bound is claimed";
    auto finish = [&](const TrialResult& r, std::size_t trial) {
        if (r.witness) {
            est.verdict = WidimVerdict::WitnessFound;
            est.witness_trial = trial;
        } else {
            est.verdict = WidimVerdict::Counterexample;
        }
        if (r.worst > 0.0) {
            est.pair_a = params[r.a];
            est.pair_b = params[r.b];
            est.pair_distance = r.worst;
        }
    };

    const double unbounded = std::numeric_limits<double>::infinity();
    if (k == 0) {
        // The only map to R^0 is constant.
        est.trials_used = 1;
        finish(scan({}, unbounded), 0);
        return est;
    }
    if (cfg.budget == 0) {
        est.verdict = WidimVerdict::Inconclusive;
        return est;
    }

    auto trial = [&](std::size_t t, double cutoff) {
        auto rng = make_rng(cfg.seed, t);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> a(width * ambient);
        double norm = 0.0;
        for (auto& x : a) {
            x = normal(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (auto& x : a) x /= norm;
        std::vector<double> image(count * width, 0.0);
        for (std::size_t p = 0; p < count; ++p)
            for (std::size_t r = 0; r < width; ++r)
                for (std::size_t c = 0; c < ambient; ++c) image[p * width + r] += a[r * ambient + c] * points[p][c];
        return scan(image, cutoff);
    };

    // Chunks run in parallel against the best result of earlier chunks, so the outcome does not
    // depend on the schedule.
    const std::size_t chunk = 8 * static_cast<std::size_t>(std::max(1, cfg.jobs));
    TrialResult best;
    std::size_t best_trial = 0;
    bool have = false;
    for (std::size_t start = 0; start < cfg.budget; start += chunk) {
        const std::size_t n = std::min(chunk, cfg.budget - start);
        const double cutoff = have ? best.worst : unbounded;
        std::vector<TrialResult> results(n);
        parallel_for(n, cfg.jobs, [&](std::size_t i) { results[i] = trial(start + i, cutoff); });
        for (std::size_t i = 0; i < n; ++i) {
            est.trials_used = start + i + 1;
            if (results[i].witness) {
                finish(results[i], start + i);
                return est;
            }
            if (!have || results[i].worst < best.worst) {
                best = results[i];
                best_trial = start + i;
                have = true;
            }
        }
    }
    finish(best, best_trial);
    return est;
}

void MdimExperiment::validate() const {
    if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "band half-width c must be >= 0");
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "interpolation eps must be > 0");
    if (horizons.empty()) throw Error(ErrorCode::InvalidArgument, "experiment needs at least one horizon");
    for (double r : horizons)
        if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizons must be > 0");
    require_nyquist(c, d);
}

std::vector<MdimRow> mdim_slope_experiment(const MdimExperiment& exp) {
    exp.validate();
    std::vector<MdimRow> rows;
    const InterpKernel kernel(exp.eps);
    for (std::size_t h = 0; h < exp.horizons.size(); ++h) {
        const double r = exp.horizons[h];
        MdimRow row{exp.id, exp.c, exp.d, exp.eps, r, 0.0, 0.0, false};
        if (exp.c > 0.0) {
            row.upper_slope = sampling_upper_bound(exp.c, exp.d, r).slope;
            // Code over the integers in [0, r): two reals per index survive the readout.
            const auto n = static_cast<std::size_t>(std::ceil(r - 1e-9));
            const auto m = std::max<std::size_t>(n, 2);
            const auto code = random_code(0, m, mix_seed(0x6d64, h));
            const auto image = interpolation_lower_bound(code, kernel, UniformGrid(0.0, 1.0, m));
            const auto back = lattice_readout(image, kernel, 0, m);
            std::size_t recovered = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (std::abs(back.re[i] - code.re[i]) <= 1e-9 && std::abs(back.im[i] - code.im[i]) <= 1e-9) ++recovered;
            // 2 reals per unit time at complex band length 1 + eps, rescaled to half-width c.
            row.lower_density = 2.0 * static_cast<double>(recovered) / r * exp.c / (1.0 + exp.eps);
        }
        const double target = 2.0 * exp.c;
        row.bracket_pass = row.lower_density <= target && target <= row.upper_slope;
        rows.push_back(row);
    }
    return rows;
}

io::CsvTable mdim_table(const std::vector<MdimRow>& rows) {
    io::CsvTable t{{"experiment", "c", "d", "eps", "r", "lower_density", "two_c", "upper_slope", "bracket_pass"}, {}};
    for (const auto& r : rows)
        t.rows.push_back({r.id, io::format_double(r.c), io::format_double(r.d), io::format_double(r.eps),
                          io::format_double(r.r), io::format_double(r.lower_density), io::format_double(2.0 * r.c),
                          io::format_double(r.upper_slope), r.bracket_pass ? "true" : "false"});
    return t;
}

}  // namespace bandflow
