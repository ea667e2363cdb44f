#include "bandflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numbers>
#include <sstream>

#include "bandflow/error.hpp"
#include "bandflow/io.hpp"

namespace bandflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Radii of the torus of revolution used for rotation suspensions.
constexpr double kMajor = 2.0;
constexpr double kMinor = 1.0;

double frac(double x) {
    const double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

double circle_distance(double a, double b) {
    const double d = std::abs(frac(a - b));
    return std::min(d, 1.0 - d);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::vector<std::vector<int>> cycles_of(const std::vector<int>& perm) {
    std::vector<std::vector<int>> out;
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (seen[i]) continue;
        std::vector<int> cyc;
        for (int j = static_cast<int>(i); !seen[static_cast<std::size_t>(j)]; j = perm[static_cast<std::size_t>(j)]) {
            seen[static_cast<std::size_t>(j)] = true;
            cyc.push_back(j);
        }
        out.push_back(std::move(cyc));
    }
    return out;
}

int permutation_label(const FlowPoint& x, std::size_t size) {
    const double v = x.coords.at(0);
    const auto i = static_cast<long>(std::lround(v));
    if (std::abs(v - static_cast<double>(i)) > 1e-9 || i < 0 || static_cast<std::size_t>(i) >= size)
        throw Error(ErrorCode::InvalidArgument, "permutation suspension point needs an integer label in range");
    return static_cast<int>(i);
}

}  // namespace

FlowSpec FlowSpec::torus(std::vector<double> omega) {
    FlowSpec f{TorusRotation{std::move(omega)}};
    f.validate();
    return f;
}

FlowSpec FlowSpec::rotation_suspension(double rho) {
    FlowSpec f{Suspension{CircleRotation{rho}}};
    f.validate();
    return f;
}

FlowSpec FlowSpec::permutation_suspension(std::vector<int> perm) {
    FlowSpec f{Suspension{Permutation{std::move(perm)}}};
    f.validate();
    return f;
}

std::size_t FlowSpec::coordinate_count() const noexcept {
    if (const auto* t = std::get_if<TorusRotation>(&kind)) return t->omega.size();
    return 2;
}

std::size_t FlowSpec::min_depth() const noexcept { return is_torus() ? 2 * coordinate_count() : 3; }

std::string FlowSpec::describe() const {
    std::ostringstream os;
    std::visit(overloaded{[&](const TorusRotation& t) {
                              os << "torus_rotation omega=";
                              for (std::size_t i = 0; i < t.omega.size(); ++i) os << (i ? "," : "") << io::format_double(t.omega[i]);
                          },
                          [&](const Suspension& s) {
                              std::visit(overloaded{[&](const CircleRotation& r) { os << "suspension rho=" << io::format_double(r.rho); },
                                                    [&](const Permutation& p) {
                                                        os << "suspension perm=";
                                                        for (std::size_t i = 0; i < p.perm.size(); ++i) os << (i ? "," : "") << p.perm[i];
                                                    }},
                                         s.base);
                          }},
               kind);
    return os.str();
}

void FlowSpec::validate() const {
    std::visit(overloaded{[](const TorusRotation& t) {
                              if (t.omega.empty()) throw Error(ErrorCode::InvalidArgument, "torus needs at least one angle");
                              for (double w : t.omega)
                                  if (!std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "rotation vector must be finite");
                          },
                          [](const Suspension& s) {
                              std::visit(overloaded{[](const CircleRotation& r) {
                                                        if (!std::isfinite(r.rho))
                                                            throw Error(ErrorCode::InvalidArgument, "rotation angle must be finite");
                                                    },
                                                    [](const Permutation& p) {
                                                        if (p.perm.empty()) throw Error(ErrorCode::InvalidArgument, "permutation is empty");
                                                        std::vector<bool> hit(p.perm.size(), false);
                                                        for (int v : p.perm) {
                                                            if (v < 0 || static_cast<std::size_t>(v) >= p.perm.size() || hit[static_cast<std::size_t>(v)])
                                                                throw Error(ErrorCode::InvalidArgument, "not a permutation");
                                                            hit[static_cast<std::size_t>(v)] = true;
                                                        }
                                                    }},
                                         s.base);
                          }},
               kind);
}

FlowPoint flow_step(const FlowSpec& f, const FlowPoint& x, double t) {
    if (const auto* tor = std::get_if<TorusRotation>(&f.kind)) {
        if (x.coords.size() != tor->omega.size())
            throw Error(ErrorCode::InvalidArgument, "torus point has the wrong dimension");
        FlowPoint y{std::vector<double>(x.coords.size())};
        for (std::size_t i = 0; i < x.coords.size(); ++i) y.coords[i] = frac(x.coords[i] + tor->omega[i] * t);
        return y;
    }
    const auto& sus = std::get<Suspension>(f.kind);
    if (x.coords.size() != 2) throw Error(ErrorCode::InvalidArgument, "suspension point is (base, height)");
    const double u = x.coords[1] + t;
    const double n = std::floor(u);
    double s = u - n;
    double carry = n;
    if (s >= 1.0) {
        s = 0.0;
        carry += 1.0;
    }
    if (const auto* rot = std::get_if<CircleRotation>(&sus.base)) return {{frac(x.coords[0] + carry * rot->rho), s}};
    const auto& perm = std::get<Permutation>(sus.base).perm;
    const int label = permutation_label(x, perm.size());
    for (const auto& cyc : cycles_of(perm)) {
        const auto it = std::find(cyc.begin(), cyc.end(), label);
        if (it == cyc.end()) continue;
        const auto len = static_cast<long long>(cyc.size());
        const long long pos = (static_cast<long long>(it - cyc.begin()) + static_cast<long long>(carry) % len + len) % len;
        return {{static_cast<double>(cyc[static_cast<std::size_t>(pos)]), s}};
    }
    return x;  // unreachable: every label lies on a cycle
}

Observable::Observable(FlowSpec flow, std::size_t depth)
    : flow_(std::move(flow)), depth_(depth), band_limit_(0.0), lipschitz_(0.0) {
    flow_.validate();
    if (depth_ < flow_.min_depth())
        throw Error(ErrorCode::InvalidArgument, "observable depth " + std::to_string(depth_) + " is below the minimum " +
                                                    std::to_string(flow_.min_depth()));
    const std::size_t block = flow_.min_depth();
    const double harmonics = static_cast<double>((depth_ - 1) / block + 1);
    lipschitz_ = std::numbers::pi * harmonics;
    if (const auto* tor = std::get_if<TorusRotation>(&flow_.kind)) {
        double w = 0.0;
        for (double v : tor->omega) w = std::max(w, std::abs(v));
        band_limit_ = harmonics * w;
        return;
    }
    const auto& sus = std::get<Suspension>(flow_.kind);
    if (const auto* rot = std::get_if<CircleRotation>(&sus.base)) {
        band_limit_ = harmonics * (1.0 + std::abs(rot->rho));
        return;
    }
    const auto& perm = std::get<Permutation>(sus.base).perm;
    cycles_ = cycles_of(perm);
    cycle_of_.assign(perm.size(), 0);
    position_.assign(perm.size(), 0);
    std::size_t shortest = perm.size();
    for (std::size_t c = 0; c < cycles_.size(); ++c) {
        shortest = std::min(shortest, cycles_[c].size());
        for (std::size_t j = 0; j < cycles_[c].size(); ++j) {
            cycle_of_[static_cast<std::size_t>(cycles_[c][j])] = static_cast<int>(c);
            position_[static_cast<std::size_t>(cycles_[c][j])] = static_cast<int>(j);
        }
    }
    band_limit_ = harmonics / static_cast<double>(shortest);
}

std::vector<double> Observable::operator()(const FlowPoint& x) const {
    std::vector<double> out(depth_);
    const std::size_t block = flow_.min_depth();
    if (const auto* tor = std::get_if<TorusRotation>(&flow_.kind)) {
        if (x.coords.size() != tor->omega.size())
            throw Error(ErrorCode::InvalidArgument, "torus point has the wrong dimension");
        for (std::size_t c = 0; c < depth_; ++c) {
            const double m = static_cast<double>(c / block + 1);
            const double angle = kTwoPi * frac(m * x.coords[(c % block) / 2]);
            out[c] = 0.5 * (1.0 + ((c % 2 == 0) ? std::cos(angle) : std::sin(angle)));
        }
        return out;
    }
    const auto& sus = std::get<Suspension>(flow_.kind);
    if (x.coords.size() != 2) throw Error(ErrorCode::InvalidArgument, "suspension point is (base, height)");
    if (const auto* rot = std::get_if<CircleRotation>(&sus.base)) {
        const double z = frac(x.coords[0] + rot->rho * x.coords[1]);
        const double s = x.coords[1];
        for (std::size_t c = 0; c < depth_; ++c) {
            const double m = static_cast<double>(c / block + 1);
            const double a = kTwoPi * frac(m * z);
            const double b = kTwoPi * frac(m * s);
            const double ring = kMajor + kMinor * std::cos(b);
            switch (c % block) {
                case 0: out[c] = 0.5 * (1.0 + ring * std::cos(a) / (kMajor + kMinor)); break;
                case 1: out[c] = 0.5 * (1.0 + ring * std::sin(a) / (kMajor + kMinor)); break;
                default: out[c] = 0.5 * (1.0 + std::sin(b)); break;
            }
        }
        return out;
    }
    const auto label = static_cast<std::size_t>(permutation_label(x, cycle_of_.size()));
    const auto cyc = static_cast<std::size_t>(cycle_of_[label]);
    const double theta = (position_[label] + x.coords[1]) / static_cast<double>(cycles_[cyc].size());
    const double level = cycles_.size() > 1 ? static_cast<double>(cyc) / static_cast<double>(cycles_.size() - 1) : 0.0;
    for (std::size_t c = 0; c < depth_; ++c) {
        const double m = static_cast<double>(c / block + 1);
        const double a = kTwoPi * frac(m * theta);
        switch (c % block) {
            case 0: out[c] = 0.5 * (1.0 + std::cos(a)); break;
            case 1: out[c] = 0.5 * (1.0 + std::sin(a)); break;
            default: out[c] = level; break;
        }
    }
    return out;
}

Observable observable(const FlowSpec& f, std::size_t depth) { return Observable(f, depth); }

std::vector<Signal> orbit_sample(const FlowSpec& f, const FlowPoint& x, const UniformGrid& grid, const Observable& obs) {
    std::vector<std::vector<double>> cols(obs.depth(), std::vector<double>(grid.count()));
    for (std::size_t i = 0; i < grid.count(); ++i) {
        const auto v = obs(flow_step(f, x, grid.time(i)));
        for (std::size_t c = 0; c < v.size(); ++c) cols[c][i] = v[c];
    }
    std::vector<Signal> out;
    out.reserve(cols.size());
    const auto band = BandSpec::symmetric(obs.band_limit());
    for (const auto& col : cols) out.push_back(Signal::from_real(grid, col, band));
    return out;
}

double flow_distance(const FlowSpec& f, const FlowPoint& x, const FlowPoint& y) {
    if (f.is_torus()) {
        if (x.coords.size() != y.coords.size()) throw Error(ErrorCode::InvalidArgument, "points differ in dimension");
        double d = 0.0;
        for (std::size_t i = 0; i < x.coords.size(); ++i) d = std::max(d, circle_distance(x.coords[i], y.coords[i]));
        return d;
    }
    const Observable obs(f, f.min_depth());
    const auto a = obs(x);
    const auto b = obs(y);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

FlowPoint random_point(const FlowSpec& f, Rng& rng) {
    if (const auto* tor = std::get_if<TorusRotation>(&f.kind)) {
        FlowPoint p{std::vector<double>(tor->omega.size())};
        for (auto& c : p.coords) c = uniform(rng, 0.0, 1.0);
        return p;
    }
    const auto& sus = std::get<Suspension>(f.kind);
    if (std::holds_alternative<CircleRotation>(sus.base)) {
        const double x = uniform(rng, 0.0, 1.0);
        return {{x, uniform(rng, 0.0, 1.0)}};
    }
    const auto p = std::get<Permutation>(sus.base).perm.size();
    const auto label = std::uniform_int_distribution<std::size_t>(0, p - 1)(rng);
    return {{static_cast<double>(label), uniform(rng, 0.0, 1.0)}};
}

std::vector<FlowPoint> mesh(const FlowSpec& f, std::size_t count) {
    std::vector<FlowPoint> out;
    out.reserve(count);
    // First angle on a plain lattice, the others by additive recurrence with irrational steps.
    static constexpr double kSteps[] = {0.6180339887498949, 0.41421356237309515, 0.7320508075688772, 0.2360679774997898};
    auto kronecker = [](std::size_t i, std::size_t j) {
        return frac(static_cast<double>(i) * kSteps[j % std::size(kSteps)] + 0.5);
    };
    if (const auto* tor = std::get_if<TorusRotation>(&f.kind)) {
        const std::size_t k = tor->omega.size();
        for (std::size_t i = 0; i < count; ++i) {
            FlowPoint p{std::vector<double>(k)};
            p.coords[0] = static_cast<double>(i) / static_cast<double>(count);
            for (std::size_t j = 1; j < k; ++j) p.coords[j] = kronecker(i, j - 1);
            out.push_back(std::move(p));
        }
        return out;
    }
    const auto& sus = std::get<Suspension>(f.kind);
    if (std::holds_alternative<CircleRotation>(sus.base)) {
        for (std::size_t i = 0; i < count; ++i)
            out.push_back({{static_cast<double>(i) / static_cast<double>(count), kronecker(i, 0)}});
        return out;
    }
    const auto p = std::get<Permutation>(sus.base).perm.size();
    const std::size_t per = (count + p - 1) / p;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back({{static_cast<double>(i % p), static_cast<double>(i / p) / static_cast<double>(per)}});
    return out;
}

double min_displacement(const FlowSpec& f, double t, const std::vector<FlowPoint>& points) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& x : points) m = std::min(m, flow_distance(f, flow_step(f, x, t), x));
    return m;
}

}  // namespace bandflow
