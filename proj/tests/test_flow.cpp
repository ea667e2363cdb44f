#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bandflow/error.hpp"
#include "bandflow/flow.hpp"
#include "bandflow/orbit_metric.hpp"

using namespace bandflow;
using std::numbers::pi;

namespace {

const double kOmega = std::numbers::sqrt2 - 1.0;

double circle(double a, double b) {
    const double d = std::abs(a - b - std::round(a - b));
    return d;
}

double point_gap(const FlowSpec& f, const FlowPoint& a, const FlowPoint& b) {
    if (f.is_torus()) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.coords.size(); ++i) m = std::max(m, circle(a.coords[i], b.coords[i]));
        return m;
    }
    if (a.coords[0] != b.coords[0] && !std::holds_alternative<CircleRotation>(std::get<Suspension>(f.kind).base)) return 1.0;
    return std::max(circle(a.coords[0], b.coords[0]), std::abs(a.coords[1] - b.coords[1]));
}

double image_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("flow at time zero is the identity") {
    const auto torus = FlowSpec::torus({kOmega, 0.3});
    const FlowPoint x{{0.25, 0.75}};
    CHECK(flow_step(torus, x, 0.0) == x);
    const auto sus = FlowSpec::rotation_suspension(kOmega);
    const FlowPoint y{{0.4, 0.7}};
    CHECK(flow_step(sus, y, 0.0) == y);
}

TEST_CASE("torus rotation by one time unit") {
    const auto f = FlowSpec::torus({kOmega});
    CHECK(flow_step(f, FlowPoint{{0.0}}, 1.0).coords[0] == doctest::Approx(std::numbers::sqrt2 - 1.0).epsilon(1e-15));
}

TEST_CASE("suspension crossing the roof applies the base map once") {
    const double rho = 0.3;
    const auto f = FlowSpec::rotation_suspension(rho);
    const auto y = flow_step(f, FlowPoint{{0.6, 0.7}}, 0.5);
    CHECK(std::abs(y.coords[0] - 0.9) <= 1e-12);
    CHECK(std::abs(y.coords[1] - 0.2) <= 1e-12);
    const auto p = FlowSpec::permutation_suspension({1, 2, 0, 4, 3});
    const auto q = flow_step(p, FlowPoint{{2.0, 0.7}}, 0.5);
    CHECK(q.coords[0] == 0.0);
    CHECK(std::abs(q.coords[1] - 0.2) <= 1e-12);
    const auto back = flow_step(p, FlowPoint{{2.0, 0.2}}, -2.5);
    CHECK(back.coords[0] == 2.0);  // three crossings on a 3-cycle
    CHECK(std::abs(back.coords[1] - 0.7) <= 1e-12);
}

TEST_CASE("group law residuals") {
    const std::vector<std::pair<FlowSpec, double>> flows = {
        {FlowSpec::torus({kOmega}), 1e-12},
        {FlowSpec::torus({kOmega, std::numbers::sqrt3 - 1.0, 0.1}), 1e-12},
        {FlowSpec::rotation_suspension(kOmega), 1e-10},
        {FlowSpec::permutation_suspension({1, 2, 0, 4, 3}), 1e-10},
    };
    for (const auto& [f, tol] : flows) {
        auto rng = make_rng(77);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto x = random_point(f, rng);
            const double s = uniform(rng, -20.0, 20.0);
            const double t = uniform(rng, -20.0, 20.0);
            worst = std::max(worst, point_gap(f, flow_step(f, x, s + t), flow_step(f, flow_step(f, x, t), s)));
        }
        CHECK(worst <= tol);
    }
}

TEST_CASE("torus observable values") {
    const auto obs = observable(FlowSpec::torus({kOmega}), 2);
    CHECK(obs(FlowPoint{{0.0}}) == std::vector<double>{1.0, 0.5});
    const auto half = obs(FlowPoint{{0.5}});
    CHECK(half[0] == doctest::Approx(0.0));
    CHECK(half[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(observable(FlowSpec::torus({0.1, 0.2}), 3), Error);
    CHECK_THROWS_AS(observable(FlowSpec::rotation_suspension(0.1), 2), Error);
}

TEST_CASE("observables are injective on a dense mesh") {
    const std::vector<FlowSpec> flows = {FlowSpec::torus({kOmega}), FlowSpec::torus({kOmega, 0.2}),
                                         FlowSpec::rotation_suspension(kOmega),
                                         FlowSpec::permutation_suspension({1, 2, 0, 4, 3})};
    for (const auto& f : flows) {
        const auto obs = observable(f, f.min_depth());
        const auto pts = mesh(f, 150);
        double worst_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double d = point_gap(f, pts[i], pts[j]);
                if (d == 0.0) continue;
                worst_ratio = std::min(worst_ratio, image_gap(obs(pts[i]), obs(pts[j])) / d);
            }
        CHECK(worst_ratio > 0.0);
        for (const auto& p : pts)
            for (double v : obs(p)) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
    }
}

TEST_CASE("suspension observables are continuous across the roof") {
    const double rho = kOmega;
    const auto f = FlowSpec::rotation_suspension(rho);
    const auto obs = observable(f, 6);
    double prev = 1.0;
    for (double delta : {1e-2, 1e-4, 1e-6}) {
        const double gap = image_gap(obs(FlowPoint{{0.3, 1.0 - delta}}), obs(FlowPoint{{0.3 + rho, delta}}));
        CHECK(gap <= 2.0 * obs.lipschitz() * 2.0 * delta);
        CHECK(gap < prev);
        prev = gap;
    }
    const auto p = FlowSpec::permutation_suspension({1, 2, 0, 4, 3});
    const auto pobs = observable(p, 3);
    const double gap = image_gap(pobs(FlowPoint{{1.0, 1.0 - 1e-6}}), pobs(FlowPoint{{2.0, 1e-6}}));
    CHECK(gap <= 1e-5);
}

TEST_CASE("orbit samples") {
    const auto g = UniformGrid::covering(-5.0, 5.0, 0.05);
    const auto still = FlowSpec::torus({0.0});
    for (const auto& s : orbit_sample(still, FlowPoint{{0.2}}, g, observable(still, 2))) {
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] == s[0]);
    }
    const auto f = FlowSpec::torus({0.3});
    const auto sig = orbit_sample(f, FlowPoint{{0.15}}, g, observable(f, 2));
    REQUIRE(sig.size() == 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.count(); ++i)
        worst = std::max(worst, std::abs(sig[0][i].real() - 0.5 * (1.0 + std::cos(2.0 * pi * (0.15 + 0.3 * g.time(i))))));
    CHECK(worst <= 1e-12);
    CHECK(sig[0].band() == BandSpec::symmetric(0.3));
}

TEST_CASE("orbit sampling is equivariant at grid shifts") {
    const auto g = UniformGrid::covering(-5.0, 5.0, 0.05);
    const std::vector<FlowSpec> flows = {FlowSpec::torus({kOmega}), FlowSpec::rotation_suspension(kOmega)};
    for (const auto& f : flows) {
        const auto obs = observable(f, f.min_depth());
        const FlowPoint x = f.is_torus() ? FlowPoint{{0.1}} : FlowPoint{{0.1, 0.35}};
        const double r = 7 * 0.05;
        const auto base = orbit_sample(f, x, g, obs);
        const auto moved = orbit_sample(f, flow_step(f, x, r), g, obs);
        for (std::size_t l = 0; l < base.size(); ++l) {
            const auto shifted = translate(base[l], r);
            CHECK(std::equal(shifted.samples().begin(), shifted.samples().end(), base[l].samples().begin()));
            CHECK(sup_distance(shifted, moved[l]) <= 1e-12);
        }
    }
}

TEST_CASE("orbit signals depend continuously on the initial point") {
    const auto g = UniformGrid::covering(-10.0, 10.0, 0.05);
    const auto f = FlowSpec::torus({kOmega});
    const auto obs = observable(f, 2);
    auto rng = make_rng(4);
    for (int k = 0; k < 20; ++k) {
        const auto x = random_point(f, rng);
        const FlowPoint y{{x.coords[0] + uniform(rng, -1e-3, 1e-3)}};
        const auto a = orbit_sample(f, x, g, obs);
        const auto b = orbit_sample(f, y, g, obs);
        const double fd = flow_distance(f, x, y);
        for (std::size_t l = 0; l < a.size(); ++l) CHECK(distance_D(a[l], b[l], 10).value <= obs.lipschitz() * fd + 1e-15);
    }
}

TEST_CASE("suspensions without fixed base points have no fixed points") {
    const auto rot = FlowSpec::rotation_suspension(kOmega);
    CHECK(min_displacement(rot, 0.5, mesh(rot, 400)) > 0.0);
    const auto perm = FlowSpec::permutation_suspension({1, 2, 0, 4, 3});
    CHECK(min_displacement(perm, 0.5, mesh(perm, 400)) > 0.0);
    // A rotation by zero fixes every base point, and T_1 then fixes every point.
    const auto trivial = FlowSpec::rotation_suspension(0.0);
    CHECK(min_displacement(trivial, 1.0, mesh(trivial, 50)) <= 1e-12);
}

TEST_CASE("orbit metric on a torus rotation") {
    const auto f = FlowSpec::torus({kOmega});
    const FlowPoint x{{0.0}}, y{{0.1}};
    const std::function<FlowPoint(double)> ox = [&](double t) { return flow_step(f, x, t); };
    const std::function<FlowPoint(double)> oy = [&](double t) { return flow_step(f, y, t); };
    const std::function<double(const FlowPoint&, const FlowPoint&)> dist = [&](const FlowPoint& a, const FlowPoint& b) {
        return flow_distance(f, a, b);
    };
    CHECK(orbit_metric<FlowPoint>({0.0}, ox, oy, dist) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(orbit_metric<FlowPoint>({10.0}, ox, oy, dist) == doctest::Approx(0.1).epsilon(1e-9));
    double lowest = 1.0;
    for (int i = 0; i <= 1000; ++i) lowest = std::min(lowest, dist(ox(i * 0.01), oy(i * 0.01)));
    CHECK(lowest == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(orbit_metric<FlowPoint>({10.0}, ox, ox, dist) == 0.0);
    CHECK_THROWS_AS(orbit_metric<FlowPoint>({-1.0}, ox, oy, dist), Error);
}

TEST_CASE("orbit metric grows with the horizon and is a metric on a sample") {
    const auto f = FlowSpec::rotation_suspension(kOmega);
    auto rng = make_rng(12);
    std::vector<FlowPoint> pts;
    for (int i = 0; i < 6; ++i) pts.push_back(random_point(f, rng));
    auto d = [&](const FlowPoint& a, const FlowPoint& b, double r) {
        const std::function<FlowPoint(double)> oa = [&](double t) { return flow_step(f, a, t); };
        const std::function<FlowPoint(double)> ob = [&](double t) { return flow_step(f, b, t); };
        const std::function<double(const FlowPoint&, const FlowPoint&)> dist = [&](const FlowPoint& p, const FlowPoint& q) {
            return flow_distance(f, p, q);
        };
        return orbit_metric<FlowPoint>({r, 0.05}, oa, ob, dist);
    };
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            CHECK(d(pts[i], pts[j], 3.0) == doctest::Approx(d(pts[j], pts[i], 3.0)).epsilon(1e-12));
            CHECK(d(pts[i], pts[j], 3.0) >= d(pts[i], pts[j], 1.0));
            for (std::size_t k = 0; k < pts.size(); ++k)
                CHECK(d(pts[i], pts[k], 2.0) <= d(pts[i], pts[j], 2.0) + d(pts[j], pts[k], 2.0) + 1e-12);
        }
}

TEST_CASE("signal base distance selector") {
    const auto g = UniformGrid::covering(-4.0, 4.0, 0.05);
    const auto a = Signal::sample(g, [](double) { return 0.0; });
    const auto b = Signal::sample(g, [](double) { return 1.0; });
    CHECK(signal_base_distance(BaseMetric::Sup, a, b) == 1.0);
    CHECK(signal_base_distance(BaseMetric::D, a, b) == doctest::Approx(1.0 - 1.0 / 16.0));
}
