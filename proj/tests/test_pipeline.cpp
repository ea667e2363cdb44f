#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "bandflow/error.hpp"
#include "bandflow/io.hpp"
#include "bandflow/pipeline.hpp"
#include "bandflow/quadrature.hpp"
#include "bandflow/rng.hpp"

using namespace bandflow;
using std::numbers::pi;

namespace {

const FlowSpec kTorus2 = FlowSpec::torus({0.41421356237309503, 0.7236067977499789});

const EmbeddingPipeline& torus_pipeline() {
    static const EmbeddingPipeline p(kTorus2, PipelineConfig{});
    return p;
}

double max_abs(const Signal& s) {
    double m = 0.0;
    for (const auto& z : s.samples()) m = std::max(m, std::abs(z));
    return m;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("bandflow_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("smoothing windows") {
    CHECK(SmoothingWindow(0).q == 1.0);
    CHECK(SmoothingWindow(1).q == 0.5);
    CHECK(SmoothingWindow(3).q == 0.25);
    CHECK_THROWS_AS(SmoothingWindow(-1), Error);
}

TEST_CASE("smoothing a constant gives q/2") {
    const auto grid = UniformGrid::covering(-20.0, 20.0, 0.05);
    const auto one = Signal::sample(grid, [](double) { return 1.0; }, BandSpec::symmetric(0.0));
    for (int j = 0; j < 4; ++j) {
        const SmoothingFilter f(SmoothingWindow(j), 0.05, 2.5);
        double sum = 0.0;
        for (double t : f.taps()) sum += t;
        CHECK(std::abs(sum - 1.0 / ((j + 1) * 0.05)) <= 1e-9);
        const auto out = f.apply(one);
        for (const auto& z : out.samples()) CHECK(std::abs(z - cplx(0.5 / (j + 1))) <= 1e-10);
    }
}

TEST_CASE("smoothing matches the window integral of band-limited inputs") {
    const auto grid = UniformGrid::covering(-20.0, 20.0, 0.05);
    SUBCASE("cosine in closed form") {
        for (double nu : {0.1, 0.7, 1.3, 2.5}) {
            const auto f = Signal::sample(grid, [&](double t) { return std::cos(2.0 * pi * nu * t); },
                                          BandSpec::symmetric(nu));
            for (int j = 0; j < 3; ++j) {
                const double q = 1.0 / (j + 1);
                const auto out = smooth(f, j);
                double err = 0.0;
                for (std::size_t i = 0; i < out.size(); ++i) {
                    const double t = out.grid().time(i);
                    const double truth = (std::sin(2.0 * pi * nu * (t + q)) - std::sin(2.0 * pi * nu * t)) / (4.0 * pi * nu);
                    err = std::max(err, std::abs(out[i] - cplx(truth)));
                }
                CHECK(err <= 1e-8);
            }
        }
    }
    SUBCASE("random trig polynomials against Gauss-Legendre") {
        Rng rng(11);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> freq(4), amp(4), phase(4);
            for (int k = 0; k < 4; ++k) {
                freq[k] = uniform(rng, 0.0, 2.5);
                amp[k] = uniform(rng, -0.25, 0.25);
                phase[k] = uniform(rng, 0.0, 1.0);
            }
            auto truth = [&](double t) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += amp[k] * std::cos(2.0 * pi * (freq[k] * t + phase[k]));
                return s;
            };
            const auto f = Signal::sample(grid, truth, BandSpec::symmetric(2.5));
            const int j = trial % 3;
            const double q = 1.0 / (j + 1);
            const auto out = smooth(f, j);
            for (std::size_t i = 0; i < out.size(); i += 37) {
                const double t = out.grid().time(i);
                CHECK(std::abs(out[i].real() - 0.5 * gauss_legendre(truth, t, t + q, 8)) <= 1e-8);
            }
        }
    }
}

TEST_CASE("smoothing response") {
    for (int j = 0; j < 3; ++j) {
        const SmoothingFilter f(SmoothingWindow(j), 0.05, 2.5);
        const double q = f.window().q;
        CHECK(std::abs(f.response(0.0) - cplx(q / 2)) <= 1e-10);
        CHECK(std::abs(f.response(1.0 / q)) <= 1e-9);
        for (double nu = 0.05; nu <= 2.5; nu += 0.0625)
            CHECK(std::abs(std::abs(f.response(nu)) - std::abs(std::sin(pi * nu * q) / (2.0 * pi * nu))) <= 1e-9);
    }
}

TEST_CASE("smoothing is 1-Lipschitz and bounded by q/2 on unit inputs") {
    const auto grid = UniformGrid::covering(-20.0, 20.0, 0.05);
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const double nu = uniform(rng, 0.05, 2.5);
        const double phase = uniform(rng, 0.0, 1.0);
        const auto f = Signal::sample(grid, [&](double t) { return std::cos(2.0 * pi * (nu * t + phase)); },
                                      BandSpec::symmetric(nu));
        for (int j = 0; j < 3; ++j) {
            const auto out = smooth(f, j);
            CHECK(max_difference_quotient(out) <= 1.0 + 1e-9);
            CHECK(max_abs(out) <= 0.5 / (j + 1) + 1e-9);
        }
    }
}

TEST_CASE("smoothing preconditions") {
    const auto short_grid = UniformGrid::covering(-2.0, 2.0, 0.05);
    const auto f = Signal::sample(short_grid, [](double) { return 0.5; }, BandSpec::symmetric(0.5));
    CHECK_THROWS_AS(smooth(f, 0), Error);
    try {
        smooth(f, 0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientPadding);
    }
    try {
        SmoothingFilter(SmoothingWindow(0), 0.05, 9.6);
        FAIL("expected KernelTooWide");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::KernelTooWide);
    }
    try {
        SmoothingFilter(SmoothingWindow(0), 0.05, 10.0);
        FAIL("expected NyquistViolation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NyquistViolation);
    }
}

TEST_CASE("pipeline config") {
    PipelineConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.depth_for(kTorus2) == 4);
    CHECK(c.hash() == PipelineConfig{}.hash());
    CHECK(c.hash().size() == 16);
    const auto back = PipelineConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    PipelineConfig d = c;
    d.spacing = 0.025;
    CHECK(d.hash() != c.hash());
    d = c;
    d.smoothing_depth = 0;
    CHECK_THROWS_AS(d.validate(), Error);
    d = c;
    d.depth = 1;
    CHECK_THROWS_AS(d.depth_for(kTorus2), Error);
    const auto out = c.output_grid();
    CHECK(out.count() == 801);
    CHECK(std::abs(out.t_min() + 20.0) <= 1e-12);
}

TEST_CASE("phi2 of zero is zero") {
    const auto& p = torus_pipeline();
    const auto zero = Signal::sample(p.input_grid(), [](double) { return 0.0; }, BandSpec::symmetric(1.0));
    const auto out = p.phi2({zero});
    REQUIRE(out.size() == 9);
    for (const auto& e : out) CHECK(max_abs(e) == 0.0);
}

TEST_CASE("phi2 entries sum back to the input") {
    const auto& p = torus_pipeline();
    const auto f = Signal::sample(p.input_grid(), [](double t) { return 0.5 + 0.5 * std::cos(2.0 * pi * 0.25 * t); },
                                  BandSpec::symmetric(0.25));
    const auto parts = p.phi2({f});
    const FilterBankConfig bank{};
    std::vector<double> k;
    for (int n = -bank.n_max; n <= bank.n_max; ++n) k.push_back(TentFilter(n, bank).k());
    CHECK(parts.front().grid().t_min() > p.input_grid().t_min());
    double err = 0.0;
    for (std::size_t i = 0; i < parts.front().size(); i += 41) {
        cplx sum = 0.0;
        for (std::size_t n = 0; n < k.size(); ++n) sum += k[n] * parts[n][i];
        const double t = parts.front().grid().time(i);
        err = std::max(err, std::abs(sum - cplx(0.5 + 0.5 * std::cos(2.0 * pi * 0.25 * t))));
    }
    CHECK(err <= 1e-4);
}

TEST_CASE("trace layout") {
    const auto& p = torus_pipeline();
    const auto tr = p.embed(FlowPoint{{0.1, 0.2}});
    CHECK(tr.size() == 4 * 9 * 2 * 3);
    CHECK(tr[0].grid() == PipelineConfig{}.output_grid());
    for (std::size_t i = 0; i < tr.size(); ++i) CHECK(tr.flat_index(tr.index_of(i)) == i);
    const auto ix = tr.index_of(tr.flat_index({2, -3, 1, 2}));
    CHECK(ix.l == 2);
    CHECK(ix.n == -3);
    CHECK(ix.branch == 1);
    CHECK(ix.j == 2);
    CHECK(tr.flat_index({0, -4, 0, 0}) == 0);
    CHECK(tr.flat_index({0, -4, 0, 1}) == 1);
    CHECK(tr.flat_index({0, -4, 1, 0}) == 3);
    CHECK(tr.flat_index({0, -3, 0, 0}) == 6);
    CHECK(tr.band_of(tr.flat_index({0, 3, 0, 0})) == BandSpec({-2.0, -1.0}, {1.0, 2.0}));
    CHECK_THROWS_AS(tr.flat_index({4, 0, 0, 0}), Error);
    CHECK_THROWS_AS(tr.flat_index({0, 5, 0, 0}), Error);
}

TEST_CASE("trace entries are bounded, 1-Lipschitz and band-limited") {
    const auto& p = torus_pipeline();
    for (const auto& x : mesh(kTorus2, 4)) {
        const auto c = check_trace(p.embed(x));
        CHECK(c.bounded);
        CHECK(c.lipschitz);
        CHECK(c.band_limited);
        CHECK(c.max_abs <= 0.5);
    }
    for (const auto& f : {FlowSpec::rotation_suspension(0.3), FlowSpec::permutation_suspension({1, 2, 0, 4, 3})}) {
        const EmbeddingPipeline q(f, PipelineConfig{});
        for (const auto& x : mesh(f, 3)) CHECK(check_trace(q.embed(x)).pass());
    }
}

TEST_CASE("embedding is deterministic") {
    const auto& p = torus_pipeline();
    const FlowPoint x{{0.3, 0.6}};
    const auto a = p.embed(x);
    const auto b = full_embed(kTorus2, x, PipelineConfig{});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < a[i].size(); ++k) REQUIRE(a[i][k] == b[i][k]);
}

TEST_CASE("embedding is equivariant") {
    const auto& p = torus_pipeline();
    const double h = 0.05;
    const FlowPoint x{{0.27, 0.81}};
    const auto base = p.embed(x);
    for (int steps : {1, 5, 37}) {
        const double r = steps * h;
        const auto moved = p.embed(flow_step(kTorus2, x, r));
        const auto shifted = base.translated(r);
        CHECK(trace_sup_distance(moved, shifted) <= 1e-5);
    }
}

TEST_CASE("fixed-point flow gives constant entries") {
    const FlowSpec still = FlowSpec::torus({0.0});
    const PipelineConfig cfg{};
    const auto tr = full_embed(still, FlowPoint{{0.3}}, cfg);
    const double level[2] = {0.5 * (1.0 + std::cos(2.0 * pi * 0.3)), 0.5 * (1.0 + std::sin(2.0 * pi * 0.3))};
    const double a = cfg.bank.half_width;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto ix = tr.index_of(i);
        const auto& e = tr[i];
        for (std::size_t k = 1; k < e.size(); ++k) REQUIRE(e[k] == e[0]);
        const double half_q = 0.5 / (ix.j + 1);
        const double k_n = TentFilter(ix.n, cfg.bank).k();
        // Only the n = 0 filter passes frequency 0; the others see it through the truncation of
        // their kernels at |t| = A (a kink of the neighbouring tents).
        double expect = 0.0;
        if (ix.branch == 0 && ix.n == 0) expect = level[ix.l] * (1.0 - 2.0 / (pi * pi * a)) / k_n * half_q;
        if (ix.branch == 0 && std::abs(ix.n) == 1) expect = level[ix.l] / (pi * pi * a) / k_n * half_q;
        const double tol = std::abs(ix.n) <= 1 ? 1e-5 : 1e-6;
        CHECK(std::abs(e[0].real() - expect) <= tol);
    }
}

TEST_CASE("smoothed entries reconstruct the smoothed observable") {
    const auto& p = torus_pipeline();
    const auto& cfg = p.config();
    const FlowPoint x{{0.15, 0.55}};
    const auto tr = p.embed(x);
    const double omega = 0.41421356237309503;
    std::vector<double> k;
    for (int n = -cfg.bank.n_max; n <= cfg.bank.n_max; ++n) k.push_back(TentFilter(n, cfg.bank).k());
    for (int j = 0; j < cfg.smoothing_depth; ++j) {
        const double q = 1.0 / (j + 1);
        double err = 0.0;
        const auto& grid = tr[0].grid();
        for (std::size_t i = 0; i < grid.count(); i += 7) {
            double sum = 0.0;
            for (int n = -cfg.bank.n_max; n <= cfg.bank.n_max; ++n)
                sum += k[n + cfg.bank.n_max] * tr.at({0, n, 0, j})[i].real();
            const double t = grid.time(i);
            const double truth = q / 4.0 + (std::sin(2.0 * pi * (0.15 + omega * (t + q))) -
                                            std::sin(2.0 * pi * (0.15 + omega * t))) / (8.0 * pi * omega);
            err = std::max(err, std::abs(sum - truth));
        }
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("injectivity audit on a mesh") {
    const auto& p = torus_pipeline();
    std::vector<EmbeddingTrace> traces;
    for (const auto& x : mesh(kTorus2, 10)) traces.push_back(p.embed(x));
    const auto r = injectivity_audit(kTorus2, traces, 1e-9, 1e-6);
    CHECK(r.pairs.size() == 45);
    CHECK(r.pass());
    CHECK(r.failures == 0);
    CHECK(r.duplicates == 0);
    CHECK(r.margin > 1e-4);
    CHECK(r.min_trace_distance == r.margin);
    const auto csv = r.to_csv();
    CHECK(csv.rows.size() == 45);
    CHECK(csv.header.back() == "verdict");

    const auto parallel = injectivity_audit(kTorus2, traces, 1e-9, 1e-6, 3);
    for (std::size_t i = 0; i < r.pairs.size(); ++i) CHECK(parallel.pairs[i].trace_distance == r.pairs[i].trace_distance);

    const auto strict = injectivity_audit(kTorus2, traces, 10.0, 1e-6);
    CHECK_FALSE(strict.pass());
    CHECK(strict.failures == 45);
}

TEST_CASE("injectivity audit flags duplicates and unresolved pairs") {
    const auto& p = torus_pipeline();
    const FlowPoint x{{0.2, 0.4}};
    const FlowPoint near{{0.2 + 1e-8, 0.4}};
    const FlowPoint far{{0.7, 0.1}};
    const std::vector<EmbeddingTrace> traces{p.embed(x), p.embed(x), p.embed(near), p.embed(far)};
    const auto r = injectivity_audit(kTorus2, traces, 1e-6, 1e-6);
    CHECK(r.duplicates == 1);
    CHECK(r.pairs[0].verdict == PairVerdict::Duplicate);
    CHECK(r.pairs[0].trace_distance == 0.0);
    CHECK(r.min_trace_distance == 0.0);
    CHECK(r.closest_flow_distance == 0.0);
    CHECK(r.pairs[1].verdict == PairVerdict::ResolutionLimited);
    CHECK(r.resolution_limited == 2);
    CHECK(r.pass());
    CHECK(to_string(PairVerdict::ResolutionLimited) == "resolution_limited");
}

TEST_CASE("trace write and read") {
    const auto& p = torus_pipeline();
    const auto tr = p.embed(FlowPoint{{0.05, 0.95}});
    const auto dir = scratch("trace");
    tr.write(dir);
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(std::filesystem::exists(dir / ("entry_" + std::to_string(tr.size() - 1) + ".csv")));
    const auto back = EmbeddingTrace::read(dir);
    CHECK(back.manifest() == tr.manifest());
    CHECK(back.point() == tr.point());
    CHECK(trace_sup_distance(back, tr) == 0.0);

    auto m = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
    m["config_hash"] = "0000000000000000";
    io::write_text(dir / "manifest.json", m.dump());
    try {
        EmbeddingTrace::read(dir);
        FAIL("expected ManifestMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ManifestMismatch);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("mollifier has unit mass and compact support") {
    for (int n : {1, 2, 4, 16}) {
        const auto mass = adaptive_simpson([&](double t) { return mollifier(t, n); }, -1.0 / n, 1.0 / n, 1e-13);
        CHECK(std::abs(mass.value - 1.0) <= 1e-10);
        CHECK(mollifier(1.0 / n, n) == 0.0);
        CHECK(mollifier(-1.5 / n, n) == 0.0);
        CHECK(mollifier(0.0, n) > 0.0);
    }
    CHECK_THROWS_AS(mollifier(0.0, 0), Error);
}

TEST_CASE("mollify") {
    const auto grid = UniformGrid::covering(-4.0, 4.0, 0.002);
    const auto one = Signal::sample(grid, [](double) { return 0.7; });
    const auto flat = mollify(one, 4);
    CHECK(flat.size() == grid.count() - 2 * 125);
    for (const auto& z : flat.samples()) CHECK(std::abs(z - cplx(0.7)) <= 1e-14);
    CHECK_THROWS_AS(mollify(Signal::sample(UniformGrid(0.0, 0.1, 10), [](double) { return 1.0; }), 1), Error);

    auto kinked = [](double t) { return std::abs(std::sin(pi * t)); };
    const auto f = Signal::sample(grid, kinked);
    auto err = [&](int n) {
        const auto g = mollify(f, n);
        CHECK(g.value_bound() <= f.value_bound());
        double e = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = g.grid().time(i);
            if (std::abs(t) <= 3.0) e = std::max(e, std::abs(g[i].real() - kinked(t)));
        }
        return e;
    };
    const double e4 = err(4), e8 = err(8), e16 = err(16), e32 = err(32);
    CHECK(e8 < e4);
    CHECK(e16 < e8);
    CHECK(e32 < e16);
    // At the kink the error is pi/n times the first absolute moment of the bump.
    const auto moment = adaptive_simpson([](double s) { return std::abs(s) * mollifier(s); }, -1.0, 1.0, 1e-12);
    CHECK(std::abs(e4 - pi * moment.value / 4) <= 0.1 * pi * moment.value / 4);
    CHECK(std::abs(e16 - pi * moment.value / 16) <= 0.1 * pi * moment.value / 16);
}
