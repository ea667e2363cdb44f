#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "bandflow/error.hpp"
#include "bandflow/filter_bank.hpp"
#include "bandflow/flow.hpp"
#include "bandflow/io.hpp"
#include "bandflow/kernel.hpp"
#include "bandflow/mdim.hpp"
#include "bandflow/parallel.hpp"
#include "bandflow/pipeline.hpp"
#include "bandflow/rng.hpp"
#include "bandflow/trig.hpp"
#include "bandflow/verify.hpp"

namespace {

using namespace bandflow;
namespace fs = std::filesystem;
using io::format_double;

constexpr double kTorusOmega = 0.41421356237309515;

struct Context {
    fs::path dir;
    std::uint64_t seed;
    int jobs;
};

struct Outcome {
    bool pass;
    std::string summary;
};

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds
    std::function<Outcome(const Context&)> run;
};

void write_csv(const Context& ctx, const std::string& name, const io::CsvTable& t) {
    io::write_text(ctx.dir / name, t.to_string());
}

double sup_error_on(const Signal& s, double lo, double hi, const TrigPolynomial& truth) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = s.grid().time(i);
        if (t >= lo && t <= hi) m = std::max(m, std::abs(s[i] - cplx(truth(t).real())));
    }
    return m;
}

Outcome reconstruction(const Context& ctx) {
    constexpr std::size_t kCount = 50;
    constexpr double kBand = 1.4, kTol = 1e-4;
    const FilterBankConfig bank{};
    const auto grid = UniformGrid::covering(-60.0, 60.0, 0.05);
    std::vector<double> err(kCount);
    parallel_for(kCount, ctx.jobs, [&](std::size_t i) {
        const auto p = random_real_trig(mix_seed(ctx.seed, i), 6, 0.0, kBand);
        const auto r = partition_reconstruct(p.sample(grid, BandSpec::symmetric(kBand)), bank);
        err[i] = sup_error_on(r, -20.0, 20.0, p);
    });
    io::CsvTable t{{"polynomial", "max_error"}, {}};
    for (std::size_t i = 0; i < kCount; ++i) t.rows.push_back({std::to_string(i), format_double(err[i])});
    write_csv(ctx, "reconstruction.csv", t);
    const double worst = *std::max_element(err.begin(), err.end());
    return {worst <= kTol, std::to_string(kCount) + " polynomials, N = " + std::to_string(bank.n_max) +
                               ", max interior error " + format_double(worst) + " (limit 1e-4)"};
}

Outcome band_containment(const Context& ctx) {
    constexpr std::size_t kInputs = 20;
    constexpr double kTol = 1e-3;
    const FilterBankConfig bank{};
    const PipelineTolerances tol{};
    const auto grid = UniformGrid::covering(-100.0, 100.0, 0.05);
    const std::size_t filters = 2 * static_cast<std::size_t>(bank.n_max) + 1;
    std::vector<double> leak(kInputs * filters);
    parallel_for(kInputs, ctx.jobs, [&](std::size_t i) {
        const auto h = random_real_trig(mix_seed(ctx.seed, 1000 + i), 8, 0.0, 2.4).sample(grid);
        for (std::size_t k = 0; k < filters; ++k) {
            const TentFilter f(static_cast<int>(k) - bank.n_max, bank);
            leak[i * filters + k] = band_energy_outside(bandpass(h, f), f.band(), Taper::Hann, tol.energy_floor);
        }
    });
    io::CsvTable t{{"input", "filter", "leakage"}, {}};
    for (std::size_t i = 0; i < kInputs; ++i)
        for (std::size_t k = 0; k < filters; ++k)
            t.rows.push_back({std::to_string(i), std::to_string(static_cast<int>(k) - bank.n_max),
                              format_double(leak[i * filters + k])});
    write_csv(ctx, "band_containment.csv", t);
    const double worst = *std::max_element(leak.begin(), leak.end());
    return {worst <= kTol, std::to_string(kInputs) + " inputs x " + std::to_string(filters) +
                               " filters, max out-of-band energy " + format_double(worst) + " (limit 1e-3)"};
}

Outcome pipeline_contract(const Context& ctx) {
    constexpr std::size_t kMesh = 100;
    constexpr double kEps = 1e-9, kSeparation = 1e-6, kShiftTol = 1e-5;
    const auto flow = FlowSpec::torus({kTorusOmega});
    const PipelineConfig cfg{};
    const auto points = mesh(flow, kMesh);
    std::vector<std::optional<EmbeddingTrace>> slots(points.size());
    parallel_for(points.size(), ctx.jobs, [&](std::size_t i) { slots[i] = full_embed(flow, points[i], cfg); });
    std::vector<EmbeddingTrace> traces;
    for (auto& s : slots) traces.push_back(std::move(*s));

    io::CsvTable checks{{"point", "max_abs", "max_quotient", "bounded", "lipschitz"}, {}};
    bool bounded = true, lipschitz = true;
    double max_abs = 0.0, max_quotient = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto c = check_trace(traces[i]);
        bounded = bounded && c.bounded;
        lipschitz = lipschitz && c.lipschitz;
        max_abs = std::max(max_abs, c.max_abs);
        max_quotient = std::max(max_quotient, c.max_quotient);
        checks.rows.push_back({std::to_string(i), format_double(c.max_abs), format_double(c.max_quotient),
                               c.bounded ? "1" : "0", c.lipschitz ? "1" : "0"});
    }
    write_csv(ctx, "pipeline_traces.csv", checks);

    const auto audit = injectivity_audit(flow, traces, kEps, kSeparation, ctx.jobs);
    write_csv(ctx, "pipeline_audit.csv", audit.to_csv());
    const bool injective = audit.pass() && audit.margin > 0.0;

    // Grid shifts of a few mesh points.
    const double h = cfg.spacing;
    const int steps[] = {1, 5, 37};
    constexpr std::size_t kShiftPoints = 5;
    std::vector<double> shift_err(kShiftPoints * std::size(steps));
    parallel_for(shift_err.size(), ctx.jobs, [&](std::size_t k) {
        const auto& x = points[k / std::size(steps)];
        const double r = steps[k % std::size(steps)] * h;
        shift_err[k] = trace_sup_distance(full_embed(flow, flow_step(flow, x, r), cfg),
                                          traces[k / std::size(steps)].translated(r));
    });
    io::CsvTable eq{{"point", "steps", "sup_difference"}, {}};
    for (std::size_t k = 0; k < shift_err.size(); ++k)
        eq.rows.push_back({std::to_string(k / std::size(steps)), std::to_string(steps[k % std::size(steps)]),
                           format_double(shift_err[k])});
    write_csv(ctx, "pipeline_equivariance.csv", eq);
    const double worst_shift = *std::max_element(shift_err.begin(), shift_err.end());

    return {bounded && lipschitz && injective && worst_shift <= kShiftTol,
            "max |entry| " + format_double(max_abs) + ", max quotient " + format_double(max_quotient) +
                ", min pair distance " + format_double(audit.margin) + " over " + std::to_string(audit.pairs.size()) +
                " pairs, shift error " + format_double(worst_shift) + " (limit 1e-5)"};
}

Outcome mdim_bracket(const Context& ctx) {
    std::vector<MdimRow> rows;
    bool pass = true;
    double worst_width = 0.0;
    for (double c : {0.25, 0.5, 1.0}) {
        const auto r = mdim_slope_experiment({"c=" + format_double(c), c, 0.95 / (2.0 * c), 0.05, {200.0}});
        for (const auto& row : r) {
            const double width = (row.upper_slope - row.lower_density) / (2.0 * c);
            worst_width = std::max(worst_width, width);
            pass = pass && row.bracket_pass && row.lower_density <= 2.0 * c && 2.0 * c <= row.upper_slope &&
                   width <= 0.15;
            rows.push_back(row);
        }
    }
    write_csv(ctx, "mdim_bracket.csv", mdim_table(rows));
    return {pass, "c in {1/4, 1/2, 1}: lower <= 2c <= upper, widest bracket " + format_double(100.0 * worst_width) +
                      "% of 2c (limit 15%)"};
}

Outcome sampling_lemma(const Context& ctx) {
    constexpr std::size_t kTrials = 100;
    const auto witness = lattice_injectivity_witness(0.45, 1.0, kTrials, ctx.seed);
    const auto alias = lattice_injectivity_witness_unchecked(0.6, 1.0, kTrials, ctx.seed);
    const bool aliased = alias.aliasing && alias.aliasing->collision;
    io::CsvTable t{{"two_c_d", "trials", "failures", "max_ratio", "aliasing_sup_difference", "aliasing_lattice_difference"},
                   {}};
    for (const auto* r : {&witness, &alias})
        t.rows.push_back({format_double(2.0 * r->c * r->d), std::to_string(r->trials), std::to_string(r->failures),
                          format_double(r->max_ratio), r->aliasing ? format_double(r->aliasing->sup_difference) : "",
                          r->aliasing ? format_double(r->aliasing->lattice_difference) : ""});
    write_csv(ctx, "sampling.csv", t);
    return {witness.failures == 0 && aliased,
            "2cd = 0.9: " + std::to_string(witness.failures) + " collisions in " + std::to_string(kTrials) +
                " pairs; 2cd = 1.2: aliasing pair " + (aliased ? "collides" : "does not collide") + " (sup difference " +
                (alias.aliasing ? format_double(alias.aliasing->sup_difference) : "n/a") + ")"};
}

Outcome interpolation_kernel(const Context& ctx) {
    constexpr double kEps = 0.05;
    const InterpKernel k(kEps);
    double off = 0.0;
    for (int n = 1; n <= 50; ++n) off = std::max({off, std::abs(k(n)), std::abs(k(-n))});
    const bool cardinal = k(0.0) == 1.0 && off == 0.0;

    // Support of the sampled spectrum: truncation at |t| = 400 costs far less than the threshold.
    const auto grid = UniformGrid::covering(-400.0, 400.0, 0.05);
    const auto spectrum = dft_spectrum(Signal::sample(grid, [&](double t) { return k(t); }), Taper::Rectangular);
    double peak = 0.0;
    for (const auto& l : spectrum) peak = std::max(peak, std::abs(l.amplitude));
    constexpr double kThreshold = 1e-6;
    double measured = 0.0;
    io::CsvTable t{{"frequency", "magnitude"}, {}};
    for (const auto& l : spectrum) {
        const double m = std::abs(l.amplitude) / peak;
        if (m >= kThreshold) measured = std::max(measured, std::abs(l.frequency));
        if (std::abs(l.frequency) <= 1.0) t.rows.push_back({format_double(l.frequency), format_double(m)});
    }
    write_csv(ctx, "interp_spectrum.csv", t);
    const double bin = 1.0 / (static_cast<double>(grid.count()) * grid.spacing());
    const double limit = 0.5 * (1.0 + kEps) + bin;
    const bool band = measured <= limit && measured >= 0.5 * (1.0 - kEps);
    return {cardinal && band, "K(0) = " + format_double(k(0.0)) + ", max |K(n)| for 1 <= |n| <= 50 is " +
                                  format_double(off) + ", spectral half-width " + format_double(measured) + " (limit " +
                                  format_double(limit) + ")"};
}

Outcome periodic_rigidity(const Context& ctx) {
    const UniformGrid grid(0.0, 1.0 / 200.0, 400);
    const auto probe = Signal::sample(grid, [](double t) { return std::cos(2.0 * std::numbers::pi * t); });
    const auto rigid = periodic_rigidity_check(0.4, 1.0, probe);
    const UniformGrid cgrid(0.0, 3.0 / 200.0, 400);
    const auto cprobe = Signal::sample(cgrid, [](double t) { return std::cos(2.0 * std::numbers::pi * t / 3.0); });
    const auto control = periodic_rigidity_check_unchecked(0.4, 3.0, cprobe);
    io::CsvTable t{{"probe", "n", "abs"}, {}};
    for (const auto* r : {&rigid, &control})
        for (const auto& c : r->coefficients)
            t.rows.push_back({r == &rigid ? "cos(2 pi t)" : "cos(2 pi t / 3)", std::to_string(c.n),
                              format_double(std::abs(c.value))});
    write_csv(ctx, "rigidity.csv", t);
    return {rigid.report.pass && control.max_harmonic >= 0.1,
            "max |c_n| (n != 0) " + format_double(rigid.max_harmonic) + " (limit 1e-8); control harmonic " +
                format_double(control.max_harmonic) + " (needs >= 0.1)"};
}

Outcome paley_wiener(const Context& ctx) {
    constexpr std::size_t kCount = 20;
    constexpr double kR = 0.5;
    const std::vector<double> ys{0.5, 1.0, 2.0};
    std::vector<CheckReport> reps(kCount);
    parallel_for(kCount, ctx.jobs, [&](std::size_t i) {
        reps[i] = paley_wiener_growth_check(random_complex_trig(mix_seed(ctx.seed, 2000 + i), 5, -kR, kR), kR, ys);
    });
    io::CsvTable t{{"polynomial", "y", "ratio"}, {}};
    bool pass = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < kCount; ++i) {
        pass = pass && reps[i].pass;
        worst = std::max(worst, reps[i].details["max_ratio"].get<double>());
        for (const auto& row : reps[i].details["per_y"])
            t.rows.push_back({std::to_string(i), format_double(row["y"].get<double>()),
                              format_double(row["ratio"].get<double>())});
    }
    write_csv(ctx, "paley_wiener.csv", t);
    return {pass, std::to_string(kCount) + " polynomials, r = 0.5, y in {0.5, 1, 2}: max ratio " + format_double(worst) +
                      " (limit 1 + 1e-9)"};
}

Outcome takens(const Context& ctx) {
    const auto flow = FlowSpec::torus({kTorusOmega});
    const auto points = mesh(flow, 200);
    const std::vector<double> times{0.0, 1.0, 2.0};
    TakensConfig cfg;
    cfg.seed = ctx.seed;
    cfg.retries = 5;
    const auto random = takens_delay_check(flow, 1, times, points, cfg);
    cfg.perturb = false;
    const auto constant = takens_delay_check(flow, 1, times, points, cfg);
    io::CsvTable t{{"observable", "attempts", "pairs_tested", "min_image_distance", "verdict"}, {}};
    for (const auto* r : {&random, &constant})
        t.rows.push_back({r == &random ? "random" : "constant", std::to_string(r->attempts),
                          std::to_string(r->pairs_tested), format_double(r->min_image_distance),
                          r->report.pass ? "pass" : "fail"});
    write_csv(ctx, "takens.csv", t);
    return {random.report.pass && random.attempts <= 5 && !constant.report.pass,
            "random observable " + std::string(random.report.pass ? "injective" : "not injective") + " after " +
                std::to_string(random.attempts) + " attempt(s), min distance " +
                format_double(random.min_image_distance) + "; constant observable " +
                (constant.report.pass ? "passes" : "fails")};
}

std::vector<Criterion> criteria() {
    return {
        {1, "partition-of-unity reconstruction", 60.0, reconstruction},
        {2, "band containment", 60.0, band_containment},
        {3, "pipeline contract", 300.0, pipeline_contract},
        {4, "mean-dimension bracket", 10.0, mdim_bracket},
        {5, "sampling lemma", 60.0, sampling_lemma},
        {6, "interpolation kernel", 10.0, interpolation_kernel},
        {7, "periodic rigidity", 10.0, periodic_rigidity},
        {8, "Paley-Wiener growth", 10.0, paley_wiener},
        {9, "delay embedding", 60.0, takens},
    };
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

bool report(int id, const std::string& name, bool pass, const std::string& summary) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << summary << std::endl;
    return pass;
}

Outcome run_timed(const Criterion& c, const Context& ctx, double& elapsed) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = c.run(ctx);
    } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
    }
    elapsed = seconds_since(start);
    return o;
}

std::vector<std::string> csv_files(const fs::path& root) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().extension() == ".csv")
            files.push_back(fs::relative(e.path(), root).generic_string());
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria: one PASS/FAIL line per criterion"};
    std::string out = "acceptance_out";
    std::uint64_t seed = 1;
    int jobs = 1;
    app.add_option("--out", out, "directory for the CSV evidence")->capture_default_str();
    app.add_option("--seed", seed, "seed for every random draw")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const fs::path root(out);
    const Context first{root / "run_a", seed, jobs};
    const Context second{root / "run_b", seed, jobs + 1};
    fs::remove_all(first.dir);
    fs::remove_all(second.dir);

    bool all = true;
    double total = 0.0;
    for (const auto& c : criteria()) {
        double elapsed = 0.0;
        const auto o = run_timed(c, first, elapsed);
        total += elapsed;
        const bool in_time = elapsed <= c.time_limit;
        all &= report(c.id, c.name, o.pass && in_time,
                      o.summary + "; " + fixed(elapsed, 2) + " s (limit " + fixed(c.time_limit, 0) + " s)");
    }

    // Determinism: rerun every criterion with a different thread count and compare bytes.
    const auto start = std::chrono::steady_clock::now();
    for (const auto& c : criteria()) {
        double elapsed = 0.0;
        run_timed(c, second, elapsed);
    }
    const auto fa = csv_files(first.dir), fb = csv_files(second.dir);
    std::vector<std::string> differing;
    if (fa != fb) differing.push_back("file lists");
    for (const auto& f : fa)
        if (fs::exists(second.dir / f) && io::read_text(first.dir / f) != io::read_text(second.dir / f))
            differing.push_back(f);
    std::string summary = std::to_string(fa.size()) + " CSV files ";
    if (differing.empty()) {
        summary += "byte-identical on rerun with " + std::to_string(second.jobs) + " threads";
    } else {
        summary += "differ:";
        for (const auto& d : differing) summary += " " + d;
    }
    all &= report(10, "determinism", differing.empty() && !fa.empty(),
                  summary + "; " + fixed(seconds_since(start), 2) + " s");

    std::cout << (all ? "all criteria passed" : "some criteria failed") << " (" << fixed(total, 1)
              << " s for the first pass); evidence in " << first.dir.string() << std::endl;
    return all ? 0 : 1;
}
