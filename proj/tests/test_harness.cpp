#include <doctest.h>

#include <filesystem>
#include <string>

#include "bandflow/error.hpp"
#include "bandflow/harness.hpp"
#include "bandflow/io.hpp"

using namespace bandflow;
using namespace bandflow::harness;
namespace fs = std::filesystem;

namespace {

std::string error_of(auto&& fn, ErrorCode expected) {
    try {
        fn();
    } catch (const Error& e) {
        CHECK(e.code() == expected);
        return e.what();
    }
    FAIL("no error raised");
    return {};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("bandflow_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

ExperimentConfig config_for(ExperimentKind kind, std::initializer_list<const char*> sets = {}) {
    IniDocument doc;
    for (const auto* s : sets) doc.apply_override(s);
    return ExperimentConfig::resolve(doc, kind);
}

}  // namespace

TEST_CASE("INI documents") {
    const auto doc = IniDocument::parse(
        "# comment\n"
        "[flow]\n"
        "kind = torus\n"
        "  omega=0.3,0.5  \n"
        "; another comment\n"
        "\n"
        "[mdim]\n"
        "c = 0.25\n");
    REQUIRE(doc.find("flow", "kind"));
    CHECK(doc.find("flow", "kind")->text == "torus");
    CHECK(doc.find("flow", "kind")->line == 3);
    CHECK(doc.find("flow", "kind")->column == 8);
    CHECK(doc.find("flow", "omega")->text == "0.3,0.5");
    CHECK(doc.find("flow", "omega")->column == 9);
    CHECK(doc.find("mdim", "c")->line == 8);
    CHECK(doc.find("mdim", "d") == nullptr);
}

TEST_CASE("INI syntax errors name line and column") {
    auto msg = error_of([] { IniDocument::parse("[flow]\nkind torus\n"); }, ErrorCode::ConfigParse);
    CHECK(msg.find("line 2, column 1") != std::string::npos);
    msg = error_of([] { IniDocument::parse("[flow]\n\n[nowhere]\n"); }, ErrorCode::ConfigParse);
    CHECK(msg.find("line 3, column 2") != std::string::npos);
    CHECK(msg.find("unknown section [nowhere]") != std::string::npos);
    msg = error_of([] { IniDocument::parse("[flow]\n  colour = red\n"); }, ErrorCode::ConfigParse);
    CHECK(msg.find("line 2, column 3") != std::string::npos);
    CHECK(msg.find("unknown key 'colour'") != std::string::npos);
    msg = error_of([] { IniDocument::parse("[flow]\nkind = torus\nkind = torus\n"); }, ErrorCode::ConfigParse);
    CHECK(msg.find("line 3") != std::string::npos);
    msg = error_of([] { IniDocument::parse("[flow\n"); }, ErrorCode::ConfigParse);
    CHECK(msg.find("line 1, column 6: expected ']'") != std::string::npos);
    msg = error_of([] { IniDocument::parse("kind = torus\n"); }, ErrorCode::ConfigParse);
    CHECK(msg.find("outside of a section") != std::string::npos);
    msg = error_of([] { IniDocument::parse("[flow]\nkind =   \n"); }, ErrorCode::ConfigParse);
    CHECK(msg.find("empty value") != std::string::npos);
}

TEST_CASE("overrides") {
    IniDocument doc;
    doc.apply_override("mdim.c=0.25");
    doc.apply_override("horizons = 100,200");
    CHECK(doc.find("mdim", "c")->text == "0.25");
    CHECK(doc.find("mdim", "horizons")->text == "100,200");
    CHECK(doc.find("mdim", "c")->line == 0);
    auto msg = error_of([&] { doc.apply_override("eps=0.1"); }, ErrorCode::ConfigParse);
    CHECK(msg.find("pipeline.eps") != std::string::npos);
    CHECK(msg.find("mdim.eps") != std::string::npos);
    error_of([&] { doc.apply_override("nothing=1"); }, ErrorCode::ConfigParse);
    error_of([&] { doc.apply_override("flow.nothing=1"); }, ErrorCode::ConfigParse);
    error_of([&] { doc.apply_override("c"); }, ErrorCode::ConfigParse);
}

TEST_CASE("resolution against the schema") {
    auto msg = error_of([] { ExperimentConfig::resolve(IniDocument{}); }, ErrorCode::ConfigMissingKey);
    CHECK(msg.find("experiment.kind") != std::string::npos);
    msg = error_of([] { config_for(ExperimentKind::Embed); }, ErrorCode::ConfigMissingKey);
    CHECK(msg.find("flow.kind") != std::string::npos);
    error_of([] { config_for(ExperimentKind::Verify); }, ErrorCode::ConfigMissingKey);
    CHECK_NOTHROW(config_for(ExperimentKind::Mdim));

    const auto doc = IniDocument::parse("[experiment]\nkind = mdim\n[mdim]\nhorizons = 100, x\n");
    msg = error_of([&] { ExperimentConfig::resolve(doc); }, ErrorCode::ConfigParse);
    CHECK(msg.find("line 4, column 12") != std::string::npos);
    CHECK(msg.find("mdim.horizons") != std::string::npos);
    msg = error_of([] { ExperimentConfig::resolve(IniDocument::parse("[experiment]\nkind = plot\n")); },
                   ErrorCode::ConfigParse);
    CHECK(msg.find("line 2, column 8") != std::string::npos);
    error_of([] { config_for(ExperimentKind::Embed, {"flow.kind=sphere"}); }, ErrorCode::ConfigParse);
    error_of([] { config_for(ExperimentKind::Mdim, {"witness_trials=-3"}); }, ErrorCode::ConfigParse);
}

TEST_CASE("documented defaults") {
    const auto c = config_for(ExperimentKind::Embed, {"flow.kind=torus"});
    CHECK(c.seed == 1);
    CHECK(c.flow.omega == std::vector<double>{0.41421356237309515});
    CHECK(c.pipeline.bank.alpha == 0.5);
    CHECK(c.pipeline.bank.beta == 1.0);
    CHECK(c.pipeline.bank.n_max == 4);
    CHECK(c.pipeline.bank.half_width == 40.0);
    CHECK(c.pipeline.smoothing_depth == 3);
    CHECK(c.mdim.widim_grid == 50);
    CHECK(c.mdim.widim_budget == 10000);
    CHECK(c.mdim.spacing() == doctest::Approx(0.95));
    CHECK(c.verify.takens_times == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(c.flow.spec().is_torus());

    // The shipped reference file is the schema rendered as INI, and it parses.
    const auto shipped = io::read_text(fs::path(BANDFLOW_SOURCE_DIR) / "docs" / "defaults.ini");
    CHECK(shipped == defaults_ini());
    CHECK_NOTHROW(IniDocument::parse(shipped));
    for (const char* name : {"embed.cfg", "verify.cfg", "mdim.cfg", "kernels.cfg"})
        CHECK_NOTHROW(ExperimentConfig::resolve(IniDocument::load(fs::path(BANDFLOW_SOURCE_DIR) / "config" / name)));
}

TEST_CASE("canonical config round trip") {
    const auto a = config_for(ExperimentKind::Verify,
                              {"flow.kind=permutation_suspension", "perm=2,0,1", "pw_y=0.25,3", "experiment.seed=42"});
    const auto text = a.to_ini();
    const auto b = ExperimentConfig::resolve(IniDocument::parse(text));
    CHECK(b.to_ini() == text);
    CHECK(b.kind == ExperimentKind::Verify);
    CHECK(b.seed == 42);
    CHECK(b.flow.perm == std::vector<int>{2, 0, 1});
    CHECK(b.verify.pw_y == std::vector<double>{0.25, 3.0});

    const auto m = config_for(ExperimentKind::Mdim, {"c=0.3333333333333333"});
    const auto again = ExperimentConfig::resolve(IniDocument::parse(m.to_ini()));
    CHECK(again.mdim.c == m.mdim.c);
    CHECK(again.to_ini().find("[flow]\nomega") != std::string::npos);
}

TEST_CASE("mdim run writes the bracket with 2c between the bounds") {
    const auto dir = scratch("mdim");
    const auto cfg = config_for(ExperimentKind::Mdim, {"c=0.5", "widim_budget=50"});
    const auto result = run_experiment(cfg, dir);
    CHECK(result.pass());
    const auto t = io::CsvTable::parse(io::read_text(dir / "bracket.csv"));
    REQUIRE(t.rows.size() == 1);
    const double lower = io::parse_double(t.rows[0][t.column("lower_density")]);
    const double two_c = io::parse_double(t.rows[0][t.column("two_c")]);
    const double upper = io::parse_double(t.rows[0][t.column("upper_slope")]);
    CHECK(two_c == 1.0);
    CHECK(lower <= two_c);
    CHECK(two_c <= upper);
    CHECK(t.column("lower_density") < t.column("two_c"));
    CHECK(t.column("two_c") < t.column("upper_slope"));

    const auto manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
    CHECK(manifest["kind"] == "mdim");
    CHECK(manifest["tool_version"] == std::string(kToolVersion));
    CHECK(ExperimentConfig::resolve(IniDocument::parse(manifest["config"].get<std::string>())).to_ini() ==
          cfg.to_ini());
    CHECK(manifest["files"] == nlohmann::json::array({"bracket.csv", "checks.csv"}));
}

TEST_CASE("embed run writes audits and a readable trace") {
    const auto dir = scratch("embed");
    const auto cfg = config_for(ExperimentKind::Embed, {"flow.kind=torus", "mesh=4", "window=10"});
    const auto result = run_experiment(cfg, dir);
    CHECK(result.pass());
    CHECK(result.checks.size() == 4);
    const auto audit = io::CsvTable::parse(io::read_text(dir / "audit.csv"));
    CHECK(audit.rows.size() == 6);
    const auto trace = EmbeddingTrace::read(dir / "traces" / "point_0");
    CHECK(trace.size() > 0);
    CHECK(trace.entries().front().size() > 0);
    CHECK(trace.config().hash() == cfg.pipeline.hash());

    const auto strict = config_for(ExperimentKind::Embed, {"flow.kind=torus", "mesh=4", "window=10", "pipeline.eps=1"});
    const auto failed = run_experiment(strict, scratch("embed_strict"));
    CHECK_FALSE(failed.pass());
    CHECK(failed.failing() == std::vector<std::string>{"injectivity"});
}

TEST_CASE("runs are deterministic and schedule independent") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto cfg = config_for(ExperimentKind::Verify, {"flow.kind=torus", "experiment.seed=7"});
    run_experiment(cfg, a, 1);
    run_experiment(cfg, b, 3);
    CHECK(compare_golden(a, b, {}).empty());
    for (const char* f : {"checks.csv", "paley_wiener.csv", "rigidity.csv", "takens.csv", "report.json"})
        CHECK(io::read_text(a / f) == io::read_text(b / f));

    const auto other = scratch("det_seed");
    run_experiment(config_for(ExperimentKind::Verify, {"flow.kind=torus", "experiment.seed=8"}), other);
    CHECK_FALSE(compare_golden(a, other, {}).empty());
}

TEST_CASE("golden comparison") {
    const auto a = scratch("golden_a"), b = scratch("golden_b");
    const auto cfg = config_for(ExperimentKind::Kernels, {"n_max=2", "table_step=0.5"});
    run_experiment(cfg, a);
    run_experiment(cfg, b);
    CHECK(compare_golden(a, b, {}).empty());

    // Perturb one cell of b.
    auto t = io::CsvTable::parse(io::read_text(b / "knorm.csv"));
    const auto col = t.column("k_n");
    t.rows[1][col] = io::format_double(io::parse_double(t.rows[1][col]) + 1e-6);
    io::write_text(b / "knorm.csv", t.to_string());
    const auto diff = compare_golden(a, b, {});
    REQUIRE(diff.cells.size() == 1);
    CHECK(diff.cells[0].file == "knorm.csv");
    CHECK(diff.cells[0].row == 2);
    CHECK(diff.cells[0].column == "k_n");
    CHECK(diff.to_text().find("knorm.csv: row 2, column k_n") != std::string::npos);
    CHECK(compare_golden(a, b, {{{"k_n", 1e-5}}, 0.0}).empty());
    CHECK(compare_golden(a, b, {{}, 1e-5}).empty());

    fs::remove(b / "kernels" / "phi_2.csv");
    const auto missing = compare_golden(a, b, {{{"k_n", 1e-5}}, 0.0});
    REQUIRE(missing.structural.size() == 1);
    CHECK(missing.structural[0].find("kernels/phi_2.csv") != std::string::npos);

    const auto m = scratch("golden_mdim");
    run_experiment(config_for(ExperimentKind::Mdim, {"widim_budget=10"}), m);
    error_of([&] { compare_golden(a, m, {}); }, ErrorCode::ManifestMismatch);
    error_of([&] { compare_golden(a, scratch("golden_empty"), {}); }, ErrorCode::ManifestMismatch);
}
