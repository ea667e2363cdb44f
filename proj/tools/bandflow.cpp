#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bandflow/error.hpp"
#include "bandflow/harness.hpp"
#include "bandflow/io.hpp"

namespace {

using namespace bandflow;
using namespace bandflow::harness;

constexpr int kExitFailedChecks = 1;
constexpr int kExitBadInput = 2;

struct RunOptions {
    std::string config;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::string out = "out";
    int jobs = 1;
    CLI::Option* seed_flag = nullptr;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool config_required) {
    auto* c = cmd->add_option("--config", o.config, "INI configuration file");
    if (config_required) c->required();
    cmd->add_option("--set", o.sets, "override KEY=VALUE (section.key or a unique key), repeatable");
    o.seed_flag = cmd->add_option("--seed", o.seed, "replaces experiment.seed");
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--jobs", o.jobs, "worker threads (outputs do not depend on it)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

int run(const RunOptions& o, std::optional<ExperimentKind> kind) {
    auto doc = o.config.empty() ? IniDocument{} : IniDocument::load(o.config);
    for (const auto& s : o.sets) doc.apply_override(s);
    if (o.seed_flag->count() > 0) doc.apply_override("experiment.seed=" + std::to_string(o.seed));
    const auto cfg = ExperimentConfig::resolve(doc, kind);
    const auto result = run_experiment(cfg, o.out, o.jobs);
    for (const auto& c : result.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.check << " margin=" << io::format_double(c.margin) << "\n";
    std::cout << "wrote " << o.out << "\n";
    if (!result.pass()) {
        std::cerr << "failing checks:";
        for (const auto& n : result.failing()) std::cerr << " " << n;
        std::cerr << "\n";
        return kExitFailedChecks;
    }
    return 0;
}

Tolerances parse_tolerances(const std::vector<std::string>& specs, double fallback) {
    Tolerances t;
    t.fallback = fallback;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ConfigParse, "--tol expects COLUMN=VALUE, got '" + s + "'");
        t.per_column[s.substr(0, eq)] = io::parse_double(s.substr(eq + 1));
    }
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Band-limited embedding experiments: embeddings, verification checks, mean-dimension bounds"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto* run_cmd = app.add_subcommand("run", "run the experiment named by experiment.kind");
    add_run_options(run_cmd, run_opts, true);

    struct Fixed {
        const char* name;
        const char* help;
        ExperimentKind kind;
    };
    const Fixed fixed[] = {
        {"embed", "embed a flow mesh and audit the traces", ExperimentKind::Embed},
        {"verify", "rigidity, growth and delay-embedding checks", ExperimentKind::Verify},
        {"mdim", "mean-dimension bracket, sampling witness and embedding probe", ExperimentKind::Mdim},
        {"kernels", "dump filter and interpolation kernel tables", ExperimentKind::Kernels},
    };
    std::vector<RunOptions> fixed_opts(std::size(fixed));
    std::vector<CLI::App*> fixed_cmds;
    for (std::size_t i = 0; i < std::size(fixed); ++i) {
        auto* cmd = app.add_subcommand(fixed[i].name, fixed[i].help);
        add_run_options(cmd, fixed_opts[i], false);
        fixed_cmds.push_back(cmd);
    }

    std::string dir_a, dir_b;
    std::vector<std::string> tol_specs;
    double tol_default = 0.0;
    auto* compare_cmd = app.add_subcommand("compare", "compare the CSV outputs of two runs");
    compare_cmd->add_option("dir_a", dir_a, "first run directory")->required();
    compare_cmd->add_option("dir_b", dir_b, "second run directory")->required();
    compare_cmd->add_option("--tol", tol_specs, "absolute tolerance COLUMN=VALUE, repeatable");
    compare_cmd->add_option("--tol-default", tol_default, "tolerance for other numeric columns")->capture_default_str();

    auto* defaults_cmd = app.add_subcommand("defaults", "print every configuration key with its default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadInput;
    }

    try {
        if (*run_cmd) return run(run_opts, std::nullopt);
        for (std::size_t i = 0; i < fixed_cmds.size(); ++i)
            if (*fixed_cmds[i]) return run(fixed_opts[i], fixed[i].kind);
        if (*compare_cmd) {
            const auto rep = compare_golden(dir_a, dir_b, parse_tolerances(tol_specs, tol_default));
            if (rep.empty()) {
                std::cout << "no differences\n";
                return 0;
            }
            std::cout << rep.to_text();
            return kExitFailedChecks;
        }
        if (*defaults_cmd) {
            std::cout << defaults_ini();
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return 0;
}
