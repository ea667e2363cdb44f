#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bandflow/flow.hpp"
#include "bandflow/pipeline.hpp"
#include "bandflow/verify.hpp"

namespace bandflow::harness {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct IniValue {
    std::string text;
    /// 1-based position of the value; line 0 marks a command-line override.
    int line = 0;
    int column = 0;
};

/// INI text: `[section]` headers, `key = value` lines, `#` or `;` comment lines.
struct IniDocument {
    std::map<std::string, std::map<std::string, IniValue>> sections;

    /// Throws ConfigParse naming the line and column of the first malformed line.
    static IniDocument parse(std::string_view text);
    static IniDocument load(const std::filesystem::path& path);

    const IniValue* find(const std::string& section, const std::string& key) const;
    /// Applies `section.key=value`, or `key=value` when the key name is unique in the schema.
    void apply_override(std::string_view assignment);
};

struct SchemaEntry {
    std::string_view section;
    std::string_view key;
    /// Empty for keys without a default.
    std::string_view fallback;
    std::string_view doc;
};

/// Every accepted key in canonical order.
const std::vector<SchemaEntry>& schema();

/// The documented defaults as INI text (required keys appear commented out).
std::string defaults_ini();

enum class ExperimentKind { Embed, Verify, Mdim, Kernels };
std::string to_string(ExperimentKind k);
ExperimentKind parse_kind(std::string_view s);

struct FlowSettings {
    /// Empty when the configuration names no flow.
    std::string kind;
    std::vector<double> omega;
    double rho;
    std::vector<int> perm;
    std::size_t depth;

    /// Throws ConfigMissingKey when kind is empty.
    FlowSpec spec() const;
};

struct EmbedSettings {
    std::size_t mesh;
    double eps;
    double separation;
    std::size_t trace_points;
};

struct MdimSettings {
    double c;
    /// 0 selects 0.95/(2c).
    double d;
    double eps;
    std::vector<double> horizons;
    std::size_t witness_trials;
    int widim_dim;
    int widim_k;
    double widim_eps;
    std::size_t widim_grid;
    std::size_t widim_budget;

    double spacing() const;
};

struct VerifySettings {
    double gamma;
    double period;
    std::size_t probe_samples;
    double control_gamma;
    double control_period;
    double pw_r;
    std::vector<double> pw_y;
    std::size_t pw_count;
    int takens_d;
    std::vector<double> takens_times;
    std::size_t takens_mesh;
    int takens_retries;
    std::size_t takens_net;
};

struct ExperimentConfig {
    ExperimentKind kind;
    std::uint64_t seed;
    FlowSettings flow;
    PipelineConfig pipeline;
    EmbedSettings embed;
    MdimSettings mdim;
    VerifySettings verify;
    double table_step;

    /// Resolves the document against the schema. `forced` replaces experiment.kind, which is
    /// otherwise required; flow.kind is required for embed and verify. Unknown sections or
    /// keys and malformed values throw ConfigParse, missing required keys ConfigMissingKey.
    static ExperimentConfig resolve(const IniDocument& doc, std::optional<ExperimentKind> forced = std::nullopt);

    /// Canonical INI text with every key; resolving it gives back the same configuration.
    std::string to_ini() const;
};

struct RunResult {
    std::vector<CheckReport> checks;

    bool pass() const;
    std::vector<std::string> failing() const;
};

/// Runs the experiment and writes manifest.json, report.json, checks.csv and the per-kind
/// CSV files into `out`. Outputs do not depend on `jobs`.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs = 1);

struct CellDiff {
    std::string file;
    std::size_t row;
    std::string column;
    std::string a;
    std::string b;
};

struct CompareReport {
    /// Missing files, header or row-count mismatches.
    std::vector<std::string> structural;
    std::vector<CellDiff> cells;

    bool empty() const noexcept { return structural.empty() && cells.empty(); }
    std::string to_text() const;
};

struct Tolerances {
    std::map<std::string, double> per_column;
    double fallback = 0.0;

    double for_column(const std::string& column) const;
};

/// Compares every CSV under two run directories. Numeric cells match within the column
/// tolerance, other cells must be equal. Throws ManifestMismatch when the experiment kinds
/// differ.
CompareReport compare_golden(const std::filesystem::path& a, const std::filesystem::path& b, const Tolerances& tol);

}  // namespace bandflow::harness
