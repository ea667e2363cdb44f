#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandflow/filter_bank.hpp"
#include "bandflow/flow.hpp"
#include "bandflow/signal.hpp"

namespace bandflow {

struct PipelineTolerances {
    double leakage = 1e-3;
    /// Mean power per sample below which an entry counts as carrying no content.
    double energy_floor = 1e-6;
    double lipschitz_slack = 1e-9;
};

/// Truncation of the embedding: observable depth L, bank [-N, N] (bank.n_max), smoothing
/// windows j in [0, J), and the output window [-W, W] sampled at spacing h.
struct PipelineConfig {
    /// 0 selects the flow's minimum observable depth.
    std::size_t depth = 0;
    int smoothing_depth = 3;
    double spacing = 0.05;
    double window = 20.0;
    FilterBankConfig bank{};
    PipelineTolerances tol{};

    void validate() const;
    std::size_t depth_for(const FlowSpec& f) const;
    UniformGrid output_grid() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    /// FNV-1a of the canonical JSON form.
    std::string hash() const;
};

/// q_j = 1/(j + 1).
struct SmoothingWindow {
    int j;
    double q;

    explicit SmoothingWindow(int j);
};

/// H(t) = 1/2 int_t^{t+q} f as a grid filter.
///
/// The band-limited interpolant of the samples is integrated exactly against the kernel, so
/// H_i = (h/2) sum_u T_u f_{i+u} with T_u = int_{u-Q}^{u} K(v) dv and Q = q/h. The taps sum
/// to Q, which makes constants exact. eps = 1 - 2 a h for a band of half-width a.
class SmoothingFilter {
public:
    SmoothingFilter(SmoothingWindow w, double spacing, double band_half_width);

    const SmoothingWindow& window() const noexcept { return w_; }
    double spacing() const noexcept { return h_; }
    /// Samples needed before and after each output point.
    std::size_t left() const noexcept { return left_; }
    std::size_t right() const noexcept { return right_; }
    const std::vector<double>& taps() const noexcept { return taps_; }

    /// Output on every point with full support; needs at least q of right padding.
    Signal apply(const Signal& f) const;
    /// (h/2) sum_u T_u e^{2 pi i nu u h}, the discrete response at frequency nu.
    cplx response(double nu) const;

private:
    SmoothingWindow w_;
    double h_;
    std::size_t left_;
    std::size_t right_;
    std::vector<double> taps_;
};

/// H^j applied to a real band-limited entry (no band declared: eps = 0.25).
Signal smooth(const Signal& f, int j);

struct TraceIndex {
    int l;
    int n;
    int branch;  // 0 = Re, 1 = Im
    int j;
};

/// Entries of Phi4 o Phi3 o Phi2 o Phi1 for one flow point, on the output grid.
///
/// Flat index = ((l (2N+1) + (n + N)) 2 + branch) J + j.
class EmbeddingTrace {
public:
    EmbeddingTrace(PipelineConfig cfg, std::string flow, FlowPoint point, std::size_t depth, std::vector<Signal> entries);

    const PipelineConfig& config() const noexcept { return cfg_; }
    const std::string& flow() const noexcept { return flow_; }
    const FlowPoint& point() const noexcept { return point_; }
    std::size_t depth() const noexcept { return depth_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<Signal>& entries() const noexcept { return entries_; }
    const Signal& operator[](std::size_t i) const { return entries_.at(i); }
    const Signal& at(const TraceIndex& ix) const { return entries_.at(flat_index(ix)); }

    std::size_t flat_index(const TraceIndex& ix) const;
    TraceIndex index_of(std::size_t flat) const;
    /// Symmetric band assigned to the entry.
    BandSpec band_of(std::size_t flat) const;

    /// Entrywise sigma_r (grid relabelling for grid-multiple r).
    EmbeddingTrace translated(double r) const;

    nlohmann::json manifest() const;
    /// manifest.json plus entry_<flat>.csv (t, value) per entry.
    void write(const std::filesystem::path& dir) const;
    static EmbeddingTrace read(const std::filesystem::path& dir);

private:
    PipelineConfig cfg_;
    std::string flow_;
    FlowPoint point_;
    std::size_t depth_;
    std::vector<Signal> entries_;
};

/// Builds the per-configuration filters once and embeds flow points.
class EmbeddingPipeline {
public:
    EmbeddingPipeline(FlowSpec flow, PipelineConfig cfg);

    const PipelineConfig& config() const noexcept { return cfg_; }
    const FlowSpec& flow() const noexcept { return flow_; }
    const Observable& observable() const noexcept { return obs_; }
    /// Grid Phi1 is sampled on: the output window padded for the bank and the smoothing.
    const UniformGrid& input_grid() const noexcept { return input_; }

    std::vector<Signal> phi1(const FlowPoint& x) const;
    /// Entry (l, n) at index l (2N+1) + n + N.
    std::vector<Signal> phi2(const std::vector<Signal>& fs) const;
    /// (Re, Im) per (l, n) entry, in order.
    std::vector<Signal> phi3(const std::vector<Signal>& entries) const;
    /// H^j per real entry, restricted to the output window.
    std::vector<Signal> phi4(const std::vector<Signal>& entries) const;

    EmbeddingTrace embed(const FlowPoint& x) const;

private:
    FlowSpec flow_;
    PipelineConfig cfg_;
    Observable obs_;
    std::vector<TentFilter> bank_;
    std::vector<SmoothingFilter> smoothing_;
    UniformGrid input_;
};

EmbeddingTrace full_embed(const FlowSpec& f, const FlowPoint& x, const PipelineConfig& cfg);

/// max over entries of distance_D on the output window (n_max = floor(W)).
double trace_distance(const EmbeddingTrace& a, const EmbeddingTrace& b);

/// Largest entrywise sup difference over the common grid points.
double trace_sup_distance(const EmbeddingTrace& a, const EmbeddingTrace& b);

struct TraceCheck {
    double max_abs;
    double max_quotient;
    double max_leakage;
    bool bounded;
    bool lipschitz;
    bool band_limited;

    bool pass() const noexcept { return bounded && lipschitz && band_limited; }
};

/// Value bound, discrete 1-Lipschitz and band containment of every entry. Containment is judged
/// at the resolution of the Hann window: the band is widened by its main-lobe half-width 2/(n h).
TraceCheck check_trace(const EmbeddingTrace& t);

enum class PairVerdict { Duplicate, ResolutionLimited, Pass, Fail };
std::string to_string(PairVerdict v);

struct PairRecord {
    std::size_t a;
    std::size_t b;
    double flow_distance;
    double trace_distance;
    PairVerdict verdict;
};

struct InjectivityReport {
    std::vector<PairRecord> pairs;
    double eps;
    double separation;
    /// Smallest trace distance over all pairs and the flow distance of that pair.
    double min_trace_distance;
    double closest_flow_distance;
    /// Smallest trace distance over pairs at flow distance >= separation.
    double margin;
    std::size_t duplicates;
    std::size_t resolution_limited;
    std::size_t failures;

    bool pass() const noexcept { return failures == 0; }
    io::CsvTable to_csv() const;
};

/// Pairwise audit: pairs closer than `separation` in the flow are resolution-limited, equal
/// points are duplicates, the rest pass iff their trace distance is at least eps.
InjectivityReport injectivity_audit(const FlowSpec& f, const std::vector<EmbeddingTrace>& traces, double eps,
                                    double separation, int jobs = 1);

/// Smooth bump theta(t) = c exp(-1/(1 - t^2)) on |t| < 1 with unit mass; theta_n(t) = n theta(n t).
double mollifier(double t, int n = 1);

/// f * theta_n by grid quadrature with weights normalised to unit sum. The output drops
/// ceil(1/(n h)) points at each end.
Signal mollify(const Signal& f, int n);

}  // namespace bandflow
