#include "bandflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "bandflow/error.hpp"
#include "bandflow/io.hpp"
#include "bandflow/kernel.hpp"
#include "bandflow/parallel.hpp"
#include "bandflow/quadrature.hpp"

namespace bandflow {

namespace {

constexpr int kKernelOrder = 6;
constexpr double kTapTolerance = 1e-11;
constexpr double kMinEps = 0.05;
// Kernel width used when the input declares no band.
constexpr double kDefaultEps = 0.25;

std::size_t ceil_index(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9)); }

std::size_t bank_taps(const PipelineConfig& cfg) {
    return static_cast<std::size_t>(std::floor(cfg.bank.half_width / cfg.spacing + 1e-9));
}

double bump(double t) {
    if (!(std::abs(t) < 1.0)) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t));
}

double bump_mass() {
    static const double mass = gauss_legendre(bump, -1.0, 1.0, 64);
    return mass;
}

}  // namespace

void PipelineConfig::validate() const {
    if (smoothing_depth < 1) throw Error(ErrorCode::InvalidArgument, "smoothing depth J must be >= 1");
    if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be > 0");
    if (!(window >= spacing)) throw Error(ErrorCode::InvalidArgument, "window W must be at least one grid step");
    if (!(tol.leakage >= 0.0) || !(tol.energy_floor >= 0.0) || !(tol.lipschitz_slack >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "tolerances must be >= 0");
    bank.validate();
}

std::size_t PipelineConfig::depth_for(const FlowSpec& f) const {
    const std::size_t need = f.min_depth();
    if (depth == 0) return need;
    if (depth < need)
        throw Error(ErrorCode::InvalidArgument, "depth " + std::to_string(depth) + " is below the minimum " +
                                                    std::to_string(need) + " for " + f.describe());
    return depth;
}

UniformGrid PipelineConfig::output_grid() const { return UniformGrid::covering(-window, window, spacing); }

nlohmann::json PipelineConfig::to_json() const {
    return {{"depth", depth},
            {"smoothing_depth", smoothing_depth},
            {"spacing", spacing},
            {"window", window},
            {"bank",
             {{"n_max", bank.n_max},
              {"alpha", bank.alpha},
              {"beta", bank.beta},
              {"half_width", bank.half_width},
              {"quadrature_step", bank.quadrature_step}}},
            {"tolerances",
             {{"leakage", tol.leakage}, {"energy_floor", tol.energy_floor}, {"lipschitz_slack", tol.lipschitz_slack}}}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    try {
        PipelineConfig c;
        c.depth = j.at("depth").get<std::size_t>();
        c.smoothing_depth = j.at("smoothing_depth").get<int>();
        c.spacing = j.at("spacing").get<double>();
        c.window = j.at("window").get<double>();
        const auto& b = j.at("bank");
        c.bank.n_max = b.at("n_max").get<int>();
        c.bank.alpha = b.at("alpha").get<double>();
        c.bank.beta = b.at("beta").get<double>();
        c.bank.half_width = b.at("half_width").get<double>();
        c.bank.quadrature_step = b.at("quadrature_step").get<double>();
        const auto& t = j.at("tolerances");
        c.tol.leakage = t.at("leakage").get<double>();
        c.tol.energy_floor = t.at("energy_floor").get<double>();
        c.tol.lipschitz_slack = t.at("lipschitz_slack").get<double>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigParse, std::string("pipeline config: ") + e.what());
    }
}

std::string PipelineConfig::hash() const { return io::fnv1a_hex(to_json().dump()); }

SmoothingWindow::SmoothingWindow(int j) : j(j), q(0.0) {
    if (j < 0) throw Error(ErrorCode::InvalidArgument, "smoothing index j must be >= 0");
    q = 1.0 / (j + 1.0);
}

SmoothingFilter::SmoothingFilter(SmoothingWindow w, double spacing, double band_half_width)
    : w_(w), h_(spacing), left_(0), right_(0) {
    if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be > 0");
    double eps = kDefaultEps;
    if (band_half_width >= 0.0) {
        if (2.0 * band_half_width * spacing >= 1.0)
            throw Error(ErrorCode::NyquistViolation, "band half-width " + std::to_string(band_half_width) +
                                                         " is not resolved at spacing " + std::to_string(spacing));
        eps = std::min(1.0, 1.0 - 2.0 * band_half_width * spacing);
    }
    if (eps < kMinEps)
        throw Error(ErrorCode::KernelTooWide, "interpolation kernel width " + std::to_string(eps) + " is below " +
                                                  std::to_string(kMinEps));
    const InterpKernel kernel(eps, kKernelOrder);
    const double span = w.q / spacing;
    const auto radius = static_cast<std::size_t>(kernel.truncation_radius(kTapTolerance));
    left_ = radius;
    right_ = ceil_index(span) + radius;
    const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * span)));
    const auto k = [&](double v) { return kernel(v); };
    taps_.resize(left_ + right_ + 1);
    for (std::size_t i = 0; i < taps_.size(); ++i) {
        const double u = static_cast<double>(i) - static_cast<double>(left_);
        taps_[i] = gauss_legendre(k, u - span, u, panels);
    }
}

Signal SmoothingFilter::apply(const Signal& f) const {
    if (std::abs(f.grid().spacing() - h_) > 1e-12 * h_)
        throw Error(ErrorCode::GridMismatch, "smoothing filter built for a different spacing");
    const std::size_t n = f.size();
    if (n < left_ + right_ + 1)
        throw Error(ErrorCode::InsufficientPadding, "signal of " + std::to_string(n) + " points is too short for the window q = " +
                                                        std::to_string(w_.q));
    const std::size_t n_out = n - left_ - right_;
    const double scale = 0.5 * h_;
    std::vector<cplx> out(n_out);
    const auto in = f.samples();
    if (f.is_real()) {
        const auto re = f.real_part();
        for (std::size_t i = 0; i < n_out; ++i) {
            const double* src = re.data() + i;
            double acc = 0.0;
            for (std::size_t u = 0; u < taps_.size(); ++u) acc += taps_[u] * src[u];
            out[i] = scale * acc;
        }
    } else {
        for (std::size_t i = 0; i < n_out; ++i) {
            cplx acc = 0.0;
            for (std::size_t u = 0; u < taps_.size(); ++u) acc += taps_[u] * in[i + u];
            out[i] = scale * acc;
        }
    }
    const auto out_grid = f.grid().slice(left_, n_out);
    return Signal(out_grid, std::move(out), f.band());
}

cplx SmoothingFilter::response(double nu) const {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < taps_.size(); ++i) {
        const double u = static_cast<double>(i) - static_cast<double>(left_);
        acc += taps_[i] * std::polar(1.0, 2.0 * std::numbers::pi * std::remainder(nu * u * h_, 1.0));
    }
    return 0.5 * h_ * acc;
}

Signal smooth(const Signal& f, int j) {
    const double a = f.band() ? f.band()->max_abs() : -1.0;
    return SmoothingFilter(SmoothingWindow(j), f.grid().spacing(), a).apply(f);
}

EmbeddingTrace::EmbeddingTrace(PipelineConfig cfg, std::string flow, FlowPoint point, std::size_t depth,
                               std::vector<Signal> entries)
    : cfg_(std::move(cfg)), flow_(std::move(flow)), point_(std::move(point)), depth_(depth), entries_(std::move(entries)) {
    const std::size_t expect = depth_ * (2 * cfg_.bank.n_max + 1) * 2 * cfg_.smoothing_depth;
    if (entries_.size() != expect)
        throw Error(ErrorCode::InvalidArgument, "trace has " + std::to_string(entries_.size()) + " entries, expected " +
                                                    std::to_string(expect));
    for (const auto& e : entries_)
        if (!(e.grid() == entries_.front().grid())) throw Error(ErrorCode::GridMismatch, "trace entries on different grids");
}

std::size_t EmbeddingTrace::flat_index(const TraceIndex& ix) const {
    const int bank = 2 * cfg_.bank.n_max + 1;
    if (ix.l < 0 || static_cast<std::size_t>(ix.l) >= depth_ || std::abs(ix.n) > cfg_.bank.n_max || ix.branch < 0 ||
        ix.branch > 1 || ix.j < 0 || ix.j >= cfg_.smoothing_depth)
        throw Error(ErrorCode::InvalidArgument, "trace index out of range");
    return static_cast<std::size_t>(((ix.l * bank + (ix.n + cfg_.bank.n_max)) * 2 + ix.branch) * cfg_.smoothing_depth + ix.j);
}

TraceIndex EmbeddingTrace::index_of(std::size_t flat) const {
    if (flat >= entries_.size()) throw Error(ErrorCode::InvalidArgument, "trace index out of range");
    const int bank = 2 * cfg_.bank.n_max + 1;
    const int jj = cfg_.smoothing_depth;
    auto r = static_cast<int>(flat);
    const int j = r % jj;
    r /= jj;
    const int branch = r % 2;
    r /= 2;
    const int n = r % bank - cfg_.bank.n_max;
    return {r / bank, n, branch, j};
}

BandSpec EmbeddingTrace::band_of(std::size_t flat) const {
    return tent_band(index_of(flat).n, cfg_.bank).symmetrized();
}

EmbeddingTrace EmbeddingTrace::translated(double r) const {
    std::vector<Signal> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(translate(e, r));
    return EmbeddingTrace(cfg_, flow_, point_, depth_, std::move(out));
}

nlohmann::json EmbeddingTrace::manifest() const {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto ix = index_of(i);
        entries.push_back({{"index", i},
                           {"l", ix.l},
                           {"n", ix.n},
                           {"branch", ix.branch == 0 ? "re" : "im"},
                           {"j", ix.j},
                           {"q", SmoothingWindow(ix.j).q},
                           {"band", io::to_json(band_of(i))},
                           {"file", "entry_" + std::to_string(i) + ".csv"}});
    }
    return {{"config", cfg_.to_json()},
            {"config_hash", cfg_.hash()},
            {"flow", flow_},
            {"point", point_.coords},
            {"depth", depth_},
            {"grid", io::to_json(entries_.front().grid())},
            {"entries", std::move(entries)}};
}

void EmbeddingTrace::write(const std::filesystem::path& dir) const {
    const auto m = manifest();
    io::write_text(dir / "manifest.json", m.dump(2) + "\n");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        io::CsvTable t{{"t", "value"}, {}};
        const auto& e = entries_[i];
        t.rows.reserve(e.size());
        for (std::size_t k = 0; k < e.size(); ++k)
            t.rows.push_back({io::format_double(e.grid().time(k)), io::format_double(e[k].real())});
        io::write_text(dir / m["entries"][i]["file"].get<std::string>(), t.to_string());
    }
}

EmbeddingTrace EmbeddingTrace::read(const std::filesystem::path& dir) {
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigParse, std::string("trace manifest: ") + e.what());
    }
    try {
        auto cfg = PipelineConfig::from_json(m.at("config"));
        if (m.at("config_hash").get<std::string>() != cfg.hash())
            throw Error(ErrorCode::ManifestMismatch, "trace manifest hash does not match its config");
        const auto grid = io::grid_from_json(m.at("grid"));
        std::vector<Signal> entries;
        for (const auto& e : m.at("entries")) {
            const auto t = io::CsvTable::parse(io::read_text(dir / e.at("file").get<std::string>()));
            const auto col = t.column("value");
            if (t.rows.size() != grid.count())
                throw Error(ErrorCode::ManifestMismatch, "entry " + e.at("file").get<std::string>() + " has " +
                                                             std::to_string(t.rows.size()) + " rows, grid has " +
                                                             std::to_string(grid.count()));
            std::vector<double> v(t.rows.size());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = io::parse_double(t.rows[k].at(col));
            entries.push_back(Signal::from_real(grid, v, io::band_from_json(e.at("band"))));
        }
        return EmbeddingTrace(std::move(cfg), m.at("flow").get<std::string>(),
                              FlowPoint{m.at("point").get<std::vector<double>>()}, m.at("depth").get<std::size_t>(),
                              std::move(entries));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigMissingKey, std::string("trace manifest: ") + e.what());
    }
}

EmbeddingPipeline::EmbeddingPipeline(FlowSpec flow, PipelineConfig cfg)
    : flow_(std::move(flow)), cfg_(std::move(cfg)), obs_((cfg_.validate(), flow_), cfg_.depth_for(flow_)), input_(0.0, 1.0, 2) {
    double widest = 0.0;
    for (int n = -cfg_.bank.n_max; n <= cfg_.bank.n_max; ++n) {
        bank_.emplace_back(n, cfg_.bank);
        widest = std::max(widest, bank_.back().band().max_abs());
    }
    std::size_t left = 0, right = 0;
    for (int j = 0; j < cfg_.smoothing_depth; ++j) {
        smoothing_.emplace_back(SmoothingWindow(j), cfg_.spacing, widest);
        left = std::max(left, smoothing_.back().left());
        right = std::max(right, smoothing_.back().right());
    }
    const auto out = cfg_.output_grid();
    const auto first = std::llround(out.t_min() / cfg_.spacing);
    const std::size_t taps = bank_taps(cfg_);
    const auto pad_left = static_cast<long long>(taps + left);
    const std::size_t pad_right = taps + right;
    input_ = UniformGrid(static_cast<double>(first - pad_left) * cfg_.spacing, cfg_.spacing,
                         out.count() + static_cast<std::size_t>(pad_left) + pad_right);
}

std::vector<Signal> EmbeddingPipeline::phi1(const FlowPoint& x) const { return orbit_sample(flow_, x, input_, obs_); }

std::vector<Signal> EmbeddingPipeline::phi2(const std::vector<Signal>& fs) const {
    std::vector<Signal> out;
    out.reserve(fs.size() * bank_.size());
    for (const auto& f : fs)
        for (const auto& filter : bank_) out.push_back(bandpass(f, filter));
    return out;
}

std::vector<Signal> EmbeddingPipeline::phi3(const std::vector<Signal>& entries) const {
    std::vector<Signal> out;
    out.reserve(2 * entries.size());
    for (const auto& e : entries) {
        if (!e.band()) throw Error(ErrorCode::InvalidArgument, "real/imaginary split needs a declared band");
        auto [re, im] = real_imag_split(e, *e.band());
        out.push_back(std::move(re));
        out.push_back(std::move(im));
    }
    return out;
}

std::vector<Signal> EmbeddingPipeline::phi4(const std::vector<Signal>& entries) const {
    const auto window = cfg_.output_grid();
    std::vector<Signal> out;
    out.reserve(entries.size() * smoothing_.size());
    for (const auto& e : entries)
        for (const auto& filter : smoothing_) {
            const auto cut = filter.apply(e).restrict_to(window);
            out.emplace_back(window, std::vector<cplx>(cut.samples().begin(), cut.samples().end()), cut.band());
        }
    return out;
}

EmbeddingTrace EmbeddingPipeline::embed(const FlowPoint& x) const {
    return EmbeddingTrace(cfg_, flow_.describe(), x, obs_.depth(), phi4(phi3(phi2(phi1(x)))));
}

EmbeddingTrace full_embed(const FlowSpec& f, const FlowPoint& x, const PipelineConfig& cfg) {
    return EmbeddingPipeline(f, cfg).embed(x);
}

namespace {

void require_same_shape(const EmbeddingTrace& a, const EmbeddingTrace& b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::InvalidArgument, "traces have " + std::to_string(a.size()) + " and " +
                                                    std::to_string(b.size()) + " entries");
}

}  // namespace

double trace_distance(const EmbeddingTrace& a, const EmbeddingTrace& b) {
    require_same_shape(a, b);
    const int levels = static_cast<int>(std::floor(a.config().window + 1e-9));
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, distance_D(a[i], b[i], levels).value);
    return d;
}

double trace_sup_distance(const EmbeddingTrace& a, const EmbeddingTrace& b) {
    require_same_shape(a, b);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, sup_distance(a[i], b[i]));
    return d;
}

TraceCheck check_trace(const EmbeddingTrace& t) {
    const auto& tol = t.config().tol;
    TraceCheck c{0.0, 0.0, 0.0, true, true, true};
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& e = t[i];
        for (const auto& z : e.samples()) c.max_abs = std::max(c.max_abs, std::abs(z));
        c.max_quotient = std::max(c.max_quotient, max_difference_quotient(e));
        const double lobe = 2.0 / (static_cast<double>(e.size()) * e.grid().spacing());
        c.max_leakage =
            std::max(c.max_leakage, band_energy_outside(e, t.band_of(i).dilated(lobe), Taper::Hann, tol.energy_floor));
    }
    c.bounded = c.max_abs <= 1.0;
    c.lipschitz = c.max_quotient <= 1.0 + tol.lipschitz_slack;
    c.band_limited = c.max_leakage <= tol.leakage;
    return c;
}

std::string to_string(PairVerdict v) {
    switch (v) {
        case PairVerdict::Duplicate: return "duplicate";
        case PairVerdict::ResolutionLimited: return "resolution_limited";
        case PairVerdict::Pass: return "pass";
        case PairVerdict::Fail: return "fail";
    }
    return "unknown";
}

io::CsvTable InjectivityReport::to_csv() const {
    io::CsvTable t{{"pair", "a", "b", "flow_distance", "trace_distance", "verdict"}, {}};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        t.rows.push_back({std::to_string(i), std::to_string(p.a), std::to_string(p.b), io::format_double(p.flow_distance),
                          io::format_double(p.trace_distance), to_string(p.verdict)});
    }
    return t;
}

InjectivityReport injectivity_audit(const FlowSpec& f, const std::vector<EmbeddingTrace>& traces, double eps,
                                    double separation, int jobs) {
    if (!(eps >= 0.0) || !(separation >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "audit eps and separation must be >= 0");
    InjectivityReport r{{}, eps, separation, std::numeric_limits<double>::infinity(), 0.0,
                        std::numeric_limits<double>::infinity(), 0, 0, 0};
    for (std::size_t a = 0; a < traces.size(); ++a)
        for (std::size_t b = a + 1; b < traces.size(); ++b) r.pairs.push_back({a, b, 0.0, 0.0, PairVerdict::Pass});
    parallel_for(r.pairs.size(), jobs, [&](std::size_t i) {
        auto& p = r.pairs[i];
        const auto& x = traces[p.a];
        const auto& y = traces[p.b];
        p.flow_distance = x.point() == y.point() ? 0.0 : flow_distance(f, x.point(), y.point());
        p.trace_distance = trace_distance(x, y);
        if (p.flow_distance == 0.0)
            p.verdict = PairVerdict::Duplicate;
        else if (p.flow_distance < separation)
            p.verdict = PairVerdict::ResolutionLimited;
        else
            p.verdict = p.trace_distance >= eps ? PairVerdict::Pass : PairVerdict::Fail;
    });
    for (const auto& p : r.pairs) {
        if (p.trace_distance < r.min_trace_distance) {
            r.min_trace_distance = p.trace_distance;
            r.closest_flow_distance = p.flow_distance;
        }
        switch (p.verdict) {
            case PairVerdict::Duplicate: ++r.duplicates; break;
            case PairVerdict::ResolutionLimited: ++r.resolution_limited; break;
            case PairVerdict::Fail: ++r.failures; [[fallthrough]];
            case PairVerdict::Pass: r.margin = std::min(r.margin, p.trace_distance); break;
        }
    }
    return r;
}

double mollifier(double t, int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "mollifier index n must be >= 1");
    return n * bump(n * t) / bump_mass();
}

Signal mollify(const Signal& f, int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "mollifier index n must be >= 1");
    const double h = f.grid().spacing();
    const auto reach = ceil_index(1.0 / (n * h));
    if (f.size() < 2 * reach + 1)
        throw Error(ErrorCode::InsufficientPadding, "signal of " + std::to_string(f.size()) +
                                                        " points is too short for mollifier n = " + std::to_string(n));
    std::vector<double> w(2 * reach + 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = mollifier((static_cast<double>(k) - static_cast<double>(reach)) * h, n);
        sum += w[k];
    }
    for (auto& x : w) x /= sum;
    const std::size_t n_out = f.size() - 2 * reach;
    std::vector<cplx> out(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * f[i + k];
        out[i] = acc;
    }
    const auto out_grid = f.grid().slice(reach, n_out);
    return Signal(out_grid, std::move(out), f.band());
}

}  // namespace bandflow
