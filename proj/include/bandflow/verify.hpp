#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandflow/flow.hpp"
#include "bandflow/signal.hpp"
#include "bandflow/trig.hpp"

namespace bandflow {

/// Outcome of a numerical check, serialised as {check, parameters, margin, verdict, details}.
struct CheckReport {
    std::string check;
    nlohmann::json parameters;
    /// Signed distance to the pass threshold; non-negative when the check passes.
    double margin = 0.0;
    bool pass = false;
    nlohmann::json details;

    nlohmann::json to_json() const;
};

struct FourierCoefficient {
    int n;
    cplx value;
};

struct RigidityReport {
    CheckReport report;
    /// c_n of the filtered probe for |n| <= 64.
    std::vector<FourierCoefficient> coefficients;
    cplx c0;
    /// max |c_n| over n != 0.
    double max_harmonic;
};

/// Band-passes one period of a T-periodic probe to [-gamma, gamma] with an ideal box filter on
/// its Fourier series (|n| <= 64) and checks that only c_0 survives (|c_n| <= 1e-8).
///
/// T must be a multiple of the spacing with at least 129 samples per period, and the probe must
/// cover one period. Throws NyquistViolation when gamma T >= 1.
RigidityReport periodic_rigidity_check(double gamma, double period, const Signal& probe);

/// Same computation without the gamma T < 1 precondition.
RigidityReport periodic_rigidity_check_unchecked(double gamma, double period, const Signal& probe);

/// Checks |f(x + iy)| e^{-2 pi r |y|} <= ||f||_inf (1 + 1e-9) for x on [-50, 50] (step 0.01) and
/// each y. ||f||_inf is estimated from below by the larger of the sampled maximum on the same
/// x grid and the root sum of squared coefficients. Reports the largest ratio.
///
/// Throws BandCoverage when a frequency lies outside [-r, r].
CheckReport paley_wiener_growth_check(const TrigPolynomial& f, double r, const std::vector<double>& ys);

/// Observable X -> [0, 1] given by a partition of unity over a net of centres:
/// f(z) = sum_V w_V(z) q_V / sum_V w_V(z), with w_V(z) = max(0, rho - dist(z, V)).
class DelayObservable {
public:
    DelayObservable(FlowSpec flow, std::vector<FlowPoint> centres, std::vector<double> values, double rho);

    double operator()(const FlowPoint& z) const;
    const std::vector<FlowPoint>& centres() const noexcept { return centres_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double rho() const noexcept { return rho_; }

private:
    FlowSpec flow_;
    std::vector<FlowPoint> centres_;
    std::vector<double> values_;
    double rho_;
};

struct TakensConfig {
    std::uint64_t seed = 1;
    /// Attempts with fresh values q_V before giving up.
    int retries = 5;
    std::size_t net_size = 32;
    /// Pairs closer than this in the flow metric are not tested.
    double separation = 1e-9;
    /// false gives the constant observable q_V = 1/2 (negative control).
    bool perturb = true;
};

/// Observable for one attempt: centres mesh(F, net_size), rho twice the covering radius of the
/// centres over `points`, values uniform in [0, 1] from (seed, attempt), or 1/2 when not
/// perturbed.
DelayObservable delay_observable(const FlowSpec& f, const std::vector<FlowPoint>& points, const TakensConfig& cfg,
                                 int attempt);

struct TakensReport {
    CheckReport report;
    int attempts = 0;
    std::size_t duplicates = 0;
    std::size_t resolution_limited = 0;
    std::size_t pairs_tested = 0;
    /// Smallest delay-image distance over tested pairs of the last attempt.
    double min_image_distance = 0.0;
    std::size_t worst_a = 0;
    std::size_t worst_b = 0;
};

/// Injectivity of x -> (f(T_{r_0} x), ..., f(T_{r_m} x)) on the mesh for a random partition of
/// unity observable f, retried with new values until every tested pair has distinct images.
///
/// Needs at least 2d + 1 distinct times and no mesh point fixed by any T_{r_i - r_j}. Equal
/// mesh points are counted as duplicates and pairs closer than `separation` as resolution
/// limited; neither is tested.
TakensReport takens_delay_check(const FlowSpec& f, int d, const std::vector<double>& times,
                                const std::vector<FlowPoint>& points, const TakensConfig& cfg = {});

struct LipschitzAudit {
    double constant;
    bool pass_1lip;
};

/// Largest discrete difference quotient and whether it is <= 1 + 1e-9. Needs two samples.
LipschitzAudit lipschitz_audit(const Signal& f);

}  // namespace bandflow
