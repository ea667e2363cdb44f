#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandflow/io.hpp"
#include "bandflow/kernel.hpp"
#include "bandflow/signal.hpp"
#include "bandflow/trig.hpp"

namespace bandflow {

struct SamplingBound {
    std::size_t sample_count;
    double slope;
};

/// Lattice points of spacing d in [0, r] and their count per unit time. Requires 2cd < 1.
SamplingBound sampling_upper_bound(double c, double d, double r);

struct LatticePairCheck {
    double sup_difference;
    double lattice_difference;
    /// sup / lattice difference; 0 when both vanish.
    double ratio;
    /// Lattice values agree to 1e-10 while the functions differ by more than 1e-6.
    bool collision;
};

/// Compares f and g on the lattice d n, |n| <= half_count, and on a grid of step d/8 over the
/// same window.
LatticePairCheck lattice_pair_check(const TrigPolynomial& f, const TrigPolynomial& g, double d,
                                    std::size_t half_count = 64);

struct LatticeWitnessReport {
    double c;
    double d;
    std::size_t trials;
    std::size_t failures;
    double max_ratio;
    /// Explicit pair 0 and sin(pi t / d)/2, present when 2cd >= 1.
    std::optional<LatticePairCheck> aliasing;

    bool pass() const noexcept { return failures == 0; }
    nlohmann::json to_json() const;
};

/// Random real trigonometric pairs band-limited in [-c, c] compared on the lattice dZ.
/// Requires 2cd < 1.
LatticeWitnessReport lattice_injectivity_witness(double c, double d, std::size_t trial_count, std::uint64_t seed);

/// Same run without the Nyquist check; for 2cd >= 1 it also probes the aliasing pair.
LatticeWitnessReport lattice_injectivity_witness_unchecked(double c, double d, std::size_t trial_count,
                                                           std::uint64_t seed);

/// Coefficients (a_{1,n}, a_{2,n}) in [0, 1]^2 for n = first, ..., first + size - 1.
struct LatticeCode {
    int first = 0;
    std::vector<double> re;
    std::vector<double> im;

    std::size_t size() const noexcept { return re.size(); }
    int last() const noexcept { return first + static_cast<int>(re.size()) - 1; }
    void validate() const;
    /// The same coefficients attached to indices shifted by -k.
    LatticeCode shifted(int k) const;
};

LatticeCode random_code(int first, std::size_t count, std::uint64_t seed);

/// max_t sum_n |K(t - n)|.
double kernel_lattice_norm(const InterpKernel& k);

/// G(t) = (1/(2 K_norm)) sum_n (a_{1,n} + i a_{2,n}) K(t - n) on `window`, which must lie inside
/// [first, last].
Signal interpolation_lower_bound(const LatticeCode& a, const InterpKernel& k, const UniformGrid& window);

/// a_m = 2 K_norm G(m) for m = first, ..., first + count - 1; every m must be a grid point.
LatticeCode lattice_readout(const Signal& g, const InterpKernel& k, int first, std::size_t count);

/// Parameterised patch u in [0,1]^dim -> point, with a metric on the points.
struct Patch {
    int dim;
    std::function<std::vector<double>(const std::vector<double>&)> map;
    std::function<double(const std::vector<double>&, const std::vector<double>&)> metric;

    /// u -> u in the sup metric.
    static Patch cube(int dim);
};

enum class WidimVerdict { WitnessFound, Counterexample, Inconclusive };
std::string to_string(WidimVerdict v);

struct WidimEstimate {
    /// Always "upper": the probe only looks for embeddings.
    std::string direction = "upper";
    int k;
    double eps;
    WidimVerdict verdict;
    /// Trial index of the witness map (seed split by trial).
    std::optional<std::size_t> witness_trial;
    /// Worst violating pair of the best map: parameters and source distance.
    std::vector<double> pair_a;
    std::vector<double> pair_b;
    double pair_distance = 0.0;
    std::size_t trials_used = 0;
    std::string note;

    nlohmann::json to_json() const;
};

struct WidimProbeConfig {
    std::size_t grid = 50;
    std::size_t budget = 10000;
    std::uint64_t seed = 1;
    int jobs = 1;
};

/// Heuristic search for an eps-injective linear map R^D -> R^k on a grid of the patch.
///
/// Images closer than the grid step (1 - 1e-9)/(grid - 1) count as collisions; a map is a
/// witness when no colliding pair is eps or more apart. Random maps have Gaussian entries and
/// unit Frobenius norm.
WidimEstimate widim_probe(const Patch& patch, double eps, int k, const WidimProbeConfig& cfg = {});

struct MdimExperiment {
    std::string id;
    double c;
    double d;
    double eps;
    std::vector<double> horizons;

    void validate() const;
};

struct MdimRow {
    std::string id;
    double c;
    double d;
    double eps;
    double r;
    double upper_slope;
    double lower_density;
    bool bracket_pass;
};

/// Upper slope from lattice sampling and lower density from the interpolation code recovered
/// over [0, r), both per unit time at band half-width c.
std::vector<MdimRow> mdim_slope_experiment(const MdimExperiment& exp);

io::CsvTable mdim_table(const std::vector<MdimRow>& rows);

}  // namespace bandflow
