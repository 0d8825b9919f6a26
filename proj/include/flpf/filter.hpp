#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "flpf/epi_model.hpp"
#include "flpf/measurement_buffer.hpp"
#include "flpf/random.hpp"

namespace flpf {

/// Transition matrix used in every paper experiment.
inline RegimeMatrix default_regime_matrix() { return {0.999, 0.001, 0.011, 0.989}; }

struct FilterConfig {
    int n_particles = 512;
    int lag = 0;
    RegimeMatrix regime_matrix = default_regime_matrix();
    /// Regime proposal; defaults to regime_matrix. Oversampling rare switches
    /// is corrected by the M/Q factor in the weight.
    std::optional<RegimeMatrix> proposal_matrix;
    double ess_threshold_fraction = 0.5;
    Theta theta{0.2, 0.4, 0.2, 0.1, 1.0 / 180.0};
    std::int64_t n_pop = 10000;
    double lambda_floor = kDefaultLambdaFloor;
    std::uint64_t seed = 1;
    /// Keep the normalized weights of every step in FilterOutput::weight_trace.
    bool record_weights = false;

    const RegimeMatrix& proposal() const noexcept {
        return proposal_matrix ? *proposal_matrix : regime_matrix;
    }
    /// Throws ConfigError / ParameterError.
    void validate() const;
};

/// A proposed trajectory segment covering days first_day .. first_day + size - 1.
struct Block {
    int first_day = 1;
    std::vector<SeirsState> states;
    std::vector<Regime> regimes;

    int size() const noexcept { return static_cast<int>(states.size()); }
    int last_day() const noexcept { return first_day + size() - 1; }
    bool empty() const noexcept { return states.empty(); }
};

/// One FL-PF hypothesis: the anchor (day t - l - 1, or the day-0 initial draw
/// while t <= l) and the lag window that is re-proposed from it every day.
struct Particle {
    int anchor_day = 0;
    SeirsState anchor_state;
    Regime anchor_regime = Regime::Normal;
    Block window;
    double log_weight = 0.0;
};

/// A measurement with log(y!) precomputed.
struct ObsTerm {
    Measurement measurement;
    double log_y_factorial = 0.0;
};

/// Likelihood terms entering the weight update at wall-clock day t.
///  current[k]  = measurements with t_g = first_day + k usable at t.
///  previous[k] = the same set as of day t - 1, for t_g <= t - 1.
struct StepMeasurements {
    int t = 0;
    int first_day = 1;
    std::vector<std::vector<ObsTerm>> current;
    std::vector<std::vector<ObsTerm>> previous;
};

StepMeasurements step_measurements(const MeasurementBuffer& buffer, int t, int lag);

/// Mean of the observations received on day 1 about day 1, if any.
std::optional<double> first_observation(const MeasurementBuffer& buffer);

/// Day-0 draws: regimes from the stationary distribution of the regime
/// matrix, E and I ~ Poisson(first_obs) (clamped to the population), R = 0,
/// S the remainder. Log-weights start at -log N.
std::vector<Particle> init_particles(const FilterConfig& config, std::optional<double> first_obs);

/// Re-proposes days anchor_day + 1 .. t from the anchor under the proposal
/// matrix and the chain-binomial dynamics. Per day: one uniform for the
/// regime, then the four binomials of seirs_step.
Block propose_block(int anchor_day, const SeirsState& anchor_state, Regime anchor_regime, int t,
                    const FilterConfig& config, Rng& rng);

/// log h(new block | Y^(t)) + log(M/Q)(new moves) - log h(old block | Y^(t-1))
/// - log(M/Q)(old moves). Dynamics cancel because the backward kernel is the
/// old block's own proposal.
double incremental_log_weight(const Block& old_block, const Block& new_block,
                              Regime anchor_regime, const StepMeasurements& step,
                              const FilterConfig& config);

struct NormalizedWeights {
    std::vector<double> weights;
    double ess = 0.0;
    double log_sum = 0.0;  ///< log of the sum of unnormalized weights
};

/// Max-shifted normalization. Throws DegeneracyError if no weight is finite.
NormalizedWeights normalize_and_ess(std::span<const double> log_weights, int time_step = 0);

double log_sum_exp(std::span<const double> log_values) noexcept;

/// N independent categorical draws from normalized weights.
std::vector<std::size_t> multinomial_ancestors(std::span<const double> weights, std::size_t n,
                                               Rng& rng);

/// Copies ancestors' anchors and windows; every log-weight becomes -log N.
std::vector<Particle> multinomial_resample(std::span<const Particle> particles,
                                           std::span<const double> weights, Rng& rng);

struct StateEstimate {
    double s = 0.0;
    double e = 0.0;
    double i = 0.0;
    double r = 0.0;
    double outbreak_prob = 0.0;
};

/// Weighted mean state and outbreak probability of `day`, which must lie in
/// every particle's window.
StateEstimate estimates(std::span<const Particle> particles, std::span<const double> weights,
                        int day);

struct DayResult {
    int t = 0;
    StateEstimate estimate;
    /// Outbreak probability for day t from the last step whose window held t.
    double outbreak_prob_revised = 0.0;
    double ess = 0.0;
    bool resampled = false;
};

struct FilterOutput {
    std::vector<DayResult> days;
    double log_likelihood = 0.0;
    std::size_t dropped = 0;
    std::vector<std::vector<double>> weight_trace;
};

/// Called once per day after the weight update and before resampling.
using StepObserver =
    std::function<void(const StepMeasurements&, std::span<const Particle>)>;

/// Runs the fixed-lag filter for days 1..horizon. Throws DegeneracyError when
/// every particle has zero weight.
FilterOutput run_filter(const FilterConfig& config, const MeasurementBuffer& buffer, int horizon,
                        const StepObserver& observer = {});

/// Textbook Markov-switching bootstrap PF: propagate one day, weight with the
/// observations generated and received today, resample on low ESS. Shares
/// the random-stream schedule of run_filter so that lag 0 can be compared
/// element for element.
FilterOutput run_reference_pf(const FilterConfig& config, const MeasurementBuffer& buffer,
                              int horizon);

}  // namespace flpf
