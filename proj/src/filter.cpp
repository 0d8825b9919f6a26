#include "flpf/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "flpf/errors.hpp"

namespace flpf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Chain-binomial transition with the regime-independent probabilities
/// computed once per run. Matches transition_probs() bit for bit.
class Dynamics {
public:
    explicit Dynamics(const FilterConfig& config)
        : theta_(config.theta),
          n_pop_(static_cast<double>(config.n_pop)),
          constant_(transition_probs({config.n_pop, 0, 0, 0}, config.theta, Regime::Normal,
                                     config.n_pop)) {}

    SeirsState step(const SeirsState& state, Regime regime, Rng& rng) const {
        TransitionProbs probs = constant_;
        probs.s_to_e = -std::expm1(-(theta_.beta(regime) * static_cast<double>(state.i) / n_pop_));
        return seirs_step(state, probs, rng);
    }

private:
    Theta theta_;
    double n_pop_;
    TransitionProbs constant_;
};

double log_regime_ratio(Regime from, Regime to, const FilterConfig& config) {
    return std::log(config.regime_matrix(from, to)) - std::log(config.proposal()(from, to));
}

double log_obs(std::span<const ObsTerm> terms, const SeirsState& state, double lambda_floor) {
    const double lambda = std::max(static_cast<double>(state.i), lambda_floor);
    double total = 0.0;
    for (const auto& term : terms) {
        total += poisson_log_pmf(static_cast<double>(term.measurement.y), lambda,
                                 term.log_y_factorial);
    }
    return total;
}

/// Sum over a block of observation and regime-correction terms.
double block_log_target(const Block& block, Regime anchor_regime,
                        const std::vector<std::vector<ObsTerm>>& terms, int terms_first_day,
                        const FilterConfig& config) {
    double total = 0.0;
    Regime previous = anchor_regime;
    for (int k = 0; k < block.size(); ++k) {
        const auto slot = static_cast<std::size_t>(block.first_day + k - terms_first_day);
        const auto regime = block.regimes[static_cast<std::size_t>(k)];
        const double obs = log_obs(terms[slot], block.states[static_cast<std::size_t>(k)],
                                   config.lambda_floor);
        total += obs + log_regime_ratio(previous, regime, config);
        previous = regime;
    }
    return total;
}

double weighted_outbreak_prob(std::span<const Particle> particles, std::span<const double> weights,
                              int day) {
    double prob = 0.0;
    for (std::size_t j = 0; j < particles.size(); ++j) {
        const auto& window = particles[j].window;
        const auto regime = window.regimes[static_cast<std::size_t>(day - window.first_day)];
        prob += weights[j] * to_int(regime);
    }
    return std::clamp(prob, 0.0, 1.0);
}

}  // namespace

void FilterConfig::validate() const {
    if (n_particles < 2) {
        throw ConfigError("n_particles must be at least 2");
    }
    if (lag < 0) {
        throw ConfigError("lag must be non-negative");
    }
    if (!(ess_threshold_fraction >= 0.0 && ess_threshold_fraction <= 1.0)) {
        throw ConfigError("ess_threshold_fraction must lie in [0, 1]");
    }
    if (n_pop <= 0) {
        throw ConfigError("n_pop must be positive");
    }
    if (!(lambda_floor > 0.0)) {
        throw ConfigError("lambda_floor must be positive");
    }
    theta.validate();
}

StepMeasurements step_measurements(const MeasurementBuffer& buffer, int t, int lag) {
    StepMeasurements step;
    step.t = t;
    step.first_day = std::max(1, t - lag);
    step.current.resize(static_cast<std::size_t>(t - step.first_day + 1));
    step.previous.resize(static_cast<std::size_t>(t - step.first_day));
    for (int day = step.first_day; day <= t; ++day) {
        const auto slot = static_cast<std::size_t>(day - step.first_day);
        for (const auto& m : buffer.generated_on(day)) {
            if (m.t_r > t) {
                break;
            }
            const ObsTerm term{m, std::lgamma(static_cast<double>(m.y) + 1.0)};
            step.current[slot].push_back(term);
            if (day < t && m.t_r < t) {
                step.previous[slot].push_back(term);
            }
        }
    }
    return step;
}

std::optional<double> first_observation(const MeasurementBuffer& buffer) {
    double total = 0.0;
    int count = 0;
    for (const auto& m : buffer.generated_on(1)) {
        if (m.t_r == 1) {
            total += static_cast<double>(m.y);
            ++count;
        }
    }
    if (count == 0) {
        return std::nullopt;
    }
    return total / count;
}

std::vector<Particle> init_particles(const FilterConfig& config, std::optional<double> first_obs) {
    config.validate();
    const double lambda =
        first_obs.value_or(std::max(1.0, static_cast<double>(config.n_pop) / 100.0));
    const double outbreak_prob = config.regime_matrix.stationary_outbreak_probability();
    const double log_uniform = -std::log(static_cast<double>(config.n_particles));

    std::vector<Particle> particles(static_cast<std::size_t>(config.n_particles));
    for (std::size_t j = 0; j < particles.size(); ++j) {
        Rng rng = make_stream(config.seed, StreamTag::ParticleInit, {j});
        auto& p = particles[j];
        p.anchor_day = 0;
        p.anchor_regime = rng.uniform() < outbreak_prob ? Regime::Outbreak : Regime::Normal;
        const std::int64_t exposed = std::min(sample_poisson(rng, lambda), config.n_pop);
        const std::int64_t infected = std::min(sample_poisson(rng, lambda), config.n_pop - exposed);
        p.anchor_state = {config.n_pop - exposed - infected, exposed, infected, 0};
        p.window = Block{1, {}, {}};
        p.log_weight = log_uniform;
    }
    return particles;
}

Block propose_block(int anchor_day, const SeirsState& anchor_state, Regime anchor_regime, int t,
                    const FilterConfig& config, Rng& rng) {
    const Dynamics dynamics(config);
    Block block;
    block.first_day = anchor_day + 1;
    const auto length = static_cast<std::size_t>(std::max(0, t - anchor_day));
    block.states.reserve(length);
    block.regimes.reserve(length);
    SeirsState state = anchor_state;
    Regime regime = anchor_regime;
    for (int day = anchor_day + 1; day <= t; ++day) {
        regime = regime_step(regime, config.proposal(), rng);
        state = dynamics.step(state, regime, rng);
        block.states.push_back(state);
        block.regimes.push_back(regime);
    }
    return block;
}

double incremental_log_weight(const Block& old_block, const Block& new_block,
                              Regime anchor_regime, const StepMeasurements& step,
                              const FilterConfig& config) {
    if (new_block.first_day != step.first_day || new_block.last_day() != step.t) {
        throw InputError("proposed block does not span the lag window");
    }
    if (!old_block.empty() &&
        (old_block.first_day != step.first_day || old_block.last_day() != step.t - 1)) {
        throw InputError("old block is not aligned with the proposed block");
    }
    const double numerator =
        block_log_target(new_block, anchor_regime, step.current, step.first_day, config);
    const double denominator =
        block_log_target(old_block, anchor_regime, step.previous, step.first_day, config);
    return numerator - denominator;
}

double log_sum_exp(std::span<const double> log_values) noexcept {
    double max_value = kNegInf;
    for (const double v : log_values) {
        max_value = std::max(max_value, v);
    }
    if (!std::isfinite(max_value)) {
        return max_value;
    }
    double sum = 0.0;
    for (const double v : log_values) {
        sum += std::exp(v - max_value);
    }
    return max_value + std::log(sum);
}

NormalizedWeights normalize_and_ess(std::span<const double> log_weights, int time_step) {
    const double log_sum = log_sum_exp(log_weights);
    if (!std::isfinite(log_sum)) {
        throw DegeneracyError("all particle weights are zero at day " + std::to_string(time_step),
                              time_step);
    }
    NormalizedWeights out;
    out.log_sum = log_sum;
    out.weights.resize(log_weights.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < log_weights.size(); ++j) {
        out.weights[j] = std::exp(log_weights[j] - log_sum);
        sum += out.weights[j];
    }
    double sum_sq = 0.0;
    for (auto& w : out.weights) {
        w /= sum;
        sum_sq += w * w;
    }
    out.ess = std::clamp(1.0 / sum_sq, 1.0, static_cast<double>(log_weights.size()));
    return out;
}

std::vector<std::size_t> multinomial_ancestors(std::span<const double> weights, std::size_t n,
                                               Rng& rng) {
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::vector<std::size_t> ancestors(n);
    for (auto& a : ancestors) {
        a = pick(rng);
    }
    return ancestors;
}

std::vector<Particle> multinomial_resample(std::span<const Particle> particles,
                                           std::span<const double> weights, Rng& rng) {
    const auto ancestors = multinomial_ancestors(weights, particles.size(), rng);
    const double log_uniform = -std::log(static_cast<double>(particles.size()));
    std::vector<Particle> out;
    out.reserve(particles.size());
    for (const auto a : ancestors) {
        out.push_back(particles[a]);
        out.back().log_weight = log_uniform;
    }
    return out;
}

StateEstimate estimates(std::span<const Particle> particles, std::span<const double> weights,
                        int day) {
    StateEstimate est;
    for (std::size_t j = 0; j < particles.size(); ++j) {
        const auto& window = particles[j].window;
        const auto k = static_cast<std::size_t>(day - window.first_day);
        const auto& x = window.states[k];
        const double w = weights[j];
        est.s += w * static_cast<double>(x.s);
        est.e += w * static_cast<double>(x.e);
        est.i += w * static_cast<double>(x.i);
        est.r += w * static_cast<double>(x.r);
        est.outbreak_prob += w * to_int(window.regimes[k]);
    }
    est.outbreak_prob = std::clamp(est.outbreak_prob, 0.0, 1.0);
    return est;
}

FilterOutput run_filter(const FilterConfig& config, const MeasurementBuffer& buffer, int horizon,
                        const StepObserver& observer) {
    config.validate();
    if (horizon < 1) {
        throw ConfigError("horizon must be at least 1");
    }
    const int lag = config.lag;
    const auto n = static_cast<std::size_t>(config.n_particles);
    const double resample_below = config.ess_threshold_fraction * static_cast<double>(n);

    auto particles = init_particles(config, first_observation(buffer));
    std::vector<double> log_weights(n);
    for (std::size_t j = 0; j < n; ++j) {
        log_weights[j] = particles[j].log_weight;
    }
    double previous_log_sum = log_sum_exp(log_weights);

    FilterOutput out;
    out.days.reserve(static_cast<std::size_t>(horizon));
    std::vector<double> revised(static_cast<std::size_t>(horizon) + 1, 0.0);

    for (int t = 1; t <= horizon; ++t) {
        const auto step = step_measurements(buffer, t, lag);
        const int anchor_day = std::max(0, t - lag - 1);
        for (std::size_t j = 0; j < n; ++j) {
            auto& p = particles[j];
            if (p.anchor_day < anchor_day) {
                // The oldest window day is now frozen and becomes the anchor.
                p.anchor_state = p.window.states.front();
                p.anchor_regime = p.window.regimes.front();
                p.window.states.erase(p.window.states.begin());
                p.window.regimes.erase(p.window.regimes.begin());
                p.window.first_day += 1;
                p.anchor_day = anchor_day;
            }
            Rng rng = make_stream(config.seed, StreamTag::Propagate,
                                  {static_cast<std::uint64_t>(t), j});
            Block proposed = propose_block(p.anchor_day, p.anchor_state, p.anchor_regime, t,
                                           config, rng);
            if (p.log_weight != kNegInf) {
                p.log_weight +=
                    incremental_log_weight(p.window, proposed, p.anchor_regime, step, config);
            }
            p.window = std::move(proposed);
            log_weights[j] = p.log_weight;
        }
        if (observer) {
            observer(step, particles);
        }

        const auto normalized = normalize_and_ess(log_weights, t);
        out.log_likelihood += normalized.log_sum - previous_log_sum;
        if (config.record_weights) {
            out.weight_trace.push_back(normalized.weights);
        }

        DayResult day{t, estimates(particles, normalized.weights, t), 0.0, normalized.ess, false};
        for (int tau = step.first_day; tau <= t; ++tau) {
            revised[static_cast<std::size_t>(tau)] =
                weighted_outbreak_prob(particles, normalized.weights, tau);
        }

        if (normalized.ess < resample_below) {
            Rng rng = make_stream(config.seed, StreamTag::FilterResample,
                                  {static_cast<std::uint64_t>(t)});
            particles = multinomial_resample(particles, normalized.weights, rng);
            for (std::size_t j = 0; j < n; ++j) {
                log_weights[j] = particles[j].log_weight;
            }
            day.resampled = true;
            previous_log_sum = log_sum_exp(log_weights);
        } else {
            previous_log_sum = normalized.log_sum;
        }
        out.days.push_back(day);
    }
    for (auto& day : out.days) {
        day.outbreak_prob_revised = revised[static_cast<std::size_t>(day.t)];
    }
    // Same rule as MeasurementBuffer::dropped, restricted to receptions within the run.
    std::size_t dropped = 0;
    for (int t_g = 1; t_g <= buffer.last_generation_day(); ++t_g) {
        for (const auto& m : buffer.generated_on(t_g)) {
            if (m.t_r <= horizon && m.t_r - m.t_g > lag) {
                ++dropped;
            }
        }
    }
    out.dropped = dropped;
    return out;
}

}  // namespace flpf
