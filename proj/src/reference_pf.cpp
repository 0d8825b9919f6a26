#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "flpf/errors.hpp"
#include "flpf/filter.hpp"

namespace flpf {

namespace {

struct Hypothesis {
    SeirsState state;
    Regime regime = Regime::Normal;
};

}  // namespace

FilterOutput run_reference_pf(const FilterConfig& config, const MeasurementBuffer& buffer,
                              int horizon) {
    config.validate();
    if (horizon < 1) {
        throw ConfigError("horizon must be at least 1");
    }
    const auto n = static_cast<std::size_t>(config.n_particles);
    const double resample_below = config.ess_threshold_fraction * static_cast<double>(n);
    const RegimeMatrix& model = config.regime_matrix;
    const RegimeMatrix& proposal = config.proposal();

    std::vector<Hypothesis> particles;
    std::vector<double> log_weights;
    for (const auto& p : init_particles(config, first_observation(buffer))) {
        particles.push_back({p.anchor_state, p.anchor_regime});
        log_weights.push_back(p.log_weight);
    }
    double previous_log_sum = log_sum_exp(log_weights);

    FilterOutput out;
    for (int t = 1; t <= horizon; ++t) {
        // Only observations generated and received today count.
        std::vector<Measurement> today;
        for (const auto& m : buffer.generated_on(t)) {
            if (m.t_r == t) {
                today.push_back(m);
            }
        }

        for (std::size_t j = 0; j < n; ++j) {
            Rng rng = make_stream(config.seed, StreamTag::Propagate,
                                  {static_cast<std::uint64_t>(t), j});
            auto& h = particles[j];
            const Regime next_regime = regime_step(h.regime, proposal, rng);
            const auto probs = transition_probs(h.state, config.theta, next_regime, config.n_pop);
            const SeirsState next_state = seirs_step(h.state, probs, rng);

            const double lambda = std::max(static_cast<double>(next_state.i), config.lambda_floor);
            double log_likelihood = 0.0;
            for (const auto& m : today) {
                const double y = static_cast<double>(m.y);
                log_likelihood += poisson_log_pmf(y, lambda, std::lgamma(y + 1.0));
            }
            const double correction = std::log(model(h.regime, next_regime)) -
                                      std::log(proposal(h.regime, next_regime));
            log_weights[j] += log_likelihood + correction;
            h = {next_state, next_regime};
        }

        const auto normalized = normalize_and_ess(log_weights, t);
        out.log_likelihood += normalized.log_sum - previous_log_sum;
        if (config.record_weights) {
            out.weight_trace.push_back(normalized.weights);
        }

        DayResult day;
        day.t = t;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = normalized.weights[j];
            day.estimate.s += w * static_cast<double>(particles[j].state.s);
            day.estimate.e += w * static_cast<double>(particles[j].state.e);
            day.estimate.i += w * static_cast<double>(particles[j].state.i);
            day.estimate.r += w * static_cast<double>(particles[j].state.r);
            day.estimate.outbreak_prob += w * to_int(particles[j].regime);
        }
        day.estimate.outbreak_prob = std::clamp(day.estimate.outbreak_prob, 0.0, 1.0);
        day.outbreak_prob_revised = day.estimate.outbreak_prob;
        day.ess = normalized.ess;

        if (normalized.ess < resample_below) {
            Rng rng = make_stream(config.seed, StreamTag::FilterResample,
                                  {static_cast<std::uint64_t>(t)});
            const auto ancestors = multinomial_ancestors(normalized.weights, n, rng);
            std::vector<Hypothesis> offspring;
            offspring.reserve(n);
            for (const auto a : ancestors) {
                offspring.push_back(particles[a]);
            }
            particles = std::move(offspring);
            std::ranges::fill(log_weights, -std::log(static_cast<double>(n)));
            previous_log_sum = log_sum_exp(log_weights);
            day.resampled = true;
        } else {
            previous_log_sum = normalized.log_sum;
        }
        out.days.push_back(day);
    }
    std::size_t dropped = 0;
    for (int t_g = 1; t_g <= buffer.last_generation_day(); ++t_g) {
        for (const auto& m : buffer.generated_on(t_g)) {
            if (m.t_r <= horizon && m.t_r != m.t_g) {
                ++dropped;
            }
        }
    }
    out.dropped = dropped;
    return out;
}

}  // namespace flpf
