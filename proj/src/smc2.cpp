#include "flpf/smc2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "flpf/errors.hpp"
#include "flpf/parallel.hpp"

namespace flpf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_target(const ThetaSample& sample, const UniformPrior& prior) {
    return prior.log_density(sample.theta) + sample.log_likelihood;
}

}  // namespace

double UniformPrior::log_density(const Theta& theta) const noexcept {
    const auto values = theta.as_array();
    double total = 0.0;
    for (std::size_t d = 0; d < values.size(); ++d) {
        if (!(values[d] > lower[d] && values[d] <= upper[d])) {
            return kNegInf;
        }
        total -= std::log(upper[d] - lower[d]);
    }
    return total;
}

Theta UniformPrior::sample(Rng& rng) const {
    ThetaArray values{};
    for (std::size_t d = 0; d < values.size(); ++d) {
        // 1 - u lies in (0, 1], matching the half-open support.
        values[d] = lower[d] + (upper[d] - lower[d]) * (1.0 - rng.uniform());
    }
    return Theta::from_array(values);
}

void UniformPrior::validate() const {
    for (std::size_t d = 0; d < lower.size(); ++d) {
        if (!(lower[d] >= 0.0 && upper[d] > lower[d] && std::isfinite(upper[d]))) {
            throw ConfigError("prior bounds must satisfy 0 <= lower < upper < inf");
        }
    }
}

void Smc2Config::validate() const {
    if (n_samples < 2) {
        throw ConfigError("SMC sampler needs at least 2 samples");
    }
    if (n_iterations < 1) {
        throw ConfigError("SMC sampler needs at least 1 iteration");
    }
    if (horizon < 1) {
        throw ConfigError("horizon must be at least 1");
    }
    for (const double step : stepsizes) {
        if (!(step > 0.0) || !std::isfinite(step)) {
            throw ConfigError("random-walk stepsizes must be positive");
        }
    }
    if (!(ess_threshold_fraction >= 0.0 && ess_threshold_fraction <= 1.0)) {
        throw ConfigError("ess_threshold_fraction must lie in [0, 1]");
    }
    prior.validate();
}

std::uint64_t filter_seed(std::uint64_t seed, int iteration, std::size_t sample) {
    return make_stream(seed, StreamTag::FilterSeed,
                       {static_cast<std::uint64_t>(iteration), sample})();
}

double filter_log_likelihood(const Smc2Config& config, const MeasurementBuffer& buffer,
                             const Theta& theta, std::uint64_t seed) {
    FilterConfig filter = config.filter;
    filter.theta = theta;
    filter.seed = seed;
    filter.record_weights = false;
    try {
        return run_filter(filter, buffer, config.horizon).log_likelihood;
    } catch (const DegeneracyError&) {
        return kNegInf;
    }
}

std::vector<ThetaSample> init_samples(const Smc2Config& config, const MeasurementBuffer& buffer) {
    config.validate();
    std::vector<ThetaSample> samples(static_cast<std::size_t>(config.n_samples));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Rng rng = make_stream(config.seed, StreamTag::PriorDraw, {i});
        samples[i].theta = config.prior.sample(rng);
    }
    parallel_for(
        samples.size(),
        [&](std::size_t i) {
            auto& s = samples[i];
            s.log_likelihood =
                filter_log_likelihood(config, buffer, s.theta, filter_seed(config.seed, 1, i));
            s.log_weight = s.log_likelihood;
        },
        config.threads);
    return samples;
}

Theta rw_propose(const Theta& theta, const ThetaArray& stepsizes, Rng& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    ThetaArray values = theta.as_array();
    for (std::size_t d = 0; d < values.size(); ++d) {
        const double start = values[d];
        double proposal = 0.0;
        do {
            proposal = std::abs(start + stepsizes[d] * noise(rng));
        } while (proposal == 0.0);
        values[d] = proposal;
    }
    return Theta::from_array(values);
}

double weight_update(const ThetaSample& previous, const ThetaSample& proposed,
                     const UniformPrior& prior) {
    const double proposed_target = log_target(proposed, prior);
    if (proposed_target == kNegInf || previous.log_weight == kNegInf) {
        return kNegInf;
    }
    return previous.log_weight + proposed_target - log_target(previous, prior);
}

std::vector<std::size_t> systematic_ancestors(std::span<const double> weights, double offset) {
    const std::size_t n = weights.size();
    std::vector<std::size_t> ancestors(n);
    const double spacing = 1.0 / static_cast<double>(n);
    double cumulative = weights.empty() ? 0.0 : weights[0];
    std::size_t source = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double position = offset + static_cast<double>(i) * spacing;
        while (position >= cumulative && source + 1 < n) {
            ++source;
            cumulative += weights[source];
        }
        ancestors[i] = source;
    }
    return ancestors;
}

std::vector<ThetaSample> systematic_resample(std::span<const ThetaSample> samples,
                                             std::span<const double> weights, Rng& rng) {
    const double offset = rng.uniform() / static_cast<double>(samples.size());
    const double log_uniform = -std::log(static_cast<double>(samples.size()));
    std::vector<ThetaSample> out;
    out.reserve(samples.size());
    for (const auto a : systematic_ancestors(weights, offset)) {
        out.push_back(samples[a]);
        out.back().log_weight = log_uniform;
    }
    return out;
}

Theta weighted_mean(std::span<const ThetaSample> samples, std::span<const double> weights) {
    ThetaArray mean{};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (weights[i] == 0.0) {
            continue;
        }
        const auto values = samples[i].theta.as_array();
        for (std::size_t d = 0; d < mean.size(); ++d) {
            mean[d] += weights[i] * values[d];
        }
    }
    return Theta::from_array(mean);
}

ThetaEstimate estimate_theta(std::span<const IterationRecord> history) {
    if (history.empty()) {
        throw InputError("estimate_theta needs at least one completed iteration");
    }
    ThetaEstimate out;
    double total_ess = 0.0;
    for (const auto& record : history) {
        total_ess += record.ess;
    }
    ThetaArray mean{};
    for (const auto& record : history) {
        const double lambda = record.ess / total_ess;
        out.recycling_weights.push_back(lambda);
        const auto values = record.mean.as_array();
        for (std::size_t d = 0; d < mean.size(); ++d) {
            mean[d] += lambda * values[d];
        }
    }
    out.mean = Theta::from_array(mean);
    return out;
}

Smc2Result run_smc2(const Smc2Config& config, const MeasurementBuffer& buffer) {
    config.validate();
    const auto n = static_cast<std::size_t>(config.n_samples);
    const double resample_below = config.ess_threshold_fraction * static_cast<double>(n);

    Smc2Result result;
    std::vector<ThetaSample> samples = init_samples(config, buffer);
    for (int k = 1; k <= config.n_iterations; ++k) {
        if (k > 1) {
            std::vector<ThetaSample> moved(n);
            parallel_for(
                n,
                [&](std::size_t i) {
                    Rng rng = make_stream(config.seed, StreamTag::RandomWalk,
                                          {static_cast<std::uint64_t>(k), i});
                    auto& next = moved[i];
                    next.theta = rw_propose(samples[i].theta, config.stepsizes, rng);
                    if (config.prior.log_density(next.theta) == kNegInf) {
                        next.log_likelihood = kNegInf;
                    } else {
                        next.log_likelihood = filter_log_likelihood(
                            config, buffer, next.theta, filter_seed(config.seed, k, i));
                    }
                    next.log_weight = weight_update(samples[i], next, config.prior);
                },
                config.threads);
            samples = std::move(moved);
        }

        std::vector<double> log_weights(n);
        for (std::size_t i = 0; i < n; ++i) {
            log_weights[i] = samples[i].log_weight;
        }
        NormalizedWeights normalized;
        try {
            normalized = normalize_and_ess(log_weights, k);
        } catch (const DegeneracyError&) {
            throw DegeneracyError("every parameter sample has zero weight at iteration " +
                                      std::to_string(k) +
                                      " (filters degenerate or proposals left the prior support)",
                                  k);
        }

        IterationRecord record;
        record.k = k;
        record.samples = samples;
        record.weights = normalized.weights;
        record.ess = normalized.ess;
        record.mean = weighted_mean(samples, normalized.weights);
        record.finite_weights = static_cast<int>(
            std::ranges::count_if(log_weights, [](double w) { return std::isfinite(w); }));

        if (normalized.ess < resample_below) {
            Rng rng = make_stream(config.seed, StreamTag::SamplerResample,
                                  {static_cast<std::uint64_t>(k)});
            samples = systematic_resample(samples, normalized.weights, rng);
            record.resampled = true;
        } else {
            // Carry normalized weights forward so they stay O(1).
            for (std::size_t i = 0; i < n; ++i) {
                samples[i].log_weight = log_weights[i] - normalized.log_sum;
            }
        }
        result.history.push_back(std::move(record));
    }
    result.estimate = estimate_theta(result.history);
    return result;
}

}  // namespace flpf
