#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "flpf/epi_model.hpp"
#include "flpf/filter.hpp"
#include "flpf/measurement_buffer.hpp"
#include "flpf/random.hpp"

namespace flpf {

using ThetaArray = std::array<double, Theta::kSize>;

/// Independent uniform priors on each rate; support is (lower, upper].
struct UniformPrior {
    ThetaArray lower{0.0, 0.0, 0.0, 0.0, 0.0};
    ThetaArray upper{0.5, 1.0, 0.5, 0.5, 0.05};

    double log_density(const Theta& theta) const noexcept;
    Theta sample(Rng& rng) const;
    void validate() const;
};

struct ThetaSample {
    Theta theta;
    double log_weight = 0.0;
    double log_likelihood = 0.0;
};

struct Smc2Config {
    int n_samples = 64;
    int n_iterations = 10;
    UniformPrior prior;
    ThetaArray stepsizes{1e-4, 1e-4, 1e-4, 1e-4, 1e-6};
    /// Template for every inner filter; theta and seed are overwritten per sample.
    FilterConfig filter;
    int horizon = 365;
    double ess_threshold_fraction = 0.5;
    std::uint64_t seed = 1;
    /// 0 = one worker per hardware thread.
    unsigned threads = 0;

    void validate() const;
};

/// Stream seed for the filter run of sample i at iteration k (1-based).
std::uint64_t filter_seed(std::uint64_t seed, int iteration, std::size_t sample);

/// log p-hat(Y | theta) from one filter run; -inf when the filter degenerates.
double filter_log_likelihood(const Smc2Config& config, const MeasurementBuffer& buffer,
                             const Theta& theta, std::uint64_t seed);

/// Draws N parameter vectors from the prior and runs one filter each. Sampling
/// from the prior makes the initial weight equal to the likelihood estimate.
std::vector<ThetaSample> init_samples(const Smc2Config& config, const MeasurementBuffer& buffer);

/// Gaussian random walk with per-parameter standard deviations. Components
/// that land at or below zero are reflected about zero (redrawn if exactly 0).
Theta rw_propose(const Theta& theta, const ThetaArray& stepsizes, Rng& rng);

/// Forwards-proposal L-kernel with a symmetric random walk: L/q = 1, so only
/// the ratio of prior times likelihood survives.
double weight_update(const ThetaSample& previous, const ThetaSample& proposed,
                     const UniformPrior& prior);

/// Offspring indices for systematic resampling with offset u in [0, 1/N).
std::vector<std::size_t> systematic_ancestors(std::span<const double> weights, double offset);

/// Systematic resampling; offspring weights are reset to -log N.
std::vector<ThetaSample> systematic_resample(std::span<const ThetaSample> samples,
                                             std::span<const double> weights, Rng& rng);

struct IterationRecord {
    int k = 0;
    std::vector<ThetaSample> samples;
    std::vector<double> weights;  ///< normalized, before any resampling
    double ess = 0.0;
    bool resampled = false;
    Theta mean;
    int finite_weights = 0;
};

struct ThetaEstimate {
    Theta mean;
    std::vector<double> recycling_weights;  ///< one per iteration, sums to 1
};

/// Combines per-iteration weighted means with weights proportional to each
/// iteration's ESS.
ThetaEstimate estimate_theta(std::span<const IterationRecord> history);

/// Weighted mean of a sample set.
Theta weighted_mean(std::span<const ThetaSample> samples, std::span<const double> weights);

struct Smc2Result {
    std::vector<IterationRecord> history;
    ThetaEstimate estimate;

    const IterationRecord& final_iteration() const { return history.back(); }
};

/// K iterations of propose -> filter -> reweight -> normalize -> resample
/// when ESS < fraction * N. Throws DegeneracyError if every sample has zero
/// weight at some iteration.
Smc2Result run_smc2(const Smc2Config& config, const MeasurementBuffer& buffer);

}  // namespace flpf
