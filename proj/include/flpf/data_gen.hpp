#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "flpf/epi_model.hpp"
#include "flpf/random.hpp"

namespace flpf {

/// Inclusive range of outbreak days [start, end].
struct OutbreakInterval {
    int start = 0;
    int end = 0;

    int duration() const noexcept { return end - start + 1; }
    bool contains(int day) const noexcept { return day >= start && day <= end; }

    friend bool operator==(const OutbreakInterval&, const OutbreakInterval&) = default;
};

/// Place `count` outbreaks at random after the burn-in.
struct RandomSchedule {
    int count = 1;
    int min_duration = 30;
    int max_duration = 120;
    int min_gap = 30;
};

using RegimeSchedule = std::variant<std::vector<OutbreakInterval>, RandomSchedule>;

struct SimConfig {
    std::int64_t n_pop = 10000;
    int horizon = 730;
    int burn_in = 430;
    Theta theta_true{0.2, 0.4, 0.2, 0.1, 1.0 / 180.0};
    RegimeSchedule schedule = RandomSchedule{};
    std::int64_t initial_infected = 100;
    double lambda_floor = kDefaultLambdaFloor;
    std::uint64_t seed = 1;

    /// Throws ConfigError on inconsistent fields.
    void validate() const;
};

struct SensorConfig {
    int sensor_id = 1;
    int period = 1;
    int delay = 0;
};

/// Daily on-time stream plus the every-third-day stream received three days late.
std::vector<SensorConfig> default_sensors();

struct Measurement {
    int sensor = 0;
    int t_g = 0;  ///< generation day
    int t_r = 0;  ///< reception day
    std::int64_t y = 0;

    int delay() const noexcept { return t_r - t_g; }

    friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Ground truth for days 0..horizon; index 0 is the initial condition.
struct Truth {
    std::vector<SeirsState> states;
    std::vector<Regime> regimes;
    std::vector<OutbreakInterval> outbreaks;

    int horizon() const noexcept { return static_cast<int>(states.size()) - 1; }
};

/// Draws `count` non-overlapping intervals in (burn_in, horizon], separated by
/// at least `min_gap` days, each lasting U{min_duration..max_duration} days.
/// Retries a bounded number of times before raising ConfigError.
std::vector<OutbreakInterval> random_outbreak_schedule(const RandomSchedule& spec, int horizon,
                                                       int burn_in, Rng& rng);

/// Resolves the schedule and runs the chain-binomial model with beta switched
/// on the outbreak days. Deterministic per config.seed.
Truth simulate_truth(const SimConfig& config);

/// For each sensor, emits y ~ Poisson(max(I_{t_g}, lambda_floor)) at
/// t_g = 1, 1 + period, ... while t_g + delay <= horizon. The result is sorted
/// by (t_r, t_g, sensor).
std::vector<Measurement> generate_measurements(std::span<const SeirsState> states,
                                               std::span<const SensorConfig> sensors,
                                               std::uint64_t seed,
                                               double lambda_floor = kDefaultLambdaFloor);

}  // namespace flpf
