#include "flpf/data_gen.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <tuple>

#include "flpf/errors.hpp"

namespace flpf {

namespace {

constexpr int kMaxScheduleAttempts = 10000;

void validate_intervals(const std::vector<OutbreakInterval>& intervals, int horizon) {
    auto sorted = intervals;
    std::ranges::sort(sorted, {}, &OutbreakInterval::start);
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const auto& iv = sorted[k];
        if (iv.start < 1 || iv.end > horizon || iv.end < iv.start) {
            throw ConfigError("outbreak interval " + std::to_string(iv.start) + "-" +
                              std::to_string(iv.end) + " lies outside [1, horizon]");
        }
        if (k > 0 && iv.start <= sorted[k - 1].end) {
            throw ConfigError("outbreak intervals overlap");
        }
    }
}

}  // namespace

void SimConfig::validate() const {
    if (n_pop <= 0) {
        throw ConfigError("n_pop must be positive");
    }
    if (horizon < 1 || burn_in < 0 || burn_in >= horizon) {
        throw ConfigError("need 0 <= burn_in < horizon");
    }
    if (initial_infected < 0 || initial_infected > n_pop) {
        throw ConfigError("initial_infected must lie in [0, n_pop]");
    }
    if (!(lambda_floor > 0.0)) {
        throw ConfigError("lambda_floor must be positive");
    }
    if (!theta_true.valid()) {
        throw ConfigError("theta_true rates must be non-negative and finite: " + to_string(theta_true));
    }
    if (const auto* intervals = std::get_if<std::vector<OutbreakInterval>>(&schedule)) {
        validate_intervals(*intervals, horizon);
    } else {
        const auto& spec = std::get<RandomSchedule>(schedule);
        if (spec.count < 1 || spec.count > 2) {
            throw ConfigError("random schedules support 1 or 2 outbreaks");
        }
        if (spec.min_duration < 1 || spec.max_duration < spec.min_duration || spec.min_gap < 0) {
            throw ConfigError("invalid random outbreak duration/gap bounds");
        }
    }
}

std::vector<SensorConfig> default_sensors() {
    return {{1, 1, 0}, {2, 3, 3}};
}

std::vector<OutbreakInterval> random_outbreak_schedule(const RandomSchedule& spec, int horizon,
                                                       int burn_in, Rng& rng) {
    if (spec.count < 1 || spec.count > 2) {
        throw ConfigError("random schedules support 1 or 2 outbreaks");
    }
    const int available = horizon - burn_in;
    const int minimum_needed = spec.count * spec.min_duration + (spec.count - 1) * spec.min_gap;
    if (available < minimum_needed) {
        throw ConfigError("horizon - burn_in too short for the requested outbreaks");
    }
    std::uniform_int_distribution<int> duration_dist(spec.min_duration, spec.max_duration);
    for (int attempt = 0; attempt < kMaxScheduleAttempts; ++attempt) {
        std::vector<OutbreakInterval> intervals;
        bool placed = true;
        for (int k = 0; k < spec.count && placed; ++k) {
            const int duration = duration_dist(rng);
            const int latest_start = horizon - duration + 1;
            if (latest_start < burn_in + 1) {
                placed = false;
                break;
            }
            std::uniform_int_distribution<int> start_dist(burn_in + 1, latest_start);
            const int start = start_dist(rng);
            const OutbreakInterval candidate{start, start + duration - 1};
            for (const auto& other : intervals) {
                const bool separated = candidate.start > other.end + spec.min_gap ||
                                       other.start > candidate.end + spec.min_gap;
                if (!separated) {
                    placed = false;
                }
            }
            intervals.push_back(candidate);
        }
        if (placed) {
            std::ranges::sort(intervals, {}, &OutbreakInterval::start);
            return intervals;
        }
    }
    throw ConfigError("could not place the requested outbreaks after " +
                      std::to_string(kMaxScheduleAttempts) + " attempts");
}

Truth simulate_truth(const SimConfig& config) {
    config.validate();
    Truth truth;
    if (const auto* intervals = std::get_if<std::vector<OutbreakInterval>>(&config.schedule)) {
        truth.outbreaks = *intervals;
        std::ranges::sort(truth.outbreaks, {}, &OutbreakInterval::start);
    } else {
        Rng schedule_rng = make_stream(config.seed, StreamTag::Schedule);
        truth.outbreaks = random_outbreak_schedule(std::get<RandomSchedule>(config.schedule),
                                                   config.horizon, config.burn_in, schedule_rng);
    }

    const auto horizon = static_cast<std::size_t>(config.horizon);
    truth.regimes.assign(horizon + 1, Regime::Normal);
    for (const auto& iv : truth.outbreaks) {
        for (int day = iv.start; day <= iv.end; ++day) {
            truth.regimes[static_cast<std::size_t>(day)] = Regime::Outbreak;
        }
    }

    truth.states.reserve(horizon + 1);
    truth.states.push_back({config.n_pop - config.initial_infected, 0, config.initial_infected, 0});
    Rng rng = make_stream(config.seed, StreamTag::TruthState);
    for (std::size_t day = 1; day <= horizon; ++day) {
        const auto& previous = truth.states.back();
        const auto probs = transition_probs(previous, config.theta_true, truth.regimes[day],
                                            config.n_pop);
        truth.states.push_back(seirs_step(previous, probs, rng));
    }
    return truth;
}

std::vector<Measurement> generate_measurements(std::span<const SeirsState> states,
                                               std::span<const SensorConfig> sensors,
                                               std::uint64_t seed, double lambda_floor) {
    if (states.empty()) {
        throw InputError("cannot generate measurements from an empty trajectory");
    }
    const int horizon = static_cast<int>(states.size()) - 1;
    std::vector<Measurement> out;
    for (const auto& sensor : sensors) {
        if (sensor.period < 1 || sensor.delay < 0) {
            throw ConfigError("sensor period must be >= 1 and delay >= 0");
        }
        Rng rng = make_stream(seed, StreamTag::Sensor, {static_cast<std::uint64_t>(sensor.sensor_id)});
        for (int t_g = 1; t_g + sensor.delay <= horizon; t_g += sensor.period) {
            const auto& state = states[static_cast<std::size_t>(t_g)];
            const double lambda = std::max(static_cast<double>(state.i), lambda_floor);
            out.push_back({sensor.sensor_id, t_g, t_g + sensor.delay, sample_poisson(rng, lambda)});
        }
    }
    std::ranges::sort(out, [](const Measurement& a, const Measurement& b) {
        return std::tie(a.t_r, a.t_g, a.sensor) < std::tie(b.t_r, b.t_g, b.sensor);
    });
    return out;
}

}  // namespace flpf
