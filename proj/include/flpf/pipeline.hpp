#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flpf/data_gen.hpp"
#include "flpf/filter.hpp"
#include "flpf/metrics.hpp"

namespace flpf {

struct Dataset {
    Truth truth;
    std::vector<Measurement> measurements;
};

/// Simulates truth and measurements with config.seed replaced by `seed`.
Dataset simulate_dataset(SimConfig config, std::span<const SensorConfig> sensors,
                         std::uint64_t seed);

struct RunMetrics {
    double mse = 0.0;
    Curve roc;
    Curve amoc;
};

/// Scores a filter run against the truth on days >= eval_start.
/// `use_revised` scores the lag-window revisions instead of the real-time estimate.
RunMetrics evaluate_run(const Truth& truth, std::span<const DayResult> days, int eval_start,
                        bool use_revised = false);

}  // namespace flpf
