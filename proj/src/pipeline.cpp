#include "flpf/pipeline.hpp"

#include <string>

#include "flpf/errors.hpp"

namespace flpf {

Dataset simulate_dataset(SimConfig config, std::span<const SensorConfig> sensors,
                         std::uint64_t seed) {
    config.seed = seed;
    Dataset data;
    data.truth = simulate_truth(config);
    data.measurements =
        generate_measurements(data.truth.states, sensors, seed, config.lambda_floor);
    return data;
}

RunMetrics evaluate_run(const Truth& truth, std::span<const DayResult> days, int eval_start,
                        bool use_revised) {
    if (days.empty()) {
        throw InputError("filter output is empty");
    }
    if (static_cast<int>(days.size()) != truth.horizon()) {
        throw InputError("filter output covers " + std::to_string(days.size()) +
                         " days but the truth covers " + std::to_string(truth.horizon()));
    }
    std::vector<double> prob(truth.regimes.size(), 0.0);
    for (std::size_t k = 0; k < days.size(); ++k) {
        if (days[k].t != static_cast<int>(k) + 1) {
            throw InputError("filter output days must run 1, 2, ... without gaps");
        }
        prob[k + 1] = use_revised ? days[k].outbreak_prob_revised : days[k].estimate.outbreak_prob;
    }
    const EvalSeries series = make_eval_series(truth.regimes, prob, eval_start);
    const auto grid = threshold_grid(series.p_est);
    return {mse(series), roc(series, grid), amoc(series, grid, truth.outbreaks)};
}

}  // namespace flpf
