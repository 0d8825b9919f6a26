#include "flpf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flpf/errors.hpp"

namespace flpf {

namespace {

double trapezoid(std::vector<std::pair<double, double>> points) {
    double area = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) {
        area += (points[k].first - points[k - 1].first) *
                (points[k].second + points[k - 1].second) / 2.0;
    }
    return area;
}

void require_unit_endpoints(std::span<const double> thresholds) {
    const bool has_zero = std::ranges::find(thresholds, 0.0) != thresholds.end();
    const bool has_one = std::ranges::find(thresholds, 1.0) != thresholds.end();
    if (!has_zero || !has_one) {
        throw InputError("threshold grid must include 0 and 1");
    }
}

}  // namespace

void EvalSeries::validate() const {
    if (t.empty()) {
        throw InputError("evaluation window is empty");
    }
    if (o_true.size() != t.size() || p_est.size() != t.size()) {
        throw InputError("evaluation series columns have different lengths");
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (o_true[k] != 0 && o_true[k] != 1) {
            throw InputError("o_true must be 0 or 1");
        }
        if (!(p_est[k] >= 0.0 && p_est[k] <= 1.0)) {
            throw InputError("p_est must lie in [0, 1]");
        }
    }
}

EvalSeries make_eval_series(std::span<const Regime> truth_regimes,
                            std::span<const double> outbreak_prob, int eval_start) {
    if (truth_regimes.size() != outbreak_prob.size()) {
        throw InputError("truth and filter output cover different horizons");
    }
    EvalSeries series;
    for (std::size_t day = static_cast<std::size_t>(std::max(eval_start, 0));
         day < truth_regimes.size(); ++day) {
        series.t.push_back(static_cast<int>(day));
        series.o_true.push_back(to_int(truth_regimes[day]));
        series.p_est.push_back(outbreak_prob[day]);
    }
    series.validate();
    return series;
}

double mse(const EvalSeries& series) {
    series.validate();
    double total = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double diff = series.o_true[k] - series.p_est[k];
        total += diff * diff;
    }
    return total / static_cast<double>(series.size());
}

std::vector<double> threshold_grid(std::span<const double> p_est) {
    std::vector<double> grid;
    grid.reserve(101 + p_est.size());
    for (int k = 0; k <= 100; ++k) {
        grid.push_back(k / 100.0);
    }
    grid.insert(grid.end(), p_est.begin(), p_est.end());
    std::ranges::sort(grid);
    const auto [first, last] = std::ranges::unique(grid);
    grid.erase(first, last);
    return grid;
}

Curve roc(const EvalSeries& series, std::span<const double> thresholds) {
    series.validate();
    require_unit_endpoints(thresholds);
    const auto positives = std::accumulate(series.o_true.begin(), series.o_true.end(), 0);
    const auto negatives = static_cast<int>(series.size()) - positives;
    if (positives == 0 || negatives == 0) {
        throw InputError("ROC needs both outbreak and non-outbreak days");
    }
    Curve curve;
    std::vector<std::pair<double, double>> sorted{{0.0, 0.0}, {1.0, 1.0}};
    for (const double threshold : thresholds) {
        int true_pos = 0;
        int false_pos = 0;
        for (std::size_t k = 0; k < series.size(); ++k) {
            if (series.p_est[k] > threshold) {
                (series.o_true[k] == 1 ? true_pos : false_pos) += 1;
            }
        }
        const double fpr = static_cast<double>(false_pos) / negatives;
        const double tpr = static_cast<double>(true_pos) / positives;
        curve.points.push_back({threshold, fpr, tpr});
        sorted.emplace_back(fpr, tpr);
    }
    std::ranges::sort(sorted);
    curve.area = std::clamp(trapezoid(std::move(sorted)), 0.0, 1.0);
    return curve;
}

Curve amoc(const EvalSeries& series, std::span<const double> thresholds,
           std::span<const OutbreakInterval> outbreaks) {
    series.validate();
    const int window_start = series.t.front();
    const int window_end = series.t.back();
    std::vector<OutbreakInterval> clipped;
    for (const auto& iv : outbreaks) {
        const OutbreakInterval c{std::max(iv.start, window_start), std::min(iv.end, window_end)};
        if (c.start <= c.end) {
            clipped.push_back(c);
        }
    }
    if (clipped.empty()) {
        throw InputError("AMOC needs at least one outbreak inside the evaluation window");
    }
    const auto in_outbreak = [&](int day) {
        return std::ranges::any_of(clipped, [day](const auto& iv) { return iv.contains(day); });
    };
    int quiet_days = 0;
    for (const int day : series.t) {
        quiet_days += in_outbreak(day) ? 0 : 1;
    }

    Curve curve;
    // Always alarming: every outbreak caught at onset, every quiet day a false alarm.
    std::vector<std::pair<double, double>> sorted{{1.0, 0.0}};
    for (const double threshold : thresholds) {
        int false_alarms = 0;
        for (std::size_t k = 0; k < series.size(); ++k) {
            if (series.p_est[k] > threshold && !in_outbreak(series.t[k])) {
                ++false_alarms;
            }
        }
        double total_delay = 0.0;
        for (const auto& iv : clipped) {
            double delay = iv.duration();
            for (std::size_t k = 0; k < series.size(); ++k) {
                if (iv.contains(series.t[k]) && series.p_est[k] > threshold) {
                    delay = series.t[k] - iv.start;
                    break;
                }
            }
            total_delay += delay;
        }
        const double rate = quiet_days > 0 ? static_cast<double>(false_alarms) / quiet_days : 0.0;
        const double mean_delay = total_delay / static_cast<double>(clipped.size());
        curve.points.push_back({threshold, rate, mean_delay});
        sorted.emplace_back(rate, mean_delay);
    }
    // Ascending rate; within a rate, descending delay traces the lower envelope last.
    std::ranges::sort(sorted, [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    curve.area = trapezoid(std::move(sorted));
    return curve;
}

MetricSummary summarize(std::span<const double> values) {
    if (values.size() < 2) {
        throw InputError("summaries need at least two runs");
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double squares = 0.0;
    for (const double v : values) {
        squares += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(squares / (n - 1.0))};
}

}  // namespace flpf
