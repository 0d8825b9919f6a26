#pragma once

#include <span>
#include <vector>

#include "flpf/data_gen.hpp"

namespace flpf {

/// Per-day truth and predicted outbreak probability over an evaluation window.
struct EvalSeries {
    std::vector<int> t;
    std::vector<int> o_true;
    std::vector<double> p_est;

    std::size_t size() const noexcept { return t.size(); }
    /// Throws InputError on mismatched lengths, empty series, or values out of range.
    void validate() const;
};

/// Restricts day-indexed truth regimes and probabilities (index = day) to
/// days >= eval_start. Both spans must cover days 0..T.
EvalSeries make_eval_series(std::span<const Regime> truth_regimes,
                            std::span<const double> outbreak_prob, int eval_start);

struct CurvePoint {
    double threshold = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct Curve {
    std::vector<CurvePoint> points;  ///< one per threshold, in threshold order
    double area = 0.0;
};

/// (1/T) sum (o_true - p_est)^2.
double mse(const EvalSeries& series);

/// 101 evenly spaced thresholds on [0, 1] merged with the distinct predicted
/// probabilities, sorted and deduplicated.
std::vector<double> threshold_grid(std::span<const double> p_est);

/// Pooled per-day ROC. An alarm is raised when p_est > threshold. The area is
/// the trapezoid rule over the FPR-sorted points closed by (0, 0) and (1, 1).
/// Throws InputError when the series has no positive or no negative days, or
/// when the thresholds do not include 0 and 1.
Curve roc(const EvalSeries& series, std::span<const double> thresholds);

/// AMOC: x = false-alarm days outside every outbreak / non-outbreak days,
/// y = mean over outbreaks of (first alarm day in the outbreak - onset),
/// capped at the outbreak duration when nothing fires. Outbreaks are clipped
/// to the evaluation window. The area uses the trapezoid rule over the sorted
/// points, closed by the always-alarm point (1, 0).
Curve amoc(const EvalSeries& series, std::span<const double> thresholds,
           std::span<const OutbreakInterval> outbreaks);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
};

/// Sample mean and sample standard deviation (n - 1 denominator).
MetricSummary summarize(std::span<const double> values);

}  // namespace flpf
