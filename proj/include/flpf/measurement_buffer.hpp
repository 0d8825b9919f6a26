#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "flpf/data_gen.hpp"

namespace flpf {

/// Measurements sharing one generation day.
struct DayGroup {
    int t_g = 0;
    std::vector<Measurement> measurements;
};

/// Stores received measurements and answers, for a wall-clock day t and a lag
/// l, which measurements are attributable to each generation day in the lag
/// window [max(1, t - l), t].
///
/// A measurement is usable at day t iff t - l <= t_g <= t and t_r <= t. Once
/// t_r - t_g exceeds the lag it can never be used and counts as dropped.
class MeasurementBuffer {
public:
    MeasurementBuffer() = default;
    explicit MeasurementBuffer(std::span<const Measurement> measurements);

    /// Stores m and advances the watermark to its reception day. Duplicate
    /// (sensor, t_g, t_r) keys and invalid measurements raise InputError and
    /// leave the store unchanged.
    void ingest(const Measurement& m);

    /// Groups by generation day, ascending, over [max(1, t - lag), t]. Days
    /// without usable measurements are omitted.
    std::vector<DayGroup> window(int t, int lag) const;

    /// Measurements received exactly on day t that are still inside the lag window.
    std::vector<Measurement> newly_visible(int t, int lag) const;

    /// Received measurements (t_r <= watermark) that fell outside every lag
    /// window; non-decreasing as the watermark advances.
    std::size_t dropped(int lag) const;

    int watermark() const noexcept { return watermark_; }
    std::size_t size() const noexcept { return total_; }
    bool empty() const noexcept { return total_ == 0; }
    int last_generation_day() const noexcept {
        return static_cast<int>(by_generation_.size()) - 1;
    }

    /// All measurements generated on day t_g (any reception day), ascending t_r.
    std::span<const Measurement> generated_on(int t_g) const;

private:
    std::vector<std::vector<Measurement>> by_generation_;
    std::set<std::tuple<int, int, int>> keys_;
    std::size_t total_ = 0;
    int watermark_ = 0;
};

}  // namespace flpf
