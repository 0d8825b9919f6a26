#include "flpf/measurement_buffer.hpp"

#include <algorithm>
#include <string>

#include "flpf/errors.hpp"

namespace flpf {

MeasurementBuffer::MeasurementBuffer(std::span<const Measurement> measurements) {
    for (const auto& m : measurements) {
        ingest(m);
    }
}

void MeasurementBuffer::ingest(const Measurement& m) {
    if (m.t_g < 1 || m.t_r < m.t_g || m.y < 0) {
        throw InputError("invalid measurement (sensor " + std::to_string(m.sensor) +
                         ", t_g " + std::to_string(m.t_g) + ", t_r " + std::to_string(m.t_r) +
                         ")");
    }
    const auto [it, inserted] = keys_.emplace(m.sensor, m.t_g, m.t_r);
    if (!inserted) {
        throw InputError("duplicate measurement (sensor " + std::to_string(m.sensor) + ", t_g " +
                         std::to_string(m.t_g) + ", t_r " + std::to_string(m.t_r) + ")");
    }
    const auto day = static_cast<std::size_t>(m.t_g);
    if (by_generation_.size() <= day) {
        by_generation_.resize(day + 1);
    }
    auto& group = by_generation_[day];
    const auto pos = std::ranges::upper_bound(group, m, [](const Measurement& a, const Measurement& b) {
        return std::tie(a.t_r, a.sensor) < std::tie(b.t_r, b.sensor);
    });
    group.insert(pos, m);
    ++total_;
    watermark_ = std::max(watermark_, m.t_r);
}

std::span<const Measurement> MeasurementBuffer::generated_on(int t_g) const {
    if (t_g < 1 || static_cast<std::size_t>(t_g) >= by_generation_.size()) {
        return {};
    }
    return by_generation_[static_cast<std::size_t>(t_g)];
}

std::vector<DayGroup> MeasurementBuffer::window(int t, int lag) const {
    std::vector<DayGroup> out;
    const int visible_until = std::min(t, watermark_);
    for (int day = std::max(1, t - lag); day <= t; ++day) {
        DayGroup group{day, {}};
        for (const auto& m : generated_on(day)) {
            if (m.t_r > visible_until) {
                break;
            }
            group.measurements.push_back(m);
        }
        if (!group.measurements.empty()) {
            out.push_back(std::move(group));
        }
    }
    return out;
}

std::vector<Measurement> MeasurementBuffer::newly_visible(int t, int lag) const {
    std::vector<Measurement> out;
    if (t > watermark_) {
        return out;
    }
    for (int day = std::max(1, t - lag); day <= t; ++day) {
        for (const auto& m : generated_on(day)) {
            if (m.t_r == t) {
                out.push_back(m);
            }
        }
    }
    return out;
}

std::size_t MeasurementBuffer::dropped(int lag) const {
    std::size_t count = 0;
    for (const auto& group : by_generation_) {
        count += static_cast<std::size_t>(std::ranges::count_if(group, [&](const Measurement& m) {
            return m.t_r <= watermark_ && m.t_r - m.t_g > lag;
        }));
    }
    return count;
}

}  // namespace flpf
