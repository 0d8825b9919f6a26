#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "flpf/data_gen.hpp"
#include "flpf/filter.hpp"
#include "flpf/smc2.hpp"

namespace flpf {

/// Everything one pipeline run needs. `sim` drives simulate/filter/evaluate;
/// `smc2_sim` generates the series used by infer.
struct RunConfig {
    SimConfig sim;
    std::vector<SensorConfig> sensors = default_sensors();
    FilterConfig filter;
    std::vector<int> lags{0, 3, 7};
    SimConfig smc2_sim;
    Smc2Config smc2;
    std::vector<std::uint64_t> seeds{1};
    int eval_start = 430;

    void validate() const;
};

/// Names accepted by preset().
std::vector<std::string> preset_names();

/// Built-in configurations. Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);

/// Applies INI text with sections [sim] [sensors] [filter] [smc2] [smc2_sim]
/// [run] on top of `base`. Unknown keys are rejected.
RunConfig apply_ini(const RunConfig& base, const std::string& text);

/// Reads the file, honouring an optional "preset = NAME" key in [run] as the
/// starting point.
RunConfig load_config(const std::filesystem::path& path);

/// Applies "section.key=value" overrides in order.
RunConfig apply_overrides(const RunConfig& base,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

/// Canonical INI rendering; load_config(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& config);

/// git-style object hash: SHA-1 of "blob <len>\0" + canonical INI, in hex.
std::string config_hash(const RunConfig& config);

/// Parses "N" or "N..M" (inclusive).
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

}  // namespace flpf
