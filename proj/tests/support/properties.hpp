#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flpf::testing {

struct PropertyReport {
    std::string name;
    int cases = 0;
    int failures = 0;
    std::string first_failure;

    bool ok() const noexcept { return cases > 0 && failures == 0; }
    void fail(const std::string& why) {
        if (failures++ == 0) {
            first_failure = why;
        }
    }
};

/// Runs `cases` randomly configured filters (random population, horizon,
/// lag, sensor streams, parameters and regime matrices, with Q != M in half
/// of them) and checks, at every step: population conservation of every
/// particle state and of the estimates, weight normalization within 1e-12,
/// ESS in [1, N_x], and net-once measurement accounting over the run.
/// Returns one report per property, in that order.
std::vector<PropertyReport> check_filter_properties(int cases, std::uint64_t seed);

/// Systematic resampling: every index receives between floor(N w) and
/// ceil(N w) offspring for random weight vectors (including zeros).
PropertyReport check_systematic_offspring(int cases, std::uint64_t seed);

/// Buffer partition: sum over t of |newly_visible(t, l)| + dropped(l) equals
/// the number ingested, every usable measurement is newly visible exactly
/// once, windows match their definition, and larger lags never lose data.
PropertyReport check_buffer_partition(int cases, std::uint64_t seed);

}  // namespace flpf::testing
