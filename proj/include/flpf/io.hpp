#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flpf/data_gen.hpp"
#include "flpf/filter.hpp"
#include "flpf/metrics.hpp"
#include "flpf/smc2.hpp"

namespace flpf {

// Every writer starts the file with "# config_hash=<hash>"; readers skip
// lines beginning with '#'. Failures to open, write or parse raise IoError or
// InputError.

void write_truth_csv(const std::filesystem::path& path, const Truth& truth,
                     const std::string& config_hash);
/// Outbreak intervals are rebuilt from runs of regime 1.
Truth read_truth_csv(const std::filesystem::path& path);

void write_measurements_csv(const std::filesystem::path& path,
                            const std::vector<Measurement>& measurements,
                            const std::string& config_hash);
std::vector<Measurement> read_measurements_csv(const std::filesystem::path& path);

/// Columns t,i_hat,s_hat,e_hat,r_hat,outbreak_prob,ess,resampled,outbreak_prob_revised.
void write_filter_csv(const std::filesystem::path& path, const FilterOutput& output,
                      const std::string& config_hash);
std::vector<DayResult> read_filter_csv(const std::filesystem::path& path);

/// Columns k,ess_theta,resampled,beta0_hat,beta1_hat,gamma_hat,sigma_hat,xi_hat.
void write_smc2_trace_csv(const std::filesystem::path& path, const Smc2Result& result,
                          const std::string& config_hash);
/// Final-iteration samples, one row per sample with its normalized weight.
void write_posterior_csv(const std::filesystem::path& path, const Smc2Result& result,
                         const std::string& config_hash);

void write_curve_csv(const std::filesystem::path& path, const Curve& curve,
                     const std::string& config_hash);

/// Reads "# config_hash=..." from the first line, or "" when absent.
std::string read_config_hash(const std::filesystem::path& path);

/// Splits one CSV line on commas; no quoting is used by any schema here.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace flpf
