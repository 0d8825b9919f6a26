#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flpf/config.hpp"
#include "flpf/errors.hpp"
#include "flpf/io.hpp"
#include "flpf/measurement_buffer.hpp"
#include "flpf/parallel.hpp"
#include "flpf/pipeline.hpp"
#include "flpf/smc2.hpp"

namespace fs = std::filesystem;
using namespace flpf;

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kDegenerate = 3, kIo = 4 };

struct Options {
    std::string config_path;
    std::string preset_name;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string seeds;
    std::vector<int> lags;
    std::string out = "out";
    std::string data;
    std::string scenario = "state";
    std::optional<int> eval_start;
    bool use_revised = false;
};

class Stopwatch {
public:
    explicit Stopwatch(std::string label)
        : label_(std::move(label)), start_(std::chrono::steady_clock::now()) {}
    ~Stopwatch() {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
        std::cerr << label_ << ": " << std::fixed << std::setprecision(2) << elapsed.count()
                  << " s\n";
    }

private:
    std::string label_;
    std::chrono::steady_clock::time_point start_;
};

RunConfig resolve_config(const Options& opt) {
    RunConfig config;
    if (!opt.config_path.empty()) {
        config = load_config(opt.config_path);
        if (!opt.preset_name.empty()) {
            throw ConfigError("--config and --preset are mutually exclusive");
        }
    } else {
        config = preset(opt.preset_name.empty() ? "desk" : opt.preset_name);
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& item : opt.overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects section.key=value, got '" + item + "'");
        }
        pairs.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    config = apply_overrides(config, pairs);
    if (opt.seed && !opt.seeds.empty()) {
        throw ConfigError("--seed and --seeds are mutually exclusive");
    }
    if (opt.seed) {
        config.seeds = {*opt.seed};
    } else if (!opt.seeds.empty()) {
        config.seeds = parse_seed_range(opt.seeds);
    }
    if (!opt.lags.empty()) {
        config.lags = opt.lags;
    }
    if (opt.eval_start) {
        config.eval_start = *opt.eval_start;
    }
    config.validate();
    return config;
}

fs::path data_dir(const Options& opt) {
    return opt.data.empty() ? fs::path(opt.out) : fs::path(opt.data);
}

std::string seed_tag(std::uint64_t seed) { return "s" + std::to_string(seed); }

std::string run_tag(std::uint64_t seed, int lag) {
    return seed_tag(seed) + "_lag" + std::to_string(lag);
}

void save_config(const fs::path& out, const RunConfig& config) {
    fs::create_directories(out);
    std::ofstream file(out / "config.ini");
    file << "# config_hash=" << config_hash(config) << '\n' << to_ini(config);
    if (!file) {
        throw IoError("cannot write " + (out / "config.ini").string());
    }
}

int cmd_simulate(const Options& opt) {
    const RunConfig config = resolve_config(opt);
    const SimConfig& sim = opt.scenario == "infer" ? config.smc2_sim : config.sim;
    const fs::path out(opt.out);
    const auto hash = config_hash(config);
    save_config(out, config);
    Stopwatch timer("simulate");
    parallel_for(config.seeds.size(), [&](std::size_t k) {
        const auto seed = config.seeds[k];
        const auto data = simulate_dataset(sim, config.sensors, seed);
        write_truth_csv(out / ("truth_" + seed_tag(seed) + ".csv"), data.truth, hash);
        write_measurements_csv(out / ("measurements_" + seed_tag(seed) + ".csv"),
                               data.measurements, hash);
    });
    return kOk;
}

MeasurementBuffer load_buffer(const fs::path& dir, std::uint64_t seed) {
    const auto path = dir / ("measurements_" + seed_tag(seed) + ".csv");
    if (!fs::exists(path)) {
        throw IoError("missing " + path.string() + " (run simulate first)");
    }
    return MeasurementBuffer(read_measurements_csv(path));
}

int cmd_filter(const Options& opt) {
    const RunConfig config = resolve_config(opt);
    const fs::path data = data_dir(opt);
    const fs::path out(opt.out);
    const auto hash = config_hash(config);
    save_config(out, config);

    struct Job {
        std::uint64_t seed;
        int lag;
    };
    std::vector<Job> jobs;
    for (const auto seed : config.seeds) {
        for (const int lag : config.lags) {
            jobs.push_back({seed, lag});
        }
    }
    std::vector<MeasurementBuffer> buffers;
    for (const auto seed : config.seeds) {
        buffers.push_back(load_buffer(data, seed));
    }
    Stopwatch timer("filter");
    parallel_for(jobs.size(), [&](std::size_t k) {
        const auto [seed, lag] = jobs[k];
        FilterConfig filter = config.filter;
        filter.lag = lag;
        filter.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = run_filter(filter, buffers[k / config.lags.size()], config.sim.horizon);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
        write_filter_csv(out / ("filter_" + run_tag(seed, lag) + ".csv"), result, hash);
        std::ostringstream line;
        line << "filter " << run_tag(seed, lag) << ": log_likelihood=" << result.log_likelihood
             << " dropped=" << result.dropped << " wall=" << elapsed.count() << " s\n";
        std::cerr << line.str();
    });
    return kOk;
}

int cmd_infer(const Options& opt) {
    const RunConfig config = resolve_config(opt);
    const fs::path data = data_dir(opt);
    const fs::path out(opt.out);
    const auto hash = config_hash(config);
    save_config(out, config);
    const int lag = opt.lags.empty() ? config.smc2.filter.lag : opt.lags.front();
    if (opt.lags.size() > 1) {
        throw ConfigError("infer runs one lag at a time");
    }
    Stopwatch timer("infer");
    for (const auto seed : config.seeds) {
        Smc2Config smc2 = config.smc2;
        smc2.seed = seed;
        smc2.filter.lag = lag;
        const auto buffer = load_buffer(data, seed);
        const auto result = run_smc2(smc2, buffer);
        write_smc2_trace_csv(out / ("smc2_trace_" + run_tag(seed, lag) + ".csv"), result, hash);
        write_posterior_csv(out / ("posterior_" + run_tag(seed, lag) + ".csv"), result, hash);
        std::cerr << "infer " << run_tag(seed, lag) << ": "
                  << to_string(result.estimate.mean) << '\n';
    }
    return kOk;
}

struct MetricRow {
    std::uint64_t seed;
    int lag;
    double mse;
    double auroc;
    double auamoc;
};

void write_summary(const fs::path& path, const std::vector<MetricRow>& rows,
                   const std::vector<int>& lags, const std::string& hash) {
    std::ofstream file(path);
    file << "# config_hash=" << hash << '\n'
         << "lag,runs,mse_mean,mse_sd,auroc_mean,auroc_sd,auamoc_mean,auamoc_sd\n";
    file << std::setprecision(6);
    for (const int lag : lags) {
        std::vector<double> m, a, d;
        for (const auto& r : rows) {
            if (r.lag == lag) {
                m.push_back(r.mse);
                a.push_back(r.auroc);
                d.push_back(r.auamoc);
            }
        }
        file << lag << ',' << m.size();
        for (const auto* values : {&m, &a, &d}) {
            if (values->size() >= 2) {
                const auto s = summarize(*values);
                file << ',' << s.mean << ',' << s.sd;
            } else {
                file << ',' << (values->empty() ? 0.0 : values->front()) << ",nan";
            }
        }
        file << '\n';
    }
    if (!file) {
        throw IoError("cannot write " + path.string());
    }
}

int cmd_evaluate(const Options& opt) {
    const RunConfig config = resolve_config(opt);
    const fs::path data = data_dir(opt);
    const fs::path out(opt.out);
    const auto hash = config_hash(config);
    fs::create_directories(out);

    std::vector<MetricRow> rows;
    for (const auto seed : config.seeds) {
        const auto truth_path = data / ("truth_" + seed_tag(seed) + ".csv");
        if (!fs::exists(truth_path)) {
            throw IoError("missing " + truth_path.string());
        }
        const Truth truth = read_truth_csv(truth_path);
        for (const int lag : config.lags) {
            const auto filter_path = out / ("filter_" + run_tag(seed, lag) + ".csv");
            if (!fs::exists(filter_path)) {
                throw IoError("missing " + filter_path.string() + " (run filter first)");
            }
            const auto days = read_filter_csv(filter_path);
            const auto metrics = evaluate_run(truth, days, config.eval_start, opt.use_revised);
            write_curve_csv(out / ("roc_" + run_tag(seed, lag) + ".csv"), metrics.roc, hash);
            write_curve_csv(out / ("amoc_" + run_tag(seed, lag) + ".csv"), metrics.amoc, hash);
            rows.push_back({seed, lag, metrics.mse, metrics.roc.area, metrics.amoc.area});
        }
    }
    std::ofstream file(out / "metrics.csv");
    file << "# config_hash=" << hash << '\n' << "seed,lag,mse,auroc,auamoc\n";
    file << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
        file << r.seed << ',' << r.lag << ',' << r.mse << ',' << r.auroc << ',' << r.auamoc
             << '\n';
    }
    if (!file) {
        throw IoError("cannot write metrics.csv");
    }
    write_summary(out / "summary.csv", rows, config.lags, hash);
    return kOk;
}

int cmd_report(const Options& opt) {
    const fs::path out(opt.out);
    const auto path = out / "summary.csv";
    if (!fs::exists(path)) {
        throw IoError("missing " + path.string() + " (run evaluate first)");
    }
    std::ifstream in(path);
    std::string line;
    std::ostringstream table;
    table << "| Lag | Runs | MSE | AUROC | AUAMOC |\n|---|---|---|---|---|\n";
    std::getline(in, line);
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto f = split_csv_line(line);
        if (f.size() != 8) {
            throw InputError("malformed row in " + path.string());
        }
        table << "| " << f[0] << " | " << f[1] << " | " << f[2] << " (" << f[3] << ") | " << f[4]
              << " (" << f[5] << ") | " << f[6] << " (" << f[7] << ") |\n";
    }
    std::cout << table.str();

    std::ofstream report(out / "report.md");
    report << "# config_hash=" << read_config_hash(path) << "\n\n" << table.str();
    for (const auto& entry : fs::directory_iterator(out)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("smc2_trace_", 0) == 0) {
            report << "\nSMC trace " << name << ":\n\n";
            std::ifstream trace(entry.path());
            std::string row;
            while (std::getline(trace, row)) {
                if (!row.empty() && row.front() != '#') {
                    report << "    " << row << '\n';
                }
            }
        }
    }
    if (!report) {
        throw IoError("cannot write report.md");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-lag particle filtering for outbreak detection with delayed data"};
    app.require_subcommand(1);
    Options opt;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "INI configuration file")
            ->check(CLI::ExistingFile);
        sub->add_option("--preset", opt.preset_name, "desk | paper-state-estimation | "
                                                     "paper-parameter-estimation");
        sub->add_option("--set", opt.overrides, "override, e.g. filter.particles=1024");
        sub->add_option("--seed", opt.seed, "single seed");
        sub->add_option("--seeds", opt.seeds, "seed range N..M");
        sub->add_option("--out", opt.out, "output directory");
    };

    auto* simulate = app.add_subcommand("simulate", "write truth and measurement CSVs");
    add_common(simulate);
    simulate->add_option("--scenario", opt.scenario, "state (filter data) or infer (SMC data)")
        ->check(CLI::IsMember({"state", "infer"}));

    auto* filter = app.add_subcommand("filter", "run the fixed-lag filter per seed and lag");
    add_common(filter);
    filter->add_option("--lag", opt.lags, "lag(s); default from config");
    filter->add_option("--data", opt.data, "directory with measurement CSVs (default --out)");

    auto* infer = app.add_subcommand("infer", "SMC parameter estimation per seed");
    add_common(infer);
    infer->add_option("--lag", opt.lags, "filter lag; default from config");
    infer->add_option("--data", opt.data, "directory with measurement CSVs (default --out)");

    auto* evaluate = app.add_subcommand("evaluate", "score filter outputs against truth");
    add_common(evaluate);
    evaluate->add_option("--lag", opt.lags, "lag(s); default from config");
    evaluate->add_option("--data", opt.data, "directory with truth CSVs (default --out)");
    evaluate->add_option("--eval-start", opt.eval_start, "first evaluated day");
    evaluate->add_flag("--revised", opt.use_revised,
                       "score lag-window revisions instead of real-time estimates");

    auto* report = app.add_subcommand("report", "print the summary table");
    report->add_option("--out", opt.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(opt);
        }
        if (filter->parsed()) {
            return cmd_filter(opt);
        }
        if (infer->parsed()) {
            return cmd_infer(opt);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(opt);
        }
        return cmd_report(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const DegeneracyError& e) {
        std::cerr << "degeneracy at step " << e.time_step() << ": " << e.what() << '\n';
        return kDegenerate;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    }
}
