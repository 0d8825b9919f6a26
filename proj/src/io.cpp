#include "flpf/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "flpf/errors.hpp"

namespace flpf {

namespace fs = std::filesystem;

namespace {

std::ofstream open_for_write(const fs::path& path, const std::string& config_hash,
                             const std::string& header) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                          ec.message());
        }
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "# config_hash=" << config_hash << '\n' << header << '\n';
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) {
        throw IoError("write to " + path.string() + " failed");
    }
}

class CsvReader {
public:
    CsvReader(const fs::path& path, const std::string& expected_header) : path_(path), in_(path) {
        if (!in_) {
            throw IoError("cannot open " + path.string());
        }
        std::vector<std::string> header;
        if (!next(header)) {
            throw InputError(path.string() + " is empty");
        }
        if (join(header) != expected_header) {
            throw InputError(path.string() + ": expected header '" + expected_header +
                             "', found '" + join(header) + "'");
        }
        columns_ = header.size();
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_number_;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty() || line.front() == '#') {
                continue;
            }
            fields = split_csv_line(line);
            if (columns_ != 0 && fields.size() != columns_) {
                fail("expected " + std::to_string(columns_) + " fields");
            }
            return true;
        }
        return false;
    }

    long long integer(const std::string& field) const {
        try {
            std::size_t used = 0;
            const long long value = std::stoll(field, &used);
            if (used == field.size()) {
                return value;
            }
        } catch (const std::exception&) {
        }
        fail("not an integer: '" + field + "'");
    }

    double real(const std::string& field) const {
        try {
            std::size_t used = 0;
            const double value = std::stod(field, &used);
            if (used == field.size()) {
                return value;
            }
        } catch (const std::exception&) {
        }
        fail("not a number: '" + field + "'");
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw InputError(path_.string() + ":" + std::to_string(line_number_) + ": " + message);
    }

    static std::string join(const std::vector<std::string>& fields) {
        std::string out;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            out += (k == 0 ? "" : ",") + fields[k];
        }
        return out;
    }

    fs::path path_;
    std::ifstream in_;
    std::size_t columns_ = 0;
    std::size_t line_number_ = 0;
};

constexpr const char* kTruthHeader = "t,s,e,i,r,regime";
constexpr const char* kMeasurementHeader = "sensor,t_g,t_r,y";
constexpr const char* kFilterHeader =
    "t,i_hat,s_hat,e_hat,r_hat,outbreak_prob,ess,resampled,outbreak_prob_revised";

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

void write_truth_csv(const fs::path& path, const Truth& truth, const std::string& config_hash) {
    auto out = open_for_write(path, config_hash, kTruthHeader);
    for (std::size_t t = 0; t < truth.states.size(); ++t) {
        const auto& x = truth.states[t];
        out << t << ',' << x.s << ',' << x.e << ',' << x.i << ',' << x.r << ','
            << to_int(truth.regimes[t]) << '\n';
    }
    finish(out, path);
}

Truth read_truth_csv(const fs::path& path) {
    CsvReader reader(path, kTruthHeader);
    Truth truth;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (reader.integer(f[0]) != static_cast<long long>(truth.states.size())) {
            throw InputError(path.string() + ": days must run 0, 1, 2, ... without gaps");
        }
        truth.states.push_back(
            {reader.integer(f[1]), reader.integer(f[2]), reader.integer(f[3]), reader.integer(f[4])});
        truth.regimes.push_back(regime_from_int(static_cast<int>(reader.integer(f[5]))));
    }
    if (truth.states.empty()) {
        throw InputError(path.string() + " has no rows");
    }
    for (int t = 0; t < static_cast<int>(truth.regimes.size()); ++t) {
        if (truth.regimes[t] != Regime::Outbreak) {
            continue;
        }
        if (t > 0 && truth.regimes[t - 1] == Regime::Outbreak) {
            truth.outbreaks.back().end = t;
        } else {
            truth.outbreaks.push_back({t, t});
        }
    }
    return truth;
}

void write_measurements_csv(const fs::path& path, const std::vector<Measurement>& measurements,
                            const std::string& config_hash) {
    auto out = open_for_write(path, config_hash, kMeasurementHeader);
    for (const auto& m : measurements) {
        out << m.sensor << ',' << m.t_g << ',' << m.t_r << ',' << m.y << '\n';
    }
    finish(out, path);
}

std::vector<Measurement> read_measurements_csv(const fs::path& path) {
    CsvReader reader(path, kMeasurementHeader);
    std::vector<Measurement> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        out.push_back({static_cast<int>(reader.integer(f[0])), static_cast<int>(reader.integer(f[1])),
                       static_cast<int>(reader.integer(f[2])), reader.integer(f[3])});
    }
    return out;
}

void write_filter_csv(const fs::path& path, const FilterOutput& output,
                      const std::string& config_hash) {
    auto out = open_for_write(path, config_hash, kFilterHeader);
    for (const auto& d : output.days) {
        const auto& e = d.estimate;
        out << d.t << ',' << e.i << ',' << e.s << ',' << e.e << ',' << e.r << ','
            << e.outbreak_prob << ',' << d.ess << ',' << (d.resampled ? 1 : 0) << ','
            << d.outbreak_prob_revised << '\n';
    }
    finish(out, path);
}

std::vector<DayResult> read_filter_csv(const fs::path& path) {
    CsvReader reader(path, kFilterHeader);
    std::vector<DayResult> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        DayResult d;
        d.t = static_cast<int>(reader.integer(f[0]));
        d.estimate.i = reader.real(f[1]);
        d.estimate.s = reader.real(f[2]);
        d.estimate.e = reader.real(f[3]);
        d.estimate.r = reader.real(f[4]);
        d.estimate.outbreak_prob = reader.real(f[5]);
        d.ess = reader.real(f[6]);
        d.resampled = reader.integer(f[7]) != 0;
        d.outbreak_prob_revised = reader.real(f[8]);
        out.push_back(d);
    }
    return out;
}

void write_smc2_trace_csv(const fs::path& path, const Smc2Result& result,
                          const std::string& config_hash) {
    auto out = open_for_write(path, config_hash,
                              "k,ess_theta,resampled,beta0_hat,beta1_hat,gamma_hat,sigma_hat,xi_hat");
    for (const auto& record : result.history) {
        const auto& m = record.mean;
        out << record.k << ',' << record.ess << ',' << (record.resampled ? 1 : 0) << ','
            << m.beta0 << ',' << m.beta1 << ',' << m.gamma << ',' << m.sigma << ',' << m.xi
            << '\n';
    }
    finish(out, path);
}

void write_posterior_csv(const fs::path& path, const Smc2Result& result,
                         const std::string& config_hash) {
    auto out = open_for_write(path, config_hash,
                              "sample,weight,log_likelihood,beta0,beta1,gamma,sigma,xi");
    const auto& last = result.final_iteration();
    for (std::size_t i = 0; i < last.samples.size(); ++i) {
        const auto& s = last.samples[i];
        out << i << ',' << last.weights[i] << ',' << s.log_likelihood << ',' << s.theta.beta0
            << ',' << s.theta.beta1 << ',' << s.theta.gamma << ',' << s.theta.sigma << ','
            << s.theta.xi << '\n';
    }
    finish(out, path);
}

void write_curve_csv(const fs::path& path, const Curve& curve, const std::string& config_hash) {
    auto out = open_for_write(path, config_hash, "threshold,x,y");
    for (const auto& p : curve.points) {
        out << p.threshold << ',' << p.x << ',' << p.y << '\n';
    }
    finish(out, path);
}

std::string read_config_hash(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);
    const std::string prefix = "# config_hash=";
    return line.rfind(prefix, 0) == 0 ? line.substr(prefix.size()) : std::string{};
}

}  // namespace flpf
