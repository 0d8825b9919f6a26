#include "flpf/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "flpf/errors.hpp"

namespace flpf {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream stream(text);
    while (std::getline(stream, part, sep)) {
        if (!trim(part).empty()) {
            parts.push_back(trim(part));
        }
    }
    return parts;
}

std::string fmt(double value) {
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10) << value;
    return out.str();
}

template <typename T>
std::string join(const T& values, const char* sep = ", ") {
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    bool first = true;
    for (const auto& v : values) {
        out << (first ? "" : sep) << v;
        first = false;
    }
    return out.str();
}

double parse_real(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used == text.size()) {
            return value;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": not a number: '" + text + "'");
}

long long parse_int(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const long long value = std::stoll(text, &used);
        if (used == text.size()) {
            return value;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": not an integer: '" + text + "'");
}

std::vector<double> parse_reals(const std::string& key, const std::string& text,
                                std::size_t expected) {
    std::vector<double> values;
    for (const auto& part : split(text, ',')) {
        values.push_back(parse_real(key, part));
    }
    if (expected != 0 && values.size() != expected) {
        throw ConfigError(key + ": expected " + std::to_string(expected) + " values");
    }
    return values;
}

ThetaArray parse_theta_array(const std::string& key, const std::string& text) {
    const auto v = parse_reals(key, text, Theta::kSize);
    ThetaArray out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

RegimeMatrix parse_matrix(const std::string& key, const std::string& text) {
    const auto v = parse_reals(key, text, 4);
    try {
        return {v[0], v[1], v[2], v[3]};
    } catch (const Error& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::string format_matrix(const RegimeMatrix& m) {
    const auto e = m.entries();
    return join(std::vector<double>(e.begin(), e.end()));
}

std::string format_schedule(const RegimeSchedule& schedule) {
    if (const auto* spec = std::get_if<RandomSchedule>(&schedule)) {
        return "random:" + std::to_string(spec->count);
    }
    std::vector<std::string> parts;
    for (const auto& iv : std::get<std::vector<OutbreakInterval>>(schedule)) {
        parts.push_back(std::to_string(iv.start) + "-" + std::to_string(iv.end));
    }
    return join(parts);
}

RegimeSchedule parse_schedule(const std::string& key, const std::string& text,
                              const RegimeSchedule& previous) {
    if (text.rfind("random:", 0) == 0) {
        RandomSchedule spec;
        if (const auto* old = std::get_if<RandomSchedule>(&previous)) {
            spec = *old;
        }
        spec.count = static_cast<int>(parse_int(key, text.substr(7)));
        return spec;
    }
    std::vector<OutbreakInterval> intervals;
    for (const auto& part : split(text, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            throw ConfigError(key + ": expected 'random:K' or 'START-END, ...', got '" + text + "'");
        }
        intervals.push_back({static_cast<int>(parse_int(key, trim(part.substr(0, dash)))),
                             static_cast<int>(parse_int(key, trim(part.substr(dash + 1))))});
    }
    if (intervals.empty()) {
        throw ConfigError(key + ": no outbreak intervals given");
    }
    return intervals;
}

void put_sim(pt::ptree& tree, const std::string& section, const SimConfig& sim) {
    tree.put(section + ".n_pop", sim.n_pop);
    tree.put(section + ".horizon", sim.horizon);
    tree.put(section + ".burn_in", sim.burn_in);
    tree.put(section + ".theta", join(sim.theta_true.as_array()));
    tree.put(section + ".outbreaks", format_schedule(sim.schedule));
    RandomSchedule spec;
    if (const auto* s = std::get_if<RandomSchedule>(&sim.schedule)) {
        spec = *s;
    }
    tree.put(section + ".min_duration", spec.min_duration);
    tree.put(section + ".max_duration", spec.max_duration);
    tree.put(section + ".min_gap", spec.min_gap);
    tree.put(section + ".initial_infected", sim.initial_infected);
    tree.put(section + ".lambda_floor", fmt(sim.lambda_floor));
}

void set_sim_key(SimConfig& sim, const std::string& name, const std::string& key,
                 const std::string& value) {
    if (name == "n_pop") {
        sim.n_pop = parse_int(key, value);
    } else if (name == "horizon") {
        sim.horizon = static_cast<int>(parse_int(key, value));
    } else if (name == "burn_in") {
        sim.burn_in = static_cast<int>(parse_int(key, value));
    } else if (name == "theta") {
        sim.theta_true = Theta::from_array(parse_theta_array(key, value));
    } else if (name == "outbreaks") {
        sim.schedule = parse_schedule(key, value, sim.schedule);
    } else if (name == "min_duration") {
        if (auto* spec = std::get_if<RandomSchedule>(&sim.schedule)) {
            spec->min_duration = static_cast<int>(parse_int(key, value));
        }
    } else if (name == "max_duration") {
        if (auto* spec = std::get_if<RandomSchedule>(&sim.schedule)) {
            spec->max_duration = static_cast<int>(parse_int(key, value));
        }
    } else if (name == "min_gap") {
        if (auto* spec = std::get_if<RandomSchedule>(&sim.schedule)) {
            spec->min_gap = static_cast<int>(parse_int(key, value));
        }
    } else if (name == "initial_infected") {
        sim.initial_infected = parse_int(key, value);
    } else if (name == "lambda_floor") {
        sim.lambda_floor = parse_real(key, value);
    } else {
        throw ConfigError("unknown key " + key);
    }
}

void set_key(RunConfig& c, const std::string& section, const std::string& name,
             const std::string& value) {
    const std::string key = section + "." + name;
    if (section == "sim") {
        set_sim_key(c.sim, name, key, value);
    } else if (section == "smc2_sim") {
        set_sim_key(c.smc2_sim, name, key, value);
    } else if (section == "sensors" && name == "streams") {
        c.sensors.clear();
        for (const auto& part : split(value, ',')) {
            const auto fields = split(part, ':');
            if (fields.size() != 3) {
                throw ConfigError(key + ": expected ID:PERIOD:DELAY entries");
            }
            c.sensors.push_back({static_cast<int>(parse_int(key, fields[0])),
                                 static_cast<int>(parse_int(key, fields[1])),
                                 static_cast<int>(parse_int(key, fields[2]))});
        }
    } else if (section == "filter" && name == "particles") {
        c.filter.n_particles = static_cast<int>(parse_int(key, value));
    } else if (section == "filter" && name == "lags") {
        c.lags.clear();
        for (const auto& part : split(value, ',')) {
            c.lags.push_back(static_cast<int>(parse_int(key, part)));
        }
    } else if (section == "filter" && name == "regime_matrix") {
        c.filter.regime_matrix = parse_matrix(key, value);
    } else if (section == "filter" && name == "proposal_matrix") {
        if (value == "none") {
            c.filter.proposal_matrix.reset();
        } else {
            c.filter.proposal_matrix = parse_matrix(key, value);
        }
    } else if (section == "filter" && name == "ess_threshold") {
        c.filter.ess_threshold_fraction = parse_real(key, value);
    } else if (section == "filter" && name == "theta") {
        c.filter.theta = Theta::from_array(parse_theta_array(key, value));
    } else if (section == "smc2" && name == "samples") {
        c.smc2.n_samples = static_cast<int>(parse_int(key, value));
    } else if (section == "smc2" && name == "iterations") {
        c.smc2.n_iterations = static_cast<int>(parse_int(key, value));
    } else if (section == "smc2" && name == "particles") {
        c.smc2.filter.n_particles = static_cast<int>(parse_int(key, value));
    } else if (section == "smc2" && name == "lag") {
        c.smc2.filter.lag = static_cast<int>(parse_int(key, value));
    } else if (section == "smc2" && name == "stepsizes") {
        c.smc2.stepsizes = parse_theta_array(key, value);
    } else if (section == "smc2" && name == "prior_lower") {
        c.smc2.prior.lower = parse_theta_array(key, value);
    } else if (section == "smc2" && name == "prior_upper") {
        c.smc2.prior.upper = parse_theta_array(key, value);
    } else if (section == "smc2" && name == "ess_threshold") {
        c.smc2.ess_threshold_fraction = parse_real(key, value);
    } else if (section == "smc2" && name == "threads") {
        c.smc2.threads = static_cast<unsigned>(parse_int(key, value));
    } else if (section == "run" && name == "seeds") {
        c.seeds = parse_seed_range(value);
    } else if (section == "run" && name == "eval_start") {
        c.eval_start = static_cast<int>(parse_int(key, value));
    } else {
        throw ConfigError("unknown key " + key);
    }
}

// Fields that always follow other sections.
void resolve(RunConfig& c) {
    c.filter.n_pop = c.sim.n_pop;
    c.filter.lambda_floor = c.sim.lambda_floor;
    c.smc2.filter.n_pop = c.smc2_sim.n_pop;
    c.smc2.filter.lambda_floor = c.smc2_sim.lambda_floor;
    c.smc2.filter.regime_matrix = c.filter.regime_matrix;
    c.smc2.filter.proposal_matrix = c.filter.proposal_matrix;
    c.smc2.filter.ess_threshold_fraction = c.filter.ess_threshold_fraction;
    c.smc2.horizon = c.smc2_sim.horizon;
}

void apply_tree(RunConfig& c, const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
        if (!body.data().empty() && body.empty()) {
            throw ConfigError("key '" + section + "' must sit inside a section");
        }
        for (const auto& [name, value] : body) {
            if (section == "run" && name == "preset") {
                continue;
            }
            set_key(c, section, name, trim(value.data()));
        }
    }
    resolve(c);
}

pt::ptree parse_ini_text(const std::string& text) {
    std::istringstream in(text);
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return tree;
}

RunConfig desk() {
    RunConfig c;
    c.sim = SimConfig{};
    c.filter.n_particles = 512;
    c.filter.theta = c.sim.theta_true;
    c.lags = {0, 3, 7};
    c.seeds = parse_seed_range("1..10");
    c.eval_start = 430;

    c.smc2_sim.horizon = 365;
    c.smc2_sim.burn_in = 100;
    c.smc2_sim.theta_true = Theta{0.1, 0.3, 0.05, 0.08, 0.005};
    c.smc2_sim.schedule = std::vector<OutbreakInterval>{{120, 240}};
    c.smc2.n_samples = 64;
    c.smc2.n_iterations = 10;
    c.smc2.filter.n_particles = 256;
    c.smc2.filter.lag = 0;
    c.smc2.stepsizes = {0.01, 0.01, 0.005, 0.005, 0.0005};
    resolve(c);
    return c;
}

RunConfig paper_state_estimation() {
    RunConfig c = desk();
    c.seeds = parse_seed_range("1..50");
    resolve(c);
    return c;
}

RunConfig paper_parameter_estimation() {
    RunConfig c = desk();
    c.smc2_sim.horizon = 730;
    c.smc2_sim.burn_in = 200;
    c.smc2_sim.schedule = std::vector<OutbreakInterval>{{240, 480}};
    c.smc2.n_samples = 1024;
    c.smc2.n_iterations = 50;
    c.smc2.filter.n_particles = 1024;
    c.smc2.stepsizes = {1e-4, 1e-4, 1e-4, 1e-4, 1e-6};
    c.seeds = parse_seed_range("1..5");
    resolve(c);
    return c;
}

}  // namespace

void RunConfig::validate() const {
    sim.validate();
    smc2_sim.validate();
    filter.validate();
    smc2.validate();
    smc2.filter.validate();
    if (sensors.empty()) {
        throw ConfigError("at least one sensor stream is required");
    }
    std::set<int> ids;
    for (const auto& s : sensors) {
        if (s.period < 1 || s.delay < 0) {
            throw ConfigError("sensor period must be >= 1 and delay >= 0");
        }
        if (!ids.insert(s.sensor_id).second) {
            throw ConfigError("duplicate sensor id " + std::to_string(s.sensor_id));
        }
    }
    if (lags.empty()) {
        throw ConfigError("at least one lag is required");
    }
    for (const int lag : lags) {
        if (lag < 0) {
            throw ConfigError("lags must be non-negative");
        }
    }
    if (seeds.empty()) {
        throw ConfigError("at least one seed is required");
    }
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw ConfigError("seeds must be distinct");
    }
    if (eval_start < 0 || eval_start > sim.horizon) {
        throw ConfigError("eval_start must lie in [0, horizon]");
    }
}

std::vector<std::string> preset_names() {
    return {"desk", "paper-state-estimation", "paper-parameter-estimation"};
}

RunConfig preset(const std::string& name) {
    if (name == "desk") {
        return desk();
    }
    if (name == "paper-state-estimation") {
        return paper_state_estimation();
    }
    if (name == "paper-parameter-estimation") {
        return paper_parameter_estimation();
    }
    throw ConfigError("unknown preset '" + name + "'");
}

RunConfig apply_ini(const RunConfig& base, const std::string& text) {
    RunConfig out = base;
    apply_tree(out, parse_ini_text(text));
    return out;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto tree = parse_ini_text(buffer.str());
    RunConfig base = preset(tree.get<std::string>("run.preset", "desk"));
    apply_tree(base, tree);
    return base;
}

RunConfig apply_overrides(const RunConfig& base,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig out = base;
    for (const auto& [path, value] : overrides) {
        const auto dot = path.find('.');
        if (dot == std::string::npos) {
            throw ConfigError("override '" + path + "' must look like section.key");
        }
        set_key(out, path.substr(0, dot), path.substr(dot + 1), trim(value));
    }
    resolve(out);
    return out;
}

std::string to_ini(const RunConfig& c) {
    pt::ptree tree;
    put_sim(tree, "sim", c.sim);
    std::vector<std::string> streams;
    for (const auto& s : c.sensors) {
        streams.push_back(std::to_string(s.sensor_id) + ":" + std::to_string(s.period) + ":" +
                          std::to_string(s.delay));
    }
    tree.put("sensors.streams", join(streams));
    tree.put("filter.particles", c.filter.n_particles);
    tree.put("filter.lags", join(c.lags));
    tree.put("filter.regime_matrix", format_matrix(c.filter.regime_matrix));
    tree.put("filter.proposal_matrix",
             c.filter.proposal_matrix ? format_matrix(*c.filter.proposal_matrix) : "none");
    tree.put("filter.ess_threshold", fmt(c.filter.ess_threshold_fraction));
    tree.put("filter.theta", join(c.filter.theta.as_array()));
    put_sim(tree, "smc2_sim", c.smc2_sim);
    tree.put("smc2.samples", c.smc2.n_samples);
    tree.put("smc2.iterations", c.smc2.n_iterations);
    tree.put("smc2.particles", c.smc2.filter.n_particles);
    tree.put("smc2.lag", c.smc2.filter.lag);
    tree.put("smc2.stepsizes", join(c.smc2.stepsizes));
    tree.put("smc2.prior_lower", join(c.smc2.prior.lower));
    tree.put("smc2.prior_upper", join(c.smc2.prior.upper));
    tree.put("smc2.ess_threshold", fmt(c.smc2.ess_threshold_fraction));
    tree.put("smc2.threads", c.smc2.threads);
    std::vector<std::string> seeds;
    for (const auto s : c.seeds) {
        seeds.push_back(std::to_string(s));
    }
    tree.put("run.seeds", join(seeds));
    tree.put("run.eval_start", c.eval_start);
    std::ostringstream out;
    pt::write_ini(out, tree);
    return out.str();
}

std::string config_hash(const RunConfig& config) {
    const std::string body = to_ini(config);
    const std::string object = "blob " + std::to_string(body.size()) + '\0' + body;
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(object.data(), object.size(), digest, &length, EVP_sha1(), nullptr) != 1) {
        throw Error("SHA-1 digest failed");
    }
    std::ostringstream hex;
    for (unsigned int k = 0; k < length; ++k) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
    }
    return hex.str();
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    for (const auto& part : split(text, ',')) {
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            const auto value = parse_int("seeds", part);
            if (value < 0) {
                throw ConfigError("seeds must be non-negative");
            }
            seeds.push_back(static_cast<std::uint64_t>(value));
            continue;
        }
        const auto first = parse_int("seeds", trim(part.substr(0, dots)));
        const auto last = parse_int("seeds", trim(part.substr(dots + 2)));
        if (first < 0 || last < first) {
            throw ConfigError("seed range '" + part + "' must be N..M with 0 <= N <= M");
        }
        for (auto s = first; s <= last; ++s) {
            seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    if (seeds.empty()) {
        throw ConfigError("empty seed list");
    }
    return seeds;
}

}  // namespace flpf
