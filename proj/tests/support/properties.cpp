#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "flpf/data_gen.hpp"
#include "flpf/filter.hpp"
#include "flpf/measurement_buffer.hpp"
#include "flpf/smc2.hpp"

namespace flpf::testing {

namespace {

using Key = std::tuple<int, int, int>;

Key key_of(const Measurement& m) { return {m.sensor, m.t_g, m.t_r}; }

RegimeMatrix random_matrix(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> stay(0.5, 0.999);
    const double a = stay(gen);
    const double b = stay(gen);
    return {a, 1.0 - a, 1.0 - b, b};
}

std::vector<SensorConfig> random_sensors(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_int_distribution<int> period(1, 4);
    std::uniform_int_distribution<int> delay(0, 6);
    std::vector<SensorConfig> sensors;
    const int n = count(gen);
    for (int k = 0; k < n; ++k) {
        sensors.push_back({k + 1, period(gen), k == 0 ? 0 : delay(gen)});
    }
    return sensors;
}

struct FilterCase {
    FilterConfig config;
    std::vector<Measurement> measurements;
    int horizon = 0;
};

FilterCase random_filter_case(std::mt19937_64& gen) {
    std::uniform_int_distribution<std::int64_t> pop(20, 3000);
    std::uniform_int_distribution<int> horizon(5, 40);
    std::uniform_int_distribution<int> lag(0, 6);
    std::uniform_int_distribution<int> particles(8, 64);
    std::uniform_real_distribution<double> rate(0.02, 0.6);
    std::bernoulli_distribution coin(0.5);

    SimConfig sim;
    sim.n_pop = pop(gen);
    sim.horizon = horizon(gen);
    sim.burn_in = 0;
    sim.initial_infected = std::max<std::int64_t>(1, sim.n_pop / 50);
    sim.theta_true = {rate(gen), 2.0 * rate(gen), rate(gen), rate(gen), rate(gen) / 10.0};
    std::uniform_int_distribution<int> day(1, sim.horizon);
    const int a = day(gen);
    const int b = day(gen);
    sim.schedule = std::vector<OutbreakInterval>{{std::min(a, b), std::max(a, b)}};
    sim.seed = gen();

    FilterCase c;
    c.horizon = sim.horizon;
    const auto truth = simulate_truth(sim);
    c.measurements = generate_measurements(truth.states, random_sensors(gen), gen());
    c.config.n_particles = particles(gen);
    c.config.lag = lag(gen);
    c.config.regime_matrix = random_matrix(gen);
    if (coin(gen)) {
        c.config.proposal_matrix = random_matrix(gen);
    }
    c.config.theta = sim.theta_true;
    c.config.n_pop = sim.n_pop;
    c.config.seed = gen();
    c.config.record_weights = true;
    return c;
}

std::string describe(int index, const FilterCase& c) {
    std::ostringstream out;
    out << "case " << index << " (N_pop=" << c.config.n_pop << ", T=" << c.horizon
        << ", lag=" << c.config.lag << ", N_x=" << c.config.n_particles << ")";
    return out.str();
}

}  // namespace

std::vector<PropertyReport> check_filter_properties(int cases, std::uint64_t seed) {
    PropertyReport conservation{"population conservation"};
    PropertyReport normalization{"weight normalization within 1e-12"};
    PropertyReport ess_bounds{"ESS within [1, N_x]"};
    PropertyReport accounting{"measurement counted net once"};
    std::mt19937_64 gen(seed);

    for (int index = 0; index < cases; ++index) {
        const FilterCase c = random_filter_case(gen);
        const MeasurementBuffer buffer(c.measurements);
        const auto n_pop = c.config.n_pop;
        bool conserved = true;
        std::string conservation_detail;
        std::map<Key, int> net;

        const auto observer = [&](const StepMeasurements& step, std::span<const Particle> ps) {
            for (const auto& day : step.current) {
                for (const auto& term : day) {
                    net[key_of(term.measurement)] += 1;
                }
            }
            for (const auto& day : step.previous) {
                for (const auto& term : day) {
                    net[key_of(term.measurement)] -= 1;
                }
            }
            for (const auto& p : ps) {
                bool ok = p.anchor_state.valid(n_pop);
                for (const auto& x : p.window.states) {
                    ok = ok && x.valid(n_pop);
                }
                if (!ok && conserved) {
                    conserved = false;
                    conservation_detail = "particle state off the simplex at t=" +
                                          std::to_string(step.t);
                }
            }
        };
        const auto out = run_filter(c.config, buffer, c.horizon, observer);

        for (const auto& d : out.days) {
            const auto& e = d.estimate;
            if (std::abs(e.s + e.e + e.i + e.r - static_cast<double>(n_pop)) > 1e-9 * n_pop) {
                if (conserved) {
                    conservation_detail = "estimate sum off at t=" + std::to_string(d.t);
                }
                conserved = false;
            }
            if (!(d.ess >= 1.0 && d.ess <= c.config.n_particles)) {
                ess_bounds.fail(describe(index, c) + ": ESS " + std::to_string(d.ess) +
                                " at t=" + std::to_string(d.t));
                break;
            }
        }
        ++ess_bounds.cases;
        ++conservation.cases;
        if (!conserved) {
            conservation.fail(describe(index, c) + ": " + conservation_detail);
        }

        ++normalization.cases;
        for (std::size_t t = 0; t < out.weight_trace.size(); ++t) {
            double total = 0.0;
            bool non_negative = true;
            for (const double w : out.weight_trace[t]) {
                total += w;
                non_negative = non_negative && w >= 0.0;
            }
            if (std::abs(total - 1.0) > 1e-12 || !non_negative) {
                std::ostringstream why;
                why << describe(index, c) << ": weights sum to " << std::setprecision(17) << total
                    << " at t=" << t + 1;
                normalization.fail(why.str());
                break;
            }
        }
        if (out.weight_trace.size() != static_cast<std::size_t>(c.horizon)) {
            normalization.fail(describe(index, c) + ": weight trace has wrong length");
        }

        ++accounting.cases;
        for (const auto& m : c.measurements) {
            const bool usable = m.t_r <= c.horizon && m.delay() <= c.config.lag;
            const int expected = usable ? 1 : 0;
            const auto it = net.find(key_of(m));
            const int got = it == net.end() ? 0 : it->second;
            if (got != expected) {
                accounting.fail(describe(index, c) + ": measurement (sensor " +
                                std::to_string(m.sensor) + ", t_g " + std::to_string(m.t_g) +
                                ", t_r " + std::to_string(m.t_r) + ") counted " +
                                std::to_string(got) + " times");
                break;
            }
        }
        if (net.size() > c.measurements.size()) {
            accounting.fail(describe(index, c) + ": unknown measurement entered the weights");
        }
    }
    return {conservation, normalization, ess_bounds, accounting};
}

PropertyReport check_systematic_offspring(int cases, std::uint64_t seed) {
    PropertyReport report{"systematic offspring within floor/ceil of N w"};
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> size(1, 200);
    std::exponential_distribution<double> draw(1.0);
    std::bernoulli_distribution zero(0.2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int index = 0; index < cases; ++index) {
        const int n = size(gen);
        std::vector<double> weights(static_cast<std::size_t>(n));
        double total = 0.0;
        for (auto& w : weights) {
            w = zero(gen) ? 0.0 : draw(gen);
            total += w;
        }
        if (total == 0.0) {
            weights[0] = 1.0;
            total = 1.0;
        }
        for (auto& w : weights) {
            w /= total;
        }
        const double offset = unit(gen) / n;
        std::vector<int> counts(static_cast<std::size_t>(n), 0);
        for (const auto a : systematic_ancestors(weights, offset)) {
            ++counts[a];
        }
        ++report.cases;
        for (int i = 0; i < n; ++i) {
            const double expected = n * weights[i];
            // Slack of 1e-9 absorbs rounding in the cumulative sums only.
            if (counts[i] < std::floor(expected - 1e-9) || counts[i] > std::ceil(expected + 1e-9)) {
                report.fail("case " + std::to_string(index) + ": index " + std::to_string(i) +
                            " got " + std::to_string(counts[i]) + " offspring for N w = " +
                            std::to_string(expected));
                break;
            }
        }
    }
    return report;
}

PropertyReport check_buffer_partition(int cases, std::uint64_t seed) {
    PropertyReport report{"measurement-buffer partition"};
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> horizon(1, 60);
    std::uniform_int_distribution<int> lag(0, 8);
    std::uniform_int_distribution<int> count(0, 80);
    std::uniform_int_distribution<int> delay(0, 10);
    std::uniform_int_distribution<int> sensor(1, 4);

    for (int index = 0; index < cases; ++index) {
        const int T = horizon(gen);
        std::uniform_int_distribution<int> day(1, T);
        std::vector<Measurement> all;
        std::set<Key> seen;
        const int n = count(gen);
        for (int k = 0; k < n; ++k) {
            Measurement m{sensor(gen), day(gen), 0, static_cast<std::int64_t>(gen() % 50)};
            m.t_r = m.t_g + delay(gen);
            if (seen.insert(key_of(m)).second) {
                all.push_back(m);
            }
        }
        std::shuffle(all.begin(), all.end(), gen);
        MeasurementBuffer buffer;
        for (const auto& m : all) {
            buffer.ingest(m);
        }
        const int l = lag(gen);
        const int last = buffer.watermark();
        ++report.cases;
        const std::string where = "case " + std::to_string(index) + " (lag " + std::to_string(l) + ")";

        std::map<Key, int> visible;
        std::size_t visible_total = 0;
        bool windows_ok = true;
        for (int t = 1; t <= last; ++t) {
            for (const auto& m : buffer.newly_visible(t, l)) {
                ++visible[key_of(m)];
                ++visible_total;
                windows_ok = windows_ok && m.t_r == t;
            }
            std::multiset<Key> expected;
            for (const auto& m : all) {
                if (m.t_g >= std::max(1, t - l) && m.t_g <= t && m.t_r <= t) {
                    expected.insert(key_of(m));
                }
            }
            std::multiset<Key> got;
            std::multiset<Key> wider;
            for (const auto& group : buffer.window(t, l)) {
                for (const auto& m : group.measurements) {
                    windows_ok = windows_ok && m.t_g == group.t_g;
                    got.insert(key_of(m));
                }
            }
            for (const auto& group : buffer.window(t, l + 1)) {
                for (const auto& m : group.measurements) {
                    wider.insert(key_of(m));
                }
            }
            windows_ok = windows_ok && got == expected &&
                         std::includes(wider.begin(), wider.end(), got.begin(), got.end());
        }
        if (!windows_ok) {
            report.fail(where + ": window contents differ from their definition");
            continue;
        }
        if (visible_total + buffer.dropped(l) != all.size()) {
            report.fail(where + ": newly visible " + std::to_string(visible_total) + " + dropped " +
                        std::to_string(buffer.dropped(l)) + " != ingested " +
                        std::to_string(all.size()));
            continue;
        }
        for (const auto& m : all) {
            const int times = visible.contains(key_of(m)) ? visible[key_of(m)] : 0;
            if (times != (m.delay() <= l ? 1 : 0)) {
                report.fail(where + ": a measurement was newly visible " + std::to_string(times) +
                            " times");
                break;
            }
        }
    }
    return report;
}

}  // namespace flpf::testing
