#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flpf/config.hpp"
#include "flpf/errors.hpp"
#include "flpf/filter.hpp"
#include "flpf/measurement_buffer.hpp"
#include "flpf/metrics.hpp"
#include "flpf/pipeline.hpp"
#include "flpf/smc2.hpp"

namespace py = pybind11;
using namespace flpf;

namespace {

using Overrides = std::map<std::string, std::string>;

RunConfig make_config(const std::string& preset_name, const Overrides& overrides) {
    std::vector<std::pair<std::string, std::string>> pairs(overrides.begin(), overrides.end());
    auto config = apply_overrides(preset(preset_name), pairs);
    config.validate();
    return config;
}

py::dict truth_dict(const Truth& truth) {
    std::vector<std::int64_t> s, e, i, r;
    std::vector<int> regime;
    for (std::size_t t = 0; t < truth.states.size(); ++t) {
        s.push_back(truth.states[t].s);
        e.push_back(truth.states[t].e);
        i.push_back(truth.states[t].i);
        r.push_back(truth.states[t].r);
        regime.push_back(to_int(truth.regimes[t]));
    }
    std::vector<std::pair<int, int>> outbreaks;
    for (const auto& o : truth.outbreaks) {
        outbreaks.emplace_back(o.start, o.end);
    }
    py::dict d;
    d["s"] = s;
    d["e"] = e;
    d["i"] = i;
    d["r"] = r;
    d["regime"] = regime;
    d["outbreaks"] = outbreaks;
    return d;
}

py::dict filter_dict(const FilterOutput& out) {
    std::vector<int> t;
    std::vector<double> s, e, i, r, prob, revised, ess;
    std::vector<bool> resampled;
    for (const auto& d : out.days) {
        t.push_back(d.t);
        s.push_back(d.estimate.s);
        e.push_back(d.estimate.e);
        i.push_back(d.estimate.i);
        r.push_back(d.estimate.r);
        prob.push_back(d.estimate.outbreak_prob);
        revised.push_back(d.outbreak_prob_revised);
        ess.push_back(d.ess);
        resampled.push_back(d.resampled);
    }
    py::dict d;
    d["t"] = t;
    d["s"] = s;
    d["e"] = e;
    d["i"] = i;
    d["r"] = r;
    d["outbreak_prob"] = prob;
    d["outbreak_prob_revised"] = revised;
    d["ess"] = ess;
    d["resampled"] = resampled;
    d["log_likelihood"] = out.log_likelihood;
    d["dropped"] = out.dropped;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fixed-lag particle filtering for regime-switching SEIRS models";

    static py::exception<Error> base(m, "FlpfError");
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<Theta>(m, "Theta")
        .def(py::init<>())
        .def(py::init([](double beta0, double beta1, double gamma, double sigma, double xi) {
                 Theta t{beta0, beta1, gamma, sigma, xi};
                 t.validate();
                 return t;
             }),
             py::arg("beta0"), py::arg("beta1"), py::arg("gamma"), py::arg("sigma"), py::arg("xi"))
        .def_readwrite("beta0", &Theta::beta0)
        .def_readwrite("beta1", &Theta::beta1)
        .def_readwrite("gamma", &Theta::gamma)
        .def_readwrite("sigma", &Theta::sigma)
        .def_readwrite("xi", &Theta::xi)
        .def("as_list", [](const Theta& t) {
            const auto a = t.as_array();
            return std::vector<double>(a.begin(), a.end());
        })
        .def("__repr__", [](const Theta& t) {
            return "Theta(" + std::to_string(t.beta0) + ", " + std::to_string(t.beta1) + ", " +
                   std::to_string(t.gamma) + ", " + std::to_string(t.sigma) + ", " +
                   std::to_string(t.xi) + ")";
        });

    py::class_<Measurement>(m, "Measurement")
        .def(py::init<int, int, int, std::int64_t>(), py::arg("sensor"), py::arg("t_g"),
             py::arg("t_r"), py::arg("y"))
        .def_readwrite("sensor", &Measurement::sensor)
        .def_readwrite("t_g", &Measurement::t_g)
        .def_readwrite("t_r", &Measurement::t_r)
        .def_readwrite("y", &Measurement::y)
        .def("__eq__", [](const Measurement& a, const Measurement& b) { return a == b; })
        .def("__repr__", [](const Measurement& x) {
            return "Measurement(sensor=" + std::to_string(x.sensor) + ", t_g=" +
                   std::to_string(x.t_g) + ", t_r=" + std::to_string(x.t_r) + ", y=" +
                   std::to_string(x.y) + ")";
        });

    m.def("preset_names", &preset_names);
    m.def(
        "config_ini",
        [](const std::string& name, const Overrides& overrides) {
            return to_ini(make_config(name, overrides));
        },
        py::arg("preset") = "desk", py::arg("overrides") = Overrides{},
        "Canonical INI text of a preset with section.key overrides applied.");
    m.def(
        "config_hash",
        [](const std::string& name, const Overrides& overrides) {
            return config_hash(make_config(name, overrides));
        },
        py::arg("preset") = "desk", py::arg("overrides") = Overrides{});

    m.def(
        "simulate",
        [](std::uint64_t seed, const std::string& name, const std::string& scenario,
           const Overrides& overrides) {
            const auto config = make_config(name, overrides);
            if (scenario != "state" && scenario != "infer") {
                throw ConfigError("scenario must be 'state' or 'infer'");
            }
            const auto& sim = scenario == "state" ? config.sim : config.smc2_sim;
            const auto data = simulate_dataset(sim, config.sensors, seed);
            py::dict d = truth_dict(data.truth);
            d["measurements"] = data.measurements;
            return d;
        },
        py::arg("seed") = 1, py::arg("preset") = "desk", py::arg("scenario") = "state",
        py::arg("overrides") = Overrides{},
        "Simulates truth and two-stream measurements for one seed.");

    m.def(
        "run_filter",
        [](const std::vector<Measurement>& measurements, int horizon, int lag,
           std::uint64_t seed, const std::string& name, const Overrides& overrides) {
            const auto config = make_config(name, overrides);
            FilterConfig filter = config.filter;
            filter.lag = lag;
            filter.seed = seed;
            const MeasurementBuffer buffer(measurements);
            FilterOutput out;
            {
                py::gil_scoped_release release;
                out = run_filter(filter, buffer, horizon);
            }
            return filter_dict(out);
        },
        py::arg("measurements"), py::arg("horizon"), py::arg("lag") = 0, py::arg("seed") = 1,
        py::arg("preset") = "desk", py::arg("overrides") = Overrides{},
        "Runs the fixed-lag filter; returns per-day estimates as lists.");

    m.def(
        "evaluate",
        [](const std::vector<int>& regimes, const std::vector<double>& outbreak_prob,
           const std::vector<std::pair<int, int>>& outbreaks, int eval_start) {
            std::vector<Regime> truth;
            for (const int v : regimes) {
                truth.push_back(regime_from_int(v));
            }
            std::vector<OutbreakInterval> intervals;
            for (const auto& [a, b] : outbreaks) {
                intervals.push_back({a, b});
            }
            const auto series = make_eval_series(truth, outbreak_prob, eval_start);
            const auto grid = threshold_grid(series.p_est);
            py::dict d;
            d["mse"] = mse(series);
            d["auroc"] = roc(series, grid).area;
            d["auamoc"] = amoc(series, grid, intervals).area;
            return d;
        },
        py::arg("regimes"), py::arg("outbreak_prob"), py::arg("outbreaks"),
        py::arg("eval_start") = 430,
        "MSE, AUROC and AUAMOC on days >= eval_start. Both sequences are indexed by day "
        "starting at 0.");

    m.def(
        "run_smc2",
        [](const std::vector<Measurement>& measurements, std::uint64_t seed, int lag,
           const std::string& name, const Overrides& overrides) {
            const auto config = make_config(name, overrides);
            Smc2Config smc = config.smc2;
            smc.seed = seed;
            smc.filter.lag = lag;
            const MeasurementBuffer buffer(measurements);
            Smc2Result result;
            {
                py::gil_scoped_release release;
                result = run_smc2(smc, buffer);
            }
            std::vector<double> ess;
            std::vector<std::vector<double>> means;
            for (const auto& record : result.history) {
                ess.push_back(record.ess);
                const auto a = record.mean.as_array();
                means.emplace_back(a.begin(), a.end());
            }
            std::vector<std::vector<double>> samples;
            for (const auto& s : result.final_iteration().samples) {
                const auto a = s.theta.as_array();
                samples.emplace_back(a.begin(), a.end());
            }
            py::dict d;
            d["ess"] = ess;
            d["iteration_means"] = means;
            d["recycled_mean"] = result.estimate.mean;
            d["recycling_weights"] = result.estimate.recycling_weights;
            d["final_samples"] = samples;
            d["final_weights"] = result.final_iteration().weights;
            return d;
        },
        py::arg("measurements"), py::arg("seed") = 1, py::arg("lag") = 0,
        py::arg("preset") = "desk", py::arg("overrides") = Overrides{},
        "SMC parameter estimation with an inner fixed-lag filter per sample.");
}
