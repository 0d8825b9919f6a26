import pytest

import flpf


def test_presets_and_hash():
    assert "desk" in flpf.preset_names()
    text = flpf.config_ini("desk")
    assert "[filter]" in text
    assert len(flpf.config_hash("desk")) == 40
    assert flpf.config_hash("desk") != flpf.config_hash("desk", {"filter.particles": "64"})


def test_simulate_filter_evaluate():
    overrides = {"sim.horizon": "200", "sim.burn_in": "100", "run.eval_start": "100",
                 "filter.particles": "64"}
    data = flpf.simulate(seed=3, overrides=overrides)
    assert len(data["i"]) == 201
    assert all(s + e + i + r == 10000 for s, e, i, r in
               zip(data["s"], data["e"], data["i"], data["r"]))
    assert len(data["outbreaks"]) == 1
    daily = [m for m in data["measurements"] if m.t_r == m.t_g]
    assert len(daily) == 200

    out = flpf.run_filter(data["measurements"], horizon=200, lag=3, seed=3, overrides=overrides)
    assert out["t"] == list(range(1, 201))
    assert all(0.0 <= p <= 1.0 for p in out["outbreak_prob"])
    assert out["dropped"] == 0

    again = flpf.run_filter(data["measurements"], horizon=200, lag=3, seed=3, overrides=overrides)
    assert again["log_likelihood"] == out["log_likelihood"]

    scores = flpf.evaluate(data["regime"], [0.0] + out["outbreak_prob"], data["outbreaks"],
                           eval_start=100)
    assert 0.0 <= scores["mse"] <= 1.0
    assert 0.0 <= scores["auroc"] <= 1.0


def test_small_smc_run():
    overrides = {"smc2_sim.horizon": "60", "smc2_sim.burn_in": "0", "smc2_sim.outbreaks": "20-40",
                 "smc2.samples": "4", "smc2.iterations": "2", "smc2.particles": "32",
                 "smc2.threads": "1"}
    data = flpf.simulate(seed=1, scenario="infer", overrides=overrides)
    result = flpf.run_smc2(data["measurements"], seed=1, overrides=overrides)
    assert len(result["ess"]) == 2
    assert abs(sum(result["recycling_weights"]) - 1.0) < 1e-12
    assert len(result["final_samples"]) == 4
    assert result["recycled_mean"].beta0 > 0.0


def test_errors_are_typed():
    with pytest.raises(flpf.ConfigError):
        flpf.config_ini("no-such-preset")
    with pytest.raises(flpf.FlpfError):
        flpf.Theta(-1.0, 0.3, 0.05, 0.08, 0.005)
    with pytest.raises(flpf.InputError):
        flpf.run_filter([flpf.Measurement(1, 3, 2, 5)], horizon=5)
