"""End-to-end smoke tests for the python bindings."""

import numpy as np
import pytest

import satpower as sp


@pytest.fixture(scope="module")
def params():
    return sp.SystemParams()


def test_coupling_pipeline_is_seeded(params):
    mu1 = sp.simulate_coupling(params, seed=7, precoder="rzf")
    mu2 = sp.simulate_coupling(params, seed=7, precoder="rzf")
    mu3 = sp.simulate_coupling(params, seed=8, precoder="rzf")
    assert mu1.shape == (7, 7)
    np.testing.assert_array_equal(mu1, mu2)
    assert not np.array_equal(mu1, mu3)
    assert np.all(mu1 >= 0.0)
    assert np.all(np.diag(mu1) > 0.0)


def test_channel_dict_is_consistent(params):
    out = sp.simulate_channel(params, seed=11, precoder="zf")
    amp, phase, h = out["amplitude"], out["phase_rad"], out["h"]
    assert amp.shape == (7, 7) and h.shape == (7, 7)
    np.testing.assert_allclose(np.abs(h), amp, rtol=0, atol=1e-14)
    assert np.all((phase >= 0.0) & (phase < 2.0 * np.pi))
    np.testing.assert_array_equal(out["features"], amp.T.reshape(-1))
    # ZF decouples the users: off-diagonal leakage is numerically zero
    mu = out["mu"]
    off = mu - np.diag(np.diag(mu))
    assert np.max(off) <= 1e-10 * np.min(np.diag(mu))


def test_feasibility_matches_hand_instance():
    mu = np.array([[1.0, 0.1], [0.1, 1.0]])
    xi = np.array([500.0, 500.0])
    rep = sp.analyze_feasibility(mu, xi, bandwidth_mhz=500.0, noise_w=1.0, max_power_w=10.0)
    assert rep["feasible"]
    assert rep["spectral_radius"] == pytest.approx(0.55, abs=1e-12)
    np.testing.assert_allclose(rep["minimal_powers_w"], [10.0 / 9.0, 10.0 / 9.0], atol=1e-12)
    assert rep["required_power_w"] == pytest.approx(20.0 / 9.0, abs=1e-12)
    assert rep["power_lower_bound_w"] <= rep["required_power_w"]

    rep2 = sp.analyze_feasibility(mu, xi, 500.0, 1.0, max_power_w=1.0)
    assert not rep2["feasible"]


def test_waterfill_kkt_point():
    p = sp.waterfill(np.array([4.0, 1.0]), 5.0)
    np.testing.assert_allclose(p, [2.875, 2.125], atol=1e-12)
    assert p.sum() == pytest.approx(5.0, abs=1e-12)
    with pytest.raises(ValueError):
        sp.waterfill(np.array([4.0, 1.0]), -1.0)


def test_allocate_methods_and_rates(params):
    mu = sp.simulate_coupling(params, seed=21, precoder="rzf")
    xi = np.full(7, 650.0)
    joint = sp.allocate(mu, xi, params.bandwidth_mhz, params.noise_power_w,
                        params.max_power_w, method="jointopt")
    sumopt = sp.allocate(mu, xi, params.bandwidth_mhz, params.noise_power_w,
                         params.max_power_w, method="sumopt")
    assert joint["method"] == "JointOpt"
    assert len(joint["powers_w"]) == 7
    assert joint["powers_w"].sum() <= params.max_power_w * (1 + 1e-9)
    for k in joint["satisfied"]:
        assert joint["rates_mbps"][k] >= 650.0 - 1e-6
    assert len(joint["satisfied"]) >= len(sumopt["satisfied"])
    assert sumopt["rates_mbps"].sum() >= joint["rates_mbps"].sum() * (1 - 1e-12)
    # the trace carries the admission-set expansion
    ns = [t[0] for t in joint["trace"]]
    assert ns == sorted(ns)
    rates = sp.all_rates_mbps(joint["powers_w"], mu, params.noise_power_w,
                              params.bandwidth_mhz)
    np.testing.assert_allclose(rates, joint["rates_mbps"], atol=1e-9)


def test_run_trial_roundtrip(params):
    rec = sp.run_trial(params, seed=5, method="jointopt", precoder="rzf", xi_mbps=500.0)
    assert not rec["failed"]
    assert 0 <= rec["q_size"] <= 7
    assert rec["congested"] == (rec["q_size"] < 7)
    assert rec["sum_mbps"] > 0.0


def test_error_mapping(params):
    bad = sp.SystemParams()
    bad.n_users = 9
    with pytest.raises(ValueError):
        bad.validate()
    with pytest.raises(OSError):
        sp.load_params("/nonexistent/params.ini")
    with pytest.raises(OSError):
        sp.load_model("/nonexistent/model.txt")


def test_params_ini_roundtrip(tmp_path):
    mine = sp.SystemParams()
    mine.n_users = 5
    path = str(tmp_path / "params.ini")
    sp.save_params(mine, path)
    back = sp.load_params(path)
    assert back.n_users == 5
    assert back.max_power_w == mine.max_power_w
