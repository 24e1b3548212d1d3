import math

import pytest

import qfconv


@pytest.fixture(scope="module")
def cfg():
    return qfconv.reference_config()


def test_cascade(cfg):
    e = qfconv.efficiencies(cfg)
    assert e["external_max"] == pytest.approx(0.2501, abs=1e-4)
    assert e["total_max"] == pytest.approx(2.573e-3, rel=1e-3)


def test_optimal_pump(cfg):
    assert qfconv.optimal_pump_mw(cfg) == pytest.approx(1e3 * (math.pi / 2) ** 2 / (0.72 * 9))


def test_config_round_trip(cfg):
    assert cfg.serialize() == qfconv.reference_config_text()
    assert qfconv.parse_config(cfg.serialize()).hash() == cfg.hash()


def test_config_override_and_validation(cfg):
    c = qfconv.parse_config(cfg.serialize())
    c.gate_ns = 37.0
    with pytest.raises(ValueError):
        c.validate()
    with pytest.raises(qfconv.ValidationError):
        qfconv.parse_config("[pump]\npump_power = 3\n")


def test_beta():
    assert qfconv.beta_factor(30.0, 20.0) == pytest.approx(math.erf(20 / (2 * math.sqrt(2) * 30 / 2.3548200450309493)))


def test_simulate_matches_model(cfg):
    c = qfconv.parse_config(cfg.serialize())
    c.shots = 200000
    r = qfconv.simulate(c)
    m = qfconv.detection_probabilities(c, c.mu_in, c.pump_mw)
    s = r["signal_on"]
    assert abs(s["p"] - m["p_signal"]) < 4 * s["p_sigma"]


def test_fit_conversion_noiseless():
    pumps = [30.0 * i for i in range(1, 16)]
    eta = [0.25 * math.sin(3 * math.sqrt(p * 1e-3 * 0.72)) ** 2 for p in pumps]
    fit = qfconv.fit_conversion(pumps, eta)
    assert fit["derived"]["eta_n_L2"]["value"] == pytest.approx(6.48, rel=1e-6)


def test_extract_mu1_and_errors():
    mus = [0.2 * i for i in range(1, 20)]
    assert qfconv.extract_mu1(mus, [m / 0.7 for m in mus])["value"] == pytest.approx(0.7)
    with pytest.raises(qfconv.NumericalError):
        qfconv.extract_mu1([2, 3, 4, 5], [m / 0.7 for m in [2, 3, 4, 5]])


def test_timebin():
    assert qfconv.visibility_model(25.0, 0.7) == pytest.approx(25 / 25.35)
    assert qfconv.fidelity_from_visibility(0.9) == pytest.approx(0.95)
    assert qfconv.classical_fidelity_bound(6.1, 0.25) == pytest.approx(0.872386, abs=1e-6)
    early, central, late = qfconv.slot_statistics(0.0, math.pi)
    assert (early, late) == pytest.approx((0.25, 0.25))
    assert central == pytest.approx(0.0, abs=1e-15)


def test_preset(cfg):
    tables, scalars = qfconv.run_preset("fig4a", cfg)
    assert tables["fig4a"].splitlines()[0] == "bandwidth_nm,bandwidth_GHz,mu1"
    assert scalars


def test_cli(tmp_path):
    code, out, err = qfconv.run_cli(["report", "--quick", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "report.csv").exists()
    code, _, _ = qfconv.run_cli(["nonsense"])
    assert code == 1
