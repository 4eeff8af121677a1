import math
from types import SimpleNamespace

import numpy as np
import pytest

from oubreak import basis as bm
from oubreak.exceptions import ValidationError
from oubreak.existence import (
    DEFAULT_PENALTY,
    PENALTIES,
    Penalty,
    decide,
    empirical_power_and_level,
    ic_test,
    parse_penalty,
)
from oubreak.simulate import DriftParams, SegmentedModel, scenario_basis, scenario_model, simulate_euler

DT = 1 / 252


class TestPenalty:
    def test_values(self):
        assert PENALTIES["p1-logT"].value(1, 10.0, DT) == pytest.approx(2 * math.log(10))
        assert PENALTIES["p2-logTdt"].value(2, 4.0, 4 / 1008) == pytest.approx(4 * math.log(1008))

    def test_default(self):
        assert DEFAULT_PENALTY == Penalty(1, "logTdt")

    def test_nonpositive_horizon(self):
        with pytest.raises(ValidationError):
            PENALTIES["p1-logT"].value(1, 0.5, DT)

    def test_parse(self):
        assert parse_penalty("p2-logT") is PENALTIES["p2-logT"]
        with pytest.raises(ValidationError):
            parse_penalty("aic")
        with pytest.raises(ValidationError):
            Penalty(3, "logT")


def test_decide_tie_declares_break():
    # equal ICs when loglik1 - loglik0 equals half the penalty
    pen = PENALTIES["p1-logT"].value(1, math.e, DT)
    ic0, ic1, m = decide(0.0, pen / 2, 1, math.e, DT, PENALTIES["p1-logT"])
    assert ic0 == ic1 and m == 1


def test_noiseless_no_break_has_no_detection():
    model = SegmentedModel.no_break(DriftParams((2.5,), 1.0), 0.0)
    path = simulate_euler(model, bm.constant(), 5, DT, x0=0.05)
    res = ic_test(path, bm.constant(), sigma=0.2)
    assert res.m_hat == 0
    pen = DEFAULT_PENALTY.value(1, 5, DT)
    assert res.ic1 - res.ic0 == pytest.approx(pen, rel=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_nested_loglik_and_finite(seed):
    b = scenario_basis(2)
    path = simulate_euler(scenario_model(2, with_break=seed % 2 == 0), b, 5, DT, seed=seed)
    res = ic_test(path, b)
    assert res.loglik1 >= res.loglik0 - 1e-9 * abs(res.loglik0)
    assert np.isfinite([res.ic0, res.ic1]).all()
    assert res.m_hat == int(res.ic0 >= res.ic1)
    assert res.fit1.method == "mll"


@pytest.mark.parametrize("seed", range(6))
def test_monotone_penalty_effect(seed):
    b = bm.constant()
    path = simulate_euler(scenario_model(1, with_break=False), b, 5, DT, seed=seed)
    m = {name: ic_test(path, b, pen).m_hat for name, pen in PENALTIES.items()}
    assert m["p2-logT"] <= m["p1-logT"]
    assert m["p2-logTdt"] <= m["p1-logTdt"]
    assert m["p1-logTdt"] <= m["p1-logT"]
    assert m["p2-logTdt"] <= m["p2-logT"]


def test_strong_break_detected():
    b = bm.constant()
    path = simulate_euler(scenario_model(1), b, 20, DT, seed=1)
    res = ic_test(path, b, "p1-logT")
    assert res.m_hat == 1
    assert res.fit1.s_hat == pytest.approx(0.5, abs=0.05)


def _config(**kw):
    base = dict(scenario=2, with_break=True, T=5, dt=DT, x0=0.05, min_frac=0.05)
    base.update(kw)
    return SimpleNamespace(**base)


class TestEmpirical:
    def test_zero_iterations(self):
        with pytest.raises(ValidationError):
            empirical_power_and_level(_config(), "p1-logT", 0, seed=1)

    def test_power_keys(self):
        out = empirical_power_and_level(_config(), "p2-logTdt", 5, seed=1)
        assert out["power"] == 100.0 and out["level"] is None
        assert out["failures"] == 0 and out["iterations"] == 5

    def test_level_keys(self):
        out = empirical_power_and_level(_config(with_break=False), "p1-logTdt", 5, seed=1)
        assert out["power"] is None
        assert 0.0 <= out["level"] <= 100.0
