import math

import numpy as np
import pytest

from logitgates.numerics import LOGIT_CLAMP, log1mexp, logit_from_logp, sigmoid, softplus


def test_sigmoid_reference_values():
    assert sigmoid(0.0) == 0.5
    # 1/(1+e^-2), high-precision reference
    assert sigmoid(2.0) == pytest.approx(0.88079707797788244406, rel=1e-15)
    assert sigmoid(800.0) == 1.0
    assert sigmoid(-800.0) == 0.0


def test_sigmoid_complement_within_one_ulp():
    xs = np.linspace(-40, 40, 20001)
    err = np.abs(sigmoid(-xs) - (1.0 - sigmoid(xs)))
    assert err.max() <= np.spacing(1.0)


def test_sigmoid_monotone():
    xs = np.linspace(-50, 50, 10001)
    assert np.all(np.diff(sigmoid(xs)) >= 0)


def test_softplus_reference_values():
    assert softplus(0.0) == pytest.approx(math.log(2.0), rel=1e-15)
    assert softplus(1000.0) == 1000.0
    assert softplus(-1000.0) == 0.0


def test_softplus_antisymmetry_identity():
    # softplus(x) - softplus(-x) = x
    xs = np.linspace(-30, 30, 6001)
    assert np.abs(softplus(xs) - softplus(-xs) - xs).max() < 1e-12


def test_logit_from_logp_reference_values():
    assert logit_from_logp(math.log(0.5)) == pytest.approx(0.0, abs=1e-15)
    assert logit_from_logp(math.log(0.75)) == pytest.approx(1.0986122886681096914, rel=1e-14)


def test_logit_from_logp_saturation_is_finite():
    v = logit_from_logp(-1e-300)
    assert np.isfinite(v) and v >= 690
    assert logit_from_logp(0.0) == LOGIT_CLAMP
    assert np.isfinite(logit_from_logp(-1e6))


def test_logit_from_logp_rejects_positive():
    with pytest.raises(ValueError):
        logit_from_logp(0.5)


def test_sigmoid_logit_round_trip():
    ps = np.concatenate([
        np.geomspace(1e-12, 0.5, 2000),
        1.0 - np.geomspace(1e-12, 0.5, 2000),
    ])
    back = sigmoid(logit_from_logp(np.log(ps)))
    assert np.abs(back / ps - 1.0).max() < 1e-9


def test_log1mexp_matches_direct():
    # away from 0 the plain formula is well-conditioned and serves as oracle
    us = -np.geomspace(1e-2, 50, 4000)
    direct = np.log1p(-np.exp(us))
    assert np.abs(log1mexp(us) - direct).max() < 1e-12


def test_log1mexp_near_zero():
    # for u -> 0-, log(1 - e^u) ~ log(-u); the naive path loses all digits here
    us = -np.geomspace(1e-300, 1e-8, 500)
    assert np.abs(log1mexp(us) - np.log(-us)).max() < 1e-7


def test_total_on_finite_inputs_no_nan():
    xs = np.array([-1e12, -1e3, -1.0, -1e-12, 0.0, 1e-12, 1.0, 1e3, 1e12])
    for fn in (sigmoid, softplus):
        assert np.all(np.isfinite(fn(xs)))
    assert np.all(np.isfinite(logit_from_logp(-np.abs(xs))))
