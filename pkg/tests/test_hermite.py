import numpy as np
import pytest
from numpy.testing import assert_allclose

from hrlab.hermite import (
    asymptotic_regime,
    eigenvalue,
    hermite_bank,
    hermite_eval,
    hermite_function,
    hermite_tensor_eval,
    turning_phase_s,
)

# h_10(3/2) from the Rodrigues formula, evaluated symbolically
H10_AT_1_5 = -0.3416352705101297709074002


def test_rodrigues_value():
    assert_allclose(hermite_function(10, 1.5), H10_AT_1_5, rtol=1e-13)


def test_h0_at_origin():
    assert_allclose(hermite_function(0, 0.0), np.pi ** -0.25, rtol=1e-15)


def test_parity():
    t = np.linspace(0.1, 5, 50)
    vals = hermite_eval(30, t)
    neg = hermite_eval(30, -t)
    for k in range(31):
        assert_allclose(neg[k], (-1) ** k * vals[k], atol=1e-15)


def test_orthonormality_gauss_hermite():
    # Gauss-Hermite with the weight removed is exact for h_j h_k, j + k < 2n
    n = 160
    x, w = np.polynomial.hermite.hermgauss(n)
    vals = hermite_eval(100, x)
    G = (vals * (w * np.exp(x * x))) @ vals.T
    assert np.max(np.abs(G - np.eye(101))) < 1e-10


def test_large_argument_underflows_cleanly():
    bank = hermite_bank(50, np.array([60.0, 200.0]))
    logs = bank.log_abs(50)
    assert np.all(np.isfinite(logs))
    # log h_50(200) is dominated by -t^2/2
    assert logs[1] < -19000
    assert np.all(np.abs(hermite_eval(50, [60.0, 200.0])) < 1e-300)


def test_high_degree_is_finite_and_bounded():
    t = np.linspace(-50, 50, 2001)
    v = hermite_function(1000, t)
    assert np.all(np.isfinite(v))
    # |h_k| <= pi^{-1/4} for every k
    assert np.max(np.abs(v)) <= np.pi ** -0.25


def test_derivative_ladder():
    t = np.linspace(-4, 4, 41)
    bank = hermite_bank(12, t)
    h = 1e-6
    for k in (0, 3, 11):
        fd = (hermite_function(k, t + h) - hermite_function(k, t - h)) / (2 * h)
        assert_allclose(bank.derivative(k), fd, atol=1e-8)


def test_tensor_eval_and_eigenvalue():
    x = np.array([[0.3, -0.7], [1.1, 0.2]])
    got = hermite_tensor_eval((2, 3), x)
    want = hermite_function(2, x[:, 0]) * hermite_function(3, x[:, 1])
    assert_allclose(got, want, rtol=1e-14)
    assert eigenvalue((2, 3)) == 12


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        asymptotic_regime(-1, 0.0)


def test_regime_tags():
    k = 200
    mu = np.sqrt(2 * k + 1)
    reg = asymptotic_regime(k, [0.0, mu, mu + 3])
    assert list(reg.tag) == ["oscillatory", "transition", "decay"]


def test_envelope_inside_and_at_turning_point():
    k = 400
    mu = np.sqrt(2 * k + 1)
    t = np.linspace(0, mu - 3 * mu ** (-1 / 3), 4000)
    reg = asymptotic_regime(k, t)
    ratio = np.abs(hermite_function(k, t)) / reg.magnitude
    # WKB envelope is sqrt(2/pi) |mu^2 - t^2|^{-1/4}
    assert ratio.max() < 1.1 * np.sqrt(2 / np.pi)
    peak = np.max(np.abs(hermite_function(k, np.linspace(mu - 1, mu + 1, 2001))))
    assert 0.5 < peak * mu ** (1 / 6) < 1.5


def test_turning_phase_derivative():
    mu, t, h = 3.0, 1.2, 1e-6
    ds = (turning_phase_s(mu, t + h, "minus") - turning_phase_s(mu, t - h, "minus")) / (2 * h)
    assert_allclose(ds, np.sqrt(mu * mu - t * t), rtol=1e-8)
    t = 4.5
    ds = (turning_phase_s(mu, t + h, "plus") - turning_phase_s(mu, t - h, "plus")) / (2 * h)
    assert_allclose(ds, np.sqrt(t * t - mu * mu), rtol=1e-8)
    with pytest.raises(ValueError):
        turning_phase_s(mu, 4.0, "minus")
