import math
import time
from fractions import Fraction

import numpy as np
import pytest

from hrlab.experiments import (
    INF,
    build_counterexample,
    counterexample_exponent,
    delta_exponent,
    exponent_table,
    gamma_exponent,
    index_window,
    kernel_sup,
    kernel_sup_scan,
    lambda_ladder,
    map_lambdas,
    nonstationary_decay_check,
    operator_norm_estimate,
    p0_exponent,
    projection_ratio,
    snap_lambda,
)
from hrlab.oscillatory import WindowFunction
from hrlab.phase_hermite import critical_times
from hrlab.projection import hermite_projection_kernel


def test_exponent_spot_values():
    assert p0_exponent(2) == 4
    assert p0_exponent(3) == Fraction(10, 3)
    assert p0_exponent(4) == Fraction(14, 5)
    assert p0_exponent(1) == INF
    assert gamma_exponent(1, 4) == 0
    assert delta_exponent(2, INF) == Fraction(1, 2)
    assert delta_exponent(1, 2) == 0
    assert counterexample_exponent(1, 2, INF) == Fraction(-1, 12)
    assert counterexample_exponent(1, INF, INF) == Fraction(1, 6)
    t = exponent_table(3, "inf", "inf")
    assert t.p == INF and t.delta_dp == 1 and t.gamma_dp == Fraction(1, 2)


def test_gamma_threshold_identity_in_one_dimension():
    for n in range(4, 60):
        for p in (Fraction(n), Fraction(2 * n + 1, 2)):
            assert gamma_exponent(1, p) == Fraction(2, 3) * abs(1 / p - Fraction(1, 2)) - Fraction(1, 6)
            assert gamma_exponent(1, p) >= delta_exponent(1, p)


def test_counterexample_exponent_decreases_in_inverse_q():
    for d in (1, 2, 3):
        vals = [counterexample_exponent(d, 2, q) for q in (INF, 8, 4, 2, 1)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_exponent_rejects_small_p():
    with pytest.raises(ValueError):
        delta_exponent(1, Fraction(1, 2))
    with pytest.raises(ValueError):
        exponent_table(2, 0.5)


def test_snap_and_ladder():
    assert snap_lambda(100, 1) == 101
    assert snap_lambda(101, 1) == 101
    assert snap_lambda(0.2, 2) == 2
    lad = lambda_ladder(101, 4001, 16, 1)
    assert lad[0] >= 101 and lad[-1] >= 4001 and all(l % 2 == 1 for l in lad)
    assert lad == sorted(set(lad))
    assert all(l % 4 == 3 for l in lambda_ladder(101, 4001, 16, 1, residue=3))


def test_map_lambdas_keeps_order():
    lams = list(range(1, 40, 2))
    slow_first = lambda l: (time.sleep(0.001 * (40 - l)), l * l)[1]  # noqa: E731
    assert map_lambdas(slow_first, lams, workers=4) == [l * l for l in lams]
    assert map_lambdas(slow_first, lams, workers=1) == [l * l for l in lams]


def test_counterexample_one_dimension():
    for lam in (101, 401, 1601):
        b = build_counterexample(lam, 1)
        k = (lam - 1) // 2
        assert b.J == ((k,),)
        s6 = lam ** (-1 / 6)
        assert abs(b.x0[0] - b.x_star[0]) <= 100 * s6
        assert math.sqrt(lam) - 20 * s6 <= b.x_tilde[0] <= math.sqrt(lam) - 10 * s6
        # turning-point size of h_k^2 is lam^{-1/6}
        assert 0.1 < b.j_mass * lam ** (1 / 6) < 0.2
        assert b.in_Q(np.array([[0.75 * b.q_x1[1]]]))[0]
        assert not b.in_Q(np.array([[0.5 * b.q_x1[0]]]))[0]


def test_counterexample_needs_a_window():
    assert index_window(5, 3) == ()
    with pytest.raises(ValueError):
        build_counterexample(5, 3)


def test_index_window_counts_two_dimensions():
    counts = [len(index_window(lam, 2)) for lam in (100, 400, 1000, 3000)]
    assert counts == [2, 4, 5, 7]
    k = (400 - 2) // 2
    assert all(sum(a) == k for a in index_window(400, 2))


def test_counterexample_two_dimensions():
    masses = []
    for lam in (102, 402, 1002):
        b = build_counterexample(lam, 2)
        masses.append(b.j_mass)
        x = np.array([[0.15 * math.sqrt(lam) / 100 + b.q_x1[0], 0.3]])
        want = hermite_projection_kernel(lam, 2, b.x0[None, :], x)
        assert abs(b.f_lambda(x)[0] - want[0]) < 1e-14
    # the J mass stays of unit order (no lam-power loss in d = 2)
    assert max(masses) / min(masses) < 1.5


@pytest.mark.parametrize("lam,d", [(101, 1), (202, 2), (402, 2)])
def test_projection_ratio_norms_agree(lam, d):
    r = projection_ratio(build_counterexample(lam, d), 2, INF)
    assert not r["flags"]
    assert abs(r["f2_grid"] - r["f2_gram"]) < 0.01 * r["f2_gram"]
    assert 0 < r["ratio"] < 1


def test_kernel_sup_regions():
    lam = 101
    v = kernel_sup(lam, 1, "fixed_box")
    r = np.linspace(0, 2, 4001)
    grid = hermite_projection_kernel(lam, 1, r[:, None], r[:, None])
    assert v >= grid.max() - 1e-15 and v < grid.max() * 1.001
    assert kernel_sup(lam, 1, "turning_annulus") > v
    with pytest.raises(ValueError):
        kernel_sup(lam, 1, "ball")
    with pytest.raises(ValueError):
        kernel_sup_scan(1, [101, 202], "fixed_box")


def test_kernel_sup_annulus_slope_one_dimension():
    res = kernel_sup_scan(1, lambda_ladder(201, 4001, 6, 1), "turning_annulus")
    assert res.passed, res.fit.slope


def separated_window(x, y, gap):
    sc, ss = critical_times(np.array(x), np.array(y))
    return WindowFunction((sc + ss) / 2, (ss - sc) / 2 - gap)


def test_nonstationary_decay_is_fast():
    w = separated_window([0.0], [0.3], 0.3)
    rep = nonstationary_decay_check(w, [0.0], [0.3], [25, 50, 100, 200, 400, 800, 1600])
    assert rep.verified(3)
    assert min(rep.values) < 1e-12


def test_window_on_critical_time():
    x, y = [0.0], [0.3]
    sc, _ = critical_times(np.array(x), np.array(y))
    w = WindowFunction(sc, 0.3)
    with pytest.raises(ValueError):
        nonstationary_decay_check(w, x, y, [50, 100])
    rep = nonstationary_decay_check(w, x, y, [50, 100, 200, 400, 800, 1600],
                                    require_separation=False)
    assert not rep.verified(3)
    assert abs(rep.order - 0.5) < 0.1


def test_empty_window_decay():
    rep = nonstationary_decay_check(WindowFunction(1.0, 0.0), [0.0], [0.3], [10, 20])
    assert rep.order == INF and rep.values == (0.0, 0.0)


def test_operator_norm_identity_and_rank_one():
    box = [(-1.0, 1.0)]
    assert operator_norm_estimate(np.eye(64), box, box) == pytest.approx(1.0, rel=1e-10)
    u = lambda x: np.exp(-x[..., 0] ** 2)  # noqa: E731
    v = lambda y: y[..., 0] * np.exp(-y[..., 0] ** 2 / 2)  # noqa: E731
    box = [(-6.0, 6.0)]
    est = operator_norm_estimate(lambda x, y: u(x) * v(y), box, box, grid=200)
    exact = math.sqrt(math.sqrt(math.pi / 2)) * math.sqrt(math.sqrt(math.pi) / 2)
    assert est == pytest.approx(exact, rel=1e-3)
    assert est <= exact * (1 + 1e-3)


def test_operator_norm_of_projection():
    box = [(-8.0, 8.0)]
    K = lambda x, y: hermite_projection_kernel(9, 1, x, y)  # noqa: E731
    assert operator_norm_estimate(K, box, box, grid=256) == pytest.approx(1.0, rel=1e-6)
