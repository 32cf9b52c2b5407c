import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import special_ortho_group

from hrlab.phase_hermite import (
    RegionError,
    RegionSpec,
    ab_identity_residuals,
    carleson_sjolin_check,
    critical_times,
    curvature_eigen_report,
    curvature_matrix_M,
    curvature_matrix_M_fd,
    d2phase_H,
    discriminant,
    dphase_H,
    frozen_phase_H,
    mixed_hessian_H,
    mixed_hessian_H_fd,
    phase_H,
    phase_value_Phi,
    sample_region,
    sin_sc_formula,
    vectors_ab,
)


def test_discriminant_examples():
    assert discriminant([0, 0], [0, 0]) == 1.0
    x = np.array([0.3, 0.4])
    assert_allclose(discriminant(x, x), (1 - 0.25) ** 2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.uniform(-0.6, 0.6, (2, 3))
        assert_allclose((1 - x @ y) ** 2 - discriminant(x, y), np.sum((x - y) ** 2), atol=1e-14)


def test_critical_times_closed_form():
    sc, ss = critical_times([0.0, 0.0], [0.6, 0.0])
    assert_allclose(sc, np.arccos(0.8), rtol=1e-14)
    assert_allclose(np.sin(sc), 0.6, rtol=1e-14)
    assert_allclose(sin_sc_formula([0.0, 0.0], [0.6, 0.0]), 0.6, rtol=1e-14)
    assert sc < ss
    with pytest.raises(RegionError):
        critical_times([0.9, 0.0], [0.0, 0.9])


def test_separation_on_region():
    xs, ys = sample_region(0.2, 2, 300, seed=3)
    for x, y in zip(xs, ys):
        sc, ss = critical_times(x, y)
        D = discriminant(x, y)
        assert_allclose(np.cos(sc) - np.cos(ss), 2 * np.sqrt(D), atol=1e-13)
        assert ss - sc >= 2 * 0.2


def test_phase_derivatives():
    xs, ys = sample_region(0.2, 3, 50, seed=4)
    h = 1e-5
    for x, y in zip(xs, ys):
        sc, _ = critical_times(x, y)
        assert abs(dphase_H(sc, x, y)) < 1e-12
        t = 0.5 * (sc + np.pi / 2)
        fd = (phase_H(t + h, x, y) - phase_H(t - h, x, y)) / (2 * h)
        assert_allclose(dphase_H(t, x, y), fd, rtol=1e-7)
        assert_allclose(dphase_H(t, x, y, factorized=True), dphase_H(t, x, y), atol=1e-13)
        assert_allclose(d2phase_H(sc, x, y), np.sqrt(discriminant(x, y)) / np.sin(sc), rtol=1e-10)


def test_ab_identities_and_antisymmetry():
    xs, ys = sample_region(0.1, 3, 2000, seed=5)
    assert np.max(np.abs(ab_identity_residuals(xs, ys))) < 1e-12
    x, y = xs[0], ys[0]
    a, b = vectors_ab(x, y)
    a2, _ = vectors_ab(y, x)
    assert_allclose(b, -a2, atol=1e-15)
    a0, b0 = vectors_ab(np.zeros(3), y)
    sc, _ = critical_times(np.zeros(3), y)
    assert_allclose(a0, -y)
    assert_allclose(b0, -np.cos(sc) * y)


def test_phase_value_symmetry_and_perturbation():
    rng = np.random.default_rng(6)
    x, y = rng.uniform(-0.4, 0.4, (2, 2))
    assert_allclose(phase_value_Phi(x, y), phase_value_Phi(y, x), rtol=1e-12)
    # near the diagonal Phi(x, y) = sqrt(1 - |x|^2) |x - y| + O(|x - y|^2)
    u = np.array([0.6, 0.8])
    for base in (np.zeros(2), np.array([0.3, 0.1])):
        ratios = []
        for e in (1e-2, 1e-3, 1e-4):
            lead = np.sqrt(1 - base @ base) * e
            ratios.append(abs(phase_value_Phi(base, base + e * u) - lead) / e**2)
        assert max(ratios) < 1.0


def test_rotation_invariance():
    R = special_ortho_group.rvs(3, random_state=7)
    xs, ys = sample_region(0.2, 3, 20, seed=8)
    for x, y in zip(xs, ys):
        assert_allclose(critical_times(R @ x, R @ y), critical_times(x, y), atol=1e-12)
        assert_allclose(phase_value_Phi(R @ x, R @ y), phase_value_Phi(x, y), atol=1e-12)


def test_mixed_hessian_null_rank_and_fd():
    xs, ys = sample_region(0.2, 3, 30, seed=9)
    for x, y in zip(xs, ys):
        A = mixed_hessian_H(x, y)
        a, b = vectors_ab(x, y)
        assert np.linalg.norm(A @ a) < 1e-10
        s = np.linalg.svd(A, compute_uv=False)
        assert s[-1] < 1e-8 and s[-2] > 1e-3
        assert_allclose(mixed_hessian_H_fd(x, y), A, rtol=1e-5, atol=1e-5 * np.abs(A).max())


def test_near_diagonal_warns():
    with pytest.warns(RuntimeWarning):
        mixed_hessian_H([0.1, 0.1], [0.1, 0.1 + 1e-4])


def test_curvature_matrix():
    xs, ys = sample_region(0.2, 3, 20, seed=10)
    for x, y in zip(xs, ys):
        M = curvature_matrix_M(x, y)
        _, b = vectors_ab(x, y)
        assert np.linalg.norm(M @ b) < 1e-10 * np.abs(M).max()
        assert np.linalg.norm(b @ M) < 1e-10 * np.abs(M).max()
        assert_allclose(curvature_matrix_M_fd(x, y), M, rtol=1e-4, atol=1e-4 * np.abs(M).max())


def test_curvature_report_examples():
    rep = curvature_eigen_report([0.1, 0.0], [0.35, 0.2])
    assert rep.eigenvalues.size == 1 and rep.eigenvalues[0] < 0
    assert rep.eigen_residual < 1e-8
    xs, ys = sample_region(0.2, 3, 20, seed=11)
    for x, y in zip(xs, ys):
        rep = curvature_eigen_report(x, y)
        assert np.all(rep.eigenvalues < 0)
        assert rep.eigen_residual < 1e-8
        scaled = np.abs(rep.eigenvalues) * np.sum((x - y) ** 2)
        assert np.all((scaled > 0.1) & (scaled < 10))


def test_region_membership():
    spec = RegionSpec(0.2, 2)
    assert spec.contains([0, 0], [0.5, 0])
    assert not spec.contains([0.85, 0], [0, 0])
    with pytest.raises(ValueError):
        RegionSpec(1.2, 2)
    xs, ys = sample_region(0.2, 2, 100, seed=12)
    assert all(spec.contains(x, y) for x, y in zip(xs, ys))
    x2, _ = sample_region(0.2, 2, 100, seed=12)
    assert np.array_equal(xs, x2)


def paraboloid(x, xi):
    return x[:-1] @ xi + x[-1] * (xi @ xi) / 2


def saddle(x, xi):
    return x[:-1] @ xi + x[-1] * (xi[0] ** 2 - xi[1] ** 2) / 2


def test_carleson_sjolin_models():
    base = (np.array([0.1, 0.2, 0.3]), np.array([0.2, -0.1]))
    v = carleson_sjolin_check(paraboloid, base)
    assert (v.C1, v.C2, v.C3) == (True, True, True) and v.passed
    v = carleson_sjolin_check(saddle, base)
    assert (v.C1, v.C2, v.C3) == (True, True, False)


def test_rank_degenerate_model_fails_c2():
    base = (np.array([0.1, 0.2, 0.3]), np.array([0.2, -0.1]))
    v = carleson_sjolin_check(lambda x, xi: x[:-1] @ xi + x[-1] * xi[0] ** 2 / 2, base)
    assert v.C1 and v.C2 is False


def test_frozen_hermite_phase_passes():
    xs, ys = sample_region(0.2, 3, 5, seed=13)
    for x, y in zip(xs, ys):
        phase, grad, base = frozen_phase_H(x, y)
        assert carleson_sjolin_check(phase, base, grad_x=grad).passed
