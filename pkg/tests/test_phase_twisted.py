import numpy as np
import pytest
from numpy.testing import assert_allclose

from hrlab.phase_hermite import RegionError
from hrlab.phase_twisted import (
    critical_times_L,
    curvature_form_L_fd,
    curvature_matrix_L,
    d2phase_L,
    diagonalization_check_L,
    dphase_L,
    mixed_hessian_L,
    mixed_hessian_L_fd,
    null_vector_L,
    phase_L,
    rotation_R,
    symplectic_matrix,
)


def pairs(d, n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        z, zp = rng.uniform(-0.6, 0.6, (2, 2 * d))
        if 0.2 < np.linalg.norm(z - zp) < 1.6:
            out.append((z, zp))
    return out


def test_symplectic_matrix():
    S = symplectic_matrix(2)
    assert_allclose(S @ S, -np.eye(4))
    assert_allclose(S.T, -S)
    with pytest.raises(ValueError):
        S[0, 0] = 1.0


def test_critical_times():
    z = np.array([0.0, 0.0])
    sc, ss = critical_times_L(z, np.array([1.0, 0.0]))
    assert_allclose(sc, np.pi / 6, rtol=1e-15)
    assert sc + ss == np.pi
    sc, _ = critical_times_L(z, np.array([1.98, 0.0]), margin=1e-3)
    assert sc > 1.4
    with pytest.raises(RegionError):
        critical_times_L(z, np.array([2.0, 0.0]))
    with pytest.raises(RegionError):
        critical_times_L(z, z)


def test_phase_derivatives():
    for z, zp in pairs(2, 10, 1):
        sc, ss = critical_times_L(z, zp)
        assert abs(dphase_L(sc, z, zp)) < 1e-12
        assert abs(dphase_L(ss, z, zp)) < 1e-12
        h, t = 1e-5, 0.5 * (sc + np.pi / 2)
        fd = (phase_L(t + h, z, zp) - phase_L(t - h, z, zp)) / (2 * h)
        assert_allclose(dphase_L(t, z, zp), fd, rtol=1e-7)
        fd2 = (dphase_L(t + h, z, zp) - dphase_L(t - h, z, zp)) / (2 * h)
        assert_allclose(d2phase_L(t, z, zp), fd2, rtol=1e-6)


def test_rotation():
    z, zp = pairs(2, 1, 2)[0]
    R = rotation_R(z, zp)
    S = symplectic_matrix(2)
    assert np.linalg.norm(R @ R.T - np.eye(4)) < 1e-14
    assert_allclose(np.linalg.det(R), 1.0)
    assert_allclose(R @ S, S @ R, atol=1e-15)
    near = rotation_R(z, z + 1e-9)
    assert_allclose(near, np.eye(4), atol=1e-8)


@pytest.mark.parametrize("d", [1, 2])
def test_mixed_hessian(d):
    for z, zp in pairs(d, 10, 3 + d):
        A = mixed_hessian_L(z, zp)
        nu = null_vector_L(z, zp)
        assert np.linalg.norm(A @ nu) < 1e-10 * max(1.0, np.abs(A).max())
        s = np.linalg.svd(A, compute_uv=False)
        assert s[-1] < 1e-8 * s[0] and s[-2] > 1e-3 * s[0]
        assert_allclose(mixed_hessian_L_fd(z, zp), A, rtol=1e-4, atol=1e-4 * np.abs(A).max())


@pytest.mark.parametrize("d", [1, 2])
def test_curvature_matrix(d):
    for z, zp in pairs(d, 10, 5 + d):
        M = curvature_matrix_L(z, zp)
        assert_allclose(M, M.T, atol=1e-12)
        sc, _ = critical_times_L(z, zp)
        v = z - zp
        scale = np.cos(sc) ** 2 * (v @ v) ** 2
        fd = curvature_form_L_fd(z, zp)
        assert_allclose(fd, -M / scale, rtol=1e-4, atol=1e-4 * np.abs(M / scale).max())


def test_curvature_matrix_hand_expansion():
    # v along e_1 with |v| = 1, d = 1: S_c = pi/6
    z, zp = np.array([0.5, 0.0]), np.array([-0.5, 0.0])
    c2, sc = 0.75, np.sqrt(3) / 4
    # v v^T S - S v v^T with v = e_1 is [[0, -1], [-1, 0]]
    want = np.array([[1 - c2, -sc], [-sc, c2]])
    assert_allclose(curvature_matrix_L(z, zp), want, atol=1e-15)


@pytest.mark.parametrize("d", [1, 2])
def test_diagonalization(d):
    for z, zp in pairs(d, 10, 7 + d):
        rep = diagonalization_check_L(z, zp)
        assert rep.off_diagonal < 1e-10
        assert rep.diagonal_error < 1e-10
        assert abs(rep.diagonalized[-1, -1]) < 1e-10
    rep = diagonalization_check_L(np.array([0.3, 0.1]), np.array([-0.2, 0.4]))
    vv = 0.5 ** 2 + 0.3 ** 2
    assert_allclose(np.sort(np.diag(rep.diagonalized)), [0.0, vv], atol=1e-12)


def test_diagonal_scales_like_rho_squared():
    z = np.array([0.1, 0.2, -0.1, 0.0])
    u = np.array([0.5, 0.5, 0.5, 0.5])
    vals = []
    for rho in (0.1, 0.2, 0.4):
        rep = diagonalization_check_L(z, z - rho * u)
        vals.append(np.max(np.diag(rep.diagonalized)) / rho**2)
    assert_allclose(vals, 1.0, rtol=1e-12)
