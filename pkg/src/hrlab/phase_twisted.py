"""Phase geometry of the scaled twisted (special Hermite) kernel.

Points live in R^{2d} and S = [[0, -I], [I, 0]]. With v = z - z' the phase

    P(t, z, z') = t + |v|^2 cos t / (4 sin t) + <z, S z'> / 2

is critical where sin t = |v| / 2.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .phase_hermite import RegionError, fd_hessian, fd_mixed


@lru_cache(maxsize=8)
def symplectic_matrix(d: int) -> np.ndarray:
    """S = [[0, -I_d], [I_d, 0]]; skew-symmetric with S^2 = -I."""
    eye = np.eye(d)
    zero = np.zeros((d, d))
    S = np.block([[zero, -eye], [eye, zero]])
    assert np.array_equal(S.T, -S)
    assert np.array_equal(S @ S, -np.eye(2 * d))
    S.setflags(write=False)
    return S


def _pair(z, zp):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zp = np.atleast_1d(np.asarray(zp, dtype=float))
    if z.shape != zp.shape or z.size % 2:
        raise ValueError("z and z' must be points of the same even dimension")
    return z, zp, symplectic_matrix(z.size // 2)


def phase_L(t, z, zp):
    """P(t, z, z') = t + |z - z'|^2 cos t / (4 sin t) + <z, S z'> / 2."""
    z, zp, S = _pair(z, zp)
    t = np.asarray(t, dtype=float)
    v = z - zp
    return t + (v @ v) * np.cos(t) / (4.0 * np.sin(t)) + 0.5 * (z @ S @ zp)


def dphase_L(t, z, zp):
    """t-derivative 1 - |z - z'|^2 / (4 sin^2 t)."""
    z, zp, _ = _pair(z, zp)
    t = np.asarray(t, dtype=float)
    v = z - zp
    return 1.0 - (v @ v) / (4.0 * np.sin(t) ** 2)


def d2phase_L(t, z, zp):
    z, zp, _ = _pair(z, zp)
    t = np.asarray(t, dtype=float)
    v = z - zp
    return (v @ v) * np.cos(t) / (2.0 * np.sin(t) ** 3)


def critical_times_L(z, zp, margin: float = 1e-2) -> tuple:
    """(S_c, pi - S_c) with sin S_c = |z - z'| / 2, requiring 0 < |z - z'| < 2 - margin."""
    z, zp, _ = _pair(z, zp)
    r = float(np.linalg.norm(z - zp))
    if not 0.0 < r < 2.0 - margin:
        raise RegionError(f"|z - z'| = {r} must lie in (0, 2 - {margin})")
    sc = float(np.arcsin(r / 2.0))
    return sc, float(np.pi - sc)


def rotation_R(z, zp) -> np.ndarray:
    """R = cos S_c I - sin S_c S."""
    z, zp, S = _pair(z, zp)
    sc, _ = critical_times_L(z, zp)
    return np.cos(sc) * np.eye(z.size) - np.sin(sc) * S


def phase_value_L(z, zp) -> float:
    sc, _ = critical_times_L(z, zp)
    return float(phase_L(sc, z, zp))


def grad_z_Phi_L(z, zp) -> np.ndarray:
    """Gradient in z of the critical phase: R v/|v| + S z / 2."""
    z, zp, S = _pair(z, zp)
    v = z - zp
    return rotation_R(z, zp) @ v / np.linalg.norm(v) + 0.5 * S @ z


def null_vector_L(z, zp) -> np.ndarray:
    """nu = R v / |v|, the null vector of the mixed Hessian."""
    z, zp, _ = _pair(z, zp)
    v = z - zp
    return rotation_R(z, zp) @ v / np.linalg.norm(v)


def mixed_hessian_L(z, zp) -> np.ndarray:
    """Matrix of d_{z'_i} d_{z_j} Phi_L:

    (v v^T - cos^2 |v|^2 I - sin cos |v|^2 S) / (|v|^3 cos), evaluated at S_c.
    """
    z, zp, S = _pair(z, zp)
    sc, _ = critical_times_L(z, zp)
    v = z - zp
    vv = v @ v
    c, s = np.cos(sc), np.sin(sc)
    return (np.outer(v, v) - c * c * vv * np.eye(z.size) - s * c * vv * S) / (vv ** 1.5 * c)


def curvature_matrix_L(z, zp) -> np.ndarray:
    """M = v v^T - 2 cos^2 v v^T + cos^2 |v|^2 I + sin cos (v v^T S - S v v^T)."""
    z, zp, S = _pair(z, zp)
    sc, _ = critical_times_L(z, zp)
    v = z - zp
    c, s = np.cos(sc), np.sin(sc)
    vvT = np.outer(v, v)
    return (vvT - 2 * c * c * vvT + c * c * (v @ v) * np.eye(z.size)
            + s * c * (vvT @ S - S @ vvT))


def mixed_hessian_L_fd(z, zp, h=None) -> np.ndarray:
    return fd_mixed(phase_value_L, z, zp, h)


def curvature_form_L_fd(z, zp, h=None) -> np.ndarray:
    """Hessian in w at w = z' of w -> <grad_z Phi_L(z, w), nu(z, z')>."""
    z, zp, _ = _pair(z, zp)
    nu = null_vector_L(z, zp)
    return fd_hessian(lambda w: grad_z_Phi_L(z, w) @ nu, zp, h)


def orthonormal_frame(z, zp) -> np.ndarray:
    """Columns: an orthonormal basis of span{v, Sv}^perp, then Sv/|v|, then v/|v|."""
    z, zp, S = _pair(z, zp)
    v = z - zp
    n = z.size
    u1 = S @ v / np.linalg.norm(v)
    u2 = v / np.linalg.norm(v)
    q, _ = np.linalg.qr(np.column_stack([u1, u2, np.eye(n)]))
    rest = q[:, 2:n]
    return np.column_stack([rest, u1, u2])


@dataclass
class PhaseReportL:
    S_c: float
    v: np.ndarray
    R: np.ndarray
    nu: np.ndarray
    mixed_hessian: np.ndarray
    M: np.ndarray
    B: np.ndarray
    diagonalized: np.ndarray
    expected_diagonal: np.ndarray

    @property
    def off_diagonal(self) -> float:
        A = self.diagonalized
        return float(np.max(np.abs(A - np.diag(np.diag(A)))))

    @property
    def diagonal_error(self) -> float:
        return float(np.max(np.abs(np.sort(np.diag(self.diagonalized))
                                   - np.sort(self.expected_diagonal))))

    @property
    def eigenvalues(self) -> dict:
        vals, counts = np.unique(np.round(self.expected_diagonal, 12), return_counts=True)
        return dict(zip(vals.tolist(), counts.tolist()))


def diagonalization_check_L(z, zp) -> PhaseReportL:
    """B^T R M R^T B in the frame of orthonormal_frame.

    Expected diagonal: |v|^2 cos^2 S_c (2d - 2 times), |v|^2, 0.
    """
    z, zp, S = _pair(z, zp)
    sc, _ = critical_times_L(z, zp)
    v = z - zp
    R = rotation_R(z, zp)
    M = curvature_matrix_L(z, zp)
    B = orthonormal_frame(z, zp)
    diag = B.T @ R @ M @ R.T @ B
    vv = v @ v
    expected = np.array([vv * np.cos(sc) ** 2] * (z.size - 2) + [vv, 0.0])
    return PhaseReportL(sc, v, R, null_vector_L(z, zp), mixed_hessian_L(z, zp), M, B, diag,
                        expected)
