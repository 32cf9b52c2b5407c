"""Phase geometry of the scaled Hermite kernel.

For x, y in R^d with D(x, y) = 1 + <x,y>^2 - |x|^2 - |y|^2 > 0 the phase

    P(t, x, y) = t/2 + (|x|^2 + |y|^2) cos t / (2 sin t) - <x,y> / sin t

has two critical times S_c < S_* in (0, pi) with cos S_c = <x,y> + sqrt(D),
cos S_* = <x,y> - sqrt(D). Everything below is built from these.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

_EPS = np.finfo(float).eps


class RegionError(ValueError):
    """Raised when (x, y) lies outside the region where S_c, S_* are defined."""


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def discriminant(x, y) -> float:
    """D(x, y) = 1 + <x,y>^2 - |x|^2 - |y|^2."""
    x, y = _vec(x), _vec(y)
    xy = x @ y
    return float(1.0 + xy * xy - x @ x - y @ y)


def critical_times(x, y) -> tuple:
    """(S_c, S_*) = (arccos(<x,y> + sqrt D), arccos(<x,y> - sqrt D))."""
    x, y = _vec(x), _vec(y)
    D = discriminant(x, y)
    if not D > 0:
        raise RegionError(f"discriminant {D} is not positive")
    r = np.sqrt(D)
    xy = float(x @ y)
    cc, cs = xy + r, xy - r
    if not (-1.0 < cs and cc < 1.0):
        if cc >= 1.0 and np.allclose(x, y, atol=0, rtol=0):
            return 0.0, float(np.arccos(np.clip(cs, -1.0, 1.0)))
        raise RegionError(f"cosines ({cc}, {cs}) leave (-1, 1)")
    return float(np.arccos(cc)), float(np.arccos(cs))


def sin_sc_formula(x, y) -> float:
    """sin S_c = |x - y| sqrt((1 - <x,y> + sqrt D) / (1 + <x,y> + sqrt D))."""
    x, y = _vec(x), _vec(y)
    r = np.sqrt(discriminant(x, y))
    xy = float(x @ y)
    return float(np.linalg.norm(x - y) * np.sqrt((1 - xy + r) / (1 + xy + r)))


def phase_H(t, x, y):
    """P(t, x, y) = t/2 + (|x|^2+|y|^2) cos t / (2 sin t) - <x,y> / sin t."""
    x, y = _vec(x), _vec(y)
    t = np.asarray(t, dtype=float)
    s, c = np.sin(t), np.cos(t)
    return 0.5 * t + (x @ x + y @ y) * c / (2.0 * s) - (x @ y) / s


def dphase_H(t, x, y, factorized: bool = False):
    """t-derivative of phase_H.

    Expanded: -(cos^2 t - 2<x,y> cos t + |x|^2 + |y|^2 - 1) / (2 sin^2 t).
    Factorized: -(cos t - cos S_c)(cos t - cos S_*) / (2 sin^2 t).
    """
    x, y = _vec(x), _vec(y)
    t = np.asarray(t, dtype=float)
    s, c = np.sin(t), np.cos(t)
    xy = x @ y
    if factorized:
        r = np.sqrt(discriminant(x, y))
        return -(c - (xy + r)) * (c - (xy - r)) / (2.0 * s * s)
    return -(c * c - 2.0 * xy * c + x @ x + y @ y - 1.0) / (2.0 * s * s)


def d2phase_H(t, x, y):
    """Second t-derivative of phase_H."""
    x, y = _vec(x), _vec(y)
    t = np.asarray(t, dtype=float)
    s, c = np.sin(t), np.cos(t)
    xy = x @ y
    n = c * c - 2.0 * xy * c + x @ x + y @ y - 1.0
    dn = -2.0 * c * s + 2.0 * xy * s
    return -dn / (2.0 * s * s) + n * c / s**3


def vectors_ab(x, y) -> tuple:
    """a = cos S_c x - y and b = x - cos S_c y."""
    x, y = _vec(x), _vec(y)
    sc, _ = critical_times(x, y)
    c = np.cos(sc)
    return c * x - y, x - c * y


def phase_value_Phi(x, y, check: bool = True) -> float:
    """Phi(x, y) = P(S_c, x, y), cross-checked against (S_c - cos S_* sin S_c)/2."""
    sc, ss = critical_times(x, y)
    val = float(phase_H(sc, x, y))
    if check:
        alt = 0.5 * (sc - np.cos(ss) * np.sin(sc))
        if abs(val - alt) > 1e-9 * max(1.0, abs(val)):
            raise ArithmeticError(f"phase value mismatch: {val} vs {alt}")
    return val


def grad_x_Phi(x, y) -> np.ndarray:
    """Gradient of Phi in x: (cos S_c x - y) / sin S_c."""
    x, y = _vec(x), _vec(y)
    sc, _ = critical_times(x, y)
    return (np.cos(sc) * x - y) / np.sin(sc)


def _near_diagonal(x, y, tol=1e-3) -> bool:
    x, y = _vec(x), _vec(y)
    return np.linalg.norm(x - y) < tol


def mixed_hessian_H(x, y) -> np.ndarray:
    """Matrix of d_{y_i} d_{x_j} Phi(x, y).

    Closed form (a b^T - <a,b> I) / (sin^3 S_c sqrt D); a is a right null
    vector. Warns when x is within 1e-3 of y, where the entries blow up.
    """
    x, y = _vec(x), _vec(y)
    if _near_diagonal(x, y):
        warnings.warn("mixed Hessian is ill-conditioned near the diagonal x = y",
                      RuntimeWarning, stacklevel=2)
    sc, _ = critical_times(x, y)
    a, b = vectors_ab(x, y)
    r = np.sqrt(discriminant(x, y))
    d = x.size
    return (np.outer(a, b) - (a @ b) * np.eye(d)) / (np.sin(sc) ** 3 * r)


def curvature_matrix_M(x, y) -> np.ndarray:
    """Closed form of the curvature matrix

        M = (<a,b> I - a b^T)(b a^T - cos S_c a a^T - <a,b> I) / (omega <a,b>),

    omega = sqrt((1 - |x|^2) D) sin^4 S_c. It equals the Hessian in z at
    z = y of z -> <grad_x Phi(x, z), a/|a|>.
    """
    x, y = _vec(x), _vec(y)
    sc, _ = critical_times(x, y)
    a, b = vectors_ab(x, y)
    D = discriminant(x, y)
    d = x.size
    ab = a @ b
    omega = np.sqrt((1.0 - x @ x) * D) * np.sin(sc) ** 4
    eye = np.eye(d)
    left = ab * eye - np.outer(a, b)
    right = np.outer(b, a) - np.cos(sc) * np.outer(a, a) - ab * eye
    return left @ right / (omega * ab)


# ----------------------------------------------------------------------------
# finite-difference oracles

def fd_gradient(f: Callable, x, h: Optional[float] = None) -> np.ndarray:
    x = _vec(x)
    h = h or _EPS ** (1 / 3) * max(1.0, np.linalg.norm(x))
    out = np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def fd_hessian(f: Callable, x, h: Optional[float] = None) -> np.ndarray:
    """Central-difference Hessian of a scalar function."""
    x = _vec(x)
    n = x.size
    h = h or _EPS ** 0.25 * max(1.0, np.linalg.norm(x))
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h**2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
            H[i, j] = H[j, i] = v
    return H


def fd_mixed(f: Callable, x, y, h: Optional[float] = None) -> np.ndarray:
    """Central differences for d_{y_i} d_{x_j} f(x, y)."""
    x, y = _vec(x), _vec(y)
    h = h or _EPS ** 0.25 * max(1.0, np.linalg.norm(x), np.linalg.norm(y))
    out = np.empty((y.size, x.size))
    for i in range(y.size):
        ei = np.zeros(y.size)
        ei[i] = h
        for j in range(x.size):
            ej = np.zeros(x.size)
            ej[j] = h
            out[i, j] = (f(x + ej, y + ei) - f(x + ej, y - ei)
                         - f(x - ej, y + ei) + f(x - ej, y - ei)) / (4 * h * h)
    return out


def mixed_hessian_H_fd(x, y, h: Optional[float] = None) -> np.ndarray:
    """Finite-difference version of mixed_hessian_H built from Phi alone."""
    return fd_mixed(lambda u, v: phase_value_Phi(u, v, check=False), x, y, h)


def curvature_matrix_M_fd(x, y, h: Optional[float] = None) -> np.ndarray:
    """Hessian in z at z = y of z -> <grad_x Phi(x, z), a(x,y)/|a(x,y)|>."""
    x, y = _vec(x), _vec(y)
    a, _ = vectors_ab(x, y)
    u = a / np.linalg.norm(a)
    return fd_hessian(lambda z: grad_x_Phi(x, z) @ u, y, h)


# ----------------------------------------------------------------------------
# regions

@dataclass(frozen=True)
class RegionSpec:
    """The region {|x|, |y| <= 1 - c0, D(x, y) > c0^2} in R^d x R^d."""

    c0: float
    d: int

    def __post_init__(self):
        if not 0 < self.c0 < 1:
            raise ValueError("c0 must lie in (0, 1)")

    def contains(self, x, y) -> bool:
        x, y = _vec(x), _vec(y)
        r = 1.0 - self.c0
        return bool(x @ x <= r * r and y @ y <= r * r and discriminant(x, y) > self.c0**2)

    def sample(self, n: int, rng: np.random.Generator, batch: int = 4096) -> tuple:
        """n pairs drawn uniformly by rejection from the box [-(1-c0), 1-c0]^(2d)."""
        r = 1.0 - self.c0
        xs, ys = [], []
        count = 0
        while count < n:
            z = rng.uniform(-r, r, size=(batch, 2 * self.d))
            x, y = z[:, : self.d], z[:, self.d:]
            xx = np.einsum("ij,ij->i", x, x)
            yy = np.einsum("ij,ij->i", y, y)
            xy = np.einsum("ij,ij->i", x, y)
            ok = (xx <= r * r) & (yy <= r * r) & (1 + xy * xy - xx - yy > self.c0**2)
            xs.append(x[ok])
            ys.append(y[ok])
            count += int(ok.sum())
        return np.concatenate(xs)[:n], np.concatenate(ys)[:n]


def sample_region(c0: float, d: int, n: int, seed: int = 0) -> tuple:
    """Seeded samples (x, y) from the region with parameter c0."""
    return RegionSpec(c0, d).sample(n, np.random.default_rng(seed))


# ----------------------------------------------------------------------------
# curvature report and Carleson-Sjolin conditions

def householder_to_last_axis(v) -> np.ndarray:
    """Orthogonal reflection H with H v/|v| = e_d."""
    v = _vec(v)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot rotate the zero vector")
    u = v / n
    e = np.zeros(v.size)
    e[-1] = 1.0
    w = u - e
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return np.eye(v.size)
    w /= nw
    return np.eye(v.size) - 2.0 * np.outer(w, w)


@dataclass
class CSVerdict:
    """Outcome of the Carleson-Sjolin checks. None marks an indeterminate rank."""

    C1: Optional[bool]
    C2: Optional[bool]
    C3: Optional[bool]
    rank_mixed: Optional[int]
    rank_form: Optional[int]
    form_eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    nu: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def passed(self) -> bool:
        return bool(self.C1 and self.C2 and self.C3)


def numerical_rank(s: np.ndarray, rtol: float, gap: float = 1e2) -> Optional[int]:
    """Rank from singular values ``s``; None when the gap test is ambiguous."""
    s = np.sort(np.abs(s))[::-1]
    if s.size == 0 or s[0] == 0:
        return 0
    tau = rtol * s[0]
    r = int(np.sum(s > tau))
    if r < s.size:
        if s[r - 1] < gap * max(s[r], tau / gap):
            return None
    elif s[-1] < gap * tau:
        return None
    return r


def carleson_sjolin_check(phase: Callable, base_point, grad_x: Optional[Callable] = None,
                          h: Optional[float] = None, rtol: float = 1e-6) -> CSVerdict:
    """Check the Carleson-Sjolin conditions for phase(x, xi), x in R^d, xi in R^(d-1).

    C1: the (d-1) x d mixed Hessian d_xi d_x^T phase has rank d-1.
    C2: with nu a unit null vector of it, the form
        d_xi d_xi^T <d_x phase(x0, xi), nu> has rank d-1.
    C3: all its nonzero eigenvalues share a sign.

    Derivatives are finite differences; ``grad_x`` (the analytic x-gradient)
    may be supplied to avoid third-order differences.
    """
    x0, xi0 = (_vec(p) for p in base_point)
    d = x0.size
    if xi0.size != d - 1:
        raise ValueError("xi must have dimension d - 1")
    scale = max(1.0, np.linalg.norm(x0), np.linalg.norm(xi0))
    if grad_x is not None:
        g = lambda xi: _vec(grad_x(x0, xi))  # noqa: E731
        mixed = np.array([fd_gradient(lambda xi, j=j: g(xi)[j], xi0) for j in range(d)]).T
    else:
        mixed = fd_mixed(lambda x, xi: phase(x, xi), x0, xi0, h)
    sv = np.linalg.svd(mixed, compute_uv=False)
    r1 = numerical_rank(sv, rtol)
    c1 = None if r1 is None else r1 == d - 1
    _, _, vt = np.linalg.svd(mixed)
    nu = vt[-1]
    if d == 1:
        return CSVerdict(c1, True, True, r1, 0, np.zeros(0), nu)
    if grad_x is not None:
        form = fd_hessian(lambda xi: g(xi) @ nu, xi0, h)
    else:
        h3 = h or 1e-3 * scale
        form = fd_hessian(lambda xi: (phase(x0 + h3 * nu, xi) - phase(x0 - h3 * nu, xi)) / (2 * h3),
                          xi0, h3)
    form = 0.5 * (form + form.T)
    ev = np.linalg.eigvalsh(form)
    r2 = numerical_rank(np.abs(ev), rtol)
    c2 = None if r2 is None else r2 == d - 1
    nz = ev[np.abs(ev) > rtol * max(np.abs(ev).max(), 1e-300)]
    c3 = bool(nz.size > 0 and (np.all(nz > 0) or np.all(nz < 0)))
    return CSVerdict(c1, c2, c3, r1, r2, ev, nu)


def frozen_phase_H(x0, y0):
    """Rescaled Hermite phase with the last y-coordinate frozen.

    Rotates (x0, y0) so that b(x0, y0) points along e_d, sets rho = |x0 - y0| and returns
    (phase, grad_x, base_point) with phase(x, xi) = Phi(x0 + rho x, y0 + rho (xi, 0)) / rho.
    """
    x0, y0 = _vec(x0), _vec(y0)
    _, b = vectors_ab(x0, y0)
    H = householder_to_last_axis(b)
    xr, yr = H @ x0, H @ y0
    rho = float(np.linalg.norm(x0 - y0))
    d = x0.size

    def lift(xi):
        return yr + rho * np.append(_vec(xi), 0.0)

    def phase(x, xi):
        return phase_value_Phi(xr + rho * _vec(x), lift(xi), check=False) / rho

    def grad(x, xi):
        return grad_x_Phi(xr + rho * _vec(x), lift(xi))

    return phase, grad, (np.zeros(d), np.zeros(d - 1))


@dataclass
class PhaseReportH:
    D: float
    S_c: float
    S_star: float
    a_vec: np.ndarray
    b_vec: np.ndarray
    Phi: float
    mixed_hessian: np.ndarray
    M: np.ndarray
    eigenvalues: np.ndarray
    predicted: np.ndarray
    rotation: np.ndarray
    cs_verdict: Optional[CSVerdict] = None

    @property
    def eigen_residual(self) -> float:
        """Max relative mismatch between |eigenvalues| and their predicted moduli."""
        got = np.sort(np.abs(self.eigenvalues))
        want = np.sort(self.predicted)
        return float(np.max(np.abs(got - want) / want)) if got.size else 0.0


def predicted_curvatures(x, y) -> tuple:
    """(|lambda_1|, |lambda_2|) for the reduced curvature block.

    |lambda_1| = sqrt(1 - |x|^2) (1 - |y|^2) / (sin^2 S_c D), multiplicity 1;
    |lambda_2| = 1 / (sqrt(1 - |x|^2) sin^2 S_c), multiplicity d - 2.
    """
    x, y = _vec(x), _vec(y)
    sc, _ = critical_times(x, y)
    D = discriminant(x, y)
    s2 = np.sin(sc) ** 2
    l1 = np.sqrt(1 - x @ x) * (1 - y @ y) / (s2 * D)
    l2 = 1.0 / (np.sqrt(1 - x @ x) * s2)
    return float(l1), float(l2)


def ab_identity_residuals(x, y) -> np.ndarray:
    """Residuals of the three norm identities for a and b, vectorized over stacks of pairs.

    Columns: |a|^2 - (1 - |x|^2) sin^2 S_c, |b|^2 - (1 - |y|^2) sin^2 S_c and
    <a, b> - sqrt(D) sin^2 S_c. Inputs have shape (..., d); pairs must lie where
    S_c is defined.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    xx = np.einsum("...i,...i", x, x)
    yy = np.einsum("...i,...i", y, y)
    xy = np.einsum("...i,...i", x, y)
    D = 1.0 + xy * xy - xx - yy
    if np.any(D <= 0):
        raise RegionError("discriminant is not positive for every pair")
    r = np.sqrt(D)
    c = xy + r
    if np.any(np.abs(c) >= 1):
        raise RegionError("cos S_c leaves (-1, 1)")
    s2 = 1.0 - c * c
    a = c[..., None] * x - y
    b = x - c[..., None] * y
    return np.stack([np.einsum("...i,...i", a, a) - (1 - xx) * s2,
                     np.einsum("...i,...i", b, b) - (1 - yy) * s2,
                     np.einsum("...i,...i", a, b) - r * s2], axis=-1)


def curvature_eigen_report(x, y, with_cs: bool = False) -> PhaseReportH:
    """Eigenvalues of the curvature block after rotating b/|b| to e_d.

    The (d-1) x (d-1) upper-left block of M at the rotated pair has
    eigenvalues -|lambda_1| (once) and -|lambda_2| (d-2 times).
    """
    x, y = _vec(x), _vec(y)
    d = x.size
    sc, ss = critical_times(x, y)
    a, b = vectors_ab(x, y)
    if np.linalg.norm(b) < 1e-14:
        raise RegionError("b vanishes; the rotation is undefined")
    H = householder_to_last_axis(b)
    xr, yr = H @ x, H @ y
    M = curvature_matrix_M(xr, yr)
    block = M[: d - 1, : d - 1]
    ev = np.linalg.eigvals(block) if d > 1 else np.zeros(0)
    if ev.size and np.max(np.abs(ev.imag)) > 1e-8 * max(1.0, np.max(np.abs(ev))):
        raise ArithmeticError("reduced curvature block has complex eigenvalues")
    ev = np.sort(ev.real)
    l1, l2 = predicted_curvatures(x, y)
    predicted = np.array([l1] + [l2] * (d - 2)) if d > 1 else np.zeros(0)
    verdict = None
    if with_cs and d > 1:
        phase, grad, base = frozen_phase_H(x, y)
        verdict = carleson_sjolin_check(phase, base, grad_x=grad)
    return PhaseReportH(discriminant(x, y), sc, ss, a, b, phase_value_Phi(x, y),
                        mixed_hessian_H(x, y), curvature_matrix_M(x, y), ev, predicted, H,
                        verdict)
