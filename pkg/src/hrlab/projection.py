"""Hermite spectral projections, Bochner-Riesz kernels and related identities."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy import integrate, special

from .grid import GridFunction
from .hermite import hermite_bank, hermite_function
from .profiles import BumpProfile


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature fails to reach its tolerance."""


def _level_k(lam, d) -> int:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if int(lam) != lam:
        raise ValueError(f"eigenvalue must be an integer, got {lam!r}")
    lam, d = int(lam), int(d)
    if lam < d or (lam - d) % 2:
        raise ValueError(f"lambda={lam} is not of the form 2k+d with d={d}")
    return (lam - d) // 2


@dataclass(frozen=True)
class EigenLevel:
    """Multi-indices alpha with 2|alpha| + d = lambda."""

    lam: int
    d: int
    k: int
    indices: tuple

    def __len__(self) -> int:
        return len(self.indices)


def compositions(k: int, d: int):
    """All alpha in N_0^d with |alpha| = k, first coordinate descending."""
    out = []
    for bars in itertools.combinations(range(k + d - 1), d - 1):
        parts, prev = [], -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(k + d - 2 - prev)
        out.append(tuple(parts))
    out.sort(reverse=True)
    return out


def enumerate_eigen_multiindices(lam: int, d: int) -> EigenLevel:
    """The eigenvalue level {alpha : 2|alpha| + d = lam}.

    Indices are listed in descending lexicographic order, e.g.
    (6, 2) -> ((2, 0), (1, 1), (0, 2)).
    """
    k = _level_k(lam, d)
    idx = tuple(compositions(k, int(d)))
    assert len(idx) == comb(k + d - 1, d - 1)
    return EigenLevel(int(lam), int(d), k, idx)


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape[-1] != d:
        raise ValueError(f"points must have trailing dimension {d}")
    return x


def _diagonal_products(k_max: int, x, y) -> np.ndarray:
    """p[i, n, m] = h_n(x_m[i]) h_n(y_m[i]) for each coordinate i."""
    d = x.shape[-1]
    xf, yf = x.reshape(-1, d), y.reshape(-1, d)
    out = np.empty((d, k_max + 1, xf.shape[0]))
    for i in range(d):
        bx = hermite_bank(k_max, xf[:, i])
        by = hermite_bank(k_max, yf[:, i])
        with np.errstate(under="ignore"):
            out[i] = bx.mantissa * by.mantissa * np.exp(bx.log_scale + by.log_scale)
    return out


def projection_kernels_upto(k_max: int, d: int, x, y) -> np.ndarray:
    """Pi_{2j+d}(x, y) for j = 0..k_max, shape (k_max + 1,) + broadcast shape.

    Uses the generating polynomial prod_i sum_n h_n(x_i) h_n(y_i) z^n, whose
    z^j coefficient is the level-j kernel.
    """
    x = _as_points(x, d)
    y = _as_points(y, d)
    x, y = np.broadcast_arrays(x, y)
    shape = x.shape[:-1]
    p = _diagonal_products(k_max, x, y)
    coef = p[0]
    for i in range(1, d):
        new = np.zeros_like(coef)
        for n in range(k_max + 1):
            new[n:] += p[i][n] * coef[: k_max + 1 - n]
        coef = new
    return coef.reshape((k_max + 1,) + shape)


def hermite_projection_kernel(lam: int, d: int, x, y):
    """Pi_lambda(x, y) = sum over 2|alpha|+d = lambda of Phi_alpha(x) Phi_alpha(y).

    ``x`` and ``y`` are points (or stacks of points) with trailing dimension d.
    """
    k = _level_k(lam, d)
    x = _as_points(x, d)
    y = _as_points(y, d)
    x, y = np.broadcast_arrays(x, y)
    shape = x.shape[:-1]
    p = _diagonal_products(k, x, y)
    if d == 1:
        out = p[0][k]
    else:
        coef = p[0]
        for i in range(1, d - 1):
            new = np.zeros_like(coef)
            for n in range(k + 1):
                new[n:] += p[i][n] * coef[: k + 1 - n]
            coef = new
        out = np.einsum("nm,nm->m", coef, p[d - 1][::-1])
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def _grid_undersampled(level: EigenLevel, f: GridFunction) -> list:
    flags = []
    mu = np.sqrt(level.lam)
    for i, a in enumerate(f.axes):
        h = np.max(np.diff(a)) if a.size > 1 else np.inf
        if h > np.pi / (4.0 * mu):
            flags.append(f"axis {i}: spacing {h:.3g} undersamples oscillation at lambda={level.lam}")
        if a.min() > -mu or a.max() < mu:
            flags.append(f"axis {i}: grid does not reach the turning point {mu:.3g}")
    return flags


def apply_projection(level: EigenLevel, f: GridFunction) -> GridFunction:
    """Discrete Pi_lambda f = sum_alpha <f, Phi_alpha>_grid Phi_alpha.

    Inner products use the grid's trapezoid weights. Undersampling is
    reported through ``result.flags`` and a RuntimeWarning.
    """
    if f.dim != level.d:
        raise ValueError("grid dimension does not match the eigenvalue level")
    flags = _grid_undersampled(level, f)
    for msg in flags:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    k = level.k
    banks = [hermite_bank(k, a).values for a in f.axes]
    fw = f.values * f.weights()
    out = np.zeros(f.shape, dtype=np.result_type(f.values, float))
    for alpha in level.indices:
        vecs = [banks[i][a] for i, a in enumerate(alpha)]
        c = fw
        for v in vecs:
            c = np.tensordot(c, v, axes=([0], [0]))
        term = vecs[0]
        for v in vecs[1:]:
            term = np.multiply.outer(term, v)
        out = out + c * term
    return GridFunction(f.axes, out, flags)


@dataclass(frozen=True)
class RieszWeighting:
    """Bochner-Riesz weights (1 - lambda'/lambda)_+^delta."""

    lam: float
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")

    def weight(self, lam_prime) -> np.ndarray:
        r = 1.0 - np.asarray(lam_prime, dtype=float) / self.lam
        return np.where(r > 0, np.abs(r) ** self.delta, 0.0)


def bochner_riesz_kernel_H(w: RieszWeighting, d: int, x, y):
    """sum over lambda' in 2N_0+d of (1 - lambda'/lambda)_+^delta Pi_lambda'(x, y)."""
    if w.lam <= d:
        x = _as_points(x, d)
        out = np.zeros(np.broadcast_shapes(x.shape[:-1], _as_points(y, d).shape[:-1]))
        return float(out) if out.ndim == 0 else out
    k_top = int(np.ceil((w.lam - d) / 2.0))
    kernels = projection_kernels_upto(k_top, d, x, y)
    lams = 2 * np.arange(k_top + 1) + d
    wts = w.weight(lams)
    out = np.tensordot(wts, kernels, axes=(0, 0))
    return float(out) if np.ndim(out) == 0 else out


def cross_hermite_integral(u: int, v: int, l: float) -> float:
    """Closed form of the integral of h_u h_v over [-l, l] for u != v."""
    if u == v:
        raise ValueError("the closed form is undefined for u == v")
    if not l > 0:
        raise ValueError("half-length must be positive")
    if (u + v) % 2:
        return 0.0
    m = max(u, v) + 1
    h = hermite_bank(m, np.array([float(l)])).values[:, 0]
    return float(2.0 / (np.sqrt(2.0) * (u - v))
                 * (np.sqrt(u + 1.0) * h[u + 1] * h[v] - np.sqrt(v + 1.0) * h[u] * h[v + 1]))


def hermite_square_integral(u: int, l: float) -> float:
    """Integral of h_u^2 over [-l, l] by Gauss-Legendre quadrature."""
    # node spacing near the centre is about pi l / n; keep it well below
    # the oscillation length of h_u
    n = 2 * u + 80 + int(8 * l * np.sqrt(2 * u + 1))
    nodes, wts = np.polynomial.legendre.leggauss(n)
    t = l * nodes
    return float(l * np.sum(wts * hermite_function(u, t) ** 2))


_PANELS = 16
_PANEL_NODES = 48


@lru_cache(maxsize=64)
def _jacobi_rule(n: int, power: float):
    return special.roots_jacobi(n, 0.0, power)


@lru_cache(maxsize=8)
def _legendre_rule(n: int):
    return np.polynomial.legendre.leggauss(n)


def _weighted_integral(g, power: float, lo: float, hi: float, breaks) -> float:
    """int_lo^hi (s - lo)^power g(s) ds by composite Gauss rules.

    The first panel uses Gauss-Jacobi to absorb the algebraic endpoint
    weight; the rest use Gauss-Legendre. ``g`` must accept arrays.
    """
    inner = [b for b in breaks if lo < b < hi]
    if len(inner) > 1:
        # keep the Jacobi panel at least half a panel wide so the next
        # Legendre panel never sees the near-singular weight
        width = np.diff([lo] + inner + [hi])
        inner = [b for i, b in enumerate(inner) if b - lo > 0.5 * width[i + 1]]
    edges = [lo] + inner + [hi]
    xj, wj = _jacobi_rule(2 * _PANEL_NODES, float(power))
    xl, wl = _legendre_rule(_PANEL_NODES)
    nodes, wts = [], []
    for i, (p0, p1) in enumerate(zip(edges[:-1], edges[1:])):
        half = 0.5 * (p1 - p0)
        if i == 0:
            nodes.append(p0 + half * (xj + 1.0))
            wts.append(wj * half ** (power + 1.0))
        else:
            s_ = p0 + half * (xl + 1.0)
            nodes.append(s_)
            wts.append(wl * half * (s_ - lo) ** power)
    nodes = np.concatenate(nodes)
    return float(np.dot(np.concatenate(wts), g(nodes)))


def _breaks(F: BumpProfile):
    """Uniform panels plus geometric refinement toward both support edges,
    where the derivatives of a flat-edged bump are steepest."""
    a, b = F.support
    w = (b - a) / _PANELS
    extra = [w * 2.0 ** -j for j in range(1, 6)]
    pts = set(np.linspace(a, b, _PANELS + 1))
    pts.update(a + e for e in extra)
    pts.update(b - e for e in extra)
    return sorted(pts)


def weyl_derivative(F: BumpProfile, nu: float, t) -> np.ndarray:
    """Weyl fractional derivative F^(nu) = F * chi_-^(-nu-1).

    For integer nu this is (-1)^nu times the ordinary derivative. Otherwise,
    with n = ceil(nu), integration by parts gives the integrable form

        F^(nu)(t) = (-1)^n / Gamma(n - nu) int_t^inf (s - t)^(n - nu - 1) F^(n)(s) ds.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if nu <= 0:
        raise ValueError("order must be positive")
    n = int(np.ceil(nu - 1e-12))
    sign = -1.0 if n % 2 else 1.0
    if abs(nu - round(nu)) < 1e-12:
        return sign * F.derivative(int(round(nu)), t)
    a, b = F.support
    power = n - nu - 1.0
    brk = _breaks(F)
    dn = lambda s: F.derivative(n, s)  # noqa: E731
    out = np.zeros(t.shape)
    for i, ti in enumerate(t):
        if ti >= b:
            continue
        if ti >= a:
            out[i] = _weighted_integral(dn, power, ti, b, brk)
        else:
            # smooth weight: shift the singular point off the support
            out[i] = _weighted_integral(lambda s: (s - ti) ** power * dn(s), 0.0, a, b, brk)
    return sign * out / special.gamma(n - nu)


def riesz_subordination_residual(F: BumpProfile, delta: float, lam: float) -> float:
    """|F(lam) - int F^(delta+1)(t) t^delta (1 - lam/t)_+^delta / Gamma(delta+1) dt|.

    F must be supported in (0, inf). For t > 0 the kernel equals
    (t - lam)_+^delta, which is how it is integrated.
    """
    a, b = F.support
    if a <= 0:
        raise ValueError("F must be supported in (0, inf)")
    if delta <= -1:
        raise ValueError("delta must exceed -1")
    lam = float(lam)
    nu = delta + 1.0
    integral = 0.0
    if lam < b:
        g = lambda t: weyl_derivative(F, nu, t)  # noqa: E731
        brk = _breaks(F)
        if lam >= a:
            integral = _weighted_integral(g, float(delta), lam, b, brk)
        else:
            integral = _weighted_integral(lambda t: (t - lam) ** delta * g(t), 0.0, a, b, brk)
            if abs(nu - round(nu)) > 1e-12:
                # fractional derivatives do not vanish left of the support
                integral += _weighted_integral(g, float(delta), lam, a,
                                               list(np.linspace(lam, a, 9)))
        if not np.isfinite(integral):
            raise QuadratureError(f"subordination integral is not finite for delta={delta}, lambda={lam}")
        integral /= special.gamma(delta + 1.0)
    return float(abs(float(F(lam)) - integral))
