"""Propagator kernels, scaled spectral-window kernels and their quadrature.

The scaled Hermite kernel of a time window zeta is

    [zeta]_lam(x, y) = (1/4pi) int zeta(s) A_d(s) e^{i lam P_H(s, x, y)} ds,
    A_d(s) = e^{-isd/2} [pi (1 - e^{-2is})]^{-d/2},

which equals 1/2 sum_{lam'} zeta_check((lam - lam')/2) Pi_{lam'}(sqrt(lam) x, sqrt(lam) y)
with zeta_check(tau) = (1/2pi) int zeta(t) e^{it tau} dt. On (0, pi) the amplitude is
(4pi)^{-1} (2 pi i)^{-d/2} (sin s)^{-d/2}. The twisted analogue is

    [eta]^L_lam(z, z') = (1/2pi) (4 pi i)^{-d} int eta(t) (sin t)^{-d} e^{i lam P_L(t, z, z')} dt
                       = sum_{lam'} eta_check(lam - lam') Pi^L_{lam'}(sqrt(lam) z, sqrt(lam) z').
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .phase_hermite import phase_H
from .phase_twisted import phase_L, symplectic_matrix
from .profiles import PROFILES, BumpProfile
from .projection import QuadratureError, projection_kernels_upto
from .special_hermite import _truncation


class SingularityError(ValueError):
    """Raised when a time argument or window touches a singular time."""


class NonConvergenceError(QuadratureError):
    """Adaptive quadrature ran out of budget; ``estimates`` holds the last two values."""

    def __init__(self, message: str, estimates: tuple):
        super().__init__(message)
        self.estimates = estimates


class DegenerateCriticalPointError(ValueError):
    """Raised when the second derivative of the phase vanishes at the critical point."""


def _points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., None] if x.ndim == 0 else x


def _distance_to_lattice(t, period: float) -> np.ndarray:
    r = np.mod(np.asarray(t, dtype=float), period)
    return np.minimum(r, period - r)


def mehler_kernel(t: float, x, y, margin: float = 1e-3) -> complex:
    """Kernel of e^{-itH}, H = -Laplacian + |x|^2:

    prod_j e^{-it} (pi (1 - e^{-4it}))^{-1/2} exp((i/2)((|x|^2+|y|^2) cot 2t - 2<x,y> csc 2t)).

    Square roots are principal, one per coordinate; this is the Abel limit of
    sum_k e^{-it(2k+d)} Phi_k(x) Phi_k(y). Its modulus is (2 pi |sin 2t|)^{-d/2}.
    """
    if _distance_to_lattice(t, np.pi / 2) < margin:
        raise SingularityError(f"t={t} is within {margin} of pi Z / 2")
    x, y = _points(x), _points(y)
    d = x.shape[-1]
    xx = np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1)
    xy = np.sum(x * y, axis=-1)
    s2, c2 = np.sin(2 * t), np.cos(2 * t)
    amp = (np.exp(-1j * t) / np.sqrt(np.pi * (1 - np.exp(-4j * t)))) ** d
    out = amp * np.exp(0.5j * (xx * c2 - 2.0 * xy) / s2)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class WindowFunction:
    """Smooth time cutoff profile((t - center) / width), supported in [center - width, center + width].

    A width of zero denotes the empty window. Derivatives obey
    |w^{(n)}| <= C_n width^{-n} with C_n the profile's own bounds.
    """

    center: float
    width: float
    profile: str = "bump"

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; choose from {PROFILES}")
        if self.width < 0:
            raise ValueError("width must be nonnegative")

    @classmethod
    def smoothed_indicator(cls, rho: float) -> "WindowFunction":
        """Plateau window supported in [rho/4, rho]."""
        return cls(5 * rho / 8, 3 * rho / 8, "plateau")

    @property
    def empty(self) -> bool:
        return self.width == 0

    @property
    def support(self) -> Optional[tuple]:
        return None if self.empty else (self.center - self.width, self.center + self.width)

    def _bump(self) -> BumpProfile:
        return BumpProfile(self.profile, self.center, self.width)

    def __call__(self, t) -> np.ndarray:
        if self.empty:
            return np.zeros(np.shape(t))
        return self._bump()(t)

    def derivative(self, n: int, t) -> np.ndarray:
        if self.empty:
            return np.zeros(np.shape(t))
        return self._bump().derivative(n, t)

    def reflect(self) -> "WindowFunction":
        """t -> w(-t)."""
        return WindowFunction(-self.center, self.width, self.profile)

    def shift(self, a: float) -> "WindowFunction":
        """t -> w(t + a)."""
        return WindowFunction(self.center - a, self.width, self.profile)

    def fourier(self, tau) -> np.ndarray:
        """(1/2pi) int w(t) e^{it tau} dt."""
        tau = np.asarray(tau, dtype=float)
        if self.empty:
            return np.zeros(tau.shape, dtype=complex)
        c, r = self.center, self.width
        if self.profile == "gaussian":
            # the e^{-32} truncation is below double precision relative to the peak
            return (r * np.sqrt(np.pi / 32.0) / (2 * np.pi)
                    * np.exp(1j * c * tau - r * r * tau * tau / 128.0))
        flat = tau.ravel()
        periods = r * float(np.max(np.abs(flat), initial=0.0)) / np.pi
        panels = max(32, int(np.ceil(periods / 2)))
        t, wt = _composite_rule(c - r, c + r, panels, 32, _breaks(self))
        vals = self(t) * wt
        out = np.empty(flat.shape, dtype=complex)
        for i in range(0, flat.size, 256):
            blk = flat[i:i + 256]
            out[i:i + 256] = np.exp(1j * np.outer(blk, t)) @ vals
        return (out / (2 * np.pi)).reshape(tau.shape)


@lru_cache(maxsize=16)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def _composite_rule(a: float, b: float, panels: int, nodes: int, breaks=()):
    """Composite Gauss-Legendre nodes and weights on [a, b], honouring interior breaks."""
    edges = np.unique(np.concatenate([[a, b], [p for p in breaks if a < p < b]]))
    lengths = np.diff(edges)
    per = np.maximum(1, np.round(panels * lengths / (b - a)).astype(int))
    cuts = np.concatenate([np.linspace(lo, hi, m + 1)[:-1] for lo, hi, m in
                           zip(edges[:-1], edges[1:], per)] + [[b]])
    x, w = _gl(nodes)
    lo, hi = cuts[:-1, None], cuts[1:, None]
    t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    wt = 0.5 * (hi - lo) * w
    return t.ravel(), np.broadcast_to(wt, t.shape).ravel()


@dataclass
class OscillatoryIntegrand:
    """int_{t0}^{t1} amplitude(t) e^{i lam phase(t)} dt.

    ``phase`` and ``amplitude`` must be vectorized; the interval must stay
    clear of phase singularities. ``breaks`` lists points where the amplitude
    is less smooth (plateau edges, for instance).
    """

    phase: Callable
    amplitude: Callable
    interval: tuple
    lam: float
    dphase: Optional[Callable] = None
    ddphase: Optional[Callable] = None
    breaks: tuple = ()

    def __post_init__(self):
        t0, t1 = self.interval
        if not np.isfinite(t0) or not np.isfinite(t1) or t1 < t0:
            raise ValueError(f"bad interval {self.interval}")

    def values(self, t) -> np.ndarray:
        return self.amplitude(t) * np.exp(1j * self.lam * self.phase(t))

    def periods(self, samples: int = 2049) -> float:
        """Number of oscillation periods across the interval."""
        t = np.linspace(*self.interval, samples)
        return float(self.lam * np.sum(np.abs(np.diff(self.phase(t)))) / (2 * np.pi))


def oscillatory_quadrature(I: OscillatoryIntegrand, rtol: float = 1e-11, atol: float = 1e-15,
                           nodes: int = 16, max_panels: int = 1 << 14) -> tuple:
    """Composite Gauss-Legendre with at least 8 nodes per period, doubling panels to convergence.

    Returns (value, error estimate), the estimate being the difference of the
    last two refinements.
    """
    t0, t1 = I.interval
    if t1 == t0:
        return 0j, 0.0
    panels = max(4, int(np.ceil(8 * I.periods() / nodes)))

    def run(n):
        t, w = _composite_rule(t0, t1, n, nodes, I.breaks)
        return complex(np.sum(I.values(t) * w))

    prev = run(panels)
    while True:
        panels *= 2
        cur = run(panels)
        err = abs(cur - prev)
        if err <= max(rtol * abs(cur), atol):
            return cur, err
        if panels >= max_panels:
            raise NonConvergenceError(
                f"no convergence with {panels} panels (difference {err:.3g})", (prev, cur))
        prev = cur


def stationary_phase_leading(I: OscillatoryIntegrand, t_c: float, threshold: float = 1e-8,
                             h: float = 1e-4) -> complex:
    """a(t_c) sqrt(2 pi / (lam |phi''(t_c)|)) e^{i lam phi(t_c)} e^{i sgn(phi'') pi / 4}."""
    if I.ddphase is not None:
        f2 = float(I.ddphase(t_c))
    else:
        f2 = float((I.phase(t_c + h) - 2 * I.phase(t_c) + I.phase(t_c - h)) / h**2)
    if abs(f2) < threshold:
        raise DegenerateCriticalPointError(f"phi''({t_c}) = {f2} is degenerate")
    if I.dphase is not None and abs(float(I.dphase(t_c))) > 1e-8 * max(1.0, abs(f2)):
        raise ValueError(f"t_c={t_c} is not a critical point of the phase")
    a = complex(np.asarray(I.amplitude(np.array([t_c])))[0])
    return (a * np.sqrt(2 * np.pi / (I.lam * abs(f2)))
            * np.exp(1j * I.lam * float(I.phase(t_c))) * np.exp(1j * np.sign(f2) * np.pi / 4))


def _window_cells(w: WindowFunction, margin: float) -> list:
    """The integer m with supp w inside (m pi, (m+1) pi), as a one-element list (empty window: [])."""
    if w.empty:
        return []
    lo, hi = w.support
    m = int(np.floor(lo / np.pi))
    if lo < m * np.pi + margin or hi > (m + 1) * np.pi - margin:
        raise SingularityError(
            f"window support [{lo:.4g}, {hi:.4g}] must avoid pi Z by {margin}")
    return [m]


def _breaks(w: WindowFunction) -> tuple:
    if w.profile == "plateau":
        return (w.center - w.width / 2, w.center + w.width / 2)
    return ()


def hermite_amplitude(s, d: int) -> np.ndarray:
    """A_d(s) = e^{-isd/2} [pi (1 - e^{-2is})]^{-d/2}, principal root per coordinate."""
    s = np.asarray(s, dtype=float)
    return (np.exp(-0.5j * s) / np.sqrt(np.pi * (1 - np.exp(-2j * s)))) ** d


def scaled_hermite_kernel(w: WindowFunction, lam: float, x, y, margin: float = 1e-3,
                          rtol: float = 1e-11) -> complex:
    """[w]_lam(x, y) by oscillatory quadrature.

    Windows outside (0, pi) are reduced with the exact shift rule
    g(s + pi; x, y) = e^{i pi (lam - d)/2} g(s; x, -y) of the integrand.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = x.size
    total = 0j
    for m in _window_cells(w, margin):
        ym = y if m % 2 == 0 else -y
        off = m * np.pi
        factor = np.exp(0.5j * np.pi * m * (lam - d)) / (4 * np.pi)
        lo, hi = w.support
        I = OscillatoryIntegrand(
            phase=lambda s, ym=ym: phase_H(s, x, ym),
            amplitude=lambda s, off=off: w(s + off) * hermite_amplitude(s, d),
            interval=(lo - off, hi - off), lam=lam,
            breaks=tuple(b - off for b in _breaks(w)))
        val, _ = oscillatory_quadrature(I, rtol=rtol)
        total += factor * val
    return total


def smoothed_spectral_sum(eta_hat: Callable, lam: float, x, y, d: int,
                          cap: Optional[int] = None) -> complex:
    """1/2 sum_{lam' in 2N_0+d} eta_hat((lam - lam')/2) Pi_{lam'}(x, y).

    With eta_hat = w.fourier and points scaled by sqrt(lam) this equals
    scaled_hermite_kernel(w, lam, x / sqrt(lam), y / sqrt(lam)).
    """
    k_max = _truncation(eta_hat, lam, d, 0.5, cap)
    lams = 2 * np.arange(k_max + 1) + d
    wts = eta_hat(0.5 * (lam - lams))
    kernels = projection_kernels_upto(k_max, d, x, y)
    return complex(0.5 * np.tensordot(wts, kernels, axes=(0, 0)))


def twisted_propagator_kernel(t: float, z, zp, margin: float = 1e-3) -> complex:
    """Kernel of e^{-itL}: (4 pi i sin t)^{-d} e^{i(|z - z'|^2 cot t / 4 + <z, S z'>/2)}."""
    if _distance_to_lattice(t, np.pi) < margin:
        raise SingularityError(f"t={t} is within {margin} of pi Z")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zp = np.atleast_1d(np.asarray(zp, dtype=float))
    d = z.size // 2
    S = symplectic_matrix(d)
    v = z - zp
    phase = (v @ v) / (4 * np.tan(t)) + 0.5 * (z @ S @ zp)
    return complex((4j * np.pi * np.sin(t)) ** (-d) * np.exp(1j * phase))


def scaled_twisted_kernel(w: WindowFunction, lam: float, z, zp, margin: float = 1e-3,
                          rtol: float = 1e-11) -> complex:
    """[w]^L_lam(z, z') = (1/2pi)(4 pi i)^{-d} int w(t) (sin t)^{-d} e^{i lam P_L(t, z, z')} dt."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zp = np.atleast_1d(np.asarray(zp, dtype=float))
    d = z.size // 2
    total = 0j
    for _ in _window_cells(w, margin):
        I = OscillatoryIntegrand(
            phase=lambda t: phase_L(t, z, zp),
            amplitude=lambda t: w(t) * np.sin(t) ** (-d),
            interval=w.support, lam=lam, breaks=_breaks(w))
        val, _ = oscillatory_quadrature(I, rtol=rtol)
        total += val * (4j * np.pi) ** (-d) / (2 * np.pi)
    return total

