"""Smooth compactly supported profiles on [-1, 1] with exact derivatives.

Derivatives are produced once by symbolic differentiation and compiled to
numpy, so fractional-derivative and stationary-phase checks are not limited
by finite-difference noise.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

PROFILES = ("bump", "plateau", "gaussian", "gaussian_bump")


@lru_cache(maxsize=None)
def _pieces(name: str):
    """Return [(lo, hi, sympy expr in u)] describing the profile on (lo, hi)."""
    import sympy as sp

    u = sp.Symbol("u", real=True)
    bump = sp.exp(1 - 1 / (1 - u**2))
    if name == "bump":
        return u, [(-1.0, 1.0, bump)]
    if name == "gaussian_bump":
        return u, [(-1.0, 1.0, sp.exp(-4 * u**2) * bump)]
    if name == "gaussian":
        # sigma = 1/8, truncated at 8 sigma (edge value e^-32)
        return u, [(-1.0, 1.0, sp.exp(-32 * u**2))]
    if name == "plateau":
        def step(s):
            # smooth step 0 -> 1 on (0, 1)
            return 1 / (1 + sp.exp(1 / s - 1 / (1 - s)))
        return u, [(-1.0, -0.5, step(2 * (1 + u))),
                   (-0.5, 0.5, sp.Integer(1)),
                   (0.5, 1.0, step(2 * (1 - u)))]
    raise ValueError(f"unknown profile {name!r}; choose from {PROFILES}")


@lru_cache(maxsize=None)
def _compiled(name: str, n: int):
    import sympy as sp

    u, pieces = _pieces(name)
    out = []
    for lo, hi, expr in pieces:
        f = sp.lambdify(u, sp.diff(expr, u, n), "numpy")
        out.append((lo, hi, f))
    return out


def profile_derivative(name: str, n: int, u) -> np.ndarray:
    """n-th derivative of the named profile at ``u`` (zero outside [-1, 1])."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    with np.errstate(all="ignore"):
        for lo, hi, f in _compiled(name, int(n)):
            mask = (u > lo) & (u < hi)
            if np.any(mask):
                vals = np.broadcast_to(np.asarray(f(u[mask]), dtype=float), (int(mask.sum()),))
                out[mask] = vals
        if name == "plateau":
            out[np.abs(u) == 0.5] = 1.0 if n == 0 else 0.0
        if name == "gaussian" and n == 0:
            out[np.abs(u) == 1.0] = np.exp(-32.0)
    return np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)


@dataclass(frozen=True)
class BumpProfile:
    """F(t) = profile((t - center) / radius), supported in [center - radius, center + radius]."""

    name: str
    center: float
    radius: float

    def __post_init__(self):
        if self.name not in PROFILES:
            raise ValueError(f"unknown profile {self.name!r}; choose from {PROFILES}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def support(self) -> tuple:
        return (self.center - self.radius, self.center + self.radius)

    def __call__(self, t) -> np.ndarray:
        return self.derivative(0, t)

    def derivative(self, n: int, t) -> np.ndarray:
        u = (np.asarray(t, dtype=float) - self.center) / self.radius
        return profile_derivative(self.name, n, u) / self.radius**n
