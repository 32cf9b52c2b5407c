"""Least-squares power-law fits in log-log coordinates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class RateFit:
    """Result of fitting ``value ~ C * lambda**slope``.

    ``lambdas`` and ``values`` keep the raw points so the fit can be audited.
    """

    slope: float
    intercept: float
    r2: float
    lambdas: tuple
    values: tuple

    @property
    def n(self) -> int:
        return len(self.lambdas)

    def within(self, expected: float, tol: float) -> bool:
        return abs(self.slope - expected) <= tol


def fit_power_law(points: Iterable) -> RateFit:
    """Fit log(value) = slope * log(lambda) + intercept.

    Parameters
    ----------
    points : iterable of (lambda, value)
        Both entries must be positive; at least two distinct lambdas.

    Returns
    -------
    RateFit
    """
    pts = [(float(l), float(v)) for l, v in points]
    if len(pts) < 2 or len({l for l, _ in pts}) < 2:
        raise ValueError("power-law fit needs at least two distinct lambda values")
    lam = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    if np.any(lam <= 0) or np.any(val <= 0) or not np.all(np.isfinite(val)):
        raise ValueError("power-law fit needs positive finite lambdas and values")
    x, y = np.log(lam), np.log(val)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return RateFit(float(slope), float(intercept), r2, tuple(lam), tuple(val))
