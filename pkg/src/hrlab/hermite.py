"""Normalized Hermite functions and their turning-point asymptotics.

The one-dimensional Hermite functions are generated by the three-term
recurrence

    h_0(t) = pi^(-1/4) exp(-t^2/2)
    h_{k+1}(t) = sqrt(2/(k+1)) t h_k(t) - sqrt(k/(k+1)) h_{k-1}(t)

run on a rescaled mantissa so that the Gaussian factor never underflows
before the polynomial part has had a chance to grow.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Rescale the running mantissa whenever it leaves this window.
_RESCALE_HIGH = 1e150
_LOG_PI_QUARTER = -0.25 * np.log(np.pi)


@dataclass
class HermiteBank:
    """Values of h_0, ..., h_{k_max} on a fixed set of abscissae.

    Each value is stored as ``mantissa * exp(log_scale)`` so that very large
    arguments, where h_k is far below the smallest double, stay representable.

    Attributes
    ----------
    k_max : int
        Highest degree stored.
    t : ndarray
        Flattened abscissae.
    mantissa : ndarray, shape (k_max + 1, t.size)
    log_scale : ndarray, shape (k_max + 1, t.size)
    """

    k_max: int
    t: np.ndarray
    mantissa: np.ndarray
    log_scale: np.ndarray

    @property
    def values(self) -> np.ndarray:
        """Plain float values, shape (k_max + 1, t.size); underflow gives 0."""
        with np.errstate(under="ignore", over="ignore"):
            return self.mantissa * np.exp(self.log_scale)

    def row(self, k: int) -> np.ndarray:
        with np.errstate(under="ignore", over="ignore"):
            return self.mantissa[k] * np.exp(self.log_scale[k])

    def log_abs(self, k: int) -> np.ndarray:
        """log|h_k(t)|, finite even where h_k underflows (-inf at exact zeros)."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mantissa[k])) + self.log_scale[k]

    def derivative(self, k: int) -> np.ndarray:
        """h_k'(t) = sqrt(2k) h_{k-1}(t) - t h_k(t)."""
        out = -self.t * self.row(k)
        if k > 0:
            out = out + np.sqrt(2.0 * k) * self.row(k - 1)
        return out


def hermite_bank(k_max: int, t) -> HermiteBank:
    """Evaluate h_0..h_{k_max} at every point of ``t``.

    Parameters
    ----------
    k_max : int
        Highest degree, must be non-negative.
    t : array_like
        Real abscissae, any shape (flattened internally).

    Returns
    -------
    HermiteBank
    """
    if int(k_max) != k_max or k_max < 0:
        raise ValueError(f"degree must be a non-negative integer, got {k_max!r}")
    k_max = int(k_max)
    t = np.asarray(t, dtype=float).ravel()
    if not np.all(np.isfinite(t)):
        raise ValueError("abscissae must be finite")

    n = t.size
    mant = np.empty((k_max + 1, n))
    logs = np.empty((k_max + 1, n))
    scale = _LOG_PI_QUARTER - 0.5 * t * t
    prev = np.zeros(n)
    cur = np.ones(n)
    mant[0] = cur
    logs[0] = scale
    for k in range(k_max):
        nxt = np.sqrt(2.0 / (k + 1)) * t * cur - np.sqrt(k / (k + 1.0)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_HIGH
        if np.any(big):
            factor = np.where(big, np.abs(cur), 1.0)
            cur = cur / factor
            prev = prev / factor
            scale = scale + np.log(factor)
        mant[k + 1] = cur
        logs[k + 1] = scale
    return HermiteBank(k_max, t, mant, logs)


def hermite_eval(k_max: int, t) -> np.ndarray:
    """Normalized Hermite functions h_0, ..., h_{k_max} evaluated at ``t``.

    Returns an array of shape ``(k_max + 1,) + np.shape(t)``.

    Examples
    --------
    >>> float(hermite_eval(0, 0.0)[0])  # pi^(-1/4)
    0.7511255444649425
    """
    t_arr = np.asarray(t, dtype=float)
    bank = hermite_bank(k_max, t_arr)
    return bank.values.reshape((bank.k_max + 1,) + t_arr.shape)


def hermite_function(k: int, t) -> np.ndarray:
    """Single normalized Hermite function h_k at ``t`` (same shape as ``t``)."""
    t_arr = np.asarray(t, dtype=float)
    return hermite_bank(k, t_arr).row(k).reshape(t_arr.shape)


def hermite_tensor_eval(alpha: Sequence[int], x) -> np.ndarray:
    """Tensor-product Hermite function prod_i h_{alpha_i}(x_i).

    ``x`` has shape (..., d) with d = len(alpha).
    """
    alpha = tuple(int(a) for a in alpha)
    x = np.asarray(x, dtype=float)
    d = len(alpha)
    if x.shape[-1] != d:
        raise ValueError(f"point dimension {x.shape[-1]} does not match index length {d}")
    out = np.ones(x.shape[:-1])
    for i, a in enumerate(alpha):
        out = out * hermite_function(a, x[..., i])
    return out


def eigenvalue(alpha: Sequence[int]) -> int:
    """Eigenvalue 2|alpha| + d of the Hermite operator on Phi_alpha."""
    return 2 * sum(int(a) for a in alpha) + len(alpha)


def turning_phase_s(mu: float, t, side: str):
    """Phase integrals of sqrt|mu^2 - tau^2| from the turning point.

    side="minus": s(t) = (t sqrt(mu^2 - t^2) + mu^2 arcsin(t/mu)) / 2, |t| <= mu
    side="plus":  s(t) = (t sqrt(t^2 - mu^2) - mu^2 log((t + sqrt(t^2 - mu^2))/mu)) / 2, t >= mu
    """
    t = np.asarray(t, dtype=float)
    if side == "minus":
        if np.any(np.abs(t) > mu * (1 + 1e-15)):
            raise ValueError("side='minus' requires |t| <= mu")
        tc = np.clip(t, -mu, mu)
        return 0.5 * (tc * np.sqrt(np.maximum(mu * mu - tc * tc, 0.0))
                      + mu * mu * np.arcsin(tc / mu))
    if side == "plus":
        if np.any(t < mu * (1 - 1e-15)):
            raise ValueError("side='plus' requires t >= mu")
        tc = np.maximum(t, mu)
        root = np.sqrt(np.maximum(tc * tc - mu * mu, 0.0))
        return 0.5 * (tc * root - mu * mu * np.log((tc + root) / mu))
    raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")


REGIMES = ("oscillatory", "transition", "decay")


@dataclass
class AsymptoticRegime:
    """Regime tag and predicted envelope for |h_k(t)|.

    ``tag`` is an array of strings drawn from REGIMES; ``magnitude`` is the
    predicted size of |h_k| up to an absolute constant; ``phase`` holds the
    relevant phase integral (s_minus inside, s_plus outside, NaN in the
    transition band).
    """

    k: int
    mu: float
    tag: np.ndarray
    magnitude: np.ndarray
    phase: np.ndarray


def asymptotic_regime(k: int, t) -> AsymptoticRegime:
    """Classify t relative to the turning point mu = sqrt(2k+1).

    Oscillatory when |t| < mu - mu^(-1/3), decaying when |t| > mu + mu^(-1/3),
    transitional in between. Predicted magnitudes are |mu^2 - t^2|^(-1/4),
    mu^(-1/6) and exp(-s_plus) |t^2 - mu^2|^(-1/4) respectively.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"degree must be a non-negative integer, got {k!r}")
    t = np.asarray(t, dtype=float)
    mu = float(np.sqrt(2.0 * k + 1.0))
    width = mu ** (-1.0 / 3.0)
    at = np.abs(t)
    osc = at < mu - width
    dec = at > mu + width
    tag = np.where(osc, REGIMES[0], np.where(dec, REGIMES[2], REGIMES[1]))
    s_minus = np.where(osc, turning_phase_s(mu, np.clip(t, -mu, mu), "minus"), np.nan)
    s_plus = np.where(dec, turning_phase_s(mu, np.maximum(at, mu), "plus"), np.nan)
    gap = np.abs(mu * mu - t * t)
    with np.errstate(divide="ignore", under="ignore"):
        mag_osc = gap ** -0.25
        mag_dec = np.exp(-np.nan_to_num(s_plus)) * gap ** -0.25
    magnitude = np.where(osc, mag_osc, np.where(dec, mag_dec, mu ** (-1.0 / 6.0)))
    phase = np.where(osc, s_minus, np.where(dec, s_plus, np.nan))
    return AsymptoticRegime(int(k), mu, tag, magnitude, phase)
