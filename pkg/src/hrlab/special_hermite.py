"""Laguerre functions, special Hermite functions and twisted convolution.

Points of C^d are stored as real vectors z = (x, y) in R^{2d}, z = x + iy.
"""
from __future__ import annotations

from math import comb, factorial
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .fitting import RateFit, fit_power_law
from .grid import GridFunction
from .hermite import hermite_bank
from .phase_twisted import symplectic_matrix
from .projection import RieszWeighting, compositions

_RESCALE_HIGH = 1e150


def laguerre_bank(k_max: int, alpha: float, x) -> tuple:
    """(mantissa, log_scale) for L_j^alpha(x) e^{-x/2}, j = 0..k_max.

    Values are ``mantissa * exp(log_scale)``; the split keeps large x finite.
    """
    if int(k_max) != k_max or k_max < 0:
        raise ValueError("degree must be a non-negative integer")
    x = np.asarray(x, dtype=float).ravel()
    k_max = int(k_max)
    mant = np.empty((k_max + 1, x.size))
    logs = np.empty((k_max + 1, x.size))
    scale = -0.5 * x
    prev = np.zeros(x.size)
    cur = np.ones(x.size)
    mant[0], logs[0] = cur, scale
    for j in range(k_max):
        if j == 0:
            nxt = 1.0 + alpha - x
        else:
            nxt = ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_HIGH
        if np.any(big):
            f = np.where(big, np.abs(cur), 1.0)
            cur, prev = cur / f, prev / f
            scale = scale + np.log(f)
        mant[j + 1], logs[j + 1] = cur, scale
    return mant, logs


def laguerre_eval(k: int, alpha: float, t):
    """Laguerre polynomial L_k^alpha(t) by the three-term recurrence."""
    t = np.asarray(t, dtype=float)
    mant, logs = laguerre_bank(k, alpha, t)
    with np.errstate(over="ignore"):
        out = mant[k] * np.exp(logs[k] + 0.5 * t.ravel())
    out = out.reshape(t.shape)
    return float(out) if out.ndim == 0 else out


def laguerre_functions_upto(k_max: int, alpha: float, x) -> np.ndarray:
    """L_j^alpha(x) e^{-x/2} for j = 0..k_max, shape (k_max + 1,) + shape(x)."""
    x = np.asarray(x, dtype=float)
    mant, logs = laguerre_bank(k_max, alpha, x)
    with np.errstate(under="ignore", over="ignore"):
        return (mant * np.exp(logs)).reshape((k_max + 1,) + x.shape)


def _half_dim(z) -> tuple:
    z = np.asarray(z, dtype=float)
    if z.ndim == 0 or z.shape[-1] % 2:
        raise ValueError("points must have an even trailing dimension 2d")
    return z, z.shape[-1] // 2


def phi_k(k: int, d: int, z):
    """phi_k(z) = (2 pi)^{-d} L_k^{d-1}(|z|^2 / 2) e^{-|z|^2 / 4}."""
    z, dd = _half_dim(z)
    if dd != d:
        raise ValueError(f"points must lie in R^{2 * d}")
    r2 = np.sum(z * z, axis=-1)
    out = (2 * np.pi) ** (-d) * laguerre_functions_upto(k, d - 1, 0.5 * r2)[k]
    return float(out) if np.ndim(out) == 0 else out


def phi_norm(k: int, d: int) -> float:
    """Closed form ||phi_k||_2 = (2 pi)^{-d/2} sqrt(#{|alpha| = k})."""
    return (2 * np.pi) ** (-d / 2) * np.sqrt(comb(k + d - 1, d - 1))


def phi_norm_quadrature(k: int, d: int) -> float:
    """||phi_k||_2 over R^{2d} by radial quadrature.

    With u = |z|^2 / 2 the squared norm is
    |S^{2d-1}| (2 pi)^{-2d} 2^{d-1} int_0^inf u^{d-1} L_k^{d-1}(u)^2 e^{-u} du,
    which a (k + 1)-point generalized Gauss-Laguerre rule integrates exactly.
    """
    u, w = special.roots_genlaguerre(k + 1, d - 1)
    lag = laguerre_eval(k, d - 1, u)
    sphere = 2 * np.pi ** d / factorial(d - 1)  # area of the unit sphere in R^{2d}
    return float(np.sqrt(sphere * (2 * np.pi) ** (-2 * d) * 2 ** (d - 1) * np.dot(w, lag**2)))


_FW_CHUNK = 2048


def _fw_1d(a: int, b: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(2 pi)^{-1/2} int e^{i x xi} h_a(xi - y/2) h_b(xi + y/2) d xi.

    Trapezoid rule on a uniform grid. The integrand decays like a Gaussian
    outside the turning points of both factors and its spectrum lies within
    |x| + sqrt(2a+1) + sqrt(2b+1) up to Gaussian tails, so a step resolving
    that band (plus a margin of 10 on each factor) is spectrally accurate.
    """
    ra = np.sqrt(2.0 * a + 1.0) + 10.0
    rb = np.sqrt(2.0 * b + 1.0) + 10.0
    out = np.empty(x.size, dtype=complex)
    for i in range(0, x.size, _FW_CHUNK):
        xs, ys = x[i:i + _FW_CHUNK], y[i:i + _FW_CHUNK]
        lo = min(np.min(0.5 * ys - ra), np.min(-0.5 * ys - rb))
        hi = max(np.max(0.5 * ys + ra), np.max(-0.5 * ys + rb))
        h = 0.9 * 2 * np.pi / (np.max(np.abs(xs)) + ra + rb)
        xi = np.arange(lo, hi + h, h)
        shape = (xs.size, xi.size)
        ha = hermite_bank(a, (xi[None, :] - 0.5 * ys[:, None]).ravel()).row(a).reshape(shape)
        hb = hermite_bank(b, (xi[None, :] + 0.5 * ys[:, None]).ravel()).row(b).reshape(shape)
        out[i:i + _FW_CHUNK] = h * np.sum(np.exp(1j * xs[:, None] * xi[None, :]) * ha * hb, axis=1)
    return out / np.sqrt(2 * np.pi)


def fourier_wigner(alpha: Sequence[int], beta: Sequence[int], z):
    """Special Hermite function Phi_{alpha,beta}(x + iy).

    (2 pi)^{-d/2} int e^{i<x,xi>} Phi_alpha(xi - y/2) Phi_beta(xi + y/2) d xi,
    evaluated coordinatewise by a band-resolving trapezoid rule on top of the
    stable Hermite recurrence.
    """
    alpha = tuple(int(a) for a in alpha)
    beta = tuple(int(b) for b in beta)
    z, d = _half_dim(z)
    if len(alpha) != d or len(beta) != d:
        raise ValueError("index length must equal d")
    if min(alpha + beta) < 0:
        raise ValueError("indices must be non-negative")
    shape = z.shape[:-1]
    zf = z.reshape(-1, 2 * d)
    out = np.ones(zf.shape[0], dtype=complex)
    for j in range(d):
        out = out * _fw_1d(alpha[j], beta[j], zf[:, j], zf[:, d + j])
    out = out.reshape(shape)
    return complex(out) if out.ndim == 0 else out


def _check_uniform_centered(axis: np.ndarray) -> float:
    h = np.diff(axis)
    if axis.size < 2 or not np.allclose(h, h[0], rtol=1e-10, atol=0):
        raise ValueError("twisted convolution needs uniform axes")
    c = (axis.size - 1) / 2
    if axis.size % 2 == 0 or abs(axis[int(c)]) > 1e-12 * abs(h[0]):
        raise ValueError("twisted convolution needs an odd, origin-centred axis")
    return float(h[0])


def twisted_convolution(f: GridFunction, g: GridFunction) -> GridFunction:
    """Discrete f x g(z) = int f(z - w) g(w) e^{-(i/2)<z, S w>} dw.

    The twist is e^{(i/2)<z, S z'>} with z' = z - w the argument of f, which
    equals e^{-(i/2)<z, S w>} because <z, S z> = 0. With this sign,
    f x phi_k has kernel phi_k(z - z') e^{(i/2)<z, S z'>}, the spectral
    projection onto {Phi_{alpha,beta} : |beta| = k}. Grids must be identical,
    uniform and origin-centred; f is taken as zero off the grid.
    """
    if not f.same_grid(g):
        raise ValueError("grid mismatch")
    if f.dim % 2:
        raise ValueError("twisted convolution acts on R^{2d}")
    d = f.dim // 2
    hs = [_check_uniform_centered(a) for a in f.axes]
    S = symplectic_matrix(d)
    shape = f.shape
    pts = f.points().reshape(-1, f.dim)
    gw = (g.values * np.prod(hs)).ravel()
    # zero-padded copy of f: grid index j of z - w sits at j + n - 1 in fp
    pad = [(n - 1, n - 1) for n in shape]
    fp = np.pad(np.asarray(f.values, dtype=complex), pad)
    idx = np.indices(shape).reshape(f.dim, -1)
    out = np.empty(pts.shape[0], dtype=complex)
    for m in range(pts.shape[0]):
        shift = [idx[i, m] - idx[i] + (3 * (shape[i] - 1)) // 2 for i in range(f.dim)]
        fz = fp[tuple(shift)]
        twist = np.exp(-0.5j * (pts @ (S.T @ pts[m])))
        out[m] = np.sum(fz * gw * twist)
    return GridFunction(f.axes, out.reshape(shape))


def _level_k(lam, d) -> int:
    if int(lam) != lam or lam < d or (int(lam) - d) % 2:
        raise ValueError(f"lambda={lam} is not of the form 2k+d with d={d}")
    return (int(lam) - d) // 2


def special_projection_kernel(lam: int, d: int, z, zp):
    """phi_k(z - z') e^{(i/2)<z, S z'>}, k = (lam - d)/2."""
    k = _level_k(lam, d)
    z, _ = _half_dim(z)
    zp, _ = _half_dim(zp)
    S = symplectic_matrix(d)
    twist = np.exp(0.5j * np.einsum("...i,ij,...j->...", z, S, zp))
    out = phi_k(k, d, z - zp) * twist
    return complex(out) if np.ndim(out) == 0 else out


def eigenfunction_projection_sum(k: int, d: int, z, zp, alpha_max: int = 60) -> complex:
    """sum over |beta| = k and alpha in {0..alpha_max}^d of Phi_{alpha,beta}(z) conj(Phi_{alpha,beta}(z')).

    A truncation of the eigenfunction expansion of the level-k twisted
    projection kernel. The alpha sum factorizes over coordinates; its tail
    decays like a Gaussian once alpha_max exceeds |z|^2 and |z'|^2.
    """
    z, dz = _half_dim(np.asarray(z, dtype=float))
    zp, _ = _half_dim(np.asarray(zp, dtype=float))
    if dz != d:
        raise ValueError(f"points must lie in R^{2 * d}")
    k = int(k)
    # table[j, b] = sum_a Phi_{a,b}(z_j) conj(Phi_{a,b}(z'_j)) in coordinate j
    table = np.zeros((d, k + 1), dtype=complex)
    for j in range(d):
        u = np.array([z[j], z[d + j]])
        up = np.array([zp[j], zp[d + j]])
        for b in range(k + 1):
            table[j, b] = sum(fourier_wigner((a,), (b,), u)
                              * np.conj(fourier_wigner((a,), (b,), up))
                              for a in range(alpha_max + 1))
    total = 0j
    for beta in compositions(k, d):
        total += np.prod([table[j, b] for j, b in enumerate(beta)])
    return complex(total)


def twisted_kernels_upto(k_max: int, d: int, z, zp) -> np.ndarray:
    """Pi^L_{2j+d}(z, z') for j = 0..k_max."""
    z, _ = _half_dim(z)
    zp, _ = _half_dim(zp)
    v = z - zp
    S = symplectic_matrix(d)
    twist = np.exp(0.5j * np.einsum("...i,ij,...j->...", z, S, zp))
    lf = laguerre_functions_upto(k_max, d - 1, 0.5 * np.sum(v * v, axis=-1))
    return (2 * np.pi) ** (-d) * lf * twist


def bochner_riesz_kernel_L(lam: float, delta: float, d: int, z, zp):
    """sum over lambda' in 2N_0+d of (1 - lambda'/lambda)_+^delta Pi^L_lambda'(z, z')."""
    w = RieszWeighting(lam, delta)
    if lam <= d:
        return 0j
    k_top = int(np.ceil((lam - d) / 2.0))
    kernels = twisted_kernels_upto(k_top, d, z, zp)
    wts = w.weight(2 * np.arange(k_top + 1) + d)
    out = np.tensordot(wts, kernels, axes=(0, 0))
    return complex(out) if np.ndim(out) == 0 else out


def twisted_smoothed_spectral_sum(eta_hat: Callable, lam: float, z, zp, d: int,
                                  cap: int | None = None) -> complex:
    """sum over lambda' in 2N_0+d of eta_hat(lam - lambda') Pi^L_lambda'(z, z').

    Truncated once the weights fall below 1e-14 of their maximum past lam.
    """
    k_max = _truncation(eta_hat, lam, d, 1.0, cap)
    lams = 2 * np.arange(k_max + 1) + d
    wts = eta_hat(lam - lams)
    kernels = twisted_kernels_upto(k_max, d, z, zp)
    return complex(np.tensordot(wts, kernels, axes=(0, 0)))


def _truncation(eta_hat: Callable, lam: float, d: int, scale: float, cap: int | None) -> int:
    """Largest level index whose weight eta_hat((lam - lambda') * scale) still matters."""
    k0 = max(int(np.ceil((lam - d) / 2.0)), 0)
    cap = cap or k0 + 4000
    lams = 2 * np.arange(cap + 1) + d
    w = np.abs(eta_hat((lam - lams) * scale))
    big = np.nonzero(w >= 1e-14 * w.max())[0]
    last = int(big[-1])
    if last >= cap - 1:
        raise RuntimeError(f"spectral sum not truncated by level cap {cap}")
    return last + 1


def sup_kernel_bound_L(lambda_list, d: int, n_radial: int = 4001) -> RateFit:
    """Fit max_z |Pi^L_lambda(z, 0)| = max_z |phi_k(z)| against lambda."""
    pts = []
    for lam in lambda_list:
        k = _level_k(lam, d)
        r = np.linspace(0.0, 2.0 * np.sqrt(lam) + 6.0, n_radial)
        vals = (2 * np.pi) ** (-d) * np.abs(laguerre_functions_upto(k, d - 1, 0.5 * r * r)[k])
        pts.append((lam, float(vals.max())))
    return fit_power_law(pts)
