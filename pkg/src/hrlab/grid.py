"""Tensor-product grids and functions sampled on them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights for a (possibly non-uniform) 1D axis."""
    axis = np.asarray(axis, dtype=float)
    if axis.size == 1:
        return np.ones(1)
    dx = np.diff(axis)
    w = np.zeros(axis.size)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w


def symmetric_axis(half_width: float, n: int) -> np.ndarray:
    """Uniform axis of ``n`` points on [-half_width, half_width]."""
    return np.linspace(-half_width, half_width, int(n))


@dataclass
class GridFunction:
    """Values of a function on the tensor grid ``axes[0] x axes[1] x ...``.

    ``values`` has shape ``tuple(len(a) for a in axes)``. ``flags`` collects
    diagnostics raised while producing the function (e.g. undersampling).
    """

    axes: tuple
    values: np.ndarray
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        shape = tuple(a.size for a in self.axes)
        self.values = np.asarray(self.values)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {shape}")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def weights(self) -> np.ndarray:
        w = np.ones(())
        for a in self.axes:
            w = np.multiply.outer(w, trapezoid_weights(a))
        return w

    def points(self) -> np.ndarray:
        """Grid points as an array of shape ``shape + (dim,)``."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def same_grid(self, other: "GridFunction") -> bool:
        return (len(self.axes) == len(other.axes)
                and all(a.shape == b.shape and np.array_equal(a, b)
                        for a, b in zip(self.axes, other.axes)))

    def inner(self, other: "GridFunction") -> complex:
        """Discrete <self, other> = sum self * conj(other) * w."""
        if not self.same_grid(other):
            raise ValueError("grid mismatch")
        return np.sum(self.values * np.conj(other.values) * self.weights())

    def norm(self, p=2.0) -> float:
        a = np.abs(self.values)
        if np.isinf(p):
            return float(a.max()) if a.size else 0.0
        return float(np.sum(a ** p * self.weights()) ** (1.0 / p))

    def with_values(self, values, flags=None) -> "GridFunction":
        return GridFunction(self.axes, values, list(flags or []))

    @classmethod
    def from_callable(cls, func, axes) -> "GridFunction":
        g = cls(tuple(axes), np.zeros(tuple(len(a) for a in axes)))
        return g.with_values(func(g.points()))
