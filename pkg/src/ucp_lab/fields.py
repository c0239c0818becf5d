"""Grids and sampled spinor fields for the 1D interval and 2D annulus models."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatchError


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    h = t[1] - t[0]
    w = np.full(t.shape, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform grid on [t[0], t[-1]]; slices are single points."""

    t: np.ndarray

    def __post_init__(self):
        if self.t.ndim != 1 or self.t.size < 3:
            raise ValueError("1D grid needs at least 3 samples")
        if self.spacing <= 0:
            raise ValueError("grid spacing must be positive")

    def __eq__(self, other):
        return isinstance(other, Grid1D) and np.array_equal(self.t, other.t)

    def __hash__(self):
        return hash((self.t.size, float(self.t[0]), float(self.t[-1])))

    @classmethod
    def uniform(cls, t_max: float, n: int, t_min: float = 0.0) -> "Grid1D":
        return cls(np.linspace(t_min, t_max, n))

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def spacing(self) -> float:
        return float(self.t[1] - self.t[0])

    def quad_weights(self) -> np.ndarray:
        return trapezoid_weights(self.t)

    def zeros(self, rank: int = 2) -> "SpinorField":
        return SpinorField(self, np.zeros((self.n, rank), dtype=complex))


@dataclass(frozen=True, eq=False)
class AnnulusGrid:
    """Polar annulus: normal coordinate t in [0, T], circles of radius r0 + t."""

    t: np.ndarray
    n_theta: int
    r0: float

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError("inner radius must be positive")

    def __eq__(self, other):
        return (isinstance(other, AnnulusGrid) and self.n_theta == other.n_theta
                and self.r0 == other.r0 and np.array_equal(self.t, other.t))

    def __hash__(self):
        return hash((self.t.size, self.n_theta, self.r0, float(self.t[-1])))

    @classmethod
    def uniform(cls, t_max: float, n_t: int, n_theta: int, r0: float = 1.0) -> "AnnulusGrid":
        return cls(np.linspace(0.0, t_max, n_t), n_theta, r0)

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def spacing(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.n_theta) * (2.0 * np.pi / self.n_theta)

    def radius(self, i: int) -> float:
        return self.r0 + float(self.t[i])

    def radii(self) -> np.ndarray:
        return self.r0 + self.t

    def slice_weights(self, i: int) -> np.ndarray:
        # uniform arc-length weights on the circle of radius r0 + t_i
        return np.full(self.n_theta, self.radius(i) * 2.0 * np.pi / self.n_theta)

    def quad_weights(self) -> np.ndarray:
        wt = trapezoid_weights(self.t)
        return wt[:, None] * (self.radii()[:, None] * (2.0 * np.pi / self.n_theta))

    def zeros(self, rank: int = 2) -> "SpinorField":
        return SpinorField(self, np.zeros((self.n, self.n_theta, rank), dtype=complex))


@dataclass(frozen=True, eq=False)
class FlatDomain:
    """Unstructured point set with quadrature weights (adapter for lattice fields)."""

    weights: np.ndarray

    def __eq__(self, other):
        return isinstance(other, FlatDomain) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.weights.size, float(self.weights[0])))

    @property
    def n(self) -> int:
        return self.weights.size

    def quad_weights(self) -> np.ndarray:
        return self.weights

    def zeros(self, rank: int = 2) -> "SpinorField":
        return SpinorField(self, np.zeros((self.n, rank), dtype=complex))


@dataclass(eq=False)
class SpinorField:
    """Complex multi-component field sampled on a grid (fiber axis last)."""

    grid: object
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        expected = self._point_shape()
        if self.values.shape[:-1] != expected:
            raise DomainMismatchError(
                f"value array shape {self.values.shape} does not match grid shape {expected}"
            )

    def _point_shape(self):
        if isinstance(self.grid, AnnulusGrid):
            return (self.grid.n, self.grid.n_theta)
        return (self.grid.n,)

    @property
    def rank(self) -> int:
        return self.values.shape[-1]

    def fiber_abs(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=-1))

    def sup_norm(self) -> float:
        return float(np.max(self.fiber_abs())) if self.values.size else 0.0

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.values.copy())

    def __add__(self, other: "SpinorField") -> "SpinorField":
        self._check_same(other)
        return SpinorField(self.grid, self.values + other.values)

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        self._check_same(other)
        return SpinorField(self.grid, self.values - other.values)

    def __mul__(self, c) -> "SpinorField":
        return SpinorField(self.grid, self.values * c)

    __rmul__ = __mul__

    def _check_same(self, other: "SpinorField"):
        if self.grid is not other.grid and self.grid != other.grid:
            raise DomainMismatchError("fields live on different grids")


def same_grid(u: SpinorField, v: SpinorField) -> None:
    u._check_same(v)


def l2_inner(u: SpinorField, v: SpinorField) -> complex:
    """Domain L2 product, linear in u, conjugated in v."""
    same_grid(u, v)
    w = u.grid.quad_weights()
    return complex(np.sum(w * np.sum(u.values * np.conj(v.values), axis=-1)))


def l2_norm(u: SpinorField) -> float:
    return float(np.sqrt(max(l2_inner(u, u).real, 0.0)))
