"""Zeroth-order perturbations P(u) and the pointwise admissibility criterion.

Shipped kinds all satisfy P(0) = 0 exactly:
  pointwise   P(u)(x) = <u(x), a(x)> u(x)
  kernel      P(u)(x) = |int k(x, z) u(z) dz| u(x)
  rank-one    P(u)(x) = <u, a>_{L2} a(x)
  matrix      P(u)(x) = M(x) u(x)        (linear bundle map, used by the
                                          torus linearization bookkeeping)
  zero        P(u) = 0
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .clifford import fiber_inner
from .errors import DomainMismatchError
from .fields import Grid1D, SpinorField, l2_inner, same_grid


@dataclass(eq=False)
class Perturbation:
    kind: str
    a: Optional[SpinorField] = None
    kernel: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None

    @classmethod
    def zero(cls) -> "Perturbation":
        return cls("zero")

    @classmethod
    def pointwise(cls, a: SpinorField) -> "Perturbation":
        return cls("pointwise", a=a)

    @classmethod
    def kernel_nonlocal(cls, a_grid_field: SpinorField, kernel: np.ndarray) -> "Perturbation":
        # kernel sampled as k[x, z] on the (flattened) grid of the carrier field
        return cls("kernel", a=a_grid_field, kernel=np.asarray(kernel, dtype=complex))

    @classmethod
    def rank_one(cls, a: SpinorField) -> "Perturbation":
        return cls("rank-one", a=a)

    @classmethod
    def matrix_field(cls, carrier: SpinorField, matrix: np.ndarray) -> "Perturbation":
        return cls("matrix", a=carrier, matrix=np.asarray(matrix, dtype=complex))


def eval_perturbation(P: Perturbation, u: SpinorField) -> SpinorField:
    if P.kind == "zero":
        return SpinorField(u.grid, np.zeros_like(u.values))
    if P.a is not None:
        same_grid(P.a, u)
    if P.kind == "pointwise":
        omega = fiber_inner(u.values, P.a.values)
        return SpinorField(u.grid, omega[..., None] * u.values)
    if P.kind == "kernel":
        w = u.grid.quad_weights().reshape(-1)
        flat = u.values.reshape(-1, u.rank)
        integral = P.kernel @ (w[:, None] * flat)
        omega = np.sqrt(np.sum(np.abs(integral) ** 2, axis=-1)).reshape(u.values.shape[:-1])
        return SpinorField(u.grid, omega[..., None] * u.values)
    if P.kind == "rank-one":
        return SpinorField(u.grid, l2_inner(u, P.a) * P.a.values)
    if P.kind == "matrix":
        return SpinorField(u.grid, np.einsum("...ij,...j->...i", P.matrix, u.values))
    raise ValueError(f"unknown perturbation kind {P.kind!r}")


@dataclass
class AdmissibilityResult:
    admissible: bool
    c0: Optional[float]
    reason: str = ""

    def __bool__(self) -> bool:
        return self.admissible


def admissibility_bound(P: Perturbation, u: SpinorField,
                        region: Optional[np.ndarray] = None) -> AdmissibilityResult:
    """Smallest sampled C0 with |P(u)(x)| <= C0 |u(x)| on the region.

    Points with u(x) = 0 must have P(u)(x) = 0, otherwise the verdict is
    non-admissible (a verdict, not an error).
    """
    pu = eval_perturbation(P, u)
    mag_u = u.fiber_abs().reshape(-1)
    mag_p = pu.fiber_abs().reshape(-1)
    if region is not None:
        region = np.asarray(region, dtype=bool).reshape(-1)
        mag_u, mag_p = mag_u[region], mag_p[region]
    zero = mag_u == 0.0
    if np.any(mag_p[zero] > 0.0):
        idx = int(np.argmax(mag_p * zero))
        return AdmissibilityResult(False, None,
                                   f"P(u) nonzero at sample {idx} where u vanishes")
    if np.all(zero):
        return AdmissibilityResult(True, 0.0, "u vanishes on the region")
    c0 = float(np.max(mag_p[~zero] / mag_u[~zero]))
    return AdmissibilityResult(True, c0)


@dataclass
class UcpConditionResult:
    verdict: str            # "condition-i" | "condition-ii" | "neither"
    holds_i: bool
    holds_ii: bool
    c0: Optional[float] = None


def ucp_condition_check(a: SpinorField, u: SpinorField, zero_tol: float = 1e-12,
                        run_length: int = 3) -> UcpConditionResult:
    """Which continuation condition holds for the fixed spinor a and solution u.

    (i)  a has no zero run of >= run_length consecutive samples,
    (ii) |a(x)| <= C0 |u(x)| everywhere on the grid,
    else neither.
    """
    same_grid(a, u)
    mag_a = a.fiber_abs().reshape(-1)
    mag_u = u.fiber_abs().reshape(-1)

    holds_i = True
    run = 0
    for m in mag_a:
        run = run + 1 if m < zero_tol else 0
        if run >= run_length:
            holds_i = False
            break

    zero_u = mag_u == 0.0
    holds_ii = not np.any(mag_a[zero_u] > zero_tol)
    c0 = None
    if holds_ii:
        active = ~zero_u & (mag_a > 0.0)
        c0 = float(np.max(mag_a[active] / mag_u[active])) if active.any() else 0.0

    if holds_i:
        return UcpConditionResult("condition-i", True, holds_ii, c0)
    if holds_ii:
        return UcpConditionResult("condition-ii", False, True, c0)
    return UcpConditionResult("neither", False, False, None)


def integrate_zero_data(op, P: Perturbation, u0: Optional[np.ndarray] = None,
                        steps_per_node: int = 1) -> SpinorField:
    """March D u + P(u) = 0 on the operator grid by RK4 from slice data u0.

    The tangential slice coefficients come from the operator's smooth
    slice_maker.  Nonlocal perturbation kinds see the current full-grid
    state (zero ahead of the front), which is exact for zero data.
    """
    grid: Grid1D = op.grid
    if not isinstance(grid, Grid1D):
        raise DomainMismatchError("initial-value integration is 1D only")
    if op.slice_maker is None:
        raise ValueError("operator carries no smooth slice coefficients")
    rank = op.fiber_rank
    values = np.zeros((grid.n, rank), dtype=complex)
    if u0 is not None:
        values[0] = np.asarray(u0, dtype=complex)
    cl_inv = -op.cl_dt  # cl(dt)^{-1}

    def rhs(t, y, current):
        b, c = op.slice_maker(t)
        field = SpinorField(grid, current)
        p_here = _interp_row(eval_perturbation(P, field).values, grid, t)
        return -(b + c) @ y - cl_inv @ p_here

    h = grid.spacing / steps_per_node
    for i in range(grid.n - 1):
        y = values[i]
        t = grid.t[i]
        for _ in range(steps_per_node):
            k1 = rhs(t, y, values)
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1, values)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2, values)
            k4 = rhs(t + h, y + h * k3, values)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        values[i + 1] = y
    return SpinorField(grid, values)


def _interp_row(values: np.ndarray, grid: Grid1D, t: float) -> np.ndarray:
    x = (t - grid.t[0]) / grid.spacing
    i = int(np.clip(np.floor(x), 0, grid.n - 2))
    lam = x - i
    return (1.0 - lam) * values[i] + lam * values[i + 1]
