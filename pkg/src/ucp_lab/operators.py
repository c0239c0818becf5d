"""Dirac-type operators in product form cl(dt)(d/dt + B_t + C_t).

B_t is the self-adjoint tangential part, C_t the skew part, both sampled
per normal slice.  1D slices are fiber points; annulus slices are circles,
with dense slice matrices acting on theta-major flattened slice vectors.
Slice inner products use the (uniform) arc-length weights, so the slice
adjoint is the plain conjugate transpose.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .clifford import CliffordFrame, frame
from .errors import DomainMismatchError
from .fields import AnnulusGrid, Grid1D, SpinorField


def time_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """2nd-order d/dt along axis 0: centered interior, one-sided at the ends."""
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
    return out


@dataclass(eq=False)
class DiracOperator:
    frame: CliffordFrame
    grid: object
    cl_dt: np.ndarray          # (r, r) on Grid1D, (n_theta, r, r) on AnnulusGrid
    B: np.ndarray              # (n, r, r) or (n_t, m, m), self-adjoint slices
    C: np.ndarray              # same shape as B, skew slices
    slice_maker: Optional[Callable[[float], tuple]] = None  # smooth (B, C) source, if any

    @property
    def fiber_rank(self) -> int:
        return self.frame.fiber_rank

    def tangential(self) -> np.ndarray:
        return self.B + self.C

    def apply_cl_dt(self, w: np.ndarray) -> np.ndarray:
        """Pointwise Clifford multiplication by the normal covector."""
        if isinstance(self.grid, AnnulusGrid):
            return np.einsum("oij,...oj->...oi", self.cl_dt, w)
        return np.einsum("ij,...j->...i", self.cl_dt, w)

    def apply_cl_dt_inverse(self, w: np.ndarray) -> np.ndarray:
        # cl(dt)^2 = -I, so the inverse is -cl(dt)
        return -self.apply_cl_dt(w)

    def apply_slices(self, M: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Apply per-slice operators M to field values."""
        if isinstance(self.grid, AnnulusGrid):
            n_t, n_theta = self.grid.n, self.grid.n_theta
            flat = values.reshape(n_t, n_theta * self.fiber_rank)
            out = np.einsum("tmk,tk->tm", M, flat)
            return out.reshape(values.shape)
        return np.einsum("tij,tj->ti", M, values)


def slice_adjoint(M: np.ndarray) -> np.ndarray:
    """Adjoint of per-slice matrices under the uniform slice weights."""
    return np.conj(np.swapaxes(M, -1, -2))


def dirac_apply(op: DiracOperator, u: SpinorField) -> SpinorField:
    """cl(dt)(d/dt + B_t + C_t) u with the 2nd-order time stencil."""
    if u.grid != op.grid:
        raise DomainMismatchError("field grid does not match operator grid")
    du = time_derivative(u.values, op.grid.spacing)
    w = du + op.apply_slices(op.tangential(), u.values)
    return SpinorField(u.grid, op.apply_cl_dt(w))


def product_decompose(raw_slices: np.ndarray, fr: CliffordFrame, grid, cl_dt: np.ndarray,
                      slice_maker=None) -> DiracOperator:
    """Split raw tangential slice operators into self-adjoint and skew parts."""
    raw_slices = np.asarray(raw_slices, dtype=complex)
    if raw_slices.shape[-1] != raw_slices.shape[-2]:
        raise ValueError("slice operators must be square")
    adj = slice_adjoint(raw_slices)
    B = 0.5 * (raw_slices + adj)
    C = 0.5 * (raw_slices - adj)
    return DiracOperator(fr, grid, cl_dt, B, C, slice_maker)


def absorb_homomorphism(op: DiracOperator, R: np.ndarray) -> DiracOperator:
    """Product form of (D + R) for a pointwise fiber homomorphism R.

    R has shape (n, r, r) on Grid1D or (n_t, n_theta, r, r) on AnnulusGrid.
    """
    R = np.asarray(R, dtype=complex)
    r = op.fiber_rank
    if isinstance(op.grid, AnnulusGrid):
        n_t, n_theta = op.grid.n, op.grid.n_theta
        if R.shape != (n_t, n_theta, r, r):
            raise DomainMismatchError(f"homomorphism shape {R.shape} mismatch")
        S_pt = np.einsum("oji,tojk->toik", np.conj(op.cl_dt), R)
        # embed pointwise fiber matrices as block-diagonal slice operators
        S = np.zeros((n_t, n_theta * r, n_theta * r), dtype=complex)
        for o in range(n_theta):
            S[:, o * r:(o + 1) * r, o * r:(o + 1) * r] = S_pt[:, o]
    else:
        if R.shape != (op.grid.n, r, r):
            raise DomainMismatchError(f"homomorphism shape {R.shape} mismatch")
        S = np.einsum("ji,tjk->tik", np.conj(op.cl_dt), R)
    adj = slice_adjoint(S)
    return DiracOperator(op.frame, op.grid, op.cl_dt,
                         op.B + 0.5 * (S + adj), op.C + 0.5 * (S - adj), None)


# ---------------------------------------------------------------------------
# shipped model operators


def _model_bc_1d(T: float, b_amp: float, c_amp: float):
    s1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    s3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    J = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)

    def b_func(t):
        return b_amp * (0.6 * np.cos(2.0 * np.pi * t / T) * s3 + 0.4 * s1)

    def c_func(t):
        return c_amp * np.sin(2.0 * np.pi * t / T) * J

    return b_func, c_func


def model_operator_1d(grid: Grid1D, b_amp: float = 1.0, c_amp: float = 0.5) -> DiracOperator:
    """1D model operator J(d/dt + B_t + C_t) with smooth slice coefficients.

    Operator norms of B_t and C_t stay <= 1 for the default amplitudes.
    """
    fr = frame(1)
    b_func, c_func = _model_bc_1d(float(grid.t[-1] - grid.t[0]), b_amp, c_amp)
    B = np.stack([b_func(t) for t in grid.t])
    C = np.stack([c_func(t) for t in grid.t])
    return DiracOperator(fr, grid, fr.generator(0), B, C,
                         slice_maker=lambda t: (b_func(t), c_func(t)))


def constant_operator_1d(grid: Grid1D, B0: Optional[np.ndarray] = None) -> DiracOperator:
    """Constant-coefficient 1D operator with C = 0 (appendix reference case)."""
    fr = frame(1)
    if B0 is None:
        B0 = np.array([[0.7, 0.2], [0.2, -0.5]], dtype=complex)
    B = np.broadcast_to(B0, (grid.n, 2, 2)).copy()
    C = np.zeros_like(B)
    return DiracOperator(fr, grid, fr.generator(0), B, C,
                         slice_maker=lambda t: (B0, np.zeros((2, 2), dtype=complex)))


def periodic_derivative_matrix(n: int, h: float) -> np.ndarray:
    """Centered-difference d/dtheta on a uniform periodic grid (exactly skew)."""
    D = np.zeros((n, n))
    idx = np.arange(n)
    D[idx, (idx + 1) % n] = 1.0 / (2.0 * h)
    D[idx, (idx - 1) % n] = -1.0 / (2.0 * h)
    return D


def annulus_operator(grid: AnnulusGrid) -> DiracOperator:
    """Euclidean Dirac operator on the annulus in product form.

    In polar coordinates D = cl(dr)(d/dr + B_r) with the tangential part
    obtained by splitting cl(dr)^{-1} D restricted to circles; for the flat
    metric this raw slice operator is (i sigma_3 / r) d/dtheta.
    """
    fr = frame(2)
    g1, g2 = fr.generators
    theta = grid.theta
    cl_dr = (np.cos(theta)[:, None, None] * g1 + np.sin(theta)[:, None, None] * g2)
    D_theta = periodic_derivative_matrix(grid.n_theta, 2.0 * np.pi / grid.n_theta)
    isigma3 = 1j * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    block = np.kron(D_theta, isigma3)
    raw = np.stack([block / grid.radius(i) for i in range(grid.n)])
    return product_decompose(raw, fr, grid, cl_dr)
