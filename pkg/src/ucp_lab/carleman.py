"""Carleman-weighted norms, inequality ratio sweeps, the continuation decay
bound, and the substituted-variable J-term decomposition.

The weight is exp(R(T-t)^2).  All weighted integrals are evaluated in
log-space (shifted exponentials) so ratios stay finite for large R.
Quadrature is trapezoid in the normal coordinate times the slice measure.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (DomainMismatchError, NonAdmissibleError, PreconditionError,
                     SupportConditionError)
from .fields import AnnulusGrid, Grid1D, SpinorField
from .operators import DiracOperator, dirac_apply, time_derivative
from .perturbations import Perturbation, admissibility_bound, eval_perturbation

SUPPORT_TOL = 1e-12
MEASURED_FLOOR = 1e-20  # solver noise floor below which a measured mass counts as zero


def smoothstep(x):
    """Quintic smoothstep: 0 for x <= 0, 1 for x >= 1, C^2 at the junctions."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def smoothstep_derivative(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    x = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * x * x * (1.0 - x) ** 2, 0.0)


@dataclass(frozen=True)
class CarlemanGeometry:
    """Annular region [0, T] with its slice measure and cutoff plateau."""

    grid: object
    plateau: tuple = (0.8, 0.9)

    def __post_init__(self):
        lo, hi = self.plateau
        if not 0.0 < lo < hi < 1.0:
            raise ValueError("plateau fractions must increase strictly inside (0,1)")
        if self.T <= 0:
            raise ValueError("horizon T must be positive")

    @classmethod
    def interval(cls, T: float, n: int, plateau=(0.8, 0.9)) -> "CarlemanGeometry":
        return cls(Grid1D.uniform(T, n), plateau)

    @classmethod
    def annulus(cls, T: float, n_t: int, n_theta: int, r0: float = 1.0,
                plateau=(0.8, 0.9)) -> "CarlemanGeometry":
        return cls(AnnulusGrid.uniform(T, n_t, n_theta, r0), plateau)

    @property
    def T(self) -> float:
        return float(self.grid.t[-1])

    def normal_profile(self, values_ndim: int) -> np.ndarray:
        """T - t broadcast against a value array of the given ndim."""
        prof = self.T - self.grid.t
        return prof.reshape((self.grid.n,) + (1,) * (values_ndim - 1))


def bump_cutoff(geom: CarlemanGeometry, t):
    """Cutoff phi: 1 up to 0.8T, 0 from 0.9T, quintic smoothstep between."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-15) or np.any(t > geom.T * (1 + 1e-15)):
        raise ValueError("normal coordinate outside [0, T]")
    lo, hi = geom.plateau
    return 1.0 - smoothstep((t - lo * geom.T) / ((hi - lo) * geom.T))


def bump_cutoff_derivative(geom: CarlemanGeometry, t):
    t = np.asarray(t, dtype=float)
    lo, hi = geom.plateau
    width = (hi - lo) * geom.T
    return -smoothstep_derivative((t - lo * geom.T) / width) / width


def _check_domain(geom: CarlemanGeometry, v: SpinorField):
    if v.grid != geom.grid:
        raise DomainMismatchError("field does not live on the Carleman geometry grid")


def log_weighted_l2(v: SpinorField, R: float, geom: CarlemanGeometry) -> float:
    """log of int exp(R(T-t)^2) |v|^2 dy dt  (-inf for v = 0)."""
    _check_domain(geom, v)
    if R < 0:
        raise ValueError("weight parameter R must be nonnegative")
    w = geom.grid.quad_weights()
    dens = w * np.sum(np.abs(v.values) ** 2, axis=-1)
    expo_full = np.broadcast_to(
        (R * (geom.T - geom.grid.t) ** 2).reshape((geom.grid.n,) + (1,) * (dens.ndim - 1)),
        dens.shape,
    )
    mask = dens > 0.0
    if not mask.any():
        return -math.inf
    return float(logsumexp(expo_full[mask], b=dens[mask]))


def weighted_l2(v: SpinorField, R: float, geom: CarlemanGeometry) -> float:
    lg = log_weighted_l2(v, R, geom)
    return 0.0 if lg == -math.inf else math.exp(lg)


@dataclass
class CarlemanReport:
    R: float
    lhs: float
    rhs: float
    ratio: float                 # R * lhs / rhs; nan when rhs = 0 contractually
    constant_estimate: float
    c0: Optional[float] = None   # admissibility constant when perturbed
    violation: bool = False      # rhs = 0 with lhs > 0


def _support_check(v: SpinorField, geom: CarlemanGeometry):
    """|v| must vanish (to tolerance) on the last 5% of slices."""
    sup = v.sup_norm()
    if sup == 0.0:
        return
    t = geom.grid.t
    tail = t > 0.95 * geom.T
    mag = v.fiber_abs()
    tail_sup = float(np.max(mag[tail])) if tail.any() else 0.0
    if tail_sup >= SUPPORT_TOL * sup:
        raise SupportConditionError(
            f"field magnitude {tail_sup:.3e} on the last 5% of slices exceeds "
            f"{SUPPORT_TOL:.0e} x sup|v|"
        )


def _ratio_report(v: SpinorField, dv: SpinorField, R: float, geom: CarlemanGeometry,
                  c0: Optional[float] = None) -> CarlemanReport:
    log_lhs = log_weighted_l2(v, R, geom)
    log_rhs = log_weighted_l2(dv, R, geom)
    lhs = 0.0 if log_lhs == -math.inf else math.exp(log_lhs)
    rhs = 0.0 if log_rhs == -math.inf else math.exp(log_rhs)
    if log_rhs == -math.inf:
        if log_lhs == -math.inf:
            return CarlemanReport(R, 0.0, 0.0, math.nan, math.nan, c0)
        return CarlemanReport(R, lhs, 0.0, math.inf, math.inf, c0, violation=True)
    ratio = R * math.exp(log_lhs - log_rhs)
    return CarlemanReport(R, lhs, rhs, ratio, ratio, c0)


def carleman_ratio(op: DiracOperator, v: SpinorField, R: float,
                   geom: CarlemanGeometry) -> CarlemanReport:
    _check_domain(geom, v)
    _support_check(v, geom)
    return _ratio_report(v, dirac_apply(op, v), R, geom)


def perturbed_carleman_ratio(op: DiracOperator, P: Perturbation, v: SpinorField,
                             R: float, geom: CarlemanGeometry) -> CarlemanReport:
    _check_domain(geom, v)
    _support_check(v, geom)
    adm = admissibility_bound(P, v)
    if not adm:
        raise NonAdmissibleError(f"perturbation not admissible on the region: {adm.reason}")
    dv = dirac_apply(op, v) + eval_perturbation(P, v)
    return _ratio_report(v, dv, R, geom, c0=adm.c0)


# ---------------------------------------------------------------------------
# samplers and sweeps


def cutoff_bump_sampler(geom: CarlemanGeometry, rank: int = 2,
                        max_bumps: int = 3) -> Callable:
    """Random smooth bumps, cutoff on the outer side and collared to vanish
    at the inner slice (the class the inequality quantifies over)."""
    grid = geom.grid
    T = geom.T
    t = grid.t
    phi = bump_cutoff(geom, t)
    collar = smoothstep(t / (0.15 * T))

    def sample(rng: np.random.Generator) -> SpinorField:
        profile = np.zeros(grid.n)
        for _ in range(int(rng.integers(1, max_bumps + 1))):
            mu = rng.uniform(0.25 * T, 0.65 * T)
            sig = rng.uniform(T / 14.0, T / 7.0)
            profile += rng.uniform(0.3, 1.0) * np.exp(-((t - mu) ** 2) / (2.0 * sig ** 2))
        profile *= phi * collar
        direction = rng.standard_normal(rank) + 1j * rng.standard_normal(rank)
        direction /= np.linalg.norm(direction)
        if isinstance(grid, AnnulusGrid):
            m = int(rng.integers(0, 4))
            angular = np.exp(1j * m * grid.theta)
            values = profile[:, None, None] * angular[None, :, None] * direction
        else:
            values = profile[:, None] * direction
        return SpinorField(grid, values)

    return sample


@dataclass(eq=False)
class SweepResult:
    R_grid: np.ndarray
    reports: List[CarlemanReport]
    estimates: np.ndarray
    degenerate: bool = False

    @property
    def spread(self) -> float:
        vals = self.estimates[np.isfinite(self.estimates)]
        if vals.size == 0 or np.min(vals) <= 0:
            return math.nan
        return float(np.max(vals) / np.min(vals))

    def bounded(self, factor: float = 2.0) -> bool:
        s = self.spread
        return bool(np.isfinite(s) and s <= factor)


def constant_sweep(op: DiracOperator, sampler: Callable, R_grid: Sequence[float],
                   geom: CarlemanGeometry, n_samples: int = 20,
                   perturbation: Optional[Perturbation] = None, seed: int = 0,
                   jobs: Optional[int] = None, require_span: bool = True) -> SweepResult:
    """Per-R constant estimate: max ratio over sampled fields.

    Aggregation is deterministic (ordered by R then sample index) regardless
    of the worker count.
    """
    R_grid = np.asarray(list(R_grid), dtype=float)
    if require_span:
        if R_grid.size < 3 or np.any(np.diff(R_grid) <= 0):
            raise ValueError("R grid must be ascending with at least 3 points")
        if R_grid[-1] / R_grid[0] < 100.0:
            raise ValueError("R grid must span at least 2 decades")
    if n_samples < 1:
        raise ValueError("empty sample set")

    def one(i_r: int, i_s: int) -> CarlemanReport:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, i_r, i_s])))
        v = sampler(rng)
        if perturbation is None:
            return carleman_ratio(op, v, float(R_grid[i_r]), geom)
        return perturbed_carleman_ratio(op, perturbation, v, float(R_grid[i_r]), geom)

    tasks = [(i_r, i_s) for i_r in range(R_grid.size) for i_s in range(n_samples)]
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(lambda p: one(*p), tasks))
    else:
        flat = [one(*p) for p in tasks]

    reports, estimates = [], []
    degenerate = True
    for i_r in range(R_grid.size):
        group = flat[i_r * n_samples:(i_r + 1) * n_samples]
        ratios = np.array([g.ratio for g in group])
        finite = ratios[np.isfinite(ratios)]
        if finite.size:
            degenerate = False
            best = int(np.nanargmax(np.where(np.isfinite(ratios), ratios, -np.inf)))
            rep = group[best]
            est = float(np.max(finite))
        else:
            rep = group[0]
            est = math.nan
        reports.append(CarlemanReport(rep.R, rep.lhs, rep.rhs, rep.ratio, est, rep.c0,
                                      rep.violation))
        estimates.append(est)
    return SweepResult(R_grid, reports, np.array(estimates), degenerate=degenerate)


# ---------------------------------------------------------------------------
# continuation decay bound


@dataclass
class DecayRow:
    R: float
    log_bound: float
    conclusive: bool
    passed: bool


@dataclass
class DecayReport:
    rows: List[DecayRow]
    constant: float
    c0: float
    crossover: float
    measured: float
    cutoff_integral: float
    slope: float
    analytic_slope: float
    passed: bool
    inconclusive: bool

    @property
    def slope_rel_dev(self) -> float:
        if not np.isfinite(self.slope):
            return math.nan
        return abs(self.slope - self.analytic_slope) / abs(self.analytic_slope)


def ucp_decay_check(op: DiracOperator, P: Perturbation, u: SpinorField,
                    R_grid: Sequence[float], geom: CarlemanGeometry,
                    constant: Optional[float] = None, seed: int = 0) -> DecayReport:
    """Decay bound from the cutoff contradiction argument.

    The bound factor is (R/(R-2CC0)) (2C/R) exp(-21RT^2/100) times the
    cutoff-collar integral of |cl(dt) phi' u|^2; the measured quantity is
    the solution mass on [0, T/2].  Both sides are compared in log space;
    a measured mass below the solver noise floor counts as zero.
    """
    _check_domain(geom, u)
    residual = dirac_apply(op, u) + eval_perturbation(P, u)
    res_sup = residual.sup_norm()
    if res_sup >= 1e-8:
        raise PreconditionError(f"solution residual {res_sup:.3e} exceeds 1e-8")
    first_slice = float(np.max(u.fiber_abs()[0])) if u.values.size else 0.0
    if first_slice >= 1e-8:
        raise PreconditionError(
            f"inner-side data {first_slice:.3e} not vanishing (>= 1e-8)")

    if constant is None:
        sampler = cutoff_bump_sampler(geom, rank=op.fiber_rank)
        sweep = constant_sweep(op, sampler, np.logspace(1, 3, 5), geom,
                               n_samples=8, seed=seed, require_span=False)
        finite = sweep.estimates[np.isfinite(sweep.estimates)]
        constant = float(np.max(finite)) if finite.size else 1.0
    adm = admissibility_bound(P, u)
    if not adm:
        raise NonAdmissibleError(f"perturbation not admissible: {adm.reason}")
    c0 = adm.c0 or 0.0
    crossover = 2.0 * constant * c0

    T = geom.T
    t = geom.grid.t
    phi_prime = bump_cutoff_derivative(geom, t).reshape(
        (geom.grid.n,) + (1,) * (u.values.ndim - 1))
    collar_term = op.apply_cl_dt(phi_prime * u.values)
    w = geom.grid.quad_weights()
    cutoff_integral = float(np.sum(w * np.sum(np.abs(collar_term) ** 2, axis=-1)))

    half = t <= 0.5 * T
    sub_w = np.copy(w)
    if isinstance(geom.grid, AnnulusGrid):
        sub_w[~half, :] = 0.0
    else:
        sub_w[~half] = 0.0
    measured = float(np.sum(sub_w * np.sum(np.abs(u.values) ** 2, axis=-1)))

    log_measured = math.log(measured) if measured > 0 else -math.inf
    log_cut = math.log(cutoff_integral) if cutoff_integral > 0 else -math.inf

    rows = []
    for R in np.asarray(list(R_grid), dtype=float):
        conclusive = R > crossover
        if not conclusive:
            rows.append(DecayRow(float(R), math.nan, False, False))
            continue
        log_bound = (math.log(2.0 * constant) - math.log(R - crossover)
                     - 0.21 * T * T * R + log_cut)
        ok = (measured < MEASURED_FLOOR) or (log_measured <= log_bound + 1e-12)
        rows.append(DecayRow(float(R), log_bound, True, bool(ok)))

    concl = [r for r in rows if r.conclusive]
    if len(concl) >= 2:
        Rs = np.array([r.R for r in concl])
        f = (math.log(2.0 * constant) - np.log(Rs - crossover) - 0.21 * T * T * Rs)
        A = np.vstack([Rs, np.ones_like(Rs)]).T
        slope = float(np.linalg.lstsq(A, f, rcond=None)[0][0])
    else:
        slope = math.nan

    inconclusive = not concl
    passed = bool(concl) and all(r.passed for r in concl)
    return DecayReport(rows, constant, c0, crossover, measured, cutoff_integral,
                       slope, -0.21 * T * T, passed, inconclusive)


# ---------------------------------------------------------------------------
# substituted-variable decomposition


@dataclass
class JTermRecord:
    R: float
    j0: float
    j1: float
    j_skew: float
    j_sym: float
    j_mix: float
    j3: float
    j_skew_pert: float
    j_sym_pert: float
    j_err: float
    balance: float = 0.25

    @property
    def identity_defect(self) -> float:
        scale = max(abs(self.j1), self.j_skew + self.j_sym + abs(self.j_mix), 1e-300)
        return abs(self.j1 - (self.j_skew + self.j_sym + self.j_mix)) / scale

    @property
    def mix_residual(self) -> float:
        """j_mix - R j0 - j_skew_pert; equals j3 up to O(h^2) for fields
        vanishing at both ends."""
        return self.j_mix - self.R * self.j0 - self.j_skew_pert


def appendix_decomposition(op: DiracOperator, P: Perturbation, v: SpinorField,
                           R: float, geom: CarlemanGeometry,
                           balance: float = 0.25) -> JTermRecord:
    """J-terms of the identity |L v0|^2 = J_skew + J_sym + J_mix after the
    substitution v = exp(-R(T-t)^2/2) v0.  Direct exponentials: intended for
    moderate R (R T^2 well below overflow scale)."""
    _check_domain(geom, v)
    _support_check(v, geom)
    w = geom.grid.quad_weights()
    prof = geom.normal_profile(v.values.ndim)   # T - t
    E = np.exp(0.5 * R * prof ** 2)

    v0 = E * v.values
    h = geom.grid.spacing

    def wip(x, y) -> float:
        return float(np.sum(w * np.real(np.sum(x * np.conj(y), axis=-1))))

    pv = eval_perturbation(P, v).values
    q = op.apply_cl_dt_inverse(pv)          # reduced perturbation for d/dt + Bcal
    pert = E * q

    skew = time_derivative(v0, h) + op.apply_slices(op.C, v0)
    symB = op.apply_slices(op.B, v0) + R * prof * v0
    sym = symB + pert

    j_skew = wip(skew, skew)
    j_sym = wip(sym, sym)
    j_mix = 2.0 * wip(skew, sym)
    total = skew + sym
    j1 = wip(total, total)
    j0 = wip(v0, v0)

    Bprime = time_derivative(op.B, h)
    comm = op.B @ op.C - op.C @ op.B
    j3 = wip(v0, op.apply_slices(-Bprime + comm, v0))

    j_skew_pert = 2.0 * wip(skew, pert)
    j_sym_pert = 2.0 * wip(symB, pert)

    mag_v = v.fiber_abs()
    mag_p = np.sqrt(np.sum(np.abs(pv) ** 2, axis=-1))
    quot = np.divide(mag_p, mag_v, out=np.zeros_like(mag_p), where=mag_v > 0)
    j_err = float(np.sum(w * np.sum(np.abs(v0) ** 2, axis=-1)
                         * (R - quot ** 2 / balance)))

    return JTermRecord(R, j0, j1, j_skew, j_sym, j_mix, j3,
                       j_skew_pert, j_sym_pert, j_err, balance)
