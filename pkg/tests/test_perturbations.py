import numpy as np
import pytest

from ucp_lab.counterexamples import rank_one_counterexample
from ucp_lab.fields import Grid1D, SpinorField
from ucp_lab.operators import model_operator_1d
from ucp_lab.perturbations import (Perturbation, admissibility_bound,
                                   eval_perturbation, integrate_zero_data,
                                   ucp_condition_check)


@pytest.fixture
def grid():
    return Grid1D.uniform(2.0, 513)


def bump_field(grid, center, width, rank=2, component=0):
    vals = np.zeros((grid.n, rank), dtype=complex)
    vals[:, component] = np.exp(-((grid.t - center) ** 2) / (2 * width ** 2))
    return SpinorField(grid, vals)


def all_kinds(grid):
    a = bump_field(grid, 1.0, 0.3)
    k = np.ones((grid.n, grid.n))
    return [Perturbation.zero(), Perturbation.pointwise(a),
            Perturbation.kernel_nonlocal(a, k), Perturbation.rank_one(a)]


def test_zero_input_maps_to_zero_for_every_kind(grid):
    u = grid.zeros()
    for P in all_kinds(grid):
        assert eval_perturbation(P, u).sup_norm() == 0.0


def test_pointwise_with_vanishing_profile(grid):
    P = Perturbation.pointwise(grid.zeros())
    u = bump_field(grid, 0.7, 0.2)
    assert eval_perturbation(P, u).sup_norm() == 0.0


def test_rank_one_reproduces_branch_pairing():
    sol, a = rank_one_counterexample()
    grid = sol.grid
    a_field = SpinorField(grid, a[:, None].astype(complex))
    u_field = SpinorField(grid, sol.u1[:, None].astype(complex))
    out = eval_perturbation(Perturbation.rank_one(a_field), u_field)
    # <u, a> = 1, so the image is the profile itself
    assert np.max(np.abs(out.values[:, 0] - a)) < 1e-7 * max(np.max(np.abs(a)), 1.0)


def test_pointwise_quadratic_homogeneity(grid):
    P = Perturbation.pointwise(bump_field(grid, 1.2, 0.4))
    u = bump_field(grid, 0.9, 0.3)
    base = eval_perturbation(P, u).fiber_abs()
    for lam in (0.5, 2.0, 3.0):
        scaled = eval_perturbation(P, u * lam).fiber_abs()
        assert np.max(np.abs(scaled - lam ** 2 * base)) <= 1e-12 * max(base.max(), 1.0)


def test_rank_one_complex_linearity(grid):
    P = Perturbation.rank_one(bump_field(grid, 1.2, 0.4))
    u = bump_field(grid, 1.1, 0.3)
    base = eval_perturbation(P, u).values
    for lam in (0.5, -2.0, 1.3 + 0.7j, 1j):
        scaled = eval_perturbation(P, u * lam).values
        assert np.max(np.abs(scaled - lam * base)) <= 1e-14 * max(np.max(np.abs(base)), 1e-30)


def test_admissibility_pointwise_bound(grid):
    a = bump_field(grid, 1.0, 0.5)
    P = Perturbation.pointwise(a)
    u = bump_field(grid, 1.0, 0.3)
    res = admissibility_bound(P, u)
    assert res.admissible
    # C0 = max |<u, a>| <= sup|a| sup|u|
    omega = np.abs(np.sum(u.values * np.conj(a.values), axis=-1))
    assert abs(res.c0 - np.max(omega)) < 1e-14
    assert res.c0 <= a.sup_norm() * u.sup_norm() + 1e-14


def test_admissibility_rank_one_fails_where_u_vanishes(grid):
    # a extends past the support of u with <u, a> != 0, so P(u) is nonzero
    # at points where u vanishes
    a_vals = np.zeros((grid.n, 2), dtype=complex)
    a_vals[grid.t >= 1.0, 0] = 1.0
    u_vals = np.zeros((grid.n, 2), dtype=complex)
    u_vals[grid.t < 1.2, 0] = np.exp(-((grid.t[grid.t < 1.2] - 0.6) ** 2) / 0.05)
    res = admissibility_bound(Perturbation.rank_one(SpinorField(grid, a_vals)),
                              SpinorField(grid, u_vals))
    assert not res.admissible


def test_kernel_evaluation_with_box_kernel(grid):
    u = bump_field(grid, 1.0, 0.2)
    k = np.ones((grid.n, grid.n))
    out = eval_perturbation(Perturbation.kernel_nonlocal(u, k), u)
    # k = 1 makes omega(x) = |int u|, constant across the domain
    mass = abs(np.trapezoid(u.values[:, 0], grid.t))
    assert np.max(np.abs(out.values - mass * u.values)) < 1e-10


def test_admissibility_kernel_box_quadrature_oracle(grid):
    u = bump_field(grid, 1.0, 0.2)
    k = np.ones((grid.n, grid.n))
    P = Perturbation.kernel_nonlocal(u, k)
    res = admissibility_bound(P, u)
    oracle = np.trapezoid(u.values[:, 0].real, grid.t)  # int u over the domain
    assert res.admissible
    assert abs(res.c0 - abs(oracle)) < 1e-10


def test_admissibility_scaling_behaviour(grid):
    a = bump_field(grid, 1.0, 0.5)
    u = bump_field(grid, 1.0, 0.3)
    # pointwise omega is linear in u, so the bound scales with the input
    P = Perturbation.pointwise(a)
    c_base = admissibility_bound(P, u).c0
    for lam in (0.5, 2.0):
        c_scaled = admissibility_bound(P, u * lam).c0
        assert abs(c_scaled - lam * c_base) <= 1e-10 * max(c_base, 1.0)
    # the rank-one map is linear, so its quotient is scale-invariant
    P = Perturbation.rank_one(u)
    c_base = admissibility_bound(P, u).c0
    for lam in (0.5, 2.0):
        c_scaled = admissibility_bound(P, u * lam).c0
        assert abs(c_scaled - c_base) <= 1e-10 * max(c_base, 1.0)


def test_admissibility_region_restriction(grid):
    a = bump_field(grid, 1.5, 0.1)
    P = Perturbation.pointwise(a)
    u = bump_field(grid, 1.5, 0.4)
    region = grid.t < 1.0
    res = admissibility_bound(P, u, region=region)
    full = admissibility_bound(P, u)
    assert res.admissible and res.c0 < full.c0


def test_ucp_condition_plane_wave(grid):
    wave = np.exp(1j * 5.0 * grid.t)
    a = SpinorField(grid, np.stack([wave, 0.2 * wave], axis=1))
    u = bump_field(grid, 0.5, 0.2)
    assert ucp_condition_check(a, u).verdict == "condition-i"


def test_ucp_condition_a_equals_u():
    grid = Grid1D.uniform(2.0, 513)
    vals = np.zeros((grid.n, 1), dtype=complex)
    vals[grid.t >= 1.0, 0] = (grid.t[grid.t >= 1.0] - 1.0) ** 2
    u = SpinorField(grid, vals)
    res = ucp_condition_check(u, u)
    assert res.verdict == "condition-ii"
    assert abs(res.c0 - 1.0) < 1e-14


def test_ucp_condition_neither(grid):
    a_vals = np.zeros((grid.n, 1), dtype=complex)
    a_vals[grid.t >= 1.0, 0] = 1.0
    u_vals = np.zeros((grid.n, 1), dtype=complex)
    inside = grid.t <= 1.0
    u_vals[inside, 0] = np.exp(-((grid.t[inside] - 0.5) ** 2) / 0.01)
    res = ucp_condition_check(SpinorField(grid, a_vals), SpinorField(grid, u_vals))
    assert res.verdict == "neither"


def test_zero_data_integration_stays_zero():
    grid = Grid1D.uniform(1.0, 1025)
    op = model_operator_1d(grid)
    a = bump_field(grid, 0.5, 0.2)
    for P in (Perturbation.zero(), Perturbation.pointwise(a), Perturbation.rank_one(a)):
        u = integrate_zero_data(op, P)
        assert u.sup_norm() < 1e-12
