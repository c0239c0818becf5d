import math

import numpy as np
import pytest

from ucp_lab.counterexamples import (default_rank_one_profile, derivative_5pt,
                                     peano_branches, rank_one_counterexample)
from ucp_lab.errors import NormalizationError
from ucp_lab.fields import Grid1D, SpinorField
from ucp_lab.perturbations import ucp_condition_check


def test_derivative_5pt_exact_for_cubics():
    grid = Grid1D.uniform(1.0, 101)
    u = 2.0 * grid.t ** 3 - grid.t ** 2 + 0.5
    du = derivative_5pt(u, grid.spacing)
    assert np.max(np.abs(du - (6.0 * grid.t ** 2 - 2.0 * grid.t))) < 1e-11


def test_peano_two_thirds_branch_value():
    sol = peano_branches("two-thirds", c=1.0, grid=Grid1D.uniform(4.0, 4097))
    idx = np.argmin(np.abs(sol.grid.t - 2.0))
    assert abs(sol.u1[idx] - 1.0) < 1e-12


def test_peano_sqrt_branch_value():
    sol = peano_branches("sqrt", c=0.0, grid=Grid1D(np.linspace(-1.0, 3.0, 4097)))
    assert abs(sol.u1[-1] - 9.0) < 1e-12


@pytest.mark.parametrize("case", ["sqrt", "two-thirds"])
def test_peano_residuals_and_cross_resolution(case):
    for n in (4097, 16385):
        sol = peano_branches(case, c=1.0, grid=Grid1D.uniform(4.0, n))
        assert sol.residual0 == 0.0
        assert sol.residual1 < 1e-8


@pytest.mark.parametrize("case", ["sqrt", "two-thirds"])
def test_branches_agree_then_separate(case):
    sol = peano_branches(case, c=1.0, grid=Grid1D.uniform(4.0, 4097))
    assert sol.agreement_sup < 1e-10
    assert sol.separation_sup > 1e-4


def test_peano_unknown_case_and_exterior_branch_point():
    with pytest.raises(ValueError):
        peano_branches("cubic", c=1.0)
    with pytest.raises(ValueError):
        peano_branches("sqrt", c=10.0, grid=Grid1D.uniform(4.0, 1025))


def test_rank_one_reproduces_stated_values():
    sol, a = rank_one_counterexample()
    grid = sol.grid
    w = grid.quad_weights()
    assert abs(float(np.sum(w * a)) - math.sqrt(2.0)) < 1e-12
    assert abs(sol.u1[-1] - math.sqrt(2.0)) < 1e-8
    assert abs(float(np.sum(w * sol.u1 * a)) - 1.0) < 1e-8
    assert sol.residual1 < 1e-6
    assert np.max(np.abs(sol.u1[grid.t <= 1.0])) == 0.0


def test_rank_one_rescales_or_rejects():
    grid = Grid1D.uniform(2.0, 131073)
    doubled = 2.0 * default_rank_one_profile(grid.t)
    sol, a = rank_one_counterexample(doubled, grid, renormalize=True)
    assert abs(float(np.sum(grid.quad_weights() * a)) - math.sqrt(2.0)) < 1e-12
    with pytest.raises(NormalizationError):
        rank_one_counterexample(doubled, grid, renormalize=False)


def test_rank_one_rejects_profile_supported_on_left():
    grid = Grid1D.uniform(2.0, 131073)
    bad = np.ones_like(grid.t)
    with pytest.raises(NormalizationError):
        rank_one_counterexample(bad, grid)


def test_rank_one_perturbation_fails_continuation_conditions():
    sol, a = rank_one_counterexample()
    grid = sol.grid
    a_field = SpinorField(grid, a[:, None].astype(complex))
    trivial = SpinorField(grid, sol.u0[:, None].astype(complex))
    assert ucp_condition_check(a_field, trivial).verdict == "neither"


def test_branch_csv_round_trip(tmp_path):
    sol = peano_branches("sqrt", c=1.0, grid=Grid1D.uniform(4.0, 1025))
    path = tmp_path / "branches.csv"
    sol.to_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "x,u0,u1"
    assert len(rows) == sol.grid.n + 1
    last = rows[-1].split(",")
    assert abs(float(last[2]) - sol.u1[-1]) < 1e-15
