import json

import numpy as np
import pytest

from ucp_lab import torus as tw
from ucp_lab.checkpoint import (load_checkpoint, params_hash, save_checkpoint,
                                write_trajectory)


@pytest.fixture(scope="module")
def lat():
    return tw.TorusLattice(2)


def test_round_trip(tmp_path, lat):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([1])))
    cfg = tw.random_config(lat, rng, amplitude=0.7)
    path = tmp_path / "state.ckpt"
    save_checkpoint(cfg, path, case="case1")
    loaded, header = load_checkpoint(path)
    assert header["case"] == "case1"
    assert header["lattice_N"] == lat.N
    assert np.max(np.abs(loaded.alpha - cfg.alpha)) < 1e-12
    assert np.max(np.abs(loaded.psi - cfg.psi)) < 1e-12


def test_header_is_json_line_with_layout(tmp_path, lat):
    cfg = tw.SWConfiguration.zero(lat)
    path = tmp_path / "state.ckpt"
    save_checkpoint(cfg, path)
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        payload = fh.read()
    assert header["arrays"]["a"] == [lat.n, lat.n, lat.n, 3]
    assert header["arrays"]["psi"] == [lat.n, lat.n, lat.n, 2]
    assert len(payload) == lat.n ** 3 * (3 + 2) * 2 * 8


def test_save_is_deterministic(tmp_path, lat):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([2])))
    cfg = tw.random_config(lat, rng, amplitude=0.5)
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    save_checkpoint(cfg, p1)
    save_checkpoint(cfg, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b'{"format": "something-else"}\n')
    with pytest.raises(ValueError):
        load_checkpoint(path)


def test_params_hash_distinguishes_data(lat):
    p1 = tw.default_params(lat, seed=1)
    p2 = tw.default_params(lat, seed=2)
    assert params_hash(p1) != params_hash(p2)
    assert params_hash(p1) == params_hash(tw.default_params(lat, seed=1))
    assert params_hash(None) == ""


def test_trajectory_csv(tmp_path, lat):
    cfg = tw.random_config(lat, np.random.default_rng(3), amplitude=1e-4)
    flow = tw.run_flow(cfg, dt=3.0, steps=5, scheme="semi-implicit")
    path = tmp_path / "traj.csv"
    write_trajectory(path, flow.trajectory)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "step,time,csd,residual_curvature,residual_dirac,sup_psi"
    assert len(lines) == len(flow.trajectory) + 1
