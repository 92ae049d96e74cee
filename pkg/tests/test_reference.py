import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opentdse.core import BoundarySpec, PotentialSpec
from opentdse.exceptions import BoundaryContamination, MisalignedTrajectories
from opentdse.reference import (
    overlap_error,
    region_norm,
    run_full_domain,
    run_remap_only,
    run_truncated,
)
from opentdse.results import Trajectory

rng = np.random.default_rng(3)


def _traj(n_t=4, n_x=20, dx=0.2, scale=1.0):
    snaps = rng.normal(size=(n_t, n_x)) + 1j * rng.normal(size=(n_t, n_x))
    return Trajectory(np.arange(n_t, dtype=float), np.arange(n_t), scale * snaps, dx * np.arange(n_x), dx)


def test_identical_trajectories_give_zero():
    t = _traj()
    assert np.all(overlap_error(t, t).values == 0.0)


def test_scaled_field_error():
    t = _traj()
    d = 1e-3
    s = Trajectory(t.times, t.steps, (1 + d) * t.snapshots, t.x, t.dx)
    norms = np.sum(np.abs(t.snapshots) ** 2, axis=1) * t.dx
    assert np.allclose(overlap_error(t, s).values, d**2 * norms, rtol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_symmetry_and_triangle_bound(seed):
    r = np.random.default_rng(seed)
    mk = lambda: Trajectory(np.arange(3.0), np.arange(3), r.normal(size=(3, 8)) + 1j * r.normal(size=(3, 8)), np.arange(8.0), 1.0)
    a, b, c = mk(), mk(), mk()
    assert np.allclose(overlap_error(a, b).values, overlap_error(b, a).values)
    assert np.all(overlap_error(a, c).values <= 2 * overlap_error(a, b).values + 2 * overlap_error(b, c).values + 1e-12)


def test_misaligned_trajectories():
    a = _traj()
    with pytest.raises(MisalignedTrajectories):
        overlap_error(a, _traj(n_t=5))
    with pytest.raises(MisalignedTrajectories):
        overlap_error(a, _traj(dx=0.1))


def test_region_restriction():
    a, b = _traj(), _traj()
    full = overlap_error(a, b).values
    left = overlap_error(a, b, region=(0.0, 1.8)).values
    right = overlap_error(a, b, region=(2.0, 3.8)).values
    assert np.allclose(left + right, full)


def test_region_norm():
    f = np.ones(10)
    assert region_norm(f, 0.1) == pytest.approx(1.0)
    assert region_norm(f, 0.1, region=slice(0, 0)) == 0.0
    assert region_norm(f, 0.1, jacobian=np.full(10, 2.0)) == pytest.approx(2.0)


def test_full_domain_conserves_norm(small_config):
    rep = run_full_domain(small_config.replace(potential=PotentialSpec()), n_steps=5000, report=True)
    total = rep.norms["interior"] + rep.norms["left_layer"] + rep.norms["right_layer"]
    assert np.max(np.abs(total - 1.0)) < 1e-6


def test_too_narrow_domain_is_contaminated(small_config):
    narrow = small_config.replace(x_min=-130.0, x_max=60.0)
    with pytest.raises(BoundaryContamination):
        run_full_domain(narrow, n_steps=20000)


def test_truncated_matches_full_before_reflection(small_config):
    cfg = small_config.replace(right_boundary=BoundarySpec(La=100.0))
    n = 1500  # the front needs far longer to reach b + La and come back
    full = run_full_domain(cfg, n)
    cut = run_truncated(cfg, n)
    assert overlap_error(full, cut).max < 1e-10


def test_remap_is_slower_to_reflect(small_config):
    cfg = small_config.replace(potential=PotentialSpec(), right_boundary=BoundarySpec(La=20.0), contamination_tol=None)
    n = 40000
    full = run_full_domain(cfg, n)
    rem = overlap_error(full, run_remap_only(cfg, n), kind="rem")
    cut = overlap_error(full, run_truncated(cfg, n), kind="cut")
    assert rem.first_time_above(1e-8) > cut.first_time_above(1e-8)
