import numpy as np
import pytest

from dimred_assoc.assignment import build_full_matrix
from dimred_assoc.simulation import (DEFAULT_C_GRID, DEMO_SEEDS, McConfig, Method, RunParams,
                                     Scenario, ScenarioSpec, associate, generate_scenario,
                                     make_rng, mc_sweep, motivating_example, optimizer_trace,
                                     realization_demo, realization_fixture, sample_realization,
                                     scale_spatial, spatial_scaling)


def test_method_parse():
    assert Method.parse("assoc-opt") is Method.ASSOC_OPT
    assert Method.parse("FUSION_OPT") is Method.FUSION_OPT
    with pytest.raises(ValueError):
        Method.parse("greedy")


def test_default_grid():
    assert len(DEFAULT_C_GRID) == 50
    assert DEFAULT_C_GRID[0] == 0.1 and DEFAULT_C_GRID[-1] == 5.0


def test_default_scenario_shape():
    s = generate_scenario()
    assert s.targets.shape == (10, 6) and s.cov1.shape == (10, 6, 6)
    assert np.all(s.targets[:, 2:] == 0.0)
    assert np.all(np.linalg.eigvalsh(s.cov1) > 0)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(np.zeros((2, 3)), np.stack([np.eye(3)] * 2), np.stack([np.eye(3)] * 2), m=3)
    with pytest.raises(Exception):
        generate_scenario(ScenarioSpec(positions=((0.0, 0.0), (0.0, 0.0))))


def test_spatial_scaling():
    assert np.allclose(spatial_scaling(4, 4.0), [2.0, 2.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        spatial_scaling(4, 0.0)
    s = generate_scenario()
    sc = scale_spatial(s, 2.5)
    assert np.allclose(sc.cov1[:, :2, :2], 2.5 * s.cov1[:, :2, :2])
    assert np.allclose(sc.cov1[:, 2:, 2:], s.cov1[:, 2:, 2:])
    assert np.allclose(sc.cov2[:, :2, 2:], np.sqrt(2.5) * s.cov2[:, :2, 2:])
    assert np.array_equal(scale_spatial(s, 1.0).cov1, s.cov1)


def test_rng_streams_deterministic():
    a = make_rng(7, 3).standard_normal(5)
    assert np.array_equal(a, make_rng(7, 3).standard_normal(5))
    assert not np.array_equal(a, make_rng(7, 4).standard_normal(5))


def test_sample_covariance():
    s = generate_scenario()
    rng = make_rng(99)
    errs = []
    for _ in range(20000):
        s1, _ = sample_realization(s, rng)
        errs.append(s1.means[0] - s.targets[0])
    emp = np.cov(np.array(errs).T)
    assert np.linalg.norm(emp - s.cov1[0]) / np.linalg.norm(s.cov1[0]) < 0.05


def test_full_method_on_default_scenario():
    s = generate_scenario()
    s1, s2 = sample_realization(scale_spatial(s, 5.0), make_rng(1, 0))
    _, asg = associate(s1, s2, Method.FULL)
    assert asg.perm == tuple(range(10))
    assert np.allclose(associate(s1, s2, Method.FULL)[0].costs, build_full_matrix(s1, s2).costs)


def test_assoc_opt_requires_single_row():
    s = generate_scenario()
    s1, s2 = sample_realization(s, make_rng(1))
    with pytest.raises(ValueError):
        associate(s1, s2, Method.ASSOC_OPT, RunParams(m=2))


def test_motivating_values():
    rows = {r.alpha_deg: r for r in motivating_example()}
    assert rows[0.0].trace_p == pytest.approx(2.545454545, rel=1e-8)
    assert rows[90.0].trace_p == pytest.approx(1.295454545, rel=1e-8)
    assert rows[90.0].j0 == pytest.approx(32 / 11)
    assert rows[0.0].je == pytest.approx(130 / 11)
    assert rows[90.0].je < 1e-12


def test_realization_fixture_costs():
    good, bad = realization_fixture()
    assert np.allclose(good.matrix.costs, [[0.05, 1.0125], [0.3125, 0.05]])
    assert np.allclose(bad.matrix.costs, [[0.1125, 0.0125], [0.0125, 0.1125]])
    assert good.assignment.perm == (0, 1) and bad.assignment.perm == (1, 0)


def test_realization_demo_seeds():
    first, second = realization_demo(DEMO_SEEDS)
    assert first.assignment.perm == (0, 1)
    assert second.assignment.perm == (1, 0)


def test_optimizer_trace_layout():
    rows = optimizer_trace(k_max=5)
    assert [r.variant for r in rows[::6]] == ["adaptive", "fixed_low", "fixed_high"]
    assert {r.f_min for r in rows if r.k == 0} == {rows[0].f_min}
    assert all(abs(r.alpha) == 0.5 for r in rows if r.variant == "fixed_high" and r.k)


def test_small_sweep_deterministic_and_bounded():
    s = generate_scenario()
    cfg = McConfig(runs=4, c_grid=(0.5, 3.0), seed=3)
    a, b = mc_sweep(cfg, s), mc_sweep(cfg, s)
    assert a == b
    assert len(a.rows) == 6
    assert all(0.0 <= r.p_ic_mean <= 1.0 and r.runs == 4 for r in a.rows)
    one = mc_sweep(McConfig(runs=1, c_grid=(1.0,)), s)
    assert all(r.p_ic_std == 0.0 for r in one.rows)


def test_mc_config_validation():
    with pytest.raises(ValueError):
        McConfig(runs=0)
    with pytest.raises(ValueError):
        McConfig(c_grid=(1.0, 0.5))
    with pytest.raises(ValueError):
        McConfig(c_grid=())
