import math

import numpy as np
import pytest

from hadamardlab.brownian import (
    EmpiricalMeasure,
    WalkConfig,
    cap_mass,
    continue_measure,
    first_exit,
    harmonic_measure,
    measure_from_csv,
    measure_to_csv,
    pushforward_sphere_measure,
    random_unit_tangent,
    walk_step,
    _run_walks,
)
from hadamardlab.errors import GeometryDomainError, WalkBudgetError
from hadamardlab.invariants import CapSpec
from hadamardlab.kernel import cap_kernel_mass_quadrature
from hadamardlab.statutil import ks_uniform_angle

CFG = dict(step=0.05, exit_radius=5.0, base_seed=99)


@pytest.fixture(scope="module")
def mu_ball_origin(ball2):
    return harmonic_measure(ball2, ball2.origin, WalkConfig(**CFG), 20000)


@pytest.fixture(scope="module")
def mu_surface_origin(warped):
    cfg = WalkConfig(step=0.04, exit_radius=5.0, base_seed=99)
    return harmonic_measure(warped, warped.origin, cfg, 20000)


def test_config_invariants(warped):
    with pytest.raises(GeometryDomainError):
        WalkConfig(step=-0.1, exit_radius=5.0, base_seed=0)
    with pytest.raises(GeometryDomainError):
        WalkConfig(step=0.1, exit_radius=5.0, base_seed=0, max_steps=10)
    cfg = WalkConfig(step=0.06, exit_radius=5.0, base_seed=0)
    # b = 2 on the default surface: needs eps < 0.05
    with pytest.raises(GeometryDomainError):
        cfg.validate_for(warped)
    assert WalkConfig(**CFG).max_steps >= 10 * (5.0 / 0.05) ** 2


def test_walk_step_trivials(ball2):
    x = np.array([0.2, 0.1])
    u = np.array([0.0, 1.0])
    assert np.allclose(walk_step(ball2, x, 0.0, u), x)
    # re-stepping along the transported geodesic direction stays on one geodesic
    y1 = walk_step(ball2, x, 0.3, u)
    y2 = walk_step(ball2, y1, 0.3, ball2.direction(y1, ball2.exp(x, u, 5.0)))
    assert ball2.distance(x, y2) == pytest.approx(0.6, rel=1e-9)
    for k in (1, 2, 3):
        pt = ball2.exp(x, u, 0.3 * k)
        assert ball2.distance(x, pt) == pytest.approx(0.3 * k, rel=1e-9)


def test_random_tangent_mean_displacement(ball2):
    n = 20000
    vecs = np.array([random_unit_tangent(ball2, 3, w, 0) for w in range(n)])
    assert np.linalg.norm(vecs.mean(axis=0)) <= 3.0 / math.sqrt(n)


def test_determinism_and_walk_index_keying(ball2, mu_ball_origin):
    cfg = WalkConfig(**CFG)
    again = harmonic_measure(ball2, ball2.origin, cfg, 20000)
    assert np.array_equal(mu_ball_origin.hits, again.hits)
    one = first_exit(ball2, ball2.origin, cfg, 123)
    assert np.array_equal(one, mu_ball_origin.hits[123])


def test_determinism_across_thread_counts(ball2, mu_ball_origin):
    import numba

    old = numba.get_num_threads()
    try:
        numba.set_num_threads(1)
        single = harmonic_measure(ball2, ball2.origin, WalkConfig(**CFG), 20000)
    finally:
        numba.set_num_threads(old)
    assert np.array_equal(mu_ball_origin.hits, single.hits)


def test_first_exit_near_boundary_keeps_direction(ball2):
    # from distance R - eps/2 most walks exit close to their own direction
    cfg = WalkConfig(step=0.01, exit_radius=5.0, base_seed=71)
    start = ball2.point_at_rho(5.0 - 0.005, np.array([1.0, 0.0]))
    mu = harmonic_measure(ball2, start, cfg, 500)
    dev = np.abs(np.arctan2(mu.hits[:, 1], mu.hits[:, 0]))
    assert np.mean(dev <= 0.1) >= 0.9


def test_exit_law_uniform_from_origin(mu_ball_origin, mu_surface_origin):
    ang = np.arctan2(mu_ball_origin.hits[:, 1], mu_ball_origin.hits[:, 0])
    assert ks_uniform_angle(ang) > 0.01
    assert ks_uniform_angle(mu_surface_origin.hits) > 0.01


def test_every_walk_exits(mu_ball_origin):
    assert mu_ball_origin.walks == len(mu_ball_origin.hits)
    assert np.all(mu_ball_origin.steps > 0)


def test_walk_budget_error(ball2):
    cfg = WalkConfig(**CFG)
    starts = np.zeros((8, 2))
    with pytest.raises(WalkBudgetError) as err:
        # bypass the config guard to force exhaustion
        object.__setattr__(cfg, "max_steps", 3)
        from hadamardlab.brownian import _measure_from_starts

        _measure_from_starts(ball2, ball2.origin, starts, cfg, 8, 0)
    assert len(err.value.failed_indices) == 8


def test_cap_mass_trivials(mu_ball_origin):
    full = CapSpec(np.array([1.0, 0.0]), math.pi)
    p, _ = cap_mass(mu_ball_origin, full)
    assert p == 1.0
    half = CapSpec(np.array([1.0, 0.0]), math.pi / 2)
    other = CapSpec(np.array([-1.0, 0.0]), math.pi / 2)
    p1, _ = cap_mass(mu_ball_origin, half)
    p2, _ = cap_mass(mu_ball_origin, other)
    # closed caps overlap exactly on the measure-zero equator points
    assert p1 + p2 >= 1.0
    assert p1 + p2 == pytest.approx(1.0, abs=1e-3)


def test_cap_mass_uniform_law(mu_ball_origin):
    for alpha in (math.pi / 4, math.pi / 3, 2.5):
        p, (lo, hi) = cap_mass(mu_ball_origin, CapSpec(np.array([0.0, 1.0]), alpha))
        want = alpha / math.pi
        sigma = math.sqrt(want * (1 - want) / mu_ball_origin.walks)
        assert abs(p - want) < 4 * sigma


def test_offcenter_cap_masses_match_quadrature(ball2):
    cfg = WalkConfig(step=0.02, exit_radius=10.0, base_seed=5)
    x = np.array([0.5, 0.0])
    mu = harmonic_measure(ball2, x, cfg, 20000)
    for alpha in (math.pi / 4, math.pi / 2, 3 * math.pi / 4):
        cap = CapSpec(np.array([1.0, 0.0]), alpha)
        p, _ = cap_mass(mu, cap)
        q = cap_kernel_mass_quadrature(ball2, x, cap)
        sigma = math.sqrt(q * (1 - q) / mu.walks)
        assert abs(p - q) <= 3.5 * sigma


def test_step_size_bias_controlled(ball2):
    # cap masses at eps and eps/2 agree within max(3 sigma, 0.5%)
    x = np.array([0.5, 0.0])
    n = 20000
    mu_a = harmonic_measure(ball2, x, WalkConfig(step=0.04, exit_radius=8.0, base_seed=21), n)
    mu_b = harmonic_measure(ball2, x, WalkConfig(step=0.02, exit_radius=8.0, base_seed=22), n)
    cap = CapSpec(np.array([1.0, 0.0]), math.pi / 2)
    pa, _ = cap_mass(mu_a, cap)
    pb, _ = cap_mass(mu_b, cap)
    sigma = math.sqrt(pa * (1 - pa) / n + pb * (1 - pb) / n)
    assert abs(pa - pb) <= max(3 * sigma, 0.005)


def test_markov_two_stage_consistency(ball2):
    # stage one to S(o, 2), continued to S(o, 6): cap masses match one-stage
    n = 15000
    stage1 = harmonic_measure(ball2, ball2.origin,
                              WalkConfig(step=0.05, exit_radius=2.0, base_seed=31), n)
    cfg_far = WalkConfig(step=0.05, exit_radius=6.0, base_seed=77)
    two_stage = continue_measure(ball2, stage1, cfg_far)
    direct = harmonic_measure(ball2, ball2.origin, cfg_far, n)
    cap = CapSpec(np.array([1.0, 0.0]), math.pi / 3)
    p2, _ = cap_mass(two_stage, cap)
    p1, _ = cap_mass(direct, cap)
    sigma = math.sqrt(p1 * (1 - p1) / n + p2 * (1 - p2) / n)
    assert abs(p1 - p2) <= 3 * sigma


def test_exit_radius_sensitivity(ball2):
    # measures at R and R + 2 agree within noise for caps
    n = 15000
    x = np.array([0.5, 0.0])
    mu_a = harmonic_measure(ball2, x, WalkConfig(step=0.05, exit_radius=8.0, base_seed=41), n)
    mu_b = harmonic_measure(ball2, x, WalkConfig(step=0.05, exit_radius=10.0, base_seed=42), n)
    cap = CapSpec(np.array([1.0, 0.0]), math.pi / 2)
    pa, _ = cap_mass(mu_a, cap)
    pb, _ = cap_mass(mu_b, cap)
    sigma = math.sqrt(pa * (1 - pa) / n + pb * (1 - pb) / n)
    assert abs(pa - pb) <= 3 * sigma


def test_pushforward_matches_boundary_measure_in_law(ball2):
    n = 15000
    cfg = WalkConfig(step=0.05, exit_radius=8.0, base_seed=51)
    mu_far = harmonic_measure(ball2, ball2.origin, cfg, n)
    mu_sphere = pushforward_sphere_measure(ball2, 2.0, cfg, n)
    from scipy import stats

    a1 = np.arctan2(mu_far.hits[:, 1], mu_far.hits[:, 0])
    a2 = np.arctan2(mu_sphere.hits[:, 1], mu_sphere.hits[:, 0])
    assert stats.ks_2samp(a1, a2).pvalue > 0.01


def test_kernel_normalization_against_measure(ball2, mu_ball_origin):
    # int P(x, .) dmu_o = 1: Monte Carlo average over boundary samples
    from hadamardlab.kernel import exact_kernel_ball

    x = np.array([0.4, 0.2])
    vals = np.array([exact_kernel_ball(ball2, x, xi).value
                     for xi in mu_ball_origin.hits[:20000]])
    se = vals.std() / math.sqrt(len(vals))
    assert abs(vals.mean() - 1.0) <= 3 * se + 0.01


def test_empty_measure_flagged_invalid(ball2):
    cfg = WalkConfig(**CFG)
    mu = harmonic_measure(ball2, ball2.origin, cfg, 0)
    assert not mu.valid
    with pytest.raises(GeometryDomainError):
        cap_mass(mu, CapSpec(np.array([1.0, 0.0]), 1.0))


def test_surface_walk_matches_ball_law(h2_surface, ball2):
    # same-curvature surface and ball share the exit law from matched starts
    n = 15000
    cfg = WalkConfig(step=0.05, exit_radius=6.0, base_seed=61)
    mu_s = harmonic_measure(h2_surface, np.array([1.0, 0.0]), cfg, n)
    mu_b = harmonic_measure(ball2, np.array([math.tanh(0.5), 0.0]), cfg, n)
    cap_s = CapSpec(0.0, math.pi / 3)
    cap_b = CapSpec(np.array([1.0, 0.0]), math.pi / 3)
    ps, _ = cap_mass(mu_s, cap_s)
    pb, _ = cap_mass(mu_b, cap_b)
    sigma = math.sqrt(ps * (1 - ps) / n + pb * (1 - pb) / n)
    assert abs(ps - pb) <= 3 * sigma


def test_csv_round_trip(tmp_path, ball2, warped, mu_ball_origin):
    path = tmp_path / "ball_measure.csv"
    measure_to_csv(mu_ball_origin, path)
    back = measure_from_csv(ball2, path)
    assert np.array_equal(back.hits, mu_ball_origin.hits)
    assert back.walks == mu_ball_origin.walks
    assert back.seed == mu_ball_origin.seed
    assert back.exit_radius == mu_ball_origin.exit_radius
    cfg = WalkConfig(step=0.04, exit_radius=3.0, base_seed=9)
    mu_s = harmonic_measure(warped, warped.origin, cfg, 200)
    path_s = tmp_path / "surf_measure.csv"
    measure_to_csv(mu_s, path_s)
    back_s = measure_from_csv(warped, path_s)
    assert np.array_equal(back_s.hits, mu_s.hits)
    with pytest.raises(GeometryDomainError):
        measure_from_csv(ball2, path_s)
