import math

import numpy as np
import pytest

from hadamardlab.errors import (
    DegenerateAngleError,
    GeometryDomainError,
    PinchingViolationError,
)
from hadamardlab.spaces import (
    BallModel,
    WarpedSurface,
    constant_profile,
    default_profile,
    distance,
    exp_map,
    ray_to_boundary,
    riemannian_angle,
    solve_warping,
)

from conftest import ball_point

LOG3 = math.log(3.0)


# ---------------------------------------------------------------------------
# ball model closed forms
# ---------------------------------------------------------------------------


def test_ball_radial_distance(ball2):
    assert distance(ball2, ball2.origin, np.array([0.5, 0.0])) == pytest.approx(LOG3, abs=1e-12)


def test_distance_identity(ball2, warped):
    x = np.array([0.3, -0.2])
    assert distance(ball2, x, x) == 0.0
    y = np.array([2.0, 0.7])
    assert distance(warped, y, y) == 0.0


def test_ball_exp_inverts_radial_distance(ball2):
    pt = exp_map(ball2, ball2.origin, np.array([1.0, 0.0]), LOG3)
    assert np.allclose(pt, [0.5, 0.0], atol=1e-14)


def test_exp_zero_length(ball2, warped):
    x = np.array([0.2, 0.1])
    assert np.allclose(exp_map(ball2, x, np.array([0.0, 1.0]), 0.0), x)
    xs = np.array([1.0, 0.3])
    assert np.allclose(exp_map(warped, xs, np.array([1.0, 0.0]), 0.0), xs)


def test_exp_negative_length_rejected(ball2, warped):
    with pytest.raises(GeometryDomainError):
        exp_map(ball2, ball2.origin, np.array([1.0, 0.0]), -0.5)
    with pytest.raises(GeometryDomainError):
        exp_map(warped, np.array([1.0, 0.0]), np.array([1.0, 0.0]), -0.5)


def test_ball_distance_rescales_with_curvature():
    for a in (0.5, 2.0):
        ball = BallModel(2, a)
        d = distance(ball, ball.origin, np.array([0.5, 0.0]))
        assert d == pytest.approx(LOG3 / a, rel=1e-13)


def test_metric_axioms_random_triples(ball2, warped):
    rng = np.random.default_rng(1)
    for space, sampler in (
        (ball2, lambda: ball_point(rng.uniform(0, 5), rng.uniform(0, 2 * math.pi))),
        (warped, lambda: np.array([rng.uniform(0, 5), rng.uniform(-math.pi, math.pi)])),
    ):
        for _ in range(40):
            x, y, z = sampler(), sampler(), sampler()
            dxy = distance(space, x, y)
            assert dxy == pytest.approx(distance(space, y, x), abs=1e-10)
            assert dxy + distance(space, y, z) - distance(space, x, z) >= -1e-7


def test_exp_distance_consistency(ball2, warped):
    rng = np.random.default_rng(2)
    for _ in range(60):
        t = rng.uniform(0.01, 6.0)
        ang = rng.uniform(0, 2 * math.pi)
        x = ball_point(rng.uniform(0, 5), rng.uniform(0, 2 * math.pi))
        v = np.array([math.cos(ang), math.sin(ang)])
        y = exp_map(ball2, x, v, t)
        assert distance(ball2, x, y) == pytest.approx(t, rel=1e-6)
        xs = np.array([rng.uniform(0.0, 5.0), rng.uniform(-math.pi, math.pi)])
        ys = exp_map(warped, xs, v, t)
        assert distance(warped, xs, ys) == pytest.approx(t, rel=1e-6)


# ---------------------------------------------------------------------------
# rays and angles
# ---------------------------------------------------------------------------


def test_ball_radial_ray(ball2):
    xi = np.array([0.6, 0.8])
    ray = ray_to_boundary(ball2, ball2.origin, xi)
    for t in (0.5, 2.0, 10.0):
        assert np.allclose(ray.point_at(t), math.tanh(t / 2) * xi, atol=1e-14)


def test_ray_from_point_on_radial_ray(ball2):
    xi = np.array([1.0, 0.0])
    x = np.array([0.4, 0.0])
    ray = ray_to_boundary(ball2, x, xi)
    assert np.allclose(ray.direction, [1.0, 0.0], atol=1e-14)


def test_ray_unit_speed(ball2, warped):
    rng = np.random.default_rng(3)
    for space in (ball2, warped):
        for _ in range(10):
            if isinstance(space, BallModel):
                x = ball_point(rng.uniform(0, 4), rng.uniform(0, 2 * math.pi))
                xi = np.array([math.cos(rng.uniform(0, 2 * math.pi)), 0.0])
                xi[1] = math.sqrt(1 - xi[0] ** 2)
            else:
                x = np.array([rng.uniform(0, 4), rng.uniform(-math.pi, math.pi)])
                xi = rng.uniform(-math.pi, math.pi)
            ray = space.ray(x, xi)
            s, t = sorted(rng.uniform(0.1, 12.0, size=2))
            if t - s < 0.05:
                continue
            d = space.distance(ray.point_at(s), ray.point_at(t))
            assert d == pytest.approx(t - s, rel=1e-6, abs=1e-8)


def test_ray_converges_to_target_angle(ball2, warped):
    t_check = 20.0
    xi = np.array([0.0, 1.0])
    x = np.array([0.3, -0.4])
    p = ray_to_boundary(ball2, x, xi).point_at(t_check)
    ang = math.atan2(p[1], p[0])
    assert abs(ang - math.pi / 2) < 1e-3
    xs = np.array([2.0, 0.3])
    ps = ray_to_boundary(warped, xs, 2.0).point_at(t_check)
    assert abs(ps[1] - 2.0) < 1e-3


def test_warped_ray_to_antipode_passes_pole(h2_surface):
    ray = ray_to_boundary(h2_surface, np.array([1.0, 0.0]), math.pi)
    r_min = min(ray.point_at(t)[0] for t in np.linspace(0.0, 3.0, 61))
    assert r_min < 1e-9


def test_angles_at_center(ball2):
    assert riemannian_angle(ball2, ball2.origin, np.array([0.5, 0.0]),
                            np.array([0.0, 0.5])) == pytest.approx(math.pi / 2, abs=1e-12)


def test_angle_coincident_targets_zero(ball2):
    p = np.array([0.5, 0.1])
    assert riemannian_angle(ball2, ball2.origin, p, p) == pytest.approx(0.0, abs=1e-12)


def test_angle_between_opposite_geodesics(ball2):
    x = np.array([0.5, 0.0])
    assert riemannian_angle(ball2, x, ball2.origin, np.array([1.0, 0.0])) == pytest.approx(
        math.pi, abs=1e-12
    )


def test_degenerate_angle_raises(ball2, warped):
    x = np.array([0.5, 0.0])
    with pytest.raises(DegenerateAngleError):
        riemannian_angle(ball2, x, x, np.array([0.1, 0.1]))
    xs = np.array([1.0, 0.5])
    with pytest.raises(DegenerateAngleError):
        riemannian_angle(warped, xs, xs, np.array([2.0, 0.0]))


def test_warped_angle_matches_law_of_cosines(h2_surface):
    rng = np.random.default_rng(4)
    for _ in range(15):
        x = np.array([rng.uniform(0.3, 5), rng.uniform(-math.pi, math.pi)])
        y = np.array([rng.uniform(0.3, 5), rng.uniform(-math.pi, math.pi)])
        z = np.array([rng.uniform(0.3, 5), rng.uniform(-math.pi, math.pi)])
        da = h2_surface.distance(x, y)
        db = h2_surface.distance(x, z)
        dc = h2_surface.distance(y, z)
        if min(da, db) < 1e-2:
            continue
        want = math.acos(
            min(1, max(-1, (math.cosh(da) * math.cosh(db) - math.cosh(dc))
                       / (math.sinh(da) * math.sinh(db))))
        )
        assert h2_surface.angle(x, y, z) == pytest.approx(want, abs=1e-7)


# ---------------------------------------------------------------------------
# warping machinery
# ---------------------------------------------------------------------------


def test_warping_table_sinh_oracle():
    tab = solve_warping(constant_profile(1.0), 10.0, a=1.0, b=1.0)
    assert tab.eval_f(np.array([1.0]))[0] == pytest.approx(math.sinh(1.0), abs=2e-7)
    assert tab.eval_f(np.array([1.0]))[0] == pytest.approx(1.1752012, abs=1e-6)
    r = np.linspace(0.1, 9.5, 40)
    assert np.allclose(tab.eval_f(r), np.sinh(r), rtol=1e-10)
    assert np.allclose(tab.eval_fp(r), np.cosh(r), rtol=1e-10)


def test_warping_rescaled_curvature():
    a = 2.0
    tab = solve_warping(constant_profile(a), 5.0, a=a, b=a)
    r = np.linspace(0.1, 4.5, 20)
    assert np.allclose(tab.eval_f(r), np.sinh(a * r) / a, rtol=1e-10)


def test_warping_initial_conditions():
    tab = solve_warping(default_profile(1.0, 2.0), 5.0, a=1.0, b=2.0)
    assert tab.f[0] == 0.0
    assert tab.fp[0] == 1.0


def test_warping_residual_on_grid(warped):
    tab = warped.table
    k = default_profile(1.0, 2.0)(tab.r)
    assert np.allclose(tab.fpp, -k * tab.f, rtol=1e-12)


def test_pinching_violation_reported():
    def bad_profile(r):
        r = np.asarray(r, dtype=float)
        return -(1.0 + 5.0 * np.where(r > 1.0, 1.0, 0.0))

    with pytest.raises(PinchingViolationError) as err:
        solve_warping(bad_profile, 3.0, a=1.0, b=2.0)
    assert err.value.node_r >= 1.0


def test_warping_csv_round_trip(tmp_path, warped):
    path = tmp_path / "warp.csv"
    warped.table.to_csv(path)
    from hadamardlab.spaces import WarpingTable

    tab2 = WarpingTable.from_csv(path)
    assert np.array_equal(tab2.r, warped.table.r)
    assert np.array_equal(tab2.f, warped.table.f)
    assert np.array_equal(tab2.fp, warped.table.fp)
    r = np.linspace(0.05, 10.0, 17)
    assert np.allclose(tab2.eval_f(r), warped.table.eval_f(r), rtol=1e-9)


def test_constant_curvature_surface_isometric_to_ball(h2_surface, ball2):
    rng = np.random.default_rng(6)
    for _ in range(30):
        r1, r2 = rng.uniform(0, 7, 2)
        p1, p2 = rng.uniform(-math.pi, math.pi, 2)
        ds = h2_surface.distance(np.array([r1, p1]), np.array([r2, p2]))
        db = ball2.distance(ball_point(r1, p1), ball_point(r2, p2))
        assert ds == pytest.approx(db, rel=1e-5, abs=1e-8)


def test_antipodal_through_pole(h2_surface):
    d = h2_surface.distance(np.array([1.0, 0.0]), np.array([1.0, math.pi]))
    assert d == pytest.approx(2.0, rel=1e-10)


def test_warped_radial_geodesics():
    surf = WarpedSurface.default(1.0, 2.0)
    pt = surf.exp(surf.origin, np.array([math.cos(1.2), math.sin(1.2)]), 3.0)
    assert pt[0] == pytest.approx(3.0, abs=1e-12)
    assert pt[1] == pytest.approx(1.2, abs=1e-12)


def test_alexandrov_angle_sandwich(warped):
    from hadamardlab.invariants import comparison_angle

    rng = np.random.default_rng(7)
    a, b = warped.curvature_bounds.a, warped.curvature_bounds.b
    checked = 0
    for _ in range(25):
        x = np.array([rng.uniform(0.2, 5), rng.uniform(-math.pi, math.pi)])
        y = np.array([rng.uniform(0.2, 5), rng.uniform(-math.pi, math.pi)])
        z = np.array([rng.uniform(0.2, 5), rng.uniform(-math.pi, math.pi)])
        d1 = warped.distance(x, y)
        d2 = warped.distance(x, z)
        d12 = warped.distance(y, z)
        if min(d1, d2) < 0.05 or d12 < 1e-3 or d12 > d1 + d2 - 1e-6:
            continue
        theta = warped.angle(x, y, z)
        low = comparison_angle(d1, d2, d12, b)
        high = comparison_angle(d1, d2, d12, a)
        assert theta >= low - 1e-5
        assert theta <= high + 1e-5
        checked += 1
    assert checked > 10


def test_point_validation(ball2, warped):
    with pytest.raises(GeometryDomainError):
        ball2.check_point(np.array([1.2, 0.0]))
    with pytest.raises(GeometryDomainError):
        ball2.check_boundary(np.array([0.5, 0.0]))
    with pytest.raises(GeometryDomainError):
        warped.check_point(np.array([-0.5, 0.0]))
    with pytest.raises(GeometryDomainError):
        BallModel(1, 1.0)
    with pytest.raises(GeometryDomainError):
        BallModel(2, -1.0)
