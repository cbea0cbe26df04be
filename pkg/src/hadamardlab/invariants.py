"""Gromov products, the Busemann cocycle, comparison trigonometry, and the
angle/product inequalities checked on both model spaces.

Ideal quantities are truncated limits: an ideal point is replaced by the point
at arclength T on the geodesic ray toward it, and the value is reported
together with the T-vs-2T difference as the truncation-error estimate.  On the
ball model the truncated values are assembled from the stable hyperbolic law
of cosines instead of far coordinate points, which lose all precision beyond
rho ~ 18/a.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    CollinearPointsError,
    GeometryDomainError,
    PrecisionError,
)
from .sampling import random_points
from .spaces import BallModel, wrap_angle


@dataclass
class TruncatedValue:
    """Ideal-limit estimate: iterates at T and 2T, their gap as error report."""

    value: float
    value_at_t: float
    error: float
    infinite: bool = False

    def require(self, tol):
        if tol is not None and not self.infinite and self.error > tol:
            raise PrecisionError(
                f"truncation error {self.error} above tolerance {tol}",
                self.value_at_t,
                self.value,
            )
        return self


def default_truncation(space):
    return 30.0 / space.curvature_bounds.a


# ---------------------------------------------------------------------------
# comparison trigonometry (stable at any range)
# ---------------------------------------------------------------------------


def comparison_side(d1, d2, theta, rate):
    """Third side of the triangle with sides d1, d2 and angle theta in H^2(-rate^2).

    Evaluates cosh(k*d12) = cosh cosh - sinh sinh cos(theta) through the
    exponentially scaled form, so it stays exact for k*d in the hundreds.
    """
    if d1 < 0 or d2 < 0 or rate <= 0:
        raise GeometryDomainError("sides must be nonnegative and rate positive")
    if d1 == 0.0 or d2 == 0.0:
        return d1 + d2
    k = rate
    e1 = math.exp(-2.0 * k * d1)
    e2 = math.exp(-2.0 * k * d2)
    sin_half_sq = math.sin(0.5 * theta) ** 2
    cos_plus = 1.0 + math.cos(theta)
    q = 2.0 * sin_half_sq * (1.0 + e1 * e2) + cos_plus * (e1 + e2)
    if q <= 0.0:  # theta = 0 with both endpoints at infinity in exact arithmetic
        return abs(d1 - d2)
    log_c = k * (d1 + d2) + math.log(0.25 * q)
    if log_c > 20.0:
        return (log_c + math.log(2.0)) / k
    c = math.exp(log_c)
    return math.acosh(max(c, 1.0)) / k


def comparison_angle(d1, d2, d12, rate):
    """Angle opposite d12 in the comparison triangle in H^2(-rate^2)."""
    if d1 <= 0 or d2 <= 0:
        raise GeometryDomainError("comparison angle needs positive adjacent sides")
    if rate <= 0:
        raise GeometryDomainError("curvature rate must be positive")
    slack = 1e-12 * (d1 + d2 + d12)
    if d12 > d1 + d2 + slack or d12 < abs(d1 - d2) - slack:
        raise GeometryDomainError(
            f"triangle inequality violated: d1={d1}, d2={d2}, d12={d12}"
        )
    k = rate
    lo = abs(d1 - d2)
    hi = d1 + d2
    d12 = min(max(d12, lo), hi)
    # sin^2(theta/2) = (cosh k d12 - cosh k(d1-d2)) / (2 sinh k d1 sinh k d2),
    # scaled by e^{-k(d1+d2)} throughout
    e1 = math.exp(-2.0 * k * d1)
    e2 = math.exp(-2.0 * k * d2)
    num = (
        math.exp(k * (d12 - d1 - d2))
        + math.exp(-k * (d12 + d1 + d2))
        - math.exp(-2.0 * k * min(d1, d2))
        - math.exp(-2.0 * k * max(d1, d2))
    )
    den = (1.0 - e1) * (1.0 - e2)
    s2 = min(max(num / den, 0.0), 1.0)
    return 2.0 * math.asin(math.sqrt(s2))


# ---------------------------------------------------------------------------
# Gromov products and the Busemann cocycle
# ---------------------------------------------------------------------------


def gromov_product(space, x, y, z):
    """(y|z)_x = (d(x,y) + d(x,z) - d(y,z)) / 2."""
    return 0.5 * (space.distance(x, y) + space.distance(x, z) - space.distance(y, z))


def _ideal_product_ball(space, x, p, xi, t):
    """Truncated (p|xi)_x on the ball via the law of cosines; no far coordinates."""
    if space.is_boundary(p):
        theta = space.angle(x, p, xi)
        d_pz = comparison_side(t, t, theta, space.a)
        return 0.5 * (2.0 * t - d_pz)
    theta = space.angle(x, p, xi)
    d_xp = float(space.distance(x, p))
    d_pz = comparison_side(d_xp, t, theta, space.a)
    return 0.5 * (d_xp + t - d_pz)


def _ideal_product_generic(space, x, p, xi, t):
    z = space.ray(x, xi).point_at(t)
    if space.is_boundary(p):
        w = space.ray(x, p).point_at(t)
        return gromov_product(space, x, w, z)
    return gromov_product(space, x, p, z)


def gromov_product_ideal(space, x, p, xi, t=None, tol=None):
    """Truncated Gromov product (p|xi)_x with p interior or ideal.

    Returns a TruncatedValue carrying the iterates at T and 2T; flags +inf
    when both arguments are the same ideal point.
    """
    if t is None:
        t = default_truncation(space)
    if t <= 0:
        raise GeometryDomainError("truncation parameter must be positive")
    if space.is_boundary(p):
        if space.boundary_angle(p, xi) < 1e-15:
            return TruncatedValue(math.inf, math.inf, 0.0, infinite=True)
    elif float(space.distance(x, p)) < 1e-14:
        return TruncatedValue(0.0, 0.0, 0.0)  # (x|xi)_x = 0 by definition
    impl = _ideal_product_ball if isinstance(space, BallModel) else _ideal_product_generic
    v1 = impl(space, x, p, xi, t)
    v2 = impl(space, x, p, xi, 2.0 * t)
    return TruncatedValue(v2, v1, abs(v2 - v1)).require(tol)


def _busemann_ball(space, x, y, xi, t):
    xi = space.check_boundary(xi)
    dx = float(space.distance(space.origin, x))
    dy = float(space.distance(space.origin, y))
    th_x = space.angle(space.origin, x, xi) if dx > 1e-15 else 0.0
    th_y = space.angle(space.origin, y, xi) if dy > 1e-15 else 0.0
    d_xz = comparison_side(dx, t, th_x, space.a) if dx > 1e-15 else t
    d_yz = comparison_side(dy, t, th_y, space.a) if dy > 1e-15 else t
    return d_xz - d_yz


def _busemann_generic(space, x, y, xi, t):
    z = space.point_at_rho(t, xi)
    return float(space.distance(x, z)) - float(space.distance(y, z))


def busemann(space, x, y, xi, t=None, tol=None):
    """Busemann cocycle B(x, y, xi), truncated along the ray from the origin."""
    if t is None:
        t = default_truncation(space)
    if t <= 0:
        raise GeometryDomainError("truncation parameter must be positive")
    impl = _busemann_ball if isinstance(space, BallModel) else _busemann_generic
    v1 = impl(space, x, y, xi, t)
    v2 = impl(space, x, y, xi, 2.0 * t)
    return TruncatedValue(v2, v1, abs(v2 - v1)).require(tol)


def busemann_gromov_identity_slack(space, x, xi, t=None):
    """Residuals of B(o,x,xi) = d(o,x) - 2(o|xi)_x = -d(o,x) + 2(x|xi)_o."""
    o = space.origin
    d = float(space.distance(o, x))
    b = busemann(space, o, x, xi, t=t).value
    g_ox = gromov_product_ideal(space, x, o, xi, t=t).value
    g_xo = gromov_product_ideal(space, o, x, xi, t=t).value
    return b - (d - 2.0 * g_ox), b - (-d + 2.0 * g_xo)


# ---------------------------------------------------------------------------
# angle vs Gromov product inequalities
# ---------------------------------------------------------------------------


def lemma41_terms(space, x, xi, eta, t=None):
    """(lhs, rhs) = (e^{-b (xi|eta)_x}, sin(theta/2)) for ideal xi != eta."""
    if space.boundary_angle(xi, eta) < 1e-15:
        raise GeometryDomainError("needs two distinct ideal points")
    theta = space.angle(x, xi, eta)
    g = gromov_product_ideal(space, x, xi, eta, t=t).value
    return math.exp(-space.curvature_bounds.b * g), math.sin(0.5 * theta)


def lemma41_slack(space, x, xi, eta, t=None):
    """sin(theta/2) - e^{-b (xi|eta)_x}; nonnegative in theory."""
    lhs, rhs = lemma41_terms(space, x, xi, eta, t=t)
    return rhs - lhs


def lemma42_terms(space, x, y, xi, t=None):
    """(lhs, rhs) = (e^{-2b(y|xi)_x} - e^{-2b d}, sin^2(theta/2)); skip on collinear."""
    theta = space.angle(x, y, xi)
    if theta < 1e-9:
        raise CollinearPointsError("x, y, xi collinear within tolerance")
    b = space.curvature_bounds.b
    d = float(space.distance(x, y))
    g = gromov_product_ideal(space, x, y, xi, t=t).value
    return math.exp(-2 * b * g) - math.exp(-2 * b * d), math.sin(0.5 * theta) ** 2


def lemma42_slack(space, x, y, xi, t=None):
    """sin^2(theta/2) - (e^{-2b(y|xi)_x} - e^{-2b d(x,y)}); skip on collinear input."""
    lhs, rhs = lemma42_terms(space, x, y, xi, t=t)
    return rhs - lhs


def lemma43_terms(space, x, y, xi, t=None):
    """(lhs, rhs) = (sin^2(theta/2), quotient bound at rate a); skip on collinear."""
    theta = space.angle(x, y, xi)
    if theta < 1e-9:
        raise CollinearPointsError("x, y, xi collinear within tolerance")
    a = space.curvature_bounds.a
    d = float(space.distance(x, y))
    g = gromov_product_ideal(space, x, y, xi, t=t).value
    rhs = (math.exp(-2 * a * g) - math.exp(-2 * a * d)) / (1.0 - math.exp(-2 * a * d))
    return math.sin(0.5 * theta) ** 2, rhs


def lemma43_slack(space, x, y, xi, t=None):
    """(e^{-2a(y|xi)_x} - e^{-2ad})/(1 - e^{-2ad}) - sin^2(theta/2); skip on collinear."""
    lhs, rhs = lemma43_terms(space, x, y, xi, t=t)
    return rhs - lhs


def subtended_ball_angle(space, x, radius):
    """Half-aperture at the origin of the smallest cone containing B(x, radius)."""
    rho = float(space.distance(space.origin, x))
    if rho <= radius:
        raise GeometryDomainError(f"need d(o,x) > radius, got rho={rho}, radius={radius}")
    if isinstance(space, BallModel):
        a = space.a
        return math.asin(math.sinh(a * radius) / math.sinh(a * rho))
    x = space.check_point(x)

    def neg_angle(chi):
        v = np.array([math.cos(chi), math.sin(chi)])
        y = space.exp(x, v, radius)
        return -abs(wrap_angle(y[1] - x[1]))

    res = minimize_scalar(neg_angle, bounds=(0.0, math.pi), method="bounded",
                          options={"xatol": 1e-10})
    return -res.fun


# ---------------------------------------------------------------------------
# caps and cones
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapSpec:
    """Closed spherical cap around an ideal point, radius measured at the origin."""

    center: object
    radius: float

    def __post_init__(self):
        if not (0 < self.radius <= math.pi):
            raise GeometryDomainError(f"cap radius must be in (0, pi], got {self.radius}")


@dataclass(frozen=True)
class ConeSpec:
    """Open cone with an interior vertex; optionally truncated below radius R."""

    vertex: object
    axis: object
    aperture: float
    truncation: float = None

    def __post_init__(self):
        if not (0 < self.aperture < math.pi):
            raise GeometryDomainError(f"aperture must be in (0, pi), got {self.aperture}")
        if self.truncation is not None and self.truncation < 0:
            raise GeometryDomainError("truncation radius must be nonnegative")


def cap_contains(space, cap, eta):
    return space.boundary_angle(cap.center, eta) <= cap.radius


def cone_contains(space, cone, y):
    if space.distance(cone.vertex, y) < 1e-14:
        return False
    theta = _angle_from_axis(space, cone, y)
    if theta >= cone.aperture:
        return False
    if cone.truncation is not None:
        return float(space.distance(cone.vertex, y)) >= cone.truncation
    return True


def cone_contains_ideal(space, cone, eta):
    """Membership of an ideal point in the cone's ideal cap."""
    return _angle_from_axis(space, cone, eta) < cone.aperture


def _angle_from_axis(space, cone, target):
    if isinstance(space, BallModel):
        v = space.direction(cone.vertex, target)
        axis = np.asarray(cone.axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        dot = float(np.dot(v, axis))
        return math.acos(min(1.0, max(-1.0, dot)))
    v = space._direction_to(np.asarray(cone.vertex, dtype=float), target)
    axis = np.asarray(cone.axis, dtype=float)
    if np.ndim(v) == 0:
        # vertex at the pole: directions are coordinate angles
        return abs(wrap_angle(float(v) - math.atan2(axis[1], axis[0])))
    axis = axis / np.linalg.norm(axis)
    return math.atan2(abs(v[0] * axis[1] - v[1] * axis[0]), float(np.dot(v, axis)))


# ---------------------------------------------------------------------------
# hyperbolicity constant
# ---------------------------------------------------------------------------


def fit_delta_hyperbolicity(space, count=2000, seed=11, rho_max=6.0):
    """Largest deficiency of (x|z)_w >= min((x|y)_w, (y|z)_w) - delta on random quadruples."""
    pts = random_points(space, 4 * count, seed, rho_max)
    worst = 0.0
    for i in range(count):
        w, x, y, z = pts[4 * i], pts[4 * i + 1], pts[4 * i + 2], pts[4 * i + 3]
        gxz = gromov_product(space, w, x, z)
        gxy = gromov_product(space, w, x, y)
        gyz = gromov_product(space, w, y, z)
        worst = max(worst, min(gxy, gyz) - gxz)
    return worst
