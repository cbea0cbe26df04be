"""Model Hadamard manifolds and their metric primitives.

Two families are implemented:

* ``BallModel`` -- the constant-curvature Poincare ball of curvature -a^2 in
  dimension n >= 2.  Everything is closed form; computations run at curvature
  -1 internally and distances rescale by 1/a.
* ``WarpedSurface`` -- a rotationally symmetric surface dr^2 + f(r)^2 dphi^2
  with Gauss curvature K(r) = -f''/f pinched in [-b^2, -a^2].  The warping
  function is tabulated by a fixed-step RK4 solve of f'' = -K f and geodesics
  are resolved through the Clairaut first integral c = f^2 phi': angular
  advance and arclength along a geodesic are quadratures of closed-form
  integrands in r, and boundary-value problems reduce to a one-parameter root
  solve in c (equivalently the turning radius).

Interior points are coordinate arrays (ball: |u| < 1; surface: (r, phi)).
Ideal points are unit direction vectors on the ball and bare angles on the
surface; helpers below classify arguments by that convention.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateAngleError,
    GeometryDomainError,
    PinchingViolationError,
    ShootingError,
)

TWO_PI = 2.0 * math.pi

# Gauss-Legendre rule shared by all leg quadratures
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)  # map to [0, 1]
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def wrap_angle(phi):
    """Reduce an angle to (-pi, pi]."""
    w = math.fmod(phi + math.pi, TWO_PI)
    if w <= 0.0:
        w += TWO_PI
    return w - math.pi


def angle_between(v1, v2):
    """Angle in [0, pi] between two 2-vectors (frame components)."""
    cross = v1[0] * v2[1] - v1[1] * v2[0]
    dot = v1[0] * v2[0] + v1[1] * v2[1]
    return math.atan2(abs(cross), dot)


@dataclass(frozen=True)
class CurvatureBounds:
    """Pinching rates: sectional curvature lies in [-b^2, -a^2]."""

    a: float
    b: float

    def __post_init__(self):
        if not (0 < self.a <= self.b):
            raise GeometryDomainError(f"need 0 < a <= b, got a={self.a}, b={self.b}")


@dataclass
class GeodesicRay:
    """Unit-speed ray from ``base`` toward the ideal point ``target``.

    ``direction`` holds the initial unit tangent: a Euclidean direction vector
    on the ball, (radial, circumferential) frame components on the surface.
    """

    space: "ModelSpace"
    base: np.ndarray
    direction: np.ndarray
    target: object
    _evaluator: object = None

    def point_at(self, t):
        return self._evaluator(t)


def mobius_add(x, y):
    """Mobius addition on the unit ball, broadcasting over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xy = np.sum(x * y, axis=-1, keepdims=True)
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    y2 = np.sum(y * y, axis=-1, keepdims=True)
    num = (1.0 + 2.0 * xy + y2) * x + (1.0 - x2) * y
    den = 1.0 + 2.0 * xy + x2 * y2
    return num / den


class ModelSpace:
    """Shared interface of the two model families."""

    curvature_bounds: CurvatureBounds

    @property
    def origin(self):
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def exp(self, x, v, t):
        raise NotImplementedError

    def ray(self, x, xi):
        raise NotImplementedError

    def angle(self, x, p, q):
        raise NotImplementedError

    def boundary_angle(self, xi, eta):
        """Angle at the origin between two ideal points."""
        raise NotImplementedError

    def is_boundary(self, obj):
        raise NotImplementedError

    def rho(self, x):
        return self.distance(self.origin, x)


class BallModel(ModelSpace):
    """Poincare ball of dimension n and constant curvature -a^2."""

    def __init__(self, n=2, a=1.0):
        if n < 2 or int(n) != n:
            raise GeometryDomainError(f"dimension must be an integer >= 2, got {n}")
        if a <= 0:
            raise GeometryDomainError(f"curvature rate must be positive, got {a}")
        self.n = int(n)
        self.a = float(a)
        self.curvature_bounds = CurvatureBounds(self.a, self.a)

    def __repr__(self):
        return f"BallModel(n={self.n}, a={self.a})"

    @property
    def space_id(self):
        return f"ball_n{self.n}_a{self.a:g}"

    @property
    def origin(self):
        return np.zeros(self.n)

    def is_boundary(self, obj):
        u = np.asarray(obj, dtype=float)
        if u.shape[-1] != self.n:
            raise GeometryDomainError(f"expected {self.n} coordinates, got shape {u.shape}")
        return bool(np.linalg.norm(u) >= 1.0 - 1e-14)

    def check_point(self, x):
        u = np.asarray(x, dtype=float)
        if u.shape != (self.n,):
            raise GeometryDomainError(f"point must have shape ({self.n},), got {u.shape}")
        if not np.all(np.isfinite(u)) or np.linalg.norm(u) >= 1.0:
            raise GeometryDomainError(f"ball point must satisfy |u| < 1, got |u|={np.linalg.norm(u)}")
        return u

    def check_boundary(self, xi):
        v = np.asarray(xi, dtype=float)
        if v.shape != (self.n,):
            raise GeometryDomainError(f"ideal point must have shape ({self.n},), got {v.shape}")
        norm = np.linalg.norm(v)
        if not math.isfinite(norm) or abs(norm - 1.0) > 1e-9:
            raise GeometryDomainError(f"ideal point must be unit, got |v|={norm}")
        return v / norm

    def distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d2 = np.sum((x - y) ** 2, axis=-1)
        xy = np.sum(x * y, axis=-1)
        x2 = np.sum(x * x, axis=-1)
        y2 = np.sum(y * y, axis=-1)
        m2 = d2 / (1.0 - 2.0 * xy + x2 * y2)
        m = np.sqrt(np.clip(m2, 0.0, 1.0 - 1e-300))
        return (2.0 / self.a) * np.arctanh(m)

    def exp(self, x, v, t):
        """Point at arclength t along the geodesic from x with unit direction v."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise GeometryDomainError("arclength must be nonnegative")
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v, axis=-1, keepdims=True)
        reach = np.tanh(0.5 * self.a * t)
        if reach.ndim:
            reach = reach[..., None]
        return mobius_add(x, reach * v)

    def direction(self, x, target):
        """Unit Euclidean direction at x of the geodesic toward target.

        ``target`` may be interior or ideal; the same Mobius formula covers both.
        """
        w = mobius_add(-np.asarray(x, dtype=float), np.asarray(target, dtype=float))
        norm = np.linalg.norm(w, axis=-1, keepdims=True)
        if np.any(norm < 1e-300):
            raise DegenerateAngleError("direction undefined: target coincides with base point")
        return w / norm

    def ray(self, x, xi):
        x = self.check_point(x)
        xi = self.check_boundary(xi)
        eta = self.direction(x, xi)

        def evaluator(t):
            return self.exp(x, eta, t)

        return GeodesicRay(self, x, eta, xi, evaluator)

    def angle(self, x, p, q):
        x = self.check_point(x)
        vp = self.direction(x, p)
        vq = self.direction(x, q)
        cross = np.linalg.norm(np.cross(vp, vq)) if self.n == 3 else abs(vp[0] * vq[1] - vp[1] * vq[0])
        if self.n > 3:
            dot = float(np.dot(vp, vq))
            return math.acos(min(1.0, max(-1.0, dot)))
        return math.atan2(cross, float(np.dot(vp, vq)))

    def boundary_angle(self, xi, eta):
        xi = self.check_boundary(xi)
        eta = self.check_boundary(eta)
        dot = float(np.dot(xi, eta))
        return math.acos(min(1.0, max(-1.0, dot)))

    def boundary_angles(self, center, hits):
        """Vectorized angle at the origin between ``center`` and rows of ``hits``."""
        center = self.check_boundary(center)
        hits = np.asarray(hits, dtype=float)
        return np.arccos(np.clip(hits @ center, -1.0, 1.0))

    def busemann_exact(self, x, xi):
        """Closed-form Busemann cocycle B(o, x, xi)."""
        x = np.asarray(x, dtype=float)
        xi = self.check_boundary(xi)
        x2 = np.sum(x * x, axis=-1)
        return np.log((1.0 - x2) / np.sum((x - xi) ** 2, axis=-1)) / self.a

    def point_at_rho(self, rho, direction):
        """Point at distance rho from the origin in a given unit direction."""
        direction = np.asarray(direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        return math.tanh(0.5 * self.a * rho) * direction


# ---------------------------------------------------------------------------
# warped surface
# ---------------------------------------------------------------------------


def default_profile(a, b):
    """Smooth even curvature profile oscillating between -a^2 and -b^2."""

    def profile(r):
        r = np.asarray(r, dtype=float)
        return -(a * a + (b * b - a * a) * 0.5 * (1.0 - np.cos(r)))

    return profile


def constant_profile(a):
    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.full_like(r, -a * a)

    return profile


@dataclass
class WarpingTable:
    """Tabulated warping function on a uniform radial grid.

    Stores f, f' and f'' = -K f at the nodes; evaluation between nodes is
    cubic Hermite (f from (f, f'), f' from (f', f'')).
    """

    r: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray
    ode_error: float

    @property
    def spacing(self):
        return self.r[1] - self.r[0]

    @property
    def r_max(self):
        return self.r[-1]

    def _segment(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < -1e-12) or np.any(r > self.r_max * (1 + 1e-12)):
            raise GeometryDomainError(
                f"radius outside warping table [0, {self.r_max}]: {r[(r < 0) | (r > self.r_max)]}"
            )
        h = self.spacing
        idx = np.clip((r / h).astype(int), 0, len(self.r) - 2)
        s = (r - self.r[idx]) / h
        return idx, s, h

    def f_scalar(self, r):
        """Scalar fast path for f(r)."""
        h = self.spacing
        if r < 0 or r > self.r_max * (1 + 1e-12):
            raise GeometryDomainError(f"radius {r} outside warping table [0, {self.r_max}]")
        i = min(int(r / h), len(self.r) - 2)
        s = (r - i * h) / h
        s2 = s * s
        s3 = s2 * s
        return (
            (2 * s3 - 3 * s2 + 1) * self.f[i]
            + (s3 - 2 * s2 + s) * h * self.fp[i]
            + (-2 * s3 + 3 * s2) * self.f[i + 1]
            + (s3 - s2) * h * self.fp[i + 1]
        )

    def fp_scalar(self, r):
        """Scalar fast path for f'(r)."""
        h = self.spacing
        if r < 0 or r > self.r_max * (1 + 1e-12):
            raise GeometryDomainError(f"radius {r} outside warping table [0, {self.r_max}]")
        i = min(int(r / h), len(self.r) - 2)
        s = (r - i * h) / h
        s2 = s * s
        s3 = s2 * s
        return (
            (2 * s3 - 3 * s2 + 1) * self.fp[i]
            + (s3 - 2 * s2 + s) * h * self.fpp[i]
            + (-2 * s3 + 3 * s2) * self.fp[i + 1]
            + (s3 - s2) * h * self.fpp[i + 1]
        )

    def eval_f(self, r):
        idx, s, h = self._segment(r)
        s2 = s * s
        s3 = s2 * s
        return (
            (2 * s3 - 3 * s2 + 1) * self.f[idx]
            + (s3 - 2 * s2 + s) * h * self.fp[idx]
            + (-2 * s3 + 3 * s2) * self.f[idx + 1]
            + (s3 - s2) * h * self.fp[idx + 1]
        )

    def eval_fp(self, r):
        idx, s, h = self._segment(r)
        s2 = s * s
        s3 = s2 * s
        return (
            (2 * s3 - 3 * s2 + 1) * self.fp[idx]
            + (s3 - 2 * s2 + s) * h * self.fpp[idx]
            + (-2 * s3 + 3 * s2) * self.fp[idx + 1]
            + (s3 - s2) * h * self.fpp[idx + 1]
        )

    def finv(self, c):
        """Radius with f(r) = c (f is strictly increasing)."""
        if c < 0:
            raise GeometryDomainError("warping values are nonnegative")
        if c == 0.0:
            return 0.0
        if c > self.f[-1]:
            raise GeometryDomainError(f"f^-1({c}) beyond table range (f_max={self.f[-1]})")
        i = int(np.searchsorted(self.f, c)) - 1
        i = max(0, min(i, len(self.r) - 2))
        lo, hi = self.r[i], self.r[i + 1]
        flo, fhi = self.f[i], self.f[i + 1]
        r = lo + (c - flo) / max(fhi - flo, 1e-300) * (hi - lo)
        for _ in range(4):
            r -= (self.f_scalar(r) - c) / self.fp_scalar(r)
            r = min(max(r, lo), hi)
        return r

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "f", "fprime"])
            for r, f, fp in zip(self.r, self.f, self.fp):
                w.writerow([format(r, ".17g"), format(f, ".17g"), format(fp, ".17g")])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != ["r", "f", "fprime"]:
            raise GeometryDomainError(f"unexpected warping CSV header: {rows[0]}")
        data = np.array([[float(v) for v in row] for row in rows[1:]])
        r, f, fp = data[:, 0], data[:, 1], data[:, 2]
        # second derivative from a Hermite fit of f (f'' = -K f is not stored)
        h = r[1] - r[0]
        fpp = np.gradient(fp, h, edge_order=2)
        return cls(r=r, f=f, fp=fp, fpp=fpp, ode_error=float("nan"))


def _rk4_warping(k_full, k_half, h):
    """Fixed-step RK4 for f'' = -K f with f(0)=0, f'(0)=1.

    ``k_full`` holds K at the step endpoints (len N+1), ``k_half`` at midpoints
    (len N).  Returns (f, fp) at the endpoints.
    """
    n = len(k_half)
    f = np.empty(n + 1)
    fp = np.empty(n + 1)
    f[0] = 0.0
    fp[0] = 1.0
    y0, y1 = 0.0, 1.0
    for i in range(n):
        ka, km, kb = k_full[i], k_half[i], k_full[i + 1]
        a1 = y1
        b1 = -ka * y0
        a2 = y1 + 0.5 * h * b1
        b2 = -km * (y0 + 0.5 * h * a1)
        a3 = y1 + 0.5 * h * b2
        b3 = -km * (y0 + 0.5 * h * a2)
        a4 = y1 + h * b3
        b4 = -kb * (y0 + h * a3)
        y0 += h * (a1 + 2 * a2 + 2 * a3 + a4) / 6.0
        y1 += h * (b1 + 2 * b2 + 2 * b3 + b4) / 6.0
        f[i + 1] = y0
        fp[i + 1] = y1
    return f, fp


try:  # compiled variant; falls back to the python loop if numba is missing
    import numba as _nb

    _rk4_warping = _nb.njit(cache=True)(_rk4_warping)
except ImportError:  # pragma: no cover
    pass


def solve_warping(profile, r_max, tol=1e-9, a=None, b=None, step=None, spacing=None):
    """Build a warping table for curvature profile K on [0, r_max].

    The profile must be vectorized over numpy arrays and satisfy
    -b^2 <= K(r) <= -a^2 when pinching rates are supplied.  Integrates
    f'' = -K f by classical RK4 at fixed step (default 1e-3/b) and tabulates
    every node of a grid with default spacing 1e-2/b; a halved-step Richardson
    pass estimates the ODE error and must come in below ``tol`` relatively.
    """
    rate = b if b is not None else 1.0
    if step is None:
        step = 1e-3 / rate
    if spacing is None:
        spacing = 1e-2 / rate
    per_node = max(1, round(spacing / step))
    spacing = per_node * step
    n_nodes = int(math.ceil(r_max / spacing))
    if (n_nodes * per_node) % 2:  # Richardson halving needs an even step count
        n_nodes += 1
    n_steps = n_nodes * per_node
    grid_full = np.linspace(0.0, n_steps * step, n_steps + 1)
    grid_half = grid_full[:-1] + 0.5 * step
    k_full = np.asarray(profile(grid_full), dtype=float)
    k_half = np.asarray(profile(grid_half), dtype=float)
    if a is not None and b is not None:
        lo, hi = -b * b - 1e-9 * b * b, -a * a + 1e-9 * a * a
        bad = (k_full < lo) | (k_full > hi)
        if np.any(bad):
            node = float(grid_full[np.argmax(bad)])
            raise PinchingViolationError(
                f"profile leaves [-b^2, -a^2] = [{-b * b}, {-a * a}] at r={node}", node
            )
    f_fine, fp_fine = _rk4_warping(k_full, k_half, step)

    # Richardson check at doubled step on the same grid
    f_coarse, fp_coarse = _rk4_warping(k_full[::2], k_full[1::2], 2 * step)
    scale = np.maximum(np.abs(f_fine[::2]), 1.0)
    ode_error = float(np.max(np.abs(f_fine[::2] - f_coarse) / scale)) / 15.0
    if ode_error > tol:
        raise ShootingError(f"warping ODE error {ode_error} above tolerance {tol}")

    sel = slice(0, n_steps + 1, per_node)
    r_nodes = grid_full[sel]
    f_nodes = f_fine[sel]
    fp_nodes = fp_fine[sel]
    fpp_nodes = -np.asarray(profile(r_nodes), dtype=float) * f_nodes
    return WarpingTable(r=r_nodes, f=f_nodes, fp=fp_nodes, fpp=fpp_nodes, ode_error=ode_error)


class WarpedSurface(ModelSpace):
    """Rotationally symmetric surface dr^2 + f(r)^2 dphi^2 with K in [-b^2, -a^2]."""

    def __init__(self, profile, a, b, r_max=None, table=None, name="warped"):
        self.profile = profile
        self.curvature_bounds = CurvatureBounds(a, b)
        self.name = name
        if r_max is None:
            r_max = 80.0 / a
        if table is None:
            table = solve_warping(profile, r_max, a=a, b=b)
        self.table = table
        self._bisect_steps = 200

    @classmethod
    def default(cls, a=1.0, b=2.0, r_max=None):
        return cls(default_profile(a, b), a, b, r_max=r_max, name=f"default_a{a:g}_b{b:g}")

    def __repr__(self):
        cb = self.curvature_bounds
        return f"WarpedSurface(a={cb.a}, b={cb.b}, r_max={self.table.r_max:g}, name={self.name!r})"

    @property
    def a(self):
        return self.curvature_bounds.a

    @property
    def b(self):
        return self.curvature_bounds.b

    @property
    def space_id(self):
        return f"warped_a{self.a:g}_b{self.b:g}_{self.name}"

    @property
    def origin(self):
        return np.zeros(2)

    def is_boundary(self, obj):
        arr = np.asarray(obj, dtype=float)
        return arr.ndim == 0

    def check_point(self, x):
        p = np.asarray(x, dtype=float)
        if p.shape != (2,):
            raise GeometryDomainError(f"surface point must be (r, phi), got shape {p.shape}")
        if not np.all(np.isfinite(p)) or p[0] < 0:
            raise GeometryDomainError(f"surface point needs finite r >= 0, got {p}")
        if p[0] > self.table.r_max:
            raise GeometryDomainError(f"r={p[0]} beyond table r_max={self.table.r_max}")
        return p

    def check_boundary(self, xi):
        v = np.asarray(xi, dtype=float)
        if v.ndim != 0 or not np.isfinite(v):
            raise GeometryDomainError(f"surface ideal point is a single finite angle, got {xi!r}")
        return float(v)

    # -- Clairaut leg quadratures ------------------------------------------

    def _leg_quadrature(self, c, r_star, spans):
        """Angle and arclength legs from the turning radius r* = f^-1(c).

        ``spans`` are ascending positive offsets r_end - r_star; returns arrays
        (angles, lengths) of the integrals from r* to each r_end.  Substitutes
        r = r* + u^2 so the turning singularity cancels; the angle integrand
        then decays like a power law up to the curvature scale, handled by a
        geometric panel ladder.  All requested spans sit on panel edges so one
        quadrature pass serves every leg.
        """
        spans = np.asarray(spans, dtype=float)
        out_a = np.zeros(len(spans))
        out_s = spans.copy()
        if c == 0.0:
            return out_a, out_s
        span_max = float(spans[-1])
        if span_max <= 1e-300:
            return out_a, np.zeros(len(spans))
        # Below s_tiny the difference f - c drowns in the turning-radius
        # rounding; the leading-order expansion there is exact to ~1e-8 rel:
        # 1 - q^2 ~ (2 f'(r*)/c) (r - r*).
        s_tiny = 1e-8 / self.b
        coef_s = math.sqrt(2.0 * c / self.table.fp_scalar(r_star))

        def series(span):
            u = math.sqrt(span)
            return coef_s * u / c, coef_s * u

        if span_max <= s_tiny:
            for k, s in enumerate(spans):
                out_a[k], out_s[k] = series(float(s)) if s > 1e-300 else (0.0, 0.0)
            return out_a, out_s
        inv_b = 1.0 / self.b
        edges = {float(s) for s in spans if s > s_tiny}
        if r_star > 1e-300:
            s = 0.25 * r_star
            while s < min(span_max, 64.0 * inv_b):
                if s > s_tiny:
                    edges.add(s)
                s *= 4.0
        for s in (0.125 * inv_b, 0.5 * inv_b, 2.0 * inv_b, 8.0 * inv_b, 32.0 * inv_b, 128.0 * inv_b):
            if s_tiny < s < span_max:
                edges.add(s)
        edge_arr = np.array([s_tiny] + sorted(edges))
        base_a, base_s = series(s_tiny)
        u_edges = np.sqrt(edge_arr)
        lo = u_edges[:-1]
        width = np.diff(u_edges)
        u = (lo[:, None] + width[:, None] * _GL_NODES[None, :]).ravel()
        wq = (width[:, None] * _GL_WEIGHTS[None, :]).ravel()
        r = r_star + u * u
        f = self.table.eval_f(r)
        q = c / f
        one_minus_q2 = np.maximum((f - c) * (f + c), 1e-300) / (f * f)
        inv_root = 1.0 / np.sqrt(one_minus_q2)
        s_int = 2.0 * u * inv_root
        a_int = s_int * q / f
        n_gl = len(_GL_NODES)
        panel_a = (wq * a_int).reshape(-1, n_gl).sum(axis=1)
        panel_s = (wq * s_int).reshape(-1, n_gl).sum(axis=1)
        cum_a = np.concatenate([[base_a], base_a + np.cumsum(panel_a)])
        cum_s = np.concatenate([[base_s], base_s + np.cumsum(panel_s)])
        for k, s in enumerate(spans):
            if s <= 1e-300:
                out_a[k] = 0.0
                out_s[k] = 0.0
            elif s <= s_tiny:
                out_a[k], out_s[k] = series(float(s))
            else:
                j = int(np.searchsorted(edge_arr, s))
                out_a[k] = cum_a[j]
                out_s[k] = cum_s[j]
        return out_a, out_s

    def _legs_from_turn(self, c, r_star, r_ends):
        """Leg integrals from r* to each radius in ascending ``r_ends``."""
        spans = [max(0.0, re - r_star) for re in r_ends]
        return self._leg_quadrature(c, r_star, spans)

    def _legs(self, c, r_end):
        """Single (angle, arclength) leg from the turning radius of c to r_end."""
        if c < 0:
            raise GeometryDomainError("Clairaut constant must be nonnegative")
        if c == 0.0:
            return 0.0, r_end
        r_star = self.table.finv(c)
        a, s = self._legs_from_turn(c, r_star, [r_end])
        return float(a[0]), float(s[0])

    # -- geodesic boundary-value solves ------------------------------------

    def _bracket_root(self, fn, lo, hi, scale):
        try:
            return brentq(fn, lo, hi, xtol=1e-15 * max(1.0, scale), rtol=8.9e-16,
                          maxiter=self._bisect_steps)
        except (RuntimeError, ValueError) as exc:
            raise ShootingError(f"geodesic solve failed: {exc}", bracket=(lo, hi))

    def _solve_bvp(self, r1, r2, dphi):
        """Connecting geodesic from radius r1 <= r2 with angular gap dphi in (0, pi).

        Root-finds on the turning radius r* (the Clairaut constant is f(r*)).
        Returns (c, r_star, turning) where ``turning`` says the geodesic dips
        below r1 before climbing to r2.
        """
        if r1 <= 1e-14:
            return 0.0, 0.0, False
        f1 = self.table.f_scalar(r1)
        dphi_tan = float(self._legs_from_turn(f1, r1, [r2])[0][0])
        if dphi <= dphi_tan:
            # leaves r1 outward; turning radius of the extended geodesic is in (0, r1)
            def gap(rs):
                if rs <= 0.0:
                    return -dphi
                c = self.table.f_scalar(rs)
                a, _ = self._legs_from_turn(c, rs, [r1, r2])
                return (a[1] - a[0]) - dphi

            if gap(r1) < 0:  # dphi == dphi_tan within roundoff
                return f1, r1, False
            rs = self._bracket_root(gap, 0.0, r1, r1)
            return self.table.f_scalar(rs), rs, False

        def gap_turn(rs):
            c = self.table.f_scalar(rs)
            a, _ = self._legs_from_turn(c, rs, [r1, r2])
            return (a[0] + a[1]) - dphi

        lo, hi = 1e-13, r1
        if gap_turn(lo) < 0:
            # target angle essentially pi: treat as through-pole radial
            return 0.0, 0.0, True
        rs = self._bracket_root(gap_turn, lo, hi, r1)
        return self.table.f_scalar(rs), rs, True

    def distance(self, x, y):
        x = self.check_point(x)
        y = self.check_point(y)
        r1, p1 = x
        r2, p2 = y
        if r1 > r2:
            r1, p1, r2, p2 = r2, p2, r1, p1
        if r2 <= 1e-14:
            return 0.0
        dphi = abs(wrap_angle(p2 - p1))
        if r1 <= 1e-14:
            return r2
        # local chart once the separation is far below the curvature scale
        f_mid = self.table.f_scalar(0.5 * (r1 + r2))
        ell = math.hypot(r2 - r1, f_mid * dphi)
        if ell < 1e-4 / self.b:
            return ell
        if dphi < 1e-12:
            return r2 - r1
        if math.pi - dphi < 1e-12:
            return r1 + r2
        c, r_star, turning = self._solve_bvp(r1, r2, dphi)
        if c == 0.0:
            return r1 + r2 if turning else r2 - r1
        _, s = self._legs_from_turn(c, r_star, [r1, r2])
        return s[0] + s[1] if turning else s[1] - s[0]

    def geodesic_direction(self, x, y):
        """Unit frame components (radial, circumferential) at x toward y."""
        x = self.check_point(x)
        y = self.check_point(y)
        r1, p1 = x
        r2, p2 = y
        if r1 <= 1e-14:
            raise DegenerateAngleError("frame direction undefined at the pole; use coordinate angles")
        dphi_signed = wrap_angle(p2 - p1)
        dphi = abs(dphi_signed)
        sgn = 1.0 if dphi_signed >= 0 else -1.0
        if r2 <= 1e-14 or math.pi - dphi < 1e-12:
            return np.array([-1.0, 0.0])
        if dphi < 1e-12:
            return np.array([1.0 if r2 >= r1 else -1.0, 0.0])
        f_mid = self.table.f_scalar(0.5 * (r1 + r2))
        if math.hypot(r2 - r1, f_mid * dphi) < 1e-4 / self.b:
            # local chart: direction of the coordinate displacement
            v = np.array([r2 - r1, sgn * f_mid * dphi])
            return v / np.linalg.norm(v)
        swapped = r1 > r2
        ra, rb = (r2, r1) if swapped else (r1, r2)
        c, _, turning = self._solve_bvp(ra, rb, dphi)
        fx = self.table.f_scalar(r1)
        q = min(c / fx, 1.0)
        radial = math.sqrt(max(0.0, 1.0 - q * q))
        if swapped:
            # x is the far endpoint; the geodesic leaves it moving inward
            return np.array([-radial, sgn * q])
        return np.array([-radial if turning else radial, sgn * q])

    def _r_at_leg_length(self, c, r_star, s_target):
        """Radius with legS(c, r) = s_target.

        Safeguarded Newton: dS/dr = 1/sqrt(1 - (c/f)^2) is known, S is convex
        near the turning point and asymptotically linear, and r is bracketed by
        [r*, r* + s_target].
        """
        if s_target <= 0:
            return r_star
        hi = min(r_star + s_target + 1e-9, self.table.r_max)
        if float(self._legs_from_turn(c, r_star, [hi])[1][0]) < s_target:
            raise GeometryDomainError(
                f"arclength {s_target} walks past the warping table (r_max={self.table.r_max})"
            )
        lo = r_star
        r = min(r_star + s_target, hi)
        for _ in range(60):
            gap = float(self._legs_from_turn(c, r_star, [r])[1][0]) - s_target
            if gap > 0:
                hi = min(hi, r)
            else:
                lo = max(lo, r)
            if abs(gap) < 1e-13 * (1.0 + s_target):
                return r
            fr = self.table.f_scalar(r)
            q = c / fr if fr > 0 else 0.0
            slope_inv = math.sqrt(max(1.0 - q * q, 1e-300))
            step = -gap * slope_inv  # Newton with dS/dr = 1/sqrt(1-q^2)
            r_new = r + step
            if not (lo < r_new < hi):
                r_new = 0.5 * (lo + hi)
            if abs(r_new - r) < 1e-15 * (1.0 + r):
                return r_new
            r = r_new
        raise ShootingError("arclength inversion did not converge", bracket=(lo, hi))

    def _make_evaluator(self, r0, p0, c, sgn_phi, sgn_r, r_star=None):
        """Unit-speed geodesic evaluator from (r0, p0); sgn_r<0 dips through a turning point."""
        if c == 0.0:
            # radial geodesic; passes the pole when heading inward
            def evaluator_radial(t):
                if t < 0:
                    raise GeometryDomainError("ray parameter must be nonnegative")
                if sgn_r >= 0:
                    return np.array([r0 + t, p0])
                if t <= r0:
                    return np.array([r0 - t, p0])
                return np.array([t - r0, wrap_angle(p0 + math.pi)])

            return evaluator_radial

        if r_star is None:
            r_star = self.table.finv(c)
        la, ls = self._legs_from_turn(c, r_star, [r0])
        a_base, s_base = float(la[0]), float(ls[0])

        def leg_at(r):
            a, s = self._legs_from_turn(c, r_star, [r])
            return float(a[0])

        if sgn_r >= 0:

            def evaluator_out(t):
                if t < 0:
                    raise GeometryDomainError("ray parameter must be nonnegative")
                r = self._r_at_leg_length(c, r_star, s_base + t)
                return np.array([r, wrap_angle(p0 + sgn_phi * (leg_at(r) - a_base))])

            return evaluator_out

        def evaluator_in(t):
            if t < 0:
                raise GeometryDomainError("ray parameter must be nonnegative")
            if t <= s_base:
                r = self._r_at_leg_length(c, r_star, s_base - t)
                return np.array([r, wrap_angle(p0 + sgn_phi * (a_base - leg_at(r)))])
            r = self._r_at_leg_length(c, r_star, t - s_base)
            return np.array([r, wrap_angle(p0 + sgn_phi * (a_base + leg_at(r)))])

        return evaluator_in

    def exp(self, x, v, t):
        """Geodesic from x with unit frame direction v = (radial, circumferential)."""
        x = self.check_point(x)
        v = np.asarray(v, dtype=float)
        if v.shape != (2,):
            raise GeometryDomainError("surface tangent needs (radial, circumferential) components")
        norm = math.hypot(v[0], v[1])
        if norm < 1e-300:
            raise GeometryDomainError("zero tangent vector")
        if np.ndim(t) or t < 0:
            raise GeometryDomainError("arclength must be a nonnegative scalar")
        vr, vp = v[0] / norm, v[1] / norm
        r0, p0 = x
        if r0 <= 1e-14:
            # at the pole every direction is radial at angle atan2
            phi = math.atan2(vp, vr)
            return np.array([t, wrap_angle(phi)]) if t > 0 else np.array([0.0, 0.0])
        f0 = self.table.f_scalar(r0)
        c = f0 * abs(vp)
        sgn_phi = 1.0 if vp >= 0 else -1.0
        sgn_r = 1.0 if vr >= 0 else -1.0
        if abs(vp) < 1e-15:
            c = 0.0
        r_star = r0 if abs(vr) < 1e-15 else None
        evaluator = self._make_evaluator(r0, p0, c, sgn_phi, sgn_r, r_star=r_star)
        return evaluator(t)

    def ray(self, x, xi):
        x = self.check_point(x)
        phi_xi = self.check_boundary(xi)
        r0, p0 = x
        if r0 <= 1e-14:
            direction = np.array([1.0, 0.0])
            evaluator = self._make_evaluator(0.0, phi_xi, 0.0, 1.0, 1.0)
            return GeodesicRay(self, x, direction, phi_xi, evaluator)
        dphi_signed = wrap_angle(phi_xi - p0)
        dphi = abs(dphi_signed)
        sgn_phi = 1.0 if dphi_signed >= 0 else -1.0
        f0 = self.table.f_scalar(r0)
        r_cap = self.table.r_max
        if dphi < 1e-12:
            c, r_star, turning = 0.0, 0.0, False
        elif math.pi - dphi < 1e-12:
            c, r_star, turning = 0.0, 0.0, True
        else:
            a_tan = float(self._legs_from_turn(f0, r0, [r_cap])[0][0])
            if dphi <= a_tan:

                def gap(rs):
                    if rs <= 0.0:
                        return -dphi
                    cc = self.table.f_scalar(rs)
                    a, _ = self._legs_from_turn(cc, rs, [r0, r_cap])
                    return (a[1] - a[0]) - dphi

                if gap(r0) < 0:
                    c, r_star, turning = f0, r0, False
                else:
                    rs = self._bracket_root(gap, 0.0, r0, r0)
                    c, r_star, turning = self.table.f_scalar(rs), rs, False
            else:

                def gap_turn(rs):
                    cc = self.table.f_scalar(rs)
                    a, _ = self._legs_from_turn(cc, rs, [r0, r_cap])
                    return (a[0] + a[1]) - dphi

                if gap_turn(1e-13) < 0:
                    c, r_star, turning = 0.0, 0.0, True
                else:
                    rs = self._bracket_root(gap_turn, 1e-13, r0, r0)
                    c, r_star, turning = self.table.f_scalar(rs), rs, True
        q = min(c / f0, 1.0) if f0 > 0 else 0.0
        radial = math.sqrt(max(0.0, 1.0 - q * q))
        direction = np.array([-radial if turning else radial, sgn_phi * q])
        evaluator = self._make_evaluator(r0, p0, c, sgn_phi, -1.0 if turning else 1.0,
                                         r_star=r_star if c > 0 else None)
        return GeodesicRay(self, x, direction, phi_xi, evaluator)

    def angle(self, x, p, q):
        x = self.check_point(x)
        vp = self._direction_to(x, p)
        vq = self._direction_to(x, q)
        if x[0] <= 1e-14:
            # at the pole directions are coordinate angles
            return abs(wrap_angle(vp - vq))
        return angle_between(vp, vq)

    def _direction_to(self, x, target):
        at_pole = x[0] <= 1e-14
        if self.is_boundary(target):
            phi_t = self.check_boundary(target)
            if at_pole:
                return phi_t
            return self.ray(x, phi_t).direction
        tpt = self.check_point(target)
        if at_pole:
            if tpt[0] <= 1e-14:
                raise DegenerateAngleError("angle undefined between coincident points")
            return tpt[1]
        same_r = abs(tpt[0] - x[0]) < 1e-14
        if same_r and abs(wrap_angle(tpt[1] - x[1])) * max(x[0], 1.0) < 1e-14:
            raise DegenerateAngleError("angle undefined between coincident points")
        return self.geodesic_direction(x, tpt)

    def boundary_angle(self, xi, eta):
        return abs(wrap_angle(self.check_boundary(xi) - self.check_boundary(eta)))

    def boundary_angles(self, center, hits):
        """Vectorized angle at the origin between ``center`` and the angles ``hits``."""
        center = self.check_boundary(center)
        diff = np.mod(np.asarray(hits, dtype=float) - center + math.pi, TWO_PI) - math.pi
        return np.abs(diff)

    def point_at_rho(self, rho, phi):
        return np.array([rho, wrap_angle(phi)])


# ---------------------------------------------------------------------------
# module-level operation wrappers
# ---------------------------------------------------------------------------


def distance(space, x, y):
    return space.distance(x, y)


def exp_map(space, x, v, t):
    return space.exp(x, v, t)


def ray_to_boundary(space, x, xi):
    return space.ray(x, xi)


def riemannian_angle(space, x, p, q):
    return space.angle(x, p, q)
