"""Brownian motion by geodesic random walk: first-exit sampling and the
empirical harmonic measures it induces on spheres and at infinity.

The walk takes fixed geodesic steps of length eps in uniformly random tangent
directions and stops at the first position beyond the exit radius; the exit
law of any nondegenerate time change of Brownian motion is the harmonic
measure, so the step clock needs no calibration and eps only enters through
the (measured) discretization bias.
"""

import json
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import GeometryDomainError, WalkBudgetError
from .rng import unit_vector_2d, unit_vector_nd
from ._walkers import ball2d_walks, ball_nd_walks, surface_walks
from .spaces import BallModel, WarpedSurface
from .statutil import wilson_interval

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class WalkConfig:
    """Full determinism contract of a walk ensemble."""

    step: float
    exit_radius: float
    base_seed: int
    max_steps: int = None

    def __post_init__(self):
        if self.step <= 0 or self.exit_radius <= 0:
            raise GeometryDomainError("step and exit radius must be positive")
        budget = self.required_budget()
        if self.max_steps is None:
            object.__setattr__(self, "max_steps", budget)
        elif self.max_steps < budget:
            raise GeometryDomainError(
                f"max_steps={self.max_steps} below the exit budget {budget} = 10 (R/eps)^2"
            )

    def required_budget(self):
        return int(math.ceil(10.0 * (self.exit_radius / self.step) ** 2))

    def validate_for(self, space):
        b = space.curvature_bounds.b
        if self.step >= 0.1 / b:
            raise GeometryDomainError(
                f"step {self.step} must resolve the curvature scale: need eps < {0.1 / b}"
            )
        return self


@dataclass
class EmpiricalMeasure:
    """Weighted sample of exit directions from one walk ensemble.

    ``hits`` are radial projections of the exit points (unit vectors on the
    ball, angles on the surface); ``exit_points`` keep the raw crossing
    positions for two-stage (Markov) continuation.
    """

    space: object
    start: np.ndarray
    exit_radius: float
    hits: np.ndarray
    walks: int
    step: float
    seed: int
    steps: np.ndarray = None
    exit_points: np.ndarray = None

    @property
    def space_id(self):
        return self.space.space_id

    @property
    def valid(self):
        return self.walks > 0

    def hit_angles(self, center):
        return self.space.boundary_angles(center, self.hits)


def random_unit_tangent(space, seed, walk_index, step_index):
    """Uniform unit tangent draw from the walk's counter stream."""
    if isinstance(space, WarpedSurface):
        return unit_vector_2d(seed, walk_index, step_index)
    if space.n == 2:
        return unit_vector_2d(seed, walk_index, step_index)
    return unit_vector_nd(seed, walk_index, step_index, space.n)


def walk_step(space, x, eps, u):
    """One geodesic step: exp_x(eps * u)."""
    if eps == 0:
        return np.asarray(x, dtype=float)
    return space.exp(x, u, eps)


def _run_walks(space, starts, config, n_walks, walk_lo):
    nthreads = numba.get_num_threads()
    seed = np.uint64(config.base_seed)
    steps = np.zeros(n_walks, dtype=np.int64)
    ok = np.zeros(n_walks, dtype=np.uint8)
    if isinstance(space, WarpedSurface):
        if config.exit_radius + config.step > space.table.r_max:
            raise GeometryDomainError("exit radius beyond the warping table")
        phis = np.empty(n_walks)
        pos = np.empty((n_walks, 2))
        r_chart = max(2.0 * config.step, 0.05 / space.b)
        r_fine = max(8.0 * config.step, 1.0 / space.b)
        surface_walks(seed, walk_lo, n_walks, starts, config.step, config.exit_radius,
                      config.max_steps, r_chart, r_fine, space.table.f, space.table.fp,
                      space.table.fpp, 1.0 / space.table.spacing, nthreads,
                      phis, pos, steps, ok)
        return phis, pos, steps, ok
    t_step = math.tanh(0.5 * space.a * config.step)
    exit_m2 = math.tanh(0.5 * space.a * config.exit_radius) ** 2
    dirs = np.empty((n_walks, space.n))
    pos = np.empty((n_walks, space.n))
    if space.n == 2:
        ball2d_walks(seed, walk_lo, n_walks, np.ascontiguousarray(starts[:, 0]),
                     np.ascontiguousarray(starts[:, 1]), t_step, exit_m2,
                     config.max_steps, nthreads, dirs, pos, steps, ok)
    else:
        ball_nd_walks(seed, walk_lo, n_walks, np.ascontiguousarray(starts), t_step,
                      exit_m2, config.max_steps, nthreads, dirs, pos, steps, ok)
    return dirs, pos, steps, ok


def harmonic_measure(space, x, config, n_walks, walk_offset=0):
    """Empirical harmonic measure from ``n_walks`` first exits started at x."""
    config.validate_for(space)
    if isinstance(space, WarpedSurface):
        x = space.check_point(x)
        if x[0] >= config.exit_radius:
            raise GeometryDomainError("start point must be inside the exit sphere")
    else:
        x = space.check_point(x)
        if space.rho(x) >= config.exit_radius:
            raise GeometryDomainError("start point must be inside the exit sphere")
    if n_walks == 0:
        dim = 2 if isinstance(space, WarpedSurface) else space.n
        return EmpiricalMeasure(space, x, config.exit_radius,
                                hits=np.empty(0) if isinstance(space, WarpedSurface)
                                else np.empty((0, dim)),
                                walks=0, step=config.step, seed=config.base_seed)
    starts = np.tile(np.asarray(x, dtype=float), (n_walks, 1))
    return _measure_from_starts(space, x, starts, config, n_walks, walk_offset)


def _measure_from_starts(space, label_start, starts, config, n_walks, walk_offset):
    hits, pos, steps, ok = _run_walks(space, starts, config, n_walks, walk_offset)
    if not np.all(ok):
        failed = np.flatnonzero(ok == 0)
        raise WalkBudgetError(
            f"{failed.size} walks failed to exit within max_steps={config.max_steps}",
            failed + walk_offset,
        )
    return EmpiricalMeasure(
        space=space,
        start=np.asarray(label_start, dtype=float),
        exit_radius=config.exit_radius,
        hits=hits,
        walks=n_walks,
        step=config.step,
        seed=config.base_seed,
        steps=steps,
        exit_points=pos,
    )


def first_exit(space, start, config, walk_index):
    """Exit direction of the single walk ``walk_index``; deterministic by index."""
    measure = harmonic_measure(space, start, config, 1, walk_offset=walk_index)
    return measure.hits[0]


def pushforward_sphere_measure(space, exit_radius, config, n_walks):
    """Radially projected harmonic measure of S(o, exit_radius) seen from o."""
    cfg = WalkConfig(step=config.step, exit_radius=exit_radius,
                     base_seed=config.base_seed)
    return harmonic_measure(space, space.origin, cfg, n_walks)


def continue_measure(space, measure, config, walk_offset=0):
    """Second-stage walks: restart from each recorded exit point.

    Realizes the Markov identity: exits at a far radius from the first-stage
    crossing points reproduce the one-stage far measure in law.
    """
    if measure.exit_points is None:
        raise GeometryDomainError("measure lacks exit points; was it read from CSV?")
    config.validate_for(space)
    n = measure.walks
    return _measure_from_starts(space, measure.start, measure.exit_points, config, n,
                                walk_offset)


def cap_mass(measure, cap):
    """Fraction of hits inside the closed cap, with a Wilson 95% interval."""
    if not measure.valid:
        raise GeometryDomainError("empty measure is invalid for cap masses")
    angles = measure.hit_angles(cap.center)
    k = int(np.sum(angles <= cap.radius))
    p, lo, hi = wilson_interval(k, measure.walks)
    return p, (lo, hi)


# ---------------------------------------------------------------------------
# persistence: CSV of hits plus a JSON sidecar
# ---------------------------------------------------------------------------


def measure_to_csv(measure, path):
    path = str(path)
    hits = measure.hits
    with open(path, "w", newline="") as fh:
        if hits.ndim == 1:
            fh.write("walk_index,exit_phi\n")
            for i, v in enumerate(hits):
                fh.write(f"{i},{v:.17g}\n")
        else:
            cols = ",".join(f"exit_dir_{j}" for j in range(hits.shape[1]))
            fh.write(f"walk_index,{cols}\n")
            for i, row in enumerate(hits):
                vals = ",".join(f"{v:.17g}" for v in row)
                fh.write(f"{i},{vals}\n")
    meta = {
        "schema_version": SCHEMA_VERSION,
        "space": measure.space_id,
        "start": [float(v) for v in np.atleast_1d(measure.start)],
        "step": measure.step,
        "exit_radius": measure.exit_radius,
        "walks": measure.walks,
        "seed": measure.seed,
    }
    with open(path + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def measure_from_csv(space, path):
    path = str(path)
    with open(path + ".meta.json") as fh:
        meta = json.load(fh)
    if meta["space"] != space.space_id:
        raise GeometryDomainError(
            f"measure belongs to {meta['space']}, not {space.space_id}"
        )
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    hits = data[:, 1] if data.shape[1] == 2 else data[:, 1:]
    if isinstance(space, BallModel) and hits.ndim == 1:
        raise GeometryDomainError("ball measure file carries a single hit column")
    return EmpiricalMeasure(
        space=space,
        start=np.array(meta["start"]),
        exit_radius=meta["exit_radius"],
        hits=hits,
        walks=meta["walks"],
        step=meta["step"],
        seed=meta["seed"],
    )
