"""Seeded point and direction sampling on the model spaces.

All samplers are deterministic functions of (seed, channel); channels keep
independent draws (points vs directions vs radii) from colliding.
"""

import numpy as np

from .rng import uniform_stream
from .spaces import BallModel, WarpedSurface

TWO_PI = 2.0 * np.pi


def random_boundary_points(space, count, seed, channel=0):
    """Uniform ideal points: unit vectors on the ball, angles on the surface."""
    if isinstance(space, WarpedSurface):
        return uniform_stream(seed, 101 + channel, count) * TWO_PI - np.pi
    n = space.n
    g = np.empty((count, n))
    for j in range(n):
        u1 = uniform_stream(seed, 211 + channel * 17 + 2 * j, count)
        u2 = uniform_stream(seed, 212 + channel * 17 + 2 * j, count)
        u1 = np.maximum(u1, 1e-300)
        g[:, j] = np.sqrt(-2.0 * np.log(u1)) * np.cos(TWO_PI * u2)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g


def random_points(space, count, seed, rho_max, channel=0):
    """Interior points with distance-from-origin uniform in (0, rho_max)."""
    rho = uniform_stream(seed, 307 + channel * 23, count) * rho_max
    if isinstance(space, WarpedSurface):
        phi = uniform_stream(seed, 308 + channel * 23, count) * TWO_PI - np.pi
        return np.stack([rho, phi], axis=1)
    dirs = random_boundary_points(space, count, seed, channel=channel + 5)
    radii = np.tanh(0.5 * space.a * rho)
    return dirs * radii[:, None]


def shell_points(space, rho_values, per_shell, seed, channel=0):
    """Stratified points: ``per_shell`` uniform directions at each distance."""
    if isinstance(space, BallModel):
        pts = []
        for i, rho in enumerate(rho_values):
            dirs = random_boundary_points(space, per_shell, seed, channel=channel + 31 * i)
            pts.append(dirs * np.tanh(0.5 * space.a * rho))
        return np.concatenate(pts, axis=0)
    pts = []
    for i, rho in enumerate(rho_values):
        phi = uniform_stream(seed, 409 + channel + 31 * i, per_shell) * TWO_PI - np.pi
        pts.append(np.stack([np.full(per_shell, float(rho)), phi], axis=1))
    return np.concatenate(pts, axis=0)
