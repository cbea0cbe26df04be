"""Poisson kernel evaluation: closed form on the ball, envelope bounds, and
the cap-ratio Monte Carlo estimator.

On the constant-curvature ball the kernel is the classical
P(x, xi) = ((1 - |x|^2) / |x - xi|^2)^(n-1), equivalently e^{h B(o,x,xi)} with
volume growth h = (n-1) a.  Elsewhere the kernel is only accessible as a limit
of harmonic-measure ratios over shrinking caps.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryDomainError, InsufficientSamplesError, UnsupportedSpaceError
from .invariants import CapSpec, gromov_product_ideal
from .spaces import BallModel
from .statutil import binomial_ratio_ci


@dataclass
class KernelValue:
    """Kernel estimate with its provenance and uncertainty.

    ``error_estimate`` is a truncation bound for closed-form/Busemann values
    and the 95% CI half-width for cap-ratio estimates.
    """

    value: float
    method: str
    error_estimate: float
    ci: tuple = None
    ratios: list = field(default_factory=list)
    stabilized: bool = True

    def __post_init__(self):
        if self.value <= 0:
            raise GeometryDomainError(f"kernel values are positive, got {self.value}")


def volume_growth(space):
    """Logarithmic volume growth h = (n-1) a of the constant-curvature ball."""
    if not isinstance(space, BallModel):
        raise UnsupportedSpaceError("volume growth is only closed-form on the ball model")
    return (space.n - 1) * space.a


def log_exact_kernel_ball(space, x, xi):
    if not isinstance(space, BallModel):
        raise UnsupportedSpaceError("exact kernel requires the constant-curvature ball")
    return volume_growth(space) * space.busemann_exact(x, xi)


def exact_kernel_ball(space, x, xi):
    """Closed-form Poisson kernel on the ball; exact up to rounding."""
    return KernelValue(
        value=float(np.exp(log_exact_kernel_ball(space, x, xi))),
        method="closed_form",
        error_estimate=0.0,
    )


def kernel_identity_slack(space, x, xi, t=None):
    """Residuals of log P against the two Gromov-product expressions.

    Returns (log P - (h d - 2h (o|xi)_x), log P - (2h (x|xi)_o - h d)).
    """
    h = volume_growth(space)
    log_p = log_exact_kernel_ball(space, x, xi)
    d = float(space.distance(space.origin, x))
    g_ox = gromov_product_ideal(space, x, space.origin, xi, t=t).value
    g_xo = gromov_product_ideal(space, space.origin, x, xi, t=t).value
    return log_p - (h * d - 2 * h * g_ox), log_p - (2 * h * g_xo - h * d)


def theorem11_envelopes(a, big_k, big_c, d, g_ox, g_xo):
    """(lower, upper) kernel envelopes for given constants (C, K).

    lower = (1/C) e^{-2K (o|xi)_x} e^{a d};  upper = C e^{2K (x|xi)_o} e^{-a d}.
    """
    if big_c < 1.0:
        raise GeometryDomainError(f"envelope constant C must be >= 1, got {big_c}")
    if big_k <= 0.0:
        raise GeometryDomainError(f"envelope rate K must be positive, got {big_k}")
    lower = (1.0 / big_c) * math.exp(-2.0 * big_k * g_ox + a * d)
    upper = big_c * math.exp(2.0 * big_k * g_xo - a * d)
    return lower, upper


DEFAULT_CAP_SCHEDULE = tuple(math.pi * 0.5**i for i in range(9))


def estimate_kernel_cap_ratio(mu_x, mu_o, xi, cap_schedule=None, min_hits=100):
    """Kernel at (x, xi) as the harmonic-measure ratio over shrinking caps.

    Walks the cap schedule while the denominator measure keeps at least
    ``min_hits`` samples in the cap; returns the last usable ratio with a
    binomial 95% CI.  The coarse-cap ratios genuinely drift (the full-sphere
    ratio is 1 for any kernel), so non-stabilization is flagged only when the
    final two usable ratios still differ by more than three combined CI
    half-widths.
    """
    if mu_x.space_id != mu_o.space_id:
        raise GeometryDomainError("measures come from different spaces")
    if abs(mu_x.exit_radius - mu_o.exit_radius) > 1e-12:
        raise GeometryDomainError("measures use different exit radii")
    if cap_schedule is None:
        cap_schedule = DEFAULT_CAP_SCHEDULE
    cap_schedule = list(cap_schedule)
    if any(b >= a for a, b in zip(cap_schedule, cap_schedule[1:])):
        raise GeometryDomainError("cap schedule must be strictly decreasing")
    space = mu_x.space
    ang_x = space.boundary_angles(xi, mu_x.hits)
    ang_o = space.boundary_angles(xi, mu_o.hits)

    ratios = []
    intervals = []
    last = None
    for alpha in cap_schedule:
        k_den = int(np.sum(ang_o <= alpha))
        k_num = int(np.sum(ang_x <= alpha))
        if k_den < min_hits:
            if last is None:
                raise InsufficientSamplesError(
                    f"denominator cap at alpha={alpha} holds {k_den} < {min_hits} samples",
                    alpha,
                )
            break
        if k_num == 0:
            if last is None:
                raise InsufficientSamplesError(
                    f"numerator cap at alpha={alpha} is empty", alpha
                )
            break
        ratio, lo, hi = binomial_ratio_ci(k_num, mu_x.walks, k_den, mu_o.walks)
        ratios.append(ratio)
        intervals.append((lo, hi))
        last = (ratio, lo, hi, alpha)

    stabilized = True
    if len(ratios) >= 2:
        combined = 0.5 * (intervals[-1][1] - intervals[-1][0]) + 0.5 * (
            intervals[-2][1] - intervals[-2][0]
        )
        stabilized = abs(ratios[-1] - ratios[-2]) <= 3.0 * combined
    ratio, lo, hi, alpha = last
    return KernelValue(
        value=ratio,
        method="cap_ratio",
        error_estimate=0.5 * (hi - lo),
        ci=(lo, hi),
        ratios=ratios,
        stabilized=stabilized,
    )


def cap_kernel_mass_quadrature(space, x, cap, n_nodes=4096):
    """Exact-kernel mass of a boundary cap under mu_x on the 2-D ball.

    Quadrature of P(x, .) against the uniform law; the oracle the Monte Carlo
    cap masses are checked against.
    """
    if not isinstance(space, BallModel) or space.n != 2:
        raise UnsupportedSpaceError("cap quadrature implemented for the 2-D ball")
    center_angle = math.atan2(cap.center[1], cap.center[0])
    theta = center_angle + np.linspace(-cap.radius, cap.radius, n_nodes + 1)
    xi = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    x = np.asarray(x, dtype=float)
    vals = ((1.0 - np.sum(x * x)) / np.sum((x - xi) ** 2, axis=1)) ** (space.n - 1)
    # composite Simpson on the angular variable, normalized by the full circle
    h = (theta[-1] - theta[0]) / n_nodes
    w = np.ones(n_nodes + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(np.dot(w, vals) * h / 3.0 / (2.0 * math.pi))


def laplace_residual(space, x, xi, step=1e-3):
    """Relative Laplace-Beltrami stencil residual of the exact kernel at x.

    Central second differences along an orthonormal frame of geodesic
    directions; exact harmonicity makes this O(step^2) relative to P(x).
    """
    if not isinstance(space, BallModel):
        raise UnsupportedSpaceError("harmonicity stencil needs the exact kernel")
    x = space.check_point(x)
    frame = _orthonormal_frame(space.n)
    p0 = exact_kernel_ball(space, x, xi).value
    acc = 0.0
    for e in frame:
        p_plus = exact_kernel_ball(space, space.exp(x, e, step), xi).value
        p_minus = exact_kernel_ball(space, space.exp(x, -e, step), xi).value
        acc += (p_plus + p_minus - 2.0 * p0) / step**2
    return abs(acc) / p0


def log_gradient_norm(space, x, xi, step=1e-3):
    """Norm of grad log P(., xi) at x by central differences along a frame."""
    if not isinstance(space, BallModel):
        raise UnsupportedSpaceError("needs the exact kernel")
    x = space.check_point(x)
    comps = []
    for e in _orthonormal_frame(space.n):
        lp = log_exact_kernel_ball(space, space.exp(x, e, step), xi)
        lm = log_exact_kernel_ball(space, space.exp(x, -e, step), xi)
        comps.append((lp - lm) / (2.0 * step))
    return float(np.linalg.norm(comps))


def _orthonormal_frame(n):
    return [np.eye(n)[i] for i in range(n)]


def caps_for_schedule(center, schedule):
    return [CapSpec(center, alpha) for alpha in schedule]
