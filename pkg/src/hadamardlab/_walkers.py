"""Compiled geodesic-random-walk kernels.

Every walk owns a counter-based stream keyed by (base_seed, walk_index): the
k-th step reads mix(state0 + k*GOLD) and rejection retries remix with a salt,
so results are reproducible by walk index no matter how walks are scheduled
over threads.  Results are written into per-walk slots; thread count cannot
change any output bit.

The 2-D ball walker is unrolled four walks per thread: a single walk is one
serial dependency chain (mix -> sqrt -> divide), and interleaving four keeps
the core's pipelines full.  The n-D ball and warped-surface walkers take the
plain one-walk-per-iteration shape.
"""

import numpy as np
import numba as nb
from numba import njit, prange

GOLD = np.uint64(0x9E3779B97F4A7C15)
SALT = np.uint64(0xD1342543DE82EF95)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
MASK26 = np.uint64(0x3FFFFFF)
INV26 = 1.0 / 67108864.0
U6 = np.uint64(6)
U32 = np.uint64(32)
ONE = np.uint64(1)

_FAST = {"fastmath": True, "error_model": "numpy", "cache": True}
# The four-lane kernel must stay strict IEEE: under fastmath LLVM contracts
# lanes differently (FMA fusion depends on instruction scheduling), and a
# walk's bits would then depend on which lane it lands in.
_STRICT = {"fastmath": False, "error_model": "numpy", "cache": True}


@njit(nb.uint64(nb.uint64), inline="always", **_STRICT)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * M1
    z = (z ^ (z >> np.uint64(27))) * M2
    return z ^ (z >> np.uint64(31))


@njit(inline="always", **_STRICT)
def _disk_candidate(h):
    """Accepted point of the unit disk on the step's retry chain.

    Returns (a, b, s) with s = a*a + b*b in (1e-10, 1).
    """
    z = _mix(h)
    a = nb.float64((z >> U6) & MASK26) * INV26 * 2.0 - 1.0
    b = nb.float64((z >> U32) & MASK26) * INV26 * 2.0 - 1.0
    s = a * a + b * b
    while not (1e-10 < s < 1.0):
        z = _mix(z ^ SALT)
        a = nb.float64((z >> U6) & MASK26) * INV26 * 2.0 - 1.0
        b = nb.float64((z >> U32) & MASK26) * INV26 * 2.0 - 1.0
        s = a * a + b * b
    return a, b, s


@njit(nb.uint64(nb.uint64, nb.int64), inline="always", **_STRICT)
def _walk_state(seed, walk):
    return _mix(seed + GOLD * (np.uint64(walk) + ONE)) + GOLD


@njit(parallel=True, **_STRICT)
def ball2d_walks(seed, walk_lo, n_walks, sx, sy, t_step, exit_m2, max_steps,
                 nthreads, dirs, pos, steps, ok):
    for tid in prange(nthreads):
        nxt = np.int64(tid) + 0
        w0 = w1 = w2 = w3 = np.int64(-1)
        x0 = y0 = x1 = y1 = x2 = y2 = x3 = y3 = 0.0
        h0 = h1 = h2 = h3 = ONE
        k0 = k1 = k2 = k3 = np.int64(0)
        if nxt < n_walks:
            w0 = nxt
            x0 = sx[nxt]
            y0 = sy[nxt]
            h0 = _walk_state(seed, walk_lo + nxt)
            nxt += nthreads
        if nxt < n_walks:
            w1 = nxt
            x1 = sx[nxt]
            y1 = sy[nxt]
            h1 = _walk_state(seed, walk_lo + nxt)
            nxt += nthreads
        if nxt < n_walks:
            w2 = nxt
            x2 = sx[nxt]
            y2 = sy[nxt]
            h2 = _walk_state(seed, walk_lo + nxt)
            nxt += nthreads
        if nxt < n_walks:
            w3 = nxt
            x3 = sx[nxt]
            y3 = sy[nxt]
            h3 = _walk_state(seed, walk_lo + nxt)
            nxt += nthreads
        active = (w0 >= 0) + (w1 >= 0) + (w2 >= 0) + (w3 >= 0)
        while active > 0:
            a0, b0, s0 = _disk_candidate(h0)
            a1, b1, s1 = _disk_candidate(h1)
            a2, b2, s2 = _disk_candidate(h2)
            a3, b3, s3 = _disk_candidate(h3)
            h0 += GOLD
            h1 += GOLD
            h2 += GOLD
            h3 += GOLD
            # direction = squared disk point (angle doubling, no sqrt); the
            # Mobius update is scaled through by s to spend a single division
            wx = t_step * (a0 * a0 - b0 * b0)
            wy = t_step * (2.0 * a0 * b0)
            nr = x0 * s0 + wx
            ni = y0 * s0 + wy
            dr = s0 + x0 * wx + y0 * wy
            di = x0 * wy - y0 * wx
            iv = 1.0 / (dr * dr + di * di)
            x0 = (nr * dr + ni * di) * iv
            y0 = (ni * dr - nr * di) * iv
            wx = t_step * (a1 * a1 - b1 * b1)
            wy = t_step * (2.0 * a1 * b1)
            nr = x1 * s1 + wx
            ni = y1 * s1 + wy
            dr = s1 + x1 * wx + y1 * wy
            di = x1 * wy - y1 * wx
            iv = 1.0 / (dr * dr + di * di)
            x1 = (nr * dr + ni * di) * iv
            y1 = (ni * dr - nr * di) * iv
            wx = t_step * (a2 * a2 - b2 * b2)
            wy = t_step * (2.0 * a2 * b2)
            nr = x2 * s2 + wx
            ni = y2 * s2 + wy
            dr = s2 + x2 * wx + y2 * wy
            di = x2 * wy - y2 * wx
            iv = 1.0 / (dr * dr + di * di)
            x2 = (nr * dr + ni * di) * iv
            y2 = (ni * dr - nr * di) * iv
            wx = t_step * (a3 * a3 - b3 * b3)
            wy = t_step * (2.0 * a3 * b3)
            nr = x3 * s3 + wx
            ni = y3 * s3 + wy
            dr = s3 + x3 * wx + y3 * wy
            di = x3 * wy - y3 * wx
            iv = 1.0 / (dr * dr + di * di)
            x3 = (nr * dr + ni * di) * iv
            y3 = (ni * dr - nr * di) * iv
            k0 += 1
            k1 += 1
            k2 += 1
            k3 += 1
            if w0 >= 0 and (x0 * x0 + y0 * y0 >= exit_m2 or k0 >= max_steps):
                exited = x0 * x0 + y0 * y0 >= exit_m2
                norm = np.sqrt(x0 * x0 + y0 * y0)
                dirs[w0, 0] = x0 / norm
                dirs[w0, 1] = y0 / norm
                pos[w0, 0] = x0
                pos[w0, 1] = y0
                steps[w0] = k0
                ok[w0] = 1 if exited else 0
                if nxt < n_walks:
                    w0 = nxt
                    x0 = sx[nxt]
                    y0 = sy[nxt]
                    h0 = _walk_state(seed, walk_lo + nxt)
                    k0 = 0
                    nxt += nthreads
                else:
                    w0 = np.int64(-1)
                    x0 = y0 = 0.0
                    active -= 1
            if w1 >= 0 and (x1 * x1 + y1 * y1 >= exit_m2 or k1 >= max_steps):
                exited = x1 * x1 + y1 * y1 >= exit_m2
                norm = np.sqrt(x1 * x1 + y1 * y1)
                dirs[w1, 0] = x1 / norm
                dirs[w1, 1] = y1 / norm
                pos[w1, 0] = x1
                pos[w1, 1] = y1
                steps[w1] = k1
                ok[w1] = 1 if exited else 0
                if nxt < n_walks:
                    w1 = nxt
                    x1 = sx[nxt]
                    y1 = sy[nxt]
                    h1 = _walk_state(seed, walk_lo + nxt)
                    k1 = 0
                    nxt += nthreads
                else:
                    w1 = np.int64(-1)
                    x1 = y1 = 0.0
                    active -= 1
            if w2 >= 0 and (x2 * x2 + y2 * y2 >= exit_m2 or k2 >= max_steps):
                exited = x2 * x2 + y2 * y2 >= exit_m2
                norm = np.sqrt(x2 * x2 + y2 * y2)
                dirs[w2, 0] = x2 / norm
                dirs[w2, 1] = y2 / norm
                pos[w2, 0] = x2
                pos[w2, 1] = y2
                steps[w2] = k2
                ok[w2] = 1 if exited else 0
                if nxt < n_walks:
                    w2 = nxt
                    x2 = sx[nxt]
                    y2 = sy[nxt]
                    h2 = _walk_state(seed, walk_lo + nxt)
                    k2 = 0
                    nxt += nthreads
                else:
                    w2 = np.int64(-1)
                    x2 = y2 = 0.0
                    active -= 1
            if w3 >= 0 and (x3 * x3 + y3 * y3 >= exit_m2 or k3 >= max_steps):
                exited = x3 * x3 + y3 * y3 >= exit_m2
                norm = np.sqrt(x3 * x3 + y3 * y3)
                dirs[w3, 0] = x3 / norm
                dirs[w3, 1] = y3 / norm
                pos[w3, 0] = x3
                pos[w3, 1] = y3
                steps[w3] = k3
                ok[w3] = 1 if exited else 0
                if nxt < n_walks:
                    w3 = nxt
                    x3 = sx[nxt]
                    y3 = sy[nxt]
                    h3 = _walk_state(seed, walk_lo + nxt)
                    k3 = 0
                    nxt += nthreads
                else:
                    w3 = np.int64(-1)
                    x3 = y3 = 0.0
                    active -= 1


@njit(inline="always", **_FAST)
def _unit_nd(h, v):
    """Uniform unit vector from Gaussian pairs (matches rng.unit_vector_nd)."""
    n = v.shape[0]
    word = _mix(h)
    while True:
        i = 0
        while i < n:
            a = nb.float64((word >> U6) & MASK26) * INV26 * 2.0 - 1.0
            b = nb.float64((word >> U32) & MASK26) * INV26 * 2.0 - 1.0
            word = _mix(word ^ SALT)
            s = a * a + b * b
            if not (1e-10 < s < 1.0):
                continue
            fac = np.sqrt(-2.0 * np.log(s) / s)
            v[i] = a * fac
            i += 1
            if i < n:
                v[i] = b * fac
                i += 1
        norm = 0.0
        for j in range(n):
            norm += v[j] * v[j]
        norm = np.sqrt(norm)
        if norm > 1e-8:
            for j in range(n):
                v[j] /= norm
            return


@njit(parallel=True, **_FAST)
def ball_nd_walks(seed, walk_lo, n_walks, starts, tanh_step, exit_m2, max_steps,
                  nthreads, dirs, pos, steps, ok):
    n_dim = starts.shape[1]
    for w in prange(n_walks):
        u = np.empty(n_dim)
        d = np.empty(n_dim)
        wv = np.empty(n_dim)
        for j in range(n_dim):
            u[j] = starts[w, j]
        h = _walk_state(seed, walk_lo + w)
        k = np.int64(0)
        exited = False
        while k < max_steps:
            _unit_nd(h, d)
            h += GOLD
            uw = 0.0
            u2 = 0.0
            w2 = 0.0
            for j in range(n_dim):
                wv[j] = tanh_step * d[j]
                uw += u[j] * wv[j]
                u2 += u[j] * u[j]
                w2 += wv[j] * wv[j]
            den = 1.0 + 2.0 * uw + u2 * w2
            cu = (1.0 + 2.0 * uw + w2) / den
            cw = (1.0 - u2) / den
            nrm = 0.0
            for j in range(n_dim):
                u[j] = cu * u[j] + cw * wv[j]
                nrm += u[j] * u[j]
            k += 1
            if nrm >= exit_m2:
                exited = True
                break
        nrm = 0.0
        for j in range(n_dim):
            nrm += u[j] * u[j]
        nrm = np.sqrt(nrm)
        for j in range(n_dim):
            dirs[w, j] = u[j] / nrm
            pos[w, j] = u[j]
        steps[w] = k
        ok[w] = 1 if exited else 0


@njit(inline="always", **_FAST)
def _hermite_pair(r, f_tab, fp_tab, fpp_tab, inv_h, n_seg):
    """(f, f') at radius r from the warping table."""
    t = r * inv_h
    i = np.int64(t)
    if i > n_seg:
        i = n_seg
    if i < 0:
        i = 0
    s = t - i
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    h = 1.0 / inv_h
    f = h00 * f_tab[i] + h10 * h * fp_tab[i] + h01 * f_tab[i + 1] + h11 * h * fp_tab[i + 1]
    fp = h00 * fp_tab[i] + h10 * h * fpp_tab[i] + h01 * fp_tab[i + 1] + h11 * h * fpp_tab[i + 1]
    return f, fp


@njit(inline="always", **_FAST)
def _geodesic_rk4(r, phi, vr, vp, dt, f_tab, fp_tab, fpp_tab, inv_h, n_seg):
    """One RK4 substep of the unit-speed geodesic flow in frame components."""
    f, fp = _hermite_pair(r, f_tab, fp_tab, fpp_tab, inv_h, n_seg)
    g = fp / f
    k1r = vr
    k1p = vp / f
    k1vr = g * vp * vp
    k1vp = -g * vr * vp

    r2 = r + 0.5 * dt * k1r
    vr2 = vr + 0.5 * dt * k1vr
    vp2 = vp + 0.5 * dt * k1vp
    f, fp = _hermite_pair(r2, f_tab, fp_tab, fpp_tab, inv_h, n_seg)
    g = fp / f
    k2r = vr2
    k2p = vp2 / f
    k2vr = g * vp2 * vp2
    k2vp = -g * vr2 * vp2

    r3 = r + 0.5 * dt * k2r
    vr3 = vr + 0.5 * dt * k2vr
    vp3 = vp + 0.5 * dt * k2vp
    f, fp = _hermite_pair(r3, f_tab, fp_tab, fpp_tab, inv_h, n_seg)
    g = fp / f
    k3r = vr3
    k3p = vp3 / f
    k3vr = g * vp3 * vp3
    k3vp = -g * vr3 * vp3

    r4 = r + dt * k3r
    vr4 = vr + dt * k3vr
    vp4 = vp + dt * k3vp
    f, fp = _hermite_pair(r4, f_tab, fp_tab, fpp_tab, inv_h, n_seg)
    g = fp / f
    k4r = vr4
    k4p = vp4 / f
    k4vr = g * vp4 * vp4
    k4vp = -g * vr4 * vp4

    r_new = r + dt * (k1r + 2 * k2r + 2 * k3r + k4r) / 6.0
    phi_new = phi + dt * (k1p + 2 * k2p + 2 * k3p + k4p) / 6.0
    vr_new = vr + dt * (k1vr + 2 * k2vr + 2 * k3vr + k4vr) / 6.0
    vp_new = vp + dt * (k1vp + 2 * k2vp + 2 * k3vp + k4vp) / 6.0
    return r_new, phi_new, vr_new, vp_new


@njit(parallel=True, **_FAST)
def surface_walks(seed, walk_lo, n_walks, starts, eps, exit_r, max_steps, r_chart,
                  r_fine, f_tab, fp_tab, fpp_tab, inv_h, nthreads, phis, pos, steps, ok):
    n_seg = f_tab.shape[0] - 2
    two_pi = 2.0 * np.pi
    for w in prange(n_walks):
        r = starts[w, 0]
        phi = starts[w, 1]
        h = _walk_state(seed, walk_lo + w)
        k = np.int64(0)
        exited = False
        while k < max_steps:
            ca, sa, s = _disk_candidate(h)
            h += GOLD
            inv = 1.0 / s
            cchi = (ca * ca - sa * sa) * inv
            schi = (2.0 * ca * sa) * inv
            if r < r_chart:
                # normal-coordinate chart: the pole is smooth, the metric is
                # Euclidean + O(r^2) here, and chart steps keep rotational symmetry
                cphi = np.cos(phi)
                sphi = np.sin(phi)
                ux = r * cphi + eps * (cchi * cphi - schi * sphi)
                uy = r * sphi + eps * (cchi * sphi + schi * cphi)
                r = np.sqrt(ux * ux + uy * uy)
                phi = np.arctan2(uy, ux)
            elif r < r_fine:
                # two substeps where the geodesic flow varies on the r scale
                vr = cchi
                vp = schi
                dt = 0.5 * eps
                r, phi, vr, vp = _geodesic_rk4(r, phi, vr, vp, dt, f_tab, fp_tab,
                                               fpp_tab, inv_h, n_seg)
                r, phi, vr, vp = _geodesic_rk4(r, phi, vr, vp, dt, f_tab, fp_tab,
                                               fpp_tab, inv_h, n_seg)
                if r < 0.0:
                    r = -r
                    phi = phi + np.pi
            else:
                r, phi, vr, vp = _geodesic_rk4(r, phi, cchi, schi, eps, f_tab, fp_tab,
                                               fpp_tab, inv_h, n_seg)
            k += 1
            if r >= exit_r:
                exited = True
                break
        phi = ((phi + np.pi) % two_pi) - np.pi
        phis[w] = phi
        pos[w, 0] = r
        pos[w, 1] = phi
        steps[w] = k
        ok[w] = 1 if exited else 0
