"""Small statistics helpers: intervals, ratio CIs, least squares on logs."""

import numpy as np

Z95 = 1.959963984540054  # two-sided 95% normal quantile


def wilson_interval(hits, n, z=Z95):
    """Wilson score interval for a binomial fraction.

    Returns (point_estimate, lower, upper).
    """
    if n <= 0:
        raise ValueError("need n > 0")
    p = hits / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    return p, max(0.0, center - half), min(1.0, center + half)


def binomial_ratio_ci(k_num, n_num, k_den, n_den, z=Z95):
    """CI for the ratio of two independent binomial proportions.

    Delta method on the log ratio; requires nonzero counts.
    Returns (ratio, lower, upper).
    """
    if k_num <= 0 or k_den <= 0:
        raise ValueError("ratio CI needs nonzero counts in both samples")
    p_num = k_num / n_num
    p_den = k_den / n_den
    ratio = p_num / p_den
    var_log = (1 - p_num) / k_num + (1 - p_den) / k_den
    half = z * np.sqrt(var_log)
    return ratio, ratio * np.exp(-half), ratio * np.exp(half)


def ols_line(x, y):
    """Ordinary least squares line fit.

    Returns dict with slope, intercept, r2, slope_se, n.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two points to fit a line")
    xm = x.mean()
    ym = y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise ValueError("degenerate abscissae")
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = np.sum(resid**2)
    ss_tot = np.sum((y - ym) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    dof = max(n - 2, 1)
    slope_se = np.sqrt(ss_res / dof / sxx)
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "r2": float(r2),
        "slope_se": float(slope_se),
        "n": int(n),
    }


def ks_uniform_angle(angles):
    """Kolmogorov-Smirnov p-value of angles (mod 2pi) against the uniform law."""
    from scipy import stats

    a = np.mod(np.asarray(angles, dtype=float), 2 * np.pi) / (2 * np.pi)
    return float(stats.kstest(a, "uniform").pvalue)
