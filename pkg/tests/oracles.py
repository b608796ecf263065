"""Independent reference implementations used only by the tests.

Each function here re-derives a quantity the package computes, but
through a different code path: textbook formulas driven by primitive
special functions and quadrature instead of distribution objects, a
third-party analytic-signal reference, and brute-force circular
statistics. Keeping both routes separate is what makes an agreement
check meaningful.
"""

import numpy as np
from scipy.optimize import brentq
from scipy.signal import hilbert as scipy_hilbert
from scipy.special import betainc, gammaln, ndtr

# ---------------------------------------------------------------------------
# circular statistics, brute force


def circ_mean_ref(deg):
    """Direction of the resultant vector, degrees in [0, 360)."""
    rad = np.deg2rad(np.asarray(deg, dtype=float))
    return float(np.degrees(np.angle(np.mean(np.exp(1j * rad)))) % 360.0)


def resultant_length_ref(deg):
    rad = np.deg2rad(np.asarray(deg, dtype=float))
    return float(np.abs(np.mean(np.exp(1j * rad))))


def angular_deviation_ref(deg):
    r = min(resultant_length_ref(deg), 1.0)
    return float(np.degrees(np.sqrt(2.0 * (1.0 - r))))


def circ_distance_ref(a, b):
    d = abs((float(a) - float(b)) % 360.0)
    return min(d, 360.0 - d)


def circ_median_ref(deg):
    """O(n^2) minimizer of the summed circular distance; ties to the
    smallest angle."""
    angles = sorted(float(a) % 360.0 for a in deg)
    best = None
    for a in angles:
        cost = sum(circ_distance_ref(a, b) for b in angles)
        if best is None or cost < best[0] - 1e-9:
            best = (cost, a)
    return best[1]


# ---------------------------------------------------------------------------
# analytic signal via a different library routine


def hilbert_phase_ref(series):
    """Instantaneous phase in degrees [0, 360) of the analytic signal."""
    z = scipy_hilbert(np.asarray(series, dtype=float))
    return np.degrees(np.angle(z)) % 360.0


# ---------------------------------------------------------------------------
# spectral slope


def slope_db_per_decade(series, sample_rate, f_lo, f_hi):
    """Least-squares slope of the periodogram in dB per decade of Hz."""
    x = np.asarray(series, dtype=float)
    spec = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(x.size, d=1.0 / sample_rate)
    keep = (freqs >= f_lo) & (freqs <= f_hi) & (spec > 0)
    logf = np.log10(freqs[keep])
    logp = 10.0 * np.log10(spec[keep])
    slope, _ = np.polyfit(logf, logp, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# one-way ANOVA from scratch: sums of squares plus the regularized
# incomplete beta for the F tail


def f_tail_p(f_stat, df_between, df_within):
    """P(F > f_stat) via the incomplete-beta identity
    I_x(d2/2, d1/2) at x = d2 / (d2 + d1 f)."""
    x = df_within / (df_within + df_between * f_stat)
    return float(betainc(df_within / 2.0, df_between / 2.0, x))


def anova_ref(groups):
    """Returns (f_stat, df_between, df_within, p_value)."""
    arrays = [np.asarray(g, dtype=float).ravel() for g in groups]
    n_total = sum(a.size for a in arrays)
    grand = sum(a.sum() for a in arrays) / n_total
    ss_between = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_within = sum(((a - a.mean()) ** 2).sum() for a in arrays)
    df_between = len(arrays) - 1
    df_within = n_total - len(arrays)
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    # P(F > f) for an F(d1, d2) variate equals I_x(d2/2, d1/2) at
    # x = d2 / (d2 + d1 f)
    x = df_within / (df_within + df_between * f_stat)
    p = float(betainc(df_within / 2.0, df_between / 2.0, x))
    return float(f_stat), df_between, df_within, p


# ---------------------------------------------------------------------------
# studentized range distribution by direct quadrature

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(400)
_Z_SPAN = 12.0


def studentized_range_cdf(q, k, df):
    """P(Q <= q) for the range of k standard normals over a chi-based
    scale with df degrees of freedom.

    Outer integral over the scale density, inner integral over the
    position of the minimum; both by fixed Gauss-Legendre rules wide
    enough for double precision in the ranges the tests use.
    """
    if q <= 0:
        return 0.0
    zs = _Z_SPAN * _NODES
    wz = _WEIGHTS * _Z_SPAN
    phi = np.exp(-0.5 * zs**2) / np.sqrt(2.0 * np.pi)
    span = 12.0 / np.sqrt(df)
    s_lo = max(1e-12, 1.0 - span)
    s_hi = 1.0 + span
    sv = 0.5 * (_NODES + 1.0) * (s_hi - s_lo) + s_lo
    ws = _WEIGHTS * 0.5 * (s_hi - s_lo)
    log_fs = (
        (df / 2.0) * np.log(df)
        - gammaln(df / 2.0)
        - (df / 2.0 - 1.0) * np.log(2.0)
        + (df - 1.0) * np.log(sv)
        - df * sv**2 / 2.0
    )
    inner = np.empty_like(sv)
    for i, s in enumerate(sv):
        gap = np.clip(ndtr(zs) - ndtr(zs - q * s), 0.0, None)
        inner[i] = k * np.sum(wz * phi * gap ** (k - 1))
    return float(np.sum(ws * np.exp(log_fs) * inner))


def studentized_range_sf(q, k, df):
    return 1.0 - studentized_range_cdf(q, k, df)


def studentized_range_ppf(p, k, df):
    return brentq(
        lambda q: studentized_range_cdf(q, k, df) - p,
        1e-6,
        100.0,
        xtol=1e-12,
        rtol=8.9e-16,
    )


def tukey_ref(groups, alpha=0.05):
    """Pairwise Tukey-Kramer comparisons from the formulas alone.

    Returns a list of (a, b, diff, ci_low, ci_high, p) with group
    indices a < b and diff = mean_b - mean_a.
    """
    arrays = [np.asarray(g, dtype=float).ravel() for g in groups]
    k = len(arrays)
    df_within = sum(a.size for a in arrays) - k
    ss_within = sum(((a - a.mean()) ** 2).sum() for a in arrays)
    mse = ss_within / df_within
    q_crit = studentized_range_ppf(1.0 - alpha, k, df_within)
    out = []
    for a in range(k):
        for b in range(a + 1, k):
            diff = arrays[b].mean() - arrays[a].mean()
            se = np.sqrt(mse / 2.0 * (1.0 / arrays[a].size + 1.0 / arrays[b].size))
            half = q_crit * se
            p = studentized_range_sf(abs(diff) / se, k, df_within)
            out.append((a, b, float(diff), float(diff - half), float(diff + half), p))
    return out
