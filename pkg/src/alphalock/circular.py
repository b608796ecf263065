"""Circular statistics on phase angles in degrees.

All angles live on [0, 360) with 0 at the positive peak of the reference
cosine. Differences are signed and wrapped to (-180, 180].
"""

from dataclasses import dataclass

import numpy as np


def wrap360(angle_deg):
    """Wrap angles into [0, 360).

    Accepts scalars or arrays; rejects non-finite input. -0.0 maps to
    0.0 and exact multiples of 360 map to 0 so equality tests on
    wrapped values are stable.
    """
    arr = np.asarray(angle_deg, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("angles must be finite")
    wrapped = np.mod(arr, 360.0)
    # mod can return 360.0 for tiny negative inputs due to rounding
    wrapped = np.where(wrapped >= 360.0, wrapped - 360.0, wrapped)
    if np.isscalar(angle_deg):
        return float(wrapped)
    return wrapped


def circ_diff(a_deg, b_deg):
    """Signed smallest angle a - b, wrapped to (-180, 180]."""
    d = np.mod(np.asarray(a_deg, dtype=float) - b_deg, 360.0)
    d = np.where(d > 180.0, d - 360.0, d)
    if np.isscalar(a_deg) and np.isscalar(b_deg):
        return float(d)
    return d


def circ_distance(a_deg, b_deg):
    """Unsigned circular distance in [0, 180]."""
    return np.abs(circ_diff(a_deg, b_deg))


@dataclass(frozen=True)
class CircularStats:
    """Summary of a sample of angles.

    resultant_length is the mean resultant vector length (the phase
    locking value); angular_deviation_deg is sqrt(2 * (1 - R)) in
    degrees, so the two are redundant by construction and either can
    be recovered from the other.
    """

    n: int
    mean_deg: float
    median_deg: float
    resultant_length: float
    angular_deviation_deg: float

    @property
    def plv(self):
        return self.resultant_length


def plv_to_angular_deviation(plv):
    """Angular deviation in degrees implied by a resultant length."""
    if not 0.0 <= plv <= 1.0:
        raise ValueError(f"plv must be in [0, 1], got {plv}")
    return float(np.degrees(np.sqrt(2.0 * (1.0 - plv))))


def angular_deviation_to_plv(dev_deg):
    """Resultant length implied by an angular deviation in degrees."""
    s = np.radians(dev_deg)
    plv = 1.0 - 0.5 * s * s
    if -1e-12 <= plv < 0.0:
        plv = 0.0  # rounding at the maximum deviation, degrees(sqrt(2))
    if not 0.0 <= plv <= 1.0:
        raise ValueError(f"deviation {dev_deg} deg is outside the valid range")
    return float(plv)


def circ_median(angles_deg):
    """Circular median: the sample angle minimizing mean circular distance.

    Candidates are restricted to the sample angles themselves; ties are
    broken toward the smallest angle. O(n log n) via prefix sums over
    the sorted sample.
    """
    a = wrap360(np.asarray(angles_deg, dtype=float).ravel())
    if a.size == 0:
        raise ValueError("circ_median requires at least one angle")
    if not np.all(np.isfinite(a)):
        raise ValueError("angles must be finite")
    order = np.argsort(a, kind="stable")
    b = a[order]
    n = b.size
    prefix = np.concatenate(([0.0], np.cumsum(b)))
    total = prefix[-1]
    j = np.arange(n)
    # split the sample at each candidate j into four runs; within each,
    # the circular distance is linear in b_i so prefix sums suffice:
    #   i >= j, b_i <= b_j + 180  -> b_i - b_j
    #   i >= j, b_i >  b_j + 180  -> 360 - (b_i - b_j)
    #   i <  j, b_i <= b_j - 180  -> (b_i + 360) - b_j
    #   i <  j, b_i >  b_j - 180  -> b_j - b_i
    hi = np.searchsorted(b, b + 180.0, side="right")
    lo = np.searchsorted(b, b - 180.0, side="right")
    sum_a = prefix[hi] - prefix[j]
    cnt_a = hi - j
    sum_b = total - prefix[hi]
    cnt_b = n - hi
    sum_c = prefix[np.minimum(lo, j)]
    cnt_c = np.minimum(lo, j)
    sum_d = prefix[j] - sum_c
    cnt_d = j - cnt_c
    dist = (
        (sum_a - cnt_a * b)
        + (cnt_b * (360.0 + b) - sum_b)
        + (cnt_c * (360.0 - b) + sum_c)
        + (cnt_d * b - sum_d)
    )
    # ties within rounding go to the smallest angle, so the two-point
    # case and mirror-symmetric samples have a deterministic answer
    d_min = float(dist.min())
    tol = 1e-9 * max(1.0, d_min)
    return float(b[np.flatnonzero(dist <= d_min + tol)[0]])


def circ_stats(angles_deg):
    """Mean direction, median, resultant length, and angular deviation.

    Parameters
    ----------
    angles_deg : array_like
        Sample of angles in degrees, any wrap.

    Returns
    -------
    CircularStats
    """
    a = np.asarray(angles_deg, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("circ_stats requires at least one angle")
    if not np.all(np.isfinite(a)):
        raise ValueError("angles must be finite")
    rad = np.radians(a)
    z = np.exp(1j * rad).mean()
    r = min(float(np.abs(z)), 1.0)
    mean_deg = wrap360(np.degrees(np.angle(z))) if r > 0 else 0.0
    return CircularStats(
        n=int(a.size),
        mean_deg=float(mean_deg),
        median_deg=circ_median(a),
        resultant_length=r,
        angular_deviation_deg=plv_to_angular_deviation(r),
    )
