"""Report figures rendered straight to files.

Headless by construction: the Agg backend is forced before pyplot is
imported, and every helper returns a Figure that `save_figure` writes
and closes. SVG output is kept reproducible (fixed hash salt, no date
metadata) so regenerating a report produces identical bytes.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import ErpAverage, IafResult, FIT_BAND
from .circular import circ_stats

plt.rcParams["svg.hashsalt"] = "alphalock"

_BIN_DEG_DEFAULT = 5.0


def phase_histogram_figure(
    phases_deg, target_deg=None, bin_deg=_BIN_DEG_DEFAULT, title=None
):
    """Polar histogram of phase samples with the mean resultant vector.

    Parameters
    ----------
    phases_deg : array_like
        Phase angles in degrees; wrapped internally.
    target_deg : float, optional
        Intended phase, drawn as a dashed radial line.
    bin_deg : float
        Histogram bin width; must divide 360 evenly.
    """
    phases = np.asarray(phases_deg, dtype=float)
    if phases.size == 0:
        raise ValueError("need at least one phase sample")
    n_bins = int(round(360.0 / bin_deg))
    if abs(n_bins * bin_deg - 360.0) > 1e-9:
        raise ValueError(f"bin_deg must divide 360 evenly, got {bin_deg}")
    edges = np.linspace(0.0, 2.0 * np.pi, n_bins + 1)
    counts, _ = np.histogram(np.deg2rad(np.mod(phases, 360.0)), bins=edges)
    stats = circ_stats(phases)

    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(5.0, 5.0))
    ax.bar(
        edges[:-1],
        counts,
        width=np.diff(edges),
        align="edge",
        color="#4878a8",
        edgecolor="white",
        linewidth=0.4,
    )
    r_max = counts.max() if counts.max() > 0 else 1.0
    mean_rad = np.deg2rad(stats.mean_deg)
    ax.annotate(
        "",
        xy=(mean_rad, stats.resultant_length * r_max),
        xytext=(0.0, 0.0),
        arrowprops={"arrowstyle": "-|>", "color": "#c0392b", "linewidth": 1.8},
    )
    if target_deg is not None:
        ax.plot(
            [np.deg2rad(target_deg)] * 2,
            [0.0, r_max],
            linestyle="--",
            color="#2c3e50",
            linewidth=1.2,
            label=f"target {float(target_deg):.1f}\N{DEGREE SIGN}",
        )
        ax.legend(loc="lower left", bbox_to_anchor=(0.0, -0.12), frameon=False)
    ax.set_yticklabels([])
    label = (
        f"mean {stats.mean_deg:.1f}\N{DEGREE SIGN}, "
        f"R {stats.resultant_length:.3f}, "
        f"SD {stats.angular_deviation_deg:.1f}\N{DEGREE SIGN}, n {stats.n}"
    )
    ax.set_title((title + "\n" + label) if title else label, fontsize=10)
    fig.tight_layout()
    return fig


def spectrum_figure(freqs_hz, log_power, iaf: IafResult, title=None):
    """Median log-power spectrum, the polynomial trend, and the peak."""
    freqs = np.asarray(freqs_hz, dtype=float)
    logp = np.asarray(log_power, dtype=float)
    if freqs.shape != logp.shape:
        raise ValueError("freqs and log power must have matching shapes")
    band = (freqs >= FIT_BAND[0]) & (freqs <= FIT_BAND[1])
    trend = np.polyval(iaf.detrend_coefficients, np.log10(freqs[band]))

    fig, axes = plt.subplots(2, 1, figsize=(6.4, 5.6), sharex=True)
    axes[0].plot(freqs[band], logp[band], color="#4878a8", label="median spectrum")
    axes[0].plot(freqs[band], trend, color="#c0392b", linestyle="--", label="1/f trend")
    axes[0].set_ylabel("log10 power")
    axes[0].legend(frameon=False, fontsize=9)

    axes[1].plot(freqs[band], logp[band] - trend, color="#4878a8")
    axes[1].axhline(0.0, color="0.6", linewidth=0.8)
    axes[1].axvline(
        iaf.iaf_hz,
        color="#c0392b",
        linestyle="--",
        label=f"peak {iaf.iaf_hz:.2f} Hz",
    )
    axes[1].set_xlabel("frequency (Hz)")
    axes[1].set_ylabel("detrended")
    axes[1].legend(frameon=False, fontsize=9)
    for ax in axes:
        ax.grid(True, alpha=0.3)
    if title:
        axes[0].set_title(title, fontsize=10)
    fig.tight_layout()
    return fig


def erp_figure(erp: ErpAverage, p1_latency_s=None, title=None):
    """Stimulus-locked average with the stimulus onset and P1 marked."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(erp.time_s * 1e3, erp.mean_uv, color="#4878a8")
    ax.axvline(0.0, color="0.4", linewidth=0.8)
    ax.axhline(0.0, color="0.6", linewidth=0.8)
    if p1_latency_s is not None:
        idx = int(np.argmin(np.abs(erp.time_s - p1_latency_s)))
        ax.plot(
            erp.time_s[idx] * 1e3,
            erp.mean_uv[idx],
            "o",
            color="#c0392b",
            label=f"P1 at {p1_latency_s * 1e3:.1f} ms",
        )
        ax.legend(frameon=False, fontsize=9)
    ax.set_xlabel("time from stimulus onset (ms)")
    ax.set_ylabel("amplitude (\N{MICRO SIGN}V)")
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    return fig


def save_figure(fig, path):
    """Write `fig` to `path` (format from the suffix) and close it."""
    path = str(path)
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    else:
        fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
