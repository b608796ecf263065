"""Offline evaluation: spectral IAF estimation, evoked-response
averaging and P1 latency, phase-accuracy reports, and sleep-onset
latency extraction."""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.signal import windows as sig_windows

from .circular import CircularStats, circ_diff, circ_stats, wrap360
from .dsp import BandpassSpec, design_bandpass, filter_zero_phase
from .loop import EventKind, StimEventLog

# detrend domain for the 1/f fit, Hz
FIT_BAND = (3.0, 30.0)

# spectral peak search range, Hz
IAF_BAND = (7.5, 14.0)

# taper family: bandwidth product grows with taper count so the
# requested count is always the standard 2*NW - 1 family
def _taper_nw(n_tapers):
    return (n_tapers + 1) / 2.0


class NoPeakError(ValueError):
    """No spectral peak rises above the prominence floor."""


class NoPositivePeakError(ValueError):
    """The evoked average has no positive maximum in the search window."""


class NoN2Error(ValueError):
    """The hypnogram never reaches N2."""


@dataclass(frozen=True)
class SpectrogramConfig:
    n_tapers: int = 4
    window_s: float = 6.0
    step_s: float = 0.150
    nfft: int = 4096

    def __post_init__(self):
        if self.n_tapers < 1:
            raise ValueError(f"n_tapers must be >= 1, got {self.n_tapers}")
        if not self.window_s > self.step_s > 0:
            raise ValueError(
                f"need window_s > step_s > 0, got {self.window_s}, {self.step_s}"
            )
        if self.nfft < 16:
            raise ValueError(f"nfft must be at least 16, got {self.nfft}")


@dataclass(frozen=True)
class IafResult:
    """Estimated individual alpha frequency with fit diagnostics."""

    iaf_hz: float
    peak_prominence: float
    detrend_coefficients: tuple

    def __post_init__(self):
        if not IAF_BAND[0] <= self.iaf_hz <= IAF_BAND[1]:
            raise ValueError(
                f"iaf_hz must be in [{IAF_BAND[0]}, {IAF_BAND[1]}], got {self.iaf_hz}"
            )
        if len(self.detrend_coefficients) != 4:
            raise ValueError("detrend_coefficients must hold a cubic's 4 values")


def multitaper_spectrogram(series, cfg: SpectrogramConfig, sample_rate):
    """Sliding-window multitaper power estimates.

    Returns (times_s, freqs_hz, power) where power has shape
    (n_windows, n_freqs) and times mark window centers. Each window's
    spectrum is the average of the periodograms of the series windowed
    by the discrete prolate spheroidal taper family.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"series must be 1-D, got shape {x.shape}")
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    win = int(round(cfg.window_s * sample_rate))
    step = int(round(cfg.step_s * sample_rate))
    if x.size < win:
        raise ValueError(
            f"series of {x.size} samples is shorter than one {win}-sample window"
        )
    nfft = max(cfg.nfft, win)
    tapers = sig_windows.dpss(win, _taper_nw(cfg.n_tapers), Kmax=cfg.n_tapers)
    tapers = np.atleast_2d(tapers)
    starts = np.arange(0, x.size - win + 1, step)
    freqs = np.fft.rfftfreq(nfft, d=1.0 / sample_rate)
    power = np.empty((starts.size, freqs.size))
    # chunk the window axis to bound the FFT workspace on long records
    chunk = max(1, int(2**22 // (tapers.shape[0] * nfft)))
    for c0 in range(0, starts.size, chunk):
        sel = starts[c0 : c0 + chunk]
        segs = x[sel[:, None] + np.arange(win)[None, :]]
        spec = np.fft.rfft(segs[None, :, :] * tapers[:, None, :], n=nfft, axis=-1)
        power[c0 : c0 + chunk] = np.mean(np.abs(spec) ** 2, axis=0) / sample_rate
    times = (starts + win / 2.0) / sample_rate
    return times, freqs, power


def _peak_candidates(detrended, lo_idx, hi_idx):
    """Interior local maxima of the detrended spectrum within the band."""
    d = detrended
    idx = []
    for i in range(max(lo_idx, 1), min(hi_idx + 1, d.size - 1)):
        if d[i] >= d[i - 1] and d[i] >= d[i + 1]:
            if idx and d[idx[-1]] == d[i] and i == idx[-1] + 1:
                continue  # plateau: keep the first sample
            idx.append(i)
    return idx


def _half_power_midpoint(freqs, detrended, peak_idx):
    """Center of the peak's half-power span, linearly interpolated.

    Walking out from the peak until the detrended log-power drops by
    log10(2) gives the two half-power crossings; their midpoint is a
    far better frequency estimate than the peak bin for broad, tilted
    peaks. Falls back to the peak bin when either crossing is missing.
    """
    thr = detrended[peak_idx] - np.log10(2.0)
    left = None
    for i in range(peak_idx - 1, -1, -1):
        if detrended[i] < thr:
            f = np.interp(
                thr,
                [detrended[i], detrended[i + 1]],
                [freqs[i], freqs[i + 1]],
            )
            left = f
            break
    right = None
    for i in range(peak_idx + 1, detrended.size):
        if detrended[i] < thr:
            f = np.interp(
                thr,
                [detrended[i], detrended[i - 1]],
                [freqs[i], freqs[i - 1]],
            )
            right = f
            break
    if left is None or right is None:
        return freqs[peak_idx]
    return 0.5 * (left + right)


def estimate_iaf(series, sample_rate, cfg: SpectrogramConfig = None) -> IafResult:
    """Individual alpha frequency from the detrended median spectrum.

    The median across spectrogram windows is detrended by a cubic
    log-log fit over the fit band, and the most prominent peak in the
    alpha search range is located; its frequency is refined to the
    midpoint of the half-power span.

    Raises NoPeakError when nothing in the search band rises above the
    prominence floor (twice the median absolute detrended residual).
    """
    if cfg is None:
        cfg = SpectrogramConfig()
    x = np.asarray(series, dtype=float)
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    if x.size < 60.0 * sample_rate:
        raise ValueError(
            f"need at least 60 s of data, got {x.size / sample_rate:.1f} s"
        )
    _, freqs, power = multitaper_spectrogram(x, cfg, sample_rate)
    med = np.median(power, axis=0)
    fit_mask = (freqs >= FIT_BAND[0]) & (freqs <= FIT_BAND[1])
    f_fit = freqs[fit_mask]
    p_fit = med[fit_mask]
    if np.any(p_fit <= 0):
        raise NoPeakError("median spectrum has empty bins in the fit band")
    log_f = np.log10(f_fit)
    log_p = np.log10(p_fit)
    coeffs = np.polyfit(log_f, log_p, 3)
    detrended = log_p - np.polyval(coeffs, log_f)

    search = np.flatnonzero((f_fit >= IAF_BAND[0]) & (f_fit <= IAF_BAND[1]))
    lo_idx, hi_idx = int(search[0]), int(search[-1])
    floor = 2.0 * float(np.median(np.abs(detrended)))
    if float(np.max(detrended[lo_idx : hi_idx + 1])) <= floor:
        raise NoPeakError(
            f"no detrended value in {IAF_BAND} Hz exceeds the floor {floor:.4g}"
        )
    best = None
    for i in _peak_candidates(detrended, lo_idx, hi_idx):
        left_min = float(np.min(detrended[: i + 1]))
        right_min = float(np.min(detrended[i:]))
        prominence = detrended[i] - max(left_min, right_min)
        if prominence <= floor:
            continue
        if best is None or prominence > best[1]:
            best = (i, prominence)
    if best is None:
        raise NoPeakError("no sufficiently prominent peak in the search band")
    peak_idx, prominence = best
    iaf = _half_power_midpoint(f_fit, detrended, peak_idx)
    iaf = float(np.clip(iaf, IAF_BAND[0], IAF_BAND[1]))
    return IafResult(
        iaf_hz=iaf,
        peak_prominence=float(prominence),
        detrend_coefficients=tuple(float(c) for c in coeffs),
    )


@dataclass(frozen=True)
class ErpConfig:
    epoch_window: tuple = (-0.250, 0.500)
    reject_threshold_uv: float = 100.0
    band: tuple = (2.0, 30.0)
    p1_window: tuple = (0.035, 0.075)

    def __post_init__(self):
        e0, e1 = self.epoch_window
        p0, p1 = self.p1_window
        if not e0 < e1:
            raise ValueError(f"epoch_window must increase, got {self.epoch_window}")
        if not (e0 <= p0 < p1 <= e1):
            raise ValueError(
                f"p1_window {self.p1_window} must sit inside epoch_window "
                f"{self.epoch_window}"
            )
        if self.reject_threshold_uv <= 0:
            raise ValueError(
                f"reject_threshold_uv must be positive, got {self.reject_threshold_uv}"
            )
        lo, hi = self.band
        if not 0 < lo < hi:
            raise ValueError(f"band must satisfy 0 < low < high, got {self.band}")


@dataclass(frozen=True)
class ErpAverage:
    """Averaged evoked waveform on a fixed peristimulus time grid."""

    time_s: np.ndarray
    mean_uv: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.time_s, dtype=float)
        v = np.asarray(self.mean_uv, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("time and waveform must be matching 1-D arrays")
        object.__setattr__(self, "time_s", t)
        object.__setattr__(self, "mean_uv", v)


def epoch_erp(series, stim_times, cfg: ErpConfig, sample_rate):
    """Band-limit, epoch, reject, and average around stimulus times.

    The whole series is filtered once (zero-phase, so component
    latencies are preserved), epochs are cut on the sample grid, any
    epoch containing a sample beyond the rejection threshold is
    dropped, and the survivors are averaged.

    Returns
    -------
    (ErpAverage, kept, rejected)
        kept + rejected equals the number of stimuli with full epoch
        support inside the record; stimuli too close to either edge are
        excluded from that count.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"series must be 1-D, got shape {x.shape}")
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    lo, hi = cfg.band
    spec = BandpassSpec(
        center_hz=(lo + hi) / 2.0,
        half_bandwidth_hz=(hi - lo) / 2.0,
        order=2,
        sample_rate=sample_rate,
    )
    filtered = filter_zero_phase(design_bandpass(spec), x)
    k_lo = int(round(cfg.epoch_window[0] * sample_rate))
    k_hi = int(round(cfg.epoch_window[1] * sample_rate))
    offsets = np.arange(k_lo, k_hi + 1)
    anchors = [
        int(round(t * sample_rate))
        for t in stim_times
        if int(round(t * sample_rate)) + k_lo >= 0
        and int(round(t * sample_rate)) + k_hi < x.size
    ]
    if not anchors:
        raise ValueError("no stimulus has full epoch support inside the record")
    epochs = filtered[np.asarray(anchors)[:, None] + offsets[None, :]]
    good = np.max(np.abs(epochs), axis=1) <= cfg.reject_threshold_uv
    kept = int(np.count_nonzero(good))
    rejected = int(good.size - kept)
    if kept == 0:
        raise ValueError("every epoch exceeded the rejection threshold")
    avg = ErpAverage(time_s=offsets / sample_rate, mean_uv=epochs[good].mean(axis=0))
    return avg, kept, rejected


def detect_p1(average: ErpAverage, cfg: ErpConfig):
    """Latency of the maximum positive deflection in the P1 window.

    Ties go to the earliest sample. Raises NoPositivePeakError when the
    window's maximum is not positive.
    """
    t = average.time_s
    p0, p1 = cfg.p1_window
    if t[0] > p0 or t[-1] < p1:
        raise ValueError("average does not cover the P1 search window")
    mask = (t >= p0) & (t <= p1)
    vals = average.mean_uv[mask]
    peak = int(np.argmax(vals))
    if vals[peak] <= 0:
        raise NoPositivePeakError("no positive deflection in the search window")
    return float(t[mask][peak])


class Stage(enum.Enum):
    W = "W"
    N1 = "N1"
    N2 = "N2"
    N3 = "N3"
    REM = "REM"
    IND = "IND"


@dataclass(frozen=True)
class Hypnogram:
    """Scored sleep stages on a fixed epoch grid."""

    stages: tuple
    epoch_duration_s: float = 30.0

    def __post_init__(self):
        if len(self.stages) == 0:
            raise ValueError("hypnogram must contain at least one epoch")
        if any(not isinstance(s, Stage) for s in self.stages):
            raise ValueError("stages must be Stage values")
        if self.epoch_duration_s <= 0:
            raise ValueError(
                f"epoch_duration_s must be positive, got {self.epoch_duration_s}"
            )


def sol_n2(h: Hypnogram):
    """Minutes until the first N2 epoch; indeterminate epochs still count.

    Raises NoN2Error when the record never reaches N2.
    """
    for idx, stage in enumerate(h.stages):
        if stage is Stage.N2:
            return idx * h.epoch_duration_s / 60.0
    raise NoN2Error("no N2 epoch in the hypnogram")


@dataclass(frozen=True)
class PhaseAccuracyEntry:
    kind: EventKind
    n_events: int
    target_deg: float
    stats: CircularStats
    error_mean_deg: float
    error_deviation_deg: float


@dataclass(frozen=True)
class PhaseAccuracyReport:
    entries: tuple
    phase_source: str

    def entry(self, kind: EventKind):
        for e in self.entries:
            if e.kind is kind:
                return e
        raise KeyError(f"no {kind.value} entry in report")


def phase_accuracy(log: StimEventLog, use: str = "auto") -> PhaseAccuracyReport:
    """Per-kind circular statistics of event phases against their targets.

    use selects which phase is scored: "truth" (simulation ground truth
    at the fire instant), "estimated" (the device's own estimate), or
    "auto" (truth when every event carries it, else estimated). The
    signed error is target minus measured mean, wrapped to
    (-180, 180]; its deviation equals the sample's angular deviation.
    """
    if len(log.events) == 0:
        raise ValueError("event log is empty")
    if use not in ("auto", "truth", "estimated"):
        raise ValueError(f"use must be auto/truth/estimated, got {use!r}")
    have_truth = all(e.truth_phase_deg is not None for e in log.events)
    if use == "truth" and not have_truth:
        raise ValueError("events lack ground-truth phases")
    source = "truth" if (use == "truth" or (use == "auto" and have_truth)) else "estimated"

    entries = []
    for kind, target in (
        (EventKind.ONSET, log.onset_target_deg),
        (EventKind.OFFSET, log.offset_target_deg),
    ):
        angles = [
            e.truth_phase_deg if source == "truth" else e.estimated_phase_deg
            for e in log.events
            if e.kind is kind
        ]
        if not angles:
            continue
        stats = circ_stats(angles)
        entries.append(
            PhaseAccuracyEntry(
                kind=kind,
                n_events=stats.n,
                target_deg=wrap360(target),
                stats=stats,
                error_mean_deg=circ_diff(target, stats.mean_deg),
                error_deviation_deg=stats.angular_deviation_deg,
            )
        )
    return PhaseAccuracyReport(entries=tuple(entries), phase_source=source)
