"""Streaming session engine: channel quality, phase tracking, and
latency-compensated phase-target scheduling.

The engine consumes a recording (or a simulation trace carrying ground
truth), tracks the band phase on the active channel, and fires
alternating onset/offset events when the latency-compensated phase
crosses the configured targets. Crossing instants are located with
sub-sample precision on the unwrapped phase so the fire times are not
quantized to the sample grid.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .circular import wrap360
from .dsp import (
    BandpassSpec,
    design_bandpass,
    echt_stream,
    filter_stream,
    frequency_response,
)
from .recording import EegRecording, SENSE_CHANNEL
from .simulate import SimTrace

# fixed acquisition band ahead of the phase estimator
PREPROCESS_LOW_HZ = 2.5
PREPROCESS_HIGH_HZ = 35.0
PREPROCESS_ORDER = 2

# channel quality cadence
RMS_WINDOW_S = 5.0

DEFAULT_SWITCH_THRESHOLD_UV = 5.0


class Condition(enum.Enum):
    NO_AUDIO = "NoAudio"
    PEAK_LOCKED = "PeakLocked"
    TROUGH_LOCKED = "TroughLocked"


class EventKind(enum.Enum):
    ONSET = "Onset"
    OFFSET = "Offset"


class SignalStrength(enum.Enum):
    RED = "Red"
    ORANGE = "Orange"
    GREEN = "Green"


# default phase targets per condition: (onset, offset)
CONDITION_TARGETS = {
    Condition.TROUGH_LOCKED: (134.0, 224.0),
    Condition.PEAK_LOCKED: (314.0, 44.0),
}


@dataclass(frozen=True)
class StimulusSpec:
    """Audio pulse description; metadata for logs, not synthesized here."""

    pulse_duration_s: float = 0.012
    pulse_level_db_spl: float = 65.0
    background_level_db_spl: float = 47.0
    snr_db: float = 18.0

    def __post_init__(self):
        if self.pulse_duration_s <= 0:
            raise ValueError(
                f"pulse_duration_s must be positive, got {self.pulse_duration_s}"
            )
        gap = self.pulse_level_db_spl - self.background_level_db_spl
        if abs(gap - self.snr_db) > 1e-9:
            raise ValueError(
                f"snr_db must equal pulse minus background level: "
                f"{self.pulse_level_db_spl} - {self.background_level_db_spl} "
                f"!= {self.snr_db}"
            )


@dataclass(frozen=True)
class SchedulerConfig:
    """Condition, phase targets, and session timing."""

    condition: Condition
    onset_phase_deg: float
    offset_phase_deg: float
    session_duration_s: float = 1800.0
    min_inter_onset_s: float = 0.0
    stimulus: StimulusSpec = StimulusSpec()

    def __post_init__(self):
        if wrap360(self.onset_phase_deg) == wrap360(self.offset_phase_deg):
            raise ValueError("onset and offset phases must differ (mod 360)")
        if self.session_duration_s <= 0:
            raise ValueError(
                f"session_duration_s must be positive, got {self.session_duration_s}"
            )
        if self.min_inter_onset_s < 0:
            raise ValueError(
                f"min_inter_onset_s must be >= 0, got {self.min_inter_onset_s}"
            )

    @classmethod
    def for_condition(cls, condition: Condition, **overrides):
        """Config with the named condition's default phase pair."""
        onset, offset = CONDITION_TARGETS.get(
            condition, CONDITION_TARGETS[Condition.PEAK_LOCKED]
        )
        overrides.setdefault("onset_phase_deg", onset)
        overrides.setdefault("offset_phase_deg", offset)
        return cls(condition=condition, **overrides)


@dataclass(frozen=True)
class LatencyModel:
    """Output-path delays between the fire decision and the ear."""

    pipeline_delay_s: float = 0.0014
    extra_output_delay_s: float = 0.0

    def __post_init__(self):
        if self.pipeline_delay_s < 0 or self.extra_output_delay_s < 0:
            raise ValueError("delays must be >= 0")

    @property
    def total_delay_s(self):
        return self.pipeline_delay_s + self.extra_output_delay_s


@dataclass(frozen=True)
class StimEvent:
    kind: EventKind
    fire_time_s: float
    target_phase_deg: float
    estimated_phase_deg: float
    truth_phase_deg: float | None
    channel_used: int

    def __post_init__(self):
        for name in ("target_phase_deg", "estimated_phase_deg"):
            v = getattr(self, name)
            if not 0.0 <= v < 360.0:
                raise ValueError(f"{name} must be in [0, 360), got {v}")
        if self.truth_phase_deg is not None and not 0.0 <= self.truth_phase_deg < 360.0:
            raise ValueError(
                f"truth_phase_deg must be in [0, 360), got {self.truth_phase_deg}"
            )


@dataclass(frozen=True)
class ChannelQualityState:
    """Latest per-channel RMS plus the currently active channel.

    rms_uv entries are None for channels without a current measurement.
    """

    rms_uv: tuple
    active_channel: int
    switch_threshold_uv: float = DEFAULT_SWITCH_THRESHOLD_UV

    def __post_init__(self):
        if not 0 <= self.active_channel < len(self.rms_uv):
            raise ValueError(
                f"active_channel {self.active_channel} out of range for "
                f"{len(self.rms_uv)} channels"
            )


def compute_window_rms(series):
    """Root mean square of a voltage window."""
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("cannot compute RMS of an empty window")
    if not np.all(np.isfinite(x)):
        raise ValueError("window must be finite")
    return float(np.sqrt(np.mean(x * x)))


def classify_signal_strength(rms_uv) -> SignalStrength:
    """App-style traffic light: <=1 red, <=5 orange, above that green."""
    if rms_uv < 0:
        raise ValueError(f"rms must be >= 0, got {rms_uv}")
    if rms_uv <= 1.0:
        return SignalStrength.RED
    if rms_uv <= 5.0:
        return SignalStrength.ORANGE
    return SignalStrength.GREEN


def select_channel(state: ChannelQualityState) -> int:
    """Keep the active channel while its RMS holds up; else best of the rest.

    If the active channel's RMS is below the switch threshold, the
    remaining channels with current measurements are compared and the
    highest-RMS one wins (ties to the lowest index) even if the active
    channel would have outranked them.
    """
    current = state.rms_uv[state.active_channel]
    if current is None:
        raise ValueError("active channel has no current RMS measurement")
    if current >= state.switch_threshold_uv:
        return state.active_channel
    candidates = [
        (i, r)
        for i, r in enumerate(state.rms_uv)
        if i != state.active_channel and r is not None
    ]
    if not candidates:
        raise ValueError("no alternative channel has a current RMS measurement")
    best = max(candidates, key=lambda item: (item[1], -item[0]))
    return best[0]


def blink_test(series, cue_times, sample_rate):
    """Score a ten-cue blink calibration run.

    A cue counts as detected when any sample in the second after it
    exceeds +100 µV (strictly). Passing requires at least 7 detections.

    Returns
    -------
    (detected: int, passed: bool)
    """
    x = np.asarray(series, dtype=float)
    cues = list(cue_times)
    if len(cues) != 10:
        raise ValueError(f"blink test requires exactly 10 cues, got {len(cues)}")
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    duration = x.size / sample_rate
    detected = 0
    for t in cues:
        if not 0.0 <= t <= duration - 1.0:
            raise ValueError(
                f"cue at {t} s leaves no 1-second window inside the record"
            )
        k0 = int(round(t * sample_rate))
        k1 = int(round((t + 1.0) * sample_rate))
        if np.any(x[k0 : k1 + 1] > 100.0):
            detected += 1
    return detected, detected >= 7


def stim_onset_phase(erp_target_phase_deg, p1_latency_s, iaf_hz):
    """Phase at which to fire so the evoked P1 lands on the target phase.

    The oscillation advances 360 * p1_latency * iaf degrees while the
    evoked response travels; firing that much early makes the component
    arrive on target.
    """
    if not (
        np.isfinite(erp_target_phase_deg)
        and np.isfinite(p1_latency_s)
        and np.isfinite(iaf_hz)
    ):
        raise ValueError("inputs must be finite")
    if p1_latency_s < 0:
        raise ValueError(f"p1_latency_s must be >= 0, got {p1_latency_s}")
    if iaf_hz <= 0:
        raise ValueError(f"iaf_hz must be positive, got {iaf_hz}")
    return wrap360(erp_target_phase_deg - 360.0 * p1_latency_s * iaf_hz)


def phase_advance(latency: LatencyModel, inst_freq_hz):
    """Degrees the oscillation moves during the output path delay."""
    if inst_freq_hz <= 0:
        raise ValueError(f"inst_freq_hz must be positive, got {inst_freq_hz}")
    return 360.0 * inst_freq_hz * latency.total_delay_s


@dataclass(frozen=True)
class EchtConfig:
    """Estimator band plus window length for the session engine."""

    band: BandpassSpec
    window_samples: int = 250
    preprocess: bool = True

    def __post_init__(self):
        if self.window_samples < 8:
            raise ValueError(
                f"window_samples must be at least 8, got {self.window_samples}"
            )
        if self.window_samples < self.band.sample_rate / self.band.center_hz:
            raise ValueError("window must cover at least one center-frequency cycle")


@dataclass(frozen=True, eq=False)
class StimEventLog:
    """Everything a session run emits: events, phase log, quality log."""

    events: tuple
    condition: Condition
    onset_target_deg: float
    offset_target_deg: float
    sample_rate: float
    # per-sample phase log, starting after estimator warm-up
    phase_time_s: np.ndarray = field(default_factory=lambda: np.array([]))
    phase_deg: np.ndarray = field(default_factory=lambda: np.array([]))
    amplitude_uv: np.ndarray = field(default_factory=lambda: np.array([]))
    inst_freq_hz: np.ndarray = field(default_factory=lambda: np.array([]))
    active_channel: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    # channel-quality snapshots at each RMS boundary
    rms_time_s: np.ndarray = field(default_factory=lambda: np.array([]))
    rms_uv: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def onsets(self):
        return [e for e in self.events if e.kind is EventKind.ONSET]

    def offsets(self):
        return [e for e in self.events if e.kind is EventKind.OFFSET]


def _preprocess_correction_deg(fs, center_hz):
    """Phase the acquisition band-pass subtracts at the estimator center."""
    spec = BandpassSpec(
        center_hz=(PREPROCESS_LOW_HZ + PREPROCESS_HIGH_HZ) / 2.0,
        half_bandwidth_hz=(PREPROCESS_HIGH_HZ - PREPROCESS_LOW_HZ) / 2.0,
        order=PREPROCESS_ORDER,
        sample_rate=fs,
    )
    coeffs = design_bandpass(spec)
    h = frequency_response(coeffs, [center_hz])[0]
    return float(np.degrees(np.angle(h))), coeffs


def run_closed_loop(
    source,
    echt_cfg: EchtConfig,
    sched: SchedulerConfig,
    lat: LatencyModel,
    compensate: bool = True,
) -> StimEventLog:
    """Run one stimulation session over a recording or simulation trace.

    Per-sample semantics: the acquisition band-pass runs causally on
    every channel; endpoint phase estimates are produced for each
    sample of the active channel; channel quality is re-evaluated every
    5 seconds of stream time; and (outside the NoAudio condition) an
    onset fires when the latency-compensated phase crosses the onset
    target, followed by an offset at the offset target, alternating
    strictly. The compensated phase is the estimate advanced by
    360 * inst_freq * total_delay so the physically delayed stimulus
    lands on target; crossing instants are interpolated between samples
    and the stimulus fires at crossing + total delay.

    For simulation traces every event also records the ground-truth
    phase at the fire instant.

    Returns a StimEventLog; with compensate=False the estimates are
    used raw (the output delay still applies to fire times).
    """
    if isinstance(source, SimTrace):
        rec = source.recording
        truth = source.truth
    elif isinstance(source, EegRecording):
        rec = source
        truth = None
    else:
        raise TypeError(f"source must be SimTrace or EegRecording, got {type(source)}")
    fs = rec.sample_rate
    if fs != echt_cfg.band.sample_rate:
        raise ValueError(
            f"recording at {fs} Hz but estimator configured for "
            f"{echt_cfg.band.sample_rate} Hz"
        )
    n_needed = int(round(sched.session_duration_s * fs))
    if n_needed > rec.n_samples:
        raise ValueError(
            f"session needs {n_needed} samples but the stream has {rec.n_samples}"
        )
    n = n_needed
    window = echt_cfg.window_samples
    if n <= window:
        raise ValueError("session shorter than one estimator window")

    # acquisition filtering and the phase correction it requires
    if echt_cfg.preprocess:
        corr_deg, pre_coeffs = _preprocess_correction_deg(fs, echt_cfg.band.center_hz)
        streams = np.column_stack(
            [filter_stream(pre_coeffs, rec.samples[:n, ch]) for ch in range(rec.n_channels)]
        )
    else:
        corr_deg = 0.0
        streams = rec.samples[:n, :]

    # endpoint estimates per channel
    est_phase = np.empty((n, rec.n_channels))
    est_amp = np.empty((n, rec.n_channels))
    est_freq = np.empty((n, rec.n_channels))
    for ch in range(rec.n_channels):
        p, a, f = echt_stream(streams[:, ch], echt_cfg.band, window)
        est_phase[:, ch] = p
        est_amp[:, ch] = a
        est_freq[:, ch] = f

    # channel quality every RMS_WINDOW_S on the acquisition-filtered signal
    rms_len = int(round(RMS_WINDOW_S * fs))
    active0 = SENSE_CHANNEL if rec.n_channels == 3 else 0
    boundaries = list(range(rms_len, n + 1, rms_len))
    rms_times = []
    rms_log = []
    active_log_entries = []
    active = active0
    active_per_sample = np.full(n, active0, dtype=int)
    for b in boundaries:
        seg = streams[b - rms_len : b, :]
        rms = tuple(compute_window_rms(seg[:, ch]) for ch in range(rec.n_channels))
        rms_times.append(b / fs)
        rms_log.append(rms)
        if rec.n_channels >= 2:
            state = ChannelQualityState(rms_uv=rms, active_channel=active)
            active = select_channel(state)
        active_log_entries.append(active)
        active_per_sample[b:] = active

    # active-channel estimate streams, corrected for the acquisition filter lag
    rows = np.arange(n)
    phase = est_phase[rows, active_per_sample]
    amp = est_amp[rows, active_per_sample]
    freq = est_freq[rows, active_per_sample]
    start = window  # one full window of warm-up, plus one sample for inst freq
    phase_c = wrap360(phase[start:] - corr_deg)
    amp_v = amp[start:]
    freq_v = freq[start:]
    t_v = rows[start:] / fs
    active_v = active_per_sample[start:]

    events = []
    if sched.condition is not Condition.NO_AUDIO:
        events = _schedule_events(
            phase_c, freq_v, t_v, active_v, fs, echt_cfg, sched, lat,
            compensate, truth, rec.duration_s,
        )

    return StimEventLog(
        events=tuple(events),
        condition=sched.condition,
        onset_target_deg=wrap360(sched.onset_phase_deg),
        offset_target_deg=wrap360(sched.offset_phase_deg),
        sample_rate=fs,
        phase_time_s=t_v,
        phase_deg=phase_c,
        amplitude_uv=amp_v,
        inst_freq_hz=freq_v,
        active_channel=active_v,
        rms_time_s=np.array(rms_times),
        rms_uv=(
            np.array(rms_log)
            if rms_log
            else np.zeros((0, rec.n_channels))
        ),
    )


def _schedule_events(
    phase_c, freq_v, t_v, active_v, fs, echt_cfg, sched, lat, compensate,
    truth, record_duration_s,
):
    """Locate alternating target crossings on the compensated phase."""
    band = echt_cfg.band
    # advance uses the tracked frequency, clipped to the band so a noisy
    # finite difference cannot produce a wild correction
    freq_for_adv = np.clip(freq_v, band.low_hz, band.high_hz)
    if compensate:
        adv = 360.0 * freq_for_adv * lat.total_delay_s
    else:
        adv = np.zeros_like(freq_v)
    theta = np.unwrap(phase_c, period=360.0) + adv
    run_max = np.maximum.accumulate(theta)
    dt = 1.0 / fs

    onset = wrap360(sched.onset_phase_deg)
    offset = wrap360(sched.offset_phase_deg)
    onset_to_offset = wrap360(offset - onset)
    if onset_to_offset == 0.0:
        raise ValueError("onset and offset targets coincide")
    offset_to_onset = 360.0 - onset_to_offset

    def first_passage(level):
        """Sub-sample time and index where theta first reaches level."""
        k = int(np.searchsorted(run_max, level, side="left"))
        if k >= theta.size or k == 0:
            return None
        frac = (level - theta[k - 1]) / (theta[k] - theta[k - 1])
        return t_v[k - 1] + frac * dt, k

    events = []
    # first onset level: the first onset-phase crossing after the log starts
    level = theta[0] + wrap360(onset - theta[0])
    if level == theta[0]:
        level += 360.0
    next_kind = EventKind.ONSET
    last_onset_time = -np.inf
    while True:
        hit = first_passage(level)
        if hit is None:
            break
        cross_t, k = hit
        if next_kind is EventKind.ONSET and sched.min_inter_onset_s > 0:
            if cross_t < last_onset_time + sched.min_inter_onset_s:
                level += 360.0
                continue
        fire_t = cross_t + lat.total_delay_s
        if truth is not None and fire_t * fs > len(truth) - 1:
            break
        target = onset if next_kind is EventKind.ONSET else offset
        truth_deg = (
            float(truth.phase_at(fire_t, fs)) if truth is not None else None
        )
        events.append(
            StimEvent(
                kind=next_kind,
                fire_time_s=float(fire_t),
                target_phase_deg=float(target),
                estimated_phase_deg=wrap360(level),
                truth_phase_deg=truth_deg,
                channel_used=int(active_v[k]),
            )
        )
        if next_kind is EventKind.ONSET:
            last_onset_time = cross_t
            level += onset_to_offset
            next_kind = EventKind.OFFSET
        else:
            level += offset_to_onset
            next_kind = EventKind.ONSET
    return events
