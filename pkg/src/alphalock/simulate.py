"""Synthetic EEG generation with exact per-sample ground truth.

Every generator is a pure function of its spec and seed: the oscillator
phase attached to a trace is the analytic integral of the instantaneous
frequency, so closed-loop phase accuracy can be scored against truth at
machine precision regardless of added noise or artifacts.
"""

from dataclasses import dataclass, replace

import numpy as np

from .recording import (
    DEFAULT_CHANNEL_LABELS,
    SENSE_CHANNEL,
    EegRecording,
    GroundTruthPhase,
)

# slow sinusoidal FM used to realize bounded frequency jitter
FM_RATE_HZ = 0.05

# half-sine blink transient width
BLINK_WIDTH_S = 0.3

# attenuation of the oscillator on the two lateral channels
DEFAULT_SIDE_GAIN = 0.5


@dataclass(frozen=True)
class OscillatorSpec:
    """Alpha-band oscillator: base frequency, amplitude, and slow modulations.

    am_depth in [0, 1) modulates amplitude sinusoidally at am_rate_hz;
    freq_jitter_hz bounds a slow sinusoidal frequency drift. The seed
    fixes the initial phase and the modulator phases.
    """

    base_freq_hz: float = 10.0
    amplitude_uv: float = 20.0
    am_depth: float = 0.0
    am_rate_hz: float = 0.1
    freq_jitter_hz: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 7.5 <= self.base_freq_hz <= 14.0:
            raise ValueError(
                f"base_freq_hz must be in [7.5, 14], got {self.base_freq_hz}"
            )
        if self.amplitude_uv < 0:
            raise ValueError(f"amplitude_uv must be >= 0, got {self.amplitude_uv}")
        if not 0.0 <= self.am_depth < 1.0:
            raise ValueError(f"am_depth must be in [0, 1), got {self.am_depth}")
        if self.am_rate_hz <= 0:
            raise ValueError(f"am_rate_hz must be positive, got {self.am_rate_hz}")
        if self.freq_jitter_hz < 0:
            raise ValueError(
                f"freq_jitter_hz must be >= 0, got {self.freq_jitter_hz}"
            )
        if self.freq_jitter_hz >= self.base_freq_hz:
            raise ValueError("freq_jitter_hz must stay below base_freq_hz")


@dataclass(frozen=True)
class ErpTemplate:
    """Injectable evoked response: a raised-cosine positive component.

    The component peaks exactly p1_latency_s after the stimulus, with
    total support p1_width_s centered on the peak. The two gain fields
    optionally scale the oscillator amplitude for gain_horizon_s after
    the component arrives, depending on whether the ground-truth phase
    at arrival is nearer the peak (0 deg) or the trough (180 deg).
    """

    p1_latency_s: float = 0.0624
    p1_amplitude_uv: float = 8.0
    p1_width_s: float = 0.04
    post_stim_alpha_gain_peak: float = 1.0
    post_stim_alpha_gain_trough: float = 1.0
    gain_horizon_s: float = 0.3

    def __post_init__(self):
        if not 0.035 <= self.p1_latency_s <= 0.075:
            raise ValueError(
                f"p1_latency_s must be in [0.035, 0.075], got {self.p1_latency_s}"
            )
        if self.p1_width_s <= 0:
            raise ValueError(f"p1_width_s must be positive, got {self.p1_width_s}")
        if self.post_stim_alpha_gain_peak <= 0 or self.post_stim_alpha_gain_trough <= 0:
            raise ValueError("post-stimulus alpha gains must be positive")
        if self.gain_horizon_s < 0:
            raise ValueError(f"gain_horizon_s must be >= 0, got {self.gain_horizon_s}")


@dataclass(frozen=True)
class SimTrace:
    """A recording plus the oscillator truth and injection annotations."""

    recording: EegRecording
    truth: GroundTruthPhase
    osc_channel_gains: tuple
    blink_times: tuple = ()
    erp_times: tuple = ()

    def __post_init__(self):
        if len(self.truth) != self.recording.n_samples:
            raise ValueError("ground-truth length must equal recording length")
        if len(self.osc_channel_gains) != self.recording.n_channels:
            raise ValueError("need one oscillator gain per channel")


def gen_pink_noise(n, sample_rate, level_uv, seed):
    """1/f noise with exact RMS and a -10 dB/decade power spectrum.

    White Gaussian noise is shaped in the frequency domain by f^(-1/2)
    (DC removed), inverse-transformed, then mean-removed and scaled to
    the requested RMS exactly. Reproducible by seed.
    """
    n = int(n)
    if n < 256:
        raise ValueError(f"n must be at least 256 samples, got {n}")
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    if level_uv < 0:
        raise ValueError(f"level_uv must be >= 0, got {level_uv}")
    if level_uv == 0:
        return np.zeros(n)
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    shape = np.zeros_like(freqs)
    shape[1:] = freqs[1:] ** -0.5
    x = np.fft.irfft(spectrum * shape, n=n)
    x -= x.mean()
    rms = np.sqrt(np.mean(x * x))
    return x * (level_uv / rms)


def band_power(series, sample_rate, low_hz, high_hz):
    """Mean-square power of the series inside [low_hz, high_hz]."""
    x = np.asarray(series, dtype=float)
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, d=1.0 / sample_rate)
    mask = (freqs >= low_hz) & (freqs <= high_hz)
    # Parseval: sum |X|^2 / n^2, doubling interior rfft bins
    weights = np.full(freqs.size, 2.0)
    weights[0] = 1.0
    if x.size % 2 == 0:
        weights[-1] = 1.0
    return float(np.sum(weights[mask] * np.abs(spectrum[mask]) ** 2) / x.size**2)


def _oscillator(spec: OscillatorSpec, duration_s, sample_rate):
    """Oscillator waveform plus exact unwrapped phase and amplitude."""
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    rng = np.random.default_rng(spec.seed)
    phi0_deg = rng.uniform(0.0, 360.0)
    fm_phase = rng.uniform(0.0, 2.0 * np.pi)
    am_phase = rng.uniform(0.0, 2.0 * np.pi)
    # analytic integral of f(t) = base + jitter*sin(2 pi FM_RATE t + fm_phase)
    cycles = spec.base_freq_hz * t
    if spec.freq_jitter_hz > 0:
        depth = spec.freq_jitter_hz / (2.0 * np.pi * FM_RATE_HZ)
        cycles = cycles - depth * (
            np.cos(2.0 * np.pi * FM_RATE_HZ * t + fm_phase) - np.cos(fm_phase)
        )
    unwrapped_deg = phi0_deg + 360.0 * cycles
    amp = spec.amplitude_uv * (
        1.0 + spec.am_depth * np.sin(2.0 * np.pi * spec.am_rate_hz * t + am_phase)
    )
    wave = amp * np.cos(np.radians(unwrapped_deg))
    return wave, unwrapped_deg, amp


def _as_trace(rec_samples, sample_rate, unwrapped_deg, amp, gains, provenance,
              blink_times=(), erp_times=()):
    rec = EegRecording(
        samples=rec_samples,
        sample_rate=sample_rate,
        channel_labels=DEFAULT_CHANNEL_LABELS,
        provenance=provenance,
    )
    truth = GroundTruthPhase(
        phase_deg=np.mod(unwrapped_deg, 360.0),
        amplitude_uv=amp,
        unwrapped_deg=unwrapped_deg,
    )
    return SimTrace(
        recording=rec,
        truth=truth,
        osc_channel_gains=tuple(gains),
        blink_times=tuple(blink_times),
        erp_times=tuple(erp_times),
    )


def gen_alpha_trace(spec: OscillatorSpec, duration_s, sample_rate) -> SimTrace:
    """Noise-free oscillator trace on three channels with exact truth.

    The middle channel carries the oscillator at unit gain; the lateral
    channels carry it attenuated by the default side gain.
    """
    if duration_s < 2.0:
        raise ValueError(f"duration_s must be at least 2 s, got {duration_s}")
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    wave, unwrapped, amp = _oscillator(spec, duration_s, sample_rate)
    gains = (DEFAULT_SIDE_GAIN, 1.0, DEFAULT_SIDE_GAIN)
    samples = wave[:, np.newaxis] * np.array(gains)[np.newaxis, :]
    provenance = {
        "source": "gen_alpha_trace",
        "seed": str(spec.seed),
        "base_freq_hz": repr(spec.base_freq_hz),
    }
    return _as_trace(samples, sample_rate, unwrapped, amp, gains, provenance)


def _check_times(times, latest_start, what):
    for t in times:
        if not 0.0 <= t <= latest_start:
            raise ValueError(
                f"{what} time {t} s falls outside the usable range [0, "
                f"{latest_start:.3f}] s"
            )


def inject_blinks(trace: SimTrace, times, peak_uv) -> SimTrace:
    """Add positive half-sine blink transients on the sensing channel.

    Each blink spans BLINK_WIDTH_S starting at its listed time. Returns
    a new trace; the input is left untouched.
    """
    if peak_uv < 0:
        raise ValueError(f"peak_uv must be >= 0, got {peak_uv}")
    rec = trace.recording
    _check_times(times, rec.duration_s - BLINK_WIDTH_S, "blink")
    if len(times) == 0:
        return trace
    fs = rec.sample_rate
    samples = rec.samples.copy()
    width = int(round(BLINK_WIDTH_S * fs))
    pulse = peak_uv * np.sin(np.pi * np.arange(width) / width)
    for t in times:
        k0 = int(round(t * fs))
        samples[k0 : k0 + width, SENSE_CHANNEL] += pulse
    rec2 = EegRecording(
        samples=samples,
        sample_rate=fs,
        channel_labels=rec.channel_labels,
        start_time=rec.start_time,
        provenance=rec.provenance,
    )
    return replace(
        trace,
        recording=rec2,
        blink_times=tuple(sorted(tuple(trace.blink_times) + tuple(times))),
    )


def _erp_pulse(template: ErpTemplate, fs):
    """Raised-cosine component sampled on the grid, peak at p1_latency_s."""
    half = template.p1_width_s / 2.0
    k_start = int(np.ceil((template.p1_latency_s - half) * fs))
    k_end = int(np.floor((template.p1_latency_s + half) * fs))
    k = np.arange(k_start, k_end + 1)
    tau = k / fs - template.p1_latency_s
    pulse = template.p1_amplitude_uv * 0.5 * (1.0 + np.cos(np.pi * tau / half))
    return k, pulse


def inject_erp(trace: SimTrace, stim_times, template: ErpTemplate) -> SimTrace:
    """Add an evoked component after each stimulus on the sensing channel.

    The component's peak lands at stim_time + p1_latency_s. When the
    template's post-stimulus gains differ from 1, the oscillator
    contribution on every channel is rescaled for gain_horizon_s after
    the component arrives; which gain applies depends on whether the
    ground-truth phase at arrival is within 90 deg of the peak (0 deg)
    or not (trough side). Returns a new trace.
    """
    rec = trace.recording
    fs = rec.sample_rate
    reach = template.p1_latency_s + template.p1_width_s / 2.0
    if template.post_stim_alpha_gain_peak != 1.0 or template.post_stim_alpha_gain_trough != 1.0:
        reach = max(reach, template.p1_latency_s + template.gain_horizon_s)
    _check_times(stim_times, rec.duration_s - reach, "stimulus")
    if len(stim_times) == 0:
        return trace
    samples = rec.samples.copy()
    k_off, pulse = _erp_pulse(template, fs)
    gains = np.array(trace.osc_channel_gains)
    osc = trace.truth.amplitude_uv * np.cos(np.radians(trace.truth.unwrapped_deg))
    new_amp = trace.truth.amplitude_uv.copy()
    for t in stim_times:
        k0 = int(round(t * fs))
        samples[k0 + k_off, SENSE_CHANNEL] += pulse
        arrival = t + template.p1_latency_s
        scale_peak = template.post_stim_alpha_gain_peak
        scale_trough = template.post_stim_alpha_gain_trough
        if scale_peak != 1.0 or scale_trough != 1.0:
            phase = trace.truth.phase_at(arrival, fs)
            on_peak = min(phase, 360.0 - phase) <= 90.0
            g = scale_peak if on_peak else scale_trough
            a = int(round(arrival * fs))
            b = min(int(round((arrival + template.gain_horizon_s) * fs)), len(osc))
            samples[a:b, :] += np.outer(osc[a:b] * (g - 1.0), gains)
            new_amp[a:b] *= g
    rec2 = EegRecording(
        samples=samples,
        sample_rate=fs,
        channel_labels=rec.channel_labels,
        start_time=rec.start_time,
        provenance=rec.provenance,
    )
    truth2 = GroundTruthPhase(
        phase_deg=trace.truth.phase_deg,
        amplitude_uv=new_amp,
        unwrapped_deg=trace.truth.unwrapped_deg,
    )
    return replace(
        trace,
        recording=rec2,
        truth=truth2,
        erp_times=tuple(sorted(tuple(trace.erp_times) + tuple(stim_times))),
    )


@dataclass(frozen=True)
class SynthSpec:
    """Complete description of one synthetic recording.

    noise_level_uv sets the per-channel pink-noise RMS directly;
    snr_alpha_db, when given, overrides it so that the oscillator's
    band power divided by the noise power in the same band hits the
    requested ratio on the sensing channel. Lateral channels get
    independently seeded noise and the oscillator at side_osc_gain.
    """

    duration_s: float = 120.0
    sample_rate: float = 250.0
    oscillator: OscillatorSpec = OscillatorSpec()
    noise_level_uv: float = 10.0
    snr_alpha_db: float | None = None
    side_osc_gain: float = DEFAULT_SIDE_GAIN
    noise_seed: int = 1000
    blink_times: tuple = ()
    blink_peak_uv: float = 150.0
    erp_times: tuple = ()
    erp: ErpTemplate | None = None

    def __post_init__(self):
        if self.duration_s < 2.0:
            raise ValueError(f"duration_s must be at least 2 s, got {self.duration_s}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.noise_level_uv < 0:
            raise ValueError(f"noise_level_uv must be >= 0, got {self.noise_level_uv}")
        if self.side_osc_gain < 0:
            raise ValueError(f"side_osc_gain must be >= 0, got {self.side_osc_gain}")


def _noise_level_for_snr(osc_wave, spec: SynthSpec):
    """Noise RMS so that oscillator/noise band-power ratio = snr_alpha_db."""
    fs = spec.sample_rate
    base = spec.oscillator.base_freq_hz
    lo, hi = base - 2.0, base + 2.0
    p_osc = band_power(osc_wave, fs, lo, hi)
    if p_osc <= 0:
        raise ValueError("oscillator has no band power; cannot set SNR")
    probe = gen_pink_noise(osc_wave.size, fs, 1.0, spec.noise_seed + SENSE_CHANNEL)
    p_noise_unit = band_power(probe, fs, lo, hi)
    target = p_osc / 10.0 ** (spec.snr_alpha_db / 10.0)
    return float(np.sqrt(target / p_noise_unit))


def synth_recording(components: SynthSpec) -> SimTrace:
    """Compose oscillator, per-channel pink noise, blinks, and ERPs.

    The sensing channel is oscillator + noise + artifacts; lateral
    channels are attenuated oscillator + independently seeded noise.
    With phase-dependent ERP gains disabled the output is the exact
    sample-wise sum of its components.
    """
    spec = components
    fs = spec.sample_rate
    wave, unwrapped, amp = _oscillator(spec.oscillator, spec.duration_s, fs)
    n = wave.size
    gains = (spec.side_osc_gain, 1.0, spec.side_osc_gain)
    level = spec.noise_level_uv
    if spec.snr_alpha_db is not None:
        level = _noise_level_for_snr(wave, spec)
    samples = wave[:, np.newaxis] * np.array(gains)[np.newaxis, :]
    if level > 0:
        for ch in range(3):
            samples[:, ch] += gen_pink_noise(n, fs, level, spec.noise_seed + ch)
    provenance = {
        "source": "synth_recording",
        "osc_seed": str(spec.oscillator.seed),
        "noise_seed": str(spec.noise_seed),
        "base_freq_hz": repr(spec.oscillator.base_freq_hz),
        "noise_level_uv": repr(level),
    }
    trace = _as_trace(samples, fs, unwrapped, amp, gains, provenance)
    if len(spec.blink_times) > 0:
        trace = inject_blinks(trace, spec.blink_times, spec.blink_peak_uv)
    if len(spec.erp_times) > 0:
        if spec.erp is None:
            raise ValueError("erp_times given but no ErpTemplate configured")
        trace = inject_erp(trace, spec.erp_times, spec.erp)
    return trace
