"""Causal band-pass filtering and leading-edge phase estimation.

The estimator returns the instantaneous phase and amplitude of the most
recent sample of a window, not the window center, so a control loop can
act on it with only the hardware latency left to compensate. Phase is
reported in degrees on [0, 360) with 0 at the positive peak (the signal
is modeled as amplitude * cos(phase)).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .circular import circ_diff, wrap360


@dataclass(frozen=True)
class RealWindow:
    """A buffered stretch of one channel, oldest sample first."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {arr.shape}")
        if arr.size < 8:
            raise ValueError(f"window needs at least 8 samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("window samples must be finite")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True)
class BandpassSpec:
    """Band-pass characterization: center +/- half_bandwidth at order.

    The band must sit strictly inside (0, sample_rate / 2).
    """

    center_hz: float
    half_bandwidth_hz: float
    order: int
    sample_rate: float

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.half_bandwidth_hz <= 0:
            raise ValueError(
                f"half_bandwidth_hz must be positive, got {self.half_bandwidth_hz}"
            )
        if not 1 <= int(self.order) <= 4:
            raise ValueError(f"order must be in 1..4, got {self.order}")
        lo, hi = self.low_hz, self.high_hz
        if lo <= 0 or hi >= self.sample_rate / 2:
            raise ValueError(
                f"band [{lo}, {hi}] Hz must lie inside (0, {self.sample_rate / 2}) Hz"
            )

    @property
    def low_hz(self):
        return self.center_hz - self.half_bandwidth_hz

    @property
    def high_hz(self):
        return self.center_hz + self.half_bandwidth_hz


@dataclass(frozen=True)
class FilterCoefficients:
    """Designed IIR coefficients, kept both as b/a and as an sos cascade.

    Filtering uses the sos form for numerical safety; the flat
    feedforward/feedback vectors are exposed for frequency-response
    evaluation and serialization. feedback[0] is always 1.
    """

    feedforward: np.ndarray
    feedback: np.ndarray
    sos: np.ndarray
    spec: BandpassSpec = field(repr=False)

    @property
    def b(self):
        return self.feedforward

    @property
    def a(self):
        return self.feedback

    def pole_magnitudes(self):
        mags = []
        for section in self.sos:
            mags.extend(np.abs(np.roots(section[3:])))
        return np.array(mags)


def design_bandpass(spec: BandpassSpec) -> FilterCoefficients:
    """Design a Butterworth band-pass with exact unit gain at the center.

    Butterworth leaves a small deviation from unity at the arithmetic
    center after the bilinear transform; the feedforward path is
    rescaled so |H(center)| = 1 to machine precision. All poles are
    verified to lie strictly inside the unit circle.
    """
    sos = signal.butter(
        int(spec.order),
        [spec.low_hz, spec.high_hz],
        btype="bandpass",
        fs=spec.sample_rate,
        output="sos",
    )
    _, h_center = signal.sosfreqz(
        sos, worN=[spec.center_hz], fs=spec.sample_rate
    )
    gain = np.abs(h_center[0])
    sos = sos.copy()
    sos[0, :3] /= gain
    b, a = signal.sos2tf(sos)
    coeffs = FilterCoefficients(feedforward=b, feedback=a, sos=sos, spec=spec)
    if np.any(coeffs.pole_magnitudes() >= 1.0):
        raise ValueError(f"unstable design for {spec}")
    return coeffs


def frequency_response(coeffs: FilterCoefficients, freqs_hz):
    """Complex response of the designed filter at the given frequencies."""
    _, h = signal.sosfreqz(
        coeffs.sos, worN=np.asarray(freqs_hz, dtype=float), fs=coeffs.spec.sample_rate
    )
    return h


def filter_stream(coeffs: FilterCoefficients, series):
    """Causal filtering from rest. One-shot convenience over StreamingFilter."""
    return signal.sosfilt(coeffs.sos, np.asarray(series, dtype=float))


def filter_zero_phase(coeffs: FilterCoefficients, series):
    """Forward-backward filtering; zero phase shift, offline use only."""
    return signal.sosfiltfilt(coeffs.sos, np.asarray(series, dtype=float))


class StreamingFilter:
    """Causal sos filter that carries its state across process() calls."""

    def __init__(self, coeffs: FilterCoefficients):
        self.coeffs = coeffs
        self._zi = np.zeros((coeffs.sos.shape[0], 2))

    def process(self, chunk):
        out, self._zi = signal.sosfilt(
            self.coeffs.sos, np.asarray(chunk, dtype=float), zi=self._zi
        )
        return out

    def reset(self):
        self._zi[:] = 0.0


@dataclass(frozen=True)
class PhaseEstimate:
    """Phase/amplitude/frequency of the most recent sample of a window."""

    phase_deg: float
    amplitude_uv: float
    inst_freq_hz: float


def _analytic_weights(n):
    """Spectral weights that zero negative frequencies and double positive ones."""
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1 : n // 2] = 2.0
    else:
        h[1 : (n + 1) // 2] = 2.0
    return h


def _endpoint_tone_response(kernel, spec: BandpassSpec, n):
    """Raw endpoint response (ka, kb) to the two tones exp(+-j*2*pi*center*t).

    A real cosine A*cos(2*pi*center*t + p) produces the endpoint value
    z = A/2 * (ka * e^{jp_end} + kb * e^{-jp_end}). ka is the dominant
    response; kb is the small leak of the negative-frequency tone through
    the analytic weighting and is what limits a scalar calibration.
    """
    lag_s = (n - 1 - np.arange(n)) / spec.sample_rate
    ka = np.sum(kernel * np.exp(-2j * np.pi * spec.center_hz * lag_s))
    kb = np.sum(kernel * np.exp(+2j * np.pi * spec.center_hz * lag_s))
    return ka, kb


def _calibrate_kernel(kernel, spec: BandpassSpec, n):
    """Make the endpoint exact for a center-frequency cosine of any phase.

    Solving z = A/2 (ka u + kb conj(u)) for u = e^{jp_end} gives
    A u = 2 (conj(ka) z - kb conj(z)) / (|ka|^2 - |kb|^2), and since the
    window is real, conj(z) = dot(window, conj(kernel)), so the corrected
    estimate is still a single complex kernel on the real window. The
    conj-mixing term is of order |kb|/|ka| (about 1e-2) and leaves
    off-center content essentially untouched.
    """
    ka, kb = _endpoint_tone_response(kernel, spec, n)
    scale = 2.0 / (np.abs(ka) ** 2 - np.abs(kb) ** 2)
    return scale * (np.conj(ka) * kernel - kb * np.conj(kernel))


def _window_weights(spec: BandpassSpec, n):
    """Analytic weights times the band-pass response at the window's bin grid."""
    coeffs = design_bandpass(spec)
    freqs = np.fft.fftfreq(n, d=1.0 / spec.sample_rate)
    resp = frequency_response(coeffs, freqs)
    return _analytic_weights(n) * resp


def endpoint_kernel(spec: BandpassSpec, window_len: int):
    """Linear kernel c with dot(window, c) = calibrated analytic endpoint.

    Folding the per-window transform (FFT, analytic + band-pass weighting,
    inverse FFT, take the last sample) into a single complex dot product
    makes the sliding estimate a convolution, which is what the streaming
    and batch paths run.

    Parameters
    ----------
    spec : BandpassSpec
        Band the estimator locks to; sample_rate must match the stream.
    window_len : int
        Samples per window; at least 8 and at least one period of center_hz.

    Returns
    -------
    complex128 array of window_len
    """
    n = int(window_len)
    if n < 8:
        raise ValueError(f"window_len must be at least 8 samples, got {n}")
    if n < spec.sample_rate / spec.center_hz:
        raise ValueError(
            f"window_len {n} is shorter than one cycle of {spec.center_hz} Hz"
        )
    w = _window_weights(spec, n)
    # endpoint of ifft(w * fft(x)) as an explicit dot product:
    # z = sum_k w[k] X[k] e^{2pi j k (n-1)/n} / n = dot(x, fft(v))
    v = w * np.exp(2j * np.pi * np.arange(n) * (n - 1) / n) / n
    kernel = np.fft.fft(v)
    return _calibrate_kernel(kernel, spec, n)


def echt(window, spec: BandpassSpec) -> PhaseEstimate:
    """Endpoint phase estimate of one window via the spectral transform.

    The window is transformed to the frequency domain, negative
    frequencies are zeroed (analytic signal), the spectrum is shaped by
    the causal band-pass response so the endpoint is not distorted by
    the circular wrap-around, and the last sample of the inverse
    transform is read out. A per-design calibration removes the
    band-pass filter's own gain and lag at the center frequency.

    Parameters
    ----------
    window : RealWindow or array_like
        Most recent samples, oldest first. A RealWindow's sample_rate
        must match spec.sample_rate; a bare array is taken at the
        spec's rate.
    spec : BandpassSpec
        Band to lock to; spec.sample_rate is the stream rate.

    Returns
    -------
    PhaseEstimate
        Phase (deg), amplitude (input units), and the in-window
        finite-difference frequency of the final two analytic samples.
    """
    if isinstance(window, RealWindow):
        if window.sample_rate != spec.sample_rate:
            raise ValueError(
                f"window sampled at {window.sample_rate} Hz but spec expects "
                f"{spec.sample_rate} Hz"
            )
        x = window.samples
    else:
        x = np.asarray(window, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"window must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("window samples must be finite")
    n = x.size
    if n < 8:
        raise ValueError(f"window must have at least 8 samples, got {n}")
    if n < spec.sample_rate / spec.center_hz:
        raise ValueError(
            f"window of {n} samples is shorter than one cycle of {spec.center_hz} Hz"
        )
    w = _window_weights(spec, n)
    analytic = np.fft.ifft(w * np.fft.fft(x))
    kernel_raw = np.fft.fft(
        w * np.exp(2j * np.pi * np.arange(n) * (n - 1) / n) / n
    )
    ka, kb = _endpoint_tone_response(kernel_raw, spec, n)
    z_raw = analytic[-1]
    z = (
        2.0
        * (np.conj(ka) * z_raw - kb * np.conj(z_raw))
        / (np.abs(ka) ** 2 - np.abs(kb) ** 2)
    )
    phase_prev = np.degrees(np.angle(analytic[-2]))
    phase_end_raw = np.degrees(np.angle(analytic[-1]))
    inst_freq = (
        circ_diff(phase_end_raw, phase_prev) / 360.0 * spec.sample_rate
    )
    return PhaseEstimate(
        phase_deg=wrap360(np.degrees(np.angle(z))),
        amplitude_uv=float(np.abs(z)),
        inst_freq_hz=float(inst_freq),
    )


def echt_stream(series, spec: BandpassSpec, window_len: int):
    """Endpoint estimates for every sample of a stream.

    Equivalent to calling echt() on each trailing window but computed as
    one overlap-add convolution. The first window_len - 1 samples have no
    full window behind them and come back NaN.

    Returns
    -------
    (phase_deg, amplitude_uv, inst_freq_hz)
        float64 arrays matching the input length. inst_freq_hz is the
        finite difference of consecutive endpoint phases; its first valid
        slot (and everything before) is NaN.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"series must be 1-D, got shape {x.shape}")
    n = int(window_len)
    if x.size < n:
        raise ValueError(f"series of {x.size} samples is shorter than one window")
    kernel = endpoint_kernel(spec, n)
    z = signal.oaconvolve(x, kernel[::-1], mode="valid")
    phase = wrap360(np.degrees(np.angle(z)))
    amp = np.abs(z)
    out_phase = np.full(x.size, np.nan)
    out_amp = np.full(x.size, np.nan)
    out_freq = np.full(x.size, np.nan)
    out_phase[n - 1 :] = phase
    out_amp[n - 1 :] = amp
    out_freq[n:] = circ_diff(phase[1:], phase[:-1]) / 360.0 * spec.sample_rate
    return out_phase, out_amp, out_freq


def hilbert_offline(series, sample_rate):
    """Per-sample phase and amplitude of the full-record analytic signal.

    Offline reference path: the whole series is transformed at once and
    the edges carry the usual wrap-around distortion, so only interior
    samples (the central 50%) should be trusted as a reference. The
    input is assumed to be band-limited already (filter first).

    Returns
    -------
    (phase_deg, amplitude_uv) : float64 arrays matching the input length.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"series must be 1-D, got shape {x.shape}")
    if x.size < 64:
        raise ValueError(f"series must have at least 64 samples, got {x.size}")
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    analytic = np.fft.ifft(_analytic_weights(x.size) * np.fft.fft(x))
    return wrap360(np.degrees(np.angle(analytic))), np.abs(analytic)
