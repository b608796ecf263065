"""In-memory EEG recording containers shared by the simulator, the
session engine, and the file formats."""

from dataclasses import dataclass, field

import numpy as np

DEFAULT_CHANNEL_LABELS = ("Fp1", "Fpz", "Fp2")

# index into DEFAULT_CHANNEL_LABELS: the midline electrode carries the
# oscillator plus artifacts in synthetic recordings
SENSE_CHANNEL = 1


@dataclass(frozen=True)
class EegRecording:
    """Multichannel voltage record at a constant sample rate.

    samples has shape (n_samples, n_channels) in µV. Between 1 and 3
    channels are supported; labels follow the frontal montage order.
    """

    samples: np.ndarray
    sample_rate: float
    channel_labels: tuple = DEFAULT_CHANNEL_LABELS
    start_time: str = "1970-01-01T00:00:00"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, np.newaxis]
        if arr.ndim != 2:
            raise ValueError(f"samples must be 2-D (n, ch), got shape {arr.shape}")
        if not 1 <= arr.shape[1] <= 3:
            raise ValueError(f"channel count must be 1..3, got {arr.shape[1]}")
        if arr.shape[0] < 1:
            raise ValueError("recording must contain at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("recording samples must be finite")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        labels = tuple(self.channel_labels)[: arr.shape[1]]
        if len(labels) != arr.shape[1]:
            raise ValueError(
                f"{arr.shape[1]} channels but {len(labels)} labels supplied"
            )
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "channel_labels", labels)

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def n_channels(self):
        return self.samples.shape[1]

    @property
    def duration_s(self):
        return self.n_samples / self.sample_rate

    def times(self):
        return np.arange(self.n_samples) / self.sample_rate

    def channel(self, index):
        return self.samples[:, index]


@dataclass(frozen=True)
class GroundTruthPhase:
    """Per-sample oscillator truth attached to a synthetic recording.

    phase_deg is wrapped to [0, 360); unwrapped_deg keeps the raw
    integral of the instantaneous frequency so sub-sample interpolation
    near wrap points stays exact.
    """

    phase_deg: np.ndarray
    amplitude_uv: np.ndarray
    unwrapped_deg: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.phase_deg, dtype=float)
        a = np.asarray(self.amplitude_uv, dtype=float)
        u = np.asarray(self.unwrapped_deg, dtype=float)
        if not (p.shape == a.shape == u.shape) or p.ndim != 1:
            raise ValueError("ground-truth arrays must be 1-D and equal length")
        object.__setattr__(self, "phase_deg", p)
        object.__setattr__(self, "amplitude_uv", a)
        object.__setattr__(self, "unwrapped_deg", u)

    def __len__(self):
        return self.phase_deg.size

    def phase_at(self, time_s, sample_rate):
        """Ground-truth phase at an arbitrary instant, in [0, 360).

        Linear interpolation on the unwrapped phase; valid for times
        inside the recorded span.
        """
        idx = np.asarray(time_s, dtype=float) * sample_rate
        n = self.unwrapped_deg.size
        if np.any(idx < 0) or np.any(idx > n - 1):
            raise ValueError("time outside the recorded span")
        u = np.interp(idx, np.arange(n), self.unwrapped_deg)
        return np.mod(u, 360.0)
