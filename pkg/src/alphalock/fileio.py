"""Line-oriented text formats for recordings, event logs, phase logs,
and hypnograms.

Every file starts with a magic line naming the format and version;
header fields follow as "# key: value" lines, then a column header and
CSV rows. Floats are written with repr so a write-read cycle is
lossless. Parse failures name the offending line.
"""

import numpy as np

from .analysis import Hypnogram, Stage
from .loop import Condition, EventKind, StimEvent, StimEventLog
from .recording import EegRecording, GroundTruthPhase

RECORDING_MAGIC = "# alphalock-recording v1"
EVENTS_MAGIC = "# alphalock-events v1"
PHASES_MAGIC = "# alphalock-phases v1"
HYPNOGRAM_MAGIC = "# alphalock-hypnogram v1"

FORMAT_VERSIONS = {
    "recording": "v1",
    "events": "v1",
    "phases": "v1",
    "hypnogram": "v1",
}


class ParseError(ValueError):
    """File did not match the expected format; message names the line."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


def _fmt(value):
    """Shortest representation that round-trips the float exactly."""
    return repr(float(value))


class _HeaderReader:
    """Pulls '# key: value' lines off the top of a file."""

    def __init__(self, path, lines, magic):
        self.path = path
        self.lines = lines
        self.pos = 0
        if not lines or lines[0].strip() != magic:
            raise ParseError(path, 1, f"expected magic line {magic!r}")
        self.pos = 1
        self.fields = {}
        while self.pos < len(lines) and lines[self.pos].startswith("#"):
            body = lines[self.pos][1:].strip()
            if ":" not in body:
                raise ParseError(path, self.pos + 1, f"malformed header line {body!r}")
            key, value = body.split(":", 1)
            self.fields[key.strip()] = value.strip()
            self.pos += 1

    def require(self, key):
        if key not in self.fields:
            raise ParseError(self.path, self.pos, f"missing header field {key!r}")
        return self.fields[key]

    def body(self):
        return self.lines[self.pos :], self.pos + 1


def _parse_float(path, line_no, text, what):
    try:
        return float(text)
    except ValueError:
        raise ParseError(path, line_no, f"bad {what}: {text!r}") from None


def write_recording(path, recording: EegRecording, truth: GroundTruthPhase = None):
    """Write a recording, with ground-truth columns when supplied."""
    rec = recording
    with open(path, "w") as fh:
        fh.write(RECORDING_MAGIC + "\n")
        fh.write(f"# sample_rate_hz: {_fmt(rec.sample_rate)}\n")
        fh.write(f"# channels: {','.join(rec.channel_labels)}\n")
        fh.write(f"# start_time: {rec.start_time}\n")
        for key in sorted(rec.provenance):
            fh.write(f"# provenance.{key}: {rec.provenance[key]}\n")
        cols = ["index", *rec.channel_labels]
        if truth is not None:
            if len(truth) != rec.n_samples:
                raise ValueError("ground truth length must match the recording")
            cols += ["truth_phase_deg", "truth_amp_uv", "truth_unwrapped_deg"]
        fh.write(",".join(cols) + "\n")
        for i in range(rec.n_samples):
            row = [str(i)] + [_fmt(v) for v in rec.samples[i]]
            if truth is not None:
                row += [
                    _fmt(truth.phase_deg[i]),
                    _fmt(truth.amplitude_uv[i]),
                    _fmt(truth.unwrapped_deg[i]),
                ]
            fh.write(",".join(row) + "\n")


def read_recording(path):
    """Read a recording file.

    Returns (EegRecording, GroundTruthPhase or None).
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = _HeaderReader(path, lines, RECORDING_MAGIC)
    rate = _parse_float(path, 2, header.require("sample_rate_hz"), "sample rate")
    if rate <= 0:
        raise ParseError(path, 2, f"sample_rate_hz must be positive, got {rate}")
    labels = tuple(
        s.strip() for s in header.require("channels").split(",") if s.strip()
    )
    if not 1 <= len(labels) <= 3:
        raise ParseError(path, 3, f"channel count must be 1..3, got {len(labels)}")
    start_time = header.fields.get("start_time", "1970-01-01T00:00:00")
    provenance = {
        key[len("provenance."):]: value
        for key, value in header.fields.items()
        if key.startswith("provenance.")
    }
    body, first_line_no = header.body()
    if not body:
        raise ParseError(path, first_line_no, "missing column header")
    columns = [c.strip() for c in body[0].split(",")]
    base_cols = ["index", *labels]
    truth_cols = ["truth_phase_deg", "truth_amp_uv", "truth_unwrapped_deg"]
    if columns == base_cols:
        has_truth = False
    elif columns == base_cols + truth_cols:
        has_truth = True
    else:
        raise ParseError(
            path, first_line_no, f"unexpected columns {columns!r}"
        )
    rows = body[1:]
    if not rows:
        raise ParseError(path, first_line_no + 1, "recording has no samples")
    n_cols = len(columns)
    samples = np.empty((len(rows), len(labels)))
    truth_vals = np.empty((len(rows), 3)) if has_truth else None
    prev_index = None
    for r, line in enumerate(rows):
        line_no = first_line_no + 1 + r
        parts = line.split(",")
        if len(parts) != n_cols:
            raise ParseError(
                path, line_no, f"expected {n_cols} fields, got {len(parts)}"
            )
        try:
            index = int(parts[0])
        except ValueError:
            raise ParseError(path, line_no, f"bad sample index: {parts[0]!r}") from None
        if prev_index is not None and index <= prev_index:
            raise ParseError(
                path, line_no, f"sample index {index} does not increase"
            )
        prev_index = index
        for c in range(len(labels)):
            samples[r, c] = _parse_float(path, line_no, parts[1 + c], "voltage")
        if has_truth:
            for c in range(3):
                truth_vals[r, c] = _parse_float(
                    path, line_no, parts[1 + len(labels) + c], "ground-truth value"
                )
    recording = EegRecording(
        samples=samples,
        sample_rate=rate,
        channel_labels=labels,
        start_time=start_time,
        provenance=provenance,
    )
    truth = None
    if has_truth:
        truth = GroundTruthPhase(
            phase_deg=truth_vals[:, 0],
            amplitude_uv=truth_vals[:, 1],
            unwrapped_deg=truth_vals[:, 2],
        )
    return recording, truth


def write_event_log(path, log: StimEventLog):
    with open(path, "w") as fh:
        fh.write(EVENTS_MAGIC + "\n")
        fh.write(f"# condition: {log.condition.value}\n")
        fh.write(f"# onset_target_deg: {_fmt(log.onset_target_deg)}\n")
        fh.write(f"# offset_target_deg: {_fmt(log.offset_target_deg)}\n")
        fh.write(f"# sample_rate_hz: {_fmt(log.sample_rate)}\n")
        fh.write("fire_time_s,kind,target_deg,estimated_deg,truth_deg,channel\n")
        for e in log.events:
            truth = "" if e.truth_phase_deg is None else _fmt(e.truth_phase_deg)
            fh.write(
                ",".join(
                    [
                        _fmt(e.fire_time_s),
                        e.kind.value,
                        _fmt(e.target_phase_deg),
                        _fmt(e.estimated_phase_deg),
                        truth,
                        str(e.channel_used),
                    ]
                )
                + "\n"
            )


def read_event_log(path) -> StimEventLog:
    """Read an event log; the phase-log arrays come back empty."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = _HeaderReader(path, lines, EVENTS_MAGIC)
    condition_text = header.require("condition")
    try:
        condition = Condition(condition_text)
    except ValueError:
        raise ParseError(
            path, 2, f"unknown condition {condition_text!r}"
        ) from None
    onset = _parse_float(path, 3, header.require("onset_target_deg"), "target")
    offset = _parse_float(path, 4, header.require("offset_target_deg"), "target")
    rate = _parse_float(path, 5, header.require("sample_rate_hz"), "sample rate")
    body, first_line_no = header.body()
    expected = "fire_time_s,kind,target_deg,estimated_deg,truth_deg,channel"
    if not body or body[0].strip() != expected:
        raise ParseError(path, first_line_no, f"expected column header {expected!r}")
    events = []
    prev_time = -np.inf
    for r, line in enumerate(body[1:]):
        line_no = first_line_no + 1 + r
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ParseError(path, line_no, f"expected 6 fields, got {len(parts)}")
        fire_time = _parse_float(path, line_no, parts[0], "fire time")
        if fire_time <= prev_time:
            raise ParseError(
                path, line_no, f"fire time {fire_time} does not increase"
            )
        prev_time = fire_time
        try:
            kind = EventKind(parts[1])
        except ValueError:
            raise ParseError(path, line_no, f"unknown kind {parts[1]!r}") from None
        truth = None if parts[4] == "" else _parse_float(
            path, line_no, parts[4], "truth phase"
        )
        try:
            channel = int(parts[5])
        except ValueError:
            raise ParseError(path, line_no, f"bad channel: {parts[5]!r}") from None
        events.append(
            StimEvent(
                kind=kind,
                fire_time_s=fire_time,
                target_phase_deg=_parse_float(path, line_no, parts[2], "target"),
                estimated_phase_deg=_parse_float(path, line_no, parts[3], "estimate"),
                truth_phase_deg=truth,
                channel_used=channel,
            )
        )
    return StimEventLog(
        events=tuple(events),
        condition=condition,
        onset_target_deg=onset,
        offset_target_deg=offset,
        sample_rate=rate,
    )


def write_phase_log(path, log: StimEventLog):
    with open(path, "w") as fh:
        fh.write(PHASES_MAGIC + "\n")
        fh.write(f"# sample_rate_hz: {_fmt(log.sample_rate)}\n")
        fh.write("time_s,phase_deg,amplitude_uv,inst_freq_hz,channel\n")
        for i in range(log.phase_time_s.size):
            fh.write(
                ",".join(
                    [
                        _fmt(log.phase_time_s[i]),
                        _fmt(log.phase_deg[i]),
                        _fmt(log.amplitude_uv[i]),
                        _fmt(log.inst_freq_hz[i]),
                        str(int(log.active_channel[i])),
                    ]
                )
                + "\n"
            )


def read_phase_log(path):
    """Read a phase log into plain arrays.

    Returns (time_s, phase_deg, amplitude_uv, inst_freq_hz, channel).
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = _HeaderReader(path, lines, PHASES_MAGIC)
    body, first_line_no = header.body()
    expected = "time_s,phase_deg,amplitude_uv,inst_freq_hz,channel"
    if not body or body[0].strip() != expected:
        raise ParseError(path, first_line_no, f"expected column header {expected!r}")
    rows = [line for line in body[1:] if line.strip()]
    out = np.empty((len(rows), 4))
    channels = np.empty(len(rows), dtype=int)
    for r, line in enumerate(rows):
        line_no = first_line_no + 1 + r
        parts = line.split(",")
        if len(parts) != 5:
            raise ParseError(path, line_no, f"expected 5 fields, got {len(parts)}")
        for c in range(4):
            out[r, c] = _parse_float(path, line_no, parts[c], "value")
        try:
            channels[r] = int(parts[4])
        except ValueError:
            raise ParseError(path, line_no, f"bad channel: {parts[4]!r}") from None
    return out[:, 0], out[:, 1], out[:, 2], out[:, 3], channels


def write_hypnogram(path, h: Hypnogram):
    with open(path, "w") as fh:
        fh.write(HYPNOGRAM_MAGIC + "\n")
        fh.write(f"# epoch_duration_s: {_fmt(h.epoch_duration_s)}\n")
        fh.write("epoch_index,stage\n")
        for i, stage in enumerate(h.stages):
            fh.write(f"{i},{stage.value}\n")


def read_hypnogram(path) -> Hypnogram:
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = _HeaderReader(path, lines, HYPNOGRAM_MAGIC)
    duration = _parse_float(
        path, 2, header.require("epoch_duration_s"), "epoch duration"
    )
    body, first_line_no = header.body()
    if not body or body[0].strip() != "epoch_index,stage":
        raise ParseError(path, first_line_no, "expected column header 'epoch_index,stage'")
    stages = []
    for r, line in enumerate(body[1:]):
        line_no = first_line_no + 1 + r
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(path, line_no, f"expected 2 fields, got {len(parts)}")
        try:
            index = int(parts[0])
        except ValueError:
            raise ParseError(path, line_no, f"bad epoch index: {parts[0]!r}") from None
        if index != len(stages):
            raise ParseError(
                path, line_no, f"epoch index {index} breaks the contiguous sequence"
            )
        try:
            stages.append(Stage(parts[1].strip()))
        except ValueError:
            raise ParseError(
                path, line_no, f"unknown stage label {parts[1].strip()!r}"
            ) from None
    if not stages:
        raise ParseError(path, first_line_no + 1, "hypnogram has no epochs")
    return Hypnogram(stages=tuple(stages), epoch_duration_s=duration)
