import numpy as np
import pytest

from alphalock import (
    Condition,
    EegRecording,
    EventKind,
    Hypnogram,
    ParseError,
    Stage,
    StimEvent,
    StimEventLog,
    SynthSpec,
    OscillatorSpec,
    phase_accuracy,
    read_event_log,
    read_hypnogram,
    read_phase_log,
    read_recording,
    synth_recording,
    write_event_log,
    write_hypnogram,
    write_phase_log,
    write_recording,
)

FS = 250.0


def small_trace(with_truth=True, noise=4.0):
    spec = SynthSpec(
        duration_s=4.0,
        sample_rate=FS,
        oscillator=OscillatorSpec(seed=9),
        noise_level_uv=noise,
        noise_seed=44,
    )
    return synth_recording(spec)


def sample_log(n=12, with_truth=True, with_phases=True):
    events = []
    rng = np.random.default_rng(17)
    t = 0.5
    for i in range(n):
        kind = EventKind.ONSET if i % 2 == 0 else EventKind.OFFSET
        target = 314.0 if kind is EventKind.ONSET else 44.0
        truth = float((target + rng.normal(0, 15)) % 360.0) if with_truth else None
        events.append(
            StimEvent(
                kind=kind,
                fire_time_s=t,
                target_phase_deg=target,
                estimated_phase_deg=target,
                truth_phase_deg=truth,
                channel_used=int(rng.integers(0, 3)),
            )
        )
        t += float(rng.uniform(0.05, 0.4))
    if with_phases:
        m = 40
        phase_time = 1.0 + np.arange(m) / FS
        phase = (np.arange(m) * 14.4) % 360.0
        amp = 18.0 + rng.normal(0, 1, m)
        freq = 10.0 + rng.normal(0, 0.05, m)
        freq[:3] = np.nan  # warmup region
        chan = rng.integers(0, 3, m)
    else:
        phase_time = phase = amp = freq = np.array([])
        chan = np.array([], dtype=int)
    return StimEventLog(
        events=tuple(events),
        condition=Condition.PEAK_LOCKED,
        onset_target_deg=314.0,
        offset_target_deg=44.0,
        sample_rate=FS,
        phase_time_s=phase_time,
        phase_deg=phase,
        amplitude_uv=amp,
        inst_freq_hz=freq,
        active_channel=chan,
    )


class TestRecordingRoundTrip:
    def test_with_truth(self, tmp_path):
        trace = small_trace()
        path = tmp_path / "rec.csv"
        write_recording(path, trace.recording, trace.truth)
        rec, truth = read_recording(path)
        assert np.array_equal(rec.samples, trace.recording.samples)
        assert rec.sample_rate == trace.recording.sample_rate
        assert rec.channel_labels == trace.recording.channel_labels
        assert rec.start_time == trace.recording.start_time
        assert rec.provenance == trace.recording.provenance
        assert truth is not None
        assert np.array_equal(truth.phase_deg, trace.truth.phase_deg)
        assert np.array_equal(truth.amplitude_uv, trace.truth.amplitude_uv)
        assert np.array_equal(truth.unwrapped_deg, trace.truth.unwrapped_deg)

    def test_without_truth(self, tmp_path):
        trace = small_trace()
        path = tmp_path / "rec.csv"
        write_recording(path, trace.recording)
        rec, truth = read_recording(path)
        assert truth is None
        assert np.array_equal(rec.samples, trace.recording.samples)

    def test_exact_float_survival(self, tmp_path):
        # values with no short decimal representation survive exactly
        samples = np.array([[np.pi], [-1.0 / 3.0], [1e-17], [2**-40]])
        rec = EegRecording(samples=samples, sample_rate=FS)
        path = tmp_path / "rec.csv"
        write_recording(path, rec)
        back, _ = read_recording(path)
        assert np.array_equal(back.samples, samples)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "rec.csv"
        path.write_text("# something else\n1,2\n")
        with pytest.raises(ParseError) as err:
            read_recording(path)
        assert err.value.line_no == 1
        assert str(path) in str(err.value)

    def test_nonincreasing_index(self, tmp_path):
        trace = small_trace()
        path = tmp_path / "rec.csv"
        write_recording(path, trace.recording)
        lines = path.read_text().splitlines()
        # duplicate a data row so the sample index repeats
        lines.insert(20, lines[19])
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as err:
            read_recording(path)
        assert err.value.line_no == 21
        assert "does not increase" in str(err.value)

    def test_bad_voltage_names_line(self, tmp_path):
        trace = small_trace()
        path = tmp_path / "rec.csv"
        write_recording(path, trace.recording)
        lines = path.read_text().splitlines()
        row = lines[15].split(",")
        row[1] = "not-a-number"
        lines[15] = ",".join(row)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as err:
            read_recording(path)
        assert err.value.line_no == 16
        assert "not-a-number" in str(err.value)


class TestEventLogRoundTrip:
    def test_identical_accuracy_report(self, tmp_path):
        log = sample_log()
        path = tmp_path / "events.csv"
        write_event_log(path, log)
        back = read_event_log(path)
        assert back.condition is log.condition
        assert back.sample_rate == log.sample_rate
        assert len(back.events) == len(log.events)
        for a, b in zip(back.events, log.events):
            assert a == b
        before = phase_accuracy(log)
        after = phase_accuracy(back)
        for kind in (EventKind.ONSET, EventKind.OFFSET):
            ea, eb = before.entry(kind), after.entry(kind)
            assert ea.stats.mean_deg == eb.stats.mean_deg
            assert ea.stats.plv == eb.stats.plv
            assert ea.error_mean_deg == eb.error_mean_deg

    def test_missing_truth_round_trips_as_none(self, tmp_path):
        log = sample_log(with_truth=False)
        path = tmp_path / "events.csv"
        write_event_log(path, log)
        back = read_event_log(path)
        assert all(e.truth_phase_deg is None for e in back.events)

    def test_unknown_kind(self, tmp_path):
        log = sample_log(n=4)
        path = tmp_path / "events.csv"
        write_event_log(path, log)
        text = path.read_text().replace(",Onset,", ",Blast,", 1)
        path.write_text(text)
        with pytest.raises(ParseError, match="unknown kind"):
            read_event_log(path)

    def test_unknown_condition(self, tmp_path):
        log = sample_log(n=4)
        path = tmp_path / "events.csv"
        write_event_log(path, log)
        text = path.read_text().replace("PeakLocked", "SidewaysLocked")
        path.write_text(text)
        with pytest.raises(ParseError, match="unknown condition"):
            read_event_log(path)

    def test_decreasing_fire_times(self, tmp_path):
        log = sample_log(n=4)
        path = tmp_path / "events.csv"
        write_event_log(path, log)
        lines = path.read_text().splitlines()
        first, second = lines[6].split(","), lines[7].split(",")
        first[0], second[0] = second[0], first[0]
        lines[6], lines[7] = ",".join(first), ",".join(second)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError, match="does not increase"):
            read_event_log(path)


class TestPhaseLogRoundTrip:
    def test_nan_aware_round_trip(self, tmp_path):
        log = sample_log()
        path = tmp_path / "phases.csv"
        write_phase_log(path, log)
        time_s, phase, amp, freq, chan = read_phase_log(path)
        assert np.array_equal(time_s, log.phase_time_s)
        assert np.array_equal(phase, log.phase_deg)
        assert np.array_equal(amp, log.amplitude_uv)
        assert np.array_equal(freq, log.inst_freq_hz, equal_nan=True)
        assert np.isnan(freq[:3]).all()
        assert np.array_equal(chan, log.active_channel)

    def test_field_count_error(self, tmp_path):
        log = sample_log()
        path = tmp_path / "phases.csv"
        write_phase_log(path, log)
        lines = path.read_text().splitlines()
        lines[5] = lines[5] + ",extra"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as err:
            read_phase_log(path)
        assert err.value.line_no == 6


class TestHypnogramRoundTrip:
    def test_round_trip_and_recount(self, tmp_path):
        stages = (
            (Stage.W,) * 6
            + (Stage.N1,) * 3
            + (Stage.N2,) * 8
            + (Stage.IND,)
            + (Stage.N3, Stage.REM) * 2
        )
        h = Hypnogram(stages=stages, epoch_duration_s=30.0)
        path = tmp_path / "night.csv"
        write_hypnogram(path, h)
        back = read_hypnogram(path)
        assert back.stages == stages
        assert back.epoch_duration_s == 30.0
        # stage-duration histogram is recomputable from the file alone
        counts = {s: back.stages.count(s) for s in Stage}
        assert counts[Stage.W] == 6
        assert counts[Stage.N2] == 8
        assert counts[Stage.IND] == 1
        assert sum(counts.values()) == len(stages)

    def test_unknown_stage_names_line(self, tmp_path):
        path = tmp_path / "night.csv"
        path.write_text(
            "# alphalock-hypnogram v1\n"
            "# epoch_duration_s: 30.0\n"
            "epoch_index,stage\n"
            "0,W\n"
            "1,N4\n"
        )
        with pytest.raises(ParseError) as err:
            read_hypnogram(path)
        assert err.value.line_no == 5
        assert "N4" in str(err.value)

    def test_noncontiguous_epoch_index(self, tmp_path):
        path = tmp_path / "night.csv"
        path.write_text(
            "# alphalock-hypnogram v1\n"
            "# epoch_duration_s: 30.0\n"
            "epoch_index,stage\n"
            "0,W\n"
            "2,N1\n"
        )
        with pytest.raises(ParseError, match="contiguous"):
            read_hypnogram(path)

    def test_empty_body(self, tmp_path):
        path = tmp_path / "night.csv"
        path.write_text(
            "# alphalock-hypnogram v1\n"
            "# epoch_duration_s: 30.0\n"
            "epoch_index,stage\n"
        )
        with pytest.raises(ParseError, match="no epochs"):
            read_hypnogram(path)


class TestParseErrorShape:
    def test_attributes_and_message(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("garbage\n")
        with pytest.raises(ParseError) as err:
            read_hypnogram(path)
        e = err.value
        assert e.path == str(path)
        assert e.line_no == 1
        assert str(e).startswith(f"{path}:1:")
        assert isinstance(e, ValueError)
