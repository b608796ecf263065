"""Command-line pipeline: simulate, run a session, and evaluate it.

Every subcommand writes its artifacts into --out plus a manifest
(`manifest-<command>.json`) recording the resolved configuration, the
seed, format versions, and SHA-256 digests of inputs and outputs, so a
run can be reproduced bit for bit from the manifest alone. Timing
output from `bench` is the one machine-dependent exception.
"""

import dataclasses
import hashlib
import json
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import (
    ErpConfig,
    SpectrogramConfig,
    detect_p1,
    epoch_erp,
    estimate_iaf,
    multitaper_spectrogram,
    phase_accuracy,
    sol_n2,
)
from .config import (
    SessionConfig,
    config_to_dict,
    default_session_config,
    load_config,
)
from .dsp import echt
from .fileio import (
    FORMAT_VERSIONS,
    ParseError,
    read_event_log,
    read_hypnogram,
    read_recording,
    write_event_log,
    write_phase_log,
    write_recording,
)
from .figures import (
    erp_figure,
    phase_histogram_figure,
    save_figure,
    spectrum_figure,
)
from .loop import run_closed_loop
from .recording import SENSE_CHANNEL
from .simulate import SimTrace, synth_recording
from .stats import aggregate_subject_means, one_way_anova, tukey_hsd


def _deg(value):
    """Angles go to disk with 4 decimal places."""
    return f"{float(value):.4f}"


def _resolve_config(config_path, seed) -> SessionConfig:
    cfg = load_config(config_path) if config_path else default_session_config()
    if seed is not None:
        sim = cfg.simulation
        sim = dataclasses.replace(
            sim,
            oscillator=dataclasses.replace(sim.oscillator, seed=seed),
            noise_seed=seed + 1,
        )
        cfg = dataclasses.replace(cfg, simulation=sim)
    return cfg


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(out_dir, command, outputs, cfg=None, seed=None, inputs=(), args=None):
    doc = {
        "command": command,
        "package": "alphalock",
        "package_version": __version__,
        "format_versions": dict(FORMAT_VERSIONS),
        "seed": seed,
        "config": None if cfg is None else config_to_dict(cfg),
        "arguments": args or {},
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {Path(p).name: _sha256(p) for p in outputs},
    }
    path = Path(out_dir) / f"manifest-{command}.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _out_dir(out):
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _run(body):
    """Translate validation failures into a nonzero exit with the message."""
    try:
        return body()
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc


_config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Session configuration JSON; defaults are used when omitted.",
)
_seed_option = click.option(
    "--seed", type=int, default=None, help="Override the simulation seeds."
)
_out_option = click.option(
    "--out",
    default=".",
    show_default=True,
    type=click.Path(file_okay=False),
    help="Directory that receives the artifacts.",
)
_format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "svg"]),
    default="svg",
    show_default=True,
    help="svg renders figures next to the CSV tables; csv skips them.",
)


@click.group()
@click.version_option(__version__, prog_name="alphalock")
def main():
    """Phase-locked auditory stimulation: simulator, session engine, reports."""


@main.command()
@_config_option
@_seed_option
@_out_option
def simulate(config_path, seed, out):
    """Generate a synthetic recording with ground-truth phase columns."""

    def body():
        cfg = _resolve_config(config_path, seed)
        trace = synth_recording(cfg.simulation)
        out_dir = _out_dir(out)
        rec_path = out_dir / "recording.csv"
        write_recording(rec_path, trace.recording, trace.truth)
        _write_manifest(out_dir, "simulate", [rec_path], cfg=cfg, seed=seed)
        click.echo(
            f"wrote {rec_path}: {trace.recording.duration_s:g} s, "
            f"{trace.recording.n_channels} channels at "
            f"{trace.recording.sample_rate:g} Hz"
        )

    _run(body)


@main.command("run-loop")
@click.argument("recording", type=click.Path(exists=True, dir_okay=False))
@_config_option
@_out_option
@click.option(
    "--no-compensate",
    is_flag=True,
    help="Schedule on raw phase estimates without latency compensation.",
)
def run_loop(recording, config_path, out, no_compensate):
    """Run one closed-loop session over a recording file."""

    def body():
        cfg = _resolve_config(config_path, None)
        rec, truth = read_recording(recording)
        if truth is not None:
            source = SimTrace(
                recording=rec,
                truth=truth,
                osc_channel_gains=(1.0,) * rec.n_channels,
            )
        else:
            source = rec
        log = run_closed_loop(
            source, cfg.echt, cfg.scheduler, cfg.latency, compensate=not no_compensate
        )
        out_dir = _out_dir(out)
        events_path = out_dir / "events.csv"
        phases_path = out_dir / "phases.csv"
        write_event_log(events_path, log)
        write_phase_log(phases_path, log)
        _write_manifest(
            out_dir,
            "run-loop",
            [events_path, phases_path],
            cfg=cfg,
            inputs=[recording],
            args={"no_compensate": no_compensate},
        )
        click.echo(
            f"{cfg.scheduler.condition.value}: {len(log.onsets())} onsets, "
            f"{len(log.offsets())} offsets, {log.phase_deg.size} phase samples"
        )

    _run(body)


_EVAL_COLUMNS = (
    "kind,n_events,target_deg,mean_deg,plv,"
    "angular_deviation_deg,error_mean_deg,error_deviation_deg"
)


@main.command("eval-phase")
@click.argument("events", type=click.Path(exists=True, dir_okay=False))
@_out_option
@_format_option
@click.option(
    "--use",
    type=click.Choice(["auto", "truth", "estimated"]),
    default="auto",
    show_default=True,
    help="Which phase to score: simulation ground truth or device estimates.",
)
def eval_phase(events, out, fmt, use):
    """Circular accuracy report for a session's stimulus events."""

    def body():
        log = read_event_log(events)
        report = phase_accuracy(log, use=use)
        out_dir = _out_dir(out)
        report_path = out_dir / "phase_report.csv"
        with open(report_path, "w") as fh:
            fh.write(_EVAL_COLUMNS + "\n")
            for entry in report.entries:
                fh.write(
                    ",".join(
                        [
                            entry.kind.value,
                            str(entry.n_events),
                            _deg(entry.target_deg),
                            _deg(entry.stats.mean_deg),
                            f"{entry.stats.resultant_length:.4f}",
                            _deg(entry.stats.angular_deviation_deg),
                            _deg(entry.error_mean_deg),
                            _deg(entry.error_deviation_deg),
                        ]
                    )
                    + "\n"
                )
        outputs = [report_path]
        if fmt == "svg":
            for entry in report.entries:
                selected = [
                    e for e in log.events if e.kind is entry.kind
                ]
                if report.phase_source == "truth":
                    phases = [e.truth_phase_deg for e in selected]
                else:
                    phases = [e.estimated_phase_deg for e in selected]
                fig = phase_histogram_figure(
                    phases,
                    target_deg=entry.target_deg,
                    title=f"{log.condition.value} {entry.kind.value}",
                )
                fig_path = out_dir / f"phase_{entry.kind.value.lower()}.svg"
                save_figure(fig, fig_path)
                outputs.append(fig_path)
        _write_manifest(
            out_dir,
            "eval-phase",
            outputs,
            inputs=[events],
            args={"use": use, "format": fmt, "phase_source": report.phase_source},
        )
        for entry in report.entries:
            click.echo(
                f"{entry.kind.value}: n={entry.n_events} "
                f"mean={entry.stats.mean_deg:.2f} deg "
                f"(target {entry.target_deg:g}) "
                f"SD={entry.stats.angular_deviation_deg:.2f} deg "
                f"[{report.phase_source}]"
            )

    _run(body)


@main.command()
@click.argument("recording", type=click.Path(exists=True, dir_okay=False))
@_out_option
@_format_option
@click.option(
    "--channel",
    type=int,
    default=SENSE_CHANNEL,
    show_default=True,
    help="Channel index to analyze.",
)
def iaf(recording, out, fmt, channel):
    """Estimate the individual alpha frequency of a recording."""

    def body():
        rec, _ = read_recording(recording)
        if not 0 <= channel < rec.n_channels:
            raise ValueError(
                f"channel {channel} out of range for {rec.n_channels} channels"
            )
        series = rec.channel(channel)
        cfg = SpectrogramConfig()
        result = estimate_iaf(series, rec.sample_rate, cfg)
        out_dir = _out_dir(out)
        table_path = out_dir / "iaf.csv"
        c3, c2, c1, c0 = result.detrend_coefficients
        with open(table_path, "w") as fh:
            fh.write(
                "iaf_hz,peak_prominence,detrend_c3,detrend_c2,detrend_c1,detrend_c0\n"
            )
            fh.write(
                f"{result.iaf_hz:.4f},{result.peak_prominence:.6f},"
                f"{c3!r},{c2!r},{c1!r},{c0!r}\n"
            )
        outputs = [table_path]
        if fmt == "svg":
            _, freqs, power = multitaper_spectrogram(series, cfg, rec.sample_rate)
            med = np.median(power, axis=0)
            keep = med > 0
            fig = spectrum_figure(
                freqs[keep],
                np.log10(med[keep]),
                result,
                title=f"channel {rec.channel_labels[channel]}",
            )
            fig_path = out_dir / "spectrum.svg"
            save_figure(fig, fig_path)
            outputs.append(fig_path)
        _write_manifest(
            out_dir,
            "iaf",
            outputs,
            inputs=[recording],
            args={"channel": channel, "format": fmt},
        )
        click.echo(f"IAF {result.iaf_hz:.3f} Hz (prominence {result.peak_prominence:.3f})")

    _run(body)


@main.command()
@click.argument("recording", type=click.Path(exists=True, dir_okay=False))
@click.argument("events", type=click.Path(exists=True, dir_okay=False))
@_out_option
@_format_option
@click.option(
    "--channel",
    type=int,
    default=SENSE_CHANNEL,
    show_default=True,
    help="Channel index to epoch.",
)
@click.option(
    "--kind",
    type=click.Choice(["onset", "offset", "all"]),
    default="onset",
    show_default=True,
    help="Which stimulus events anchor the epochs.",
)
def erp(recording, events, out, fmt, channel, kind):
    """Average the evoked response around stimulus events."""

    def body():
        rec, _ = read_recording(recording)
        if not 0 <= channel < rec.n_channels:
            raise ValueError(
                f"channel {channel} out of range for {rec.n_channels} channels"
            )
        log = read_event_log(events)
        if kind == "onset":
            anchors = [e.fire_time_s for e in log.onsets()]
        elif kind == "offset":
            anchors = [e.fire_time_s for e in log.offsets()]
        else:
            anchors = [e.fire_time_s for e in log.events]
        cfg = ErpConfig()
        average, kept, rejected = epoch_erp(
            rec.channel(channel), anchors, cfg, rec.sample_rate
        )
        p1_s = detect_p1(average, cfg)
        out_dir = _out_dir(out)
        wave_path = out_dir / "erp_waveform.csv"
        with open(wave_path, "w") as fh:
            fh.write("time_s,mean_uv\n")
            for t, v in zip(average.time_s, average.mean_uv):
                fh.write(f"{t:.6f},{v:.6f}\n")
        summary_path = out_dir / "erp_summary.csv"
        with open(summary_path, "w") as fh:
            fh.write("p1_latency_ms,epochs_kept,epochs_rejected,anchors\n")
            fh.write(f"{p1_s * 1e3:.4f},{kept},{rejected},{len(anchors)}\n")
        outputs = [wave_path, summary_path]
        if fmt == "svg":
            fig = erp_figure(
                average, p1_latency_s=p1_s, title=f"{kind} events, n={kept}"
            )
            fig_path = out_dir / "erp.svg"
            save_figure(fig, fig_path)
            outputs.append(fig_path)
        _write_manifest(
            out_dir,
            "erp",
            outputs,
            inputs=[recording, events],
            args={"channel": channel, "kind": kind, "format": fmt},
        )
        click.echo(
            f"P1 at {p1_s * 1e3:.1f} ms from {kept} epochs "
            f"({rejected} rejected of {len(anchors)})"
        )

    _run(body)


@main.command()
@click.argument("hypnograms", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@_out_option
def sol(hypnograms, out):
    """Sleep-onset latency to N2 for each hypnogram file."""

    def body():
        rows = []
        for path in hypnograms:
            h = read_hypnogram(path)
            rows.append((path, sol_n2(h)))
        out_dir = _out_dir(out)
        table_path = out_dir / "sol.csv"
        with open(table_path, "w") as fh:
            fh.write("file,sol_n2_min\n")
            for path, minutes in rows:
                fh.write(f"{Path(path).name},{minutes:.4f}\n")
        _write_manifest(out_dir, "sol", [table_path], inputs=list(hypnograms))
        for path, minutes in rows:
            click.echo(f"{Path(path).name}: {minutes:.2f} min to N2")

    _run(body)


def _read_grouped_values(path):
    """Rows of `group,value` or `group,subject,value`; header optional."""
    rows = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    for line_no, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = [p.strip() for p in text.split(",")]
        if len(parts) == 2:
            group, subject, value = parts[0], None, parts[1]
        elif len(parts) == 3:
            group, subject, value = parts
        else:
            raise ParseError(
                path, line_no, f"expected 2 or 3 comma-separated fields, got {len(parts)}"
            )
        try:
            numeric = float(value)
        except ValueError:
            if line_no == 1:
                continue  # header row
            raise ParseError(path, line_no, f"value {value!r} is not a number") from None
        rows.append((group, subject if subject is not None else f"row{line_no}", numeric))
    if not rows:
        raise ParseError(path, 1, "no data rows")
    return rows


@main.command()
@click.argument("table", type=click.Path(exists=True, dir_okay=False))
@_out_option
@click.option(
    "--alpha",
    type=float,
    default=0.05,
    show_default=True,
    help="Familywise error rate for the Tukey intervals.",
)
def stats(table, out, alpha):
    """One-way ANOVA plus Tukey HSD over a grouped-values CSV.

    Input rows are `group,value` or `group,subject,value`; repeated
    subject rows are averaged per subject before testing.
    """

    def body():
        rows = _read_grouped_values(table)
        groups = aggregate_subject_means(rows)
        names = list(groups)
        values = list(groups.values())
        anova = one_way_anova(values)
        pairs = tukey_hsd(values, alpha=alpha)
        out_dir = _out_dir(out)
        anova_path = out_dir / "anova.csv"
        with open(anova_path, "w") as fh:
            fh.write("f_stat,df_between,df_within,p_value\n")
            fh.write(
                f"{anova.f_stat!r},{anova.df_between},{anova.df_within},"
                f"{anova.p_value!r}\n"
            )
        tukey_path = out_dir / "tukey.csv"
        with open(tukey_path, "w") as fh:
            fh.write("group_a,group_b,diff,ci_low,ci_high,p_value\n")
            for pair in pairs:
                fh.write(
                    f"{names[pair.group_a]},{names[pair.group_b]},{pair.diff!r},"
                    f"{pair.ci_low!r},{pair.ci_high!r},{pair.p_value!r}\n"
                )
        _write_manifest(
            out_dir,
            "stats",
            [anova_path, tukey_path],
            inputs=[table],
            args={"alpha": alpha},
        )
        click.echo(
            f"F({anova.df_between},{anova.df_within}) = {anova.f_stat:.4f}, "
            f"p = {anova.p_value:.4g}"
        )
        for pair in pairs:
            click.echo(
                f"{names[pair.group_a]} vs {names[pair.group_b]}: "
                f"diff {pair.diff:.4f}, p = {pair.p_value:.4g}"
            )

    _run(body)


@main.command()
@_config_option
@_seed_option
@_out_option
@click.option(
    "--duration-s",
    type=float,
    default=1800.0,
    show_default=True,
    help="Stream length the benchmark pushes through the loop.",
)
def bench(config_path, seed, out, duration_s):
    """Measure closed-loop throughput against the real-time budget."""

    def body():
        cfg = _resolve_config(config_path, seed)
        sim = dataclasses.replace(cfg.simulation, duration_s=duration_s)
        sched = dataclasses.replace(cfg.scheduler, session_duration_s=duration_s)
        cfg_run = dataclasses.replace(cfg, simulation=sim, scheduler=sched)
        trace = synth_recording(sim)
        n_samples = trace.recording.n_samples
        fs = trace.recording.sample_rate

        t0 = time.perf_counter()
        log = run_closed_loop(trace, cfg_run.echt, sched, cfg_run.latency)
        wall_s = time.perf_counter() - t0
        speedup = duration_s / wall_s
        stream_us_per_sample = wall_s / n_samples * 1e6

        # single-update latency: one endpoint estimate per fresh window,
        # the per-sample cost a device would pay
        window = cfg_run.echt.window_samples
        series = trace.recording.channel(SENSE_CHANNEL)
        starts = np.linspace(0, n_samples - window, 500).astype(int)
        samples_us = np.empty(starts.size)
        for i, s0 in enumerate(starts):
            chunk = series[s0 : s0 + window]
            t1 = time.perf_counter_ns()
            echt(chunk, cfg_run.echt.band)
            samples_us[i] = (time.perf_counter_ns() - t1) / 1e3
        budget_ms = 1.4
        p50, p95 = np.percentile(samples_us, [50, 95])
        rows = [
            ("stream_s", f"{duration_s:g}"),
            ("n_samples", str(n_samples)),
            ("sample_rate_hz", f"{fs:g}"),
            ("events_fired", str(len(log.events))),
            ("wall_s", f"{wall_s:.4f}"),
            ("speedup_x", f"{speedup:.1f}"),
            ("stream_us_per_sample", f"{stream_us_per_sample:.3f}"),
            ("update_mean_ms", f"{samples_us.mean() / 1e3:.4f}"),
            ("update_p50_ms", f"{p50 / 1e3:.4f}"),
            ("update_p95_ms", f"{p95 / 1e3:.4f}"),
            ("update_max_ms", f"{samples_us.max() / 1e3:.4f}"),
            ("updates_timed", str(starts.size)),
            ("budget_ms", f"{budget_ms:g}"),
            ("update_p95_within_budget", str(bool(p95 / 1e3 < budget_ms))),
            ("realtime_100x", str(bool(speedup >= 100.0))),
        ]
        out_dir = _out_dir(out)
        bench_path = out_dir / "bench.csv"
        with open(bench_path, "w") as fh:
            fh.write("metric,value\n")
            for name, value in rows:
                fh.write(f"{name},{value}\n")
        _write_manifest(
            out_dir,
            "bench",
            [bench_path],
            cfg=cfg_run,
            seed=seed,
            args={"duration_s": duration_s},
        )
        click.echo(
            f"{duration_s:g} s stream in {wall_s:.2f} s wall "
            f"({speedup:.0f}x real time); single update p95 "
            f"{p95 / 1e3:.3f} ms vs {budget_ms} ms budget"
        )

    _run(body)


if __name__ == "__main__":
    main()
