"""Session configuration: one JSON document covering the estimator,
scheduler, latency model, stimulus, and simulation blocks.

Unknown keys are rejected everywhere so a typo cannot silently fall
back to a default.
"""

import json
from dataclasses import dataclass

from .dsp import BandpassSpec
from .loop import (
    Condition,
    EchtConfig,
    LatencyModel,
    SchedulerConfig,
    StimulusSpec,
    CONDITION_TARGETS,
)
from .simulate import ErpTemplate, OscillatorSpec, SynthSpec


@dataclass(frozen=True)
class SessionConfig:
    """Everything a reproducible run needs."""

    echt: EchtConfig
    scheduler: SchedulerConfig
    latency: LatencyModel
    simulation: SynthSpec
    iaf_hz: float = 10.0
    p1_latency_s: float = 0.0624

    def __post_init__(self):
        if self.iaf_hz <= 0:
            raise ValueError(f"iaf_hz must be positive, got {self.iaf_hz}")
        if self.p1_latency_s < 0:
            raise ValueError(f"p1_latency_s must be >= 0, got {self.p1_latency_s}")


def default_session_config() -> SessionConfig:
    """Defaults for the demo pipeline: 2 minutes of 10 Hz alpha at 250 Hz."""
    fs = 250.0
    return SessionConfig(
        echt=EchtConfig(
            band=BandpassSpec(
                center_hz=10.0, half_bandwidth_hz=2.0, order=2, sample_rate=fs
            ),
            window_samples=250,
            preprocess=True,
        ),
        scheduler=SchedulerConfig.for_condition(
            Condition.PEAK_LOCKED, session_duration_s=120.0
        ),
        latency=LatencyModel(),
        simulation=SynthSpec(duration_s=120.0, sample_rate=fs),
    )


def _take(data, allowed, where):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ValueError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return data


def _build_echt(data):
    _take(
        data,
        {
            "center_hz",
            "half_bandwidth_hz",
            "order",
            "sample_rate_hz",
            "window_samples",
            "preprocess",
        },
        "echt",
    )
    band = BandpassSpec(
        center_hz=float(data.get("center_hz", 10.0)),
        half_bandwidth_hz=float(data.get("half_bandwidth_hz", 2.0)),
        order=int(data.get("order", 2)),
        sample_rate=float(data.get("sample_rate_hz", 250.0)),
    )
    return EchtConfig(
        band=band,
        window_samples=int(data.get("window_samples", 250)),
        preprocess=bool(data.get("preprocess", True)),
    )


def _build_stimulus(data):
    _take(
        data,
        {
            "pulse_duration_s",
            "pulse_level_db_spl",
            "background_level_db_spl",
            "snr_db",
        },
        "stimulus",
    )
    defaults = StimulusSpec()
    return StimulusSpec(
        pulse_duration_s=float(data.get("pulse_duration_s", defaults.pulse_duration_s)),
        pulse_level_db_spl=float(
            data.get("pulse_level_db_spl", defaults.pulse_level_db_spl)
        ),
        background_level_db_spl=float(
            data.get("background_level_db_spl", defaults.background_level_db_spl)
        ),
        snr_db=float(data.get("snr_db", defaults.snr_db)),
    )


def _build_scheduler(data, stimulus):
    _take(
        data,
        {
            "condition",
            "onset_phase_deg",
            "offset_phase_deg",
            "session_duration_s",
            "min_inter_onset_s",
        },
        "scheduler",
    )
    try:
        condition = Condition(data.get("condition", "PeakLocked"))
    except ValueError:
        raise ValueError(
            f"unknown condition {data.get('condition')!r}; expected one of "
            f"{[c.value for c in Condition]}"
        ) from None
    default_onset, default_offset = CONDITION_TARGETS.get(
        condition, CONDITION_TARGETS[Condition.PEAK_LOCKED]
    )
    return SchedulerConfig(
        condition=condition,
        onset_phase_deg=float(data.get("onset_phase_deg", default_onset)),
        offset_phase_deg=float(data.get("offset_phase_deg", default_offset)),
        session_duration_s=float(data.get("session_duration_s", 1800.0)),
        min_inter_onset_s=float(data.get("min_inter_onset_s", 0.0)),
        stimulus=stimulus,
    )


def _build_latency(data):
    _take(data, {"pipeline_delay_s", "extra_output_delay_s"}, "latency")
    return LatencyModel(
        pipeline_delay_s=float(data.get("pipeline_delay_s", 0.0014)),
        extra_output_delay_s=float(data.get("extra_output_delay_s", 0.0)),
    )


def _build_oscillator(data):
    _take(
        data,
        {
            "base_freq_hz",
            "amplitude_uv",
            "am_depth",
            "am_rate_hz",
            "freq_jitter_hz",
            "seed",
        },
        "simulation.oscillator",
    )
    defaults = OscillatorSpec()
    return OscillatorSpec(
        base_freq_hz=float(data.get("base_freq_hz", defaults.base_freq_hz)),
        amplitude_uv=float(data.get("amplitude_uv", defaults.amplitude_uv)),
        am_depth=float(data.get("am_depth", defaults.am_depth)),
        am_rate_hz=float(data.get("am_rate_hz", defaults.am_rate_hz)),
        freq_jitter_hz=float(data.get("freq_jitter_hz", defaults.freq_jitter_hz)),
        seed=int(data.get("seed", defaults.seed)),
    )


def _build_erp(data):
    if data is None:
        return None
    _take(
        data,
        {
            "p1_latency_s",
            "p1_amplitude_uv",
            "p1_width_s",
            "post_stim_alpha_gain_peak",
            "post_stim_alpha_gain_trough",
            "gain_horizon_s",
        },
        "simulation.erp",
    )
    defaults = ErpTemplate()
    return ErpTemplate(
        p1_latency_s=float(data.get("p1_latency_s", defaults.p1_latency_s)),
        p1_amplitude_uv=float(data.get("p1_amplitude_uv", defaults.p1_amplitude_uv)),
        p1_width_s=float(data.get("p1_width_s", defaults.p1_width_s)),
        post_stim_alpha_gain_peak=float(
            data.get("post_stim_alpha_gain_peak", defaults.post_stim_alpha_gain_peak)
        ),
        post_stim_alpha_gain_trough=float(
            data.get(
                "post_stim_alpha_gain_trough", defaults.post_stim_alpha_gain_trough
            )
        ),
        gain_horizon_s=float(data.get("gain_horizon_s", defaults.gain_horizon_s)),
    )


def _build_simulation(data):
    _take(
        data,
        {
            "duration_s",
            "sample_rate",
            "oscillator",
            "noise_level_uv",
            "snr_alpha_db",
            "side_osc_gain",
            "noise_seed",
            "blink_times",
            "blink_peak_uv",
            "erp_times",
            "erp",
        },
        "simulation",
    )
    defaults = SynthSpec()
    snr = data.get("snr_alpha_db", None)
    return SynthSpec(
        duration_s=float(data.get("duration_s", defaults.duration_s)),
        sample_rate=float(data.get("sample_rate", defaults.sample_rate)),
        oscillator=_build_oscillator(data.get("oscillator", {})),
        noise_level_uv=float(data.get("noise_level_uv", defaults.noise_level_uv)),
        snr_alpha_db=None if snr is None else float(snr),
        side_osc_gain=float(data.get("side_osc_gain", defaults.side_osc_gain)),
        noise_seed=int(data.get("noise_seed", defaults.noise_seed)),
        blink_times=tuple(float(t) for t in data.get("blink_times", ())),
        blink_peak_uv=float(data.get("blink_peak_uv", defaults.blink_peak_uv)),
        erp_times=tuple(float(t) for t in data.get("erp_times", ())),
        erp=_build_erp(data.get("erp", None)),
    )


def parse_session_config(data) -> SessionConfig:
    """Build a validated SessionConfig from a parsed JSON document."""
    if not isinstance(data, dict):
        raise ValueError("config document must be a JSON object")
    _take(
        data,
        {"echt", "scheduler", "stimulus", "latency", "simulation", "iaf_hz", "p1_latency_s"},
        "config",
    )
    stimulus = _build_stimulus(data.get("stimulus", {}))
    return SessionConfig(
        echt=_build_echt(data.get("echt", {})),
        scheduler=_build_scheduler(data.get("scheduler", {}), stimulus),
        latency=_build_latency(data.get("latency", {})),
        simulation=_build_simulation(data.get("simulation", {})),
        iaf_hz=float(data.get("iaf_hz", 10.0)),
        p1_latency_s=float(data.get("p1_latency_s", 0.0624)),
    )


def load_config(path) -> SessionConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from None
    try:
        return parse_session_config(data)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def config_to_dict(cfg: SessionConfig) -> dict:
    """Fully resolved document; parse_session_config inverts this."""
    sim = cfg.simulation
    osc = sim.oscillator
    erp = None
    if sim.erp is not None:
        erp = {
            "p1_latency_s": sim.erp.p1_latency_s,
            "p1_amplitude_uv": sim.erp.p1_amplitude_uv,
            "p1_width_s": sim.erp.p1_width_s,
            "post_stim_alpha_gain_peak": sim.erp.post_stim_alpha_gain_peak,
            "post_stim_alpha_gain_trough": sim.erp.post_stim_alpha_gain_trough,
            "gain_horizon_s": sim.erp.gain_horizon_s,
        }
    return {
        "echt": {
            "center_hz": cfg.echt.band.center_hz,
            "half_bandwidth_hz": cfg.echt.band.half_bandwidth_hz,
            "order": cfg.echt.band.order,
            "sample_rate_hz": cfg.echt.band.sample_rate,
            "window_samples": cfg.echt.window_samples,
            "preprocess": cfg.echt.preprocess,
        },
        "scheduler": {
            "condition": cfg.scheduler.condition.value,
            "onset_phase_deg": cfg.scheduler.onset_phase_deg,
            "offset_phase_deg": cfg.scheduler.offset_phase_deg,
            "session_duration_s": cfg.scheduler.session_duration_s,
            "min_inter_onset_s": cfg.scheduler.min_inter_onset_s,
        },
        "stimulus": {
            "pulse_duration_s": cfg.scheduler.stimulus.pulse_duration_s,
            "pulse_level_db_spl": cfg.scheduler.stimulus.pulse_level_db_spl,
            "background_level_db_spl": cfg.scheduler.stimulus.background_level_db_spl,
            "snr_db": cfg.scheduler.stimulus.snr_db,
        },
        "latency": {
            "pipeline_delay_s": cfg.latency.pipeline_delay_s,
            "extra_output_delay_s": cfg.latency.extra_output_delay_s,
        },
        "simulation": {
            "duration_s": sim.duration_s,
            "sample_rate": sim.sample_rate,
            "oscillator": {
                "base_freq_hz": osc.base_freq_hz,
                "amplitude_uv": osc.amplitude_uv,
                "am_depth": osc.am_depth,
                "am_rate_hz": osc.am_rate_hz,
                "freq_jitter_hz": osc.freq_jitter_hz,
                "seed": osc.seed,
            },
            "noise_level_uv": sim.noise_level_uv,
            "snr_alpha_db": sim.snr_alpha_db,
            "side_osc_gain": sim.side_osc_gain,
            "noise_seed": sim.noise_seed,
            "blink_times": list(sim.blink_times),
            "blink_peak_uv": sim.blink_peak_uv,
            "erp_times": list(sim.erp_times),
            "erp": erp,
        },
        "iaf_hz": cfg.iaf_hz,
        "p1_latency_s": cfg.p1_latency_s,
    }


def save_config(path, cfg: SessionConfig):
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
