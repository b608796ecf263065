"""Real-time alpha-phase tracking and phase-locked auditory stimulation.

The package bundles a causal endpoint phase estimator, a synthetic EEG
generator with per-sample ground truth, a closed-loop stimulation
scheduler with latency compensation, the evaluation pipeline (circular
statistics, alpha-peak estimation, evoked-response averaging, sleep-
onset latency, ANOVA/Tukey), versioned text formats, and a CLI.
"""

__version__ = "0.1.0"

from .circular import (
    CircularStats,
    angular_deviation_to_plv,
    circ_diff,
    circ_distance,
    circ_median,
    circ_stats,
    plv_to_angular_deviation,
    wrap360,
)
from .dsp import (
    BandpassSpec,
    FilterCoefficients,
    PhaseEstimate,
    RealWindow,
    StreamingFilter,
    design_bandpass,
    echt,
    echt_stream,
    endpoint_kernel,
    filter_stream,
    filter_zero_phase,
    frequency_response,
    hilbert_offline,
)
from .recording import (
    DEFAULT_CHANNEL_LABELS,
    SENSE_CHANNEL,
    EegRecording,
    GroundTruthPhase,
)
from .simulate import (
    ErpTemplate,
    OscillatorSpec,
    SimTrace,
    SynthSpec,
    band_power,
    gen_alpha_trace,
    gen_pink_noise,
    inject_blinks,
    inject_erp,
    synth_recording,
)
from .loop import (
    ChannelQualityState,
    Condition,
    EchtConfig,
    EventKind,
    LatencyModel,
    SchedulerConfig,
    SignalStrength,
    StimEvent,
    StimEventLog,
    StimulusSpec,
    blink_test,
    classify_signal_strength,
    compute_window_rms,
    phase_advance,
    run_closed_loop,
    select_channel,
    stim_onset_phase,
)
from .analysis import (
    ErpAverage,
    ErpConfig,
    Hypnogram,
    IafResult,
    NoN2Error,
    NoPeakError,
    NoPositivePeakError,
    PhaseAccuracyEntry,
    PhaseAccuracyReport,
    SpectrogramConfig,
    Stage,
    detect_p1,
    epoch_erp,
    estimate_iaf,
    multitaper_spectrogram,
    phase_accuracy,
    sol_n2,
)
from .stats import (
    AnovaResult,
    TukeyPair,
    aggregate_subject_means,
    one_way_anova,
    tukey_hsd,
)
from .fileio import (
    ParseError,
    read_event_log,
    read_hypnogram,
    read_phase_log,
    read_recording,
    write_event_log,
    write_hypnogram,
    write_phase_log,
    write_recording,
)
from .config import (
    SessionConfig,
    config_to_dict,
    default_session_config,
    load_config,
    parse_session_config,
    save_config,
)

__all__ = [
    "__version__",
    # circular statistics
    "CircularStats",
    "angular_deviation_to_plv",
    "circ_diff",
    "circ_distance",
    "circ_median",
    "circ_stats",
    "plv_to_angular_deviation",
    "wrap360",
    # estimator and filters
    "BandpassSpec",
    "FilterCoefficients",
    "PhaseEstimate",
    "RealWindow",
    "StreamingFilter",
    "design_bandpass",
    "echt",
    "echt_stream",
    "endpoint_kernel",
    "filter_stream",
    "filter_zero_phase",
    "frequency_response",
    "hilbert_offline",
    # recordings
    "DEFAULT_CHANNEL_LABELS",
    "SENSE_CHANNEL",
    "EegRecording",
    "GroundTruthPhase",
    # simulator
    "ErpTemplate",
    "OscillatorSpec",
    "SimTrace",
    "SynthSpec",
    "band_power",
    "gen_alpha_trace",
    "gen_pink_noise",
    "inject_blinks",
    "inject_erp",
    "synth_recording",
    # session engine
    "ChannelQualityState",
    "Condition",
    "EchtConfig",
    "EventKind",
    "LatencyModel",
    "SchedulerConfig",
    "SignalStrength",
    "StimEvent",
    "StimEventLog",
    "StimulusSpec",
    "blink_test",
    "classify_signal_strength",
    "compute_window_rms",
    "phase_advance",
    "run_closed_loop",
    "select_channel",
    "stim_onset_phase",
    # analysis
    "ErpAverage",
    "ErpConfig",
    "Hypnogram",
    "IafResult",
    "NoN2Error",
    "NoPeakError",
    "NoPositivePeakError",
    "PhaseAccuracyEntry",
    "PhaseAccuracyReport",
    "SpectrogramConfig",
    "Stage",
    "detect_p1",
    "epoch_erp",
    "estimate_iaf",
    "multitaper_spectrogram",
    "phase_accuracy",
    "sol_n2",
    # statistics
    "AnovaResult",
    "TukeyPair",
    "aggregate_subject_means",
    "one_way_anova",
    "tukey_hsd",
    # file formats
    "ParseError",
    "read_event_log",
    "read_hypnogram",
    "read_phase_log",
    "read_recording",
    "write_event_log",
    "write_hypnogram",
    "write_phase_log",
    "write_recording",
    # configuration
    "SessionConfig",
    "config_to_dict",
    "default_session_config",
    "load_config",
    "parse_session_config",
    "save_config",
]
