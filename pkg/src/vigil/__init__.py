"""Streaming single-channel EEG drowsiness detection.

Three alarm levels from one electrode: lengthening eye blinks (early
warning), short alpha bursts (alert), and sustained alpha meaning the
eyes have closed (alarm). Includes a labeled synthetic-signal generator
so every detector can be verified without recorded data.
"""

from .alarm import AlarmConfig, AlarmState, AlarmTransition, evaluate, run_timeline
from .alpha import AlphaBaseline, AlphaConfig, AlphaEvent, calibrate_baseline, detect_alpha_events
from .blink import BlinkConfig, BlinkEvent, BlinkStatistics, blink_statistics, detect_blinks
from .config import AnalysisConfig, ConfigError, load_config, parse_config, save_config
from .dsp import (
    BandPowerFrame,
    FirFilter,
    Spectrum,
    apply_fir,
    band_power,
    compute_band_power_frames,
    decimate,
    design_fir,
    welch_psd,
)
from .pipeline import AnalysisResult, StreamingAnalyzer, analyze_stream
from .scoring import ScoreReport, score_run
from .signal_io import SampleStream, frame_stream, read_csv, write_csv
from .synth import GroundTruthLabels, SyntheticScenario, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AlarmConfig", "AlarmState", "AlarmTransition", "evaluate", "run_timeline",
    "AlphaBaseline", "AlphaConfig", "AlphaEvent", "calibrate_baseline", "detect_alpha_events",
    "BlinkConfig", "BlinkEvent", "BlinkStatistics", "blink_statistics", "detect_blinks",
    "AnalysisConfig", "ConfigError", "load_config", "parse_config", "save_config",
    "BandPowerFrame", "FirFilter", "Spectrum", "apply_fir", "band_power",
    "compute_band_power_frames", "decimate", "design_fir", "welch_psd",
    "AnalysisResult", "StreamingAnalyzer", "analyze_stream",
    "ScoreReport", "score_run",
    "SampleStream", "frame_stream", "read_csv", "write_csv",
    "GroundTruthLabels", "SyntheticScenario", "generate_synthetic",
]
