"""Labeled synthetic EEG scenarios for detector verification.

Every generated stream comes with ground-truth labels recording exactly
the injected events, so detector output can be scored without human
recordings. Blink durations are labeled in the same metric the detector
reports: the width of the bump at half of its peak. A spec'd blink of
duration d therefore occupies [onset - d/2, onset + 1.5 d] in the signal,
with its half-amplitude interval at [onset, onset + d].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import alarm as alarm_mod
from .alarm import AlarmConfig
from .alpha import AlphaConfig, AlphaEvent
from .blink import BlinkEvent, blink_statistics
from .signal_io import SampleStream

ARTIFACT_BUMP_S = 0.12          # fixed width of injected out-of-range spikes
ALPHA_RAMP_S = 0.1

# Background shaping: flat 0.5-40 Hz noise with the alpha band scaled by
# ALPHA_EMPHASIS_POWER. The default analysis chain's 30 Hz lowpass trims the
# upper part of the total band, which inflates measured relative alpha, so a
# slight de-emphasis lands the measured baseline near a realistic resting
# value. BACKGROUND_RELATIVE_ALPHA and PIPELINE_RETAINED_POWER are the
# empirically calibrated baseline median and total-power fraction seen by the
# default pipeline on this background.
ALPHA_EMPHASIS_POWER = 0.8
BACKGROUND_RELATIVE_ALPHA = 0.148
PIPELINE_RETAINED_POWER = 0.69


class ScenarioError(ValueError):
    """Raised when a synthetic scenario violates its invariants."""


@dataclass(frozen=True)
class BlinkSpec:
    onset_s: float
    duration_s: float
    peak_amplitude_uv: float


@dataclass(frozen=True)
class AlphaSpec:
    onset_s: float
    duration_s: float
    amplitude_uv: float
    frequency_hz: float


@dataclass(frozen=True)
class ArtifactSpec:
    onset_s: float
    amplitude_uv: float


@dataclass(frozen=True)
class SyntheticScenario:
    duration_s: float
    sample_rate: float = 500.0
    background_noise_uv_rms: float = 10.0
    blink_specs: tuple[BlinkSpec, ...] = ()
    alpha_specs: tuple[AlphaSpec, ...] = ()
    artifact_specs: tuple[ArtifactSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "blink_specs", tuple(self.blink_specs))
        object.__setattr__(self, "alpha_specs", tuple(self.alpha_specs))
        object.__setattr__(self, "artifact_specs", tuple(self.artifact_specs))

    def validate(self) -> None:
        if self.duration_s <= 0 or self.sample_rate <= 0:
            raise ScenarioError("duration_s and sample_rate must be positive")
        if self.background_noise_uv_rms < 0:
            raise ScenarioError("background_noise_uv_rms must be non-negative")
        for i, b in enumerate(self.blink_specs):
            if not 0.05 <= b.duration_s <= 1.0:
                raise ScenarioError(f"blink_specs[{i}]: duration {b.duration_s} outside [0.05, 1.0] s")
            if b.peak_amplitude_uv <= 0:
                raise ScenarioError(f"blink_specs[{i}]: peak must be positive")
            if b.onset_s - b.duration_s / 2 < 0 or b.onset_s + 1.5 * b.duration_s > self.duration_s:
                raise ScenarioError(
                    f"blink_specs[{i}]: bump at {b.onset_s} s (duration {b.duration_s}) "
                    "extends outside the scenario"
                )
        for prev, nxt in zip(self.blink_specs, self.blink_specs[1:]):
            if nxt.onset_s - nxt.duration_s / 2 < prev.onset_s + 1.5 * prev.duration_s + 0.1:
                raise ScenarioError("blink bumps must be separated by at least the 0.1 s merge gap")
        for i, a in enumerate(self.alpha_specs):
            if not 8.0 <= a.frequency_hz <= 13.0:
                raise ScenarioError(f"alpha_specs[{i}]: frequency {a.frequency_hz} outside [8, 13] Hz")
            if a.duration_s <= 0 or a.amplitude_uv <= 0:
                raise ScenarioError(f"alpha_specs[{i}]: duration and amplitude must be positive")
            if a.onset_s < 0 or a.onset_s + a.duration_s > self.duration_s:
                raise ScenarioError(f"alpha_specs[{i}]: segment extends outside the scenario")
        for prev, nxt in zip(self.alpha_specs, self.alpha_specs[1:]):
            if nxt.onset_s < prev.onset_s + prev.duration_s:
                raise ScenarioError("alpha segments must not overlap")
        for i, s in enumerate(self.artifact_specs):
            if s.onset_s < 0 or s.onset_s + ARTIFACT_BUMP_S > self.duration_s:
                raise ScenarioError(f"artifact_specs[{i}]: spike extends outside the scenario")
            if s.amplitude_uv == 0:
                raise ScenarioError(f"artifact_specs[{i}]: amplitude must be non-zero")

    def to_dict(self) -> dict:
        return {
            "duration_s": self.duration_s,
            "sample_rate": self.sample_rate,
            "background_noise_uv_rms": self.background_noise_uv_rms,
            "blink_specs": [[b.onset_s, b.duration_s, b.peak_amplitude_uv] for b in self.blink_specs],
            "alpha_specs": [
                [a.onset_s, a.duration_s, a.amplitude_uv, a.frequency_hz] for a in self.alpha_specs
            ],
            "artifact_specs": [[s.onset_s, s.amplitude_uv] for s in self.artifact_specs],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticScenario":
        try:
            scenario = cls(
                duration_s=float(data["duration_s"]),
                sample_rate=float(data.get("sample_rate", 500.0)),
                background_noise_uv_rms=float(data.get("background_noise_uv_rms", 10.0)),
                blink_specs=tuple(BlinkSpec(*map(float, b)) for b in data.get("blink_specs", [])),
                alpha_specs=tuple(AlphaSpec(*map(float, a)) for a in data.get("alpha_specs", [])),
                artifact_specs=tuple(ArtifactSpec(*map(float, s)) for s in data.get("artifact_specs", [])),
                seed=int(data.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad scenario field: {exc}") from None
        scenario.validate()
        return scenario


@dataclass(frozen=True)
class GroundTruthLabels:
    """Exactly the injected events, plus the alarm levels they should imply."""

    blink_events: tuple[tuple[float, float], ...]
    alpha_burst_events: tuple[tuple[float, float], ...]
    sustained_alpha_events: tuple[tuple[float, float], ...]
    expected_alarm_timeline: tuple[tuple[float, int], ...]

    def to_dict(self) -> dict:
        return {
            "blink_events": [list(e) for e in self.blink_events],
            "alpha_burst_events": [list(e) for e in self.alpha_burst_events],
            "sustained_alpha_events": [list(e) for e in self.sustained_alpha_events],
            "expected_alarm_timeline": [[t, level] for t, level in self.expected_alarm_timeline],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruthLabels":
        return cls(
            blink_events=tuple((float(a), float(b)) for a, b in data["blink_events"]),
            alpha_burst_events=tuple((float(a), float(b)) for a, b in data["alpha_burst_events"]),
            sustained_alpha_events=tuple((float(a), float(b)) for a, b in data["sustained_alpha_events"]),
            expected_alarm_timeline=tuple(
                (float(t), int(level)) for t, level in data["expected_alarm_timeline"]
            ),
        )


def _shaped_background(n: int, rate: float, rms: float, rng: np.random.Generator) -> np.ndarray:
    if rms == 0.0 or n == 0:
        return np.zeros(n)
    white = rng.standard_normal(n)
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    gain = np.where((freqs >= 0.5) & (freqs < 40.0), 1.0, 0.0)
    gain = np.where((freqs >= 8.0) & (freqs < 13.0), math.sqrt(ALPHA_EMPHASIS_POWER), gain)
    shaped = np.fft.irfft(np.fft.rfft(white) * gain, n=n)
    scale = rms / math.sqrt(float(np.mean(shaped**2)))
    return shaped * scale


def _raised_cosine_bump(t: np.ndarray, center: float, half_width: float) -> np.ndarray:
    x = (t - center) / half_width
    return np.where(np.abs(x) <= 1.0, 0.5 * (1.0 + np.cos(np.pi * np.clip(x, -1.0, 1.0))), 0.0)


def _alpha_envelope(t: np.ndarray, onset: float, duration: float) -> np.ndarray:
    rel = t - onset
    inside = (rel >= 0.0) & (rel <= duration)
    up = np.clip(rel / ALPHA_RAMP_S, 0.0, 1.0)
    down = np.clip((duration - rel) / ALPHA_RAMP_S, 0.0, 1.0)
    ramp = 0.5 * (1.0 - np.cos(np.pi * np.minimum(up, down)))
    return np.where(inside, ramp, 0.0)


def generate_synthetic(
    scenario: SyntheticScenario,
    timeline_config: Optional[AlarmConfig] = None,
    alpha_config: Optional[AlphaConfig] = None,
    timeline_hop_s: float = 0.5,
) -> tuple[SampleStream, GroundTruthLabels]:
    """Render a scenario to samples plus its ground-truth labels.

    The same scenario (including seed) always yields bit-identical output.
    The expected alarm timeline is computed from the injected events with
    the default alarm rules unless other configs are passed.
    """
    scenario.validate()
    rate = scenario.sample_rate
    n = int(round(scenario.duration_s * rate))
    rng = np.random.default_rng(scenario.seed)
    t = np.arange(n) / rate

    samples = _shaped_background(n, rate, scenario.background_noise_uv_rms, rng)
    for b in scenario.blink_specs:
        center = b.onset_s + b.duration_s / 2.0
        samples += b.peak_amplitude_uv * _raised_cosine_bump(t, center, b.duration_s)
    for a in scenario.alpha_specs:
        carrier = np.sin(2.0 * np.pi * a.frequency_hz * (t - a.onset_s))
        samples += a.amplitude_uv * _alpha_envelope(t, a.onset_s, a.duration_s) * carrier
    for s in scenario.artifact_specs:
        center = s.onset_s + ARTIFACT_BUMP_S / 2.0
        samples += s.amplitude_uv * _raised_cosine_bump(t, center, ARTIFACT_BUMP_S / 2.0)

    alpha_config = alpha_config or AlphaConfig()
    bursts = tuple(
        (a.onset_s, a.duration_s)
        for a in scenario.alpha_specs
        if a.duration_s < alpha_config.sustained_min_s
    )
    sustained = tuple(
        (a.onset_s, a.duration_s)
        for a in scenario.alpha_specs
        if a.duration_s >= alpha_config.sustained_min_s
    )
    blink_truth = tuple((b.onset_s, b.duration_s) for b in scenario.blink_specs)
    timeline = expected_alarm_timeline(
        blink_truth,
        bursts,
        sustained,
        scenario.duration_s,
        timeline_config or AlarmConfig(),
        alpha_config,
        hop_s=timeline_hop_s,
    )
    labels = GroundTruthLabels(
        blink_events=blink_truth,
        alpha_burst_events=bursts,
        sustained_alpha_events=sustained,
        expected_alarm_timeline=timeline,
    )
    return SampleStream(sample_rate=rate, samples=samples), labels


def expected_alarm_timeline(
    blink_events: Sequence[tuple[float, float]],
    burst_events: Sequence[tuple[float, float]],
    sustained_events: Sequence[tuple[float, float]],
    duration_s: float,
    alarm_config: AlarmConfig,
    alpha_config: AlphaConfig,
    hop_s: float = 0.5,
) -> tuple[tuple[float, int], ...]:
    """Fold the alarm rules over the injected events at each hop.

    Event visibility is causal, mirroring a live detector: a burst counts
    once it has ended, a sustained run once it has lasted sustained_min_s,
    and blink statistics cover the trailing evaluation window. Levels are
    re-derived with the same evaluate() rule the engine uses, so the
    expected timeline differs from a detector run only by detection
    timing, never by alarm semantics.
    """
    blinks = [BlinkEvent(onset_s=o, duration_s=d, peak_amplitude_uv=1.0) for o, d in blink_events]
    calib = [b for b in blinks if b.onset_s < alpha_config.calibration_s]
    baseline_mean = (
        sum(b.duration_s for b in calib) / len(calib)
        if len(calib) >= alarm_config.min_blinks_for_eval
        else None
    )
    state = alarm_mod.AlarmState()
    timeline: list[tuple[float, int]] = []
    n_hops = int(math.floor(duration_s / hop_s + 1e-9))
    for k in range(n_hops + 1):
        t_eval = k * hop_s
        visible: list[AlphaEvent] = [
            AlphaEvent(kind="burst", onset_s=o, duration_s=d, mean_relative_alpha=1.0)
            for o, d in burst_events
            if o + d <= t_eval
        ]
        visible += [
            AlphaEvent(kind="sustained", onset_s=o, duration_s=d, mean_relative_alpha=1.0)
            for o, d in sustained_events
            if t_eval >= o + alpha_config.sustained_min_s
        ]
        stats = blink_statistics(
            blinks, t_eval - alarm_config.blink_eval_window_s, alarm_config.blink_eval_window_s
        )
        state, _ = alarm_mod.evaluate(t_eval, stats, visible, state, alarm_config, baseline_mean)
        timeline.append((t_eval, state.current_level))
    return tuple(timeline)


def alpha_amplitude_for_relative(multiple: float, background_rms: float) -> float:
    """Sinusoid amplitude whose in-burst relative alpha is multiple x baseline.

    Uses the calibrated background constants above: with baseline relative
    alpha r0 and retained noise power T, an added alpha power P yields
    relative alpha (P + r0*T) / (P + T); solve for P at the requested
    multiple and convert to amplitude via P = A^2 / 2.
    """
    r0 = BACKGROUND_RELATIVE_ALPHA
    target = multiple * r0
    if not r0 < target < 1.0:
        raise ValueError(f"relative-alpha multiple {multiple} out of range")
    noise_total = background_rms**2 * PIPELINE_RETAINED_POWER
    p = noise_total * (target - r0) / (1.0 - target)
    return math.sqrt(2.0 * p)
