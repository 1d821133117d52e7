"""Alpha-burst and sustained-alpha detection over band-power frames.

A frame counts as alpha-active when its relative alpha power clears both
a baseline-relative threshold and an absolute floor; maximal runs of
consecutive active frames become events. Runs short enough to be "small
bursts" and runs long enough to mean eyes-closed are reported; runs in
between are discarded. Artifact frames are never active and always break
a run, since blink artifacts leak power into every band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import median
from typing import Iterable, Optional, Sequence

from .dsp import BandPowerFrame


class CalibrationError(ValueError):
    """Raised when too few clean frames are available for a baseline."""


@dataclass(frozen=True)
class AlphaConfig:
    ratio_multiplier: float = 2.0
    absolute_floor: float = 0.35
    min_burst_s: float = 0.5
    max_burst_s: float = 3.0
    sustained_min_s: float = 5.0
    calibration_s: float = 20.0
    min_calibration_frames: int = 4

    def validate(self) -> None:
        if self.ratio_multiplier <= 0 or not 0 < self.absolute_floor < 1:
            raise ValueError("alpha thresholds must be positive (floor in (0, 1))")
        if not 0 < self.min_burst_s <= self.max_burst_s < self.sustained_min_s:
            raise ValueError("need 0 < min_burst_s <= max_burst_s < sustained_min_s")
        if self.calibration_s <= 0 or self.min_calibration_frames < 1:
            raise ValueError("alpha calibration parameters must be positive")

    def threshold(self, baseline: "AlphaBaseline") -> float:
        return max(self.ratio_multiplier * baseline.baseline_relative_alpha, self.absolute_floor)


@dataclass(frozen=True)
class AlphaBaseline:
    baseline_relative_alpha: float
    calibration_duration_s: float
    frames_used: int


@dataclass(frozen=True)
class AlphaEvent:
    kind: str  # "burst" | "sustained"
    onset_s: float
    duration_s: float
    mean_relative_alpha: float

    def to_record(self) -> dict:
        return {
            "type": "alpha",
            "kind": self.kind,
            "onset_s": self.onset_s,
            "duration_s": self.duration_s,
            "mean_relative_alpha": self.mean_relative_alpha,
        }


def calibrate_baseline(
    frames: Sequence[BandPowerFrame],
    duration_s: float,
    min_frames: int = 4,
) -> AlphaBaseline:
    """Median relative alpha over the clean frames of the calibration span.

    Only frames whose window lies entirely within the first duration_s
    are used; artifact frames are skipped. Fewer than min_frames clean
    frames means calibration must be repeated with more data.
    """
    if not frames:
        raise CalibrationError("insufficient calibration data: no frames")
    first = frames[0].window_start_s
    clean = [
        f.relative_alpha
        for f in frames
        if not f.artifact and f.window_start_s + f.window_len_s <= first + duration_s + 1e-9
    ]
    if len(clean) < min_frames:
        raise CalibrationError(
            f"insufficient calibration data: {len(clean)} clean frames, need {min_frames}"
        )
    return AlphaBaseline(
        baseline_relative_alpha=float(median(clean)),
        calibration_duration_s=duration_s,
        frames_used=len(clean),
    )


def _run_bounds(config: AlphaConfig, window_s: float, hop_s: float) -> tuple[int, int, int]:
    """Frame-count bounds (burst_min, burst_max, sustained_min) for run classification.

    A run of k frames spans (k-1)*hop + window seconds; classifying on
    frame counts avoids float dust from accumulated window timestamps.
    """
    def k_at_least(duration: float) -> int:
        return max(1, int(math.ceil((duration - window_s) / hop_s - 1e-9)) + 1)

    def k_at_most(duration: float) -> int:
        return int(math.floor((duration - window_s) / hop_s + 1e-9)) + 1

    return k_at_least(config.min_burst_s), k_at_most(config.max_burst_s), k_at_least(config.sustained_min_s)


class AlphaRunTracker:
    """Incremental run-folding of alpha-active frames into events.

    Feed frames in time order; closed events come back tagged with the
    index of the frame that closed them. An open run that has already
    reached the sustained minimum is reportable before it closes via
    provisional_sustained(), which is what lets the alarm engine raise
    level 3 while the eyes are still closed.
    """

    def __init__(self, baseline: AlphaBaseline, config: AlphaConfig, window_s: float, hop_s: float):
        self.config = config
        self.threshold = config.threshold(baseline)
        self.window_s = window_s
        self.hop_s = hop_s
        self._k_burst_min, self._k_burst_max, self._k_sustained = _run_bounds(config, window_s, hop_s)
        self._run_start_s: Optional[float] = None
        self._run_rels: list[float] = []
        self._frame_count = 0

    def is_active(self, frame: BandPowerFrame) -> bool:
        return (not frame.artifact) and frame.relative_alpha > self.threshold

    def _close_run(self) -> Optional[AlphaEvent]:
        k = len(self._run_rels)
        start = self._run_start_s
        rels = self._run_rels
        self._run_start_s = None
        self._run_rels = []
        if k == 0:
            return None
        duration = (k - 1) * self.hop_s + self.window_s
        if k >= self._k_sustained:
            kind = "sustained"
        elif self._k_burst_min <= k <= self._k_burst_max:
            kind = "burst"
        else:
            return None
        return AlphaEvent(
            kind=kind,
            onset_s=start,
            duration_s=duration,
            mean_relative_alpha=sum(rels) / k,
        )

    def feed(self, frame: BandPowerFrame) -> Optional[tuple[AlphaEvent, int]]:
        """Consume one frame; return (closed event, closing frame index) if any."""
        idx = self._frame_count
        self._frame_count += 1
        if self.is_active(frame):
            if self._run_start_s is None:
                self._run_start_s = frame.window_start_s
            self._run_rels.append(frame.relative_alpha)
            return None
        event = self._close_run()
        return (event, idx) if event is not None else None

    def finalize(self) -> Optional[tuple[AlphaEvent, int]]:
        """Close a run left open at end of data."""
        event = self._close_run()
        return (event, self._frame_count) if event is not None else None

    def provisional_sustained(self) -> Optional[AlphaEvent]:
        """The open run as a sustained event, once it qualifies as one."""
        k = len(self._run_rels)
        if k < self._k_sustained:
            return None
        return AlphaEvent(
            kind="sustained",
            onset_s=self._run_start_s,
            duration_s=(k - 1) * self.hop_s + self.window_s,
            mean_relative_alpha=sum(self._run_rels) / k,
        )


def _infer_grid(frames: Sequence[BandPowerFrame]) -> tuple[float, float]:
    window_s = frames[0].window_len_s
    hop_s = frames[1].window_start_s - frames[0].window_start_s if len(frames) > 1 else window_s
    return window_s, hop_s


def detect_alpha_events(
    frames: Sequence[BandPowerFrame],
    baseline: AlphaBaseline,
    config: AlphaConfig | None = None,
) -> list[AlphaEvent]:
    """Batch alpha-event detection over a time-sorted frame sequence."""
    config = config or AlphaConfig()
    if not frames:
        return []
    starts = [f.window_start_s for f in frames]
    if any(b < a for a, b in zip(starts, starts[1:])):
        raise ValueError("frames must be sorted by window_start_s")
    window_s, hop_s = _infer_grid(frames)
    tracker = AlphaRunTracker(baseline, config, window_s, hop_s)
    events: list[AlphaEvent] = []
    for frame in frames:
        closed = tracker.feed(frame)
        if closed is not None:
            events.append(closed[0])
    closed = tracker.finalize()
    if closed is not None:
        events.append(closed[0])
    return events
