"""End-to-end streaming analysis engine.

One engine serves both batch and live use: push sample blocks of any
size, get back completed band-power frames, detected events, and alarm
transitions. Every decision is keyed to absolute sample/frame indices,
never to block boundaries, so any chunking of the same signal produces
bit-identical output. Batch analysis is just a single push plus finalize.

Stage chain: 30 Hz lowpass at the input rate, decimate, 0.25 Hz highpass
at the analysis rate. Group delays are compensated in timestamps and the
leading filter transient (samples timestamped before the raw stream
start) is dropped, so analysis output begins at the recording start and
ends one total group delay before the recording end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import alarm as alarm_mod
from .alarm import AlarmState, AlarmTransition
from .alpha import AlphaBaseline, AlphaEvent, AlphaRunTracker, calibrate_baseline
from .blink import BlinkEvent, StreamingBlinkDetector, blink_statistics
from .config import AnalysisConfig
from .dsp import BandPowerFrame, FirState, design_fir, frame_from_window
from .signal_io import SampleStream


class _Decimator:
    def __init__(self, factor: int):
        self.factor = factor
        self._skip = 0

    def process(self, block: np.ndarray) -> np.ndarray:
        if self.factor == 1:
            return block
        out = block[self._skip:: self.factor]
        self._skip = (self._skip - len(block)) % self.factor
        return out


@dataclass
class PipelineDelta:
    """Items emitted by one push/finalize call, in canonical emission order."""

    frames: list[BandPowerFrame] = field(default_factory=list)
    events: list = field(default_factory=list)          # BlinkEvent | AlphaEvent
    transitions: list[AlarmTransition] = field(default_factory=list)


@dataclass
class AnalysisResult:
    frames: list[BandPowerFrame]
    events: list
    transitions: list[AlarmTransition]
    alpha_baseline: Optional[AlphaBaseline]
    blink_baseline_mean_s: Optional[float]
    final_state: AlarmState

    @property
    def blink_events(self) -> list[BlinkEvent]:
        return [e for e in self.events if isinstance(e, BlinkEvent)]

    @property
    def alpha_events(self) -> list[AlphaEvent]:
        return [e for e in self.events if isinstance(e, AlphaEvent)]

    def summary(self) -> dict:
        bursts = sum(1 for e in self.alpha_events if e.kind == "burst")
        sustained = sum(1 for e in self.alpha_events if e.kind == "sustained")
        max_level = max([t.to_level for t in self.transitions], default=0)
        return {
            "blink_count": len(self.blink_events),
            "alpha_burst_count": bursts,
            "alpha_sustained_count": sustained,
            "frame_count": len(self.frames),
            "artifact_frame_count": sum(1 for f in self.frames if f.artifact),
            "transition_count": len(self.transitions),
            "max_level": max_level,
        }


class StreamingAnalyzer:
    """Incremental drowsiness analysis over a single EEG channel."""

    def __init__(self, config: AnalysisConfig | None = None, start_time: float = 0.0):
        self.config = config or AnalysisConfig()
        self.config.validate()
        cfg = self.config
        rate_a = cfg.analysis_rate_hz

        self._lpf = FirState(design_fir("lowpass", cfg.lpf_corner_hz, cfg.lpf_taps, cfg.input_rate_hz))
        self._decim = _Decimator(cfg.decim_factor)
        self._hpf = FirState(design_fir("highpass", cfg.hpf_corner_hz, cfg.hpf_taps, rate_a))
        self.analysis_rate = rate_a

        total_delay = (cfg.lpf_taps - 1) / 2.0 / cfg.input_rate_hz + (cfg.hpf_taps - 1) / 2.0 / rate_a
        self._skip_remaining = int(math.ceil(total_delay * rate_a - 1e-9))
        self.analysis_start_time = start_time - total_delay + self._skip_remaining / rate_a

        self._blink_det = StreamingBlinkDetector(rate_a, self.analysis_start_time, cfg.blink)
        self._pending_blinks: list[tuple[BlinkEvent, int]] = []
        self._released_blinks: list[BlinkEvent] = []

        self._win_n = int(round(cfg.psd_window_s * rate_a))
        self._hop_n = int(round(cfg.psd_hop_s * rate_a))
        self._buf = np.empty(0)
        self._buf_base = 0
        self._count = 0
        self._frames_done = 0

        self.alpha_baseline: Optional[AlphaBaseline] = None
        self.blink_baseline_mean_s: Optional[float] = None
        self._tracker: Optional[AlphaRunTracker] = None
        self._precalib_frames: list[BandPowerFrame] = []
        self._alpha_events: list[AlphaEvent] = []

        self.state = AlarmState()

    # -- stage plumbing ----------------------------------------------------

    def _advance_front_end(self, raw_block: np.ndarray) -> np.ndarray:
        filtered = self._hpf.process(self._decim.process(self._lpf.process(raw_block)))
        if self._skip_remaining:
            drop = min(self._skip_remaining, filtered.size)
            filtered = filtered[drop:]
            self._skip_remaining -= drop
        return filtered

    def _frame_start_s(self, j: int) -> float:
        return self.analysis_start_time + (j * self._hop_n) / self.analysis_rate

    # -- calibration -------------------------------------------------------

    def _try_calibrate(self, delta: PipelineDelta) -> None:
        """Set the alpha/blink baselines once the calibration span has elapsed.

        If the nominal span lacks enough clean frames (artifacts), the span
        keeps extending until it has them, rather than failing the stream.
        """
        cfg = self.config
        frames = self._precalib_frames
        t0 = self.analysis_start_time
        nominal_end = t0 + cfg.alpha.calibration_s
        last = frames[-1]
        if last.window_start_s + last.window_len_s <= nominal_end + 1e-9:
            return
        in_nominal = [f for f in frames if f.window_start_s + f.window_len_s <= nominal_end + 1e-9]
        if sum(1 for f in in_nominal if not f.artifact) >= cfg.alpha.min_calibration_frames:
            self.alpha_baseline = calibrate_baseline(
                in_nominal, cfg.alpha.calibration_s, cfg.alpha.min_calibration_frames
            )
            calib_end = nominal_end
        else:
            if sum(1 for f in frames if not f.artifact) < cfg.alpha.min_calibration_frames:
                return
            span = (last.window_start_s + last.window_len_s) - t0
            self.alpha_baseline = calibrate_baseline(frames, span, cfg.alpha.min_calibration_frames)
            calib_end = t0 + span
        in_span = [b for b in self._released_blinks if b.onset_s <= calib_end]
        if len(in_span) >= cfg.alarm.min_blinks_for_eval:
            self.blink_baseline_mean_s = sum(b.duration_s for b in in_span) / len(in_span)
        self._tracker = AlphaRunTracker(
            self.alpha_baseline, cfg.alpha, cfg.psd_window_s, cfg.psd_hop_s
        )
        for f in frames:
            self._feed_tracker(f, delta)
        self._precalib_frames = []

    def _feed_tracker(self, frame: BandPowerFrame, delta: PipelineDelta) -> None:
        closed = self._tracker.feed(frame)
        if closed is not None:
            self._alpha_events.append(closed[0])
            delta.events.append(closed[0])

    # -- main loop ---------------------------------------------------------

    def push(self, samples: np.ndarray) -> PipelineDelta:
        """Feed a block of raw samples; returns whatever completed."""
        delta = PipelineDelta()
        analysis = self._advance_front_end(np.asarray(samples, dtype=float))
        if analysis.size:
            self._buf = np.concatenate([self._buf, analysis])
            self._count += analysis.size
            self._pending_blinks.extend(self._blink_det.push(analysis))

        while self._frames_done * self._hop_n + self._win_n <= self._count:
            j = self._frames_done
            end_idx = j * self._hop_n + self._win_n
            self._release_blinks(end_idx, delta)
            start = j * self._hop_n - self._buf_base
            frame = frame_from_window(
                self._buf[start: start + self._win_n],
                self.analysis_rate,
                self._frame_start_s(j),
                self.config.artifact_reject_uv,
                self.config.psd_segment_s,
                self.config.psd_overlap,
            )
            delta.frames.append(frame)
            if self._tracker is None:
                self._precalib_frames.append(frame)
                self._try_calibrate(delta)
            else:
                self._feed_tracker(frame, delta)
            self._evaluate_alarm(frame.window_start_s, delta)
            self._frames_done += 1
            self._trim_buffer()
        return delta

    def finalize(self) -> PipelineDelta:
        """Flush open detector state at end of input."""
        delta = PipelineDelta()
        for ev, idx in self._pending_blinks + self._blink_det.finalize():
            self._released_blinks.append(ev)
            delta.events.append(ev)
        self._pending_blinks = []
        if self._tracker is None and self._precalib_frames:
            clean = sum(1 for f in self._precalib_frames if not f.artifact)
            if clean >= self.config.alpha.min_calibration_frames:
                last = self._precalib_frames[-1]
                span = (last.window_start_s + last.window_len_s) - self.analysis_start_time
                self.alpha_baseline = calibrate_baseline(
                    self._precalib_frames, span, self.config.alpha.min_calibration_frames
                )
                self._tracker = AlphaRunTracker(
                    self.alpha_baseline, self.config.alpha, self.config.psd_window_s, self.config.psd_hop_s
                )
                for f in self._precalib_frames:
                    self._feed_tracker(f, delta)
                self._precalib_frames = []
        if self._tracker is not None:
            closed = self._tracker.finalize()
            if closed is not None:
                self._alpha_events.append(closed[0])
                delta.events.append(closed[0])
        return delta

    def _release_blinks(self, end_idx: int, delta: PipelineDelta) -> None:
        while self._pending_blinks and self._pending_blinks[0][1] < end_idx:
            ev, _ = self._pending_blinks.pop(0)
            self._released_blinks.append(ev)
            delta.events.append(ev)

    def _evaluate_alarm(self, t: float, delta: PipelineDelta) -> None:
        cfg = self.config
        stats = blink_statistics(
            self._released_blinks, t - cfg.alarm.blink_eval_window_s, cfg.alarm.blink_eval_window_s
        )
        scope = [
            e
            for e in self._alpha_events
            if e.onset_s + e.duration_s > t - cfg.alarm.burst_count_window_s and e.onset_s <= t
        ]
        if self._tracker is not None:
            provisional = self._tracker.provisional_sustained()
            if provisional is not None:
                scope.append(provisional)
        self.state, transition = alarm_mod.evaluate(
            t, stats, scope, self.state, cfg.alarm, self.blink_baseline_mean_s
        )
        if transition is not None:
            delta.transitions.append(transition)

    def _trim_buffer(self):
        floor = self._frames_done * self._hop_n
        if floor - self._buf_base > 8192:
            self._buf = self._buf[floor - self._buf_base:].copy()
            self._buf_base = floor


def analyze_stream(stream: SampleStream, config: AnalysisConfig | None = None) -> AnalysisResult:
    """Run the full pipeline over a complete stream in one go."""
    analyzer = StreamingAnalyzer(config, stream.start_time)
    delta = analyzer.push(stream.samples)
    tail = analyzer.finalize()
    return AnalysisResult(
        frames=delta.frames + tail.frames,
        events=delta.events + tail.events,
        transitions=delta.transitions + tail.transitions,
        alpha_baseline=analyzer.alpha_baseline,
        blink_baseline_mean_s=analyzer.blink_baseline_mean_s,
        final_state=analyzer.state,
    )
