"""Eye-blink artifact detection and per-blink duration measurement.

Blinks are the dominant low-frequency, high-amplitude deflection on a
frontal EEG channel. Detection band-limits the signal to 0.5-5 Hz,
thresholds the result, merges nearby supra-threshold regions, and
measures each region's width at half of its peak. That half-amplitude
width is the reported blink duration, the same convention used by
lid-closure drowsiness metrics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dsp import FirState, design_bandpass
from .signal_io import SampleStream


@dataclass(frozen=True)
class BlinkConfig:
    amplitude_threshold_uv: float = 75.0
    band_low_hz: float = 0.5
    band_high_hz: float = 5.0
    band_span_s: float = 3.0        # FIR kernel length in seconds (odd tap count)
    merge_gap_s: float = 0.1
    min_duration_s: float = 0.03
    max_duration_s: float = 1.0

    def validate(self) -> None:
        if self.amplitude_threshold_uv <= 0:
            raise ValueError("blink.amplitude_threshold_uv must be positive")
        if not 0 < self.band_low_hz < self.band_high_hz:
            raise ValueError("blink band edges must satisfy 0 < low < high")
        if self.band_span_s <= 0 or self.merge_gap_s <= 0:
            raise ValueError("blink.band_span_s and blink.merge_gap_s must be positive")
        if not 0 <= self.min_duration_s < self.max_duration_s:
            raise ValueError("blink duration bounds must satisfy 0 <= min < max")


@dataclass(frozen=True)
class BlinkEvent:
    """One detected blink: half-amplitude interval start, width, and peak."""

    onset_s: float
    duration_s: float
    peak_amplitude_uv: float

    def to_record(self) -> dict:
        return {
            "type": "blink",
            "onset_s": self.onset_s,
            "duration_s": self.duration_s,
            "peak_uv": self.peak_amplitude_uv,
        }


@dataclass(frozen=True)
class BlinkStatistics:
    """Aggregate of blinks whose onset falls in one evaluation window."""

    window_start_s: float
    window_len_s: float
    mean_duration_s: Optional[float]
    blink_rate_per_min: float
    event_count: int


class _Region:
    __slots__ = ("start", "end")

    def __init__(self, start: int, end: int):
        self.start = start
        self.end = end


class StreamingBlinkDetector:
    """Incremental blink detector over an already high-passed stream.

    Push blocks of analysis samples; completed events come back as
    (event, final_index) pairs where final_index is the absolute input
    sample index whose arrival made the event final. Decisions depend
    only on sample values and indices, never on block boundaries, so any
    chunking of the same stream yields identical events.
    """

    def __init__(self, sample_rate: float, start_time: float, config: BlinkConfig | None = None):
        if sample_rate < 50.0:
            raise ValueError(f"blink detection needs >= 50 Hz, got {sample_rate}")
        self.config = config or BlinkConfig()
        self.config.validate()
        self.rate = sample_rate
        self.start_time = start_time
        num_taps = int(round(self.config.band_span_s * sample_rate)) | 1
        self._fir = design_bandpass(
            self.config.band_low_hz, self.config.band_high_hz, num_taps, sample_rate
        )
        self._fir_state = FirState(self._fir)
        self._delay_n = (num_taps - 1) // 2
        self._gap_n = max(1, int(round(self.config.merge_gap_s * sample_rate)))
        self._max_n = int(round(self.config.max_duration_s * sample_rate))
        # band-limited samples kept from _buf_base onward (absolute indexing)
        self._buf = np.empty(0)
        self._buf_base = 0
        self._count = 0
        self._open: _Region | None = None
        self._pending: _Region | None = None
        self._last_event_end_t = -np.inf

    def _bb(self, idx: int) -> float:
        return self._buf[idx - self._buf_base]

    def _feature_time(self, idx: float) -> float:
        # band-limited output index -> delay-compensated signal time
        return self.start_time + (idx - self._delay_n) / self.rate

    def push(self, samples: np.ndarray) -> list[tuple[BlinkEvent, int]]:
        out = self._fir_state.process(np.asarray(samples, dtype=float))
        if out.size == 0:
            return []
        self._buf = np.concatenate([self._buf, out])
        events: list[tuple[BlinkEvent, int]] = []
        thr = self.config.amplitude_threshold_uv
        while self._count < self._buf_base + self._buf.size:
            i = self._count
            v = self._bb(i)
            if v > thr:
                if self._open is None:
                    if self._pending is not None and i - self._pending.end < self._gap_n:
                        self._open = self._pending          # merge across short gap
                        self._open.end = i
                        self._pending = None
                    else:
                        if self._pending is not None:
                            ev = self._finalize_region(self._pending, frontier=i)
                            if ev is not None:
                                events.append(ev)
                            self._pending = None
                        self._open = _Region(i, i)
                else:
                    self._open.end = i
            else:
                if self._open is not None:
                    self._pending = self._open
                    self._open = None
            self._count += 1
            if self._pending is not None and self._ready(self._pending, self._count):
                ev = self._finalize_region(self._pending, frontier=self._count)
                if ev is not None:
                    events.append(ev)
                self._pending = None
            self._trim()
        return events

    def finalize(self) -> list[tuple[BlinkEvent, int]]:
        """Close any open region using the data seen so far."""
        events = []
        region = self._pending or self._open
        self._pending = self._open = None
        if region is not None:
            ev = self._finalize_region(region, frontier=self._count)
            if ev is not None:
                events.append(ev)
        return events

    def _ready(self, region: _Region, frontier: int) -> bool:
        peak_idx = region.start + int(np.argmax(self._buf[region.start - self._buf_base: region.end + 1 - self._buf_base]))
        horizon = max(region.end + self._gap_n, peak_idx + self._max_n + 2)
        return frontier > horizon

    def _finalize_region(self, region: _Region, frontier: int) -> tuple[BlinkEvent, int] | None:
        seg = self._buf[region.start - self._buf_base: region.end + 1 - self._buf_base]
        peak_off = int(np.argmax(seg))
        peak_idx = region.start + peak_off
        peak = float(seg[peak_off])
        lo_cap = max(self._buf_base, peak_idx - self._max_n - 2)
        hi_cap = min(self._count - 1, peak_idx + self._max_n + 2)
        # The band filter's 0.5 Hz side subtracts a smooth pedestal from the
        # bump, so the half-amplitude level is referenced to the local
        # baseline (the undershoot floor around the region), not to zero.
        # For a bump riding on a locally constant pedestal this recovers the
        # unfiltered half-amplitude width exactly.
        n_lo = max(lo_cap, region.start - self._max_n) - self._buf_base
        n_hi = min(hi_cap, region.end + self._max_n) + 1 - self._buf_base
        baseline = min(0.0, float(np.min(self._buf[n_lo:n_hi])))
        half = (peak + baseline) / 2.0

        left = peak_idx
        while left - 1 >= lo_cap and self._bb(left - 1) > half:
            left -= 1
        right = peak_idx
        while right + 1 <= hi_cap and self._bb(right + 1) > half:
            right += 1

        dt = 1.0 / self.rate
        t_left = self._feature_time(left)
        if left > lo_cap:
            prev = self._bb(left - 1)
            t_left -= dt * (self._bb(left) - half) / (self._bb(left) - prev)
        t_right = self._feature_time(right)
        if right < hi_cap:
            nxt = self._bb(right + 1)
            t_right += dt * (self._bb(right) - half) / (self._bb(right) - nxt)

        if t_left < self._last_event_end_t:
            t_left = self._last_event_end_t
        duration = t_right - t_left
        if not self.config.min_duration_s < duration <= self.config.max_duration_s:
            return None
        self._last_event_end_t = t_right
        event = BlinkEvent(onset_s=t_left, duration_s=duration, peak_amplitude_uv=peak)
        final_bb_idx = max(region.end + self._gap_n, peak_idx + self._max_n + 2)
        final_input_idx = min(final_bb_idx, self._count - 1) + self._delay_n
        return event, final_input_idx

    def _trim(self):
        # keep enough history for merges and half-amplitude walks
        anchor = self._count
        if self._open is not None:
            anchor = min(anchor, self._open.start)
        if self._pending is not None:
            anchor = min(anchor, self._pending.start)
        floor = anchor - self._max_n - 4
        if floor - self._buf_base > 4096:
            self._buf = self._buf[floor - self._buf_base:].copy()
            self._buf_base = floor


def detect_blinks(stream: SampleStream, config: BlinkConfig | None = None) -> list[BlinkEvent]:
    """Detect blinks in a full stream (already high-passed at 0.25 Hz)."""
    det = StreamingBlinkDetector(stream.sample_rate, stream.start_time, config)
    pairs = det.push(stream.samples)
    pairs += det.finalize()
    return [ev for ev, _ in pairs]


def blink_statistics(
    events: Sequence[BlinkEvent], window_start_s: float, window_len_s: float
) -> BlinkStatistics:
    """Aggregate events whose onset lies in [window_start, window_start + len)."""
    if window_len_s <= 0:
        raise ValueError(f"window_len_s must be positive, got {window_len_s}")
    hits = [e for e in events if window_start_s <= e.onset_s < window_start_s + window_len_s]
    mean = sum(e.duration_s for e in hits) / len(hits) if hits else None
    return BlinkStatistics(
        window_start_s=window_start_s,
        window_len_s=window_len_s,
        mean_duration_s=mean,
        blink_rate_per_min=len(hits) / window_len_s * 60.0,
        event_count=len(hits),
    )
