"""Single-channel EEG sample streams: CSV ingest/export and windowing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np


class CsvFormatError(ValueError):
    """Raised for malformed or inconsistent CSV signal files."""


@dataclass(frozen=True)
class SampleStream:
    """Uniformly sampled amplitudes in microvolts.

    Sample i has timestamp start_time + i / sample_rate. The sample array
    is made read-only so streams can be shared freely.
    """

    sample_rate: float
    samples: np.ndarray
    start_time: float = 0.0

    def __post_init__(self):
        if self.sample_rate <= 0.0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        samples = samples.copy() if samples.flags.writeable else samples
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def time_of(self, index: int) -> float:
        return self.start_time + index / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.sample_rate


def read_csv(path: str | Path, declared_rate: float) -> SampleStream:
    """Read a signal CSV: rows of "amplitude_uv" or "time_s,amplitude_uv".

    Lines starting with '#' are comments. When timestamps are present the
    spacing is checked against declared_rate to 1%, and the first
    timestamp becomes start_time.
    """
    if declared_rate <= 0.0:
        raise ValueError(f"declared_rate must be positive, got {declared_rate}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such signal file: {path}")
    times: list[float] = []
    amps: list[float] = []
    has_time: bool | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if len(fields) not in (1, 2):
                raise CsvFormatError(f"line {lineno}: expected 1 or 2 fields, got {len(fields)}")
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise CsvFormatError(f"line {lineno}: non-numeric value in {line!r}") from None
            row_has_time = len(values) == 2
            if has_time is None:
                has_time = row_has_time
            elif has_time != row_has_time:
                raise CsvFormatError(f"line {lineno}: inconsistent column count")
            if row_has_time:
                times.append(values[0])
                amps.append(values[1])
            else:
                amps.append(values[0])
    if not amps:
        raise CsvFormatError(f"empty input: {path}")
    start_time = 0.0
    if has_time and len(times) > 1:
        expected_dt = 1.0 / declared_rate
        dts = np.diff(times)
        bad = np.nonzero(np.abs(dts - expected_dt) > 0.01 * expected_dt)[0]
        if bad.size:
            i = int(bad[0])
            raise CsvFormatError(
                f"line {i + 2}: timestamp spacing {dts[i]:.6f} s inconsistent with "
                f"declared rate {declared_rate} Hz (expected {expected_dt:.6f} s)"
            )
        start_time = times[0]
    elif has_time:
        start_time = times[0]
    return SampleStream(sample_rate=float(declared_rate), samples=np.array(amps), start_time=start_time)


def write_csv(stream: SampleStream, path: str | Path, include_time: bool = False) -> None:
    """Write a stream as CSV with amplitudes to 3 decimal places."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"# vigil signal, rate_hz={stream.sample_rate!r}, start_time_s={stream.start_time!r}\n")
        if include_time:
            for t, v in zip(stream.times, stream.samples):
                fh.write(f"{t:.6f},{v:.3f}\n")
        else:
            for v in stream.samples:
                fh.write(f"{v:.3f}\n")


def frame_stream(
    stream: SampleStream, window_s: float, hop_s: float
) -> Iterator[tuple[float, np.ndarray]]:
    """Yield (window_start_s, samples) for overlapping analysis windows.

    Windows start at 0, hop_s, 2*hop_s, ... relative to the stream start;
    a final partial window is discarded rather than zero-padded. A window
    longer than the stream yields nothing.
    """
    if hop_s <= 0.0 or window_s < hop_s:
        raise ValueError(f"need window_s >= hop_s > 0, got window {window_s}, hop {hop_s}")
    win_n = int(round(window_s * stream.sample_rate))
    if win_n < 2:
        raise ValueError(f"window of {window_s} s is under 2 samples at {stream.sample_rate} Hz")
    k = 0
    while True:
        start = int(round(k * hop_s * stream.sample_rate))
        if start + win_n > stream.samples.size:
            return
        yield stream.time_of(start), stream.samples[start: start + win_n]
        k += 1
