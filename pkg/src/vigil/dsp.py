"""Linear-phase FIR filtering, decimation, Welch PSD and band-power frames.

All detectors downstream consume the outputs of this module, so every
operation here is deterministic: same input array, same output bits. The
streaming filter state (`FirState`) is the single convolution code path;
batch filtering just pushes one big block through it, which makes
streaming and batch analysis runs bit-identical by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signal_io import SampleStream, frame_stream

ALPHA_BAND = (8.0, 13.0)
THETA_BAND = (4.0, 8.0)
TOTAL_BAND = (0.5, 40.0)


class FilterDesignError(ValueError):
    """Raised when FIR design parameters are unusable."""


class RateMismatchError(ValueError):
    """Raised when a filter is applied to a stream at the wrong rate."""


def _mirrored_windowed_sinc(corner_hz: float, num_taps: int, rate: float) -> np.ndarray:
    """Hamming-windowed sinc lowpass kernel with exactly symmetric taps.

    Only the first half of the kernel is evaluated; the second half is a
    mirror copy, so taps[i] == taps[N-1-i] holds bitwise, not just to
    rounding error.
    """
    mid = (num_taps - 1) / 2.0
    fc = corner_hz / rate
    half = np.arange((num_taps + 1) // 2)
    x = half - mid
    core = np.where(x == 0.0, 2.0 * fc, np.sin(2.0 * np.pi * fc * x) / (np.pi * np.where(x == 0.0, 1.0, x)))
    window = 0.54 - 0.46 * np.cos(2.0 * np.pi * half / (num_taps - 1))
    first = core * window
    taps = np.empty(num_taps)
    taps[: len(first)] = first
    taps[num_taps - len(first):] = first[::-1]
    return taps / taps.sum()


@dataclass(frozen=True)
class FirFilter:
    """Immutable linear-phase FIR kernel plus its design metadata."""

    taps: np.ndarray
    design_rate: float
    kind: str  # "lowpass" | "highpass"
    corner_hz: float

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    @property
    def num_taps(self) -> int:
        return len(self.taps)

    @property
    def group_delay_s(self) -> float:
        return (self.num_taps - 1) / 2.0 / self.design_rate


def design_fir(kind: str, corner_hz: float, num_taps: int, rate: float) -> FirFilter:
    """Design a windowed-sinc (Hamming) lowpass or highpass filter.

    The magnitude response crosses the corner at about -6 dB (half
    amplitude), the native convention for this design method. Highpass
    kernels are built by spectral inversion of the complementary lowpass,
    which requires an odd tap count.
    """
    if kind not in ("lowpass", "highpass"):
        raise FilterDesignError(f"unknown filter kind {kind!r}")
    if not 0.0 < corner_hz < rate / 2.0:
        raise FilterDesignError(
            f"corner {corner_hz} Hz not inside (0, Nyquist={rate / 2.0}) at rate {rate}"
        )
    if num_taps < 3:
        raise FilterDesignError(f"need at least 3 taps, got {num_taps}")
    if kind == "highpass" and num_taps % 2 == 0:
        raise FilterDesignError(
            f"highpass design requires an odd tap count (got {num_taps}); "
            "spectral inversion needs a center tap"
        )
    taps = _mirrored_windowed_sinc(corner_hz, num_taps, rate)
    if kind == "highpass":
        taps = -taps
        taps[(num_taps - 1) // 2] += 1.0
    return FirFilter(taps=taps, design_rate=float(rate), kind=kind, corner_hz=float(corner_hz))


def design_bandpass(low_hz: float, high_hz: float, num_taps: int, rate: float) -> FirFilter:
    """Linear-phase bandpass as the difference of two lowpass kernels.

    DC gain is exactly zero (both component kernels are unity-normalized)
    and the taps stay symmetric. Tap count must be odd.
    """
    if not 0.0 < low_hz < high_hz < rate / 2.0:
        raise FilterDesignError(f"band ({low_hz}, {high_hz}) invalid at rate {rate}")
    if num_taps % 2 == 0:
        raise FilterDesignError(f"bandpass requires an odd tap count (got {num_taps})")
    taps = _mirrored_windowed_sinc(high_hz, num_taps, rate) - _mirrored_windowed_sinc(low_hz, num_taps, rate)
    return FirFilter(taps=taps, design_rate=float(rate), kind="bandpass", corner_hz=float(high_hz))


class FirState:
    """Incremental direct-form convolution with a persistent input tail.

    `process` returns exactly one output per input sample, computed as if
    the input had been zero before the first push. Output values are
    bit-identical for any partitioning of the input into blocks.
    """

    def __init__(self, fir: FirFilter):
        self.fir = fir
        self._tail = np.zeros(fir.num_taps - 1)

    def process(self, block: np.ndarray) -> np.ndarray:
        block = np.asarray(block, dtype=float)
        if block.size == 0:
            return block.copy()
        buf = np.concatenate([self._tail, block])
        out = np.convolve(buf, self.fir.taps, mode="valid")
        self._tail = buf[buf.size - (self.fir.num_taps - 1):].copy()
        return out


def apply_fir(fir: FirFilter, stream: SampleStream) -> SampleStream:
    """Convolve a stream with a filter, compensating group delay.

    Output has the same length and rate as the input; the (N-1)/2-sample
    group delay is folded into start_time, so a feature at input time T
    appears in the output at time T. The first N-1 samples are the
    zero-state transient and carry timestamps before the input start.
    """
    if not math.isclose(stream.sample_rate, fir.design_rate, rel_tol=1e-9):
        raise RateMismatchError(
            f"stream at {stream.sample_rate} Hz, filter designed for {fir.design_rate} Hz"
        )
    out = FirState(fir).process(stream.samples)
    return SampleStream(
        sample_rate=stream.sample_rate,
        samples=out,
        start_time=stream.start_time - fir.group_delay_s,
    )


def decimate(stream: SampleStream, factor: int) -> SampleStream:
    """Keep every factor-th sample starting at index 0.

    The caller is responsible for having low-pass filtered the stream
    below the new Nyquist; this function does not check.
    """
    if factor < 1:
        raise ValueError(f"decimation factor must be >= 1, got {factor}")
    if factor == 1:
        return stream
    return SampleStream(
        sample_rate=stream.sample_rate / factor,
        samples=stream.samples[::factor].copy(),
        start_time=stream.start_time,
    )


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectral density estimate for one analysis window."""

    bin_frequencies: np.ndarray  # Hz, ascending from 0
    power_density: np.ndarray    # uV^2/Hz
    resolution_hz: float
    window_start_s: float = 0.0

    def __post_init__(self):
        freqs = np.asarray(self.bin_frequencies, dtype=float)
        dens = np.asarray(self.power_density, dtype=float)
        freqs.flags.writeable = False
        dens.flags.writeable = False
        object.__setattr__(self, "bin_frequencies", freqs)
        object.__setattr__(self, "power_density", dens)

    def to_csv_rows(self) -> list[str]:
        """One "frequency_hz,power_uv2_per_hz" row per bin."""
        return [f"{f!r},{p!r}" for f, p in zip(self.bin_frequencies, self.power_density)]


def welch_psd(
    samples: np.ndarray,
    rate: float,
    segment_s: float = 1.0,
    overlap_fraction: float = 0.5,
    window_start_s: float = 0.0,
) -> Spectrum:
    """Welch PSD: mean of Hann-windowed overlapped periodograms.

    Scaling is one-sided density with window-power compensation, so the
    rectangle-rule integral of the density over frequency recovers the
    mean square value of a stationary input. No detrending is applied.
    """
    samples = np.asarray(samples, dtype=float)
    seg_n = int(round(segment_s * rate))
    if seg_n < 2:
        raise ValueError(f"segment of {segment_s} s is under 2 samples at {rate} Hz")
    if samples.size < seg_n:
        raise ValueError(
            f"window of {samples.size} samples shorter than one {seg_n}-sample segment"
        )
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")
    step = seg_n - int(math.floor(overlap_fraction * seg_n))
    step = max(step, 1)

    n = np.arange(seg_n)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / seg_n)  # periodic Hann
    u = float(np.sum(window**2))

    acc = None
    count = 0
    for start in range(0, samples.size - seg_n + 1, step):
        spec = np.fft.rfft(window * samples[start: start + seg_n])
        p = np.abs(spec) ** 2
        acc = p if acc is None else acc + p
        count += 1
    psd = acc / (count * rate * u)
    psd[1:] *= 2.0
    if seg_n % 2 == 0:
        psd[-1] /= 2.0  # Nyquist bin is not mirrored
    return Spectrum(
        bin_frequencies=np.fft.rfftfreq(seg_n, 1.0 / rate),
        power_density=psd,
        resolution_hz=rate / seg_n,
        window_start_s=window_start_s,
    )


def band_power(spectrum: Spectrum, low_hz: float, high_hz: float) -> float:
    """Rectangle-rule integral of the PSD over bins with low <= f < high."""
    max_f = float(spectrum.bin_frequencies[-1])
    if not 0.0 <= low_hz < high_hz <= max_f:
        raise ValueError(
            f"band ({low_hz}, {high_hz}) Hz invalid: need 0 <= low < high <= {max_f}"
        )
    mask = (spectrum.bin_frequencies >= low_hz) & (spectrum.bin_frequencies < high_hz)
    return float(np.sum(spectrum.power_density[mask]) * spectrum.resolution_hz)


@dataclass(frozen=True)
class BandPowerFrame:
    """Spectral summary of one analysis window.

    `artifact` is true iff any sample in the window strictly exceeds the
    configured rejection amplitude; such frames never count as alpha
    activity downstream.
    """

    window_start_s: float
    window_len_s: float
    alpha_power_uv2: float
    theta_power_uv2: float
    total_power_uv2: float
    relative_alpha: float
    artifact: bool

    def to_csv_row(self) -> str:
        return (
            f"{self.window_start_s!r},{self.alpha_power_uv2!r},{self.theta_power_uv2!r},"
            f"{self.total_power_uv2!r},{self.relative_alpha!r},{int(self.artifact)}"
        )

    CSV_HEADER = "window_start_s,alpha_power_uv2,theta_power_uv2,total_power_uv2,relative_alpha,artifact"


def frame_from_window(
    window: np.ndarray,
    rate: float,
    window_start_s: float,
    artifact_reject_uv: float,
    segment_s: float = 1.0,
    overlap_fraction: float = 0.5,
) -> BandPowerFrame:
    """Band powers plus artifact flag for one window of analysis samples."""
    spectrum = welch_psd(window, rate, segment_s, overlap_fraction, window_start_s)
    alpha = band_power(spectrum, *ALPHA_BAND)
    theta = band_power(spectrum, *THETA_BAND)
    total = band_power(spectrum, *TOTAL_BAND)
    return BandPowerFrame(
        window_start_s=window_start_s,
        window_len_s=len(window) / rate,
        alpha_power_uv2=alpha,
        theta_power_uv2=theta,
        total_power_uv2=total,
        relative_alpha=alpha / total if total > 0.0 else 0.0,
        artifact=bool(np.max(np.abs(window)) > artifact_reject_uv),
    )


def compute_band_power_frames(stream: SampleStream, config) -> list[BandPowerFrame]:
    """Band-power frames at the configured window/hop over a whole stream.

    `config` is an AnalysisConfig (psd_window_s, psd_hop_s, psd_segment_s,
    psd_overlap, artifact_reject_uv). The stream rate must be at least
    80 Hz so the 0.5-40 Hz total band is representable.
    """
    if stream.sample_rate < 2 * TOTAL_BAND[1]:
        raise ValueError(
            f"stream rate {stream.sample_rate} Hz too low for the "
            f"{TOTAL_BAND[1]} Hz total band (need >= {2 * TOTAL_BAND[1]})"
        )
    return [
        frame_from_window(
            window,
            stream.sample_rate,
            start_s,
            config.artifact_reject_uv,
            config.psd_segment_s,
            config.psd_overlap,
        )
        for start_s, window in frame_stream(stream, config.psd_window_s, config.psd_hop_s)
    ]
