"""Analysis configuration: defaults, validation, and the flat file format.

Config files are plain text, one "key = value" per line, with dotted
prefixes for the nested sections (blink., alpha., alarm.). Lines starting
with '#' are comments. Example:

    input_rate_hz = 500
    lpf_corner_hz = 30
    blink.amplitude_threshold_uv = 75
    alarm.level_hold_s = 10
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .alarm import AlarmConfig
from .alpha import AlphaConfig
from .blink import BlinkConfig
from .dsp import TOTAL_BAND


class ConfigError(ValueError):
    """Raised for unknown keys, bad values, or inconsistent settings."""


@dataclass(frozen=True)
class AnalysisConfig:
    """Full pipeline configuration; defaults follow the reference hardware chain.

    The raw stream is low-passed at 30 Hz (100 taps), decimated by 5, then
    high-passed at 0.25 Hz (1001 taps); analysis windows of 2 s hop every
    0.5 s with 1 s Hann Welch segments at 50% overlap, giving 1 Hz
    resolution. Samples beyond +/-50 uV flag their window as artifact.
    """

    input_rate_hz: float = 500.0
    lpf_corner_hz: float = 30.0
    lpf_taps: int = 100
    hpf_corner_hz: float = 0.25
    hpf_taps: int = 1001
    decim_factor: int = 5
    psd_window_s: float = 2.0
    psd_hop_s: float = 0.5
    psd_segment_s: float = 1.0
    psd_overlap: float = 0.5
    artifact_reject_uv: float = 50.0
    blink: BlinkConfig = field(default_factory=BlinkConfig)
    alpha: AlphaConfig = field(default_factory=AlphaConfig)
    alarm: AlarmConfig = field(default_factory=AlarmConfig)

    @property
    def analysis_rate_hz(self) -> float:
        return self.input_rate_hz / self.decim_factor

    def validate(self) -> None:
        """Raise ConfigError naming the first offending field."""
        try:
            if self.input_rate_hz <= 0:
                raise ValueError("input_rate_hz must be positive")
            if self.decim_factor < 1:
                raise ValueError("decim_factor must be >= 1")
            if not 0 < self.lpf_corner_hz < self.input_rate_hz / 2:
                raise ValueError("lpf_corner_hz must lie inside (0, input Nyquist)")
            if not 0 < self.hpf_corner_hz < self.analysis_rate_hz / 2:
                raise ValueError("hpf_corner_hz must lie inside (0, decimated Nyquist)")
            if self.lpf_taps < 3 or self.hpf_taps < 3:
                raise ValueError("filter tap counts must be >= 3")
            if self.hpf_taps % 2 == 0:
                raise ValueError("hpf_taps must be odd (linear-phase highpass)")
            if self.decim_factor > 1 and self.lpf_corner_hz > self.analysis_rate_hz / 2:
                raise ValueError("lpf_corner_hz must not exceed the decimated Nyquist")
            if self.analysis_rate_hz < 2 * TOTAL_BAND[1]:
                raise ValueError(
                    f"decimated rate {self.analysis_rate_hz} Hz cannot represent the "
                    f"{TOTAL_BAND[1]} Hz total band; lower decim_factor"
                )
            if not 0 < self.psd_hop_s <= self.psd_window_s:
                raise ValueError("need 0 < psd_hop_s <= psd_window_s")
            if self.psd_segment_s > self.psd_window_s:
                raise ValueError("psd_segment_s must not exceed psd_window_s")
            if not 0 <= self.psd_overlap < 1:
                raise ValueError("psd_overlap must be in [0, 1)")
            if self.artifact_reject_uv <= 0:
                raise ValueError("artifact_reject_uv must be positive")
            if self.blink.band_high_hz >= self.analysis_rate_hz / 2:
                raise ValueError("blink.band_high_hz must be below the decimated Nyquist")
            self.blink.validate()
            self.alpha.validate()
            self.alarm.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_SECTIONS = {"blink": BlinkConfig, "alpha": AlphaConfig, "alarm": AlarmConfig}


def _coerce(cls, name: str, raw: str):
    for f in dataclasses.fields(cls):
        if f.name == name:
            if f.type in ("int", int):
                return int(raw)
            return float(raw)
    raise KeyError(name)


def parse_config(text: str) -> AnalysisConfig:
    """Parse the flat key-per-line format into an AnalysisConfig."""
    top: dict = {}
    nested: dict[str, dict] = {name: {} for name in _SECTIONS}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if "." in key:
                section, _, name = key.partition(".")
                if section not in _SECTIONS:
                    raise KeyError(key)
                nested[section][name] = _coerce(_SECTIONS[section], name, value)
            else:
                top[key] = _coerce(AnalysisConfig, key, value)
        except KeyError:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}") from None
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key!r}") from None
    for section, cls in _SECTIONS.items():
        top[section] = cls(**nested[section])
    return AnalysisConfig(**top)


def format_config(config: AnalysisConfig) -> str:
    """Serialize a config in the flat format; parse(format(c)) == c."""
    lines = []
    for f in dataclasses.fields(AnalysisConfig):
        value = getattr(config, f.name)
        if f.name in _SECTIONS:
            for sub in dataclasses.fields(value):
                lines.append(f"{f.name}.{sub.name} = {getattr(value, sub.name)!r}")
        else:
            lines.append(f"{f.name} = {value!r}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> AnalysisConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def save_config(config: AnalysisConfig, path: str | Path) -> None:
    Path(path).write_text(format_config(config), encoding="utf-8")
