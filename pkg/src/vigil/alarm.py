"""Three-level drowsiness alarm state machine.

Level 1 fires on elevated mean blink duration, level 2 on repeated alpha
bursts, level 3 on sustained alpha (eyes closed). Higher levels dominate;
levels rise immediately but may only fall once the hold time has passed,
so a triggered alarm never flickers at frame rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .alpha import AlphaEvent
from .blink import BlinkStatistics

TRIGGER_NONE = "none"
TRIGGER_BLINK = "blink_duration"
TRIGGER_BURST = "alpha_burst"
TRIGGER_SUSTAINED = "sustained_alpha"

LEVEL_TRIGGERS = {0: TRIGGER_NONE, 1: TRIGGER_BLINK, 2: TRIGGER_BURST, 3: TRIGGER_SUSTAINED}


class TimeRegressionError(ValueError):
    """Raised when evaluate() is called with a time earlier than the last call."""


@dataclass(frozen=True)
class AlarmConfig:
    blink_duration_abs_s: float = 0.4
    blink_duration_ratio: float = 1.5   # vs. calibrated mean, when known
    blink_eval_window_s: float = 60.0
    min_blinks_for_eval: int = 3
    burst_count_threshold: int = 3
    burst_count_window_s: float = 60.0
    level_hold_s: float = 10.0

    def validate(self) -> None:
        for name in (
            "blink_duration_abs_s", "blink_eval_window_s", "burst_count_window_s", "level_hold_s",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"alarm.{name} must be positive")
        if self.blink_duration_ratio <= 1.0:
            raise ValueError("alarm.blink_duration_ratio must be > 1")
        if self.min_blinks_for_eval < 1 or self.burst_count_threshold < 1:
            raise ValueError("alarm count thresholds must be >= 1")


@dataclass(frozen=True)
class AlarmState:
    """Current alarm level with trigger provenance and hold timer.

    last_eval_s is bookkeeping used to reject non-monotonic evaluation
    times; it carries no alarm semantics.
    """

    current_level: int = 0
    since_s: float = 0.0
    trigger: str = TRIGGER_NONE
    hold_until_s: float = 0.0
    last_eval_s: float = -math.inf


@dataclass(frozen=True)
class AlarmTransition:
    time_s: float
    from_level: int
    to_level: int
    trigger: str

    def to_record(self) -> dict:
        return {
            "type": "alarm",
            "time_s": self.time_s,
            "from": self.from_level,
            "to": self.to_level,
            "trigger": self.trigger,
        }


def _blink_criterion(
    stats: Optional[BlinkStatistics],
    config: AlarmConfig,
    baseline_mean_s: Optional[float],
) -> bool:
    if stats is None or stats.event_count < config.min_blinks_for_eval:
        return False
    if stats.mean_duration_s is None:
        return False
    threshold = config.blink_duration_abs_s
    if baseline_mean_s is not None:
        threshold = max(threshold, config.blink_duration_ratio * baseline_mean_s)
    return stats.mean_duration_s > threshold


def candidate_level(
    time_s: float,
    blink_stats: Optional[BlinkStatistics],
    alpha_events: Sequence[AlphaEvent],
    config: AlarmConfig,
    blink_baseline_mean_s: Optional[float] = None,
) -> int:
    """Highest alarm level whose criterion is satisfied right now."""
    sustained = any(
        e.kind == "sustained" and e.onset_s <= time_s <= e.onset_s + e.duration_s
        for e in alpha_events
    )
    if sustained:
        return 3
    bursts = sum(
        1
        for e in alpha_events
        if e.kind == "burst" and time_s - config.burst_count_window_s < e.onset_s <= time_s
    )
    if bursts >= config.burst_count_threshold:
        return 2
    if _blink_criterion(blink_stats, config, blink_baseline_mean_s):
        return 1
    return 0


def evaluate(
    time_s: float,
    blink_stats: Optional[BlinkStatistics],
    alpha_events_in_scope: Sequence[AlphaEvent],
    state: AlarmState,
    config: AlarmConfig,
    blink_baseline_mean_s: Optional[float] = None,
) -> tuple[AlarmState, Optional[AlarmTransition]]:
    """Advance the alarm state machine one evaluation instant.

    The candidate level may exceed the current level at any time (rise
    immediately); it may replace a higher current level only once
    hold_until_s has passed. Emits a transition record on every change.
    """
    if time_s < state.last_eval_s:
        raise TimeRegressionError(f"time {time_s} precedes last evaluation {state.last_eval_s}")
    cand = candidate_level(time_s, blink_stats, alpha_events_in_scope, config, blink_baseline_mean_s)
    if cand == state.current_level or (cand < state.current_level and time_s < state.hold_until_s):
        return replace(state, last_eval_s=time_s), None
    new_state = AlarmState(
        current_level=cand,
        since_s=time_s,
        trigger=LEVEL_TRIGGERS[cand],
        hold_until_s=time_s + config.level_hold_s if cand > 0 else time_s,
        last_eval_s=time_s,
    )
    transition = AlarmTransition(
        time_s=time_s,
        from_level=state.current_level,
        to_level=cand,
        trigger=LEVEL_TRIGGERS[cand],
    )
    return new_state, transition


def run_timeline(
    frames,
    blink_events,
    alpha_events,
    config: AlarmConfig,
    blink_baseline_mean_s: Optional[float] = None,
) -> list[AlarmTransition]:
    """Replay evaluate() at every frame hop over already-detected events.

    Frames provide the evaluation clock (their window_start_s values).
    Alpha events are scoped to those whose span intersects the trailing
    burst window; blink statistics cover the trailing evaluation window.
    """
    from .blink import blink_statistics

    state = AlarmState()
    transitions: list[AlarmTransition] = []
    for frame in frames:
        t = frame.window_start_s
        stats = blink_statistics(blink_events, t - config.blink_eval_window_s, config.blink_eval_window_s)
        scope = [
            e
            for e in alpha_events
            if e.onset_s + e.duration_s > t - config.burst_count_window_s and e.onset_s <= t
        ]
        state, transition = evaluate(t, stats, scope, state, config, blink_baseline_mean_s)
        if transition is not None:
            transitions.append(transition)
    return transitions


def level_at(transitions: Sequence[AlarmTransition], time_s: float, initial_level: int = 0) -> int:
    """Alarm level in effect at time_s given a time-sorted transition list."""
    level = initial_level
    for tr in transitions:
        if tr.time_s <= time_s:
            level = tr.to_level
        else:
            break
    return level
