"""Score detector output against synthetic ground truth.

Events are matched greedily in onset order: each detection takes the
nearest unmatched truth event within the onset tolerance. Leftover
detections are false positives, leftover truths false negatives. With no
detections at all, precision is reported as 1.0 and flagged, so the
report never contains undefined values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .alarm import AlarmTransition, level_at


@dataclass(frozen=True)
class EventScore:
    detected: int
    truth: int
    matched: int
    precision: float
    recall: float
    duration_mae_s: Optional[float]
    zero_detections: bool

    def to_dict(self) -> dict:
        return {
            "detected": self.detected,
            "truth": self.truth,
            "matched": self.matched,
            "precision": self.precision,
            "recall": self.recall,
            "duration_mae_s": self.duration_mae_s,
            "zero_detections": self.zero_detections,
        }


@dataclass(frozen=True)
class ScoreReport:
    blink: EventScore
    alpha_burst: EventScore
    alpha_sustained: EventScore
    alarm_agreement: float
    hops_compared: int
    tolerance_s: float

    def to_dict(self) -> dict:
        return {
            "blink": self.blink.to_dict(),
            "alpha_burst": self.alpha_burst.to_dict(),
            "alpha_sustained": self.alpha_sustained.to_dict(),
            "alarm_agreement": self.alarm_agreement,
            "hops_compared": self.hops_compared,
            "tolerance_s": self.tolerance_s,
        }


def match_events(
    detected: Sequence[tuple[float, float]],
    truth: Sequence[tuple[float, float]],
    tolerance_s: float,
) -> list[tuple[int, int]]:
    """Greedy onset matching: (detected_index, truth_index) pairs.

    Detections are visited in onset order; each takes the unmatched truth
    event with the smallest onset distance within tolerance (earliest one
    on ties).
    """
    order = sorted(range(len(detected)), key=lambda i: detected[i][0])
    taken = [False] * len(truth)
    pairs: list[tuple[int, int]] = []
    for di in order:
        onset = detected[di][0]
        best = None
        best_dist = tolerance_s
        for ti, (t_onset, _) in enumerate(truth):
            if taken[ti]:
                continue
            dist = abs(t_onset - onset)
            if dist < best_dist or (best is None and dist == best_dist):
                best = ti
                best_dist = dist
        if best is not None:
            taken[best] = True
            pairs.append((di, best))
    return pairs


def score_events(
    detected: Sequence[tuple[float, float]],
    truth: Sequence[tuple[float, float]],
    tolerance_s: float,
) -> EventScore:
    pairs = match_events(detected, truth, tolerance_s)
    matched = len(pairs)
    precision = matched / len(detected) if detected else 1.0
    recall = matched / len(truth) if truth else 1.0
    mae = (
        sum(abs(detected[di][1] - truth[ti][1]) for di, ti in pairs) / matched
        if matched
        else None
    )
    return EventScore(
        detected=len(detected),
        truth=len(truth),
        matched=matched,
        precision=precision,
        recall=recall,
        duration_mae_s=mae,
        zero_detections=not detected,
    )


def timeline_agreement(
    transitions: Sequence[AlarmTransition],
    expected_timeline: Sequence[tuple[float, int]],
) -> tuple[float, int]:
    """Fraction of expected hops whose level matches the detected timeline."""
    if not expected_timeline:
        return 1.0, 0
    hits = sum(1 for t, level in expected_timeline if level_at(transitions, t) == level)
    return hits / len(expected_timeline), len(expected_timeline)


def score_run(
    detected_events: Sequence[dict],
    transitions: Sequence[AlarmTransition],
    labels,
    tolerance_s: float = 0.25,
) -> ScoreReport:
    """Full report for one run: per-type event scores plus alarm agreement.

    `detected_events` are event records ({"type": "blink" | "alpha", ...});
    `labels` is a GroundTruthLabels.
    """
    blinks = [(e["onset_s"], e["duration_s"]) for e in detected_events if e["type"] == "blink"]
    bursts = [
        (e["onset_s"], e["duration_s"])
        for e in detected_events
        if e["type"] == "alpha" and e["kind"] == "burst"
    ]
    sustained = [
        (e["onset_s"], e["duration_s"])
        for e in detected_events
        if e["type"] == "alpha" and e["kind"] == "sustained"
    ]
    agreement, hops = timeline_agreement(transitions, labels.expected_alarm_timeline)
    return ScoreReport(
        blink=score_events(blinks, labels.blink_events, tolerance_s),
        alpha_burst=score_events(bursts, labels.alpha_burst_events, tolerance_s),
        alpha_sustained=score_events(sustained, labels.sustained_alpha_events, tolerance_s),
        alarm_agreement=agreement,
        hops_compared=hops,
        tolerance_s=tolerance_s,
    )
