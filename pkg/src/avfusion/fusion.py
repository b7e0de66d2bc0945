"""Score-level audio-visual fusion for detection and temporal localization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import TIME_EPS, SegmentScore, TimeInterval, partition_timeline


@dataclass(frozen=True)
class FusionConfig:
    decision_threshold: float = 0.5
    # neighbours whose fused confidences differ by at most this are merged
    merge_epsilon: float = 1e-6
    # segments below this are dropped; zero-confidence time is never reported
    report_threshold: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.decision_threshold <= 1.0:
            raise ValueError("decision_threshold must be in [0, 1]")
        if self.merge_epsilon < 0:
            raise ValueError("merge_epsilon must be >= 0")
        if not 0.0 <= self.report_threshold <= 1.0:
            raise ValueError("report_threshold must be in [0, 1]")


def fuse_detection(audio_score: float, visual_score: float, cfg: FusionConfig = FusionConfig()) -> float:
    """Average agreeing modalities; on disagreement trust the one calling fake."""
    for s in (audio_score, visual_score):
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"score outside [0, 1]: {s}")
    audio_fake = audio_score >= cfg.decision_threshold
    visual_fake = visual_score >= cfg.decision_threshold
    if audio_fake == visual_fake:
        return (audio_score + visual_score) / 2.0
    return audio_score if audio_fake else visual_score


def _check_range(segs: Sequence[SegmentScore], duration_s: float) -> None:
    for seg in segs:
        if seg.end_s > duration_s + TIME_EPS:
            raise ValueError(f"segment {seg.interval.as_pair()} outside [0, {duration_s}]")


def interval_confidence(segs: Sequence[SegmentScore], interval: TimeInterval) -> float:
    """Max confidence over segments overlapping ``interval``; 0 when none do."""
    best = 0.0
    for seg in segs:
        if seg.interval.intersection_length(interval) > TIME_EPS:
            best = max(best, seg.confidence)
    return best


def fused_partition(
    audio_segs: Sequence[SegmentScore],
    visual_segs: Sequence[SegmentScore],
    duration_s: float,
) -> list[tuple[TimeInterval, float, float, float]]:
    """Per-interval ``(interval, audio_conf, visual_conf, fused_conf)`` before merging."""
    _check_range(audio_segs, duration_s)
    _check_range(visual_segs, duration_s)
    bounds = [t for seg in (*audio_segs, *visual_segs) for t in (seg.start_s, seg.end_s)]
    rows = []
    for iv in partition_timeline(bounds, duration_s):
        ca = interval_confidence(audio_segs, iv)
        cv = interval_confidence(visual_segs, iv)
        rows.append((iv, ca, cv, max(ca, cv)))
    return rows


def merge_similar(segments: Sequence[SegmentScore], epsilon: float) -> list[SegmentScore]:
    """Join contiguous neighbours whose confidence is within ``epsilon`` of the group's first.

    Comparing against the group's first member (not the previous neighbour)
    keeps the operation idempotent.
    """
    merged: list[SegmentScore] = []
    for seg in sorted(segments, key=lambda s: s.start_s):
        if merged:
            head = merged[-1]
            contiguous = abs(seg.start_s - head.end_s) <= TIME_EPS
            if contiguous and abs(seg.confidence - head.confidence) <= epsilon:
                merged[-1] = SegmentScore(TimeInterval(head.start_s, seg.end_s), head.confidence)
                continue
        merged.append(seg)
    return merged


def fuse_localization(
    audio_segs: Sequence[SegmentScore],
    visual_segs: Sequence[SegmentScore],
    duration_s: float,
    cfg: FusionConfig = FusionConfig(),
) -> list[SegmentScore]:
    """Max-confidence fusion over the partition induced by all segment endpoints."""
    rows = fused_partition(audio_segs, visual_segs, duration_s)
    merged = merge_similar([SegmentScore(iv, c) for iv, _, _, c in rows], cfg.merge_epsilon)
    return [s for s in merged if s.confidence > 0.0 and s.confidence >= cfg.report_threshold]
