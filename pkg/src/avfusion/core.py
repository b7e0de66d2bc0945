"""Domain types and interval algebra shared across the pipeline.

All times are seconds on a video's timeline. Intervals are half-open,
``[start_s, end_s)``, so two intervals that merely touch never overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

# Tolerance used when deduplicating boundaries and snapping times to frames.
TIME_EPS = 1e-9


@dataclass(frozen=True, order=True)
class TimeInterval:
    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start_s) and math.isfinite(self.end_s)):
            raise ValueError(f"non-finite interval bounds: ({self.start_s}, {self.end_s})")
        if self.start_s < 0:
            raise ValueError(f"interval start must be >= 0, got {self.start_s}")
        if not self.start_s < self.end_s:
            raise ValueError(f"empty interval: start_s={self.start_s} >= end_s={self.end_s}")

    @property
    def length(self) -> float:
        return self.end_s - self.start_s

    def overlaps(self, other: TimeInterval) -> bool:
        return overlaps(self, other)

    def intersection_length(self, other: TimeInterval) -> float:
        return max(0.0, min(self.end_s, other.end_s) - max(self.start_s, other.start_s))

    def as_pair(self) -> tuple[float, float]:
        return (self.start_s, self.end_s)


@dataclass(frozen=True)
class FrameScoreSeries:
    """Per-frame forgery probabilities; frame ``i`` covers ``[i/fps, (i+1)/fps)``."""

    fps: float
    scores: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.fps > 0:
            raise ValueError(f"fps must be > 0, got {self.fps}")
        scores = tuple(float(s) for s in self.scores)
        for s in scores:
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"frame score outside [0, 1]: {s}")
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def duration_s(self) -> float:
        return len(self.scores) / self.fps

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=float)


@dataclass(frozen=True)
class SegmentScore:
    interval: TimeInterval
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence outside [0, 1]: {self.confidence}")

    @property
    def start_s(self) -> float:
        return self.interval.start_s

    @property
    def end_s(self) -> float:
        return self.interval.end_s


class Category(str, Enum):
    REAL_AUDIO_REAL_VISUAL = "real_audio_real_visual"
    FAKE_AUDIO_REAL_VISUAL = "fake_audio_real_visual"
    REAL_AUDIO_FAKE_VISUAL = "real_audio_fake_visual"
    FAKE_AUDIO_FAKE_VISUAL = "fake_audio_fake_visual"

    @classmethod
    def from_labels(cls, audio_label: int, visual_label: int) -> Category:
        return _CATEGORY_BY_LABELS[(int(audio_label), int(visual_label))]

    @property
    def labels(self) -> tuple[int, int]:
        """(audio_label, visual_label) implied by the category."""
        return _LABELS_BY_CATEGORY[self]


_CATEGORY_BY_LABELS = {
    (0, 0): Category.REAL_AUDIO_REAL_VISUAL,
    (1, 0): Category.FAKE_AUDIO_REAL_VISUAL,
    (0, 1): Category.REAL_AUDIO_FAKE_VISUAL,
    (1, 1): Category.FAKE_AUDIO_FAKE_VISUAL,
}
_LABELS_BY_CATEGORY = {v: k for k, v in _CATEGORY_BY_LABELS.items()}

# Table order used by generators and reports.
CATEGORIES: tuple[Category, ...] = (
    Category.REAL_AUDIO_REAL_VISUAL,
    Category.FAKE_AUDIO_REAL_VISUAL,
    Category.REAL_AUDIO_FAKE_VISUAL,
    Category.FAKE_AUDIO_FAKE_VISUAL,
)


class Modality(str, Enum):
    AUDIO = "audio"
    VISUAL = "visual"


@dataclass(frozen=True)
class VideoMeta:
    """Ground-truth record for one video.

    Modality labels are derived from the segment lists: a modality is fake iff
    it has at least one forged segment. A fully forged modality is stored as a
    single segment spanning ``[0, duration_s]``.
    """

    id: str
    duration_s: float
    fake_audio_segments: tuple[TimeInterval, ...] = ()
    fake_visual_segments: tuple[TimeInterval, ...] = ()
    category: Category = field(init=False)

    def __post_init__(self) -> None:
        if not self.duration_s > 0:
            raise ValueError(f"{self.id}: duration_s must be > 0, got {self.duration_s}")
        for name in ("fake_audio_segments", "fake_visual_segments"):
            segs = tuple(sorted(getattr(self, name)))
            for seg in segs:
                if seg.end_s > self.duration_s + TIME_EPS:
                    raise ValueError(
                        f"{self.id}: forged segment {seg.as_pair()} exceeds duration {self.duration_s}"
                    )
            object.__setattr__(self, name, segs)
        object.__setattr__(
            self, "category", Category.from_labels(self.audio_label, self.visual_label)
        )

    @property
    def audio_label(self) -> int:
        return int(bool(self.fake_audio_segments))

    @property
    def visual_label(self) -> int:
        return int(bool(self.fake_visual_segments))

    @property
    def label(self) -> int:
        """Video-level label: fake if either modality is fake."""
        return int(self.audio_label or self.visual_label)

    def segments(self, modality: Modality | str) -> tuple[TimeInterval, ...]:
        if Modality(modality) is Modality.AUDIO:
            return self.fake_audio_segments
        return self.fake_visual_segments

    def is_fully_forged(self, modality: Modality | str) -> bool:
        segs = self.segments(modality)
        return (
            len(segs) == 1
            and segs[0].start_s <= TIME_EPS
            and segs[0].end_s >= self.duration_s - TIME_EPS
        )


def overlaps(a: TimeInterval, b: TimeInterval) -> bool:
    return a.start_s < b.end_s and b.start_s < a.end_s


def partition_timeline(boundaries: Iterable[float], duration_s: float) -> list[TimeInterval]:
    """Split ``[0, duration_s)`` into consecutive intervals at the given boundaries.

    Endpoints 0 and ``duration_s`` are always included. Boundaries closer than
    ``TIME_EPS`` to an already kept boundary are treated as duplicates.
    """
    if not duration_s > 0:
        raise ValueError(f"duration_s must be > 0, got {duration_s}")
    points = []
    for b in boundaries:
        b = float(b)
        if b < -TIME_EPS or b > duration_s + TIME_EPS:
            raise ValueError(f"boundary {b} outside [0, {duration_s}]")
        points.append(min(max(b, 0.0), duration_s))
    points.sort()

    kept = [0.0]
    for p in points:
        if p - kept[-1] > TIME_EPS:
            kept.append(p)
    if duration_s - kept[-1] > TIME_EPS:
        kept.append(duration_s)
    else:
        kept[-1] = duration_s
    return [TimeInterval(s, e) for s, e in zip(kept[:-1], kept[1:])]


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as half-open index pairs ``(first, stop)``."""
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(s), int(e)) for s, e in zip(edges[0::2], edges[1::2])]


def frame_runs(series: FrameScoreSeries, threshold: float) -> list[tuple[int, int]]:
    """Maximal runs of frames scoring ``>= threshold``, as ``(first, stop)`` index pairs."""
    if len(series) == 0:
        raise ValueError("empty frame score series")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    return _runs(series.as_array() >= threshold)


def frames_to_intervals(series: FrameScoreSeries, threshold: float) -> list[SegmentScore]:
    scores = series.scores
    out = []
    for first, stop in frame_runs(series, threshold):
        conf = math.fsum(scores[first:stop]) / (stop - first)
        out.append(
            SegmentScore(TimeInterval(first / series.fps, stop / series.fps), min(conf, 1.0))
        )
    return out


def frame_index_range(interval: TimeInterval, fps: float, n_frames: int) -> tuple[int, int]:
    """Half-open range of frame indices whose spans overlap ``interval``.

    Times within ``TIME_EPS`` of a frame edge are snapped to it, so intervals
    built from ``k / fps`` arithmetic map to exactly the intended frames.
    """
    first = math.floor(interval.start_s * fps + TIME_EPS)
    stop = math.ceil(interval.end_s * fps - TIME_EPS)
    return max(first, 0), min(max(stop, first + 1), n_frames)


def rasterize(intervals: Iterable[TimeInterval], fps: float, n_frames: int) -> np.ndarray:
    """Binary frame mask: 1 where the frame span overlaps any interval."""
    mask = np.zeros(n_frames, dtype=np.int8)
    for iv in intervals:
        first, stop = frame_index_range(iv, fps, n_frames)
        if first < stop:
            mask[first:stop] = 1
    return mask


def n_frames_for(duration_s: float, fps: float) -> int:
    return max(1, math.ceil(duration_s * fps - TIME_EPS))


def resample_series(series: FrameScoreSeries, target_fps: float) -> FrameScoreSeries:
    """Zero-order-hold resampling by frame-midpoint lookup."""
    if len(series) == 0:
        raise ValueError("empty frame score series")
    if not target_fps > 0:
        raise ValueError(f"target_fps must be > 0, got {target_fps}")
    if target_fps == series.fps:
        return series
    n_out = n_frames_for(series.duration_s, target_fps)
    mid = (np.arange(n_out) + 0.5) / target_fps
    src = np.minimum(np.floor(mid * series.fps).astype(int), len(series) - 1)
    values = series.as_array()[src]
    return FrameScoreSeries(target_fps, tuple(values.tolist()))


def merge_touching(intervals: Sequence[TimeInterval]) -> list[TimeInterval]:
    """Union of intervals; overlapping or touching intervals are joined."""
    ordered = sorted(intervals)
    merged: list[list[float]] = []
    for iv in ordered:
        if merged and iv.start_s <= merged[-1][1] + TIME_EPS:
            merged[-1][1] = max(merged[-1][1], iv.end_s)
        else:
            merged.append([iv.start_s, iv.end_s])
    return [TimeInterval(s, e) for s, e in merged]
