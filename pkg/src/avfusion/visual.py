"""Video-level detection and localization from per-frame visual scores."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import FrameScoreSeries, SegmentScore, frame_runs, frames_to_intervals


@dataclass(frozen=True)
class DetectionConfig:
    """Two-stage detection thresholds.

    ``c1`` bounds the longest fake run and ``c2`` the remaining fake frames,
    both as fractions of the video's frame count. The defaults are
    calibration knobs; nothing fixes their values.
    """

    binarize_threshold: float = 0.5
    c1: float = 0.05
    c2: float = 0.02

    def __post_init__(self) -> None:
        if not 0.0 <= self.binarize_threshold <= 1.0:
            raise ValueError("binarize_threshold must be in [0, 1]")
        if not 0.0 < self.c1 <= 1.0:
            raise ValueError("c1 must be in (0, 1]")
        if not 0.0 < self.c2 < 1.0:
            raise ValueError("c2 must be in (0, 1)")
        if not self.c2 < self.c1:
            raise ValueError(f"c2 ({self.c2}) must be smaller than c1 ({self.c1})")


def detect_video(series: FrameScoreSeries, cfg: DetectionConfig = DetectionConfig()) -> float:
    """Fake-confidence of a whole video from its frame scores.

    Runs of frames at or above ``binarize_threshold`` are ranked by length
    (ties: earlier run first). If the longest run covers at least ``c1`` of
    the frames, its mean score is returned; otherwise, if the other runs
    together cover at least ``c2``, the mean over their frames is returned;
    otherwise the mean over all frames.
    """
    runs = frame_runs(series, cfg.binarize_threshold)
    scores = series.scores
    n = len(scores)
    runs.sort(key=lambda r: (-(r[1] - r[0]), r[0]))

    if runs:
        first, stop = runs[0]
        if stop - first >= n * cfg.c1:
            return math.fsum(scores[first:stop]) / (stop - first)
        rest = runs[1:]
        rest_len = sum(stop - first for first, stop in rest)
        if rest and rest_len >= n * cfg.c2:
            return math.fsum(s for first, stop in rest for s in scores[first:stop]) / rest_len
    return math.fsum(scores) / n


def localize_visual(series: FrameScoreSeries, cfg: DetectionConfig = DetectionConfig()) -> list[SegmentScore]:
    return frames_to_intervals(series, cfg.binarize_threshold)
