"""Audio-branch processing around the detector and localizer networks.

Covers crop labeling for training, class reweighting, sliding-window clip
scoring at inference, frame/boundary label derivation and the joint
frame + boundary loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import TIME_EPS, FrameScoreSeries, TimeInterval, frame_index_range, overlaps, rasterize

BCE_EPS = 1e-7


@dataclass(frozen=True)
class CropSpec:
    source_duration_s: float
    target_len_s: float
    crop: TimeInterval

    @property
    def tiled(self) -> bool:
        """True when the source was shorter than the crop and got repeated."""
        return self.source_duration_s < self.target_len_s


@dataclass(frozen=True)
class LabeledCrop:
    crop: TimeInterval
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class FrameLabels:
    fps: float
    authenticity: np.ndarray
    boundary: np.ndarray

    def __post_init__(self) -> None:
        if len(self.authenticity) != len(self.boundary):
            raise ValueError("authenticity and boundary labels differ in length")


@dataclass(frozen=True)
class LossWeights:
    lambda_boundary: float = 0.5
    class_weight_real: float = 1.0
    class_weight_fake: float = 1.0

    def __post_init__(self) -> None:
        if self.lambda_boundary < 0:
            raise ValueError("lambda_boundary must be >= 0")
        if self.class_weight_real <= 0 or self.class_weight_fake <= 0:
            raise ValueError("class weights must be > 0")


def _snap(t: float) -> float:
    # keeps offset + length arithmetic equal to the decimal the caller meant
    return round(t, 9)


def pad_and_crop(source_duration_s: float, target_len_s: float, offset_s: float = 0.0) -> CropSpec:
    """Choose a ``target_len_s`` window from the source audio.

    Sources shorter than the target are tiled from offset 0 and the first
    ``target_len_s`` seconds are taken, so the crop is always ``[0, T]``.
    """
    if not target_len_s > 0:
        raise ValueError(f"target_len_s must be > 0, got {target_len_s}")
    if not source_duration_s > 0:
        raise ValueError(f"source_duration_s must be > 0, got {source_duration_s}")
    if source_duration_s < target_len_s:
        return CropSpec(source_duration_s, target_len_s, TimeInterval(0.0, target_len_s))
    max_offset = source_duration_s - target_len_s
    if offset_s < -TIME_EPS or offset_s > max_offset + TIME_EPS:
        raise ValueError(f"offset_s {offset_s} outside [0, {max_offset}]")
    start = _snap(min(max(offset_s, 0.0), max_offset))
    return CropSpec(source_duration_s, target_len_s, TimeInterval(start, _snap(start + target_len_s)))


def random_crop(source_duration_s: float, target_len_s: float, rng: np.random.Generator) -> CropSpec:
    """``pad_and_crop`` with the offset drawn uniformly from ``rng``."""
    max_offset = max(0.0, source_duration_s - target_len_s)
    return pad_and_crop(source_duration_s, target_len_s, float(rng.uniform(0.0, max_offset)))


def dynamic_label(label: int, forged: Sequence[TimeInterval], crop: CropSpec) -> LabeledCrop:
    """Reassign a crop's label from its overlap with the forged intervals."""
    for seg in forged:
        if seg.end_s > crop.source_duration_s + TIME_EPS:
            raise ValueError(
                f"forged interval {seg.as_pair()} outside [0, {crop.source_duration_s}]"
            )
    if not forged:
        return LabeledCrop(crop.crop, int(label))
    if crop.tiled:
        # every forged sample survives the repetition
        return LabeledCrop(crop.crop, 1)
    for seg in forged:
        if overlaps(crop.crop, seg):
            return LabeledCrop(crop.crop, 1)
    return LabeledCrop(crop.crop, 0)


def class_weights(labeled_crops: Sequence[LabeledCrop], lambda_boundary: float = 0.5) -> LossWeights:
    """Inverse-frequency class weights, rescaled so the two weights average to 1."""
    n_fake = sum(1 for c in labeled_crops if c.label == 1)
    n_real = len(labeled_crops) - n_fake
    if n_fake == 0 or n_real == 0:
        raise ValueError(f"degenerate batch: {n_real} real / {n_fake} fake crops")
    total = n_real + n_fake
    return LossWeights(
        lambda_boundary=lambda_boundary,
        class_weight_real=2.0 * n_fake / total,
        class_weight_fake=2.0 * n_real / total,
    )


def sliding_windows(duration_s: float, window_s: float = 2.0, stride_s: float = 1.0) -> list[TimeInterval]:
    """Inference windows over a clip.

    A trailing remainder gets one extra window ending at ``duration_s`` and
    back-extended over preceding audio. Clips shorter than ``window_s`` yield
    the single window ``[0, duration_s]``, which is shorter than ``window_s``
    and has to be tiled before scoring.
    """
    if not duration_s > 0:
        raise ValueError(f"duration_s must be > 0, got {duration_s}")
    if not window_s > 0:
        raise ValueError(f"window_s must be > 0, got {window_s}")
    if not 0 < stride_s <= window_s:
        raise ValueError(f"stride_s must be in (0, window_s], got {stride_s}")

    if duration_s < window_s - TIME_EPS:
        return [TimeInterval(0.0, duration_s)]
    n_full = math.floor((duration_s - window_s) / stride_s + TIME_EPS) + 1
    windows = [
        TimeInterval(_snap(k * stride_s), _snap(k * stride_s + window_s)) for k in range(n_full)
    ]
    if duration_s - windows[-1].end_s > TIME_EPS:
        windows.append(TimeInterval(_snap(duration_s - window_s), duration_s))
    return windows


def aggregate_max(window_scores: Sequence[float]) -> float:
    if len(window_scores) == 0:
        raise ValueError("no window scores to aggregate")
    return float(max(window_scores))


def window_scores(series: FrameScoreSeries, windows: Sequence[TimeInterval]) -> list[float]:
    """Score each window as the max frame score over the frames it overlaps.

    Stands in for the clip-level detector: a window trained with dynamic
    labels is fake iff it overlaps forged content.
    """
    scores = series.as_array()
    out = []
    for w in windows:
        first, stop = frame_index_range(w, series.fps, len(scores))
        if first >= stop:
            first, stop = len(scores) - 1, len(scores)
        out.append(float(scores[first:stop].max()))
    return out


def clip_score(
    series: FrameScoreSeries,
    duration_s: float | None = None,
    window_s: float = 2.0,
    stride_s: float = 1.0,
) -> float:
    """Video-level audio score: sliding windows, then max-pooling."""
    if duration_s is None:
        duration_s = series.duration_s
    windows = sliding_windows(duration_s, window_s, stride_s)
    return aggregate_max(window_scores(series, windows))


def derive_frame_labels(forged: Sequence[TimeInterval], fps: float, n_frames: int) -> np.ndarray:
    if not fps > 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    return rasterize(forged, fps, n_frames)


def derive_boundary_labels(authenticity: Sequence[int]) -> np.ndarray:
    """Mark both frames on either side of every real/fake transition."""
    y = np.asarray(authenticity, dtype=np.int8)
    if y.size == 0:
        raise ValueError("empty authenticity vector")
    change = y[1:] != y[:-1]
    boundary = np.zeros(y.size, dtype=np.int8)
    boundary[1:][change] = 1
    boundary[:-1][change] = 1
    return boundary


def frame_labels(forged: Sequence[TimeInterval], fps: float, n_frames: int) -> FrameLabels:
    y = derive_frame_labels(forged, fps, n_frames)
    return FrameLabels(fps, y, derive_boundary_labels(y))


def _bce(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    p = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def joint_loss(
    y_hat: Sequence[float],
    Y: Sequence[int],
    b_hat: Sequence[float],
    B: Sequence[int],
    weights: LossWeights = LossWeights(),
) -> float:
    """Frame authenticity loss plus ``lambda_boundary`` times the boundary loss.

    The authenticity term is class-weighted BCE averaged over frames; the
    boundary term is unweighted mean BCE.
    """
    y_hat, Y = np.asarray(y_hat, dtype=float), np.asarray(Y, dtype=float)
    b_hat, B = np.asarray(b_hat, dtype=float), np.asarray(B, dtype=float)
    if y_hat.shape != Y.shape or b_hat.shape != B.shape:
        raise ValueError("prediction and label vectors differ in length")
    if y_hat.size == 0 or b_hat.size == 0:
        raise ValueError("empty loss inputs")
    w = np.where(Y > 0.5, weights.class_weight_fake, weights.class_weight_real)
    loss_s = float(np.mean(w * _bce(y_hat, Y)))
    loss_b = float(np.mean(_bce(b_hat, B)))
    return loss_s + weights.lambda_boundary * loss_b
