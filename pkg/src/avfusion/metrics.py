"""Detection AUC, temporal-localization AP/AR and the combined score."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .core import SegmentScore, TimeInterval, VideoMeta, merge_touching

DEFAULT_IOU_THRESHOLDS: tuple[float, ...] = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


class FinalScoreRule(str, Enum):
    MEAN_OF_THREE = "mean_of_three"
    MEAN_OF_DET_AND_LOC = "mean_of_det_and_loc"


class GroundTruthMode(str, Enum):
    POOLED = "pooled"
    AUDIO = "audio"
    VISUAL = "visual"


@dataclass(frozen=True)
class EvalProtocol:
    iou_thresholds: tuple[float, ...] = DEFAULT_IOU_THRESHOLDS
    final_score_rule: FinalScoreRule = FinalScoreRule.MEAN_OF_THREE

    def __post_init__(self) -> None:
        th = tuple(float(t) for t in self.iou_thresholds)
        if not th:
            raise ValueError("at least one IoU threshold is required")
        if any(not 0.0 < t <= 1.0 for t in th):
            raise ValueError(f"IoU thresholds must lie in (0, 1]: {th}")
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError(f"IoU thresholds must be strictly increasing: {th}")
        object.__setattr__(self, "iou_thresholds", th)
        object.__setattr__(self, "final_score_rule", FinalScoreRule(self.final_score_rule))


def auc(labels: Sequence[int], scores: Sequence[float]) -> float:
    """ROC AUC as the Mann-Whitney statistic, ties counted half.

    Uses midranks, so it is O(n log n) and exact for tied scores.
    """
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=float)
    if y.shape != s.shape:
        raise ValueError("labels and scores differ in length")
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = int(np.count_nonzero(y == 0))
    if n_pos + n_neg != y.size:
        raise ValueError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise ValueError(f"AUC needs both classes, got {n_pos} positive / {n_neg} negative")

    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    ranks = np.empty(s.size, dtype=float)
    # average rank within each block of tied scores
    starts = np.flatnonzero(np.r_[True, sorted_s[1:] != sorted_s[:-1]])
    stops = np.r_[starts[1:], s.size]
    midranks = (starts + stops + 1) / 2.0
    ranks[order] = np.repeat(midranks, stops - starts)

    # rank sums are half-integers, so this stays exact in float64
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def interval_iou(a: TimeInterval, b: TimeInterval) -> float:
    inter = a.intersection_length(b)
    if inter <= 0.0:
        return 0.0
    union = a.length + b.length - inter
    return min(1.0, inter / union)


def ground_truth_segments(
    meta: VideoMeta, mode: GroundTruthMode | str = GroundTruthMode.POOLED
) -> list[TimeInterval]:
    """Forged segments to localize for one video.

    Pooled mode takes the union of audio and visual forgeries, joining any
    that overlap or touch, since fused predictions carry no modality.
    """
    mode = GroundTruthMode(mode)
    if mode is GroundTruthMode.AUDIO:
        return list(meta.fake_audio_segments)
    if mode is GroundTruthMode.VISUAL:
        return list(meta.fake_visual_segments)
    return merge_touching([*meta.fake_audio_segments, *meta.fake_visual_segments])


def _ranked_predictions(
    predictions: Mapping[str, Sequence[SegmentScore]],
    ground_truth: Mapping[str, Sequence[TimeInterval]],
) -> list[tuple[str, SegmentScore]]:
    unknown = set(predictions) - set(ground_truth)
    if unknown:
        raise ValueError(f"predictions for videos without ground truth: {sorted(unknown)[:5]}")
    if not any(len(g) for g in ground_truth.values()):
        raise ValueError("no ground-truth segments to evaluate against")
    flat = [(vid, seg) for vid, segs in predictions.items() for seg in segs]
    # confidence descending; ties resolved by position so results do not
    # depend on dict order
    flat.sort(key=lambda p: (-p[1].confidence, p[0], p[1].start_s, p[1].end_s))
    return flat


def match_predictions(
    ranked: Sequence[tuple[str, SegmentScore]],
    ground_truth: Mapping[str, Sequence[TimeInterval]],
    threshold: float,
) -> np.ndarray:
    """Greedy one-to-one matching in rank order; returns the true-positive flags.

    Each prediction takes the unmatched ground-truth segment of its video with
    the highest IoU, provided that IoU reaches ``threshold``.
    """
    used = {vid: [False] * len(g) for vid, g in ground_truth.items()}
    tp = np.zeros(len(ranked), dtype=bool)
    for k, (vid, seg) in enumerate(ranked):
        best, best_iou = -1, threshold
        for j, gt in enumerate(ground_truth[vid]):
            if used[vid][j]:
                continue
            iou = interval_iou(seg.interval, gt)
            if iou >= best_iou and (best < 0 or iou > best_iou):
                best, best_iou = j, iou
        if best >= 0:
            used[vid][best] = True
            tp[k] = True
    return tp


def _interpolated_ap(tp: np.ndarray, n_gt: int) -> float:
    if tp.size == 0:
        return 0.0
    tp_cum = np.cumsum(tp)
    fp_cum = np.cumsum(~tp)
    recall = tp_cum / n_gt
    precision = tp_cum / (tp_cum + fp_cum)
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    steps = np.flatnonzero(mrec[1:] != mrec[:-1]) + 1
    return float(np.sum((mrec[steps] - mrec[steps - 1]) * mpre[steps]))


def average_precision(
    predictions: Mapping[str, Sequence[SegmentScore]],
    ground_truth: Mapping[str, Sequence[TimeInterval]],
    protocol: EvalProtocol = EvalProtocol(),
) -> float:
    """All-point interpolated AP, averaged over the protocol's IoU thresholds."""
    ranked = _ranked_predictions(predictions, ground_truth)
    n_gt = sum(len(g) for g in ground_truth.values())
    aps = [
        _interpolated_ap(match_predictions(ranked, ground_truth, t), n_gt)
        for t in protocol.iou_thresholds
    ]
    return float(np.mean(aps))


def average_recall(
    predictions: Mapping[str, Sequence[SegmentScore]],
    ground_truth: Mapping[str, Sequence[TimeInterval]],
    protocol: EvalProtocol = EvalProtocol(),
) -> float:
    ranked = _ranked_predictions(predictions, ground_truth)
    n_gt = sum(len(g) for g in ground_truth.values())
    recalls = [
        int(match_predictions(ranked, ground_truth, t).sum()) / n_gt
        for t in protocol.iou_thresholds
    ]
    return float(np.mean(recalls))


def final_score(
    auc_val: float, ap_val: float, ar_val: float, protocol: EvalProtocol = EvalProtocol()
) -> float:
    if protocol.final_score_rule is FinalScoreRule.MEAN_OF_THREE:
        return (auc_val + ap_val + ar_val) / 3.0
    return (auc_val + (ap_val + ar_val) / 2.0) / 2.0
