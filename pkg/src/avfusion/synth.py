"""Synthetic datasets and detector scores with configurable category and segment-duration statistics.

Every video draws from its own Philox stream keyed by ``(seed, index)``, so
a dataset is identical however the generation is split across workers.
"""

from __future__ import annotations

import bisect
import itertools
import math
import zlib
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .audio import derive_frame_labels
from .core import (
    CATEGORIES,
    TIME_EPS,
    Category,
    FrameScoreSeries,
    Modality,
    TimeInterval,
    VideoMeta,
    n_frames_for,
)

# Right-closed duration bins (seconds): (0, 0.5], (0.5, 1], (1, 2], (2, inf)
DURATION_BIN_EDGES: tuple[float, ...] = (0.5, 1.0, 2.0)
DURATION_BIN_LABELS: tuple[str, ...] = ("0-0.5", "0.5-1", "1-2", ">2")
LONG_SEGMENT_CAP_S = 4.0
PLACEMENT_RETRIES = 10


def _check_probs(name: str, probs: Sequence[float], size: int) -> tuple[float, ...]:
    probs = tuple(float(p) for p in probs)
    if len(probs) != size:
        raise ValueError(f"{name} needs {size} entries, got {len(probs)}")
    if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
        raise ValueError(f"{name} must be non-negative and sum to 1: {probs}")
    return probs


@dataclass(frozen=True)
class GeneratorConfig:
    n_videos: int = 1000
    seed: int = 0
    category_probs: tuple[float, ...] = (0.34, 0.23, 0.24, 0.19)
    duration_bins_audio: tuple[float, ...] = (0.57, 0.21, 0.14, 0.08)
    duration_bins_visual: tuple[float, ...] = (0.46, 0.25, 0.18, 0.11)
    video_duration_range_s: tuple[float, float] = (4.0, 20.0)
    segments_per_modality_range: tuple[int, int] = (1, 3)
    full_forgery_prob: float = 0.1
    # segment and video boundaries are snapped to this frame grid
    grid_fps: float = 25.0

    def __post_init__(self) -> None:
        if self.n_videos < 0:
            raise ValueError("n_videos must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        object.__setattr__(self, "category_probs", _check_probs("category_probs", self.category_probs, 4))
        object.__setattr__(
            self, "duration_bins_audio", _check_probs("duration_bins_audio", self.duration_bins_audio, 4)
        )
        object.__setattr__(
            self, "duration_bins_visual", _check_probs("duration_bins_visual", self.duration_bins_visual, 4)
        )
        lo, hi = (float(x) for x in self.video_duration_range_s)
        if not 0 < lo <= hi:
            raise ValueError(f"invalid video_duration_range_s: {self.video_duration_range_s}")
        object.__setattr__(self, "video_duration_range_s", (lo, hi))
        smin, smax = (int(x) for x in self.segments_per_modality_range)
        if not 1 <= smin <= smax:
            raise ValueError(f"invalid segments_per_modality_range: {self.segments_per_modality_range}")
        object.__setattr__(self, "segments_per_modality_range", (smin, smax))
        if not 0.0 <= self.full_forgery_prob <= 1.0:
            raise ValueError("full_forgery_prob must be in [0, 1]")
        if not self.grid_fps > 0:
            raise ValueError("grid_fps must be > 0")

    def duration_bins(self, modality: Modality | str) -> tuple[float, ...]:
        if Modality(modality) is Modality.AUDIO:
            return self.duration_bins_audio
        return self.duration_bins_visual


class DetectorMode(str, Enum):
    ORACLE = "oracle"
    NOISY = "noisy"


@dataclass(frozen=True)
class DetectorModel:
    """Stand-in for a trained frame-level detector."""

    mode: DetectorMode = DetectorMode.ORACLE
    real_score_mean: float = 0.1
    fake_score_mean: float = 0.9
    score_noise_scale: float = 0.1
    miss_rate: float = 0.0
    false_alarm_rate: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", DetectorMode(self.mode))
        for name in ("real_score_mean", "fake_score_mean", "miss_rate", "false_alarm_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.score_noise_scale < 0:
            raise ValueError("score_noise_scale must be >= 0")


def video_rng(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def stable_id_hash(video_id: str) -> int:
    return zlib.crc32(video_id.encode("utf-8"))


def _bin_frame_ranges(grid_fps: float, duration_frames: int) -> list[tuple[int, int]]:
    """Inclusive frame-count ranges for each duration bin on the frame grid."""
    edges = [0.0, *DURATION_BIN_EDGES]
    ranges = []
    for lo, hi in zip(edges, edges[1:]):
        ranges.append((math.floor(lo * grid_fps + TIME_EPS) + 1, math.floor(hi * grid_fps + TIME_EPS)))
    lo = ranges[-1][1] + 1
    cap_s = min(LONG_SEGMENT_CAP_S, duration_frames / grid_fps / 2.0)
    hi = max(lo, math.floor(cap_s * grid_fps + TIME_EPS))
    ranges.append((lo, hi))
    return ranges


def _pick(rng: np.random.Generator, probs: Sequence[float]) -> int:
    """Index drawn with the given probabilities."""
    cum = list(itertools.accumulate(probs))
    return min(bisect.bisect_right(cum, rng.random() * cum[-1]), len(cum) - 1)


def _draw_lengths(rng: np.random.Generator, k: int, bins: Sequence[float], ranges) -> list[int]:
    out = []
    for _ in range(k):
        lo, hi = ranges[_pick(rng, bins)]
        out.append(int(rng.integers(lo, hi + 1)))
    return out


def _place(rng: np.random.Generator, lengths: list[int], total: int) -> list[tuple[int, int]]:
    """Uniform random non-touching placement of segments on a frame grid."""
    k = len(lengths)
    slack = total - sum(lengths) - (k - 1)
    cuts = np.sort(rng.integers(0, slack + 1, size=k))
    order = rng.permutation(k)
    spans = []
    cursor = 0
    prev_cut = 0
    for j, seg in enumerate(order):
        cursor += int(cuts[j]) - prev_cut
        prev_cut = int(cuts[j])
        start = cursor
        cursor = start + lengths[seg] + 1
        spans.append((start, start + lengths[seg]))
    return spans


def _forged_segments(
    rng: np.random.Generator, cfg: GeneratorConfig, modality: Modality, n_frames: int
) -> tuple[TimeInterval, ...]:
    fps = cfg.grid_fps
    if rng.random() < cfg.full_forgery_prob:
        return (TimeInterval(0.0, n_frames / fps),)
    smin, smax = cfg.segments_per_modality_range
    k = int(rng.integers(smin, smax + 1))
    bins = cfg.duration_bins(modality)
    ranges = _bin_frame_ranges(fps, n_frames)
    lengths = _draw_lengths(rng, k, bins, ranges)
    for _ in range(PLACEMENT_RETRIES):
        if sum(lengths) + len(lengths) - 1 <= n_frames:
            break
        lengths = _draw_lengths(rng, k, bins, ranges)
    while sum(lengths) + len(lengths) - 1 > n_frames:
        lengths.pop()
        if not lengths:
            return (TimeInterval(0.0, n_frames / fps),)
    spans = _place(rng, lengths, n_frames)
    return tuple(sorted(TimeInterval(s / fps, e / fps) for s, e in spans))


def sample_video(cfg: GeneratorConfig, index: int) -> VideoMeta:
    rng = video_rng(cfg.seed, index)
    category = CATEGORIES[_pick(rng, cfg.category_probs)]
    lo, hi = cfg.video_duration_range_s
    n_frames = max(1, round(rng.uniform(lo, hi) * cfg.grid_fps))
    audio_fake, visual_fake = category.labels
    audio = _forged_segments(rng, cfg, Modality.AUDIO, n_frames) if audio_fake else ()
    visual = _forged_segments(rng, cfg, Modality.VISUAL, n_frames) if visual_fake else ()
    return VideoMeta(
        id=f"vid_{index:07d}",
        duration_s=n_frames / cfg.grid_fps,
        fake_audio_segments=audio,
        fake_visual_segments=visual,
    )


def sample_dataset(cfg: GeneratorConfig) -> list[VideoMeta]:
    return [sample_video(cfg, i) for i in range(cfg.n_videos)]


def simulate_scores(
    meta: VideoMeta,
    model: DetectorModel,
    modality: Modality | str,
    fps: float,
    seed: int | Sequence[int] = 0,
) -> FrameScoreSeries:
    """Frame scores a detector of the given quality would emit for ``meta``.

    Noisy mode decides per run of constant ground truth whether the detector
    gets that run wrong (``miss_rate`` on fake runs, ``false_alarm_rate`` on
    real runs), then adds clipped Gaussian noise around the chosen class mean.
    """
    if not fps > 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    modality = Modality(modality)
    n = n_frames_for(meta.duration_s, fps)
    truth = derive_frame_labels(meta.segments(modality), fps, n)
    if model.mode is DetectorMode.ORACLE:
        return FrameScoreSeries(fps, tuple(truth.astype(float).tolist()))

    key = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    rng = video_rng(*key)
    means = np.empty(n, dtype=float)
    change = np.flatnonzero(np.diff(truth)) + 1
    for first, stop in zip(np.r_[0, change], np.r_[change, n]):
        fake = bool(truth[first])
        flip = rng.random() < (model.miss_rate if fake else model.false_alarm_rate)
        means[first:stop] = model.fake_score_mean if fake != flip else model.real_score_mean
    noise = rng.normal(0.0, 1.0, size=n) * model.score_noise_scale
    return FrameScoreSeries(fps, tuple(np.clip(means + noise, 0.0, 1.0).tolist()))


@dataclass
class DatasetStats:
    n_videos: int
    category_counts: dict[str, int]
    # per modality: counts per duration bin, partial-forgery segments only
    duration_histograms: dict[str, list[int]]
    fully_forged: dict[str, int] = field(default_factory=dict)

    @property
    def category_proportions(self) -> dict[str, float]:
        return {k: v / self.n_videos for k, v in self.category_counts.items()}

    def duration_proportions(self, modality: str) -> list[float]:
        hist = self.duration_histograms[modality]
        total = sum(hist)
        return [c / total for c in hist] if total else [0.0] * len(hist)

    def to_dict(self) -> dict:
        return {
            "n_videos": self.n_videos,
            "category_counts": dict(self.category_counts),
            "category_proportions": self.category_proportions,
            "duration_bins": list(DURATION_BIN_LABELS),
            "duration_histograms": {k: list(v) for k, v in self.duration_histograms.items()},
            "fully_forged": dict(self.fully_forged),
        }


def duration_bin(length_s: float) -> int:
    for i, edge in enumerate(DURATION_BIN_EDGES):
        if length_s <= edge + TIME_EPS:
            return i
    return len(DURATION_BIN_EDGES)


def dataset_stats(metas: Sequence[VideoMeta]) -> DatasetStats:
    """Category counts and forged-segment duration histograms.

    Fully forged modalities are counted separately and kept out of the
    duration histograms, which describe partial forgeries only.
    """
    if not metas:
        raise ValueError("no videos to summarize")
    counts = Counter(m.category for m in metas)
    hists = {m.value: [0] * 4 for m in Modality}
    full = {m.value: 0 for m in Modality}
    for meta in metas:
        for modality in Modality:
            if meta.is_fully_forged(modality):
                full[modality.value] += 1
                continue
            for seg in meta.segments(modality):
                hists[modality.value][duration_bin(seg.length)] += 1
    return DatasetStats(
        n_videos=len(metas),
        category_counts={c.value: counts.get(c, 0) for c in CATEGORIES},
        duration_histograms=hists,
        fully_forged=full,
    )


def render_stats(stats: DatasetStats) -> str:
    lines = [f"videos: {stats.n_videos}", "", f"{'category':<26}{'count':>10}{'proportion':>12}"]
    for name, count in stats.category_counts.items():
        lines.append(f"{name:<26}{count:>10}{100 * count / stats.n_videos:>11.1f}%")
    lines += ["", f"{'segment duration (s)':<22}{'audio':>14}{'visual':>14}"]
    audio = stats.duration_histograms["audio"]
    visual = stats.duration_histograms["visual"]
    pa = stats.duration_proportions("audio")
    pv = stats.duration_proportions("visual")
    for i, label in enumerate(DURATION_BIN_LABELS):
        lines.append(
            f"{label:<22}{audio[i]:>7} {100 * pa[i]:>5.1f}%{visual[i]:>7} {100 * pv[i]:>5.1f}%"
        )
    lines += [
        "",
        f"fully forged: audio {stats.fully_forged.get('audio', 0)}, "
        f"visual {stats.fully_forged.get('visual', 0)}",
    ]
    return "\n".join(lines)
