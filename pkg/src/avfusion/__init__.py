"""Post-detector pipeline for audio-visual deepfake detection and temporal localization."""

from .audio import (
    LossWeights,
    class_weights,
    clip_score,
    dynamic_label,
    frame_labels,
    joint_loss,
    pad_and_crop,
    sliding_windows,
)
from .core import (
    Category,
    FrameScoreSeries,
    Modality,
    SegmentScore,
    TimeInterval,
    VideoMeta,
    frames_to_intervals,
    overlaps,
    partition_timeline,
    resample_series,
)
from .fusion import FusionConfig, fuse_detection, fuse_localization
from .metrics import EvalProtocol, auc, average_precision, average_recall, final_score, interval_iou
from .synth import DetectorModel, GeneratorConfig, dataset_stats, sample_dataset, simulate_scores
from .visual import DetectionConfig, detect_video, localize_visual

__version__ = "0.1.0"

__all__ = [
    "Category",
    "DetectionConfig",
    "DetectorModel",
    "EvalProtocol",
    "FrameScoreSeries",
    "FusionConfig",
    "GeneratorConfig",
    "LossWeights",
    "Modality",
    "SegmentScore",
    "TimeInterval",
    "VideoMeta",
    "auc",
    "average_precision",
    "average_recall",
    "class_weights",
    "clip_score",
    "dataset_stats",
    "detect_video",
    "dynamic_label",
    "final_score",
    "frame_labels",
    "frames_to_intervals",
    "fuse_detection",
    "fuse_localization",
    "interval_iou",
    "joint_loss",
    "localize_visual",
    "overlaps",
    "pad_and_crop",
    "partition_timeline",
    "resample_series",
    "sample_dataset",
    "simulate_scores",
    "sliding_windows",
]
