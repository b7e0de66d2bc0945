"""Run configuration: flat ``key = value`` files with dotted, namespaced keys.

Example::

    # detector thresholds
    detector.c1 = 0.05
    eval.iou_thresholds = 0.5, 0.75
    generator.category_probs = 0.34, 0.23, 0.24, 0.19

Unknown keys are rejected. Absent keys keep their defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .fusion import FusionConfig
from .metrics import EvalProtocol, GroundTruthMode
from .synth import DetectorModel, GeneratorConfig
from .visual import DetectionConfig

CONFIG_ENV_VAR = "AVFUSION_CONFIG"


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _str(text: str) -> str:
    return text.strip().strip('"').strip("'")


# key -> (section, attribute, parser)
_KEYS: dict[str, tuple[str, str, Callable[[str], object]]] = {
    "seed": ("run", "seed", int),
    "detector.binarize_threshold": ("detector", "binarize_threshold", float),
    "detector.c1": ("detector", "c1", float),
    "detector.c2": ("detector", "c2", float),
    "fusion.decision_threshold": ("fusion", "decision_threshold", float),
    "fusion.merge_epsilon": ("fusion", "merge_epsilon", float),
    "fusion.report_threshold": ("fusion", "report_threshold", float),
    "eval.iou_thresholds": ("eval", "iou_thresholds", _floats),
    "eval.final_score_rule": ("eval", "final_score_rule", _str),
    "eval.ground_truth": ("run", "ground_truth", _str),
    "audio.window_s": ("run", "window_s", float),
    "audio.stride_s": ("run", "stride_s", float),
    "label.target_len_s": ("run", "target_len_s", float),
    "label.crops_per_video": ("run", "crops_per_video", int),
    "generator.n_videos": ("generator", "n_videos", int),
    "generator.category_probs": ("generator", "category_probs", _floats),
    "generator.duration_bins_audio": ("generator", "duration_bins_audio", _floats),
    "generator.duration_bins_visual": ("generator", "duration_bins_visual", _floats),
    "generator.video_duration_range_s": ("generator", "video_duration_range_s", _floats),
    "generator.segments_per_modality_range": ("generator", "segments_per_modality_range", _ints),
    "generator.full_forgery_prob": ("generator", "full_forgery_prob", float),
    "generator.grid_fps": ("generator", "grid_fps", float),
    "generator.fps_audio": ("run", "fps_audio", float),
    "generator.fps_visual": ("run", "fps_visual", float),
    "generator.detector_mode": ("model", "mode", _str),
    "generator.real_score_mean": ("model", "real_score_mean", float),
    "generator.fake_score_mean": ("model", "fake_score_mean", float),
    "generator.score_noise_scale": ("model", "score_noise_scale", float),
    "generator.miss_rate": ("model", "miss_rate", float),
    "generator.false_alarm_rate": ("model", "false_alarm_rate", float),
}

KNOWN_KEYS = tuple(sorted(_KEYS))


@dataclass(frozen=True)
class RunConfig:
    detector: DetectionConfig = field(default_factory=DetectionConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    protocol: EvalProtocol = field(default_factory=EvalProtocol)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    model: DetectorModel = field(default_factory=DetectorModel)
    seed: int = 0
    ground_truth: GroundTruthMode = GroundTruthMode.POOLED
    fps_audio: float = 25.0
    fps_visual: float = 25.0
    window_s: float = 2.0
    stride_s: float = 1.0
    target_len_s: float = 2.0
    crops_per_video: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "ground_truth", GroundTruthMode(self.ground_truth))
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.fps_audio <= 0 or self.fps_visual <= 0:
            raise ConfigError("frame rates must be > 0")
        if not 0 < self.stride_s <= self.window_s:
            raise ConfigError("audio.stride_s must be in (0, audio.window_s]")
        if self.target_len_s <= 0 or self.crops_per_video < 1:
            raise ConfigError("label.target_len_s must be > 0 and label.crops_per_video >= 1")


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    values = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = value
    return values


def build_config(values: Mapping[str, str]) -> RunConfig:
    sections: dict[str, dict[str, object]] = {
        name: {} for name in ("run", "detector", "fusion", "eval", "generator", "model")
    }
    for key, text in values.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        section, attr, parse = _KEYS[key]
        try:
            sections[section][attr] = parse(text)
        except ValueError:
            raise ConfigError(f"cannot parse {key} = {text!r}") from None

    run = sections["run"]
    seed = int(run.get("seed", 0))
    try:
        return RunConfig(
            detector=DetectionConfig(**sections["detector"]),
            fusion=FusionConfig(**sections["fusion"]),
            protocol=EvalProtocol(**sections["eval"]),
            generator=replace(GeneratorConfig(**sections["generator"]), seed=seed),
            model=DetectorModel(**sections["model"]),
            **run,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(
    path: str | Path | None = None,
    overrides: Iterable[str] = (),
    seed: int | None = None,
) -> RunConfig:
    """Resolve config: file (or ``$AVFUSION_CONFIG``), then ``--set`` overrides, then ``--seed``."""
    values: dict[str, str] = {}
    path = path or os.environ.get(CONFIG_ENV_VAR) or None
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        values.update(parse_config_text(text, str(path)))
    values.update(parse_overrides(overrides))
    if seed is not None:
        values["seed"] = str(seed)
    return build_config(values)
