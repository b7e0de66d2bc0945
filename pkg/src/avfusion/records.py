"""JSONL record formats exchanged between pipeline stages.

Files are UTF-8, one JSON object per line, sorted by video id. Floats are
written with at most 9 significant digits.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .core import Category, FrameScoreSeries, Modality, SegmentScore, TimeInterval, VideoMeta


class RecordError(ValueError):
    """A record is malformed or inconsistent."""


def _num(x: float) -> float | int:
    if isinstance(x, int):
        return x
    return float(f"{float(x):.9g}")


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def dumps(record: dict) -> str:
    return json.dumps(_round_floats(record), ensure_ascii=False, separators=(", ", ": "))


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps(rec))
            fh.write("\n")


def read_jsonl(path: str | Path) -> Iterator[dict]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise RecordError(f"{path}:{lineno}: expected a JSON object")
            yield rec


def _field(rec: dict, key: str) -> Any:
    try:
        return rec[key]
    except KeyError:
        raise RecordError(f"record {rec.get('id', '?')!r} is missing {key!r}") from None


# -- metadata ---------------------------------------------------------------


def meta_to_record(meta: VideoMeta) -> dict:
    return {
        "id": meta.id,
        "duration_s": meta.duration_s,
        "category": meta.category.value,
        "fake_audio_segments": [list(s.as_pair()) for s in meta.fake_audio_segments],
        "fake_visual_segments": [list(s.as_pair()) for s in meta.fake_visual_segments],
    }


def meta_from_record(rec: dict) -> VideoMeta:
    try:
        meta = VideoMeta(
            id=str(_field(rec, "id")),
            duration_s=float(_field(rec, "duration_s")),
            fake_audio_segments=tuple(TimeInterval(float(s), float(e)) for s, e in rec.get("fake_audio_segments", [])),
            fake_visual_segments=tuple(TimeInterval(float(s), float(e)) for s, e in rec.get("fake_visual_segments", [])),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RecordError):
            raise
        raise RecordError(f"bad metadata record {rec.get('id', '?')!r}: {exc}") from None
    if "category" in rec and Category(rec["category"]) is not meta.category:
        raise RecordError(
            f"{meta.id}: category {rec['category']!r} contradicts segments ({meta.category.value})"
        )
    return meta


# -- frame scores -----------------------------------------------------------


def series_to_record(video_id: str, modality: Modality | str, series: FrameScoreSeries) -> dict:
    return {
        "id": video_id,
        "modality": Modality(modality).value,
        "fps": series.fps,
        "scores": list(series.scores),
    }


def series_from_record(rec: dict) -> tuple[str, Modality, FrameScoreSeries]:
    try:
        return (
            str(_field(rec, "id")),
            Modality(_field(rec, "modality")),
            FrameScoreSeries(float(_field(rec, "fps")), tuple(float(s) for s in _field(rec, "scores"))),
        )
    except RecordError:
        raise
    except (TypeError, ValueError) as exc:
        raise RecordError(f"bad score record {rec.get('id', '?')!r}: {exc}") from None


# -- segments ---------------------------------------------------------------


def segments_to_json(segments: Iterable[SegmentScore]) -> list[dict]:
    return [{"start": s.start_s, "end": s.end_s, "score": s.confidence} for s in segments]


def segments_from_json(items: Iterable[dict]) -> list[SegmentScore]:
    return [
        SegmentScore(TimeInterval(float(d["start"]), float(d["end"])), float(d["score"]))
        for d in items
    ]


def segment_record(video_id: str, modality: Modality | str, segments: Iterable[SegmentScore]) -> dict:
    return {"id": video_id, "modality": Modality(modality).value, "segments": segments_to_json(segments)}


def segment_from_record(rec: dict) -> tuple[str, Modality, list[SegmentScore]]:
    try:
        return (
            str(_field(rec, "id")),
            Modality(_field(rec, "modality")),
            segments_from_json(_field(rec, "segments")),
        )
    except RecordError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordError(f"bad segment record {rec.get('id', '?')!r}: {exc}") from None


def detection_record(video_id: str, audio_score: float, visual_score: float) -> dict:
    return {"id": video_id, "audio_score": audio_score, "visual_score": visual_score}


def prediction_record(video_id: str, detection_score: float, segments: Iterable[SegmentScore]) -> dict:
    return {"id": video_id, "detection_score": detection_score, "segments": segments_to_json(segments)}


def prediction_from_record(rec: dict) -> tuple[str, float, list[SegmentScore]]:
    try:
        return (
            str(_field(rec, "id")),
            float(_field(rec, "detection_score")),
            segments_from_json(rec.get("segments", [])),
        )
    except RecordError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordError(f"bad prediction record {rec.get('id', '?')!r}: {exc}") from None
