"""Command-line entry point: ``avfusion <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 data or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import __version__
from .audio import clip_score, dynamic_label, class_weights, random_crop
from .config import ConfigError, RunConfig, load_config
from .core import FrameScoreSeries, Modality, SegmentScore, TimeInterval, VideoMeta, frames_to_intervals
from .fusion import fuse_detection, fuse_localization
from .metrics import auc, average_precision, average_recall, final_score, ground_truth_segments
from .records import (
    RecordError,
    detection_record,
    dumps,
    meta_from_record,
    meta_to_record,
    prediction_from_record,
    prediction_record,
    read_jsonl,
    segment_from_record,
    segment_record,
    series_from_record,
    series_to_record,
    write_jsonl,
)
from .synth import dataset_stats, render_stats, sample_video, simulate_scores, stable_id_hash, video_rng
from .visual import detect_video, localize_visual

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

META_FILE = "meta.jsonl"
CROPS_FILE = "crops.jsonl"
DETECTIONS_FILE = "detections.jsonl"
LOCALIZATIONS_FILE = "localizations.jsonl"
PREDICTIONS_FILE = "predictions.jsonl"
EVAL_FILE = "eval.json"

_MODALITY_CODE = {Modality.AUDIO: 0, Modality.VISUAL: 1}


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parallel_map(fn: Callable, items: Sequence, jobs: int) -> list:
    """Order-preserving map; output never depends on ``jobs``."""
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# -- I/O helpers ------------------------------------------------------------


def _load_meta(path: Path) -> dict[str, VideoMeta]:
    metas = {}
    for rec in read_jsonl(path):
        meta = meta_from_record(rec)
        if meta.id in metas:
            raise RecordError(f"{path}: duplicate video id {meta.id!r}")
        metas[meta.id] = meta
    return dict(sorted(metas.items()))


def _load_series(path: Path, modality: Modality) -> dict[str, FrameScoreSeries]:
    out = {}
    for rec in read_jsonl(path):
        vid, mod, series = series_from_record(rec)
        if mod is not modality:
            raise RecordError(f"{path}: record {vid!r} has modality {mod.value}, expected {modality.value}")
        out[vid] = series
    return out


def _require(mapping: dict, vid: str, what: str):
    try:
        return mapping[vid]
    except KeyError:
        raise RecordError(f"no {what} for video {vid!r}") from None


def _prepare_out(out: Path) -> Path:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _write(path: Path, records: Iterable[dict]) -> None:
    try:
        write_jsonl(path, records)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def _input(args: argparse.Namespace, name: str, default: str) -> Path:
    value = getattr(args, name, None)
    return Path(value) if value else Path(args.out) / default


# -- workers (top level so process pools can pickle them) -------------------


def _synth_worker(task: tuple[RunConfig, int]) -> tuple[dict, dict, dict]:
    cfg, index = task
    meta = sample_video(cfg.generator, index)
    records = []
    for modality, fps in ((Modality.AUDIO, cfg.fps_audio), (Modality.VISUAL, cfg.fps_visual)):
        seed = (cfg.seed, index, _MODALITY_CODE[modality])
        series = simulate_scores(meta, cfg.model, modality, fps, seed)
        records.append(series_to_record(meta.id, modality, series))
    return meta_to_record(meta), records[0], records[1]


def _detect_worker(task: tuple[RunConfig, VideoMeta, FrameScoreSeries, FrameScoreSeries]) -> dict:
    cfg, meta, audio, visual = task
    audio_score = clip_score(audio, meta.duration_s, cfg.window_s, cfg.stride_s)
    visual_score = detect_video(visual, cfg.detector)
    return detection_record(meta.id, audio_score, visual_score)


def _clamp(segments: list[SegmentScore], duration_s: float) -> list[SegmentScore]:
    """Trim segments to the video; frame grids can overhang the last frame."""
    out = []
    for seg in segments:
        if seg.start_s >= duration_s:
            continue
        end = min(seg.end_s, duration_s)
        out.append(SegmentScore(TimeInterval(seg.start_s, end), seg.confidence))
    return out


def _localize_worker(task: tuple[RunConfig, VideoMeta, FrameScoreSeries, FrameScoreSeries]) -> tuple[dict, dict]:
    cfg, meta, audio, visual = task
    audio_segs = _clamp(frames_to_intervals(audio, cfg.detector.binarize_threshold), meta.duration_s)
    visual_segs = _clamp(localize_visual(visual, cfg.detector), meta.duration_s)
    return (
        segment_record(meta.id, Modality.AUDIO, audio_segs),
        segment_record(meta.id, Modality.VISUAL, visual_segs),
    )


# -- commands ---------------------------------------------------------------


def cmd_synth(args: argparse.Namespace, cfg: RunConfig) -> int:
    out = _prepare_out(Path(args.out))
    n = args.n if args.n is not None else cfg.generator.n_videos
    results = _parallel_map(_synth_worker, [(cfg, i) for i in range(n)], args.jobs)
    results.sort(key=lambda r: r[0]["id"])
    _write(out / META_FILE, (r[0] for r in results))
    _write(out / "scores_audio.jsonl", (r[1] for r in results))
    _write(out / "scores_visual.jsonl", (r[2] for r in results))
    print(f"wrote {n} videos to {out}")
    return EXIT_OK


def cmd_label(args: argparse.Namespace, cfg: RunConfig) -> int:
    metas = _load_meta(_input(args, "meta", META_FILE))
    out = _prepare_out(Path(args.out))
    records, crops = [], []
    for vid, meta in metas.items():
        rng = video_rng(cfg.seed, stable_id_hash(vid))
        for k in range(cfg.crops_per_video):
            spec = random_crop(meta.duration_s, cfg.target_len_s, rng)
            labeled = dynamic_label(meta.audio_label, meta.fake_audio_segments, spec)
            crops.append(labeled)
            records.append(
                {
                    "id": vid,
                    "crop": k,
                    "start": labeled.crop.start_s,
                    "end": labeled.crop.end_s,
                    "tiled": spec.tiled,
                    "label": labeled.label,
                }
            )
    _write(out / CROPS_FILE, records)
    n_fake = sum(c.label for c in crops)
    print(f"crops = {len(crops)}")
    print(f"real = {len(crops) - n_fake}")
    print(f"fake = {n_fake}")
    try:
        w = class_weights(crops)
    except ValueError as exc:
        print(f"class weights unavailable: {exc}", file=sys.stderr)
    else:
        print(f"class_weight_real = {w.class_weight_real:.6f}")
        print(f"class_weight_fake = {w.class_weight_fake:.6f}")
    return EXIT_OK


def _score_tasks(args: argparse.Namespace, cfg: RunConfig) -> list[tuple]:
    metas = _load_meta(_input(args, "meta", META_FILE))
    audio = _load_series(_input(args, "scores_audio", "scores_audio.jsonl"), Modality.AUDIO)
    visual = _load_series(_input(args, "scores_visual", "scores_visual.jsonl"), Modality.VISUAL)
    return [
        (cfg, meta, _require(audio, vid, "audio scores"), _require(visual, vid, "visual scores"))
        for vid, meta in metas.items()
    ]


def cmd_detect(args: argparse.Namespace, cfg: RunConfig) -> int:
    tasks = _score_tasks(args, cfg)
    out = _prepare_out(Path(args.out))
    _write(out / DETECTIONS_FILE, _parallel_map(_detect_worker, tasks, args.jobs))
    return EXIT_OK


def cmd_localize(args: argparse.Namespace, cfg: RunConfig) -> int:
    tasks = _score_tasks(args, cfg)
    out = _prepare_out(Path(args.out))
    pairs = _parallel_map(_localize_worker, tasks, args.jobs)
    _write(out / LOCALIZATIONS_FILE, (rec for pair in pairs for rec in pair))
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace, cfg: RunConfig) -> int:
    metas = _load_meta(_input(args, "meta", META_FILE))
    detections = {}
    for rec in read_jsonl(_input(args, "detections", DETECTIONS_FILE)):
        try:
            detections[str(rec["id"])] = (float(rec["audio_score"]), float(rec["visual_score"]))
        except (KeyError, TypeError, ValueError):
            raise RecordError(f"bad detection record {rec.get('id', '?')!r}") from None
    segments: dict[str, dict[Modality, list[SegmentScore]]] = {}
    for rec in read_jsonl(_input(args, "localizations", LOCALIZATIONS_FILE)):
        vid, modality, segs = segment_from_record(rec)
        segments.setdefault(vid, {})[modality] = segs

    out = _prepare_out(Path(args.out))
    records = []
    for vid, meta in metas.items():
        if vid not in detections and vid not in segments:
            continue
        audio_score, visual_score = _require(detections, vid, "detection scores")
        per_mod = segments.get(vid, {})
        fused = fuse_localization(
            per_mod.get(Modality.AUDIO, []), per_mod.get(Modality.VISUAL, []), meta.duration_s, cfg.fusion
        )
        records.append(prediction_record(vid, fuse_detection(audio_score, visual_score, cfg.fusion), fused))
    _write(out / PREDICTIONS_FILE, records)
    return EXIT_OK


def evaluate(
    metas: dict[str, VideoMeta],
    detection_scores: dict[str, float],
    segments: dict[str, list[SegmentScore]],
    cfg: RunConfig,
) -> dict[str, float]:
    """AUC over scored videos; AP/AR over every video's ground truth."""
    unknown = (set(detection_scores) | set(segments)) - set(metas)
    if unknown:
        raise RecordError(f"predictions for unknown videos: {sorted(unknown)[:5]}")
    ids = sorted(detection_scores)
    auc_val = auc([metas[v].label for v in ids], [detection_scores[v] for v in ids])
    gt = {vid: ground_truth_segments(meta, cfg.ground_truth) for vid, meta in metas.items()}
    ap_val = average_precision(segments, gt, cfg.protocol)
    ar_val = average_recall(segments, gt, cfg.protocol)
    return {
        "AUC": auc_val,
        "AP": ap_val,
        "AR": ar_val,
        "final": final_score(auc_val, ap_val, ar_val, cfg.protocol),
    }


def cmd_eval(args: argparse.Namespace, cfg: RunConfig) -> int:
    metas = _load_meta(_input(args, "meta", META_FILE))
    scores, segments = {}, {}
    for rec in read_jsonl(_input(args, "predictions", PREDICTIONS_FILE)):
        vid, score, segs = prediction_from_record(rec)
        scores[vid] = score
        segments[vid] = segs
    try:
        report = evaluate(metas, scores, segments, cfg)
    except RecordError:
        raise
    except ValueError as exc:
        raise DataError(f"evaluation failed: {exc}") from None
    for key, value in report.items():
        print(f"{key} = {value:.6f}")
    if args.json:
        print(dumps(report))
    out = _prepare_out(Path(args.out))
    try:
        (out / EVAL_FILE).write_text(dumps(report) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {out / EVAL_FILE}: {exc.strerror}") from None
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, cfg: RunConfig) -> int:
    metas = _load_meta(_input(args, "meta", META_FILE))
    try:
        stats = dataset_stats(list(metas.values()))
    except ValueError as exc:
        raise DataError(str(exc)) from None
    print(render_stats(stats))
    if args.json:
        print(dumps(stats.to_dict()))
    return EXIT_OK


COMMANDS = {
    "synth": (cmd_synth, "generate synthetic metadata and frame scores"),
    "label": (cmd_label, "draw training crops and label them from forged segments"),
    "detect": (cmd_detect, "video-level audio and visual detection scores"),
    "localize": (cmd_localize, "per-modality forged segments from frame scores"),
    "fuse": (cmd_fuse, "fuse detection scores and localization segments"),
    "eval": (cmd_eval, "AUC, AP, AR and final score"),
    "stats": (cmd_stats, "category and segment-duration statistics"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (default: $AVFUSION_CONFIG)")
    common.add_argument("--seed", type=int, help="random seed (overrides config)")
    common.add_argument("--out", default=".", help="output directory; also the default input location")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")

    parser = _Parser(prog="avfusion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "synth":
            p.add_argument("-n", type=int, help="number of videos (overrides generator.n_videos)")
        if name in ("label", "detect", "localize", "fuse", "eval", "stats"):
            p.add_argument("--meta", help=f"metadata file (default: OUT/{META_FILE})")
        if name in ("detect", "localize"):
            p.add_argument("--scores-audio", dest="scores_audio", help="default: OUT/scores_audio.jsonl")
            p.add_argument("--scores-visual", dest="scores_visual", help="default: OUT/scores_visual.jsonl")
        if name == "fuse":
            p.add_argument("--detections", help=f"default: OUT/{DETECTIONS_FILE}")
            p.add_argument("--localizations", help=f"default: OUT/{LOCALIZATIONS_FILE}")
        if name == "eval":
            p.add_argument("--predictions", help=f"default: OUT/{PREDICTIONS_FILE}")
        if name in ("eval", "stats"):
            p.add_argument("--json", action="store_true", help="also print a JSON record")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        cfg = load_config(args.config, args.set, args.seed)
    except ConfigError as exc:
        print(f"avfusion: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handler = COMMANDS[args.command][0]
    try:
        return handler(args, cfg)
    except (DataError, RecordError) as exc:
        print(f"avfusion {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"avfusion {args.command}: invalid data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"avfusion {args.command}: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"avfusion {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
