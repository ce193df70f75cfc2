"""Pipeline orchestration: stages as subcommands over one config file.

Usage:
    refinery <stage> --config pipeline.yaml [--workers N] [--input PATH]
                     [--output DIR] [--set KEY=VALUE ...]

Stages: lid, dedup, score, package, analyze, eval-agg, all. Every stage
reads and writes the common JSONL document schema, so stages compose; each
writes its outputs atomically (temp file + rename) plus a JSON run report.
The REFINERY_LOG environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import zstdio
from .analytics import analyze_corpus, render_report
from .config import ConfigError, PipelineConfig, load_config, resolve
from .dedup import dedup
from .documents import Corpus, Document, read_documents, serialize_document
from .evalagg import (
    GridError,
    language_score,
    load_grid,
    multilingual_scores,
    render_ranking,
    select_tasks,
)
from .lid import NgramLanguageClassifier, classify, profile_segments
from .packaging import package_corpus
from .stopwords import get_stopwords, load_stopword_file
from .wds import filter_by_level, score_document

logger = logging.getLogger(__name__)

DOCUMENT_STAGES = ("lid", "dedup", "score", "package", "analyze")


class StageError(Exception):
    pass


def _write_bytes_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def _write_docs_atomic(docs: Iterable[Document], path: Path, level: int = 9) -> None:
    payload = "".join(serialize_document(d) + "\n" for d in docs).encode("utf-8")
    if path.suffix == ".zst":
        payload = zstdio.compress(payload, level)
    _write_bytes_atomic(path, payload)


def _write_json_atomic(obj, path: Path) -> None:
    _write_bytes_atomic(
        path, (json.dumps(obj, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    )


def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _load_classifier(config: PipelineConfig, base: Path) -> NgramLanguageClassifier | None:
    if config.lid.classifier_path:
        return NgramLanguageClassifier.load(resolve(config.lid.classifier_path, base))
    if config.lid.seed_texts:
        seeds = {
            label: resolve(path, base).read_text(encoding="utf-8")
            for label, path in config.lid.seed_texts.items()
        }
        return NgramLanguageClassifier.train(seeds)
    return None


def stage_lid(
    config: PipelineConfig, base: Path, workers: int, input_path: Path, out_dir: Path
) -> dict:
    docs = read_documents(input_path)
    ids = [d.id for d in docs]
    if len(set(ids)) != len(ids):
        raise StageError(f"input {input_path} contains duplicate document ids")
    model = _load_classifier(config, base)
    if model is None:
        raise StageError(
            "lid stage needs lid.classifier_path or lid.seed_texts in the config"
        )

    def process(doc: Document):
        pred = classify(doc.text, model)
        if pred.label != config.language or pred.confidence < config.lid.min_confidence:
            return None, doc.replace(removed_reason="lid_rejected")
        relabeled = doc.replace(lang=config.language)
        profile = profile_segments(relabeled, model)
        return relabeled.replace(seg_langs=profile.seg_langs), None

    results = _pmap(process, docs, workers)
    kept = [k for k, _ in results if k is not None]
    rejected = [r for _, r in results if r is not None]
    _write_docs_atomic(kept, out_dir / "documents.jsonl")
    if rejected:
        _write_docs_atomic(rejected, out_dir / "removed.jsonl")
    return {
        "input_documents": len(docs),
        "output_documents": len(kept),
        "removals": {"lid_rejected": len(rejected)} if rejected else {},
    }


def stage_dedup(
    config: PipelineConfig, base: Path, workers: int, input_path: Path, out_dir: Path
) -> dict:
    docs = read_documents(input_path)
    corpus = Corpus(docs, config.language)
    result = dedup(corpus, config.dedup, workers=workers)
    _write_docs_atomic(result.retained.documents, out_dir / "documents.jsonl")
    log_lines = "".join(
        json.dumps(rec.to_json(), ensure_ascii=False) + "\n" for rec in result.removals
    )
    _write_bytes_atomic(out_dir / "removal_log.jsonl", log_lines.encode("utf-8"))
    return {
        "input_documents": len(docs),
        "output_documents": len(result.retained),
        "removals": {"duplicate": len(result.removals)} if result.removals else {},
    }


def _segment_profile_fraction(doc: Document) -> float:
    if not doc.seg_langs:
        return 0.0
    return sum(1 for label in doc.seg_langs if label == doc.lang) / len(doc.seg_langs)


def stage_score(
    config: PipelineConfig, base: Path, workers: int, input_path: Path, out_dir: Path
) -> dict:
    docs = read_documents(input_path)
    model = _load_classifier(config, base)

    def process(doc: Document) -> Document:
        if doc.seg_langs is not None:
            fraction = _segment_profile_fraction(doc)
        elif model is not None:
            fraction = profile_segments(doc, model).in_language_fraction
        else:
            raise StageError(
                f"document {doc.id!r} has no seg_langs and no classifier is "
                "configured; run the lid stage first"
            )
        report = score_document(doc, fraction, config.wds.scoring)
        extras = dict(doc.extras)
        extras["wds_subsignals"] = report.subsignals
        return doc.replace(wds=report.score, extras=extras)

    scored = _pmap(process, docs, workers)
    removals: dict[str, int] = {}
    if config.wds.min_level is not None:
        retained, removed = filter_by_level(
            Corpus(scored, config.language), config.wds.min_level
        )
        if removed:
            _write_docs_atomic(removed, out_dir / "removed.jsonl")
            removals["below_wds"] = len(removed)
        scored = retained
    _write_docs_atomic(scored, out_dir / "documents.jsonl")
    return {
        "input_documents": len(docs),
        "output_documents": len(scored),
        "removals": removals,
    }


def stage_package(
    config: PipelineConfig, base: Path, workers: int, input_path: Path, out_dir: Path
) -> dict:
    docs = read_documents(input_path)
    corpus = Corpus(docs, config.language)
    manifests = package_corpus(corpus, out_dir, config.packaging)
    per_bin: dict[str, int] = {}
    for m in manifests:
        per_bin[str(m.wds_bin)] = per_bin.get(str(m.wds_bin), 0) + m.document_count
    return {
        "input_documents": len(docs),
        "output_documents": sum(m.document_count for m in manifests),
        "removals": {},
        "shards": len(manifests),
        "documents_per_bin": per_bin,
    }


def stage_analyze(
    config: PipelineConfig, base: Path, workers: int, input_path: Path, out_dir: Path
) -> dict:
    docs = read_documents(input_path)
    corpus = Corpus(docs, config.language)
    if config.analytics.stopword_file:
        stops = load_stopword_file(resolve(config.analytics.stopword_file, base))
    else:
        stops = get_stopwords(config.language)
    report = analyze_corpus(
        corpus,
        stopwords=stops,
        reference_total_tokens=config.analytics.reference_total_tokens,
    )
    _write_json_atomic(report, out_dir / "analytics.json")
    _write_bytes_atomic(out_dir / "analytics.txt", render_report(report).encode("utf-8"))
    return {
        "input_documents": len(docs),
        "output_documents": len(docs),
        "removals": {},
    }


def stage_eval_agg(
    config: PipelineConfig, base: Path, workers: int, input_path: Path, out_dir: Path
) -> dict:
    settings = config.eval_agg
    if not settings.scores or not settings.task_meta:
        raise StageError("eval-agg stage needs eval_agg.scores and eval_agg.task_meta")
    grid = load_grid(resolve(settings.scores, base), resolve(settings.task_meta, base))

    selection = None
    selected: set[str] | None = None
    if settings.run_selection:
        selection = select_tasks(grid, settings.thresholds, settings.ranking_mode)
        selected = set(selection.selected)

    languages = sorted({meta.language for meta in grid.tasks.values()})
    models = grid.models
    language_scores: dict[str, dict[str, float]] = {m: {} for m in models}
    excluded: list[str] = []
    for lang in languages:
        lang_tasks = {t for t, meta in grid.tasks.items() if meta.language == lang}
        usable = lang_tasks if selected is None else lang_tasks & selected
        if not usable:
            excluded.append(lang)
            continue
        for model in models:
            language_scores[model][lang] = language_score(grid, model, lang, usable)

    report: dict = {
        "models": list(models),
        "languages": [lang for lang in languages if lang not in excluded],
        "excluded_languages": excluded,
        "language_scores": language_scores,
    }
    if selection is not None:
        report["task_selection"] = selection.to_json()
    ranking_text = ""
    if len(models) >= 2 and all(language_scores[m] for m in models):
        multilingual = multilingual_scores(language_scores)
        report["multilingual"] = multilingual.to_json()
        ranking_text = render_ranking(multilingual)
    _write_json_atomic(report, out_dir / "evalagg.json")
    if ranking_text:
        _write_bytes_atomic(out_dir / "ranking.txt", ranking_text.encode("utf-8"))
    return {
        "input_documents": len(grid.scores),
        "output_documents": len(report["languages"]),
        "removals": {},
        "tasks_total": len(grid.tasks),
        "tasks_selected": len(selection.selected) if selection else len(grid.tasks),
    }


_STAGES: dict[str, Callable] = {
    "lid": stage_lid,
    "dedup": stage_dedup,
    "score": stage_score,
    "package": stage_package,
    "analyze": stage_analyze,
    "eval-agg": stage_eval_agg,
}


def run_stage(
    stage: str,
    config: PipelineConfig,
    base: Path,
    workers: int | None = None,
    input_path: str | Path | None = None,
    output_dir: str | Path | None = None,
) -> dict:
    """Run one stage; returns the run report (also written to the output dir)."""
    if stage not in _STAGES:
        raise StageError(f"unknown stage {stage!r}")
    n_workers = workers if workers is not None else config.workers
    out_dir = (
        Path(output_dir)
        if output_dir is not None
        else resolve(config.output_root, base) / stage.replace("-", "_")
    )
    in_path = (
        Path(input_path) if input_path is not None else resolve(config.input, base)
    )
    started = time.perf_counter()
    report = _STAGES[stage](config, base, n_workers, in_path, out_dir)
    report = {"stage": stage, **report}
    report["wall_time_seconds"] = round(time.perf_counter() - started, 6)
    _write_json_atomic(report, out_dir / "report.json")
    logger.info(
        "stage %s: %s in, %s out",
        stage,
        report.get("input_documents"),
        report.get("output_documents"),
    )
    return report


def run_all(
    config: PipelineConfig,
    base: Path,
    workers: int | None = None,
    input_path: str | Path | None = None,
    output_dir: str | Path | None = None,
) -> list[dict]:
    """Chain the document stages; each reads its predecessor's output."""
    root = (
        Path(output_dir)
        if output_dir is not None
        else resolve(config.output_root, base)
    )
    current = Path(input_path) if input_path is not None else resolve(config.input, base)
    reports = []
    for stage in DOCUMENT_STAGES:
        stage_dir = root / stage
        reports.append(
            run_stage(stage, config, base, workers, current, stage_dir)
        )
        if stage in ("lid", "dedup", "score"):
            current = stage_dir / "documents.jsonl"
    return reports


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("REFINERY_LOG", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = argparse.ArgumentParser(
        prog="refinery", description="Corpus refinement pipeline"
    )
    sub = parser.add_subparsers(dest="stage", required=True)
    for stage in list(_STAGES) + ["all"]:
        p = sub.add_parser(stage)
        p.add_argument("--config", required=True, help="pipeline config file")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--input", default=None, help="override the stage input path")
        p.add_argument("--output", default=None, help="override the stage output dir")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            dest="overrides",
            metavar="KEY=VALUE",
            help="override a config field, e.g. dedup.verify_threshold=0.9",
        )
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config, overrides=args.overrides)
    except (ConfigError, OSError) as exc:
        print(f"refinery: config error: {exc}", file=sys.stderr)
        return 2
    base = Path(args.config).resolve().parent
    try:
        if args.stage == "all":
            run_all(config, base, args.workers, args.input, args.output)
        else:
            run_stage(config=config, stage=args.stage, base=base,
                      workers=args.workers, input_path=args.input,
                      output_dir=args.output)
    except (StageError, GridError, ConfigError, ValueError, OSError) as exc:
        print(f"refinery: {args.stage} failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
