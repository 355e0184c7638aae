"""Command-line interface.

Subcommands:

* ``mask``           -- corpus JSONL in, one pretraining example per line out.
* ``stats``          -- corpus-level means as a single JSON object.
* ``score-sentence`` -- per-sentence salience scores for one cluster.
* ``eval-pyramid``   -- content-unit scores for annotated summaries.
* ``inspect``        -- readable rendering of one emitted example.

Data goes to stdout, every diagnostic goes to stderr as one JSON object
per line.  For ``mask``, settings resolve as flags over config-file
values over defaults; the config file is a flat JSON object whose keys
are flag names (hyphens or underscores).  ``PYRAMID_MASKER_WORKERS``
overrides the worker count from either source.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import ExitStack
from typing import IO

from .entities import EntitySource
from .ingest import CorpusError, compute_corpus_stats, load_clusters
from .mask import MaskConfig
from .pipeline import PipelineConfig, run_mask
from .pyr_eval import CoverageAggregation, LengthUnit, mean_score, record_score
from .rouge import ClusterScorer, SalienceVariant
from .segment import NormalizationConfig, Stemming, load_abbreviations, segment_cluster
from .selection import SelectionConfig, Strategy

log = logging.getLogger(__name__)


def _fatal(reason: str) -> int:
    print(json.dumps({"event": "fatal", "reason": reason}), file=sys.stderr)
    return 1


def _open_source(path: str, stack: ExitStack) -> IO[bytes]:
    if path == "-":
        return sys.stdin.buffer
    return stack.enter_context(open(path, "rb"))


def _open_sink(path: str, stack: ExitStack) -> IO[str]:
    if path == "-":
        return sys.stdout
    return stack.enter_context(open(path, "w", encoding="utf-8", newline="\n"))


# ---------------------------------------------------------------------------
# config-file handling (mask subcommand)

_MASK_KEYS = {
    "strategy",
    "mask_ratio",
    "copy_ratio",
    "salience_variant",
    "seed",
    "entities",
    "input_token_limit",
    "output_token_limit",
    "doc_sep_token",
    "sent_mask_token",
    "attention_window",
    "no_lead_sep",
    "no_lowercase",
    "no_strip_punctuation",
    "stemming",
    "workers",
    "strict",
    "emit_text",
    "progress_every",
    "abbreviations",
}


def _load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise CorpusError(f"config file {path} must hold a JSON object")
    resolved = {}
    for key, value in raw.items():
        norm = key.lstrip("-").replace("-", "_")
        if norm not in _MASK_KEYS:
            raise CorpusError(f"unknown config key {key!r} in {path}")
        if isinstance(value, (dict, list)):
            raise CorpusError(f"config key {key!r} must be a scalar")
        resolved[norm] = value
    return resolved


def _setting(args: argparse.Namespace, file_cfg: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in file_cfg:
        return file_cfg[name]
    return default


def _build_pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    file_cfg = _load_config_file(args.config) if args.config else {}
    try:
        strategy = Strategy(_setting(args, file_cfg, "strategy", Strategy.ENTITY_PYRAMID.value))
        variant = SalienceVariant(
            _setting(args, file_cfg, "salience_variant", SalienceVariant.MEAN_R1_R2_F1.value)
        )
        entity_source = EntitySource(_setting(args, file_cfg, "entities", EntitySource.RULES.value))
        stemming = Stemming(_setting(args, file_cfg, "stemming", Stemming.PORTER.value))
    except ValueError as exc:
        raise CorpusError(str(exc)) from exc

    try:
        selection = SelectionConfig(
            strategy=strategy,
            mask_ratio=float(_setting(args, file_cfg, "mask_ratio", 0.15)),
            copy_ratio=float(_setting(args, file_cfg, "copy_ratio", 0.15)),
            variant=variant,
            seed=int(_setting(args, file_cfg, "seed", 0)),
        )
        mask = MaskConfig(
            input_token_limit=int(_setting(args, file_cfg, "input_token_limit", 4096)),
            output_token_limit=int(_setting(args, file_cfg, "output_token_limit", 1024)),
            doc_sep_token=str(_setting(args, file_cfg, "doc_sep_token", "<doc-sep>")),
            sent_mask_token=str(_setting(args, file_cfg, "sent_mask_token", "[sent-mask]")),
            attention_window=int(_setting(args, file_cfg, "attention_window", 512)),
            lead_separator=not _setting(args, file_cfg, "no_lead_sep", False),
        )
    except ValueError as exc:
        raise CorpusError(str(exc)) from exc
    normalization = NormalizationConfig(
        lowercase=not _setting(args, file_cfg, "no_lowercase", False),
        strip_punctuation=not _setting(args, file_cfg, "no_strip_punctuation", False),
        stemming=stemming,
    )

    env_workers = os.environ.get("PYRAMID_MASKER_WORKERS")
    if env_workers:
        try:
            workers = int(env_workers)
        except ValueError as exc:
            raise CorpusError(f"PYRAMID_MASKER_WORKERS must be an integer: {env_workers!r}") from exc
    else:
        workers = int(_setting(args, file_cfg, "workers", 1))

    abbrev_path = _setting(args, file_cfg, "abbreviations", None)
    abbreviations = load_abbreviations(abbrev_path) if abbrev_path else None

    try:
        return PipelineConfig(
            normalization=normalization,
            selection=selection,
            mask=mask,
            entity_source=entity_source,
            workers=workers,
            strict=bool(_setting(args, file_cfg, "strict", False)),
            emit_text=bool(_setting(args, file_cfg, "emit_text", False)),
            progress_every=int(_setting(args, file_cfg, "progress_every", 1000)),
            abbreviations=abbreviations,
        )
    except ValueError as exc:
        raise CorpusError(str(exc)) from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_mask(args: argparse.Namespace) -> int:
    config = _build_pipeline_config(args)
    with ExitStack() as stack:
        source = _open_source(args.input, stack)
        sink = _open_sink(args.output, stack)
        report = run_mask(source, sink, config)
    return report.exit_code


def cmd_stats(args: argparse.Namespace) -> int:
    def on_error(error) -> None:
        print(
            json.dumps({"event": "record_error", "line": error.line_number, "reason": error.reason}),
            file=sys.stderr,
        )

    with ExitStack() as stack:
        source = _open_source(args.input, stack)
        clusters = load_clusters(source, strict=args.strict, on_error=on_error)
        stats = compute_corpus_stats(clusters)
    print(json.dumps(stats.to_json_dict()))
    return 0


def cmd_score_sentence(args: argparse.Namespace) -> int:
    abbreviations = load_abbreviations(args.abbreviations) if args.abbreviations else None
    variant = SalienceVariant(args.salience_variant)
    with ExitStack() as stack:
        source = _open_source(args.input, stack)
        target = None
        for cluster in load_clusters(source):
            if args.cluster_id is None or cluster.cluster_id == args.cluster_id:
                target = cluster
                break
    if target is None:
        wanted = args.cluster_id if args.cluster_id is not None else "<first cluster>"
        return _fatal(f"cluster {wanted!r} not found in {args.input}")
    sentences = segment_cluster(target, abbreviations=abbreviations)
    scorer = ClusterScorer(sentences, variant)
    rows = [
        {
            "doc": s.doc_index,
            "sent": s.sent_index,
            "text": s.text,
            "principle": scorer.principle(s),
            "cluster_rouge": scorer.cluster(s),
        }
        for s in sorted(sentences, key=lambda s: s.key)
    ]
    print(
        json.dumps(
            {"cluster_id": target.cluster_id, "salience_variant": variant.value, "sentences": rows},
            ensure_ascii=False,
        )
    )
    return 0


def cmd_eval_pyramid(args: argparse.Namespace) -> int:
    aggregation = CoverageAggregation(args.aggregation)
    len_unit = LengthUnit(args.len_unit)
    results = []
    scores = []
    with ExitStack() as stack:
        source = _open_source(args.input, stack)
        for line_number, raw in enumerate(source, 1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw.decode("utf-8"))
                summary_id, score = record_score(record, aggregation, len_unit)
            except (UnicodeDecodeError, json.JSONDecodeError, ValueError) as exc:
                if args.strict:
                    raise CorpusError(f"line {line_number}: {exc}") from exc
                print(
                    json.dumps({"event": "record_error", "line": line_number, "reason": str(exc)}),
                    file=sys.stderr,
                )
                continue
            scores.append(score)
            results.append(
                {
                    "summary_id": summary_id,
                    "raw": score.raw,
                    "recall": score.recall,
                    "precision": score.precision,
                    "f1": score.f1,
                }
            )
    mean = mean_score(scores)
    mean_dict = None
    if mean is not None:
        mean_dict = {
            "raw": mean.raw,
            "recall": mean.recall,
            "precision": mean.precision,
            "f1": mean.f1,
        }
    print(json.dumps({"summaries": results, "mean": mean_dict}))
    return 0 if results else 2


def cmd_inspect(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        source = _open_source(args.input, stack)
        record = None
        for line_number, raw in enumerate(source, 1):
            if not raw.strip():
                continue
            try:
                candidate = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                return _fatal(f"line {line_number}: {exc}")
            if args.cluster_id is None or candidate.get("cluster_id") == args.cluster_id:
                record = candidate
                break
    if record is None:
        wanted = args.cluster_id if args.cluster_id is not None else "<first record>"
        return _fatal(f"example {wanted!r} not found in {args.input}")
    meta = record.get("meta", {})
    lines = [
        f"cluster_id        {record.get('cluster_id')}",
        f"strategy          {meta.get('strategy')}",
        f"fallback_used     {meta.get('fallback_used')}",
        f"dropped_masked    {meta.get('dropped_masked')}",
        f"input tokens      {len(record.get('input', []))}",
        f"target tokens     {len(record.get('target', []))}",
        f"global attention  {record.get('global_attention')}",
        "",
        "input:",
        "  " + " ".join(record.get("input", [])),
        "",
        "target:",
        "  " + " ".join(record.get("target", [])),
    ]
    scores = meta.get("scores")
    if scores:
        lines.append("")
        lines.append("scores:")
        for key, value in scores.items():
            lines.append(f"  {key:>8}  {value:.6f}")
    print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pyramid-masker",
        description="Build gap-sentence pretraining examples from multi-document clusters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mask = sub.add_parser("mask", help="convert a corpus into masked pretraining examples")
    mask.add_argument("--input", default="-", help="corpus JSONL path, or - for stdin")
    mask.add_argument("--output", default="-", help="output JSONL path, or - for stdout")
    mask.add_argument("--config", help="flat JSON config file; flags win over it")
    mask.add_argument("--strategy", choices=[s.value for s in Strategy])
    mask.add_argument("--mask-ratio", type=float, dest="mask_ratio")
    mask.add_argument("--copy-ratio", type=float, dest="copy_ratio")
    mask.add_argument(
        "--salience-variant",
        choices=[v.value for v in SalienceVariant],
        dest="salience_variant",
    )
    mask.add_argument("--seed", type=int)
    mask.add_argument("--entities", choices=[e.value for e in EntitySource])
    mask.add_argument("--input-token-limit", type=int, dest="input_token_limit")
    mask.add_argument("--output-token-limit", type=int, dest="output_token_limit")
    mask.add_argument("--doc-sep-token", dest="doc_sep_token")
    mask.add_argument("--sent-mask-token", dest="sent_mask_token")
    mask.add_argument("--attention-window", type=int, dest="attention_window")
    mask.add_argument(
        "--no-lead-sep",
        action="store_true",
        default=None,
        dest="no_lead_sep",
        help="emit separators only between documents, not before the first",
    )
    mask.add_argument("--no-lowercase", action="store_true", default=None, dest="no_lowercase")
    mask.add_argument(
        "--no-strip-punctuation", action="store_true", default=None, dest="no_strip_punctuation"
    )
    mask.add_argument("--stemming", choices=[s.value for s in Stemming])
    mask.add_argument("--workers", type=int)
    mask.add_argument("--strict", action="store_true", default=None)
    mask.add_argument(
        "--emit-text",
        action="store_true",
        default=None,
        dest="emit_text",
        help="also write space-joined input_text/target_text fields",
    )
    mask.add_argument("--progress-every", type=int, dest="progress_every")
    mask.add_argument("--abbreviations", help="override the packaged abbreviation list")
    mask.set_defaults(func=cmd_mask)

    stats = sub.add_parser("stats", help="corpus-level statistics as JSON")
    stats.add_argument("--input", default="-")
    stats.add_argument("--strict", action="store_true", default=False)
    stats.set_defaults(func=cmd_stats)

    score = sub.add_parser("score-sentence", help="per-sentence salience scores for one cluster")
    score.add_argument("--input", default="-")
    score.add_argument("--cluster-id", dest="cluster_id", help="defaults to the first cluster")
    score.add_argument(
        "--salience-variant",
        choices=[v.value for v in SalienceVariant],
        default=SalienceVariant.MEAN_R1_R2_F1.value,
        dest="salience_variant",
    )
    score.add_argument("--abbreviations")
    score.set_defaults(func=cmd_score_sentence)

    pyr = sub.add_parser("eval-pyramid", help="score summaries against weighted content units")
    pyr.add_argument("--input", default="-")
    pyr.add_argument(
        "--aggregation",
        choices=[a.value for a in CoverageAggregation],
        default=CoverageAggregation.MEAN.value,
    )
    pyr.add_argument(
        "--len-unit",
        choices=[u.value for u in LengthUnit],
        default=LengthUnit.WORDS.value,
        dest="len_unit",
    )
    pyr.add_argument("--strict", action="store_true", default=False)
    pyr.set_defaults(func=cmd_eval_pyramid)

    inspect = sub.add_parser("inspect", help="pretty-print one emitted example")
    inspect.add_argument("--input", default="-")
    inspect.add_argument("--cluster-id", dest="cluster_id", help="defaults to the first record")
    inspect.set_defaults(func=cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CorpusError as exc:
        return _fatal(str(exc))
    except OSError as exc:
        return _fatal(str(exc))


if __name__ == "__main__":
    sys.exit(main())
