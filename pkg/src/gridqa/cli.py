"""Batch driver: generate datasets, score predictions, inspect records.

Subcommands:

    generate  read a config, emit train/valid/test JSONL files and a
              stats report
    score     exact-match error of a predictions file against a
              reference dataset
    inspect   human-readable dump of one record
    validate  integrity checks over an emitted dataset

Exit codes: 0 success, 1 config or validation error, 2 generation
capacity exhausted, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import struct
import sys
from functools import partial
from multiprocessing import Pool
from pathlib import Path

from . import oracle
from .config import ConfigError, GenConfig, apply_overrides, load_config
from .dynamics import run_episode
from .querygen import UnanswerableSceneError, parse_form, sample_query
from .scenegen import SceneCapacityError
from .serialize import (
    DatasetIOError,
    Sample,
    read_relational_context,
    read_samples,
    relational_ids,
    render_relational_context,
    render_text_context,
)

SPLITS = ("train", "valid", "test")


class GenerationCapacityError(RuntimeError):
    """A sample could not be generated within the scene retry budget."""


class AlignmentError(ValueError):
    """Prediction and reference files disagree on sample ids."""


def _derive_seed(seed: int, index: int, extra: int, purpose: bytes) -> int:
    digest = hashlib.blake2b(
        struct.pack("<qqq", seed, index, extra),
        digest_size=8,
        person=purpose.ljust(16, b"\0"),
    ).digest()
    return int.from_bytes(digest, "little")


def split_of(config: GenConfig, index: int) -> str:
    """Deterministic split assignment by hashed sample index."""
    u = _derive_seed(config.seed, index, 0, b"split") / 2.0**64
    if u < config.split_train:
        return "train"
    if u < config.split_train + config.split_valid:
        return "valid"
    return "test"


def generate_sample(config: GenConfig, index: int) -> Sample:
    """Run the full pipeline for one sample index.

    Every random draw derives from (config.seed, index, scene attempt),
    so any index regenerates independently of the rest of the run.
    """
    for attempt in range(config.scene_retries):
        sample_seed = _derive_seed(config.seed, index, attempt, b"scene")
        rng = random.Random(sample_seed)
        try:
            world, snapshots = run_episode(config, rng)
        except SceneCapacityError:
            continue
        try:
            form, query_text = sample_query(snapshots, config, rng, world.action_log)
        except UnanswerableSceneError:
            continue
        answer = oracle.execute(form, snapshots, world.action_log)
        context_text = render_text_context(snapshots, rng)
        context_relational = render_relational_context(snapshots)
        return Sample(
            sample_id=index,
            query_class=form.query_class,
            context_text=context_text,
            context_relational=context_relational,
            query_text=query_text,
            query_logical_form=form.to_dict(),
            answer_text=answer.text,
            answer_memids=list(answer.relevant_memids),
            generation_metadata={
                "seed": config.seed,
                "sample_index": index,
                "sample_seed": sample_seed,
                "scene_attempt": attempt,
                "config_digest": config.digest(),
                "action_log": [rec.to_json() for rec in world.action_log],
            },
        )
    raise GenerationCapacityError(
        f"sample {index}: no answerable scene in {config.scene_retries} retries"
    )


def generate(config: GenConfig, workers: int = 1) -> dict:
    """Generate config.n_samples records across splits; returns the stats report."""
    config.validate()
    out_dir = Path(config.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        handles = {
            split: (out_dir / f"{split}.jsonl").open("w", encoding="utf-8")
            for split in SPLITS
        }
    except OSError as exc:
        raise DatasetIOError(f"cannot open output files in {out_dir}: {exc}") from exc

    stats = {
        "n_samples": 0,
        "by_class": {},
        "by_return_type": {},
        "by_split": {split: 0 for split in SPLITS},
        "scene_regenerations": 0,
        "config_digest": config.digest(),
        "seed": config.seed,
    }
    try:
        indices = range(config.n_samples)
        if workers > 1:
            pool = Pool(workers)
            samples = pool.imap(partial(generate_sample, config), indices, chunksize=16)
        else:
            pool = None
            samples = map(partial(generate_sample, config), indices)
        for sample in samples:
            split = split_of(config, sample.sample_id)
            handles[split].write(json.dumps(sample.to_record(), sort_keys=True))
            handles[split].write("\n")
            stats["n_samples"] += 1
            stats["by_split"][split] += 1
            cls = sample.query_class
            stats["by_class"][cls] = stats["by_class"].get(cls, 0) + 1
            rt = sample.query_logical_form["return_type"]
            stats["by_return_type"][rt] = stats["by_return_type"].get(rt, 0) + 1
            stats["scene_regenerations"] += sample.generation_metadata["scene_attempt"]
        if pool is not None:
            pool.close()
            pool.join()
    finally:
        for handle in handles.values():
            handle.close()

    try:
        (out_dir / "stats.json").write_text(
            json.dumps(stats, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise DatasetIOError(f"cannot write stats report: {exc}") from exc
    return stats


# --- scoring -----------------------------------------------------------------


def _normalize(text: str) -> str:
    return " ".join(text.split())


def score(predictions_path: str | Path, references_path: str | Path) -> dict:
    """Exact-match error of predictions against reference answers.

    Predictions are JSONL records with sample_id and answer_text.
    Token sequences are compared after whitespace normalization; the
    report includes a per-class breakdown.
    """
    references = read_samples(references_path)
    try:
        lines = Path(predictions_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DatasetIOError(f"failed reading predictions {predictions_path}: {exc}") from exc
    predictions = {}
    for line in lines:
        if not line.strip():
            continue
        record = json.loads(line)
        predictions[record["sample_id"]] = record["answer_text"]

    ref_ids = {s.sample_id for s in references}
    missing = sorted(ref_ids - set(predictions))
    extra = sorted(set(predictions) - ref_ids)
    if missing or extra:
        raise AlignmentError(
            f"sample id mismatch: missing from predictions {missing[:10]}, "
            f"unknown ids {extra[:10]}"
        )

    per_class: dict[str, dict] = {}
    wrong_total = 0
    for sample in references:
        wrong = int(_normalize(predictions[sample.sample_id]) != _normalize(sample.answer_text))
        wrong_total += wrong
        bucket = per_class.setdefault(sample.query_class, {"n": 0, "wrong": 0})
        bucket["n"] += 1
        bucket["wrong"] += wrong
    n = len(references)
    report = {
        "n": n,
        "exact_match_error": (wrong_total / n) if n else 0.0,
        "by_class": {
            cls: {"n": b["n"], "exact_match_error": b["wrong"] / b["n"]}
            for cls, b in sorted(per_class.items())
        },
    }
    return report


# --- inspection and validation --------------------------------------------------


def _find_sample(path: str | Path, sample_id: int) -> Sample:
    for sample in read_samples(path):
        if sample.sample_id == sample_id:
            return sample
    raise KeyError(f"sample id {sample_id} not found in {path}")


def format_dump(sample: Sample) -> str:
    meta = sample.generation_metadata
    parts = [
        f"sample {sample.sample_id} (class {sample.query_class})",
        f"query: {sample.query_text}",
        "logical form:",
        json.dumps(sample.query_logical_form, sort_keys=True, indent=2),
        f"answer: {sample.answer_text}",
        f"relevant memids: {', '.join(sample.answer_memids)}",
        (
            f"regeneration: seed={meta['seed']} index={meta['sample_index']} "
            f"sample_seed={meta['sample_seed']} config_digest={meta['config_digest']}"
        ),
        "context (text):",
        sample.context_text,
    ]
    return "\n".join(parts)


def validate_dataset(path: str | Path, config: GenConfig | None = None) -> list[str]:
    """Integrity checks for every record; returns a list of problems."""
    problems = []
    for sample in read_samples(path):
        label = f"sample {sample.sample_id}"
        if sample.format_version != 1:
            problems.append(f"{label}: unknown format_version {sample.format_version}")
        try:
            reparsed = parse_form(sample.query_text)
            if reparsed.to_dict() != sample.query_logical_form:
                problems.append(f"{label}: query text does not match logical form")
        except Exception as exc:
            problems.append(f"{label}: query text failed to parse: {exc}")
        ids = relational_ids(sample.context_relational)
        dangling = set(sample.answer_memids) - ids
        if dangling:
            problems.append(f"{label}: answer memids missing from context: {sorted(dangling)}")
        if not sample.answer_text:
            problems.append(f"{label}: empty answer text")
        try:
            read_relational_context(sample.context_relational)
        except Exception as exc:
            problems.append(f"{label}: relational context unreadable: {exc}")
        if config is not None:
            regenerated = generate_sample(config, sample.sample_id)
            if regenerated.to_record() != sample.to_record():
                problems.append(f"{label}: does not match regeneration from config")
    return problems


# --- entry point -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors map to the config exit code
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gridqa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a dataset from a config")
    gen.add_argument("--config", help="flat key=value config file")
    gen.add_argument("--preset", choices=["default", "properties"], default="default")
    gen.add_argument("--out", help="output directory (overrides out_dir)")
    gen.add_argument("--n-samples", type=int, help="overrides n_samples")
    gen.add_argument("--seed", type=int, help="overrides seed")
    gen.add_argument("--workers", type=int, default=1)
    gen.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )

    sc = sub.add_parser("score", help="exact-match error for predictions")
    sc.add_argument("--predictions", required=True)
    sc.add_argument("--references", required=True)

    ins = sub.add_parser("inspect", help="dump one record")
    ins.add_argument("--dataset", required=True)
    ins.add_argument("--sample-id", type=int, required=True)

    val = sub.add_parser("validate", help="integrity-check a dataset file")
    val.add_argument("--dataset", required=True)
    val.add_argument("--config", help="also verify records against regeneration")
    return parser


def _config_from_args(args) -> GenConfig:
    if args.config:
        config = load_config(args.config)
    elif args.preset == "properties":
        config = GenConfig.properties_mode()
    else:
        config = GenConfig()
    pairs = list(args.overrides)
    if args.out is not None:
        pairs.append(f"out_dir={args.out}")
    if args.n_samples is not None:
        pairs.append(f"n_samples={args.n_samples}")
    if args.seed is not None:
        pairs.append(f"seed={args.seed}")
    return apply_overrides(config, pairs)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "generate":
            config = _config_from_args(args)
            stats = generate(config, workers=args.workers)
            print(json.dumps(stats, sort_keys=True, indent=2))
            return 0
        if args.command == "score":
            report = score(args.predictions, args.references)
            print(json.dumps(report, sort_keys=True, indent=2))
            return 0
        if args.command == "inspect":
            try:
                sample = _find_sample(args.dataset, args.sample_id)
            except KeyError as exc:
                print(exc.args[0], file=sys.stderr)
                return 1
            print(format_dump(sample))
            return 0
        if args.command == "validate":
            config = load_config(args.config) if args.config else None
            problems = validate_dataset(args.dataset, config)
            if problems:
                for problem in problems:
                    print(problem, file=sys.stderr)
                return 1
            print("ok")
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (GenerationCapacityError, SceneCapacityError) as exc:
        print(f"generation capacity error: {exc}", file=sys.stderr)
        return 2
    except (DatasetIOError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
