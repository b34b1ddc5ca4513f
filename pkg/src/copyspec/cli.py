"""Command-line surface: run, sweep, train-lm, skipgram, report.

Every command is deterministic given (corpus, flags, seed): output files
carry no timestamps or wall-clock fields, records are sorted by
transcript id regardless of worker scheduling, and files are written
atomically. Wall-clock duration is logged to stderr only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analysis import cs_study, sweep
from .corpus import Transcript, Vocabulary, load_transcripts, training_sequences
from .engine import EngineConfig, run_transcript
from .lm import KgramLM, train_kgram
from .metrics import (
    CostModel,
    aggregate,
    atomic_write_text,
    metrics_record,
    records_to_csv,
    records_to_json,
)
from .synthetic import file_fingerprint

DEFAULT_SEED = 1729

STRATEGY_FLAGS = {
    "baseline": "baseline",
    "copy": "copy",
    "specdec": "specdec",
    "copy+specdec": "copy_plus_specdec",
}


class MissingBaseline(RuntimeError):
    """Speedup was requested but no baseline-strategy metrics file is present."""


def _default_seed() -> int:
    return int(os.environ.get("COPYSPEC_SEED", DEFAULT_SEED))


def _positive(kind=int):
    def convert(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return convert


def _nonnegative_float(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _int_list(text):
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copyspec",
        description="Speculative copy generation over reference language models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--corpus", required=True, help="transcript JSONL file")
        p.add_argument("--gamma", type=_positive(), default=3, help="match window length (default 3)")
        p.add_argument("--chunk", type=_positive(), default=10, help="max tokens per copy proposal (default 10)")
        p.add_argument("--draft-tokens", type=_positive(), default=3, help="draft proposal length (default 3)")
        p.add_argument("--max-new-tokens", type=_positive(), default=1024, help="per-turn budget (default 1024)")
        p.add_argument("--cost-target", type=_nonnegative_float, default=1.0, help="units per target pass")
        p.add_argument("--cost-target-token", type=_nonnegative_float, default=0.02, help="units per scored token")
        p.add_argument("--cost-draft-token", type=_nonnegative_float, default=0.1, help="units per drafted token")
        p.add_argument("--cost-index", type=_nonnegative_float, default=0.0, help="units per index operation")
        p.add_argument("--target-order", type=_positive(), default=4, help="target k-gram order (default 4)")
        p.add_argument("--draft-order", type=_positive(), default=2, help="draft k-gram order (default 2)")
        p.add_argument("--model-path", default=None, help="load the target model from a dump instead of training")
        p.add_argument("--seed", type=int, default=None, help=f"run seed (default {DEFAULT_SEED}; env COPYSPEC_SEED overrides)")
        p.add_argument("--jobs", type=_positive(), default=1, help="transcript-level worker processes")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p_run = sub.add_parser("run", help="run one strategy over a corpus and emit per-turn metrics")
    add_common(p_run)
    p_run.add_argument("--strategy", required=True, choices=sorted(STRATEGY_FLAGS))

    p_sweep = sub.add_parser("sweep", help="sweep gamma or chunk length over a corpus")
    add_common(p_sweep)
    p_sweep.add_argument("--strategy", default="copy", choices=sorted(STRATEGY_FLAGS))
    p_sweep.add_argument("--axis", required=True, choices=("gamma", "chunk"))
    p_sweep.add_argument("--values", required=True, type=_int_list, help="comma-separated, strictly increasing")
    p_sweep.add_argument("--records-out", default=None, help="also write raw per-transcript records (JSONL)")

    p_train = sub.add_parser("train-lm", help="train a k-gram model on a corpus and dump it")
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--order", type=_positive(), default=4)
    p_train.add_argument("--out", required=True)

    p_skip = sub.add_parser("skipgram", help="left-context embedding study: mean cosine similarity per gamma")
    p_skip.add_argument("--corpus", required=True)
    p_skip.add_argument("--gammas", type=_int_list, default=[2, 3, 4, 5], help="comma-separated gammas")
    p_skip.add_argument("--dim", type=_positive(), default=16)
    p_skip.add_argument("--epochs", type=_positive(), default=10)
    p_skip.add_argument("--lr", type=_nonnegative_float, default=0.1)
    p_skip.add_argument("--seed", type=int, default=None)
    p_skip.add_argument("--out", default=None)

    p_report = sub.add_parser("report", help="tabulate metric files; speedups are against the baseline file")
    p_report.add_argument("paths", nargs="+", help="JSON metric files from `copyspec run`")
    p_report.add_argument("--no-speedup", action="store_true", help="omit the speedup column")
    p_report.add_argument("--out", default=None, help="also write the table as markdown")

    return parser


def _load_corpus(path: str) -> list[Transcript]:
    transcripts = load_transcripts(path)
    if not transcripts:
        raise RuntimeError(f"corpus {path} contains no transcripts")
    return transcripts


def _build_models(args, transcripts):
    if args.model_path:
        target, symbols = KgramLM.load(args.model_path)
        vocab = Vocabulary(list(symbols) if symbols else None)
        seqs = training_sequences(transcripts, vocab)
        target.vocab_size = max(target.vocab_size, len(vocab))
    else:
        vocab = Vocabulary()
        seqs = training_sequences(transcripts, vocab)
        target = train_kgram(seqs, args.target_order, vocab_size=len(vocab))
    draft = None
    config = _engine_config(args)
    if config.allows_draft:
        draft = train_kgram(seqs, args.draft_order, vocab_size=len(vocab))
    return vocab, target, draft


def _engine_config(args) -> EngineConfig:
    return EngineConfig(
        gamma=args.gamma,
        chunk_len=args.chunk,
        draft_len=args.draft_tokens,
        strategy=STRATEGY_FLAGS[args.strategy],
        max_new_tokens=args.max_new_tokens,
    )


def _cost_model(args) -> CostModel:
    return CostModel(
        target_pass_cost=args.cost_target,
        target_per_token_cost=args.cost_target_token,
        draft_token_cost=args.cost_draft_token,
        index_op_cost=args.cost_index,
    )


def _config_echo(args, extra=None) -> dict:
    seed = args.seed if args.seed is not None else _default_seed()
    echo = {
        "strategy": args.strategy,
        "gamma": args.gamma,
        "chunk_len": args.chunk,
        "draft_len": args.draft_tokens,
        "max_new_tokens": args.max_new_tokens,
        "cost_target": args.cost_target,
        "cost_target_token": args.cost_target_token,
        "cost_draft_token": args.cost_draft_token,
        "cost_index": args.cost_index,
        "target_order": args.target_order,
        "draft_order": args.draft_order,
        "seed": seed,
        "corpus": str(args.corpus),
        "corpus_fingerprint": file_fingerprint(args.corpus),
    }
    echo.update(extra or {})
    return echo


def _run_one(job):
    transcript, vocab, target, draft, config, cost = job
    results = run_transcript(
        transcript, vocab, target.spawn(), draft.spawn() if draft else None, config, cost
    )
    return transcript.id, transcript.category, [(r.turn, r.metrics) for r in results]


def _run_corpus(transcripts, vocab, target, draft, config, cost, jobs):
    job_list = [(t, vocab, target, draft, config, cost) for t in transcripts]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_run_one, job_list))
    else:
        raw = [_run_one(job) for job in job_list]
    return sorted(raw, key=lambda item: item[0])  # order-stable: by transcript id


def _emit(args, payload: dict, records: list[dict]) -> None:
    if args.format == "json":
        text = records_to_json(payload)
    else:
        text = records_to_csv(records)
        print(json.dumps({"aggregate": payload["aggregate"]}, sort_keys=True))
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    t0 = time.monotonic()
    transcripts = _load_corpus(args.corpus)
    vocab, target, draft = _build_models(args, transcripts)
    config = _engine_config(args)
    cost = _cost_model(args)
    echo = _config_echo(args)
    raw = _run_corpus(transcripts, vocab, target, draft, config, cost, args.jobs)

    records = []
    by_turn: dict[int, list] = {}
    by_category: dict[str, list] = {}
    flat = []
    for tid, category, turns in raw:
        for turn, metrics in turns:
            records.append(metrics_record(tid, category, turn, args.strategy, metrics, echo))
            by_turn.setdefault(turn, []).append(metrics)
            by_category.setdefault(category, []).append(metrics)
            flat.append(metrics)
    payload = {
        "config": echo,
        "records": records,
        "aggregate": {
            "overall": aggregate(flat).to_dict(),
            "by_turn": {str(turn): aggregate(ms).to_dict() for turn, ms in sorted(by_turn.items())},
            "by_category": {cat: aggregate(ms).to_dict() for cat, ms in sorted(by_category.items())},
        },
    }
    _emit(args, payload, records)
    print(f"run: {len(records)} records in {time.monotonic() - t0:.1f}s wall", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    t0 = time.monotonic()
    transcripts = _load_corpus(args.corpus)
    vocab, target, draft = _build_models(args, transcripts)
    config = _engine_config(args)
    cost = _cost_model(args)
    axis = "gamma" if args.axis == "gamma" else "chunk_len"
    echo = _config_echo(args, {"axis": axis, "values": ",".join(map(str, args.values))})

    result = sweep(transcripts, vocab, target, draft, config, axis, args.values, cost)
    payload = {"config": echo, "sweep": result.to_dict()}

    if args.records_out:
        from dataclasses import replace

        lines = []
        for value in args.values:
            raw = _run_corpus(
                transcripts, vocab, target, draft, replace(config, **{axis: value}), cost, args.jobs
            )
            for tid, category, turns in raw:
                for turn, metrics in turns:
                    rec = metrics_record(tid, category, turn, args.strategy, metrics, echo)
                    rec["sweep_value"] = value
                    lines.append(json.dumps(rec, sort_keys=True))
        atomic_write_text(args.records_out, "\n".join(lines) + "\n")

    if args.format == "json":
        text = records_to_json(payload)
    else:
        rows = ["value,metric,number"]
        rows += [f"{v},{name},{num!r}" for v, name, num in result.long_rows()]
        text = "\n".join(rows) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    print(f"sweep: {len(args.values)} points in {time.monotonic() - t0:.1f}s wall", file=sys.stderr)
    return 0


def cmd_train_lm(args) -> int:
    transcripts = _load_corpus(args.corpus)
    vocab = Vocabulary()
    seqs = training_sequences(transcripts, vocab)
    model = train_kgram(seqs, args.order, vocab_size=len(vocab))
    model.save(args.out, vocab_symbols=vocab.symbols)
    print(f"trained order-{args.order} model on {len(seqs)} transcripts -> {args.out}", file=sys.stderr)
    return 0


def cmd_skipgram(args) -> int:
    transcripts = _load_corpus(args.corpus)
    vocab = Vocabulary()
    seqs = training_sequences(transcripts, vocab)
    seed = args.seed if args.seed is not None else _default_seed()
    points = cs_study(seqs, args.gammas, dim=args.dim, epochs=args.epochs, learning_rate=args.lr, seed=seed)
    payload = {
        "config": {
            "corpus": str(args.corpus),
            "corpus_fingerprint": file_fingerprint(args.corpus),
            "gammas": args.gammas,
            "dim": args.dim,
            "epochs": args.epochs,
            "lr": args.lr,
            "seed": seed,
        },
        "points": [{"gamma": g, "mean_cs": cs} for g, cs in points],
    }
    text = records_to_json(payload)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _pool_rows(doc: dict) -> dict[tuple[str, int], dict]:
    """(strategy, turn) -> pooled metric dict from one run file."""
    from .metrics import RunMetrics

    grouped: dict[tuple[str, int], list[RunMetrics]] = {}
    for rec in doc["records"]:
        key = (rec["strategy"], int(rec["turn"]))
        metrics = RunMetrics(**{name: rec[name] for name in RunMetrics.__dataclass_fields__})
        grouped.setdefault(key, []).append(metrics)
    return {key: aggregate(ms).to_dict() for key, ms in grouped.items()}


def cmd_report(args) -> int:
    docs = []
    for path in args.paths:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if "records" not in doc or "config" not in doc:
            raise RuntimeError(f"{path} is not a metrics file produced by `copyspec run`")
        docs.append(doc)

    fingerprints = {doc["config"].get("corpus_fingerprint") for doc in docs}
    if len(fingerprints) > 1:
        print("warning: metric files were produced from different corpora", file=sys.stderr)

    rows: dict[tuple[str, int], dict] = {}
    for doc in docs:
        rows.update(_pool_rows(doc))

    baseline = {turn: vals for (strategy, turn), vals in rows.items() if strategy == "baseline"}
    want_speedup = not args.no_speedup
    if want_speedup and not baseline:
        raise MissingBaseline("no baseline run among the inputs; pass one or use --no-speedup")

    header = ["strategy", "turn", "sim_tps", "pct_copied", "tau1", "tau2"]
    if want_speedup:
        header.append("speedup_vs_baseline")
    lines = []
    for (strategy, turn), vals in sorted(rows.items()):
        line = [
            strategy,
            str(turn),
            f"{vals['sim_tps']:.4f}",
            f"{vals['pct_copied']:.4f}",
            f"{vals['tau1']:.4f}",
            f"{vals['tau2']:.4f}",
        ]
        if want_speedup:
            ref = baseline.get(turn)
            line.append(f"{vals['sim_tps'] / ref['sim_tps']:.4f}" if ref else "n/a")
        lines.append(line)

    widths = [max(len(h), *(len(l[i]) for l in lines)) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for line in lines:
        print("  ".join(cell.ljust(w) for cell, w in zip(line, widths)))

    if args.out:
        md = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
        md += ["| " + " | ".join(line) + " |" for line in lines]
        atomic_write_text(args.out, "\n".join(md) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "values", None) is not None:
        if any(b <= a for a, b in zip(args.values, args.values[1:])):
            parser.error("--values must be strictly increasing")
    handlers = {
        "run": cmd_run,
        "sweep": cmd_sweep,
        "train-lm": cmd_train_lm,
        "skipgram": cmd_skipgram,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime errors -> exit 1 with a diagnostic
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
