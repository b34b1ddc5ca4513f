"""Counters and the pass-counting cost model.

Wall clock is meaningless for desk-scale reference models, so efficiency
is expressed in simulated time units: every attempt is charged one target
verification pass plus a per-scored-token term covering proposed+1 logits
(the extra guaranteed token rides in the same pass), draft-proposed
tokens are charged separately, and index operations can be given a
nonzero cost to study search overhead. Simulated tokens-per-second is
committed tokens divided by simulated time.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

if TYPE_CHECKING:  # pragma: no cover
    from .engine import AttemptOutcome


class EmptyLog(ValueError):
    """score_log requires at least one attempt."""


@dataclass(frozen=True)
class CostModel:
    """Time units charged per attempt component; all costs must be >= 0."""

    target_pass_cost: float = 1.0
    target_per_token_cost: float = 0.02
    draft_token_cost: float = 0.1
    index_op_cost: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")


@dataclass(frozen=True)
class RunMetrics:
    """Aggregated counters for one generation run (or a pool of runs).

    ``tokens_out`` counts every committed token, including a terminating
    end-of-text sentinel. ``tau1``/``tau2`` are mean accepted tokens per
    copy/draft attempt (0.0 when no such attempts were made).
    """

    tokens_out: int
    copied_tokens: int
    copy_attempts: int
    draft_attempts: int
    draft_accepted: int
    plain_steps: int
    tau1: float
    tau2: float
    sim_time: float
    sim_tps: float
    pct_copied: float

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _derive(
    tokens_out: int,
    copied: int,
    copy_attempts: int,
    draft_attempts: int,
    draft_accepted: int,
    plain_steps: int,
    sim_time: float,
) -> RunMetrics:
    return RunMetrics(
        tokens_out=tokens_out,
        copied_tokens=copied,
        copy_attempts=copy_attempts,
        draft_attempts=draft_attempts,
        draft_accepted=draft_accepted,
        plain_steps=plain_steps,
        tau1=copied / copy_attempts if copy_attempts else 0.0,
        tau2=draft_accepted / draft_attempts if draft_attempts else 0.0,
        sim_time=sim_time,
        sim_tps=tokens_out / sim_time if sim_time > 0 else 0.0,
        pct_copied=copied / tokens_out if tokens_out else 0.0,
    )


def attempt_cost(outcome: "AttemptOutcome", cost: CostModel) -> float:
    """Simulated time of one attempt.

    One target pass scoring proposed+1 logits, plus draft generation for
    draft-sourced proposals, plus any index operations performed.
    """
    scored = outcome.proposed + 1
    time = cost.target_pass_cost + cost.target_per_token_cost * scored
    if outcome.source == "draft":
        time += cost.draft_token_cost * outcome.proposed
    time += cost.index_op_cost * outcome.index_ops
    return time


def score_log(log: Sequence["AttemptOutcome"], cost: CostModel | None = None) -> RunMetrics:
    """Deterministic aggregation of one generation run's attempt log."""
    if not log:
        raise EmptyLog("cannot score an empty attempt log")
    cost = cost or CostModel()
    tokens_out = copied = copy_attempts = draft_attempts = draft_accepted = plain_steps = 0
    sim_time = 0.0
    for o in log:
        tokens_out += o.accepted_k + 1
        if o.source == "copy":
            copy_attempts += 1
            copied += o.accepted_k
        elif o.source == "draft":
            draft_attempts += 1
            draft_accepted += o.accepted_k
        else:
            plain_steps += 1
        sim_time += attempt_cost(o, cost)
    return _derive(tokens_out, copied, copy_attempts, draft_attempts, draft_accepted, plain_steps, sim_time)


def aggregate(metrics: Iterable[RunMetrics]) -> RunMetrics:
    """Pool runs: counts and simulated time are summed, ratios recomputed."""
    items = list(metrics)
    if not items:
        raise EmptyLog("cannot aggregate zero metric records")
    return _derive(
        tokens_out=sum(m.tokens_out for m in items),
        copied=sum(m.copied_tokens for m in items),
        copy_attempts=sum(m.copy_attempts for m in items),
        draft_attempts=sum(m.draft_attempts for m in items),
        draft_accepted=sum(m.draft_accepted for m in items),
        plain_steps=sum(m.plain_steps for m in items),
        sim_time=sum(m.sim_time for m in items),
    )


def speedup(metrics_a: RunMetrics, metrics_b: RunMetrics) -> float:
    """Simulated-throughput ratio a/b; both runs must have produced tokens."""
    if metrics_a.tokens_out == 0 or metrics_b.tokens_out == 0:
        raise ZeroDivisionError("speedup undefined for runs with zero tokens")
    return metrics_a.sim_tps / metrics_b.sim_tps


METRIC_FIELDS = [f.name for f in fields(RunMetrics)]


def metrics_record(
    transcript_id: str,
    category: str,
    turn: int,
    strategy: str,
    metrics: RunMetrics,
    config_echo: dict,
) -> dict:
    """Flat record emitted per (transcript, turn, strategy)."""
    rec = {"transcript_id": transcript_id, "category": category, "turn": turn, "strategy": strategy}
    rec.update(metrics.to_dict())
    rec.update({f"config_{k}": v for k, v in sorted(config_echo.items())})
    return rec


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partials."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def records_to_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def records_to_csv(records: list[dict]) -> str:
    """CSV with the same columns as the JSON records, in stable order."""
    if not records:
        return ""
    columns = list(records[0].keys())
    import io

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec)
    return buf.getvalue()
