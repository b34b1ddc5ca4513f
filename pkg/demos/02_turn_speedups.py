#!/usr/bin/env python3
"""Per-turn throughput on the shipped corpora, strategy by strategy.

The redundant corpus asks for a revision of the first answer in turn two,
so copying pays off there; the novel corpus switches topics and serves as
the overhead control. Models are k-gram references trained on the corpus
itself (order 4 target, order 2 draft), and time is the pass-counting
cost model, not wall clock.
"""

from pathlib import Path

from copyspec import CostModel, EngineConfig, Vocabulary, aggregate, run_transcript, speedup, train_kgram
from copyspec.corpus import load_transcripts, training_sequences

DATA = Path(__file__).resolve().parent.parent / "data"


def per_turn_metrics(corpus, vocab, target, draft, strategy):
    config = EngineConfig(strategy=strategy)
    turns = {}
    for transcript in corpus:
        results = run_transcript(
            transcript, vocab, target.spawn(), draft.spawn() if draft else None, config, CostModel()
        )
        for r in results:
            turns.setdefault(r.turn, []).append(r.metrics)
    return {turn: aggregate(ms) for turn, ms in sorted(turns.items())}


for name in ("redundant_2turn", "novel_2turn", "selfcorrect_3turn"):
    corpus = load_transcripts(DATA / f"{name}.jsonl")
    vocab = Vocabulary()
    seqs = training_sequences(corpus, vocab)
    target = train_kgram(seqs, 4, vocab_size=len(vocab))
    draft = train_kgram(seqs, 2, vocab_size=len(vocab))

    base = per_turn_metrics(corpus, vocab, target, None, "baseline")
    runs = {
        "copy": per_turn_metrics(corpus, vocab, target, None, "copy"),
        "specdec": per_turn_metrics(corpus, vocab, target, draft, "specdec"),
        "copy+specdec": per_turn_metrics(corpus, vocab, target, draft, "copy_plus_specdec"),
    }

    print(f"\n=== {name} ({len(corpus)} transcripts) ===")
    print(f"{'strategy':<14}{'turn':<6}{'sim_tps':<10}{'%copied':<10}{'tau1':<8}{'tau2':<8}{'speedup':<8}")
    for turn, m in base.items():
        print(f"{'baseline':<14}{turn:<6}{m.sim_tps:<10.3f}{m.pct_copied:<10.3f}{m.tau1:<8.2f}{m.tau2:<8.2f}{1.0:<8.2f}")
    for strategy, turns in runs.items():
        for turn, m in turns.items():
            print(
                f"{strategy:<14}{turn:<6}{m.sim_tps:<10.3f}{m.pct_copied:<10.3f}"
                f"{m.tau1:<8.2f}{m.tau2:<8.2f}{speedup(m, base[turn]):<8.2f}"
            )
