import numpy as np
import pytest

from copyspec.corpus import EOT_ID, Transcript, Turn, Vocabulary, tokenize
from copyspec.engine import (
    AttemptOutcome,
    BudgetExhausted,
    EngineConfig,
    Session,
    generate,
    run_transcript,
)
from copyspec.lm import TableLM

from oracles import greedy_reference, random_kgram_lm, random_table_lm


def chain_table(words, vocab_size, order=2, fallback=0):
    """TableLM whose greedy output walks the given chain token by token."""
    table = {}
    for j in range(order, len(words)):
        table[tuple(words[j - order:j])] = words[j]
    return TableLM(vocab_size, order, table, fallback)


def test_baseline_one_attempt_per_token():
    model = chain_table([1, 2, 3, 4, 5, 6, 7], vocab_size=8)
    out, log = generate([1, 2], model, config=EngineConfig(strategy="baseline", max_new_tokens=5))
    assert out == [3, 4, 5, 6, 7]
    assert len(log) == 5 and all(o.source == "plain" for o in log)


def test_strategies_match_baseline_on_cyclic_model():
    # a cyclic table model: heavy self-repetition exercises every path
    cycle = [3, 4, 5, 6, 3, 4, 5, 6, 3, 4]
    target = chain_table(cycle, vocab_size=8)
    draft = TableLM(8, 1, {(3,): 4, (4,): 5, (5,): 6, (6,): 3}, fallback=1)
    ref, _ = generate([3, 4], target.spawn(), config=EngineConfig(strategy="baseline", max_new_tokens=40))
    for strategy in ("copy", "specdec", "copy_plus_specdec"):
        out, _ = generate(
            [3, 4],
            target.spawn(),
            draft.spawn(),
            EngineConfig(strategy=strategy, max_new_tokens=40),
        )
        assert out == ref, strategy


def test_copy_attempt_fires_on_prompt_repeat():
    # prompt contains "p q r s t"; generation reproduces "p q r" and the
    # engine proposes the tokens that followed the earlier occurrence
    vocab = Vocabulary()
    prompt_words = "a p q r s t b c p q r".split()
    prompt = tokenize(" ".join(prompt_words), vocab, grow=True)
    p, q, r, s, t = (vocab.id_of(w) for w in "pqrst")
    target = chain_table(prompt + [s, t, EOT_ID], vocab_size=len(vocab), order=3)
    out, log = generate(prompt, target, config=EngineConfig(strategy="copy", gamma=3))
    assert out == [s, t]
    copy_attempts = [o for o in log if o.source == "copy"]
    assert copy_attempts, "a copy opportunity should have been taken"
    assert copy_attempts[0].accepted_k >= 1


def test_merge_falls_back_to_draft_without_match():
    target = chain_table([1, 2, 3, 4, 5, 6, 7], vocab_size=9)
    draft = chain_table([1, 2, 3, 4, 5, 6, 7], vocab_size=9)
    out, log = generate(
        [1, 2], target, draft, EngineConfig(strategy="copy_plus_specdec", draft_len=3, max_new_tokens=5)
    )
    assert out == [3, 4, 5, 6, 7]
    assert log[0].source == "draft" and log[0].proposed == 3


def test_specdec_without_draft_degrades_to_plain():
    target = chain_table([1, 2, 3, 4], vocab_size=5)
    out, log = generate([1, 2], target, None, EngineConfig(strategy="specdec", max_new_tokens=2))
    assert out == [3, 4] and all(o.source == "plain" for o in log)


def test_verify_block_partial_accept_and_divergence():
    session = Session(chain_table([1, 2, 3, 4, 5], vocab_size=10), None, EngineConfig())
    session.extend_context([1, 2])
    outcome = session.verify_block([3, 4, 9, 9], "copy", index_ops=1)
    assert outcome.accepted_k == 2
    assert outcome.bonus == 5 and outcome.bonus != 9  # diverges from first reject
    assert session.context == [1, 2, 3, 4, 5]
    assert session.target.state_len == len(session.context)


def test_verify_block_full_accept_bonus_from_extra_score():
    # greedy continuation of the prompt starts [4,1,2,3]; proposing exactly
    # that prefix accepts everything, and the bonus is greedy's next token
    chain = [9, 1, 2, 4, 1, 2, 3, 7, 8]
    target = chain_table(chain, vocab_size=10, order=3)
    reference = greedy_reference(target, [9, 1, 2], 6)
    assert reference[:4] == [4, 1, 2, 3]
    session = Session(target.spawn(), None, EngineConfig())
    session.extend_context([9, 1, 2])
    outcome = session.verify_block([4, 1, 2, 3], "copy")
    assert outcome.accepted_k == 4
    assert outcome.bonus == reference[4]
    assert session.context == [9, 1, 2] + reference[:5]


def test_immediate_eot_gives_empty_output_one_attempt():
    target = TableLM(vocab_size=4, order=1, table={(2,): EOT_ID}, fallback=1)
    out, log = generate([2], target, config=EngineConfig(strategy="baseline"))
    assert out == [] and len(log) == 1 and log[0].hit_eot


def test_eot_accepted_inside_proposal_reclassified_as_bonus():
    # the chain ends in <eot>; a copy proposal spanning it must terminate
    # cleanly with the end marker as the bonus, not as a copied token
    words = [5, 6, 7, 5, 6, 7, EOT_ID]
    target = chain_table(words, vocab_size=8, order=3)
    session = Session(target, None, EngineConfig())
    session.extend_context([5, 6, 7, 5, 6])
    outcome = session.verify_block([7, EOT_ID, 5, 5], "copy", index_ops=0)
    assert outcome.accepted_k == 1  # only the ordinary token counts as copied
    assert outcome.bonus == EOT_ID and outcome.hit_eot
    assert session.context[-1] == EOT_ID


def test_budget_is_exact_and_step_raises_when_spent():
    target = chain_table(list(range(1, 9)) + list(range(1, 9)), vocab_size=9)
    out, log = generate([1, 2], target, config=EngineConfig(strategy="copy", max_new_tokens=7))
    assert len(out) == 7
    session = Session(target.spawn(), None, EngineConfig())
    session.extend_context([1, 2])
    with pytest.raises(BudgetExhausted):
        session.step(0)


def test_progress_and_accounting_invariants():
    rng = np.random.default_rng(5)
    for case in range(30):
        target = random_table_lm(rng, 16) if case % 2 else random_kgram_lm(rng, 16)
        draft = random_table_lm(rng, 16)
        prompt = [int(x) for x in rng.integers(1, 16, size=int(rng.integers(2, 20)))]
        config = EngineConfig(
            strategy=("copy", "specdec", "copy_plus_specdec")[case % 3],
            gamma=int(rng.integers(1, 5)),
            chunk_len=int(rng.integers(1, 12)),
            draft_len=int(rng.integers(1, 5)),
            max_new_tokens=int(rng.integers(1, 60)),
        )
        session = Session(target.spawn(), draft.spawn(), config)
        session.extend_context(prompt)
        before = len(session.context)
        out, log = session.run()
        committed = len(session.context) - before
        assert committed == sum(o.accepted_k + 1 for o in log)
        assert len(out) == committed - (1 if log and log[-1].hit_eot else 0)
        for o in log:
            assert o.accepted_k + 1 >= 1
            assert 0 <= o.accepted_k <= max(o.proposed, 0)
        # cache alignment after the run
        assert session.target.state_len == len(session.context)
        assert session.draft.state_len == len(session.context)


def test_rollback_equivalence_replay():
    # truncate-to-zero-and-replay on the target reproduces the same argmax
    target = random_kgram_lm(np.random.default_rng(9), 12)
    session = Session(target, None, EngineConfig(strategy="copy"))
    session.extend_context([1, 2, 3])
    session.run(20)
    from copyspec.lm import peek_argmax

    live = peek_argmax(session.target)
    session.target.truncate(0)
    session.target.score_block(session.context)
    assert peek_argmax(session.target) == live


def test_generate_requires_prompt():
    with pytest.raises(ValueError):
        generate([], TableLM(2, 1, {}, 0))


def make_repeat_transcript():
    """Two turns; the second answer repeats the first verbatim."""
    vocab = Vocabulary()
    words = "w1 w2 w3 w4 w5 w6".split()
    ids = [vocab.add(w) for w in words]
    u1 = tokenize("ask about topic", vocab, grow=True)
    u2 = tokenize("repeat it please", vocab, grow=True)
    vocab.add("<user>")
    a_tag = vocab.add("<assistant>")
    table = {}
    table[(u1[-1], a_tag)] = ids[0]
    table[(u2[-1], a_tag)] = ids[0]
    table[(a_tag, ids[0])] = ids[1]
    for j in range(2, len(ids)):
        table[(ids[j - 2], ids[j - 1])] = ids[j]
    table[(ids[-2], ids[-1])] = EOT_ID
    target = TableLM(len(vocab), 2, table, fallback=EOT_ID)
    transcript = Transcript(
        "rep",
        "demo",
        (
            Turn("user", "ask about topic"),
            Turn("assistant", " ".join(words)),  # reference; ignored by generation
            Turn("user", "repeat it please"),
        ),
    )
    return transcript, vocab, target


def test_run_transcript_second_turn_copies():
    transcript, vocab, target = make_repeat_transcript()
    results = run_transcript(transcript, vocab, target, None, EngineConfig(strategy="copy"))
    assert len(results) == 2
    assert results[0].output == results[1].output
    assert results[0].metrics.pct_copied == 0.0
    assert results[1].metrics.pct_copied > 0.5


def test_run_transcript_single_turn_equals_generate():
    transcript, vocab, target = make_repeat_transcript()
    single = Transcript("one", "demo", (Turn("user", "ask about topic"),))
    results = run_transcript(single, vocab, target.spawn(), None, EngineConfig(strategy="copy"))
    from copyspec.corpus import turn_prefix_tokens

    prompt = turn_prefix_tokens("ask about topic", vocab)
    out, _ = generate(prompt, target.spawn(), config=EngineConfig(strategy="copy"))
    assert results[0].output == out


def test_run_transcript_three_turns_monotone_context():
    vocab = Vocabulary()
    target = TableLM(vocab_size=4096, order=2, table={}, fallback=EOT_ID)
    transcript = Transcript(
        "t3",
        "demo",
        (
            Turn("user", "one point"),
            Turn("assistant", "ref a"),
            Turn("user", "two points"),
            Turn("assistant", "ref b"),
            Turn("user", "three points"),
        ),
    )
    results = run_transcript(transcript, vocab, target, None, EngineConfig(strategy="copy"))
    assert len(results) == 3
    assert [r.turn for r in results] == [1, 2, 3]


def test_losslessness_randomized_sample():
    rng = np.random.default_rng(123)
    for case in range(60):
        vocab_size = int(rng.integers(4, 33))
        target = random_table_lm(rng, vocab_size) if case % 2 else random_kgram_lm(rng, vocab_size)
        draft = random_table_lm(rng, vocab_size)
        prompt = [int(x) for x in rng.integers(1, vocab_size, size=int(rng.integers(1, 30)))]
        budget = int(rng.integers(1, 80))
        ref = greedy_reference(target, prompt, budget)
        for strategy in ("copy", "specdec", "copy_plus_specdec"):
            config = EngineConfig(
                strategy=strategy,
                gamma=int(rng.integers(1, 5)),
                chunk_len=int(rng.integers(1, 12)),
                draft_len=int(rng.integers(1, 6)),
                max_new_tokens=budget,
            )
            out, _ = generate(prompt, target.spawn(), draft.spawn(), config)
            assert out == ref, (strategy, config)


def test_attempt_outcome_invariants():
    outcome = AttemptOutcome(source="copy", proposed=4, accepted_k=2, bonus=7, hit_eot=False)
    assert 0 <= outcome.accepted_k <= outcome.proposed


def test_engine_config_validation():
    for bad in (
        {"gamma": 0},
        {"chunk_len": 0},
        {"draft_len": 0},
        {"max_new_tokens": 0},
        {"strategy": "magic"},
    ):
        with pytest.raises(ValueError):
            EngineConfig(**bad)
    assert EngineConfig().gamma == 3
    assert EngineConfig().chunk_len == 10
    assert EngineConfig().max_new_tokens == 1024
