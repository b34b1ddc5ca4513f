"""The generation loop: copy-first speculation, draft fallback, verification.

Each step makes one attempt. If the strategy allows copying and the last
gamma tokens of the accepted sequence occur earlier in it, the tokens that
followed the earlier occurrence are proposed as a chunk and verified by
the target model in one blockwise pass. Otherwise a smaller draft model
may propose tokens. Verification accepts the longest prefix matching the
target's argmax and always yields one extra guaranteed token from the
target, which diverges from the first rejected token and so prevents
repeated failed attempts at the same spot. Rejected tokens are rolled
back by truncating the model caches to the accepted prefix.

The engine is lossless by construction: for every strategy the emitted
sequence equals plain greedy decoding of the target model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import EOT_ID, Transcript, Vocabulary, turn_prefix_tokens
from .lm import LangModel, greedy_extend, peek_argmax
from .match_index import EmptyChunk, MatchIndex, extract_chunk
from .metrics import CostModel, RunMetrics, score_log

STRATEGIES = ("baseline", "copy", "specdec", "copy_plus_specdec")

SOURCE_COPY = "copy"
SOURCE_DRAFT = "draft"
SOURCE_PLAIN = "plain"


class BudgetExhausted(RuntimeError):
    """step() called with no output budget left; normal termination."""


@dataclass(frozen=True)
class EngineConfig:
    gamma: int = 3
    chunk_len: int = 10
    draft_len: int = 3
    strategy: str = "copy"
    max_new_tokens: int = 1024

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.chunk_len < 1:
            raise ValueError("chunk_len must be >= 1")
        if self.draft_len < 1:
            raise ValueError("draft_len must be >= 1")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")

    @property
    def allows_copy(self) -> bool:
        return self.strategy in ("copy", "copy_plus_specdec")

    @property
    def allows_draft(self) -> bool:
        return self.strategy in ("specdec", "copy_plus_specdec")


@dataclass(frozen=True)
class AttemptOutcome:
    """Result of one verification attempt.

    Every attempt commits ``accepted_k`` proposed tokens plus the bonus
    token to the context. When the bonus is end-of-text (``hit_eot``) the
    emitted output ends just before it. An end-of-text token accepted from
    inside a proposal is reclassified as the bonus, so ``accepted_k`` only
    ever counts ordinary proposed tokens.
    """

    source: str  # copy | draft | plain
    proposed: int
    accepted_k: int
    bonus: int
    hit_eot: bool
    index_ops: int = 0


class Session:
    """Single-owner generation state: context, match index, model caches.

    The context may be extended across multiple generation runs (one per
    conversation turn); the match index persists and grows with it, so
    later turns can copy from everything that came before.
    """

    def __init__(self, target: LangModel, draft: LangModel | None, config: EngineConfig):
        self.target = target
        self.draft = draft
        self.config = config
        self.context: list[int] = []
        self.index = MatchIndex(gamma=config.gamma)
        self.log: list[AttemptOutcome] = []

    def extend_context(self, tokens: list[int]) -> None:
        """Append prompt-side tokens: fed to the model caches and indexed.

        Prompt processing is not an attempt and carries no simulated cost.
        """
        if not tokens:
            return
        self.target.score_block(tokens)
        if self.draft is not None:
            self.draft.score_block(tokens)
        self.context.extend(tokens)
        self.index.extend(self.context, tokens)

    def _commit(self, accepted: list[int], bonus: int) -> None:
        """Roll caches back to the accepted prefix, then append the bonus."""
        t = len(self.context)
        self.target.truncate(t + len(accepted))
        self.target.score_block([bonus])
        if self.draft is not None:
            if self.draft.state_len > t + len(accepted):
                self.draft.truncate(t + len(accepted))
            # feed whatever the draft has not seen yet (it saw its own
            # proposals on draft attempts, nothing on copy/plain attempts)
            self.draft.score_block(accepted[self.draft.state_len - t:] + [bonus])
        self.context.extend(accepted)
        self.context.append(bonus)
        self.index.extend(self.context, accepted + [bonus])

    def verify_block(self, proposal: list[int], source: str, index_ops: int = 0) -> AttemptOutcome:
        """Score a proposal in one pass; accept its longest argmax prefix.

        The bonus is read from the same block scores on a partial reject,
        or from one extra single-token score on full acceptance (a real
        verification pass yields proposed+1 distributions; the cost model
        charges it that way).
        """
        scores = self.target.score_block(proposal)
        k = 0
        eot_accepted = False
        for tok, argmax in zip(proposal, scores):
            if tok != argmax:
                break
            if tok == EOT_ID:
                eot_accepted = True  # accepted end-of-text becomes the bonus
                break
            k += 1
        if eot_accepted:
            bonus = EOT_ID
        elif k < len(proposal):
            bonus = scores[k]
        else:
            bonus = peek_argmax(self.target)
        outcome = AttemptOutcome(
            source=source,
            proposed=len(proposal),
            accepted_k=k,
            bonus=bonus,
            hit_eot=bonus == EOT_ID,
            index_ops=index_ops + k + 1,
        )
        self._commit(proposal[:k], bonus)
        self.log.append(outcome)
        return outcome

    def _plain_step(self, index_ops: int) -> AttemptOutcome:
        bonus = peek_argmax(self.target)
        outcome = AttemptOutcome(
            source=SOURCE_PLAIN,
            proposed=0,
            accepted_k=0,
            bonus=bonus,
            hit_eot=bonus == EOT_ID,
            index_ops=index_ops + 1,
        )
        self._commit([], bonus)
        self.log.append(outcome)
        return outcome

    def step(self, remaining: int) -> AttemptOutcome:
        """One attempt: copy if a match exists, else draft, else plain.

        ``remaining`` is the output budget; proposals are capped so that
        accepted tokens plus the bonus never overshoot it. The match
        re-check against the last gamma tokens happens at the start of
        every step, i.e. after each attempt.
        """
        if remaining < 1:
            raise BudgetExhausted(f"no output budget left ({remaining})")
        cfg = self.config
        cap = remaining - 1  # room for proposed tokens; the bonus takes the last slot
        index_ops = 0
        if cfg.allows_copy and cap >= 1 and len(self.context) >= 2 * cfg.gamma:
            index_ops += 1
            match = self.index.lookup(self.context)
            if match is not None:
                try:
                    chunk = extract_chunk(self.context, match, min(cfg.chunk_len, cap))
                except EmptyChunk:
                    chunk = None  # match at the very end: nothing to propose
                if chunk:
                    return self.verify_block(chunk, SOURCE_COPY, index_ops)
        if cfg.allows_draft and self.draft is not None and cap >= 1:
            proposal = greedy_extend(self.draft, min(cfg.draft_len, cap))
            return self.verify_block(proposal, SOURCE_DRAFT, index_ops)
        return self._plain_step(index_ops)

    def run(self, max_new_tokens: int | None = None) -> tuple[list[int], list[AttemptOutcome]]:
        """Generate until end-of-text or the token budget is exhausted.

        Returns the emitted output (excluding the terminating end-of-text
        sentinel, which stays in the context) and the attempt log of this
        run. Committed tokens per attempt are accepted_k + 1, so the log
        partitions everything committed, sentinel included.
        """
        budget = self.config.max_new_tokens if max_new_tokens is None else max_new_tokens
        start = len(self.context)
        log_start = len(self.log)
        produced = 0
        ended_by_eot = False
        while produced < budget:
            outcome = self.step(budget - produced)
            produced += outcome.accepted_k + 1
            if outcome.hit_eot:
                ended_by_eot = True
                break
        end = len(self.context) - 1 if ended_by_eot else len(self.context)
        return self.context[start:end], self.log[log_start:]


def generate(
    prompt: list[int],
    target: LangModel,
    draft: LangModel | None = None,
    config: EngineConfig = EngineConfig(),
) -> tuple[list[int], list[AttemptOutcome]]:
    """Run one generation over a fresh session seeded with ``prompt``.

    For every strategy the output equals token-by-token greedy decoding of
    the target model on the same prompt.
    """
    if not prompt:
        raise ValueError("prompt must be non-empty")
    session = Session(target, draft, config)
    session.extend_context(list(prompt))
    return session.run()


@dataclass(frozen=True)
class TurnResult:
    turn: int  # 1-based user-turn number
    output: list[int]
    outcomes: list[AttemptOutcome]
    metrics: RunMetrics


def run_transcript(
    transcript: Transcript,
    vocab: Vocabulary,
    target: LangModel,
    draft: LangModel | None,
    config: EngineConfig,
    cost: CostModel | None = None,
) -> list[TurnResult]:
    """Generate one assistant answer per user turn, sharing one session.

    The context for each turn is everything before it: role-tagged user
    texts and the engine's own previous answers (file reference answers
    are ignored). The match index persists and grows across turns.
    """
    cost = cost or CostModel()
    session = Session(target, draft, config)
    results: list[TurnResult] = []
    for turn_no, turn in enumerate(transcript.user_turns(), start=1):
        session.extend_context(turn_prefix_tokens(turn.text, vocab, grow=True))
        output, outcomes = session.run()
        results.append(
            TurnResult(
                turn=turn_no,
                output=output,
                outcomes=outcomes,
                metrics=score_log(outcomes, cost),
            )
        )
    return results
