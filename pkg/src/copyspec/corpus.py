"""Tokenization and ingestion of multi-turn transcripts into token sequences.

Tokens are non-negative integer ids into a session :class:`Vocabulary`.
The tokenizer is deliberately word-level: it splits on Unicode whitespace
and peels trailing punctuation into separate tokens, which keeps copied
spans human-inspectable when tracing the generation engine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

EOT_SYMBOL = "<eot>"
EOT_ID = 0
USER_TAG = "<user>"
ASSISTANT_TAG = "<assistant>"

_TRAILING_PUNCT = ".,;:!?"


class UnknownSymbol(KeyError):
    """A symbol is absent from the vocabulary and growth is disabled."""


class InvalidTokenId(IndexError):
    """A token id falls outside the vocabulary."""


class ParseError(ValueError):
    """A transcript line could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class MissingField(ValueError):
    """A required field is absent from a transcript object."""

    def __init__(self, name: str):
        super().__init__(f"missing field {name!r}")
        self.name = name


class BadRoleSequence(ValueError):
    """Transcript roles do not alternate user/assistant starting with user."""


class Vocabulary:
    """Append-only symbol table.

    Ids are assigned in first-seen order and never change within a session.
    Id 0 is always the reserved end-of-text symbol.
    """

    def __init__(self, symbols: list[str] | None = None):
        self._symbols: list[str] = []
        self._ids: dict[str, int] = {}
        self.add(EOT_SYMBOL)
        for sym in symbols or []:
            if sym != EOT_SYMBOL:
                self.add(sym)

    def __len__(self) -> int:
        return len(self._symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(self._symbols)

    def add(self, symbol: str) -> int:
        """Return the id of ``symbol``, appending it if unseen."""
        tid = self._ids.get(symbol)
        if tid is None:
            tid = len(self._symbols)
            self._symbols.append(symbol)
            self._ids[symbol] = tid
        return tid

    def id_of(self, symbol: str) -> int:
        tid = self._ids.get(symbol)
        if tid is None:
            raise UnknownSymbol(symbol)
        return tid

    def symbol_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._symbols):
            raise InvalidTokenId(token_id)
        return self._symbols[token_id]


@dataclass(frozen=True)
class Turn:
    role: str  # "user" | "assistant"
    text: str


@dataclass(frozen=True)
class Transcript:
    """An ordered multi-turn conversation; roles alternate starting with user."""

    id: str
    category: str
    turns: tuple[Turn, ...]

    def __post_init__(self):
        _check_roles(self.turns)

    def user_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.role == "user"]


def _check_roles(turns: tuple[Turn, ...]) -> None:
    if not turns or turns[0].role != "user":
        raise BadRoleSequence("transcript must start with a user turn")
    for prev, cur in zip(turns, turns[1:]):
        if cur.role == prev.role or cur.role not in ("user", "assistant"):
            raise BadRoleSequence(f"roles must alternate, got {prev.role!r} then {cur.role!r}")


def _split_words(text: str) -> list[str]:
    words: list[str] = []
    for raw in text.split():
        peeled: list[str] = []
        while len(raw) > 1 and raw[-1] in _TRAILING_PUNCT:
            peeled.append(raw[-1])
            raw = raw[:-1]
        words.append(raw)
        words.extend(reversed(peeled))
    return words


def tokenize(text: str, vocab: Vocabulary, grow: bool = False) -> list[int]:
    """Map ``text`` to token ids, optionally growing ``vocab`` on unseen symbols.

    Deterministic: the same text against the same vocabulary always yields
    the same ids. With ``grow`` unset an unseen symbol raises
    :class:`UnknownSymbol`.
    """
    if grow:
        return [vocab.add(w) for w in _split_words(text)]
    return [vocab.id_of(w) for w in _split_words(text)]


def detokenize(seq: list[int], vocab: Vocabulary) -> str:
    """Join the symbols of ``seq`` with single spaces.

    Inverse of :func:`tokenize` on space-separated input.
    """
    return " ".join(vocab.symbol_of(t) for t in seq)


def _transcript_from_obj(obj: dict) -> Transcript:
    for name in ("id", "turns"):
        if name not in obj:
            raise MissingField(name)
    turns = []
    for item in obj["turns"]:
        if not isinstance(item, dict) or "role" not in item:
            raise MissingField("role")
        if "text" not in item:
            raise MissingField("text")
        turns.append(Turn(role=item["role"], text=item["text"]))
    return Transcript(id=str(obj["id"]), category=str(obj.get("category", "")), turns=tuple(turns))


def load_transcripts(path: str | Path) -> list[Transcript]:
    """Load one-JSON-object-per-line transcripts, preserving file order.

    Any malformed line raises :class:`ParseError` naming the 1-based line;
    the underlying cause (bad JSON, :class:`MissingField`,
    :class:`BadRoleSequence`) is chained. Blank lines are skipped.
    """
    out: list[Transcript] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                out.append(_transcript_from_obj(obj))
            except (json.JSONDecodeError, MissingField, BadRoleSequence, TypeError) as exc:
                raise ParseError(lineno, str(exc)) from exc
    return out


def save_transcripts(path: str | Path, transcripts: list[Transcript]) -> None:
    """Write transcripts in the one-object-per-line format read by loading."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in transcripts:
            obj = {
                "id": t.id,
                "category": t.category,
                "turns": [{"role": turn.role, "text": turn.text} for turn in t.turns],
            }
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def turn_prefix_tokens(user_text: str, vocab: Vocabulary, grow: bool = True) -> list[int]:
    """Tokens appended to the context before generating one assistant turn.

    Layout: role tag, user text, assistant tag. The engine's generated
    answer (ending in end-of-text) follows directly after.
    """
    return (
        [vocab.add(USER_TAG) if grow else vocab.id_of(USER_TAG)]
        + tokenize(user_text, vocab, grow=grow)
        + [vocab.add(ASSISTANT_TAG) if grow else vocab.id_of(ASSISTANT_TAG)]
    )


def assemble_transcript_tokens(transcript: Transcript, vocab: Vocabulary, grow: bool = True) -> list[int]:
    """Full token sequence of a transcript including reference answers.

    Mirrors the context layout used during generation: each user turn is
    wrapped in role tags and each assistant text ends with end-of-text.
    Used for corpus statistics (reference-model training), never as
    generation context.
    """
    toks: list[int] = []
    for turn in transcript.turns:
        if turn.role == "user":
            toks += turn_prefix_tokens(turn.text, vocab, grow=grow)
        else:
            toks += tokenize(turn.text, vocab, grow=grow)
            toks.append(EOT_ID)
    return toks


def training_sequences(transcripts: list[Transcript], vocab: Vocabulary) -> list[list[int]]:
    """One assembled token sequence per transcript, growing ``vocab``."""
    return [assemble_transcript_tokens(t, vocab, grow=True) for t in transcripts]
