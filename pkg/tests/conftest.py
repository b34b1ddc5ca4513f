import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # tests/oracles.py

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def redundant_setup():
    """Shipped redundant corpus with its trained target/draft models."""
    from copyspec import Vocabulary, train_kgram
    from copyspec.corpus import load_transcripts, training_sequences

    corpus = load_transcripts(DATA_DIR / "redundant_2turn.jsonl")
    vocab = Vocabulary()
    seqs = training_sequences(corpus, vocab)
    target = train_kgram(seqs, 4, vocab_size=len(vocab))
    draft = train_kgram(seqs, 2, vocab_size=len(vocab))
    return corpus, vocab, target, draft


@pytest.fixture(scope="session")
def novel_setup():
    from copyspec import Vocabulary, train_kgram
    from copyspec.corpus import load_transcripts, training_sequences

    corpus = load_transcripts(DATA_DIR / "novel_2turn.jsonl")
    vocab = Vocabulary()
    seqs = training_sequences(corpus, vocab)
    target = train_kgram(seqs, 4, vocab_size=len(vocab))
    return corpus, vocab, target
