import numpy as np
import pytest

from copyspec.match_index import EmptyChunk, MatchIndex, MatchResult, extract_chunk

from oracles import naive_gram_positions, naive_match_scan


def build_index(context, gamma, hash_fn=None):
    index = MatchIndex(gamma=gamma, hash_fn=hash_fn)
    index.extend(context, context)
    return index


def test_extend_too_short_inserts_nothing():
    index = build_index([1, 2], gamma=3)
    assert index.buckets == {} and index.length == 2


def test_extend_boundary_single_gram():
    index = build_index([1, 2, 3], gamma=3)
    entries = [e for bucket in index.buckets.values() for e in bucket]
    assert entries == [(1, (1, 2, 3))]


def test_extend_matches_naive_enumeration():
    context = [1, 2, 3, 1, 2, 3]
    index = build_index(context, gamma=3)
    entries = sorted(e for bucket in index.buckets.values() for e in bucket)
    assert entries == sorted(naive_gram_positions(context, 3))
    # the repeated gram's bucket holds both positions in order
    h = index._hash((1, 2, 3))
    assert [p for p, _ in index.buckets[h] if _ == (1, 2, 3)] == [1, 4]


def test_extend_rejects_inconsistent_suffix():
    index = MatchIndex(gamma=2)
    index.extend([1, 2], [1, 2])
    with pytest.raises(ValueError):
        index.extend([1, 2, 3], [9])
    with pytest.raises(ValueError):
        index.extend([1, 2, 3, 4], [4])


def test_lookup_earliest_nonoverlapping():
    context = [1, 2, 3, 4, 1, 2, 3]
    index = build_index(context, gamma=3)
    assert naive_match_scan(context, 3) == 1
    assert index.lookup(context) == MatchResult(source_pos=1, copy_start=4)


def test_lookup_overlap_excluded():
    context = [1, 2, 3, 4]
    index = build_index(context, gamma=2)
    assert naive_match_scan(context, 2) is None
    assert index.lookup(context) is None


def test_lookup_degenerate_repetition():
    context = [5, 5, 5, 5, 5, 5]
    index = build_index(context, gamma=2)
    assert naive_match_scan(context, 2) == 1
    assert index.lookup(context) == MatchResult(source_pos=1, copy_start=3)


def test_lookup_short_context_returns_none():
    index = build_index([1, 2], gamma=3)
    assert index.lookup([1, 2]) is None


def test_randomized_oracle_equivalence():
    rng = np.random.default_rng(42)
    for _ in range(300):
        gamma = int(rng.integers(1, 6))
        alphabet = int(rng.integers(2, 9))
        length = int(rng.integers(gamma, 201))
        context = [int(x) for x in rng.integers(0, alphabet, size=length)]
        index = build_index(context, gamma)
        got = index.lookup(context)
        want = naive_match_scan(context, gamma)
        assert (got.source_pos if got else None) == want


def test_weak_hash_never_returns_false_match():
    # a constant hash throws every gram into one bucket; exact-token
    # confirmation must still keep results identical to the naive scan
    rng = np.random.default_rng(7)
    for _ in range(100):
        gamma = int(rng.integers(1, 4))
        context = [int(x) for x in rng.integers(0, 4, size=int(rng.integers(gamma, 60)))]
        index = build_index(context, gamma, hash_fn=lambda window: 0)
        got = index.lookup(context)
        want = naive_match_scan(context, gamma)
        assert (got.source_pos if got else None) == want
        if got is not None:
            p = got.source_pos
            assert context[p - 1:p - 1 + gamma] == context[-gamma:]


def test_incremental_equals_batch():
    rng = np.random.default_rng(3)
    context = [int(x) for x in rng.integers(0, 5, size=80)]
    batch = build_index(context, gamma=3)
    incremental = MatchIndex(gamma=3)
    for i in range(len(context)):
        incremental.extend(context[: i + 1], [context[i]])
    assert incremental.buckets == batch.buckets
    assert incremental.length == batch.length


def test_mixing_work_is_context_length_independent():
    short = build_index(list(range(10)), gamma=3)
    long = build_index(list(range(5000)), gamma=3)
    before_short, before_long = short.mix_ops, long.mix_ops
    short.extend(list(range(10)) + [1], [1])
    long.extend(list(range(5000)) + [1], [1])
    added_short = short.mix_ops - before_short
    added_long = long.mix_ops - before_long
    assert added_short == added_long == 3  # one gram hashed, gamma mixes


def test_extract_chunk_truncates_at_context_end():
    context = [1, 2, 3, 4, 1, 2, 3]
    match = MatchResult(source_pos=1, copy_start=4)
    assert extract_chunk(context, match, 10) == [4, 1, 2, 3]
    assert extract_chunk(context, match, 1) == [4]


def test_extract_chunk_empty_raises():
    with pytest.raises(EmptyChunk):
        extract_chunk([1, 2, 3], MatchResult(source_pos=1, copy_start=4), 5)


def test_gamma_validation():
    with pytest.raises(ValueError):
        MatchIndex(gamma=0)
    with pytest.raises(ValueError):
        extract_chunk([1, 2, 3], MatchResult(1, 2), 0)
