import numpy as np
import pytest

from paragen.errors import ValidationError
from paragen.vocab import (EOS, PAD, UNK, EmbeddingTable, Vocabulary, build_vocab,
                           decode_ids, encode_source, encode_target, tokenize)


def test_tokenize_punctuation():
    assert tokenize("Hello, world!") == ["hello", ",", "world", "!"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_keeps_apostrophes():
    assert tokenize("L'acqua è blu.") == ["l'acqua", "è", "blu", "."]


def test_tokenize_guillemets():
    assert tokenize("«Ciao» disse.") == ["«", "ciao", "»", "disse", "."]


def test_build_vocab_frequency_order():
    v = build_vocab([["a", "a", "b"]], max_size=6)
    assert v.id_to_token == ["<pad>", "<unk>", "<bos>", "<eos>", "a", "b"]


def test_build_vocab_tie_break_lexicographic():
    v = build_vocab([["a", "b", "a", "b"]], max_size=5)
    assert v.id_to_token[4] == "a"
    assert len(v) == 5


def test_build_vocab_against_frequency_sort_oracle():
    rng = np.random.default_rng(0)
    tokens = [f"tok{int(i):03d}" for i in rng.zipf(1.5, size=10_000) % 400]
    v = build_vocab([tokens], max_size=100)
    from collections import Counter
    counts = Counter(tokens)
    expected = [t for t, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))][:96]
    assert v.id_to_token[4:] == expected


def test_build_vocab_min_count():
    v = build_vocab([["a", "a", "b"]], max_size=10, min_count=2)
    assert "b" not in v
    assert "a" in v


def test_build_vocab_max_size_guard():
    with pytest.raises(ValidationError):
        build_vocab([["a"]], max_size=4)


def test_lookup_unknown_is_unk():
    v = Vocabulary(["x"])
    assert v.lookup("missing") == UNK
    assert v.lookup("x") == 4
    assert v.token(PAD) == "<pad>"
    assert v.token(EOS) == "<eos>"


def test_vocab_file_round_trip(tmp_path):
    v = build_vocab([["uno", "due", "due", "tre"]], max_size=10)
    path = tmp_path / "v.vocab"
    v.save(path)
    # one token per line, line number = id - 4
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == v.id_to_token[4:]
    again = Vocabulary.load(path)
    assert again.id_to_token == v.id_to_token
    assert again.fingerprint() == v.fingerprint()


def test_vocab_build_deterministic(tmp_path):
    corpus = [["b", "a", "c", "a"], ["c", "b", "a"]]
    p1, p2 = tmp_path / "1.vocab", tmp_path / "2.vocab"
    build_vocab(corpus, max_size=20).save(p1)
    build_vocab(list(corpus), max_size=20).save(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_encode_source_repeated_oov():
    v = Vocabulary(["the"])
    ids, ev = encode_source(["the", "zyxxy", "the", "zyxxy"], v)
    assert ids == [4, v.size, 4, v.size]
    assert ev.source_oovs == ["zyxxy"]


def test_encode_source_all_in_vocab():
    v = Vocabulary(["a", "b"])
    ids, ev = encode_source(["a", "b", "a"], v)
    assert ids == [4, 5, 4]
    assert ev.source_oovs == []
    assert ev.size == v.size


def test_encode_source_oov_ordering():
    v = Vocabulary(["x"])
    ids, ev = encode_source(["aa", "bb"], v)
    assert ids == [v.size, v.size + 1]
    assert ev.source_oovs == ["aa", "bb"]


def test_encode_source_empty_error():
    with pytest.raises(ValidationError):
        encode_source([], Vocabulary(["x"]))


def test_encode_target_oov_in_source():
    v = Vocabulary(["the"])
    _, ev = encode_source(["the", "zyxxy"], v)
    assert encode_target(["zyxxy"], ev) == [v.size]


def test_encode_target_oov_absent_from_source():
    v = Vocabulary(["the"])
    _, ev = encode_source(["the"], v)
    assert encode_target(["qqqq"], ev) == [UNK]


def test_encode_target_in_vocab_regardless_of_source():
    v = Vocabulary(["the", "cat"])
    _, ev = encode_source(["the"], v)
    assert encode_target(["cat"], ev) == [v.lookup("cat")]


def test_round_trip_decode():
    v = Vocabulary(["a", "b"])
    rng = np.random.default_rng(5)
    pool = ["a", "b", "oov1", "oov2", "oov3"]
    for _ in range(50):
        tokens = [pool[int(i)] for i in rng.integers(0, len(pool), size=rng.integers(1, 12))]
        ids, ev = encode_source(tokens, v)
        assert decode_ids(ids, ev) == tokens


def test_encode_target_id_bound_property():
    v = Vocabulary(["a", "b", "c"])
    rng = np.random.default_rng(6)
    pool = ["a", "b", "c", "n1", "n2", "n3", "n4"]
    for _ in range(100):
        src = [pool[int(i)] for i in rng.integers(0, len(pool), size=rng.integers(1, 8))]
        tgt = [pool[int(i)] for i in rng.integers(0, len(pool), size=rng.integers(1, 8))]
        ids, ev = encode_source(src, v)
        for t in encode_target(tgt, ev):
            assert 0 <= t < ev.size


def test_extended_vocab_token_range_error():
    v = Vocabulary(["a"])
    _, ev = encode_source(["a", "oov"], v)
    assert ev.token(v.size) == "oov"
    with pytest.raises(ValidationError):
        ev.token(ev.size)


def test_embedding_lookup_rows():
    rng = np.random.default_rng(1)
    table = EmbeddingTable(6, 4, rng)
    np.testing.assert_array_equal(table.lookup(3).data, table.table.data[3])
    # extended ids embed as UNK
    np.testing.assert_array_equal(table.lookup(17).data, table.table.data[UNK])
    with pytest.raises(ValidationError):
        table.lookup(-1)
