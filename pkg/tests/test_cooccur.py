import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_corpus
from embedsum.cooccur import (
    CooccurrenceMatrix,
    accumulate,
    load_matrix,
    merge_entries,
    save_matrix,
    to_log_matrix,
)

corpora = st.lists(
    st.lists(
        st.lists(st.sampled_from("abcd"), min_size=1, max_size=10),
        min_size=1,
        max_size=4,
    ),
    min_size=1,
    max_size=3,
)


def brute_force_pair_count(docs, window):
    """Positional pairs (t, t') with t < t' <= t + window inside one sentence."""
    count = 0
    for doc in docs:
        for sent in doc.sentences:
            n = sent.n_usable
            for t in range(n):
                count += min(window, n - 1 - t)
    return count


class TestAccumulate:
    def test_window1_flat_hand_enumeration(self):
        vocab, docs = make_corpus([[["a", "b", "c"]]])
        x = accumulate(docs, vocab, window=1, weighting="flat")
        a, b, c = (vocab.id_of(w) for w in "abc")
        assert x.entries == {(a, b): 1.0, (b, a): 1.0, (b, c): 1.0, (c, b): 1.0}

    def test_window2_inverse_distance(self):
        vocab, docs = make_corpus([[["a", "b", "c"]]])
        x = accumulate(docs, vocab, window=2, weighting="inverse_distance")
        a, c = vocab.id_of("a"), vocab.id_of("c")
        assert x.value(a, c) == 0.5
        assert x.value(c, a) == 0.5

    def test_single_token_sentence_empty(self):
        vocab, docs = make_corpus([[["a"]]])
        x = accumulate(docs, vocab, window=3)
        assert x.entries == {}

    def test_repeated_word_pair(self):
        vocab, docs = make_corpus([[["a", "a"]]])
        x = accumulate(docs, vocab, window=1)
        a = vocab.id_of("a")
        assert x.entries == {(a, a): 2.0}

    def test_window_respects_sentence_boundary(self):
        vocab, docs = make_corpus([[["a", "b"], ["c", "d"]]])
        x = accumulate(docs, vocab, window=5)
        assert x.value(vocab.id_of("b"), vocab.id_of("c")) == 0.0

    def test_bad_window_errors(self):
        vocab, docs = make_corpus([[["a", "b"]]])
        with pytest.raises(ValueError):
            accumulate(docs, vocab, window=0)

    def test_bad_weighting_errors(self):
        vocab, docs = make_corpus([[["a", "b"]]])
        with pytest.raises(ValueError):
            accumulate(docs, vocab, weighting="gaussian")

    @given(corpora, st.integers(min_value=1, max_value=4))
    def test_symmetry(self, sentences, window):
        vocab, docs = make_corpus(sentences)
        x = accumulate(docs, vocab, window=window)
        for (i, j), v in x.entries.items():
            assert x.entries[(j, i)] == v

    @given(corpora, st.integers(min_value=1, max_value=4))
    def test_total_mass_matches_brute_force(self, sentences, window):
        vocab, docs = make_corpus(sentences)
        x = accumulate(docs, vocab, window=window)
        assert x.total_mass() == 2 * brute_force_pair_count(docs, window)

    @given(corpora, corpora)
    def test_additivity(self, first, second):
        vocab, docs = make_corpus(first + second)
        n_first = sum(1 for _ in first)
        combined = accumulate(docs, vocab, window=2)
        part1 = accumulate(docs[:n_first], vocab, window=2)
        part2 = accumulate(docs[n_first:], vocab, window=2)
        assert merge_entries([part1.entries, part2.entries]) == combined.entries

    def test_worker_sharding_matches_single(self):
        vocab, docs = make_corpus([[["a", "b", "c"]], [["b", "c", "d"]], [["a", "d"]]])
        single = accumulate(docs, vocab, window=2)
        sharded = accumulate(docs, vocab, window=2, workers=3)
        assert single.entries == sharded.entries


class TestLogMatrix:
    def test_absent_stays_absent(self):
        x = CooccurrenceMatrix({(0, 1): 2.0, (1, 0): 2.0}, 1, "flat", 3)
        la = to_log_matrix(x)
        assert (0, 2) not in la.entries
        assert la.value(0, 2) == 0.0

    def test_count_e_minus_one_maps_to_one(self):
        x = CooccurrenceMatrix({(0, 1): math.e - 1.0}, 1, "flat", 2)
        assert to_log_matrix(x).value(0, 1) == pytest.approx(1.0, abs=1e-12)

    def test_count_three_maps_to_log_four(self):
        x = CooccurrenceMatrix({(0, 1): 3.0}, 1, "flat", 2)
        assert to_log_matrix(x).value(0, 1) == pytest.approx(math.log(4.0), abs=1e-12)

    def test_symmetry_preserved(self):
        vocab, docs = make_corpus([[["a", "b", "a", "c"]]])
        la = to_log_matrix(accumulate(docs, vocab, window=2))
        for (i, j), v in la.entries.items():
            assert la.entries[(j, i)] == v


class TestMatrixFile:
    def test_round_trip(self, tmp_path):
        vocab, docs = make_corpus([[["a", "b", "c", "a"]]])
        x = accumulate(docs, vocab, window=2, weighting="inverse_distance")
        path = tmp_path / "m.txt"
        save_matrix(x, str(path), {"command": "test"})
        loaded = load_matrix(str(path))
        assert loaded.entries == x.entries
        assert (loaded.vocab_size, loaded.window, loaded.weighting) == (
            x.vocab_size,
            x.window,
            x.weighting,
        )

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("3 5\n")
        with pytest.raises(ValueError, match="header"):
            load_matrix(str(path))

    def test_out_of_range_id(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("2 5 flat\n0 7 1.0\n")
        with pytest.raises(ValueError, match="out of range"):
            load_matrix(str(path))
