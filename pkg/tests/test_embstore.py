import io
import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_tree
from synprobe.embstore import (
    MAGIC,
    EmbeddingHeader,
    StoreDataError,
    StoreFormatError,
    align_check,
    read_store,
    write_store,
)
from synprobe.treebank import ROOT


def roundtrip(header, sentences):
    sink = io.BytesIO()
    write_store(header, sentences, sink)
    sink.seek(0)
    return read_store(sink)


def random_sentences(rng, count, dim):
    return [
        rng.standard_normal((int(rng.integers(1, 12)), dim)).astype(np.float32)
        for _ in range(count)
    ]


class TestLayout:
    def test_single_sentence_byte_arithmetic(self):
        header = EmbeddingHeader("m", 0, 2, 1)
        sink = io.BytesIO()
        written = write_store(header, [np.zeros((1, 2))], sink)
        meta_len = struct.unpack("<I", sink.getvalue()[5:9])[0]
        assert written == len(sink.getvalue()) == 5 + 4 + meta_len + 4 + 8

    def test_magic_and_metadata_keys(self):
        sink = io.BytesIO()
        write_store(EmbeddingHeader("m", 3, 4, 0), [], sink)
        raw = sink.getvalue()
        assert raw.startswith(MAGIC)
        meta = json.loads(raw[9:].decode("utf-8"))
        assert set(meta) == {"modelId", "layerIndex", "hiddenDim", "sentenceCount", "dtype"}
        assert meta["layerIndex"] == 3 and meta["dtype"] == "f32"

    def test_empty_store_roundtrip(self):
        header, sentences = roundtrip(EmbeddingHeader("m", 0, 8, 0), [])
        assert header.sentence_count == 0 and sentences == []


class TestRoundTrip:
    def test_fifty_random_sentences_bit_exact(self):
        rng = np.random.default_rng(0)
        sentences = random_sentences(rng, 50, 7)
        header, back = roundtrip(EmbeddingHeader("model-x", 5, 7, 50), sentences)
        assert header == EmbeddingHeader("model-x", 5, 7, 50)
        assert len(back) == 50
        for original, restored in zip(sentences, back):
            assert restored.dtype == np.float64
            assert np.array_equal(original.astype(np.float64), restored)

    @given(st.integers(0, 2**31 - 1), st.integers(0, 6), st.integers(1, 9))
    @settings(max_examples=30, deadline=None)
    def test_roundtrip_property(self, seed, count, dim):
        rng = np.random.default_rng(seed)
        sentences = random_sentences(rng, count, dim)
        _, back = roundtrip(EmbeddingHeader("m", 1, dim, count), sentences)
        assert all(np.array_equal(a, b) for a, b in zip(sentences, back))


class TestErrors:
    def test_bad_magic(self):
        with pytest.raises(StoreFormatError, match="not an embedding store"):
            read_store(io.BytesIO(b"NOPE!" + b"\x00" * 16))

    def test_truncated_mid_sentence_names_ordinal(self):
        sink = io.BytesIO()
        rng = np.random.default_rng(1)
        write_store(EmbeddingHeader("m", 0, 4, 3), random_sentences(rng, 3, 4), sink)
        cut = sink.getvalue()[:-6]
        with pytest.raises(StoreFormatError, match="unexpected end of store at sentence 2"):
            read_store(io.BytesIO(cut))

    def test_nan_names_sentence_and_word(self):
        rng = np.random.default_rng(2)
        sentences = random_sentences(rng, 5, 3)
        sentences[3][0, 1] = np.nan
        sink = io.BytesIO()
        write_store(EmbeddingHeader("m", 0, 3, 5), sentences, sink)
        sink.seek(0)
        with pytest.raises(StoreDataError, match="sentence 3, word 0"):
            read_store(sink)

    def test_dimension_mismatch_writes_nothing(self):
        sink = io.BytesIO()
        with pytest.raises(StoreFormatError, match="sentence 1"):
            write_store(
                EmbeddingHeader("m", 0, 4, 2),
                [np.zeros((2, 4)), np.zeros((2, 3))],
                sink,
            )
        assert sink.getvalue() == b""

    def test_sentence_count_mismatch(self):
        with pytest.raises(StoreFormatError, match="declares 2"):
            write_store(EmbeddingHeader("m", 0, 4, 2), [np.zeros((1, 4))], io.BytesIO())

    def test_header_validation(self):
        with pytest.raises(ValueError):
            EmbeddingHeader("m", 0, 0, 1)
        with pytest.raises(ValueError):
            EmbeddingHeader("m", 0, 4, 1, dtype="f64")


class TestTruncationFuzz:
    @given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_any_prefix_fails_cleanly(self, seed, fraction):
        rng = np.random.default_rng(seed)
        sentences = random_sentences(rng, 3, 4)
        sink = io.BytesIO()
        write_store(EmbeddingHeader("m", 0, 4, 3), sentences, sink)
        payload = sink.getvalue()
        prefix = payload[: int(fraction * (len(payload) - 1))]
        try:
            header, back = read_store(io.BytesIO(prefix))
        except StoreFormatError:
            pass  # every truncation must surface as a clean format error
        else:
            raise AssertionError("truncated store was accepted")


class TestAlignCheck:
    def test_matching(self):
        trees = [make_tree([ROOT, 0]), make_tree([ROOT])]
        report = align_check(trees, [np.zeros((2, 4)), np.zeros((1, 4))])
        assert report.ok and report.mismatches == ()

    def test_missing_last_sentence(self):
        trees = [make_tree([ROOT, 0]), make_tree([ROOT])]
        report = align_check(trees, [np.zeros((2, 4))])
        assert not report.ok
        assert report.mismatches == ((1, 1, 0),)

    def test_short_sentence_names_ordinal(self):
        trees = [make_tree([ROOT, 0]), make_tree([ROOT, 0, 0])]
        report = align_check(trees, [np.zeros((2, 4)), np.zeros((2, 4))])
        assert not report.ok
        assert report.mismatches == ((1, 3, 2),)
        assert "sentence 1" in report.describe()

    def test_mismatch_list_capped_at_ten(self):
        trees = [make_tree([ROOT]) for _ in range(15)]
        report = align_check(trees, [np.zeros((2, 4))] * 15)
        assert not report.ok and len(report.mismatches) == 10
