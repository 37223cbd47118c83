import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from biscnn.errors import AlignmentError, ParseError
from biscnn.eval import Chunk, evaluate_file, extract_chunks, f1_score, format_tagged, read_tagged

FIXTURES = Path(__file__).parent / "fixtures" / "conlleval"
EXPECTED = json.loads((FIXTURES / "expected.json").read_text(encoding="utf-8"))

labels = st.lists(st.sampled_from(["O", "B-a", "I-a", "B-b", "I-b"]), min_size=0, max_size=12)


def canonical(seq):
    """Rewrite every chunk as B-X I-X ... I-X."""
    out = ["O"] * len(seq)
    for c in extract_chunks(seq):
        out[c.start] = "B-" + c.type
        for i in range(c.start + 1, c.end + 1):
            out[i] = "I-" + c.type
    return out


class TestChunks:
    def test_canonical_span(self):
        assert extract_chunks(["B-x", "I-x", "O"]) == [Chunk("x", 0, 1)]

    def test_no_chunks(self):
        assert extract_chunks(["O", "O"]) == []

    def test_lenient_starts(self):
        assert extract_chunks(["I-x", "I-y", "B-y"]) == [Chunk("x", 0, 0), Chunk("y", 1, 1), Chunk("y", 2, 2)]

    def test_dotted_slot_names(self):
        chunks = extract_chunks(["B-fromloc.city_name", "I-fromloc.city_name"])
        assert chunks == [Chunk("fromloc.city_name", 0, 1)]

    def test_unknown_label(self):
        with pytest.raises(ParseError):
            extract_chunks(["B-x", "X-y"])

    @given(labels)
    def test_idempotent_under_canonical_form(self, seq):
        assert extract_chunks(canonical(seq)) == extract_chunks(seq)

    @given(labels)
    def test_chunks_are_disjoint_and_ordered(self, seq):
        chunks = extract_chunks(seq)
        for c in chunks:
            assert c.start <= c.end
        for a, b in zip(chunks, chunks[1:]):
            assert a.end < b.start


class TestF1:
    def test_perfect(self):
        gold = [["B-a", "I-a", "O", "B-b"]]
        assert f1_score(gold, gold).f1 == 100.0

    def test_all_outside(self):
        assert f1_score([["B-a", "O"]], [["O", "O"]]).f1 == 0.0

    def test_hand_computed(self):
        r = f1_score([["B-x", "O", "B-y", "I-y", "O", "B-z"]], [["B-x", "O", "B-y", "O", "O", "O"]])
        assert (r.gold_chunks, r.predicted_chunks, r.correct_chunks) == (3, 2, 1)
        assert r.precision == 50.0
        assert r.recall == pytest.approx(100 / 3)
        assert r.f1 == pytest.approx(40.0, abs=1e-12)

    def test_alignment(self):
        with pytest.raises(AlignmentError):
            f1_score([["O"]], [["O", "O"]])
        with pytest.raises(AlignmentError):
            f1_score([["O"]], [])

    @given(st.lists(st.tuples(labels, labels), min_size=1, max_size=5))
    def test_bounded_and_perfect_iff_same_chunks(self, pairs):
        gold = [g for g, p in pairs]
        pred = [p[:len(g)] + ["O"] * (len(g) - len(p)) for g, p in pairs]
        r = f1_score(gold, pred)
        assert 0.0 <= r.f1 <= 100.0 + 1e-9
        same = all(extract_chunks(g) == extract_chunks(p) for g, p in zip(gold, pred))
        has_chunks = any(extract_chunks(g) for g in gold)
        if has_chunks:
            assert (abs(r.f1 - 100.0) < 1e-9) == same

    def test_report_text_layout(self):
        r = f1_score([["B-a", "I-a", "O"]], [["B-a", "I-a", "O"]])
        text = r.conlleval_text()
        assert text.splitlines()[0] == "processed 3 tokens with 1 phrases; found: 1 phrases; correct: 1."
        assert "FB1: 100.00" in text.splitlines()[1]
        assert text.splitlines()[2].strip().startswith("a: precision: 100.00%")

    def test_csv(self):
        r = f1_score([["B-a", "O", "B-b"]], [["B-a", "O", "O"]])
        rows = [line.split(",") for line in r.to_csv().splitlines()]
        assert rows[0][:4] == ["type", "precision", "recall", "f1"]
        assert rows[1][:4] == ["__overall__", "100.00", "50.00", "66.67"]


class TestTaggedFiles:
    def test_read_and_format_round_trip(self):
        words, gold, pred = [["a", "b"], ["c"]], [["B-x", "I-x"], ["O"]], [["B-x", "O"], ["B-y"]]
        text = format_tagged(words, gold, pred)
        assert read_tagged(text.splitlines()) == (words, gold, pred)

    def test_boundary_lines_split(self):
        words, _, _ = read_tagged(["-X- O O", "a O O", "-X- O O", "b O O"])
        assert words == [["a"], ["b"]]

    def test_malformed_line_number(self):
        with pytest.raises(ParseError) as err:
            read_tagged(["a O O", "b O", ""])
        assert err.value.lineno == 2

    def test_inconsistent_columns(self):
        with pytest.raises(ParseError) as err:
            read_tagged(["a NN O O", "b O O"])
        assert err.value.lineno == 2

    def test_bad_label(self):
        with pytest.raises(ParseError):
            read_tagged(["a O Q-x"])

    def test_fixture_set_is_large_enough(self):
        assert len(EXPECTED) >= 10
        assert "03_lenient_start.txt" in EXPECTED


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_matches_frozen_conlleval_output(name):
    exp = EXPECTED[name]
    r = evaluate_file(FIXTURES / name)
    assert (r.gold_chunks, r.predicted_chunks, r.correct_chunks, r.tokens) == (
        exp["gold"], exp["found"], exp["correct"], exp["tokens"])
    assert (f"{r.precision:.2f}", f"{r.recall:.2f}", f"{r.f1:.2f}") == (
        f"{exp['precision']:.2f}", f"{exp['recall']:.2f}", f"{exp['f1']:.2f}")
    assert f"{r.accuracy:.2f}" == f"{exp['accuracy']:.2f}"
    assert set(r.per_type) == set(exp["per_type"])
    for kind, ts in exp["per_type"].items():
        got = r.per_type[kind]
        assert f"{got.f1:.2f}" == f"{ts['f1']:.2f}", kind
