"""Chunk-level precision / recall / F1 with CoNLL-2000 (conlleval) semantics.

Chunks are read from BIO labels with conlleval's lenient rule: an ``I-X``
that does not continue an ``X`` chunk opens a new one. A chunk is correct
only when type, start and end all match. Sentences are scored independently
(no chunk crosses a sentence boundary).
"""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import AlignmentError, ParseError


class Chunk(NamedTuple):
    type: str
    start: int
    end: int  # inclusive


def split_label(label, outside="O"):
    """``'B-x' -> ('B', 'x')``; ``'O' -> ('O', '')``."""
    if label == outside:
        return outside, ""
    prefix, sep, kind = label.partition("-")
    if not sep or prefix not in ("B", "I") or not kind:
        raise ParseError(f"unknown label {label!r}")
    return prefix, kind


def extract_chunks(labels: Sequence[str], outside="O"):
    chunks = []
    cur_type, cur_start = None, 0
    for i, label in enumerate(labels):
        prefix, kind = split_label(label, outside)
        continues = prefix == "I" and kind == cur_type
        if cur_type is not None and not continues:
            chunks.append(Chunk(cur_type, cur_start, i - 1))
            cur_type = None
        if prefix in ("B", "I") and not continues:
            cur_type, cur_start = kind, i
    if cur_type is not None:
        chunks.append(Chunk(cur_type, cur_start, len(labels) - 1))
    return chunks


def _prf(correct, predicted, gold):
    p = 100.0 * correct / predicted if predicted else 0.0
    r = 100.0 * correct / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


@dataclass
class TypeScore:
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    correct: int


@dataclass
class ChunkF1Report:
    precision: float
    recall: float
    f1: float
    gold_chunks: int
    predicted_chunks: int
    correct_chunks: int
    tokens: int = 0
    correct_tags: int = 0
    per_type: dict = field(default_factory=dict)

    @property
    def accuracy(self):
        return 100.0 * self.correct_tags / self.tokens if self.tokens else 0.0

    def conlleval_text(self):
        """Text laid out like the conlleval script's output."""
        lines = [
            f"processed {self.tokens} tokens with {self.gold_chunks} phrases; "
            f"found: {self.predicted_chunks} phrases; correct: {self.correct_chunks}.",
            f"accuracy: {self.accuracy:6.2f}%; precision: {self.precision:6.2f}%; "
            f"recall: {self.recall:6.2f}%; FB1: {self.f1:6.2f}",
        ]
        for kind in sorted(self.per_type):
            ts = self.per_type[kind]
            lines.append(
                f"{kind:>17s}: precision: {ts.precision:6.2f}%; recall: {ts.recall:6.2f}%; "
                f"FB1: {ts.f1:6.2f}  {ts.predicted}"
            )
        return "\n".join(lines) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["type", "precision", "recall", "f1", "gold", "predicted", "correct"])
        w.writerow(["__overall__", f"{self.precision:.2f}", f"{self.recall:.2f}", f"{self.f1:.2f}",
                    self.gold_chunks, self.predicted_chunks, self.correct_chunks])
        for kind in sorted(self.per_type):
            ts = self.per_type[kind]
            w.writerow([kind, f"{ts.precision:.2f}", f"{ts.recall:.2f}", f"{ts.f1:.2f}",
                        ts.gold, ts.predicted, ts.correct])
        return buf.getvalue()


def f1_score(gold: Sequence[Sequence[str]], predicted: Sequence[Sequence[str]], outside="O"):
    """Score aligned per-sentence label sequences."""
    if len(gold) != len(predicted):
        raise AlignmentError(f"{len(gold)} gold sentences vs {len(predicted)} predicted")
    n_gold, n_pred, n_ok = Counter(), Counter(), Counter()
    tokens = ok_tags = 0
    for si, (g, p) in enumerate(zip(gold, predicted)):
        if len(g) != len(p):
            raise AlignmentError(f"sentence {si}: {len(g)} gold labels vs {len(p)} predicted")
        gc, pc = extract_chunks(g, outside), extract_chunks(p, outside)
        n_gold.update(c.type for c in gc)
        n_pred.update(c.type for c in pc)
        n_ok.update(c.type for c in set(gc) & set(pc))
        tokens += len(g)
        ok_tags += sum(a == b for a, b in zip(g, p))
    per_type = {}
    for kind in set(n_gold) | set(n_pred):
        per_type[kind] = TypeScore(*_prf(n_ok[kind], n_pred[kind], n_gold[kind]),
                                   n_gold[kind], n_pred[kind], n_ok[kind])
    total = (sum(n_ok.values()), sum(n_pred.values()), sum(n_gold.values()))
    p, r, f = _prf(*total)
    return ChunkF1Report(p, r, f, total[2], total[1], total[0], tokens, ok_tags, per_type)


def read_tagged(lines, source="<input>", boundary="-X-"):
    """Parse three-column ``word gold predicted`` lines into per-sentence lists.

    Blank lines and lines whose first field is ``boundary`` separate sentences.
    Returns ``(words, gold, predicted)``.
    """
    words, gold, pred = [], [], []
    cur = ([], [], [])
    n_fields = None

    def flush():
        if cur[0]:
            words.append(cur[0][:])
            gold.append(cur[1][:])
            pred.append(cur[2][:])
            for part in cur:
                part.clear()

    for lineno, raw in enumerate(lines, 1):
        fields = raw.split()
        if not fields or fields[0] == boundary:
            flush()
            continue
        if len(fields) < 3:
            raise ParseError(f"{source}: expected at least 3 columns, got {len(fields)}", lineno)
        if n_fields is None:
            n_fields = len(fields)
        elif len(fields) != n_fields:
            raise ParseError(f"{source}: expected {n_fields} columns, got {len(fields)}", lineno)
        for label in (fields[-2], fields[-1]):
            try:
                split_label(label)
            except ParseError as exc:
                raise ParseError(f"{source}: {exc}", lineno) from None
        cur[0].append(fields[0])
        cur[1].append(fields[-2])
        cur[2].append(fields[-1])
    flush()
    return words, gold, pred


def evaluate_file(path):
    with open(path, encoding="utf-8") as fh:
        _, gold, pred = read_tagged(fh, str(path))
    return f1_score(gold, pred)


def format_tagged(words, gold, predicted):
    """Three-column conlleval input, one blank line after each sentence."""
    out = []
    for ws, gs, ps in zip(words, gold, predicted):
        out.extend(f"{w} {g} {p}\n" for w, g, p in zip(ws, gs, ps))
        out.append("\n")
    return "".join(out)
