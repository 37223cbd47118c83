"""Two-column BIO corpora, vocabularies and per-token input windows."""
from __future__ import annotations

import io
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import EmptyCorpusError, ParseError

PAD_PAST = 0
PAD_FUTURE = 1
UNK = 2
RESERVED = ("<sentence_begin>", "<sentence_end>", "<unk>")
# how pads are rendered in analysis output
PAD_NAMES = {PAD_PAST: "sentence_begin", PAD_FUTURE: "sentence_end", UNK: "<unk>"}

OUTSIDE = -1
"""Score-column index standing for class O, which has no column of its own."""


@dataclass(frozen=True)
class Sentence:
    words: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.words:
            raise ValueError("a sentence needs at least one token")
        if len(self.words) != len(self.labels):
            raise ValueError("words and labels differ in length")

    def __len__(self):
        return len(self.words)


class Corpus(list):
    """An ordered list of :class:`Sentence` objects."""

    @property
    def n_tokens(self):
        return sum(len(s) for s in self)

    def label_inventory(self):
        """All labels in first-occurrence order."""
        seen = {}
        for sent in self:
            for lab in sent.labels:
                seen.setdefault(lab, None)
        return list(seen)


def _parse_lines(lines: Iterable[str], source: str) -> Corpus:
    corpus = Corpus()
    words, labels = [], []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            if words:
                corpus.append(Sentence(tuple(words), tuple(labels)))
                words, labels = [], []
            continue
        if line.startswith("-DOCSTART-"):
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ParseError(f"{source}: expected 'word label', got {line!r}", lineno)
        words.append(fields[0])
        labels.append(fields[-1])
    if words:
        corpus.append(Sentence(tuple(words), tuple(labels)))
    return corpus


def load_conll(path) -> Corpus:
    """Read a whitespace-separated file: word first, label last, blank line between sentences."""
    with open(path, encoding="utf-8") as fh:
        corpus = _parse_lines(fh, os.fspath(path))
    if not corpus:
        raise EmptyCorpusError(f"{os.fspath(path)}: no sentences found")
    return corpus


def parse_conll(text: str, source="<string>") -> Corpus:
    return _parse_lines(io.StringIO(text), source)


def format_conll(corpus: Iterable[Sentence]) -> str:
    out = []
    for sent in corpus:
        out.extend(f"{w} {lab}\n" for w, lab in zip(sent.words, sent.labels))
        out.append("\n")
    return "".join(out)


def write_conll(corpus, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_conll(corpus))


class Vocab:
    """Word <-> id map with reserved pad and unknown ids allocated first."""

    def __init__(self, words: Sequence[str] = ()):
        self.itos = list(RESERVED)
        self.stoi = {w: i for i, w in enumerate(self.itos)}
        for w in words:
            self.add(w)

    def add(self, word):
        if word not in self.stoi:
            self.stoi[word] = len(self.itos)
            self.itos.append(word)
        return self.stoi[word]

    def __len__(self):
        return len(self.itos)

    def __contains__(self, word):
        return word in self.stoi

    def __getitem__(self, word):
        return self.stoi.get(word, UNK)

    def encode(self, words):
        return np.fromiter((self.stoi.get(w, UNK) for w in words), dtype=np.intp, count=len(words))

    def render(self, idx):
        return PAD_NAMES.get(idx, self.itos[idx])

    @property
    def words(self):
        """Non-reserved words in id order; enough to rebuild the vocab."""
        return self.itos[len(RESERVED):]

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.itos == other.itos


def build_vocab(corpus: Iterable[Sentence], min_count=1) -> Vocab:
    """Words in first-occurrence order. Words rarer than ``min_count`` map to UNK."""
    counts = Counter(w for sent in corpus for w in sent.words)
    vocab = Vocab()
    for sent in corpus:
        for w in sent.words:
            if counts[w] >= min_count:
                vocab.add(w)
    return vocab


class LabelSet:
    """Maps BIO label strings to score columns; ``O`` maps to :data:`OUTSIDE`."""

    def __init__(self, labels: Iterable[str], outside="O"):
        self.outside = outside
        self.labels = []
        self._col = {}
        for lab in labels:
            if lab != outside and lab not in self._col:
                self._col[lab] = len(self.labels)
                self.labels.append(lab)

    @classmethod
    def from_corpus(cls, corpus: Corpus, outside="O"):
        return cls(corpus.label_inventory(), outside)

    def __len__(self):
        """Number of score columns (O excluded)."""
        return len(self.labels)

    def __contains__(self, label):
        return label == self.outside or label in self._col

    def column(self, label):
        if label == self.outside:
            return OUTSIDE
        return self._col[label]

    def label(self, column):
        return self.outside if column == OUTSIDE else self.labels[column]

    def encode(self, labels):
        return np.array([self.column(lab) for lab in labels], dtype=np.intp)

    def __eq__(self, other):
        return isinstance(other, LabelSet) and (self.outside, self.labels) == (other.outside, other.labels)


class WindowInputs(NamedTuple):
    past: np.ndarray
    future: np.ndarray
    surrounding: np.ndarray


def _gather(word_ids, positions):
    n = len(word_ids)
    out = np.empty(len(positions), dtype=np.intp)
    for k, p in enumerate(positions):
        if p < 0:
            out[k] = PAD_PAST
        elif p >= n:
            out[k] = PAD_FUTURE
        else:
            out[k] = word_ids[p]
    return out


def window_positions(t, n, m, cs):
    """Sentence positions feeding each window; out-of-range positions become pads.

    The past window is positions ``t-n .. t`` followed by ``m`` end pads, the
    future window ``m`` begin pads followed by ``t .. t+n``. The structural pads
    are encoded as positions far outside the sentence on the matching side.
    """
    far = 1 << 30
    past = list(range(t - n, t + 1)) + [far] * m
    future = [-far] * m + list(range(t, t + n + 1))
    surrounding = list(range(t - cs, t + cs + 1)) if cs >= 0 else []
    return past, future, surrounding


def make_windows(word_ids, t, n, m, cs) -> WindowInputs:
    if not 0 <= t < len(word_ids):
        raise IndexError(f"token index {t} out of range for sentence of length {len(word_ids)}")
    past, future, surrounding = window_positions(t, n, m, cs)
    return WindowInputs(_gather(word_ids, past), _gather(word_ids, future), _gather(word_ids, surrounding))


def sentence_windows(word_ids, n, m, cs):
    """Windows for every token of one sentence, stacked: ``(T, n+m+1)`` etc."""
    T = len(word_ids)
    # pad once, then slice; agrees with make_windows position by position
    padded = np.concatenate([
        np.full(n + max(cs, 0), PAD_PAST, dtype=np.intp),
        np.asarray(word_ids, dtype=np.intp),
        np.full(n + max(cs, 0), PAD_FUTURE, dtype=np.intp),
    ])
    off = n + max(cs, 0)
    idx = np.arange(T)[:, None]
    past = padded[off + idx + np.arange(-n, 1)]
    past = np.concatenate([past, np.full((T, m), PAD_FUTURE, dtype=np.intp)], axis=1)
    future = padded[off + idx + np.arange(0, n + 1)]
    future = np.concatenate([np.full((T, m), PAD_PAST, dtype=np.intp), future], axis=1)
    if cs >= 0:
        surrounding = padded[off + idx + np.arange(-cs, cs + 1)]
    else:
        surrounding = np.empty((T, 0), dtype=np.intp)
    return WindowInputs(past, future, surrounding)
