"""Most important n-grams per slot, traced back through max pooling.

For a correctly classified token of class ``c`` the hidden unit with the
largest contribution ``h_i * Wc[i, c]`` to the winning score is found first.
Its pre-activation is fed by one or two branches through ``V``. The feature
map ``j`` with the largest term ``V[i, j] * c_branch[j]`` is picked next, and
the n-gram that won max pooling for that feature map is reported.
"""
from __future__ import annotations

import csv
import io
from collections import Counter
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import PAD_FUTURE, PAD_NAMES, PAD_PAST, Corpus, window_positions
from .errors import RejectedInputError, StateError
from .eval import extract_chunks, split_label
from .model import SeqCNN, Variant, predict

PAST, FUTURE = "past", "future"


class NgramAttribution(NamedTuple):
    slot: str
    ngram: tuple
    frequency: int
    branch: str

    @property
    def text(self):
        return " ".join(self.ngram)


class PoolRecord(NamedTuple):
    """Max-pool winners for one branch plus the window they were computed on."""

    trace: np.ndarray
    window_ids: np.ndarray
    filter_width: int


def top_hidden_unit(hidden, class_vector):
    contrib = np.asarray(hidden) * np.asarray(class_vector)
    return int(np.argmax(contrib))


def top_feature_map(hidden, class_vector, V, c_branch):
    """Feature map index behind the strongest hidden unit (single-branch form)."""
    i = top_hidden_unit(hidden, class_vector)
    return int(np.argmax(V[i] * c_branch))


def route(model: SeqCNN, cache, column):
    """``(branch, feature_map)`` for one token's forward cache and its class column."""
    hp = model.hp
    if column < 0:
        raise RejectedInputError("class O has no class vector to attribute")
    if hp.variant is Variant.BASELINE:
        raise RejectedInputError("the window baseline has no convolution branches")
    p = model.params
    i = top_hidden_unit(cache.h, p["Wc"][:, column])
    s = hp.s
    if hp.variant is Variant.PAST:
        branch = PAST
    elif hp.variant is Variant.FUTURE:
        branch = FUTURE
    elif hp.variant is Variant.BI_CONCAT:
        branch = PAST if i < s else FUTURE
        i %= s
    else:
        past_term = float(p["Vp"][i] @ cache.cp)
        future_term = float(p["Vf"][i] @ cache.cf)
        branch = PAST if past_term >= future_term else FUTURE
    if branch == PAST:
        return branch, int(np.argmax(p["Vp"][i] * cache.cp))
    return branch, int(np.argmax(p["Vf"][i] * cache.cf))


def trace_ngram(feature_map, record: PoolRecord, window_ids):
    """The ``filter_width`` window entries starting at the pooled row of ``feature_map``."""
    window_ids = np.asarray(window_ids)
    if not np.array_equal(window_ids, record.window_ids):
        raise StateError("pool trace was recorded on a different window")
    start = int(record.trace[feature_map])
    return window_ids[start:start + record.filter_width]


def _render_window(words, positions):
    out = []
    for pos in positions:
        if pos < 0:
            out.append(PAD_NAMES[PAD_PAST])
        elif pos >= len(words):
            out.append(PAD_NAMES[PAD_FUTURE])
        else:
            out.append(words[pos])
    return out


def token_attributions(model: SeqCNN, corpus: Corpus, slot: str):
    """Yield ``(sentence_index, t, branch, ngram)`` for each correctly classified slot token."""
    hp = model.hp
    fw = hp.filter_width
    for si, sent in enumerate(corpus):
        ids = model.vocab.encode(sent.words)
        win = model.windows(ids)
        for t, gold in enumerate(sent.labels):
            if gold == model.labels.outside or split_label(gold)[1] != slot:
                continue
            if gold not in model.labels:
                continue
            cache = model.forward(win.past[t], win.future[t], win.surrounding[t])
            column = model.labels.column(gold)
            if predict(cache.scores) != column:
                continue
            branch, j = route(model, cache, column)
            trace = cache.trace_p if branch == PAST else cache.trace_f
            past_pos, future_pos, _ = window_positions(t, hp.n, hp.m, hp.cs)
            rendered = _render_window(sent.words, past_pos if branch == PAST else future_pos)
            start = int(trace[j])
            yield si, t, branch, tuple(rendered[start:start + fw])


def rank_ngrams(model: SeqCNN, corpus: Corpus, slot: str, k=3) -> list[NgramAttribution]:
    """Top ``k`` n-grams by how often they were a correct token's top contributor."""
    if k <= 0:
        return []
    counts = Counter((ngram, branch) for _, _, branch, ngram in token_attributions(model, corpus, slot))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1]))
    return [NgramAttribution(slot, ngram, freq, branch) for (ngram, branch), freq in ranked[:k]]


def most_frequent_slots(corpus: Corpus, k=4):
    """Slot types with the most gold chunks, ties broken alphabetically."""
    counts = Counter(c.type for sent in corpus for c in extract_chunks(sent.labels))
    return [name for name, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]]


def slot_types(corpus: Corpus):
    return {c.type for sent in corpus for c in extract_chunks(sent.labels)}


def attributions_csv(rows: Sequence[NgramAttribution]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["slot", "ngram", "frequency", "branch"])
    for r in rows:
        w.writerow([r.slot, r.text, r.frequency, r.branch])
    return buf.getvalue()


def read_attributions_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    return [NgramAttribution(r["slot"], tuple(r["ngram"].split(" ")), int(r["frequency"]), r["branch"])
            for r in rows]
