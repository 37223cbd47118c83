"""Synthetic BIO corpora for tests, demos and smoke runs.

``separable_corpus`` gives every word a fixed label, so a perfect tagger
exists. ``flight_corpus`` mimics air-travel requests: the same city name is
a departure or an arrival depending on the preceding preposition, and a day
name is often followed by a period of the day and the sentence end.

Run ``python -m biscnn.synthetic OUTDIR`` to write train/test files.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .corpus import Corpus, Sentence, write_conll

_SEPARABLE_FILLER = ["show", "me", "please", "all", "the", "list", "i", "want", "need", "give"]
_SEPARABLE_SLOTS = {
    "alpha": ["a1", "a2", "a3"],
    "beta": ["b1", "b2"],
    "gamma": ["g1", "g2", "g3", "g4"],
}
# two-word chunks: first word always B-, second always I-
_SEPARABLE_PAIRS = {"delta": [("d1", "dx"), ("d2", "dy")]}


def separable_corpus(n_sentences=50, seed=0, min_len=3, max_len=9):
    """Each word has exactly one label wherever it appears."""
    rng = np.random.default_rng(seed)
    corpus = Corpus()
    slot_names = sorted(_SEPARABLE_SLOTS)
    for _ in range(n_sentences):
        words, labels = [], []
        target = int(rng.integers(min_len, max_len + 1))
        while len(words) < target:
            r = rng.random()
            if r < 0.45:
                words.append(str(rng.choice(_SEPARABLE_FILLER)))
                labels.append("O")
            elif r < 0.85:
                slot = slot_names[int(rng.integers(len(slot_names)))]
                words.append(str(rng.choice(_SEPARABLE_SLOTS[slot])))
                labels.append(f"B-{slot}")
            else:
                first, second = _SEPARABLE_PAIRS["delta"][int(rng.integers(2))]
                words += [first, second]
                labels += ["B-delta", "I-delta"]
        corpus.append(Sentence(tuple(words), tuple(labels)))
    return corpus


CITIES = [
    ("boston",), ("denver",), ("atlanta",), ("dallas",), ("toronto",), ("pittsburgh",),
    ("san", "diego"), ("new", "york"), ("st.", "louis"), ("salt", "lake", "city"), ("washington", "dc"),
]
DAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
PERIODS = ["morning", "afternoon", "evening", "night"]
AIRLINES = [("delta",), ("united",), ("american",), ("us", "air"), ("northwest",), ("continental",)]
OPENERS = [
    ("show", "me"), ("i", "want"), ("i", "need"), ("list",), ("give", "me"), ("what", "are"), ("please", "show"),
]


def _chunk(words, slot):
    return list(words), [f"B-{slot}"] + [f"I-{slot}"] * (len(words) - 1)


def _flight_sentence(rng):
    words, labels = [], []

    def add(ws, slot=None):
        if slot is None:
            words.extend(ws)
            labels.extend(["O"] * len(ws))
        else:
            w, lab = _chunk(ws, slot)
            words.extend(w)
            labels.extend(lab)

    def pick(seq):
        return seq[int(rng.integers(len(seq)))]

    add(list(pick(OPENERS)))
    if rng.random() < 0.3:
        add(list(pick(AIRLINES)), "airline_name")
    add(["flights"])
    src, dst = pick(CITIES), pick(CITIES)
    while dst == src:
        dst = pick(CITIES)
    order = rng.random()
    if order < 0.75:
        add(["from"])
        add(list(src), "fromloc.city_name")
        add(["to"])
        add(list(dst), "toloc.city_name")
    else:
        add(["to"])
        add(list(dst), "toloc.city_name")
        add(["from"])
        add(list(src), "fromloc.city_name")
    tail = rng.random()
    if tail < 0.45:
        add(["on"])
        add([pick(DAYS)], "depart_date.day_name")
        if rng.random() < 0.6:
            add([pick(PERIODS)], "depart_time.period_of_day")
    elif tail < 0.65:
        add(["in", "the"])
        add([pick(PERIODS)], "depart_time.period_of_day")
    return Sentence(tuple(words), tuple(labels))


def flight_corpus(n_sentences=200, seed=0):
    rng = np.random.default_rng(seed)
    return Corpus(_flight_sentence(rng) for _ in range(n_sentences))


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0] if argv else "data")
    out.mkdir(parents=True, exist_ok=True)
    write_conll(flight_corpus(400, seed=1), out / "flights_train.txt")
    write_conll(flight_corpus(100, seed=2), out / "flights_test.txt")
    write_conll(separable_corpus(50, seed=0), out / "separable.txt")
    print(f"wrote synthetic corpora to {out}")


if __name__ == "__main__":
    main()
