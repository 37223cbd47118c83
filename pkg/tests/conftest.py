import numpy as np
import pytest

from biscnn.corpus import Corpus, LabelSet, Sentence, build_vocab
from biscnn.loss import l2_penalty, loss_for_scores
from biscnn.model import WEIGHT_NAMES, HyperParams, SeqCNN, Variant
from biscnn.trainer import encode_corpus

MICRO_HP = dict(d=5, s=4, filter_width=3, n=3, m=1, cs=1, init_scale=0.5, l2_weight=1e-3)


def micro_corpus():
    """Three sentences, six real classes plus O."""
    return Corpus([
        Sentence(("fly", "from", "new", "york", "to", "rome"),
                 ("O", "O", "B-from", "I-from", "O", "B-to")),
        Sentence(("monday", "morning", "delta", "flights"),
                 ("B-day", "B-period", "B-airline", "O")),
        Sentence(("to", "munich", "on", "tuesday", "evening"),
                 ("O", "B-to", "O", "B-day", "B-period")),
    ])


def micro_model(variant=Variant.BI_CONCAT, seed=0, **overrides):
    corpus = micro_corpus()
    hp = HyperParams(**{**MICRO_HP, "variant": variant, **overrides})
    labels = LabelSet.from_corpus(corpus)
    assert len(labels) == 6
    return SeqCNN.create(hp, build_vocab(corpus), labels, seed=seed), corpus


def total_loss(model, encoded, kind="ranking"):
    """Summed loss over every token plus the L2 penalty on the weights."""
    hp = model.hp
    total = 0.0
    for win, gold in encoded:
        for t in range(len(gold)):
            cache = model.forward(win.past[t], win.future[t], win.surrounding[t])
            total += loss_for_scores(cache.scores, gold[t], kind, hp.gamma, hp.m_plus, hp.m_minus)[0]
    weights = {k: v for k, v in model.params.items() if k in WEIGHT_NAMES}
    return total + l2_penalty(weights, hp.l2_weight)[0]


def analytic_gradients(model, encoded, kind="ranking"):
    hp = model.hp
    grads = {k: np.zeros_like(v) for k, v in model.params.items()}
    for win, gold in encoded:
        for t in range(len(gold)):
            cache = model.forward(win.past[t], win.future[t], win.surrounding[t])
            _, dscores = loss_for_scores(cache.scores, gold[t], kind, hp.gamma, hp.m_plus, hp.m_minus)
            for name, g in model.backward(cache, dscores).arrays(len(model.vocab)).items():
                grads[name] += g
    for name in grads:
        if name in WEIGHT_NAMES:
            grads[name] += 2.0 * hp.l2_weight * model.params[name]
    return grads


def finite_differences(fn, params, eps=1e-4):
    """Central differences of ``fn()`` w.r.t. every entry of every array in ``params``."""
    out = {}
    for name, arr in params.items():
        g = np.zeros_like(arr)
        flat, gflat = arr.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            up = fn()
            flat[i] = old - eps
            down = fn()
            flat[i] = old
            gflat[i] = (up - down) / (2 * eps)
        out[name] = g
    return out


def relative_error(a, b, floor=1e-8):
    """Elementwise ``|a - b| / max(|a|, |b|, floor)``."""
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


@pytest.fixture
def micro():
    model, corpus = micro_model()
    return model, corpus, encode_corpus(model, corpus)
