"""Bi-directional sequential CNN scorer and the window feed-forward baseline.

Per token the model sees three id windows (see :mod:`biscnn.corpus`):

* past window, convolved with the past filter bank and max-pooled -> ``c_p``
* future window, convolved with the future filter bank -> ``c_f``
* surrounding window, embedded and flattened -> ``e``

and combines them into a hidden vector ``h`` whose dot product with each
class vector gives that class's score. There is no softmax and no column
for class O.
"""
from __future__ import annotations

import enum
import io
import json
import zipfile
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from . import kernels
from .corpus import OUTSIDE, UNK, LabelSet, Vocab, sentence_windows
from .errors import ConfigError, RejectedInputError, WindowTooShortError
from .nnmath import sigmoid

FORMAT_VERSION = 1


class Variant(str, enum.Enum):
    PAST = "past"
    FUTURE = "future"
    BI_ADD = "bi-add"
    BI_CONCAT = "bi-concat"
    BASELINE = "baseline"

    @property
    def uses_past(self):
        return self in (Variant.PAST, Variant.BI_ADD, Variant.BI_CONCAT)

    @property
    def uses_future(self):
        return self in (Variant.FUTURE, Variant.BI_ADD, Variant.BI_CONCAT)


@dataclass(frozen=True)
class HyperParams:
    """Model shape and objective settings. Defaults are the reference configuration.

    ``cs = -1`` drops the surrounding-context input entirely (no current word);
    ``cs = 0`` feeds the current word alone.
    """

    d: int = 50
    s: int = 100
    filter_width: int = 5
    n: int = 9
    m: int = 2
    cs: int = 3
    variant: Variant = Variant.BI_CONCAT
    gamma: float = 2.0
    m_plus: float = 2.5
    m_minus: float = 0.5
    l2_weight: float = 1e-7
    lr0: float = 0.02
    baseline_context: int = 5
    baseline_hidden: int = 100
    init_scale: float = 0.1
    train_embeddings: bool = True
    min_count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        self.validate()

    def validate(self):
        for name in ("d", "s", "filter_width", "n", "baseline_hidden", "min_count"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.m < 0 or self.baseline_context < 0:
            raise ConfigError("m and baseline_context must be >= 0")
        if self.cs < -1:
            raise ConfigError("cs must be >= -1 (-1 disables the current-word input)")
        if self.n + self.m + 1 < self.filter_width:
            raise ConfigError(
                f"window of n+m+1={self.n + self.m + 1} words is shorter than filter width {self.filter_width}"
            )
        if self.gamma <= 0 or self.lr0 < 0 or self.l2_weight < 0 or self.init_scale < 0:
            raise ConfigError("gamma must be > 0; lr0, l2_weight and init_scale >= 0")

    @property
    def hidden_dim(self):
        if self.variant is Variant.BASELINE:
            return self.baseline_hidden
        return 2 * self.s if self.variant is Variant.BI_CONCAT else self.s

    @property
    def surround_dim(self):
        return self.d * (2 * self.cs + 1) if self.cs >= 0 else 0

    def to_dict(self):
        out = asdict(self)
        out["variant"] = self.variant.value
        return out

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown hyperparameter(s): {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes):
        return replace(self, **changes)


# weights that receive L2; biases and embeddings are excluded
WEIGHT_NAMES = ("Fp", "Ff", "U", "Vp", "Vf", "W1", "Wc")


def param_shapes(hp: HyperParams, n_words: int, n_classes: int):
    shapes = {"E": (n_words, hp.d)}
    if hp.variant is Variant.BASELINE:
        shapes["W1"] = (hp.baseline_hidden, hp.d * (2 * hp.baseline_context + 1))
        shapes["b1"] = (hp.baseline_hidden,)
    else:
        if hp.variant.uses_past:
            shapes["Fp"] = (hp.s, hp.filter_width, hp.d)
            shapes["bp"] = (hp.s,)
        if hp.variant.uses_future:
            shapes["Ff"] = (hp.s, hp.filter_width, hp.d)
            shapes["bf"] = (hp.s,)
        if hp.cs >= 0:
            shapes["U"] = (hp.s, hp.surround_dim)
        if hp.variant.uses_past:
            shapes["Vp"] = (hp.s, hp.s)
        if hp.variant.uses_future:
            shapes["Vf"] = (hp.s, hp.s)
    shapes["Wc"] = (hp.hidden_dim, n_classes)
    return shapes


def init_params(hp: HyperParams, n_words: int, n_classes: int, seed=0):
    """Uniform(-init_scale, init_scale) weights, zero biases, zero UNK row."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in param_shapes(hp, n_words, n_classes).items():
        if name.startswith("b"):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.uniform(-hp.init_scale, hp.init_scale, size=shape)
    params["E"][UNK] = 0.0
    return params


class TokenCache(NamedTuple):
    """Everything one token's backward pass needs."""

    past_ids: np.ndarray
    future_ids: np.ndarray
    surround_ids: np.ndarray
    e: np.ndarray
    xp: np.ndarray | None
    xf: np.ndarray | None
    cp: np.ndarray | None
    cf: np.ndarray | None
    trace_p: np.ndarray | None
    trace_f: np.ndarray | None
    h: np.ndarray
    scores: np.ndarray


class Rank1(NamedTuple):
    """A matrix gradient kept in factored form ``outer(u, v)``."""

    u: np.ndarray
    v: np.ndarray

    def toarray(self):
        return np.outer(self.u, self.v)


class Gradients(NamedTuple):
    """Per-parameter gradients of one token.

    ``dense`` values are arrays or :class:`Rank1` factors; embedding gradients
    are scattered rows ``emb_rows[k]`` belonging to word ``emb_ids[k]``.
    """

    dense: dict
    emb_ids: np.ndarray
    emb_rows: np.ndarray

    def embedding_dense(self, n_words):
        out = np.zeros((n_words, self.emb_rows.shape[1]))
        np.add.at(out, self.emb_ids, self.emb_rows)
        return out

    def arrays(self, n_words):
        """Every gradient as a plain array, the embedding table included."""
        out = {k: g.toarray() if isinstance(g, Rank1) else g for k, g in self.dense.items()}
        out["E"] = self.embedding_dense(n_words)
        return out


def predict(scores):
    """Best column, or ``OUTSIDE`` when no class score is positive.

    O behaves like an implicit score of zero that wins ties, so an all-zero
    score vector predicts O.
    """
    scores = np.asarray(scores)
    if scores.size == 0:
        return OUTSIDE
    best = int(np.argmax(scores))
    return best if scores[best] > 0 else OUTSIDE


def score(hidden, wclass):
    hidden = np.asarray(hidden)
    if hidden.shape[0] != wclass.shape[0]:
        raise RejectedInputError(f"hidden dim {hidden.shape[0]} != class-vector dim {wclass.shape[0]}")
    return wclass.T @ hidden


def embed_window(ids, E):
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= E.shape[0]):
        raise IndexError("word id outside the embedding table")
    return E[ids]


def branch_features(window, filters, biases):
    """Conv + max-pool over one embedded window: ``(features, trace)``."""
    window = np.ascontiguousarray(window, dtype=np.float64)
    if window.shape[0] < filters.shape[1]:
        raise WindowTooShortError(f"window of {window.shape[0]} rows, filter width {filters.shape[1]}")
    if window.shape[1] != filters.shape[2]:
        raise RejectedInputError("window width does not match filter depth")
    return kernels.conv_pool(window, filters, biases)


def hidden(e, cp, cf, variant, U=None, Vp=None, Vf=None):
    """Combine surrounding input and branch features into the hidden vector.

    ``U`` may be None to drop the surrounding input. Summation order is fixed
    so that a zero ``Vf`` in the additive variant reproduces the past-only
    result bit for bit.
    """
    variant = Variant(variant)
    base = U @ e if U is not None else 0.0
    if variant is Variant.PAST:
        return sigmoid(base + Vp @ cp)
    if variant is Variant.FUTURE:
        return sigmoid(base + Vf @ cf)
    if variant is Variant.BI_ADD:
        return sigmoid((base + Vp @ cp) + Vf @ cf)
    if variant is Variant.BI_CONCAT:
        return np.concatenate([sigmoid(base + Vp @ cp), sigmoid(base + Vf @ cf)])
    raise RejectedInputError(f"hidden() does not handle variant {variant}")


class SeqCNN:
    """A scorer with its vocabulary, label inventory and parameters."""

    def __init__(self, hp: HyperParams, vocab: Vocab, labels: LabelSet, params: dict):
        self.hp = hp
        self.vocab = vocab
        self.labels = labels
        expected = param_shapes(hp, len(vocab), len(labels))
        if set(params) != set(expected):
            raise RejectedInputError(f"parameter names {sorted(params)} != {sorted(expected)}")
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise RejectedInputError(f"{name} has shape {params[name].shape}, expected {shape}")
        self.params = params

    @classmethod
    def create(cls, hp, vocab, labels, seed=0):
        return cls(hp, vocab, labels, init_params(hp, len(vocab), len(labels), seed))

    # -- windows -------------------------------------------------------

    def windows(self, word_ids):
        """Stacked per-token id windows for one sentence."""
        hp = self.hp
        if hp.variant is Variant.BASELINE:
            return sentence_windows(word_ids, 0, 0, hp.baseline_context)
        return sentence_windows(word_ids, hp.n, hp.m, hp.cs)

    # -- forward / backward --------------------------------------------

    def forward(self, past_ids, future_ids, surround_ids) -> TokenCache:
        p = self.params
        E = p["E"]
        e = E[surround_ids].ravel()
        if self.hp.variant is Variant.BASELINE:
            h = sigmoid(p["W1"] @ e + p["b1"])
            return TokenCache(past_ids, future_ids, surround_ids, e, None, None, None, None, None, None,
                              h, p["Wc"].T @ h)
        xp = xf = cp = cf = tp = tf = None
        if "Fp" in p:
            xp = E[past_ids]
            cp, tp = kernels.conv_pool(xp, p["Fp"], p["bp"])
        if "Ff" in p:
            xf = E[future_ids]
            cf, tf = kernels.conv_pool(xf, p["Ff"], p["bf"])
        h = hidden(e, cp, cf, self.hp.variant, p.get("U"), p.get("Vp"), p.get("Vf"))
        return TokenCache(past_ids, future_ids, surround_ids, e, xp, xf, cp, cf, tp, tf, h, p["Wc"].T @ h)

    def backward(self, cache: TokenCache, dscores) -> Gradients:
        p = self.params
        hp = self.hp
        h = cache.h
        dense = {"Wc": Rank1(h, dscores)}
        dh = p["Wc"] @ dscores
        d = hp.d
        emb_ids, emb_rows = [], []
        if hp.variant is Variant.BASELINE:
            dz = dh * h * (1.0 - h)
            dense["W1"] = Rank1(dz, cache.e)
            dense["b1"] = dz
            emb_ids.append(cache.surround_ids)
            emb_rows.append((p["W1"].T @ dz).reshape(-1, d))
            return self._grads(dense, emb_ids, emb_rows)

        s = hp.s
        if hp.variant is Variant.BI_CONCAT:
            hp_, hf_ = h[:s], h[s:]
            dzp = dh[:s] * hp_ * (1.0 - hp_)
            dzf = dh[s:] * hf_ * (1.0 - hf_)
            dz_base = dzp + dzf
        else:
            dz = dh * h * (1.0 - h)
            dzp = dz if hp.variant.uses_past else None
            dzf = dz if hp.variant.uses_future else None
            dz_base = dz
        if "U" in p:
            dense["U"] = Rank1(dz_base, cache.e)
            emb_ids.append(cache.surround_ids)
            emb_rows.append((p["U"].T @ dz_base).reshape(-1, d))
        if dzp is not None:
            dense["Vp"] = Rank1(dzp, cache.cp)
            dcp = p["Vp"].T @ dzp
            dense["Fp"], dense["bp"], dxp = kernels.conv_pool_backward(cache.xp, p["Fp"], cache.trace_p, dcp)
            emb_ids.append(cache.past_ids)
            emb_rows.append(dxp)
        if dzf is not None:
            dense["Vf"] = Rank1(dzf, cache.cf)
            dcf = p["Vf"].T @ dzf
            dense["Ff"], dense["bf"], dxf = kernels.conv_pool_backward(cache.xf, p["Ff"], cache.trace_f, dcf)
            emb_ids.append(cache.future_ids)
            emb_rows.append(dxf)
        return self._grads(dense, emb_ids, emb_rows)

    def _grads(self, dense, emb_ids, emb_rows):
        if emb_ids:
            return Gradients(dense, np.concatenate(emb_ids), np.concatenate(emb_rows))
        return Gradients(dense, np.empty(0, dtype=np.intp), np.empty((0, self.hp.d)))

    # -- inference -----------------------------------------------------

    def sentence_scores(self, word_ids):
        win = self.windows(word_ids)
        return np.stack([
            self.forward(win.past[t], win.future[t], win.surrounding[t]).scores
            for t in range(len(word_ids))
        ])

    def predict_columns(self, word_ids):
        return [predict(row) for row in self.sentence_scores(word_ids)]

    def tag(self, words):
        """Predicted label strings for a list of surface words."""
        cols = self.predict_columns(self.vocab.encode(words))
        return [self.labels.label(c) for c in cols]

    # -- persistence ---------------------------------------------------

    def save(self, path):
        """Write a deterministic zip container: meta.json plus one .npy per tensor."""
        meta = {
            "format_version": FORMAT_VERSION,
            "hyperparams": self.hp.to_dict(),
            "vocab": self.vocab.words,
            "labels": self.labels.labels,
            "outside": self.labels.outside,
            "params": sorted(self.params),
        }
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
            _write_member(zf, "meta.json", json.dumps(meta, sort_keys=True, indent=1).encode("utf-8"))
            for name in sorted(self.params):
                buf = io.BytesIO()
                np.lib.format.write_array(buf, np.ascontiguousarray(self.params[name]), allow_pickle=False)
                _write_member(zf, f"{name}.npy", buf.getvalue())

    @classmethod
    def load(cls, path):
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("meta.json"))
            if meta.get("format_version") != FORMAT_VERSION:
                raise RejectedInputError(f"unsupported checkpoint format {meta.get('format_version')!r}")
            params = {
                name: np.lib.format.read_array(io.BytesIO(zf.read(f"{name}.npy")), allow_pickle=False)
                for name in meta["params"]
            }
        hp = HyperParams.from_dict(meta["hyperparams"])
        labels = LabelSet(meta["labels"], outside=meta["outside"])
        return cls(hp, Vocab(meta["vocab"]), labels, params)


def _write_member(zf, name, data):
    info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)
