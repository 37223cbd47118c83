"""Per-example SGD with a constant-then-halving learning-rate schedule."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .corpus import Corpus, LabelSet, build_vocab
from .errors import ConfigError, NonFiniteGradientError
from .eval import f1_score
from .loss import loss_for_scores
from .model import WEIGHT_NAMES, HyperParams, Rank1, SeqCNN

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs_total: int = 25
    epochs_constant_lr: int = 10
    seed: int = 0
    shuffle: bool = True
    loss: str = "ranking"

    def __post_init__(self):
        if self.epochs_total < 1 or not 0 <= self.epochs_constant_lr <= self.epochs_total:
            raise ConfigError("need 1 <= epochs_total and 0 <= epochs_constant_lr <= epochs_total")
        if self.loss not in ("ranking", "hinge"):
            raise ConfigError(f"loss must be 'ranking' or 'hinge', got {self.loss!r}")


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    learning_rates: list = field(default_factory=list)
    mean_losses: list = field(default_factory=list)
    checkpoint: str | None = None

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "lr", "mean_loss"])
            for row in zip(self.epochs, self.learning_rates, self.mean_losses):
                w.writerow([row[0], repr(row[1]), repr(row[2])])


def lr_at(epoch, lr0=0.02, epochs_constant=10, epochs_total=25):
    """``lr0`` for the first ``epochs_constant`` epochs, halved every epoch after that."""
    if not 1 <= epoch <= epochs_total:
        raise ValueError(f"epoch {epoch} outside 1..{epochs_total}")
    if epoch <= epochs_constant:
        return lr0
    return lr0 / 2 ** (epoch - epochs_constant)


def encode_corpus(model: SeqCNN, corpus: Corpus):
    """Per sentence: stacked windows and gold score columns."""
    out = []
    for sent in corpus:
        ids = model.vocab.encode(sent.words)
        out.append((model.windows(ids), model.labels.encode(sent.labels)))
    return out


def example_loss(model, cache, gold, loss):
    hp = model.hp
    return loss_for_scores(cache.scores, gold, loss, hp.gamma, hp.m_plus, hp.m_minus)


def sgd_step(model: SeqCNN, grads, lr, example_index=0):
    """``w <- w - lr * (grad + 2*l2*w)`` for the weights, plain SGD elsewhere."""
    p = model.params
    decay = 1.0 - 2.0 * lr * model.hp.l2_weight
    for name, g in grads.dense.items():
        rate = decay if name in WEIGHT_NAMES else 1.0
        if isinstance(g, Rank1):
            ok = kernels.rank1_update(p[name], g.u, g.v, rate, lr)
        else:
            ok = kernels.sgd_update(p[name].reshape(-1), g.reshape(-1), rate, lr)
        if not ok:
            raise NonFiniteGradientError(name, example_index)
    if model.hp.train_embeddings and len(grads.emb_ids):
        if not np.all(np.isfinite(grads.emb_rows)):
            raise NonFiniteGradientError("E", example_index)
        np.subtract.at(p["E"], grads.emb_ids, lr * grads.emb_rows)


def sgd_epoch(model: SeqCNN, encoded, lr, loss="ranking", rng=None, shuffle=True):
    """One pass over every token; returns the mean loss before each update."""
    order = rng.permutation(len(encoded)) if (shuffle and rng is not None) else range(len(encoded))
    total, count = 0.0, 0
    for si in order:
        win, gold = encoded[si]
        for t in range(len(gold)):
            cache = model.forward(win.past[t], win.future[t], win.surrounding[t])
            value, dscores = example_loss(model, cache, gold[t], loss)
            total += value
            if lr > 0 and np.any(dscores):
                sgd_step(model, model.backward(cache, dscores), lr, count)
            elif lr > 0 and model.hp.l2_weight > 0:
                decay = 1.0 - 2.0 * lr * model.hp.l2_weight
                for name in WEIGHT_NAMES:
                    if name in model.params:
                        model.params[name] *= decay
            count += 1
    return total / max(count, 1)


def new_model(corpus: Corpus, hp: HyperParams, seed=0, labels: LabelSet | None = None):
    vocab = build_vocab(corpus, min_count=hp.min_count)
    labels = labels or LabelSet.from_corpus(corpus)
    return SeqCNN.create(hp, vocab, labels, seed=seed)


def train(corpus: Corpus, hp: HyperParams, config: TrainConfig = TrainConfig(),
          on_epoch: Callable | None = None, labels: LabelSet | None = None):
    """Train a fresh model on ``corpus``. Returns ``(model, report)``.

    ``on_epoch(epoch, model, mean_loss)`` may return True to stop early; the
    default run never stops early.
    """
    model = new_model(corpus, hp, seed=config.seed, labels=labels)
    # separate streams so model init does not shift the shuffle order
    rng = np.random.default_rng([config.seed, 1])
    encoded = encode_corpus(model, corpus)
    report = TrainReport()
    for epoch in range(1, config.epochs_total + 1):
        lr = lr_at(epoch, hp.lr0, config.epochs_constant_lr, config.epochs_total)
        mean_loss = sgd_epoch(model, encoded, lr, config.loss, rng, config.shuffle)
        report.epochs.append(epoch)
        report.learning_rates.append(lr)
        report.mean_losses.append(mean_loss)
        log.info("epoch %d lr %.6g loss %.6f", epoch, lr, mean_loss)
        if on_epoch is not None and on_epoch(epoch, model, mean_loss):
            break
    return model, report


def train_final(corpus: Corpus, hp: HyperParams, config: TrainConfig = TrainConfig(), checkpoint=None):
    """Train on the whole corpus with the full schedule and optionally save."""
    model, report = train(corpus, hp, config)
    if checkpoint is not None:
        model.save(checkpoint)
        report.checkpoint = str(checkpoint)
    return model, report


def evaluate_model(model: SeqCNN, corpus: Corpus):
    gold = [list(s.labels) for s in corpus]
    pred = [model.tag(s.words) for s in corpus]
    return f1_score(gold, pred)


def make_folds(n_items, k=5, seed=0):
    """One seeded shuffle, then ``k`` contiguous blocks. Returns index arrays."""
    if n_items < k:
        raise ConfigError(f"cannot split {n_items} sentences into {k} folds")
    perm = np.random.default_rng(seed).permutation(n_items)
    return [np.sort(block) for block in np.array_split(perm, k)]


def cross_validate(corpus: Corpus, grid: Sequence[dict], base_hp: HyperParams = HyperParams(),
                   config: TrainConfig = TrainConfig(), k=5):
    """Mean dev-fold F1 per grid point; returns ``(best_hp, best_config, scores)``.

    Grid points are dicts overriding :class:`HyperParams` or :class:`TrainConfig`
    fields. Ties go to the earliest grid point.
    """
    if not grid:
        raise ConfigError("empty hyperparameter grid")
    # labels from the full corpus so every fold model shares score columns
    labels = LabelSet.from_corpus(corpus)
    folds = make_folds(len(corpus), k, config.seed)
    hp_fields = set(HyperParams.__dataclass_fields__)
    cfg_fields = set(TrainConfig.__dataclass_fields__)
    scores = []
    candidates = []
    for point in grid:
        unknown = set(point) - hp_fields - cfg_fields
        if unknown:
            raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
        hp = base_hp.replace(**{k_: v for k_, v in point.items() if k_ in hp_fields})
        cfg = replace(config, **{k_: v for k_, v in point.items() if k_ in cfg_fields})
        fold_f1 = []
        for i, dev_idx in enumerate(folds):
            dev_set = set(dev_idx.tolist())
            train_part = Corpus(s for j, s in enumerate(corpus) if j not in dev_set)
            dev_part = Corpus(corpus[j] for j in dev_idx)
            model, _ = train(train_part, hp, cfg, labels=labels)
            fold_f1.append(evaluate_model(model, dev_part).f1)
        mean = float(np.mean(fold_f1))
        log.info("grid point %s: mean dev F1 %.2f", point, mean)
        scores.append(mean)
        candidates.append((hp, cfg))
    best = int(np.argmax(scores))
    return candidates[best][0], candidates[best][1], scores
