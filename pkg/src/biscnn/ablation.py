"""Architecture, context-length and surrounding-context sweeps."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

from .corpus import Corpus
from .model import HyperParams, Variant
from .trainer import TrainConfig, evaluate_model, train

log = logging.getLogger(__name__)

DIMENSIONS = ("variant-loss", "context-length", "surrounding")

_VARIANT_NAMES = {
    Variant.PAST: "Past sequential CNN",
    Variant.FUTURE: "Future sequential CNN",
    Variant.BI_ADD: "Bi-directional sequential CNN (add)",
    Variant.BI_CONCAT: "Bi-directional sequential CNN (concat)",
}
_LOSS_NAMES = {"hinge": "Hinge loss", "ranking": "Ranking loss"}


@dataclass(frozen=True)
class Cell:
    group: str
    method: str
    hp: HyperParams
    config: TrainConfig
    f1: float | None = None


def plan(dimension, hp: HyperParams, config: TrainConfig, values: Sequence | None = None):
    """The cells of one sweep, untrained, in table order."""
    if dimension == "variant-loss":
        cells = []
        for loss in ("hinge", "ranking"):
            bl = hp.replace(variant=Variant.BASELINE)
            cells.append(Cell(_LOSS_NAMES[loss], f"Words with surrounding context = {bl.baseline_context}",
                              bl, replace(config, loss=loss)))
        for loss in ("hinge", "ranking"):
            for variant, name in _VARIANT_NAMES.items():
                cells.append(Cell(_LOSS_NAMES[loss], name, hp.replace(variant=variant), replace(config, loss=loss)))
        return cells
    if dimension == "context-length":
        values = values or (5, 7, 9, 10, 11)
        return [Cell("Context length", str(n), hp.replace(n=int(n)), config) for n in values]
    if dimension == "surrounding":
        values = values or (-1, 0, 1, 2, 3, 4)
        cells = []
        for cs in map(int, values):
            if cs < 0:
                method = "- current word"
            elif cs == 0:
                method = "+ current word w/o context"
            else:
                method = f"+ surrounding context = {cs}"
            cells.append(Cell(_VARIANT_NAMES.get(hp.variant, hp.variant.value), method, hp.replace(cs=cs), config))
        return cells
    raise ValueError(f"unknown ablation dimension {dimension!r}; choose from {DIMENSIONS}")


def run(dimension, train_corpus: Corpus, test_corpus: Corpus, hp: HyperParams, config: TrainConfig,
        values=None):
    """Train and score every cell with the shared seed; cells are independent of run order."""
    done = []
    for cell in plan(dimension, hp, config, values):
        model, _ = train(train_corpus, cell.hp, cell.config)
        f1 = evaluate_model(model, test_corpus).f1
        log.info("%s | %s: F1 %.2f", cell.group, cell.method, f1)
        done.append(replace(cell, f1=f1))
    return done


def format_table(cells):
    width = max([len(c.method) for c in cells] + [6])
    gwidth = max([len(c.group) for c in cells] + [5])
    lines = [f"{'Group':<{gwidth}} | {'Method':<{width}} | F1"]
    lines.append("-" * len(lines[0]))
    for c in cells:
        score = f"{c.f1:.2f}" if c.f1 is not None else "-"
        lines.append(f"{c.group:<{gwidth}} | {c.method:<{width}} | {score}")
    return "\n".join(lines) + "\n"
