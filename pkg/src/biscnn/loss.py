"""Hinge and ranking objectives over class scores, plus the L2 penalty.

Class O owns no score column. A gold O token is encoded as ``OUTSIDE`` and
only contributes the competitor term of either loss.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .corpus import OUTSIDE

__all__ = ["LossValue", "best_competitor", "hinge", "ranking", "loss_for_scores", "l2_penalty", "softplus"]


class LossValue(NamedTuple):
    value: float
    grad_yplus: float
    grad_cminus: float


def best_competitor(scores, gold):
    """Highest-scoring column other than ``gold``; ties go to the lowest column."""
    scores = np.asarray(scores, dtype=np.float64)
    if gold == OUTSIDE:
        return int(np.argmax(scores))
    if len(scores) < 2:
        raise ValueError("need at least one non-gold class")
    masked = scores.copy()
    masked[gold] = -np.inf
    return int(np.argmax(masked))


def softplus(x):
    """log(1 + exp(x)) without overflow."""
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def _logistic(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def hinge(s_yplus, s_cminus, gold_is_o=False) -> LossValue:
    """``max(0, 1 - s_y+ + s_c-)``; for gold O the y+ term is dropped: ``max(0, 1 + s_c-)``."""
    if gold_is_o:
        margin = 1.0 + s_cminus
        return LossValue(margin, 0.0, 1.0) if margin > 0 else LossValue(0.0, 0.0, 0.0)
    margin = 1.0 - s_yplus + s_cminus
    if margin > 0:
        return LossValue(margin, -1.0, 1.0)
    return LossValue(0.0, 0.0, 0.0)


def ranking(s_yplus, s_cminus, gamma=2.0, m_plus=2.5, m_minus=0.5, gold_is_o=False) -> LossValue:
    """``log(1+exp(g(m+ - s_y+))) + log(1+exp(g(m- + s_c-)))``.

    For gold O only the second summand is computed. ``s_yplus`` is ignored
    then and may be ``None``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    neg = gamma * (m_minus + s_cminus)
    value = softplus(neg)
    g_minus = gamma * _logistic(neg)
    if gold_is_o:
        return LossValue(value, 0.0, g_minus)
    pos = gamma * (m_plus - s_yplus)
    return LossValue(softplus(pos) + value, -gamma * _logistic(pos), g_minus)


def loss_for_scores(scores, gold, kind="ranking", gamma=2.0, m_plus=2.5, m_minus=0.5):
    """Evaluate a loss on a score vector.

    Returns ``(value, grad)`` where ``grad`` is dense over score columns and
    non-zero only at the gold column and the best competitor.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if kind not in ("ranking", "hinge"):
        raise ValueError(f"unknown loss {kind!r}")
    is_o = gold == OUTSIDE
    grad = np.zeros_like(scores)
    if not is_o and len(scores) == 1:
        # a single real class has no competitor; keep only the gold term
        s_y = float(scores[gold])
        if kind == "ranking":
            pos = gamma * (m_plus - s_y)
            grad[gold] = -gamma * _logistic(pos)
            return softplus(pos), grad
        if s_y < 1.0:
            grad[gold] = -1.0
            return 1.0 - s_y, grad
        return 0.0, grad
    c = best_competitor(scores, gold)
    s_y = None if is_o else float(scores[gold])
    if kind == "ranking":
        lv = ranking(s_y, float(scores[c]), gamma, m_plus, m_minus, gold_is_o=is_o)
    else:
        lv = hinge(s_y, float(scores[c]), gold_is_o=is_o)
    grad[c] = lv.grad_cminus
    if not is_o:
        grad[gold] += lv.grad_yplus
    return lv.value, grad


def l2_penalty(weights, lam):
    """``lam * sum(w**2)`` over the given arrays, and per-array gradients ``2*lam*w``."""
    if lam < 0:
        raise ValueError("L2 weight must be non-negative")
    if isinstance(weights, dict):
        value = lam * sum(float(np.sum(w * w)) for w in weights.values())
        return value, {k: 2.0 * lam * w for k, w in weights.items()}
    value = lam * sum(float(np.sum(np.square(w))) for w in weights)
    return value, [2.0 * lam * np.asarray(w) for w in weights]
