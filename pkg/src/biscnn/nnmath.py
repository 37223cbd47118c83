"""Reference numeric kernels with a forward/backward contract.

Every kernel here is written for clarity. The fused, speed-oriented versions
used by the model live in :mod:`biscnn.kernels`; these serve as their oracle.

Shapes follow the word-axis-first convention: a window is ``(L, d)``, a bank
of ``s`` filters of width ``fw`` is ``(s, fw, d)``, a feature map is
``(L - fw + 1, s)``.
"""
from __future__ import annotations

import numpy as np

from .errors import RejectedInputError, StateError, WindowTooShortError

__all__ = [
    "conv_full_width",
    "conv_full_width_backward",
    "max_pool_over_time",
    "max_pool_backward",
    "sigmoid",
    "sigmoid_backward",
    "affine",
    "affine_backward",
    "Conv",
    "MaxPool",
    "Sigmoid",
    "Affine",
]


def _as_matrix(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise RejectedInputError(f"{name} must be a non-empty 2-D matrix, got shape {x.shape}")
    return x


def conv_full_width(inputs, filters, biases):
    """Valid cross-correlation along the word axis with full-width filters.

    ``out[t, k] = biases[k] + sum_{j, i} inputs[t + j, i] * filters[k, j, i]``
    """
    x = _as_matrix(inputs, "input")
    f = np.asarray(filters, dtype=np.float64)
    b = np.asarray(biases, dtype=np.float64)
    if f.ndim != 3:
        raise RejectedInputError(f"filters must have shape (s, width, d), got {f.shape}")
    s, fw, d = f.shape
    if d != x.shape[1]:
        raise RejectedInputError(f"filter depth {d} != input width {x.shape[1]}")
    if b.shape != (s,):
        raise RejectedInputError(f"biases must have shape ({s},), got {b.shape}")
    if x.shape[0] < fw:
        raise WindowTooShortError(f"window of {x.shape[0]} rows is shorter than filter width {fw}")
    windows = np.lib.stride_tricks.sliding_window_view(x, fw, axis=0)  # (L', d, fw)
    windows = windows.transpose(0, 2, 1).reshape(x.shape[0] - fw + 1, fw * d)
    return windows @ f.reshape(s, fw * d).T + b


def conv_full_width_backward(inputs, filters, grad_out):
    """Gradients of :func:`conv_full_width` w.r.t. input, filters and biases."""
    x = np.asarray(inputs, dtype=np.float64)
    f = np.asarray(filters, dtype=np.float64)
    g = np.asarray(grad_out, dtype=np.float64)
    s, fw, d = f.shape
    n_out = x.shape[0] - fw + 1
    if g.shape != (n_out, s):
        raise RejectedInputError(f"upstream gradient shape {g.shape} != ({n_out}, {s})")
    grad_x = np.zeros_like(x)
    grad_f = np.zeros_like(f)
    for j in range(fw):
        # rows j .. j+n_out-1 of the input meet filter row j
        grad_f[:, j, :] = g.T @ x[j:j + n_out]
        grad_x[j:j + n_out] += g @ f[:, j, :]
    return grad_x, grad_f, g.sum(axis=0)


def max_pool_over_time(featmap):
    """Column-wise max over rows; ties go to the lowest row.

    Returns ``(values, trace)`` where ``trace[k]`` is the winning row of column k.
    """
    fm = np.asarray(featmap, dtype=np.float64)
    if fm.ndim != 2 or fm.shape[0] < 1:
        raise RejectedInputError(f"feature map must be a non-empty 2-D matrix, got {fm.shape}")
    trace = np.argmax(fm, axis=0)  # argmax returns the first occurrence
    return fm[trace, np.arange(fm.shape[1])], trace


def max_pool_backward(trace, grad_out, n_rows):
    """Route each column's upstream gradient to its argmax row."""
    trace = np.asarray(trace)
    g = np.asarray(grad_out, dtype=np.float64)
    out = np.zeros((n_rows, g.shape[0]))
    out[trace, np.arange(g.shape[0])] = g
    return out


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(y, grad_out):
    """Backward of sigmoid given its *output* ``y``."""
    return grad_out * y * (1.0 - y)


def affine(weight, x, bias=None):
    out = np.asarray(weight) @ np.asarray(x)
    return out if bias is None else out + bias


def affine_backward(weight, x, grad_out):
    """Returns ``(grad_x, grad_weight, grad_bias)`` for ``y = W x + b``."""
    return weight.T @ grad_out, np.outer(grad_out, x), grad_out.copy()


class _Node:
    """A single op that caches what its backward needs."""

    _cache = None

    def _cached(self):
        if self._cache is None:
            raise StateError(f"{type(self).__name__}.backward called before forward")
        cache, self._cache = self._cache, None
        return cache


class Conv(_Node):
    def __init__(self, filters, biases):
        self.filters = np.asarray(filters, dtype=np.float64)
        self.biases = np.asarray(biases, dtype=np.float64)

    def forward(self, x):
        out = conv_full_width(x, self.filters, self.biases)
        self._cache = np.asarray(x, dtype=np.float64)
        return out

    def backward(self, grad_out):
        x = self._cached()
        grad_x, grad_f, grad_b = conv_full_width_backward(x, self.filters, grad_out)
        return {"input": grad_x, "filters": grad_f, "biases": grad_b}


class MaxPool(_Node):
    def forward(self, featmap):
        values, trace = max_pool_over_time(featmap)
        self._cache = (trace, np.asarray(featmap).shape[0])
        return values, trace

    def backward(self, grad_out):
        trace, n_rows = self._cached()
        return {"input": max_pool_backward(trace, grad_out, n_rows)}


class Sigmoid(_Node):
    def forward(self, x):
        y = sigmoid(x)
        self._cache = y
        return y

    def backward(self, grad_out):
        return {"input": sigmoid_backward(self._cached(), grad_out)}


class Affine(_Node):
    def __init__(self, weight, bias=None):
        self.weight = np.asarray(weight, dtype=np.float64)
        self.bias = None if bias is None else np.asarray(bias, dtype=np.float64)

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.weight.shape[1],):
            raise RejectedInputError(f"affine input shape {x.shape} != ({self.weight.shape[1]},)")
        self._cache = x
        return affine(self.weight, x, self.bias)

    def backward(self, grad_out):
        grad_x, grad_w, grad_b = affine_backward(self.weight, self._cached(), np.asarray(grad_out))
        grads = {"input": grad_x, "weight": grad_w}
        if self.bias is not None:
            grads["bias"] = grad_b
        return grads
