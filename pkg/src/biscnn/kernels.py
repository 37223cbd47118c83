"""Fused conv + max-pool-over-time kernels used in the training loop.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``BISCNN_PURE_PYTHON=1`` to force the fallback.

``conv_pool(x, filters, biases) -> (features, trace)``
    x: (L, d) C-contiguous float64, filters: (s, fw, d), biases: (s,).
``conv_pool_backward(x, filters, trace, grad) -> (grad_filters, grad_biases, grad_x)``
    Only the pooled rows receive gradient.
``sgd_update(w, g, decay, lr) -> bool``
    In place ``w = decay * w - lr * g`` on flat float64 views. Returns False,
    leaving ``w`` untouched, if ``g`` holds a non-finite value.
``rank1_update(w, u, v, decay, lr) -> bool``
    In place ``w = decay * w - lr * outer(u, v)`` for a C-contiguous matrix.
"""
import os

from . import _pykernels

BACKEND = "python"
conv_pool = _pykernels.conv_pool
conv_pool_backward = _pykernels.conv_pool_backward
sgd_update = _pykernels.sgd_update
rank1_update = _pykernels.rank1_update

if not os.environ.get("BISCNN_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        conv_pool = _ckernels.conv_pool
        conv_pool_backward = _ckernels.conv_pool_backward
        sgd_update = _ckernels.sgd_update
        rank1_update = _ckernels.rank1_update

__all__ = ["BACKEND", "conv_pool", "conv_pool_backward", "sgd_update", "rank1_update"]
