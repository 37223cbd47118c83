"""Pure numpy fallback for the compiled conv + max-pool kernels."""
import numpy as np


def conv_pool(x, filters, biases):
    s, fw, d = filters.shape
    n_out = x.shape[0] - fw + 1
    if n_out < 1:
        raise ValueError("window shorter than filter width")
    # rows t..t+fw-1 of a C-contiguous (L, d) matrix are one contiguous slice
    spans = np.lib.stride_tricks.as_strided(
        x, shape=(n_out, fw * d), strides=(x.strides[0], x.strides[1]), writeable=False
    )
    featmap = spans @ filters.reshape(s, fw * d).T
    trace = np.argmax(featmap, axis=0)
    return featmap[trace, np.arange(s)] + biases, trace


def conv_pool_backward(x, filters, trace, grad):
    s, fw, d = filters.shape
    picked = x[trace[:, None] + np.arange(fw)]  # (s, fw, d)
    grad_f = grad[:, None, None] * picked
    grad_x = np.zeros_like(x)
    np.add.at(grad_x, trace[:, None] + np.arange(fw), grad[:, None, None] * filters)
    return grad_f, grad.copy(), grad_x


def sgd_update(w, g, decay, lr):
    if not np.all(np.isfinite(g)):
        return False
    if decay != 1.0:
        w *= decay
    w -= lr * g
    return True


def rank1_update(w, u, v, decay, lr):
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        return False
    if decay != 1.0:
        w *= decay
    w -= np.outer(lr * u, v)
    return True
