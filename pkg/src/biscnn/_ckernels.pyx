# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled conv + max-pool kernels. Must stay behaviour-identical to _pykernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


def conv_pool(const double[:, ::1] x, const double[:, :, ::1] filters, const double[::1] biases):
    cdef Py_ssize_t L = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t s = filters.shape[0], fw = filters.shape[1]
    cdef Py_ssize_t span = fw * d, n_out = L - fw + 1
    if filters.shape[2] != d or biases.shape[0] != s:
        raise ValueError("filter/bias shape does not match input")
    if n_out < 1:
        raise ValueError("window shorter than filter width")
    out_arr = np.empty(s, dtype=np.float64)
    trace_arr = np.empty(s, dtype=np.intp)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t[::1] trace = trace_arr
    cdef const double* xp = &x[0, 0]
    cdef const double* fp
    cdef const double* row
    cdef Py_ssize_t k, t, q, best_t, span4 = span - span % 4
    cdef double acc, a0, a1, a2, a3, best
    for k in range(s):
        fp = &filters[k, 0, 0]
        best = 0.0
        best_t = -1
        for t in range(n_out):
            row = xp + t * d
            # four independent partial sums; fixed order keeps results reproducible
            a0 = a1 = a2 = a3 = 0.0
            for q in range(0, span4, 4):
                a0 += row[q] * fp[q]
                a1 += row[q + 1] * fp[q + 1]
                a2 += row[q + 2] * fp[q + 2]
                a3 += row[q + 3] * fp[q + 3]
            acc = (a0 + a1) + (a2 + a3)
            for q in range(span4, span):
                acc += row[q] * fp[q]
            # strict > keeps the lowest row on ties
            if best_t < 0 or acc > best:
                best = acc
                best_t = t
        out[k] = best + biases[k]
        trace[k] = best_t
    return out_arr, trace_arr


def conv_pool_backward(const double[:, ::1] x, const double[:, :, ::1] filters,
                       const Py_ssize_t[::1] trace, const double[::1] grad):
    cdef Py_ssize_t L = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t s = filters.shape[0], fw = filters.shape[1]
    cdef Py_ssize_t span = fw * d
    gf_arr = np.empty((s, fw, d), dtype=np.float64)
    gx_arr = np.zeros((L, d), dtype=np.float64)
    cdef double[:, :, ::1] gf = gf_arr
    cdef double[:, ::1] gx = gx_arr
    cdef const double* xp = &x[0, 0]
    cdef double* gxp = &gx[0, 0]
    cdef double* gfp
    cdef const double* fp
    cdef const double* row
    cdef double* grow
    cdef Py_ssize_t k, q
    cdef double g
    for k in range(s):
        g = grad[k]
        row = xp + trace[k] * d
        grow = gxp + trace[k] * d
        fp = &filters[k, 0, 0]
        gfp = &gf[k, 0, 0]
        for q in range(span):
            gfp[q] = g * row[q]
            grow[q] += g * fp[q]
    return gf_arr, np.array(grad, dtype=np.float64), gx_arr


def sgd_update(double[::1] w, const double[::1] g, double decay, double lr):
    """In place ``w = decay * w - lr * g`` over flat views; False if ``g`` has a non-finite entry."""
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double x
    if g.shape[0] != n:
        raise ValueError("weight and gradient sizes differ")
    for i in range(n):
        x = g[i]
        if not isfinite(x):
            return False
    if decay == 1.0:
        for i in range(n):
            w[i] -= lr * g[i]
    else:
        for i in range(n):
            w[i] = decay * w[i] - lr * g[i]
    return True


def rank1_update(double[:, ::1] w, const double[::1] u, const double[::1] v, double decay, double lr):
    """In place ``w = decay * w - lr * outer(u, v)``; False if ``u`` or ``v`` is non-finite."""
    cdef Py_ssize_t i, j, r = w.shape[0], c = w.shape[1]
    cdef double ui
    if u.shape[0] != r or v.shape[0] != c:
        raise ValueError("rank-1 factors do not match the weight shape")
    for i in range(r):
        if not isfinite(u[i]):
            return False
    for j in range(c):
        if not isfinite(v[j]):
            return False
    for i in range(r):
        ui = lr * u[i]
        if decay == 1.0:
            if ui == 0.0:
                continue
            for j in range(c):
                w[i, j] -= ui * v[j]
        else:
            for j in range(c):
                w[i, j] = decay * w[i, j] - ui * v[j]
    return True
