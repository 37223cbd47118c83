"""Compiled kernels vs the numpy fallback, at the default model sizes.

    python benchmarks/bench_kernels.py [--repeat 200] [--sentences 60]

Times conv_pool, conv_pool_backward and one SGD epoch over a synthetic corpus
with each backend swapped into ``biscnn.kernels``.
"""
import argparse
import time
import timeit

import numpy as np

from biscnn import _pykernels, kernels
from biscnn.model import HyperParams
from biscnn.synthetic import flight_corpus
from biscnn.trainer import encode_corpus, new_model, sgd_epoch

try:
    from biscnn import _ckernels
except ImportError:
    _ckernels = None

NAMES = ("conv_pool", "conv_pool_backward", "sgd_update", "rank1_update")


def use(backend):
    for name in NAMES:
        setattr(kernels, name, getattr(backend, name))


def per_call_us(fn, repeat):
    best = min(timeit.repeat(fn, number=repeat, repeat=5))
    return 1e6 * best / repeat


def bench_backend(backend, hp, corpus, repeat):
    rng = np.random.default_rng(0)
    L = hp.n + hp.m + 1
    x = rng.standard_normal((L, hp.d))
    f = rng.standard_normal((hp.s, hp.filter_width, hp.d))
    b = rng.standard_normal(hp.s)
    g = rng.standard_normal(hp.s)
    _, trace = backend.conv_pool(x, f, b)
    fwd = per_call_us(lambda: backend.conv_pool(x, f, b), repeat)
    bwd = per_call_us(lambda: backend.conv_pool_backward(x, f, trace, g), repeat)

    use(backend)
    model = new_model(corpus, hp, seed=0)
    encoded = encode_corpus(model, corpus)
    n_tokens = sum(len(gold) for _, gold in encoded)
    start = time.perf_counter()
    sgd_epoch(model, encoded, hp.lr0, "ranking", np.random.default_rng(1))
    epoch = time.perf_counter() - start
    return fwd, bwd, epoch, n_tokens


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--sentences", type=int, default=60)
    args = ap.parse_args(argv)

    hp = HyperParams()
    corpus = flight_corpus(args.sentences, seed=0)
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.insert(0, ("cython", _ckernels))
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"d={hp.d} s={hp.s} |f|={hp.filter_width} window={hp.n + hp.m + 1}")
    print(f"{'backend':<8} {'conv_pool us':>13} {'backward us':>12} {'epoch s':>8} {'us/token':>9}")
    results = {}
    for name, backend in backends:
        fwd, bwd, epoch, n_tokens = bench_backend(backend, hp, corpus, args.repeat)
        results[name] = epoch
        print(f"{name:<8} {fwd:13.1f} {bwd:12.1f} {epoch:8.2f} {1e6 * epoch / n_tokens:9.0f}")
    if len(results) == 2:
        print(f"epoch speedup: {results['python'] / results['cython']:.2f}x over {n_tokens} tokens")


if __name__ == "__main__":
    main()
