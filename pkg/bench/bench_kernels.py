"""Compare the compiled kernels with the numpy fallback.

    python bench/bench_kernels.py [--repeat 5]

Prints the best-of-N wall time per kernel and backend, and the speedup.
"""

import argparse
import timeit

import numpy as np

from seqca import _kernels
from seqca.seqclust import pairwise_euclidean
from seqca.stylometrics import trial_rng


def cases():
    rng = np.random.default_rng(0)
    D200 = pairwise_euclidean(rng.normal(size=(200, 5)))
    D80 = pairwise_euclidean(rng.random((80, 2)))
    n = 77
    Ds = pairwise_euclidean(rng.normal(size=(n, 10)))
    w = rng.integers(50, 2000, size=n).astype(float)
    perms = np.stack([trial_rng(1, t).permutation(n) for t in range(999)])
    m = 80
    return [
        ("seq_complete_link n=200", lambda k: k.seq_complete_link(D200)),
        ("triangle_tags n=80", lambda k: k.triangle_tags(D80, 0.05, 0, m)),
        ("triangle_violations n=80", lambda k: k.triangle_violations(D80, 0.0, 0, m)),
        ("style_batch n=77 T=999", lambda k: k.style_batch(Ds, w, perms)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    names = sorted(_kernels.BACKENDS)
    if "cython" not in names:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':28s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases():
        times = {}
        for name in names:
            k = _kernels.get(name)
            fn(k)  # warm up
            times[name] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        row = f"{label:28s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in names)
        if len(names) > 1:
            row += f"{times['python'] / times['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
