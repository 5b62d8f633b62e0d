"""Reference implementations of the kernels in plain numpy."""

import numpy as np

EQUILATERAL = 1
ISOSCELES_SMALL_BASE = 2
OTHER = 0


def seq_complete_link(D):
    """Sequence-constrained complete-link agglomeration.

    ``D`` is a symmetric n x n distance matrix in sequence order.  Returns
    ``(start, mid, stop, level)`` arrays of length n-1: merge t joins the
    leaf ranges [start, mid) and [mid, stop) at ``level``.  Among equally
    close adjacent pairs the leftmost is merged.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    CD = D.copy()
    # active clusters keyed by first leaf; nxt/stops track adjacency
    firsts = list(range(n))
    stops = {i: i + 1 for i in range(n)}
    out_start = np.empty(max(n - 1, 0), dtype=np.intp)
    out_mid = np.empty_like(out_start)
    out_stop = np.empty_like(out_start)
    out_level = np.empty(max(n - 1, 0), dtype=np.float64)
    for t in range(n - 1):
        best, best_k = np.inf, -1
        for k in range(len(firsts) - 1):
            d = CD[firsts[k], firsts[k + 1]]
            if d < best:
                best, best_k = d, k
        a, b = firsts[best_k], firsts[best_k + 1]
        out_start[t], out_mid[t], out_stop[t], out_level[t] = a, b, stops[b], best
        stops[a] = stops.pop(b)
        del firsts[best_k + 1]
        idx = np.array(firsts, dtype=np.intp)
        merged = np.maximum(CD[a, idx], CD[b, idx])
        CD[a, idx] = merged
        CD[idx, a] = merged
        CD[a, a] = 0.0
    return out_start, out_mid, out_stop, out_level


def _sorted_sides(D, i):
    n = D.shape[0]
    j, k = np.triu_indices(n - i - 1, k=1)
    j = j + i + 1
    k = k + i + 1
    sides = np.sort(np.stack([D[i, j], D[i, k], D[j, k]], axis=1), axis=1)
    return j, k, sides


def triangle_tags(D, tol, lo, hi):
    """Tags for triples (i, j, k), i < j < k, with lo <= i < hi, lexicographic."""
    D = np.asarray(D, dtype=np.float64)
    parts = []
    for i in range(lo, hi):
        _, _, s = _sorted_sides(D, i)
        small, mid, big = s[:, 0], s[:, 1], s[:, 2]
        tags = np.full(len(s), OTHER, dtype=np.int8)
        iso = (big - mid <= tol * big) & (small < mid)
        tags[iso] = ISOSCELES_SMALL_BASE
        tags[big - small <= tol * big] = EQUILATERAL
        parts.append(tags)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int8)


def triangle_violations(D, tol, lo, hi):
    """Triples breaking the ultrametric and the plain triangle inequality.

    Returns two (m, 3) index arrays.
    """
    D = np.asarray(D, dtype=np.float64)
    ultra, metric = [], []
    for i in range(lo, hi):
        j, k, s = _sorted_sides(D, i)
        ii = np.full(len(j), i)
        u = s[:, 2] > s[:, 1] + tol
        m = s[:, 2] > s[:, 0] + s[:, 1] + tol
        ultra.append(np.stack([ii[u], j[u], k[u]], axis=1))
        metric.append(np.stack([ii[m], j[m], k[m]], axis=1))
    empty = np.zeros((0, 3), dtype=np.intp)
    cat = lambda xs: np.concatenate(xs).astype(np.intp) if xs else empty  # noqa: E731
    return cat(ultra), cat(metric)


def style_batch(D, w, perms):
    """Style statistics for each ordering in ``perms``.

    ``D`` holds pairwise distances between the points, ``w`` their word
    counts.  Returns a (T, 3) array of movement variability, tempo and
    mean rhythm.
    """
    D = np.asarray(D, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    perms = np.asarray(perms, dtype=np.intp)
    T, n = perms.shape
    m = D[perms[:, :-1], perms[:, 1:]]
    L = n - 1
    if L >= 2:
        mean = m.sum(axis=1) / L
        var = ((m - mean[:, None]) ** 2).sum(axis=1) / (L - 1)
        variability = np.sqrt(var)
        variability[m.max(axis=1) == m.min(axis=1)] = 0.0
    else:
        variability = np.zeros(T)
    x = np.arange(1, n + 1) - (n + 1) / 2.0
    sxx = n * (n * n - 1) / 12.0
    tempo = -(w[perms] * x).sum(axis=1) / sxx
    rhythm = (m / w[perms[:, 1:]]).sum(axis=1) / L
    return np.stack([variability, tempo, rhythm], axis=1)
