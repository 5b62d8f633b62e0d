"""Sequence-constrained complete-link clustering and ultrametric tools.

Only adjacent segments of the ordered observations may merge, and the
distance between two segments is the largest pairwise distance between
their members.  Merge levels never decrease, so the dendrogram's
cophenetic levels form an ultrametric on the sequence.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InputError, KTooLarge, MalformedMatrix

__all__ = [
    "OrderedPoints",
    "Merge",
    "Dendrogram",
    "Caesura",
    "TriangleClassification",
    "ViolationReport",
    "pairwise_euclidean",
    "cluster_sequence",
    "cluster_distances",
    "cophenetic",
    "verify_ultrametric",
    "classify_triangles",
    "detect_caesuras",
    "ultrametric_to_csv",
]

TAG_NAMES = {0: "other", 1: "equilateral", 2: "isosceles_small_base"}


def pairwise_euclidean(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


@dataclass(frozen=True, eq=False)
class OrderedPoints:
    points: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        try:
            pts = np.array(self.points, dtype=np.float64)
        except ValueError as exc:
            raise DimensionMismatch(f"points differ in dimension: {exc}") from None
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise DimensionMismatch("points must form an n x d array")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InputError("need at least one point of dimension >= 1")
        labels = tuple(str(x) for x in self.labels) or tuple(str(i) for i in range(1, len(pts) + 1))
        if len(labels) != len(pts):
            raise InputError(f"{len(labels)} labels for {len(pts)} points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.points.shape[0]

    def distances(self) -> np.ndarray:
        return pairwise_euclidean(self.points)


@dataclass(frozen=True)
class Merge:
    """Join of leaf ranges ``[start, mid)`` and ``[mid, stop)``."""

    start: int
    mid: int
    stop: int
    level: float

    @property
    def left(self) -> tuple[int, int]:
        return (self.start, self.mid)

    @property
    def right(self) -> tuple[int, int]:
        return (self.mid, self.stop)


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[str, ...]
    merges: tuple[Merge, ...] = field(default=())

    def __post_init__(self):
        n = len(self.leaves)
        if len(self.merges) != max(n - 1, 0):
            raise InputError(f"{n} leaves need {max(n - 1, 0)} merges, got {len(self.merges)}")

    @property
    def levels(self) -> np.ndarray:
        return np.array([m.level for m in self.merges], dtype=np.float64)

    def to_dict(self) -> dict:
        """Nested merge tree; leaves carry their 1-based position."""
        nodes = {(i, i + 1): {"leaf": lab, "position": i + 1} for i, lab in enumerate(self.leaves)}
        for m in self.merges:
            nodes[(m.start, m.stop)] = {
                "level": m.level,
                "span": [m.start + 1, m.stop],
                "left": nodes.pop(m.left),
                "right": nodes.pop(m.right),
            }
        (root,) = nodes.values()
        return {
            "leaves": list(self.leaves),
            "merges": [[m.start + 1, m.mid, m.stop, m.level] for m in self.merges],
            "tree": root,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, doc: dict) -> "Dendrogram":
        merges = tuple(Merge(int(s) - 1, int(m), int(e), float(lv)) for s, m, e, lv in doc["merges"])
        return cls(tuple(doc["leaves"]), merges)


def cluster_distances(D, labels: Sequence[str] = ()) -> Dendrogram:
    """Cluster a sequence given its precomputed distance matrix."""
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
        raise MalformedMatrix("distance matrix must be square and non-empty")
    n = D.shape[0]
    labels = tuple(str(x) for x in labels) or tuple(str(i) for i in range(1, n + 1))
    start, mid, stop, level = _kernels.get().seq_complete_link(D)
    merges = tuple(
        Merge(int(a), int(b), int(c), float(lv)) for a, b, c, lv in zip(start, mid, stop, level)
    )
    levels = level
    if np.any(np.diff(levels) < 0):
        raise AssertionError("merge levels decreased")
    return Dendrogram(labels, merges)


def cluster_sequence(points) -> Dendrogram:
    """Sequence-constrained complete-link clustering of ordered points.

    Distances are unweighted Euclidean.  Ties between equally close
    adjacent pairs go to the leftmost pair.

    >>> d = cluster_sequence([[0.0], [1.0], [10.0], [11.0]])
    >>> [(m.left, m.right, m.level) for m in d.merges]
    [((0, 1), (1, 2), 1.0), ((2, 3), (3, 4), 1.0), ((0, 2), (2, 4), 11.0)]
    """
    if not isinstance(points, OrderedPoints):
        points = OrderedPoints(points)
    return cluster_distances(points.distances(), points.labels)


def cophenetic(d: Dendrogram) -> np.ndarray:
    """Matrix of lowest common merge levels between leaves."""
    n = len(d.leaves)
    U = np.zeros((n, n))
    for m in d.merges:
        U[m.start : m.mid, m.mid : m.stop] = m.level
        U[m.mid : m.stop, m.start : m.mid] = m.level
    return U


def ultrametric_to_csv(U, labels: Sequence[str], path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + list(labels))
    for lab, row in zip(labels, U):
        w.writerow([lab] + [format(float(v), ".12g") for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _check_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MalformedMatrix("matrix must be square")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise MalformedMatrix("entries must be finite and non-negative")
    if np.any(np.diag(m) != 0):
        raise MalformedMatrix("diagonal must be zero")
    if not np.array_equal(m, m.T):
        raise MalformedMatrix("matrix must be symmetric")
    return np.ascontiguousarray(m)


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    # balance the ~(n-i)^2 work of each first index
    if workers <= 1 or n < 3:
        return [(0, n)]
    weights = np.array([(n - i - 1) * (n - i - 2) / 2 for i in range(n)])
    cum = np.cumsum(weights)
    cuts = np.searchsorted(cum, cum[-1] * np.arange(1, workers) / workers)
    bounds = [0, *sorted(set(int(c) + 1 for c in cuts)), n]
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]


def _map_chunks(fn, n, workers):
    spans = _chunks(n, workers)
    if len(spans) == 1:
        return [fn(*spans[0])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: fn(*s), spans))


@dataclass(frozen=True)
class ViolationReport:
    """Triples ``(i, j, k)``, i < j < k, that break each inequality."""

    ultrametric: list[tuple[int, int, int]]
    metric: list[tuple[int, int, int]]

    @property
    def ok(self) -> bool:
        return not self.ultrametric


def verify_ultrametric(m, tol: float = 0.0, workers: int = 1) -> ViolationReport:
    """Check the strong and the plain triangle inequality on every triple.

    A triple violates the strong inequality when its largest side exceeds
    the second largest by more than ``tol``; it violates the metric one
    when the largest side exceeds the sum of the other two by more than
    ``tol``.
    """
    m = _check_matrix(m)
    kern = _kernels.get()
    parts = _map_chunks(lambda lo, hi: kern.triangle_violations(m, float(tol), lo, hi), m.shape[0], workers)
    ultra = [tuple(int(x) for x in row) for u, _ in parts for row in u]
    metric = [tuple(int(x) for x in row) for _, mt in parts for row in mt]
    return ViolationReport(ultra, metric)


@dataclass(frozen=True, eq=False)
class TriangleClassification:
    """Tags for every triple i < j < k in lexicographic order.

    ``tags`` holds 0 (other), 1 (equilateral) or 2 (isosceles with small
    base).
    """

    n: int
    tags: np.ndarray
    tol: float

    @property
    def counts(self) -> dict[str, int]:
        c = np.bincount(self.tags, minlength=3)
        return {TAG_NAMES[k]: int(c[k]) for k in range(3)}

    @property
    def index(self) -> float:
        """Fraction of triangles that are equilateral or isosceles with small base."""
        if self.tags.size == 0:
            return 0.0
        return float(np.count_nonzero(self.tags) / self.tags.size)

    def triples(self):
        """Yield ``((i, j, k), tag_name)`` in tag order."""
        pos = 0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                for k in range(j + 1, self.n):
                    yield (i, j, k), TAG_NAMES[int(self.tags[pos])]
                    pos += 1


def classify_triangles(points, tol: float = 0.05, precomputed: bool = False, workers: int = 1) -> TriangleClassification:
    """Tag every triangle as equilateral, isosceles with small base, or other.

    Sides are compared relative to the longest side: two sides count as
    equal when they differ by at most ``tol`` times the longest one.  With
    ``precomputed=True`` ``points`` is a distance matrix.
    """
    if precomputed:
        D = _check_matrix(points)
    else:
        D = OrderedPoints(points).distances()
    n = D.shape[0]
    if n < 3:
        raise InputError("need at least three points")
    kern = _kernels.get()
    parts = _map_chunks(lambda lo, hi: kern.triangle_tags(D, float(tol), lo, hi), n, workers)
    tags = np.concatenate(parts)
    tags.setflags(write=False)
    return TriangleClassification(n, tags, float(tol))


@dataclass(frozen=True)
class Caesura:
    """Boundary between sequence positions ``after`` and ``after + 1`` (1-based).

    ``level`` is the merge level at which the two sides first unite.
    """

    after: int
    level: float

    @property
    def before(self) -> int:
        return self.after + 1


def detect_caesuras(d: Dendrogram, k: int) -> list[Caesura]:
    """The ``k`` boundaries with the highest uniting merge levels, in sequence order.

    Equal levels prefer the earlier boundary.
    """
    n = len(d.leaves)
    if not 1 <= k <= n - 1:
        raise KTooLarge(f"k must lie in 1..{n - 1}, got {k}")
    strength = {m.mid: m.level for m in d.merges}
    ranked = sorted(strength, key=lambda b: (-strength[b], b))[:k]
    return [Caesura(b, strength[b]) for b in sorted(ranked)]
