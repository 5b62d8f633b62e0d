"""Correspondence analysis: chi-squared metric to Euclidean factor space.

The factor decomposition is the SVD of the standardized residuals

    S = (f_ij - f_i f_j) / sqrt(f_i f_j)

whose squared singular values are the factor inertias.  Principal
coordinates of rows and columns reproduce chi-squared distances between
profiles as plain Euclidean distances.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DecompositionFailure, DimensionMismatch, FactorOutOfRange, InputError, OriginPoint
from .tabulate import ContingencyTable

__all__ = [
    "FrequencyModel",
    "Profile",
    "FactorSpace",
    "frequencies",
    "chi2_distance",
    "total_inertia",
    "decompose",
    "project_supplementary",
    "factor_correlations",
    "inertia_explained",
]

RANK_TOL = 1e-12
ORIGIN_TOL = 1e-12


def _check_axis(axis: str) -> None:
    if axis not in ("rows", "columns"):
        raise InputError(f"axis must be 'rows' or 'columns', not {axis!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FrequencyModel:
    f: np.ndarray
    row_masses: np.ndarray
    col_masses: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def row_profiles(self) -> np.ndarray:
        return self.f / self.row_masses[:, None]

    def col_profiles(self) -> np.ndarray:
        """Column profiles, one per row of the result."""
        return (self.f / self.col_masses[None, :]).T

    def profile(self, axis: str, index: int) -> "Profile":
        _check_axis(axis)
        if axis == "rows":
            return Profile(self.f[index] / self.row_masses[index], float(self.row_masses[index]))
        return Profile(self.f[:, index] / self.col_masses[index], float(self.col_masses[index]))


@dataclass(frozen=True, eq=False)
class Profile:
    """Conditional distribution over the opposite index set, with its mass.

    Supplementary profiles carry zero mass.
    """

    coordinates: np.ndarray
    mass: float = 0.0

    def __post_init__(self):
        c = _frozen(self.coordinates)
        if c.ndim != 1:
            raise DimensionMismatch("profile must be a vector")
        if np.any(c < 0) or abs(c.sum() - 1.0) > 1e-12:
            raise InputError("profile coordinates must be non-negative and sum to 1")
        if not 0.0 <= self.mass <= 1.0:
            raise InputError("profile mass must lie in [0, 1]")
        object.__setattr__(self, "coordinates", c)

    @classmethod
    def from_counts(cls, counts) -> "Profile":
        counts = np.asarray(counts, dtype=np.float64)
        total = counts.sum()
        if total <= 0 or np.any(counts < 0):
            raise InputError("supplementary counts must be non-negative with a positive total")
        return cls(counts / total, 0.0)

    def __len__(self):
        return len(self.coordinates)


def frequencies(table: ContingencyTable) -> FrequencyModel:
    f = table.counts / table.grand_total
    return FrequencyModel(
        _frozen(f),
        _frozen(f.sum(axis=1)),
        _frozen(f.sum(axis=0)),
        table.row_labels,
        table.col_labels,
    )


def chi2_distance(model: FrequencyModel, axis: str, a: int, b: int) -> float:
    """Chi-squared distance between two row (or column) profiles.

    Returns the distance itself, i.e. the square root of
    ``sum_j (f_aj/f_a - f_bj/f_b)**2 / f_j``.
    """
    _check_axis(axis)
    if axis == "rows":
        pa = model.f[a] / model.row_masses[a]
        pb = model.f[b] / model.row_masses[b]
        w = model.col_masses
    else:
        pa = model.f[:, a] / model.col_masses[a]
        pb = model.f[:, b] / model.col_masses[b]
        w = model.row_masses
    return float(np.sqrt(np.sum((pa - pb) ** 2 / w)))


def total_inertia(model: FrequencyModel) -> float:
    expected = np.outer(model.row_masses, model.col_masses)
    return float(np.sum((model.f - expected) ** 2 / expected))


@dataclass(frozen=True, eq=False)
class FactorSpace:
    """Factor inertias and principal coordinates.

    ``row_coords`` is |I| x N and ``col_coords`` is |J| x N, where N counts
    the factors kept above the rank tolerance.
    """

    eigenvalues: np.ndarray
    row_coords: np.ndarray
    col_coords: np.ndarray
    row_masses: np.ndarray
    col_masses: np.ndarray
    total_inertia: float
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    @property
    def n_factors(self) -> int:
        return len(self.eigenvalues)

    def coords(self, axis: str) -> np.ndarray:
        _check_axis(axis)
        return self.row_coords if axis == "rows" else self.col_coords

    def masses(self, axis: str) -> np.ndarray:
        _check_axis(axis)
        return self.row_masses if axis == "rows" else self.col_masses

    def labels(self, axis: str) -> tuple[str, ...]:
        _check_axis(axis)
        return self.row_labels if axis == "rows" else self.col_labels

    def percentages(self) -> np.ndarray:
        s = self.eigenvalues.sum()
        if s == 0:
            return np.zeros(0)
        return 100.0 * self.eigenvalues / s

    def to_csv(self, axis: str, path=None) -> str:
        """Factor coordinates for one axis.

        Two comment lines carry the eigenvalues and percent inertia, then a
        ``label,mass,F1..FN`` table follows.  Numbers use 12 significant
        digits.
        """
        fmt = lambda v: format(float(v), ".12g")  # noqa: E731
        n = self.n_factors
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# eigenvalue"] + [fmt(v) for v in self.eigenvalues])
        w.writerow(["# percent"] + [fmt(v) for v in self.percentages()])
        w.writerow(["label", "mass"] + [f"F{a}" for a in range(1, n + 1)])
        for lab, m, row in zip(self.labels(axis), self.masses(axis), self.coords(axis)):
            w.writerow([lab, fmt(m)] + [fmt(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _largest_positive(u: np.ndarray) -> np.ndarray:
    # flip each column so its largest-magnitude entry is positive
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return signs


def decompose(model: FrequencyModel) -> FactorSpace:
    r, c = model.row_masses, model.col_masses
    sr, sc = np.sqrt(r), np.sqrt(c)
    S = (model.f - np.outer(r, c)) / np.outer(sr, sc)
    try:
        U, sigma, Vt = np.linalg.svd(S, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionFailure(f"SVD did not converge: {exc}") from exc
    lam = sigma**2
    n_max = min(len(r) - 1, len(c) - 1)
    keep = lam >= RANK_TOL * max(lam[0] if lam.size else 0.0, 1.0)
    n = min(int(np.count_nonzero(keep)), n_max)
    U, sigma, V = U[:, :n], sigma[:n], Vt[:n].T
    F = U * sigma / sr[:, None]
    signs = _largest_positive(F) if n else np.ones(0)
    F = F * signs
    G = V * sigma / sc[:, None] * signs
    return FactorSpace(
        _frozen(lam[:n]),
        _frozen(F),
        _frozen(G),
        r,
        c,
        total_inertia(model),
        model.row_labels,
        model.col_labels,
    )


def project_supplementary(space: FactorSpace, profile, axis: str = "rows") -> np.ndarray:
    """Place a zero-mass profile in an existing factor space.

    ``axis="rows"`` projects a row profile (a distribution over columns)
    through the column coordinates; ``"columns"`` is the converse.
    Raw counts are accepted and normalized.
    """
    _check_axis(axis)
    if not isinstance(profile, Profile):
        profile = Profile.from_counts(profile)
    opposite = space.col_coords if axis == "rows" else space.row_coords
    if len(profile) != opposite.shape[0]:
        raise DimensionMismatch(
            f"profile has {len(profile)} entries, the space has {opposite.shape[0]} "
            f"{'columns' if axis == 'rows' else 'rows'}"
        )
    if space.n_factors == 0:
        return np.zeros(0)
    return (profile.coordinates @ opposite) / np.sqrt(space.eigenvalues)


def factor_correlations(space: FactorSpace, axis: str, index: int) -> np.ndarray:
    """Signed cosines of a point's factor-space vector with each axis."""
    x = space.coords(axis)[index]
    norm = np.sqrt(np.sum(x**2))
    if norm < ORIGIN_TOL:
        raise OriginPoint(f"{axis} element {index} sits at the origin")
    return x / norm


def inertia_explained(space: FactorSpace, alpha: int) -> float:
    """Share of total inertia carried by factor ``alpha`` (1-based)."""
    if not 1 <= alpha <= space.n_factors:
        raise FactorOutOfRange(f"factor {alpha} not in 1..{space.n_factors}")
    return float(space.eigenvalues[alpha - 1] / space.eigenvalues.sum())
