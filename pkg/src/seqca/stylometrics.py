"""Style statistics of an ordered point sequence and their Monte Carlo test.

Definitions (fixed by this package):

* movement: Euclidean distance between consecutive points;
* movement variability: sample standard deviation of the movements;
* tempo: minus the least-squares slope of word count against position,
  so units that shorten along the sequence give a positive tempo;
* mean rhythm: mean over t of movement t divided by the word count of
  the unit it arrives at.

The permutation test reorders whole units (point and word count
together) and reports, per statistic, the fraction of random orderings
the observed order strictly beats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InputError
from .seqclust import OrderedPoints, pairwise_euclidean

__all__ = [
    "SequenceProfile",
    "StyleStats",
    "PercentileReport",
    "movements",
    "style_stats",
    "permutation_test",
    "trial_rng",
]

STATISTICS = ("movement_variability", "tempo", "mean_rhythm")
# +1: larger observed value is better, -1: smaller is better
DIRECTIONS = {"movement_variability": -1, "tempo": +1, "mean_rhythm": +1}


@dataclass(frozen=True, eq=False)
class SequenceProfile:
    coords: OrderedPoints
    word_counts: np.ndarray

    def __post_init__(self):
        coords = self.coords if isinstance(self.coords, OrderedPoints) else OrderedPoints(self.coords)
        wc = np.array(self.word_counts, dtype=np.float64)
        if wc.ndim != 1 or len(wc) != len(coords):
            raise DimensionMismatch(f"{len(wc)} word counts for {len(coords)} points")
        if len(wc) < 2:
            raise InputError("a sequence profile needs at least two units")
        if np.any(wc <= 0):
            raise InputError("word counts must be positive")
        wc.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "word_counts", wc)

    def __len__(self):
        return len(self.word_counts)


@dataclass(frozen=True)
class StyleStats:
    movement_variability: float
    tempo: float
    mean_rhythm: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.movement_variability, self.tempo, self.mean_rhythm)


def movements(coords) -> np.ndarray:
    if not isinstance(coords, OrderedPoints):
        coords = OrderedPoints(coords)
    if len(coords) < 2:
        raise InputError("need at least two points")
    diff = coords.points[:-1] - coords.points[1:]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def style_stats(profile: SequenceProfile) -> StyleStats:
    D = pairwise_euclidean(profile.coords.points)
    ident = np.arange(len(profile))[None, :]
    v, t, r = _kernels.get().style_batch(D, profile.word_counts, ident)[0]
    return StyleStats(float(v), float(t), float(r))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, derived from (seed, trial)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


@dataclass(frozen=True)
class PercentileReport:
    observed: StyleStats
    beat_fractions: dict[str, float]
    trials: int
    seed: int

    def to_dict(self) -> dict:
        obs = dict(zip(STATISTICS, self.observed.as_tuple()))
        return {
            name: {
                "observed": obs[name],
                "beat_fraction": self.beat_fractions[name],
                "trials": self.trials,
                "seed": self.seed,
            }
            for name in STATISTICS
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def format_table(self) -> str:
        lines = [f"{'statistic':<22}{'observed':>16}{'beats':>9}", "-" * 47]
        obs = dict(zip(STATISTICS, self.observed.as_tuple()))
        for name in STATISTICS:
            lines.append(f"{name:<22}{obs[name]:>16.6g}{self.beat_fractions[name]:>8.1%}")
        lines.append(f"trials={self.trials} seed={self.seed}")
        return "\n".join(lines)


def permutation_test(profile: SequenceProfile, trials: int = 999, seed: int = 0) -> PercentileReport:
    """Compare the observed order against uniformly random reorderings.

    Trial ``t`` draws its permutation from :func:`trial_rng` ``(seed, t)``,
    so results do not depend on evaluation order.  Observed values that tie
    a trial do not count as beating it.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    n = len(profile)
    if n < 3:
        raise InputError("permutation test needs at least three units")
    kern = _kernels.get()
    D = pairwise_euclidean(profile.coords.points)
    w = profile.word_counts
    perms = np.empty((trials + 1, n), dtype=np.intp)
    perms[0] = np.arange(n)
    for t in range(trials):
        perms[t + 1] = trial_rng(seed, t).permutation(n)
    stats = kern.style_batch(D, w, perms)
    observed, randomized = stats[0], stats[1:]
    fractions = {}
    for s, name in enumerate(STATISTICS):
        if DIRECTIONS[name] > 0:
            wins = np.count_nonzero(observed[s] > randomized[:, s])
        else:
            wins = np.count_nonzero(observed[s] < randomized[:, s])
        fractions[name] = wins / trials
    return PercentileReport(StyleStats(*map(float, observed)), fractions, int(trials), int(seed))
