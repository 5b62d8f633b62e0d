import json

import numpy as np
import pytest

from seqca import _kernels, ca, seqclust
from seqca.errors import DimensionMismatch, InputError
from seqca.stylometrics import (
    SequenceProfile,
    movements,
    permutation_test,
    style_stats,
    trial_rng,
)
from seqca.tabulate import ContingencyTable


def test_movements_simple():
    np.testing.assert_array_equal(movements([[1.0, 1.0]] * 4), [0, 0, 0])
    np.testing.assert_array_equal(movements([[0.0, 0.0], [3.0, 4.0]]), [5.0])
    with pytest.raises(InputError):
        movements([[1.0]])


def test_movements_match_chi2_distances():
    rng = np.random.default_rng(43)
    k = rng.integers(1, 12, size=(11, 25)).astype(float)
    t = ContingencyTable(tuple(f"b{i}" for i in range(1, 12)), tuple(f"w{j}" for j in range(25)), k)
    m = ca.frequencies(t)
    s = ca.decompose(m)
    mv = movements(s.row_coords)
    assert len(mv) == 10
    expected = [ca.chi2_distance(m, "rows", i, i + 1) for i in range(10)]
    np.testing.assert_allclose(mv, expected, rtol=1e-8)


def test_flat_case(backend):
    pts = np.arange(6, dtype=float)[:, None] * 2.0
    st = style_stats(SequenceProfile(pts, [10] * 6))
    assert st.movement_variability == 0.0
    assert st.tempo == 0.0
    assert st.mean_rhythm == pytest.approx(0.2)


def test_tempo_least_squares(backend):
    counts = [50, 44, 38, 30, 46]
    # hand least squares: x = 1..5, mean 3; y mean 41.6
    # Sxy = (-2)(8.4) + (-1)(2.4) + 0 + (1)(-11.6) + (2)(4.4) = -22, Sxx = 10
    slope = -22.0 / 10.0
    assert np.polyfit(np.arange(1, 6), counts, 1)[0] == pytest.approx(slope)
    st = style_stats(SequenceProfile(np.random.default_rng(0).normal(size=(5, 2)), counts))
    assert st.tempo == pytest.approx(2.2, abs=1e-12)


def test_style_stats_definitions(backend):
    pts = np.array([[0.0], [1.0], [3.0], [6.0]])
    w = np.array([4.0, 2.0, 5.0, 3.0])
    st = style_stats(SequenceProfile(pts, w))
    m = np.array([1.0, 2.0, 3.0])
    assert st.movement_variability == pytest.approx(np.std(m, ddof=1), abs=1e-15)
    assert st.mean_rhythm == pytest.approx(np.mean(m / w[1:]), abs=1e-15)
    assert st.tempo == pytest.approx(-np.polyfit(np.arange(1, 5), w, 1)[0], abs=1e-12)


def test_homogeneity(backend):
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(9, 3))
    w = rng.integers(5, 50, size=9)
    a = style_stats(SequenceProfile(pts, w))
    b = style_stats(SequenceProfile(pts * 4.0, w))
    assert b.movement_variability == pytest.approx(4.0 * a.movement_variability, rel=1e-14)
    assert b.mean_rhythm == pytest.approx(4.0 * a.mean_rhythm, rel=1e-14)
    assert b.tempo == a.tempo


def test_profile_validation():
    with pytest.raises(DimensionMismatch):
        SequenceProfile(np.zeros((3, 2)), [1, 2])
    with pytest.raises(InputError):
        SequenceProfile(np.zeros((3, 2)), [1, 0, 2])
    with pytest.raises(InputError):
        SequenceProfile(np.zeros((1, 2)), [1])


def test_trial_streams_independent_of_order():
    a = [trial_rng(7, t).permutation(10) for t in range(5)]
    b = [trial_rng(7, t).permutation(10) for t in reversed(range(5))][::-1]
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    assert not np.array_equal(trial_rng(7, 0).permutation(10), trial_rng(8, 0).permutation(10))


def test_invariant_statistic_never_beats(backend):
    # equal word counts make tempo zero under every ordering
    rng = np.random.default_rng(2)
    prof = SequenceProfile(rng.normal(size=(8, 2)), [20] * 8)
    rep = permutation_test(prof, trials=200, seed=1)
    assert rep.observed.tempo == 0.0
    assert rep.beat_fractions["tempo"] == 0.0


def test_observed_beats_every_trial(backend):
    # strictly shrinking units give the largest possible tempo
    rng = np.random.default_rng(3)
    prof = SequenceProfile(rng.normal(size=(11, 2)), np.arange(110, 0, -10))
    rep = permutation_test(prof, trials=999, seed=4)
    assert rep.beat_fractions["tempo"] == 1.0


def test_collinear_even_spacing_has_least_variability(backend):
    prof = SequenceProfile(np.arange(10, dtype=float)[:, None], np.arange(10, 0, -1) * 3)
    rep = permutation_test(prof, trials=300, seed=0)
    assert rep.observed.movement_variability == 0.0
    assert rep.beat_fractions["movement_variability"] == 1.0


def test_report_deterministic_and_json(backend):
    rng = np.random.default_rng(9)
    prof = SequenceProfile(rng.normal(size=(11, 4)), rng.integers(10, 60, size=11))
    a = permutation_test(prof, trials=99, seed=123)
    b = permutation_test(prof, trials=99, seed=123)
    assert a.to_json() == b.to_json()
    doc = json.loads(a.to_json())
    assert set(doc) == {"movement_variability", "tempo", "mean_rhythm"}
    assert doc["tempo"]["trials"] == 99 and doc["tempo"]["seed"] == 123
    assert 0.0 <= doc["tempo"]["beat_fraction"] <= 1.0
    assert "trials=99" in a.format_table()


def test_joint_permutation():
    # pairing of point and word count survives each reordering
    n = 7
    pts = np.arange(n, dtype=float)[:, None]
    w = np.arange(1, n + 1) * 10.0
    D = seqclust.pairwise_euclidean(pts)
    perm = trial_rng(5, 0).permutation(n)
    got = _kernels.get().style_batch(D, w, perm[None, :])[0]
    ref = style_stats(SequenceProfile(pts[perm], w[perm]))
    np.testing.assert_allclose(got, ref.as_tuple(), rtol=1e-14)


def test_permutation_test_input_checks():
    prof = SequenceProfile(np.zeros((2, 1)) + [[0.0], [1.0]], [1, 2])
    with pytest.raises(InputError):
        permutation_test(prof, trials=10)
    prof3 = SequenceProfile(np.arange(3.0)[:, None], [1, 2, 3])
    with pytest.raises(InputError):
        permutation_test(prof3, trials=0)
