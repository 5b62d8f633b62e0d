import numpy as np
import pytest

from seqca import ca
from seqca.errors import DimensionMismatch, FactorOutOfRange, OriginPoint
from seqca.tabulate import ContingencyTable

from . import oracles
from .conftest import random_table


def table(k):
    k = np.asarray(k, dtype=float)
    return ContingencyTable(
        tuple(f"r{i}" for i in range(k.shape[0])), tuple(f"c{j}" for j in range(k.shape[1])), k
    )


DIAG = table([[2, 0], [0, 2]])


def test_frequencies_uniform():
    m = ca.frequencies(table([[1, 1], [1, 1]]))
    np.testing.assert_array_equal(m.f, np.full((2, 2), 0.25))
    np.testing.assert_array_equal(m.row_masses, [0.5, 0.5])
    np.testing.assert_array_equal(m.col_masses, [0.5, 0.5])


def test_frequencies_diagonal():
    m = ca.frequencies(DIAG)
    np.testing.assert_array_equal(m.f, [[0.5, 0], [0, 0.5]])


def test_frequencies_margins(rng):
    t = random_table(rng, 10, 6, min_rows=10, min_cols=6)
    m = ca.frequencies(t)
    assert abs(m.f.sum() - 1) <= 1e-12
    np.testing.assert_allclose(m.row_masses, [sum(r) for r in m.f.tolist()], rtol=0, atol=1e-15)
    np.testing.assert_allclose(m.col_masses, m.f.sum(axis=0), rtol=0, atol=1e-15)


def test_chi2_distance_hand_values():
    m = ca.frequencies(DIAG)
    assert ca.chi2_distance(m, "rows", 0, 1) == pytest.approx(2.0, abs=1e-12)
    assert ca.chi2_distance(m, "rows", 0, 0) == 0.0
    assert ca.chi2_distance(m, "columns", 0, 1) == pytest.approx(2.0, abs=1e-12)


def test_chi2_distance_matches_loop_oracle(rng):
    for _ in range(20):
        t = random_table(rng)
        m = ca.frequencies(t)
        counts = t.counts.tolist()
        n = len(counts)
        for a in range(n):
            b = (a + 1) % n
            expected = oracles.chi2_sq_distance_rows(counts, a, b)
            assert ca.chi2_distance(m, "rows", a, b) ** 2 == pytest.approx(expected, rel=1e-12, abs=1e-14)
            assert ca.chi2_distance(m, "rows", a, b) == ca.chi2_distance(m, "rows", b, a)


def test_column_split_keeps_distance(rng):
    t = random_table(rng, 6, 4, min_rows=6, min_cols=4)
    k = np.array(t.counts)
    split = np.column_stack([k, k[:, :1]])
    split[:, 0] /= 2
    split[:, -1] /= 2
    m0 = ca.frequencies(t)
    m1 = ca.frequencies(table(split))
    for a in range(6):
        for b in range(6):
            assert abs(ca.chi2_distance(m0, "rows", a, b) - ca.chi2_distance(m1, "rows", a, b)) <= 1e-12


def test_total_inertia():
    assert ca.total_inertia(ca.frequencies(DIAG)) == pytest.approx(1.0, abs=1e-15)
    indep = table(np.outer([1, 2, 3], [4, 5]))
    assert ca.total_inertia(ca.frequencies(indep)) == pytest.approx(0.0, abs=1e-15)


def test_total_inertia_matches_double_sum_and_is_symmetric(rng):
    for _ in range(20):
        t = random_table(rng)
        m = ca.frequencies(t)
        assert ca.total_inertia(m) == pytest.approx(oracles.inertia_double_sum(t.counts.tolist()), rel=1e-12)
        assert ca.total_inertia(ca.frequencies(t.transpose())) == pytest.approx(ca.total_inertia(m), rel=1e-12)


def test_decompose_diagonal():
    s = ca.decompose(ca.frequencies(DIAG))
    assert s.n_factors == 1
    assert s.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(s.row_coords[:, 0], [1.0, -1.0], atol=1e-12)
    assert (s.row_coords[0, 0] - s.row_coords[1, 0]) ** 2 == pytest.approx(4.0, abs=1e-12)
    assert ca.inertia_explained(s, 1) == pytest.approx(1.0)


def test_decompose_independence_table_has_no_factors():
    s = ca.decompose(ca.frequencies(table(np.outer([1, 2, 3], [4, 5, 6]))))
    assert s.n_factors == 0
    assert s.row_coords.shape == (3, 0)


def test_factor_count_bound():
    rng = np.random.default_rng(1)
    k = rng.integers(1, 9, size=(77, 12))
    s = ca.decompose(ca.frequencies(table(k)))
    assert s.n_factors <= 11


def test_eigenvalues_sorted_and_sign_convention(rng):
    for _ in range(20):
        s = ca.decompose(ca.frequencies(random_table(rng)))
        assert np.all(np.diff(s.eigenvalues) <= 0)
        for a in range(s.n_factors):
            col = s.row_coords[:, a]
            assert col[np.argmax(np.abs(col))] > 0


def test_distance_preservation_columns(rng):
    for _ in range(20):
        t = random_table(rng)
        m = ca.frequencies(t)
        s = ca.decompose(m)
        G = s.col_coords
        for a in range(G.shape[0]):
            for b in range(a + 1, G.shape[0]):
                d2 = ca.chi2_distance(m, "columns", a, b) ** 2
                assert abs(np.sum((G[a] - G[b]) ** 2) - d2) <= 1e-8 * max(1.0, d2)


def test_transition_formulas(rng):
    for _ in range(20):
        t = random_table(rng)
        m = ca.frequencies(t)
        s = ca.decompose(m)
        lam = s.eigenvalues
        F = m.row_profiles() @ s.col_coords / np.sqrt(lam)
        G = m.col_profiles() @ s.row_coords / np.sqrt(lam)
        np.testing.assert_allclose(F, s.row_coords, atol=1e-8)
        np.testing.assert_allclose(G, s.col_coords, atol=1e-8)


def test_supplementary_fixed_point_and_centroid(rng):
    t = random_table(rng, 12, 8, min_rows=5, min_cols=4)
    m = ca.frequencies(t)
    s = ca.decompose(m)
    for i in range(len(t.row_labels)):
        np.testing.assert_allclose(ca.project_supplementary(s, m.profile("rows", i), "rows"), s.row_coords[i], atol=1e-8)
    for j in range(len(t.col_labels)):
        np.testing.assert_allclose(ca.project_supplementary(s, t.counts[:, j], "columns"), s.col_coords[j], atol=1e-8)
    np.testing.assert_allclose(ca.project_supplementary(s, m.col_masses, "rows"), 0, atol=1e-10)
    with pytest.raises(DimensionMismatch):
        ca.project_supplementary(s, np.ones(len(t.col_labels) + 1), "rows")


def test_supplementary_does_not_modify_space(rng):
    t = random_table(rng, 10, 6, min_rows=6, min_cols=6)
    s = ca.decompose(ca.frequencies(t))
    before = s.row_coords.copy()
    ca.project_supplementary(s, rng.integers(1, 5, size=6), "rows")
    np.testing.assert_array_equal(s.row_coords, before)


def test_supplementary_themes_inside_active_span():
    # twelve synthetic theme profiles as mixtures of active rows land inside the cloud's bounding box
    rng = np.random.default_rng(3)
    t = table(rng.integers(1, 30, size=(20, 8)))
    m = ca.frequencies(t)
    s = ca.decompose(m)
    lo, hi = s.row_coords.min(axis=0), s.row_coords.max(axis=0)
    for _ in range(12):
        w = rng.dirichlet(np.ones(20))
        p = w @ m.row_profiles()
        x = ca.project_supplementary(s, ca.Profile(p / p.sum()), "rows")
        # a mixture of row profiles projects to the same mixture of row points
        np.testing.assert_allclose(x, w @ s.row_coords, atol=1e-10)
        assert np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12)


def test_factor_correlations(rng):
    s = ca.decompose(ca.frequencies(random_table(rng, 10, 6, min_rows=6, min_cols=6)))
    for i in range(len(s.row_labels)):
        c = ca.factor_correlations(s, "rows", i)
        assert np.sum(c**2) == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.abs(c) <= 1)


def test_factor_correlations_on_axis_and_origin():
    k = np.array([[4, 0, 2], [0, 4, 2], [2, 2, 2]], dtype=float)
    s = ca.decompose(ca.frequencies(table(k)))
    # third row is the average profile, so it sits at the origin
    with pytest.raises(OriginPoint):
        ca.factor_correlations(s, "rows", 2)
    on_axis = ca.FactorSpace(
        np.array([0.5, 0.2, 0.1]), np.array([[2.5, 0.0, 0.0]]), np.zeros((0, 3)),
        np.array([1.0]), np.zeros(0), 0.8,
    )
    np.testing.assert_array_equal(ca.factor_correlations(on_axis, "rows", 0), [1.0, 0.0, 0.0])


def test_inertia_explained(rng):
    s = ca.decompose(ca.frequencies(random_table(rng)))
    assert sum(ca.inertia_explained(s, a) for a in range(1, s.n_factors + 1)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(FactorOutOfRange):
        ca.inertia_explained(s, s.n_factors + 1)


def test_row_permutation_equivariance(rng):
    t = random_table(rng, 15, 8, min_rows=6, min_cols=5)
    s = ca.decompose(ca.frequencies(t))
    perm = rng.permutation(len(t.row_labels))
    tp = ContingencyTable(tuple(t.row_labels[i] for i in perm), t.col_labels, t.counts[perm])
    sp = ca.decompose(ca.frequencies(tp))
    np.testing.assert_allclose(sp.eigenvalues, s.eigenvalues, rtol=1e-12, atol=1e-14)
    # compare up to per-factor sign, which the convention fixes from the permuted data anyway
    signs = np.sign(np.sum(sp.row_coords * s.row_coords[perm], axis=0))
    np.testing.assert_allclose(sp.row_coords * signs, s.row_coords[perm], atol=1e-10)


def test_scale_invariance(rng):
    t = random_table(rng, 12, 7, min_rows=5, min_cols=5)
    s = ca.decompose(ca.frequencies(t))
    s7 = ca.decompose(ca.frequencies(table(t.counts * 7.5)))
    np.testing.assert_allclose(s7.eigenvalues, s.eigenvalues, atol=1e-10)
    np.testing.assert_allclose(s7.row_coords, s.row_coords, atol=1e-10)
    np.testing.assert_allclose(s7.col_coords, s.col_coords, atol=1e-10)


def test_factor_csv_export():
    s = ca.decompose(ca.frequencies(DIAG))
    lines = s.to_csv("rows").splitlines()
    assert lines[0] == "# eigenvalue,1"
    assert lines[1] == "# percent,100"
    assert lines[2] == "label,mass,F1"
    assert lines[3] == "r0,0.5,1"
    assert lines[4] == "r1,0.5,-1"


def test_profile_validation():
    with pytest.raises(ValueError):
        ca.Profile(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        ca.Profile.from_counts([0, 0])
