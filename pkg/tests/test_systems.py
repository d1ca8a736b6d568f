from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zygmund.space import ProbSpace, uniform_grid_space
from zygmund.systems import (
    DenseSystem,
    as_indices,
    fourier_system,
    fwht,
    read_system_csv,
    validate_system,
    walsh_system,
    write_system_csv,
)


def test_fourier_columns_formula():
    sys = fourier_system(5, 16)
    V = sys.columns([1, 5])
    x = np.arange(16) / 16
    np.testing.assert_allclose(V[:, 0], np.exp(-2j * np.pi * x))
    np.testing.assert_allclose(V[:, 1], np.exp(-2j * np.pi * 5 * x))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 64), st.integers(0, 2**31), st.data())
def test_fourier_fast_paths_match_dense(n, seed, data):
    M = max(2 * n, data.draw(st.integers(2 * n, 4 * n + 8)))
    sys = fourier_system(n, M)
    rng = np.random.default_rng(seed)
    J = np.unique(rng.integers(1, n + 1, size=min(n, 6)))
    a = rng.standard_normal(J.size) + 1j * rng.standard_normal(J.size)
    V = sys.columns(J)
    np.testing.assert_allclose(sys.synthesize(J, a), V @ a, atol=1e-10)
    v = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    np.testing.assert_allclose(sys.analyze(J, v), V.conj().T @ v, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**31))
def test_walsh_fast_paths_match_dense(d, seed):
    sys = walsh_system(d)
    rng = np.random.default_rng(seed)
    J = np.unique(rng.integers(1, sys.n + 1, size=min(sys.n, 5)))
    a = rng.standard_normal(J.size) + 1j * rng.standard_normal(J.size)
    V = sys.columns(J)
    np.testing.assert_allclose(sys.synthesize(J, a), V @ a, atol=1e-10)
    v = rng.standard_normal(2**d)
    np.testing.assert_allclose(sys.analyze(J, v), V.conj().T @ v, atol=1e-10)


def test_walsh_is_rademacher_products():
    sys = walsh_system(3)
    V = sys.columns(np.arange(1, 8)).real
    x = np.arange(8)
    r = [1 - 2 * ((x >> b) & 1) for b in range(3)]
    np.testing.assert_array_equal(V[:, 0], r[0])
    np.testing.assert_array_equal(V[:, 2], r[0] * r[1])
    np.testing.assert_array_equal(V[:, 6], r[0] * r[1] * r[2])


def test_fwht_is_hadamard_matrix_product():
    H = np.array([[1.0]])
    for _ in range(4):
        H = np.block([[H, H], [H, -H]])
    x = np.random.default_rng(0).standard_normal(16)
    np.testing.assert_allclose(fwht(x), H @ x)
    with pytest.raises(ValueError):
        fwht(np.ones(6))


@pytest.mark.parametrize("sys", [fourier_system(32), walsh_system(6)], ids=["fourier", "walsh"])
def test_orthonormal_and_bounded(sys):
    st_ = sys.stats
    assert st_.max_ortho_defect < 1e-12
    assert st_.max_sup == pytest.approx(1.0)
    assert st_.S == pytest.approx(1.0)
    G = sys.gram(np.arange(1, sys.n + 1))
    np.testing.assert_allclose(G, np.eye(sys.n), atol=1e-12)


def test_fourier_defect_formula_matches_gram():
    sys = fourier_system(10, 24)
    G = sys.gram(np.arange(1, 11))
    np.fill_diagonal(G, 0)
    assert sys.max_ortho_defect == pytest.approx(float(np.abs(G).max()), abs=1e-15)


def test_large_fourier_uses_sampled_stats():
    sys = fourier_system(8192, 1 << 15)
    assert sys.S == pytest.approx(1.0)
    assert sys.max_ortho_defect < 1e-10


def test_aliasing_guard():
    with pytest.raises(ValueError):
        fourier_system(512, 64)
    sys = fourier_system(512, 64, allow_aliasing=True)
    # frequencies congruent mod M coincide on the grid
    np.testing.assert_allclose(sys.columns([3]), sys.columns([67]))


def test_default_grid():
    assert fourier_system(100).M == 1024
    assert fourier_system(1000).M == 4000


def test_dense_system_validation_reports_violation():
    space = uniform_grid_space(4)
    V = np.array([[1, 1], [1, 1], [1, 1], [1, 1]], dtype=float) * 2
    stats = validate_system(DenseSystem(space, V))
    assert stats.max_sup == 2.0 and stats.max_ortho_defect == pytest.approx(4.0)
    with pytest.raises(ValueError):
        validate_system(DenseSystem(space, V), p1=2.0)


def test_dense_system_rejects_bad_shapes():
    with pytest.raises(ValueError):
        DenseSystem(uniform_grid_space(4), np.ones((3, 2)))
    with pytest.raises(ValueError):
        DenseSystem(uniform_grid_space(2), np.array([[1.0], [np.inf]]))


def test_weighted_space_stats():
    space = ProbSpace(np.array([0.25, 0.75]))
    V = np.array([[np.sqrt(3)], [1 / np.sqrt(3)]])
    sys = DenseSystem(space, V)
    # ||phi||_4^4 = 0.25 * 9 + 0.75 / 9
    assert sys.S == pytest.approx((0.25 * 9 + 0.75 / 9) ** 0.25)


def test_as_indices():
    assert as_indices([1, 2], 3).tolist() == [1, 2]
    with pytest.raises(ValueError):
        as_indices([0], 3)
    with pytest.raises(ValueError):
        as_indices([4], 3)


def test_csv_roundtrip(tmp_path):
    sys = fourier_system(3, 8)
    write_system_csv(tmp_path / "s.csv", sys)
    back = read_system_csv(tmp_path / "s.csv")
    np.testing.assert_allclose(back.values, sys.columns([1, 2, 3]), atol=1e-15)


def test_csv_warns_outside_regime(tmp_path):
    (tmp_path / "bad.csv").write_text("2,0\n2,0\n")
    with pytest.warns(UserWarning):
        read_system_csv(tmp_path / "bad.csv")
    (tmp_path / "odd.csv").write_text("1,0,1\n")
    with pytest.raises(ValueError):
        read_system_csv(tmp_path / "odd.csv")


@pytest.mark.parametrize("bad", [lambda: fourier_system(0), lambda: walsh_system(0), lambda: walsh_system(21)])
def test_constructor_preconditions(bad):
    with pytest.raises(ValueError):
        bad()
