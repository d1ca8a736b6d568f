from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from zygmund.luxemburg import (
    NumericalFailure,
    luxemburg_gradient,
    luxemburg_norm,
    luxemburg_norms,
    modular,
    norm_of_abs,
    value_and_gradient,
)
from zygmund.space import ProbSpace, lp_norm, uniform_grid_space
from zygmund.systems import DenseSystem, fourier_system, walsh_system
from zygmund.young import young_close2, young_kashin, young_power, young_ryou

E = math.e


def _random_f(rng, M, scale=1.0):
    return scale * (rng.standard_normal(M) + 1j * rng.standard_normal(M))


# ---------------------------------------------------------------- oracles


@pytest.mark.parametrize("p", [1.0, 2.0, 2.5, 3.0, 4.0, 7.0])
def test_power_family_equals_lp_norm(p):
    rng = np.random.default_rng(int(p * 10))
    space = uniform_grid_space(257)
    f = _random_f(rng, 257)
    assert luxemburg_norm(space, young_power(p), f).value == pytest.approx(lp_norm(space, f, p), rel=1e-9)


@pytest.mark.parametrize("spec,phi", [
    (young_close2(1.0), lambda u: oracles.phi_close2(u, 1.0)),
    (young_close2(0.5), lambda u: oracles.phi_close2(u, 0.5)),
    (young_close2(2.0), lambda u: oracles.phi_close2(u, 2.0)),
    (young_ryou(3.0, 1.0), lambda u: oracles.phi_ryou(u, 3.0, 1.0)),
    (young_kashin(1.0), lambda u: oracles.phi_kashin(u, 1.0)),
], ids=str)
@pytest.mark.parametrize("scale", [0.01, 1.0, 30.0])
def test_norm_matches_brentq_oracle(spec, phi, scale):
    rng = np.random.default_rng(7)
    w = rng.dirichlet(np.ones(40))
    space = ProbSpace(w)
    f = _random_f(rng, 40, scale) * (rng.random(40) < 0.3) * rng.pareto(1.5, 40)
    want = oracles.luxemburg(w, np.abs(f), phi)
    got = luxemburg_norm(space, spec, f, rel_tol=1e-13).value
    assert got == pytest.approx(want, rel=1e-12)


def test_single_atom_closed_form():
    # f = A on an atom of weight w: need w Phi(A/k) = 1; for close2(1) with
    # A/k >= e this is w (A/k)^2 ln(A/k) = 1, i.e. k = A / exp(W(2/w)/2)
    from scipy.special import lambertw

    w, A = 0.01, 5.0
    space = ProbSpace(np.array([w, 1 - w]))
    u = math.exp(lambertw(2 / w).real / 2)
    assert u >= E
    got = luxemburg_norm(space, young_close2(1.0), np.array([A, 0.0]), rel_tol=1e-13).value
    assert got == pytest.approx(A / u, rel=1e-12)


def test_quadratic_regime_is_l2():
    # |f| small relative to its L2 norm keeps every atom below e, so the norm is L2
    space = uniform_grid_space(64)
    f = np.exp(2j * np.pi * np.arange(64) / 64) * 1.7
    assert luxemburg_norm(space, young_close2(1.0), f).value == pytest.approx(1.7, rel=1e-10)


def test_unimodular_function_has_norm_one():
    sys = fourier_system(8, 64)
    f = sys.synthesize([3], [1.0])
    for spec in (young_close2(0.5), young_close2(2.0), young_power(3.0)):
        assert luxemburg_norm(sys.space, spec, f).value == pytest.approx(1.0, rel=1e-9)


# ------------------------------------------------------- basic behaviour


def test_modular_equals_one_at_norm():
    rng = np.random.default_rng(0)
    space = uniform_grid_space(100)
    f = _random_f(rng, 100, 5.0)
    for spec in (young_close2(1.0), young_ryou(3.0, 0.5), young_kashin(1.0)):
        res = luxemburg_norm(space, spec, f, rel_tol=1e-12)
        assert res.modular_at_value <= 1.0
        assert res.modular_at_value == pytest.approx(1.0, abs=1e-10)
        assert modular(space, spec, f, res.value) == pytest.approx(1.0, abs=1e-10)
        lo, hi = res.bracket
        assert lo <= res.value == hi
        assert modular(space, spec, f, lo) > 1.0


def test_zero_function():
    space = uniform_grid_space(4)
    res = luxemburg_norm(space, young_close2(1.0), np.zeros(4))
    assert res.value == 0.0 and float(res) == 0.0


def test_zero_weight_atoms_ignored():
    space = ProbSpace(np.array([0.5, 0.5, 0.0]))
    a = luxemburg_norm(space, young_close2(1.0), np.array([3.0, 1.0, 1e9])).value
    b = luxemburg_norm(ProbSpace(np.array([0.5, 0.5])), young_close2(1.0), np.array([3.0, 1.0])).value
    assert a == pytest.approx(b, rel=1e-12)


def test_invalid_arguments():
    space = uniform_grid_space(4)
    spec = young_close2(1.0)
    with pytest.raises(ValueError):
        luxemburg_norm(space, spec, np.array([1, np.nan, 0, 0]))
    with pytest.raises(ValueError):
        luxemburg_norm(space, spec, np.ones(3))
    with pytest.raises(ValueError):
        luxemburg_norm(space, spec, np.ones(4), rel_tol=0.0)
    with pytest.raises(ValueError):
        luxemburg_norm(space, spec, np.ones(4), rel_tol=0.1)
    with pytest.raises(ValueError):
        modular(space, spec, np.ones(4), 0.0)


def test_extreme_magnitudes_via_homogeneity():
    space = uniform_grid_space(16)
    rng = np.random.default_rng(3)
    f = _random_f(rng, 16)
    base = luxemburg_norm(space, young_ryou(4.0, 2.0), f).value
    for s in (1e-250, 1e250):
        assert luxemburg_norm(space, young_ryou(4.0, 2.0), s * f).value == pytest.approx(s * base, rel=1e-9)


def test_bracket_failure_raises_numerical_failure(monkeypatch):
    from zygmund import _backend

    def failing(absf, w, *args):
        return 1.0, 2.0, 0, 0.5, 1.0, 1

    monkeypatch.setattr(_backend, "luxemburg_abs", failing)
    with pytest.raises(NumericalFailure):
        norm_of_abs(np.full(2, 0.5), young_power(2.0), np.array([1.0, 0.0]))


def test_tiny_weights_still_bracket():
    w = np.array([1e-320, 1.0 - 1e-320])
    res = norm_of_abs(w, young_power(2.0), np.array([1.0, 0.0]))
    assert res.value == pytest.approx(math.sqrt(1e-320), rel=1e-6)


def test_row_batch_matches_single():
    rng = np.random.default_rng(11)
    space = uniform_grid_space(32)
    F = np.stack([_random_f(rng, 32, s) for s in (0.1, 1, 10, 100)] + [np.zeros(32)])
    spec = young_close2(1.0)
    batch = luxemburg_norms(space, spec, F, rel_tol=1e-12)
    single = [luxemburg_norm(space, spec, f, rel_tol=1e-12).value for f in F]
    np.testing.assert_allclose(batch, single, rtol=1e-11)
    with pytest.raises(ValueError):
        luxemburg_norms(space, spec, F[:, :5])


# ------------------------------------------------------------ properties

funcs = arrays(np.float64, 24, elements=st.floats(-1e3, 1e3, allow_subnormal=False))


@settings(max_examples=60, deadline=None)
@given(funcs, st.floats(1e-6, 1e6), st.sampled_from([0.5, 1.0, 2.0]))
def test_homogeneity(f, lam, alpha):
    space = uniform_grid_space(24)
    spec = young_close2(alpha)
    a = luxemburg_norm(space, spec, lam * f, rel_tol=1e-12).value
    b = luxemburg_norm(space, spec, f, rel_tol=1e-12).value
    assert a == pytest.approx(lam * b, rel=1e-9, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(funcs, funcs, st.sampled_from([0.5, 1.0, 2.0]))
def test_triangle_inequality(f, g, alpha):
    space = uniform_grid_space(24)
    spec = young_close2(alpha)
    n = lambda h: luxemburg_norm(space, spec, h, rel_tol=1e-12).value
    assert n(f + g) <= (n(f) + n(g)) * (1 + 1e-9) + 1e-300


@settings(max_examples=60, deadline=None)
@given(funcs, arrays(np.float64, 24, elements=st.floats(0, 1)), st.sampled_from([0.5, 1.0, 2.0]))
def test_pointwise_monotone(f, shrink, alpha):
    space = uniform_grid_space(24)
    spec = young_close2(alpha)
    n = lambda h: luxemburg_norm(space, spec, h, rel_tol=1e-12).value
    assert n(shrink * f) <= n(f) * (1 + 1e-9) + 1e-300


@settings(max_examples=40, deadline=None)
@given(funcs)
def test_close2_dominates_l2(f):
    space = uniform_grid_space(24)
    assert luxemburg_norm(space, young_close2(1.0), f).value >= lp_norm(space, f, 2) * (1 - 1e-9)


@settings(max_examples=30, deadline=None)
@given(funcs, st.floats(0.3, 3.0))
def test_alpha_monotone(f, alpha):
    # Phi grows with alpha above e (ln u >= 1 there), so the norm does too
    space = uniform_grid_space(24)
    n = lambda a: luxemburg_norm(space, young_close2(a), f, rel_tol=1e-12).value
    assert n(alpha) <= n(alpha + 0.5) * (1 + 1e-9) + 1e-300


# -------------------------------------------------------------- gradient


def _fd_gradient(spec, sys, J, a, h=1e-6):
    m = len(J)
    x = np.concatenate([a.real, a.imag])
    g = np.empty(2 * m)
    for i in range(2 * m):
        e = np.zeros(2 * m)
        e[i] = h
        fp, fm = x + e, x - e
        vp = luxemburg_norm(sys.space, spec, sys.synthesize(J, fp[:m] + 1j * fp[m:]), rel_tol=1e-15).value
        vm = luxemburg_norm(sys.space, spec, sys.synthesize(J, fm[:m] + 1j * fm[m:]), rel_tol=1e-15).value
        g[i] = (vp - vm) / (2 * h)
    return g


@pytest.mark.parametrize("seed", range(4))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    space = uniform_grid_space(48)
    sys = DenseSystem(space, 3 * (rng.standard_normal((48, 4)) + 1j * rng.standard_normal((48, 4))))
    J = [1, 2, 4]
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    for spec in (young_close2(1.0), young_ryou(3.0, 0.5)):
        g = luxemburg_gradient(spec, sys, J, a, rel_tol=1e-15)
        fd = _fd_gradient(spec, sys, J, a)
        assert np.linalg.norm(g - fd) <= 1e-5 * np.linalg.norm(fd)


def test_gradient_euler_identity():
    # 1-homogeneity: <grad, a> = ||f_a||
    sys = walsh_system(5)
    rng = np.random.default_rng(2)
    J = [1, 3, 7, 12, 30]
    a = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    k, g = value_and_gradient(young_close2(2.0), sys, J, a)
    assert g @ np.concatenate([a.real, a.imag]) == pytest.approx(k, rel=1e-9)


def test_gradient_for_l2_is_normalized_gram_action():
    # for Phi = u^2 the norm is sqrt(a^H G a), so grad = G a / ||f||
    rng = np.random.default_rng(5)
    space = uniform_grid_space(20)
    sys = DenseSystem(space, rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3)))
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    k, g = value_and_gradient(young_power(2.0), sys, [1, 2, 3], a)
    Ga = sys.gram([1, 2, 3]) @ a
    np.testing.assert_allclose(g, np.concatenate([Ga.real, Ga.imag]) / k, rtol=1e-8)


def test_gradient_undefined_at_zero():
    sys = fourier_system(4, 16)
    with pytest.raises(ValueError):
        luxemburg_gradient(young_close2(1.0), sys, [1, 2], np.zeros(2))
