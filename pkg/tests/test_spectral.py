import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import iv

from onsager2d.spectral import (GridError, GridFunction, SpectralField, SymmetryError, analyze,
                                gibbs_measure, grid, h1_inner, synthesize)


def test_synthesize_single_mode():
    g = synthesize(SpectralField([1.0]), 8)
    np.testing.assert_allclose(g.values, [1, 0, -1, 0, 1, 0, -1, 0], atol=1e-15)


def test_synthesize_empty_field():
    assert np.all(synthesize(SpectralField([]), 16).values == 0)


def test_synthesize_grid_floor():
    with pytest.raises(GridError):
        synthesize(SpectralField(np.ones(4)), 12)


def test_round_trip(rng):
    for _ in range(20):
        v = SpectralField(rng.normal(size=16))
        back = analyze(synthesize(v, 128), 16)
        np.testing.assert_allclose(back.v, v.v, atol=1e-14)


def test_analyze_picks_single_mode():
    th = grid(64)
    np.testing.assert_allclose(analyze(GridFunction(np.cos(4 * th)), 5).v, [0, 1, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("f", [lambda t: np.sin(2 * t), lambda t: np.cos(t), lambda t: 1 + 0 * t,
                               lambda t: np.cos(40 * t)])
def test_analyze_rejects_content_outside_space(f):
    with pytest.raises(SymmetryError):
        analyze(GridFunction(f(grid(128))), 8)


def test_analyze_needs_room_above_top_mode():
    with pytest.raises(GridError):
        analyze(GridFunction(np.zeros(16)), 4)


def test_analyze_exp_cos_matches_bessel_series():
    # exp(-cos 2t) = I0(1) + 2 sum_m (-1)^m I_m(1) cos(2 m t)
    th = grid(256)
    g = np.exp(-np.cos(2 * th))
    v = analyze(GridFunction(g - g.mean()), 30, tol=1e-13).v
    m = np.arange(1, 31)
    np.testing.assert_allclose(v, 2 * (-1.0) ** m * iv(m, 1.0), atol=1e-15)
    assert np.all(np.abs(v[19:]) < 1e-12)
    assert g.mean() == pytest.approx(iv(0, 1.0), rel=1e-15)


def test_h1_inner():
    u = SpectralField([1.0])
    assert h1_inner(u, u) == pytest.approx(5 * np.pi, rel=1e-15)
    assert h1_inner(u, SpectralField([0.0, 1.0])) == 0.0
    for n in range(1, 8):
        phi = SpectralField.mode(n, 1 / np.sqrt((4 * n * n + 1) * np.pi), n)
        assert phi.h1_norm() == pytest.approx(1.0, rel=1e-14)
        assert phi.amplitude(n) == pytest.approx(1.0, rel=1e-14)


def test_h1_inner_matches_quadrature(rng):
    u = rng.normal(size=4)
    v = rng.normal(size=4)

    def val(c, t):
        return sum(c[m] * np.cos(2 * (m + 1) * t) for m in range(4))

    def der(c, t):
        return sum(-2 * (m + 1) * c[m] * np.sin(2 * (m + 1) * t) for m in range(4))

    ref = quad(lambda t: val(u, t) * val(v, t) + der(u, t) * der(v, t), 0, 2 * np.pi, limit=200)[0]
    assert h1_inner(SpectralField(u), SpectralField(v)) == pytest.approx(ref, rel=1e-10)


def test_gibbs_trivial():
    mu = gibbs_measure(SpectralField.zeros(4), 64)
    np.testing.assert_allclose(mu.weights, 1 / 64, rtol=1e-15)
    assert mu.moments[0] == 1.0
    np.testing.assert_allclose(mu.moments[1:], 0.0, atol=1e-16)


def test_gibbs_first_moment_linear_response():
    t = 1e-6
    mu = gibbs_measure(SpectralField([t]), 256)
    Z = quad(lambda x: np.exp(-t * np.cos(2 * x)), 0, 2 * np.pi)[0]
    ref = quad(lambda x: np.cos(2 * x) * np.exp(-t * np.cos(2 * x)), 0, 2 * np.pi, epsabs=1e-20)[0] / Z
    assert mu.moments[1] == pytest.approx(ref, rel=1e-9)
    assert mu.moments[1] == pytest.approx(-t / 2, rel=1e-9)


def test_gibbs_moments_match_bessel_ratio():
    # for V = a cos 2t the moments are (-1)^k I_k(a) / I_0(a)
    a = 2.3
    mu = gibbs_measure(SpectralField([a, 0, 0, 0, 0, 0]), 256)
    k = np.arange(13)
    np.testing.assert_allclose(mu.moments, (-1.0) ** k * iv(k, a) / iv(0, a), atol=1e-15)


def test_gibbs_rejects_small_grid():
    with pytest.raises(GridError):
        gibbs_measure(SpectralField(np.ones(8)), 32)


def test_gibbs_overflow_guard():
    mu = gibbs_measure(SpectralField([-800.0]), 256)
    assert np.all(np.isfinite(mu.weights)) and mu.weights.sum() == pytest.approx(1.0)


def test_trapezoid_exact_for_trig_products():
    N = 64
    th = grid(N)
    for k in range(0, 8):
        for l in range(0, 8):
            if k + l >= N // 4:
                continue
            val = np.sum(np.cos(2 * k * th) * np.cos(2 * l * th)) * 2 * np.pi / N
            exact = 2 * np.pi if k == l == 0 else (np.pi if k == l else 0.0)
            assert val == pytest.approx(exact, abs=1e-13)


fields = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=12).map(
    lambda c: SpectralField(np.array(c) / np.arange(1, len(c) + 1)))


@settings(max_examples=50, deadline=None)
@given(fields)
def test_gibbs_measure_invariants(V):
    mu = gibbs_measure(V, 256)
    assert np.all(mu.weights > 0)
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.abs(mu.moments) <= 1 + 1e-14)
    assert np.max(np.abs(mu.sin_moments(2 * V.M))) <= 1e-12
    # reflection theta -> -theta leaves the moments unchanged
    w = mu.weights
    wr = np.roll(w[::-1], 1)
    th = grid(256)
    k = np.arange(2 * V.M + 1)
    np.testing.assert_allclose(np.cos(2 * np.outer(k, th)) @ wr, mu.moments, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(fields, st.floats(-50, 50))
def test_gibbs_invariant_under_constant_shift(V, c):
    from onsager2d.spectral import gibbs_weights
    g = synthesize(V, 256).values
    np.testing.assert_allclose(gibbs_weights(g + c), gibbs_weights(g), rtol=1e-12, atol=1e-300)


@settings(max_examples=30, deadline=None)
@given(fields)
def test_grid_refinement_moves_moments_negligibly(V):
    a = gibbs_measure(V, 256).moments
    b = gibbs_measure(V, 512).moments
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_quarter_turn_shift():
    th = grid(64)
    v = SpectralField([0.3, -0.2, 0.1])
    g = synthesize(v, 64).values
    rolled = np.roll(g, -16)  # V(theta + pi/2)
    np.testing.assert_allclose(synthesize(v.shifted(1), 64).values, rolled, atol=1e-14)
    assert v.shifted(1).shifted(1) == v
    with pytest.raises(SymmetryError):
        v.shifted(2)
    w = SpectralField([0.0, 0.4, 0.0, 0.1])
    np.testing.assert_allclose(w.shifted(2).v, [0.0, -0.4, 0.0, 0.1])
    np.testing.assert_allclose(synthesize(w.shifted(2), 64).values,
                               np.roll(synthesize(w, 64).values, -8), atol=1e-14)
    assert th.size == 64
