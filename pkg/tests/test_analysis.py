import numpy as np
import pytest

from onsager2d.analysis import (DensityField, density_constraints, euler_lagrange_residual,
                                free_energy, operator_eigenvalues, potential, recover_density,
                                spectrum, trivial_free_energy)
from onsager2d.continuation import switch_branch
from onsager2d.gamma_map import jacobian
from onsager2d.kernel import from_coefficients
from onsager2d.spectral import SpectralField, grid
from onsager2d.verify import random_smooth_field


def test_trivial_spectrum_is_exact_diagonal(onsager):
    for lam in (0.5, 3.0, 10.0, 30.0):
        rep = spectrum(SpectralField.zeros(16), lam, onsager)
        np.testing.assert_allclose(rep.eigenvalues, np.sort(1 + lam * onsager.truncated(16) / 2), atol=1e-13)


def test_trivial_stable_below_first_point(onsager):
    rep = spectrum(SpectralField.zeros(16), 4.0, onsager)
    assert rep.stable and rep.status == "stable" and rep.basis == "symmetrized"


def test_trivial_unstable_past_first_point(onsager):
    lam = 2 * (-2 / onsager.k(1))
    rep = spectrum(SpectralField.zeros(16), lam, onsager)
    assert rep.min_eig == pytest.approx(-1.0, abs=1e-13)
    assert rep.status == "unstable"


def test_marginal_at_bifurcation(onsager):
    rep = spectrum(SpectralField.zeros(16), -2 / onsager.k(1), onsager)
    assert rep.status == "marginal" and not rep.stable


def test_branch_point_at_five_is_stable(solution_at, onsager):
    assert spectrum(solution_at(5.0), 5.0, onsager).min_eig > 0


def test_symmetrized_and_general_agree(rng):
    for _ in range(10):
        k = from_coefficients(0, -rng.uniform(0.01, 1.0, 8) * rng.choice([1, -1]))
        Jm = jacobian(random_smooth_field(8, rng, scale=3.0), k)
        lam = rng.uniform(0.5, 10)
        a, _ = operator_eigenvalues(Jm, lam, symmetric=True)
        b, _ = operator_eigenvalues(Jm, lam, symmetric=False)
        np.testing.assert_allclose(a, np.real(b), atol=1e-10)


def test_mixed_sign_kernel_uses_general_solver(rng):
    k = from_coefficients(0, [-1.0, 0.8, -0.3])
    rep = spectrum(random_smooth_field(3, rng), 2.0, k)
    assert rep.basis == "general"


def test_recover_density_trivial():
    f = recover_density(SpectralField.zeros(4), 1.0)
    np.testing.assert_allclose(f.values, 1 / (2 * np.pi), rtol=1e-15)


def test_recover_density_symmetries(rng):
    for _ in range(5):
        f = recover_density(random_smooth_field(10, rng, scale=4.0), 2.0, N=256)
        c = density_constraints(f)
        assert c["head_tail"] == 0.0
        assert c["mass"] < 1e-14 and c["negativity"] == 0.0
        assert c["reflection"] < 1e-14


@pytest.mark.parametrize("lam", [5.0, 6.0, 8.0])
def test_solutions_satisfy_original_equation(solution_at, onsager, lam):
    V = solution_at(lam)
    f = recover_density(V, lam, onsager, 512)
    assert euler_lagrange_residual(f, lam, onsager) <= 1e-9
    c = density_constraints(f)
    assert max(c.values()) <= 1e-12


def test_euler_lagrange_controls(onsager, rng):
    triv = recover_density(SpectralField.zeros(8), 3.0, onsager, 256)
    assert euler_lagrange_residual(triv, 3.0, onsager) <= 1e-14
    g = rng.uniform(0.5, 1.5, 256)
    g = 0.5 * (g + np.roll(g, 128))
    g /= g.sum() * 2 * np.pi / 256
    f = DensityField(g, 3.0, SpectralField.zeros(1))
    assert euler_lagrange_residual(f, 3.0, onsager) > 1e-2


def test_potential_of_trivial_density(onsager):
    f = recover_density(SpectralField.zeros(8), 2.0, onsager, 256)
    np.testing.assert_allclose(potential(f, 2.0, onsager), 2.0 * onsager.mean, rtol=1e-13)


def test_trivial_energy_closed_form(onsager):
    for lam in (0.0, 1.0, 5.0):
        f = recover_density(SpectralField.zeros(8), lam, onsager, 256)
        E = free_energy(f, lam, onsager)
        assert E == pytest.approx(-np.log(2 * np.pi) + lam / np.pi, abs=1e-13)
        assert E == pytest.approx(trivial_free_energy(lam, onsager), abs=1e-13)


def test_energy_below_trivial_on_stable_branch(solution_at, onsager):
    f = recover_density(solution_at(5.0), 5.0, onsager, 512)
    assert free_energy(f, 5.0, onsager) < trivial_free_energy(5.0, onsager)


def test_energy_is_stationary_at_solutions(solution_at, onsager):
    lam = 6.0
    f = recover_density(solution_at(lam), lam, onsager, 512)
    th = f.theta
    h2 = 1e-5
    for n in (1, 2, 3):
        c = np.cos(2 * n * th)
        # mass- and parity-preserving direction
        h = f.values * (c - np.sum(c * f.values) / np.sum(f.values))
        plus = DensityField(f.values + h2 * h, lam, f.source)
        minus = DensityField(f.values - h2 * h, lam, f.source)
        d = (free_energy(plus, lam, onsager) - free_energy(minus, lam, onsager)) / (2 * h2)
        assert abs(d) <= 1e-6


def test_energy_rotation_invariance(solution_at, onsager):
    f = recover_density(solution_at(6.0), 6.0, onsager, 512)
    g = DensityField(np.roll(f.values, 128), 6.0, f.source)
    assert free_energy(g, 6.0, onsager) == pytest.approx(free_energy(f, 6.0, onsager), abs=1e-13)


def test_energy_grid_refinement(solution_at, onsager):
    V = solution_at(6.0)
    E1 = free_energy(recover_density(V, 6.0, onsager, 256), 6.0, onsager)
    E2 = free_energy(recover_density(V, 6.0, onsager, 512), 6.0, onsager)
    assert abs(E1 - E2) < 1e-10


def test_free_energy_rejects_nonpositive(onsager):
    with pytest.raises(ValueError):
        free_energy(DensityField(np.zeros(16), 1.0, SpectralField.zeros(1)), 1.0, onsager)


def test_branch_onset_eigenvalue_positive(onsager):
    p = switch_branch(1, onsager, 0.02, 1, M=32)
    assert 0 < p.min_eig < 1e-3


def test_grid_helper():
    assert grid(4)[1] == pytest.approx(np.pi / 2)


# --- properties -----------------------------------------------------------

from hypothesis import given, settings  # noqa: E402
from hypothesis import strategies as st  # noqa: E402

from onsager2d.kernel import onsager_coefficients  # noqa: E402

coeff_lists = st.lists(st.floats(-3, 3), min_size=1, max_size=8)


@settings(max_examples=40, deadline=None)
@given(coeff_lists, st.floats(0, 40))
def test_density_invariants(v, lam):
    f = recover_density(SpectralField(v), lam)
    c = density_constraints(f)
    assert (f.values > 0).all()
    assert c["mass"] <= 1e-12 and c["head_tail"] <= 1e-12 and c["reflection"] <= 1e-12


@settings(max_examples=30, deadline=None)
@given(coeff_lists, st.floats(0, 40))
def test_negative_kernel_spectrum_real_and_status_consistent(v, lam):
    rep = spectrum(SpectralField(v), lam, onsager_coefficients(16))
    assert np.isrealobj(rep.eigenvalues)
    assert rep.stable == (rep.min_eig > rep.tol)
    assert rep.n_negative == int(np.sum(rep.eigenvalues < -rep.tol))
