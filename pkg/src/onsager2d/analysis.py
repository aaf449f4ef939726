"""Stability spectra, density recovery, Euler-Lagrange residual and free energy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gamma_map import JacobianMatrix, jacobian
from .kernel import KernelSpec
from .spectral import SpectralField, default_grid, gibbs_weights, grid, synthesize

STABILITY_TOL = 1e-8


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray = field(repr=False)
    basis: str
    tol: float = STABILITY_TOL

    @property
    def min_eig(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def stable(self) -> bool:
        return self.min_eig > self.tol

    @property
    def status(self) -> str:
        if self.stable:
            return "stable"
        return "marginal" if abs(self.min_eig) <= self.tol else "unstable"

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.eigenvalues < -self.tol))


def operator_eigenvalues(J: JacobianMatrix, lam: float, symmetric: bool | None = None):
    """Eigenvalues of I - lam J ascending, and the basis they were computed in."""
    use_sym = J.sign_uniform if symmetric is None else symmetric
    I = np.eye(J.M)
    if use_sym:
        return np.linalg.eigvalsh(I - lam * J.symmetrized()), "symmetrized"
    ev = np.linalg.eigvals(I - lam * J.J)
    # mixed-sign kernels can produce complex pairs; order by real part
    ev = ev[np.argsort(ev.real, kind="stable")]
    if np.all(np.abs(ev.imag) <= 1e-12 * max(1.0, np.max(np.abs(ev)))):
        ev = ev.real
    return ev, "general"


def spectrum(V: SpectralField, lam: float, k: KernelSpec, N: int | None = None,
             tol: float = STABILITY_TOL) -> StabilityReport:
    J = jacobian(V, k, V.M, N)
    ev, basis = operator_eigenvalues(J, lam)
    if np.iscomplexobj(ev):
        ev_sorted = ev
        ev = np.real(ev_sorted)
    return StabilityReport(np.asarray(ev, dtype=float), basis, tol)


@dataclass(frozen=True)
class DensityField:
    values: np.ndarray = field(repr=False)
    lam: float
    source: SpectralField

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return grid(self.N)

    def mass(self) -> float:
        return float(np.sum(self.values) * 2.0 * np.pi / self.N)


def recover_density(V: SpectralField, lam: float, k: KernelSpec | None = None,
                    N: int | None = None) -> DensityField:
    """Orientation density exp(-U)/Z on the grid; the constant lam*Kbar cancels."""
    N = default_grid(V.M) if N is None else N
    w = gibbs_weights(synthesize(V, N).values)
    f = w * (N / (2.0 * np.pi))
    return DensityField(f, lam, V)


def _kernel_matrix(k: KernelSpec, N: int) -> np.ndarray:
    th = grid(N)
    # K(theta_i - theta_j) depends on (i - j) mod N only
    row = k.evaluate(th)
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    return row[idx]


def potential(f: DensityField, lam: float, k: KernelSpec) -> np.ndarray:
    """U(f)(theta_i) = lam * sum_j K(theta_i - theta_j) f_j (2 pi / N)."""
    N = f.N
    return lam * (_kernel_matrix(k, N) @ f.values) * (2.0 * np.pi / N)


def euler_lagrange_residual(f: DensityField, lam: float, k: KernelSpec) -> float:
    """Sup norm of f - exp(-U(f)) / int exp(-U(f)), U by direct quadrature convolution."""
    U = potential(f, lam, k)
    e = np.exp(-(U - U.min()))
    g = e / (np.sum(e) * 2.0 * np.pi / f.N)
    return float(np.max(np.abs(f.values - g)))


def density_constraints(f: DensityField) -> dict[str, float]:
    """Deviation from positivity, normalization and the two symmetries."""
    g = f.values
    N = f.N
    rev = np.roll(g[::-1], 1)
    return {
        "negativity": float(max(0.0, -g.min())),
        "mass": abs(f.mass() - 1.0),
        "head_tail": float(np.max(np.abs(g - np.roll(g, N // 2)))),
        "reflection": float(np.max(np.abs(g - rev))),
    }


def free_energy(f: DensityField, lam: float, k: KernelSpec) -> float:
    """int f log f + (1/2) int U(f) f by trapezoidal quadrature."""
    if np.any(f.values <= 0):
        raise ValueError("free energy needs a strictly positive density")
    h = 2.0 * np.pi / f.N
    U = potential(f, lam, k)
    return float(np.sum(f.values * np.log(f.values)) * h + 0.5 * np.sum(U * f.values) * h)


def trivial_free_energy(lam: float, k: KernelSpec) -> float:
    return -np.log(2.0 * np.pi) + 0.5 * lam * k.mean
