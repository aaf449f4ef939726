"""The self-consistency map Gamma, the fixed-point residual and the Jacobian.

With the Gibbs moments ``M_k`` of ``exp(-V)``, the convolution of the
zero-mean kernel against the normalized density reduces coefficientwise to
``Gamma(V)_m = k_m M_m`` (sine moments vanish by evenness). Differentiating
the moments gives ``J_mn = k_m A_mn`` with

    A_mn = M_m M_n - (M_{m+n} + M_{|m-n|}) / 2,    M_0 = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import KernelSpec
from .spectral import SpectralField, basis_scale, default_grid, gibbs_measure


@dataclass(frozen=True)
class JacobianMatrix:
    J: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    k: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return self.J.shape[0]

    @property
    def sign_uniform(self) -> bool:
        return bool(np.all(self.k <= 0) or np.all(self.k >= 0))

    def symmetrized(self) -> np.ndarray:
        """S = s D A D with D = diag(sqrt|k|), s the common sign of k.

        S has the same spectrum as J when k has one sign (zeros allowed).
        """
        if not self.sign_uniform:
            raise ValueError("symmetrized form needs sign-uniform coefficients")
        s = -1.0 if np.any(self.k < 0) else 1.0
        d = np.sqrt(np.abs(self.k))
        return s * (d[:, None] * self.A * d[None, :])

    def orthonormal(self) -> np.ndarray:
        """J in the H^1-orthonormal basis: J_mn * scale_m / scale_n."""
        c = basis_scale(self.M)
        return self.J * c[:, None] / c[None, :]


def gamma(V: SpectralField, k: KernelSpec, N: int | None = None) -> SpectralField:
    mu = gibbs_measure(V, N, n_moments=V.M)
    return SpectralField(k.truncated(V.M) * mu.moments[1:V.M + 1])


def residual(V: SpectralField, lam: float, k: KernelSpec, N: int | None = None) -> SpectralField:
    if lam == 0.0:
        return V
    return V - lam * gamma(V, k, N)


def moment_matrix(moments: np.ndarray, M: int) -> np.ndarray:
    m = np.arange(1, M + 1)
    Mm = moments[m]
    plus = moments[m[:, None] + m[None, :]]
    minus = moments[np.abs(m[:, None] - m[None, :])]
    return np.outer(Mm, Mm) - 0.5 * (plus + minus)


def jacobian(V: SpectralField, k: KernelSpec, M: int | None = None, N: int | None = None) -> JacobianMatrix:
    M = V.M if M is None else M
    V = V.padded(M)
    N = default_grid(M) if N is None else N
    mu = gibbs_measure(V, N, n_moments=2 * M)
    A = moment_matrix(mu.moments, M)
    kk = k.truncated(M)
    return JacobianMatrix(kk[:, None] * A, A, kk)


def gamma_and_jacobian(V: SpectralField, k: KernelSpec, N: int | None = None):
    """Gamma(V) and its Jacobian from a single moment transform."""
    M = V.M
    N = default_grid(M) if N is None else N
    mu = gibbs_measure(V, N, n_moments=2 * M)
    kk = k.truncated(M)
    A = moment_matrix(mu.moments, M)
    return SpectralField(kk * mu.moments[1:M + 1]), JacobianMatrix(kk[:, None] * A, A, kk)
