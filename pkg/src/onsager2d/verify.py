"""Brute-force oracles for the spectral shortcuts.

The oracles evaluate everything by direct trigonometric sums and nested
quadrature; they never go through the moment transforms they check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gamma_map import gamma, jacobian
from .kernel import KernelSpec, onsager_coefficients
from .spectral import SpectralField


@dataclass(frozen=True)
class OracleReport:
    name: str
    max_abs_error: float
    samples: int
    bound: float

    @property
    def passed(self) -> bool:
        return bool(self.max_abs_error <= self.bound)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: error={self.max_abs_error:.3e} bound={self.bound:.1e} samples={self.samples}"


def _cos_sum(coeffs, theta):
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    for m, c in enumerate(coeffs, start=1):
        out += c * np.cos(2.0 * m * theta)
    return out


def nested_gamma(V: SpectralField, k: KernelSpec, theta_out, N_inner: int) -> np.ndarray:
    """Gamma(V)(theta) by trapezoidal quadrature of the normalized convolution."""
    tp = 2.0 * np.pi * np.arange(N_inner) / N_inner
    e = np.exp(-_cos_sum(V.v, tp))
    diff = np.subtract.outer(np.asarray(theta_out, dtype=float), tp)
    Kt = _cos_sum(k.coeffs, diff)
    return (Kt @ e) / e.sum()


def gamma_oracle(V: SpectralField, k: KernelSpec, N_outer: int = 64, N_inner: int = 512,
                 N: int | None = None, bound: float = 1e-8) -> OracleReport:
    M = max(V.M, k.P)
    th = 2.0 * np.pi * np.arange(N_outer) / N_outer
    fast = gamma(V.padded(M), k, N)
    err = np.max(np.abs(_cos_sum(fast.v, th) - nested_gamma(V, k, th, N_inner)))
    return OracleReport("gamma_oracle", float(err), N_outer, bound)


def fd_jacobian(V: SpectralField, k: KernelSpec, step: float = 1e-6, N: int | None = None,
                bound: float = 1e-6, relative: bool = True) -> OracleReport:
    """Central differences of Gamma along each coefficient direction against J.

    Column errors are relative to the column's sup norm (absolute when
    ``relative`` is False).
    """
    if not 1e-8 <= step <= 1e-2:
        raise ValueError("step outside [1e-8, 1e-2]")
    M = V.M
    J = jacobian(V, k, M, N).J
    worst = 0.0
    for n in range(M):
        e = np.zeros(M)
        e[n] = step
        col = (gamma(SpectralField(V.v + e), k, N).v - gamma(SpectralField(V.v - e), k, N).v) / (2 * step)
        err = np.max(np.abs(col - J[:, n]))
        if relative:
            err /= max(np.max(np.abs(J[:, n])), np.finfo(float).tiny)
        worst = max(worst, float(err))
    return OracleReport("fd_jacobian", worst, M, bound)


def gruss_violation(w: np.ndarray, f: np.ndarray, g: np.ndarray):
    """Batched covariance and both Gruss bounds; rows are independent trials."""
    Ef = np.sum(w * f, axis=1)
    Eg = np.sum(w * g, axis=1)
    cov = np.abs(np.sum(w * f * g, axis=1) - Ef * Eg)
    range_bound = (f.max(axis=1) - f.min(axis=1)) * (g.max(axis=1) - g.min(axis=1)) / 4.0
    sup_bound = np.abs(f).max(axis=1) * np.abs(g).max(axis=1)
    return cov, range_bound, sup_bound


def gruss_property(trials: int = 100_000, seed: int = 0, n_fields: int = 1000, M: int = 12,
                   slack: float = 1e-12) -> OracleReport:
    """Random measures and bounded functions; zero violations expected.

    Also checks |A_mn| <= 1 on ``n_fields`` random fields, where A is built by
    direct quadrature of cosine products against the Gibbs density.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = -np.inf
    done = 0
    batch = 5000
    while done < trials:
        b = min(batch, trials - done)
        n = int(rng.integers(2, 65))
        w = rng.dirichlet(np.full(n, rng.uniform(0.05, 2.0)), size=b)
        f = rng.uniform(-1, 1, (b, n)) * rng.uniform(0.1, 10, (b, 1))
        g = rng.uniform(-1, 1, (b, n)) * rng.uniform(0.1, 10, (b, 1))
        # a quarter of the trials use two-valued functions, where the bound is sharp
        sharp = rng.random(b) < 0.25
        f[sharp] = np.sign(f[sharp]) * np.abs(f[sharp]).max(axis=1, keepdims=True)
        g[sharp] = f[sharp] * rng.choice([-1.0, 1.0], size=(int(sharp.sum()), 1))
        cov, rb, sb = gruss_violation(w, f, g)
        worst = max(worst, float(np.max(cov - rb - slack * (1 + rb))),
                    float(np.max(cov - sb - slack * (1 + sb))))
        done += b
    worst_A = _cosine_covariance_check(rng, n_fields, M) - 1.0 - slack
    err = max(0.0, worst, worst_A)
    return OracleReport("gruss_property", err, trials + n_fields, 0.0)


def _cosine_covariance_check(rng, n_fields: int, M: int, N: int = 256) -> float:
    th = 2.0 * np.pi * np.arange(N) / N
    m = np.arange(1, M + 1)
    C = np.cos(2.0 * np.outer(th, m))
    env = 1.0 / m**2
    worst = 0.0
    for _ in range(n_fields):
        v = rng.uniform(-1, 1, M) * env * rng.uniform(0, 8)
        e = np.exp(-(C @ v - np.max(C @ v)))
        w = e / e.sum()
        Mm = w @ C
        A = np.outer(Mm, Mm) - (C * w[:, None]).T @ C
        worst = max(worst, float(np.max(np.abs(A))))
    return worst


def random_smooth_field(M: int, rng: np.random.Generator, scale: float = 2.0) -> SpectralField:
    m = np.arange(1, M + 1, dtype=float)
    return SpectralField(scale * rng.uniform(-1, 1, M) / m**2)


def run_all(seed: int = 0, trials: int = 100_000) -> list[OracleReport]:
    """Desk-scale oracle gate used by the command line."""
    rng = np.random.default_rng(seed)
    k = onsager_coefficients(32)
    reports = [gamma_oracle(SpectralField.mode(1, 1.0, 8), k, N_outer=64, N_inner=512, bound=1e-10)]
    g_err = max(gamma_oracle(random_smooth_field(8, rng), k, N_outer=64, N_inner=512).max_abs_error
                for _ in range(10))
    reports.append(OracleReport("gamma_oracle_random", g_err, 10, 1e-8))
    reports.append(OracleReport("fd_jacobian_trivial",
                                fd_jacobian(SpectralField.zeros(12), k, relative=False).max_abs_error,
                                12, 1e-9))
    fd = max(fd_jacobian(random_smooth_field(12, rng), k).max_abs_error for _ in range(20))
    reports.append(OracleReport("fd_jacobian_random", fd, 20, 1e-6))
    reports.append(gruss_property(trials=trials, seed=seed))
    return reports
