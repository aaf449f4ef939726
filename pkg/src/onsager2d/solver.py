"""Fixed-point solves of V = lambda Gamma(V) at fixed lambda."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .gamma_map import gamma, gamma_and_jacobian
from .kernel import KernelSpec
from .spectral import SpectralField, basis_scale, h1_norm_coeffs

log = logging.getLogger(__name__)

SINGULAR_RCOND = 1e-13


@dataclass
class SolveReport:
    solution: SpectralField
    converged: bool
    iterations: int
    residual_h1: float
    method: str
    message: str = ""
    condition: float = float("nan")


def _residual_h1(v: np.ndarray, lam: float, k: KernelSpec, N) -> float:
    V = SpectralField(v)
    return h1_norm_coeffs(v - lam * gamma(V, k, N).v) if lam else h1_norm_coeffs(v)


def picard(V0: SpectralField, lam: float, k: KernelSpec, tol: float = 1e-10,
           max_iter: int = 500, N: int | None = None) -> SolveReport:
    """Iterate V <- lambda Gamma(V) until successive iterates differ by <= tol in H^1."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = V0.v.copy()
    for it in range(1, max_iter + 1):
        new = lam * gamma(SpectralField(v), k, N).v
        step = h1_norm_coeffs(new - v)
        v = new
        if step <= tol:
            res = _residual_h1(v, lam, k, N)
            return SolveReport(SpectralField(v), res <= tol, it, res, "picard")
    res = _residual_h1(v, lam, k, N)
    return SolveReport(SpectralField(v), False, max_iter, res, "picard",
                       message="max_iter reached")


def newton(V0: SpectralField, lam: float, k: KernelSpec, tol: float = 1e-10,
           max_iter: int = 50, N: int | None = None) -> SolveReport:
    """Newton's method on F(V) = V - lambda Gamma(V).

    The linear system (I - lambda J) delta = -F is checked for singularity at
    every iterate, including the initial guess, so a start sitting exactly on
    a bifurcation point reports a step failure rather than convergence.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = V0.v.copy()
    M = v.size
    # scale rows/columns to the orthonormal basis so conditioning is measured in H^1
    c = basis_scale(M)
    I = np.eye(M)
    res = float("inf")
    for it in range(max_iter + 1):
        G, Jm = gamma_and_jacobian(SpectralField(v), k, N)
        F = v - lam * G.v
        res = h1_norm_coeffs(F)
        L = I - lam * Jm.J
        Ls = L * c[:, None] / c[None, :]
        sv = np.linalg.svd(Ls, compute_uv=False)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
        if sv[-1] <= SINGULAR_RCOND * sv[0]:
            return SolveReport(SpectralField(v), False, it, res, "newton",
                               message=f"singular linear system (condition {cond:.3e})",
                               condition=cond)
        if res <= tol:
            return SolveReport(SpectralField(v), True, it, res, "newton", condition=cond)
        if it == max_iter:
            break
        v = v + np.linalg.solve(L, -F)
        if not np.all(np.isfinite(v)):
            return SolveReport(SpectralField(np.nan_to_num(v)), False, it + 1, float("inf"),
                               "newton", message="iterate diverged", condition=cond)
    return SolveReport(SpectralField(v), False, max_iter, res, "newton",
                       message="max_iter reached")


def hybrid(V0: SpectralField, lam: float, k: KernelSpec, tol: float = 1e-10,
           switch_tol: float = 1e-3, picard_iter: int = 200, newton_iter: int = 50,
           N: int | None = None) -> SolveReport:
    """Picard down to ``switch_tol``, then Newton to ``tol``."""
    p = picard(V0, lam, k, tol=switch_tol, max_iter=picard_iter, N=N)
    n = newton(p.solution, lam, k, tol=tol, max_iter=newton_iter, N=N)
    n.iterations += p.iterations
    n.method = "picard+newton"
    return n


def random_start(M: int, radius: float, rng: np.random.Generator) -> SpectralField:
    """Start drawn with an m^-2 envelope, rescaled to uniform H^1 radius in [0, radius]."""
    m = np.arange(1, M + 1, dtype=float)
    v = rng.uniform(-1.0, 1.0, M) / m**2
    nrm = h1_norm_coeffs(v)
    r = radius * rng.uniform()
    return SpectralField(v * (r / nrm) if nrm > 0 else v)


@dataclass
class Cluster:
    representative: SpectralField
    hits: int
    residual_h1: float
    starts: list[int] = field(default_factory=list)


@dataclass
class SolutionSet:
    lam: float
    clusters: list[Cluster]
    radius: float
    n_starts: int
    failures: int
    residuals: list[float] = field(default_factory=list)

    def summary(self) -> str:
        lines = [f"lambda={self.lam!r} starts={self.n_starts} failures={self.failures} clusters={len(self.clusters)}"]
        for i, c in enumerate(self.clusters):
            lines.append(f"{i} hits={c.hits} h1={c.representative.h1_norm():.17g} v1={float(c.representative.v[0]):.17g}")
        return "\n".join(lines)


def multistart(lam: float, k: KernelSpec, n_starts: int = 50, radius: float = 5.0,
               seed: int = 0, M: int = 16, N: int | None = None, tol: float = 1e-10,
               cluster_radius: float = 1e-6, starts: list[SpectralField] | None = None,
               picard_iter: int = 25) -> SolutionSet:
    """Solve from many deterministic random starts and cluster the results in H^1.

    ``starts`` overrides the random draws (used to force specific initial guesses).
    The Picard phase is capped at ``picard_iter`` sweeps: Picard is repelled by
    solutions that are unstable for the iteration (the trivial one past the
    first bifurcation), so a long warm-up would hide them from Newton.
    """
    if n_starts < 1 and starts is None:
        raise ValueError("n_starts must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if starts is None:
        rng = np.random.default_rng(seed)
        starts = [random_start(M, radius, rng) for _ in range(n_starts)]
    clusters: list[Cluster] = []
    failures = 0
    residuals = []
    for i, V0 in enumerate(starts):
        rep = hybrid(V0, lam, k, tol=tol, picard_iter=picard_iter, N=N)
        if not rep.converged:
            # a start on a singular point still has a chance under plain Picard
            alt = picard(V0, lam, k, tol=tol, max_iter=2000, N=N)
            rep = alt if alt.converged else rep
        if not rep.converged:
            failures += 1
            log.debug("start %d failed: %s", i, rep.message)
            continue
        residuals.append(rep.residual_h1)
        for c in clusters:
            if (rep.solution - c.representative).h1_norm() <= cluster_radius:
                c.hits += 1
                c.starts.append(i)
                break
        else:
            clusters.append(Cluster(rep.solution, 1, rep.residual_h1, [i]))
    clusters.sort(key=lambda c: (c.representative.h1_norm() > cluster_radius,
                                 float(c.representative.v[0]) if c.representative.M else 0.0))
    return SolutionSet(lam, clusters, cluster_radius, len(starts), failures, residuals)
