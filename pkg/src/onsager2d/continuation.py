"""Bifurcation detection, branch switching and pseudo-arclength continuation.

Branch amplitudes are measured as the H^1 projection ``t = <V, phi_m>`` onto
the orthonormal basis function ``phi_m = cos(2 m theta) / sqrt((4 m^2 + 1) pi)``
of the birth mode, so the raw cosine coefficient is ``v_m = c_m t`` with
``c_m = 1 / sqrt((4 m^2 + 1) pi)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .analysis import spectrum
from .gamma_map import gamma_and_jacobian, jacobian
from .kernel import Criticality, KernelSpec, bifurcation_points
from .spectral import SpectralField, basis_scale, default_grid, h1_weights

log = logging.getLogger(__name__)


class ContinuationError(RuntimeError):
    pass


def orthonormal_scale(m: int) -> float:
    """c_m = 1 / sqrt((4 m^2 + 1) pi)."""
    return 1.0 / np.sqrt((4.0 * m * m + 1.0) * np.pi)


# --- trivial branch -------------------------------------------------------

def trivial_diagonal(k: KernelSpec, M: int, N: int | None = None) -> np.ndarray:
    """Diagonal of J(0); raises if the assembled matrix is not diagonal."""
    J = jacobian(SpectralField.zeros(M), k, M, N).J
    off = J - np.diag(np.diag(J))
    if np.max(np.abs(off), initial=0.0) > 1e-12:
        raise ContinuationError("Jacobian at the trivial solution is not diagonal")
    return np.diag(J).copy()


def trivial_spectrum_sweep(k: KernelSpec, lambda_range: tuple[float, float], samples: int = 200,
                           M: int = 64, N: int | None = None, xtol: float = 1e-14) -> list[float]:
    """Zeros of the eigenvalues 1 - lambda J(0)_mm inside the range.

    Sign changes are bracketed on a uniform lambda grid, then refined by
    Brent's method. A zero landing exactly on a sample is kept as is.
    """
    lo, hi = lambda_range
    if not 0 <= lo < hi:
        raise ValueError("lambda range must be positive and increasing")
    d = trivial_diagonal(k, M, N)
    lams = np.linspace(lo, hi, max(int(samples), 2))
    found = []
    for dm in d:
        vals = 1.0 - lams * dm
        for i in range(lams.size - 1):
            a, b = vals[i], vals[i + 1]
            if a == 0.0 and lams[i] > lo:
                found.append(float(lams[i]))
            elif a * b < 0:
                found.append(brentq(lambda x: 1.0 - x * dm, lams[i], lams[i + 1],
                                    xtol=xtol, rtol=4 * np.finfo(float).eps))
        if vals[-1] == 0.0:
            found.append(float(lams[-1]))
    return sorted(found)


def negative_count(lam: float, k: KernelSpec, M: int, N: int | None = None) -> int:
    """Number of negative eigenvalues of I - lam J(0)."""
    return spectrum(SpectralField.zeros(M), lam, k, N, tol=0.0).n_negative


def localize_count_change(k: KernelSpec, a: float, b: float, M: int, N: int | None = None,
                          tol: float = 1e-11) -> float:
    """Bisection on the negative-eigenvalue count of the trivial solution."""
    na = negative_count(a, k, M, N)
    nb = negative_count(b, k, M, N)
    if na == nb:
        raise ValueError("no change of the unstable count inside the bracket")
    while b - a > tol:
        c = 0.5 * (a + b)
        if negative_count(c, k, M, N) == na:
            a = c
        else:
            b = c
    return 0.5 * (a + b)


# --- local asymptotics ----------------------------------------------------

@dataclass(frozen=True)
class AsymptoticPrediction:
    m: int
    lambda_m: float
    gamma: float
    C: float
    z2: float
    criticality: Criticality


def asymptotic_predictor(k: KernelSpec, m: int) -> AsymptoticPrediction:
    """Leading-order shape of the branch born at lambda_m.

    ``lambda - lambda_m ~ C t^2`` with
    ``C = lambda_m (c_m^2 / 8) (2 g - 1) / (g - 1)``, ``g = k_2m / k_m``, and the
    second harmonic carries ``t^2 z2`` in orthonormal units with
    ``z2 = g / (g - 1) * c_m^2 / (4 c_2m)``.
    """
    km = k.k(m)
    if not km < 0:
        raise ValueError(f"mode {m} has k_m = {km}; no bifurcation at positive lambda")
    lam_m = -2.0 / km
    g = k.k(2 * m) / km
    cm = orthonormal_scale(m)
    c2m = orthonormal_scale(2 * m)
    if g == 1.0 or 2.0 * g == 1.0:
        crit = Criticality.DEGENERATE
        C = 0.0 if 2.0 * g == 1.0 else float("inf")
        z2 = float("inf") if g == 1.0 else g / (g - 1.0) * cm**2 / (4.0 * c2m)
        return AsymptoticPrediction(m, lam_m, g, C, z2, crit)
    C = lam_m * cm**2 / 8.0 * (2.0 * g - 1.0) / (g - 1.0)
    z2 = g / (g - 1.0) * cm**2 / (4.0 * c2m)
    crit = Criticality.SUPERCRITICAL if C > 0 else Criticality.SUBCRITICAL
    return AsymptoticPrediction(m, lam_m, float(g), float(C), float(z2), crit)


# --- branches -------------------------------------------------------------

@dataclass
class BranchPoint:
    lam: float
    field: SpectralField
    t: float
    min_eig: float
    stable: bool
    residual_h1: float = 0.0


@dataclass
class Branch:
    id: str
    mode: int | None
    sign: int
    points: list[BranchPoint] = field(default_factory=list)
    termination: str = ""
    halvings: int = 0

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.t for p in self.points])


def _weights(M: int) -> np.ndarray:
    return np.concatenate([h1_weights(M), [1.0]])


def _bordered_newton(v, lam, k, N, border_row, border_rhs, tol, max_iter):
    """Newton on [F(v, lam); border(v, lam)] = 0.

    ``border_row`` is the gradient of the scalar constraint (length M + 1),
    ``border_rhs(v, lam)`` its value. Returns (v, lam, residual, converged).
    """
    M = v.size
    I = np.eye(M)
    res = float("inf")
    for _ in range(max_iter):
        G, Jm = gamma_and_jacobian(SpectralField(v), k, N)
        F = v - lam * G.v
        c = border_rhs(v, lam)
        res = float(np.sqrt(np.sum(h1_weights(M) * F * F)))
        if res <= tol and abs(c) <= tol:
            return v, lam, res, True
        A = np.empty((M + 1, M + 1))
        A[:M, :M] = I - lam * Jm.J
        A[:M, M] = -G.v
        A[M, :] = border_row
        rhs = -np.concatenate([F, [c]])
        try:
            dx = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            return v, lam, res, False
        if not np.all(np.isfinite(dx)):
            return v, lam, res, False
        v = v + dx[:M]
        lam = lam + dx[M]
    G, _ = gamma_and_jacobian(SpectralField(v), k, N)
    F = v - lam * G.v
    res = float(np.sqrt(np.sum(h1_weights(M) * F * F)))
    return v, lam, res, res <= tol and abs(border_rhs(v, lam)) <= tol


def _make_point(v, lam, m, k, N, res) -> BranchPoint:
    V = SpectralField(v)
    rep = spectrum(V, lam, k, N)
    t = V.amplitude(m) if m else 0.0
    return BranchPoint(float(lam), V, float(t), rep.min_eig, rep.stable, float(res))


def pinned_solve(m: int, k: KernelSpec, t: float, M: int, N: int | None = None,
                 guess: tuple[np.ndarray, float] | None = None, tol: float = 1e-10,
                 max_iter: int = 30) -> BranchPoint:
    """Solve for (V, lambda) with the birth-mode amplitude pinned to ``t``."""
    N = default_grid(M) if N is None else N
    scale = basis_scale(M)[m - 1]
    if guess is None:
        pred = asymptotic_predictor(k, m)
        v = np.zeros(M)
        v[m - 1] = t / scale
        if 2 * m <= M and np.isfinite(pred.z2):
            v[2 * m - 1] = t * t * pred.z2 * orthonormal_scale(2 * m)
        lam = pred.lambda_m + (pred.C * t * t if np.isfinite(pred.C) else 0.0)
    else:
        v, lam = np.array(guess[0], dtype=float), float(guess[1])
    row = np.zeros(M + 1)
    row[m - 1] = scale
    v, lam, res, ok = _bordered_newton(v, lam, k, N, row,
                                       lambda v, lam: v[m - 1] * scale - t, tol, max_iter)
    if not ok:
        raise ContinuationError(
            f"pinned corrector failed for mode {m} at t={t:g} (residual {res:.3e}, lambda {lam:.6g})")
    return _make_point(v, lam, m, k, N, res)


def switch_branch(m: int, k: KernelSpec, t0: float = 0.02, sign: int = 1, M: int = 32,
                  N: int | None = None, tol: float = 1e-10) -> BranchPoint:
    """First point on the branch born at lambda_m, amplitude ``sign * t0``."""
    if not 0 < t0 <= 0.1:
        raise ValueError("t0 must lie in (0, 0.1]")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if m > M:
        raise ValueError(f"mode {m} not resolved with M={M}")
    return pinned_solve(m, k, sign * t0, M, N, tol=tol)


def pinned_branch(m: int, k: KernelSpec, ts, M: int = 32, N: int | None = None,
                  tol: float = 1e-10) -> list[BranchPoint]:
    """Branch points at prescribed amplitudes, warm-started in order of |t|."""
    ts = np.asarray(ts, dtype=float)
    order = np.argsort(np.abs(ts), kind="stable")
    out: list[BranchPoint | None] = [None] * ts.size
    prev = {1: None, -1: None}
    for i in order:
        s = 1 if ts[i] >= 0 else -1
        p = pinned_solve(m, k, float(ts[i]), M, N, guess=prev[s], tol=tol)
        prev[s] = (p.field.v, p.lam)
        out[i] = p
    return out


def _tangent(v, lam, k, N, m, sign) -> np.ndarray:
    """Null vector of [F_v, F_lam] in weighted coordinates, oriented outward in t."""
    M = v.size
    G, Jm = gamma_and_jacobian(SpectralField(v), k, N)
    A = np.empty((M, M + 1))
    A[:, :M] = np.eye(M) - lam * Jm.J
    A[:, M] = -G.v
    # work in weighted coordinates y = sqrt(W) x so the null vector is unit in the arclength metric
    sw = np.sqrt(_weights(M))
    _, _, vt = np.linalg.svd(A / sw[None, :])
    tau = vt[-1] / sw
    if m and sign * tau[m - 1] < 0:
        tau = -tau
    return tau / np.sqrt(np.sum(_weights(M) * tau * tau))


def continue_branch(start: BranchPoint, k: KernelSpec, m: int | None, ds: float = 0.05,
                    lambda_max: float = 10.0, max_steps: int = 2000, N: int | None = None,
                    tol: float = 1e-10, lambda_min: float = 0.0, branch_id: str = "",
                    sign: int | None = None, max_iter: int = 12) -> Branch:
    """Pseudo-arclength continuation from a converged branch point.

    Arclength is measured in the H^1 norm of V plus |d lambda|. The first
    tangent is the kernel of the extended Jacobian, oriented so the birth
    amplitude grows; later tangents are secants. Failed corrector steps halve
    ``ds`` down to ``ds / 64``.
    """
    if ds <= 0:
        raise ValueError("ds must be positive")
    v = start.field.v.copy()
    M = v.size
    N = default_grid(M) if N is None else N
    lam = start.lam
    sign = sign if sign is not None else (1 if start.t >= 0 else -1)
    W = _weights(M)
    G, _ = gamma_and_jacobian(SpectralField(v), k, N)
    r0 = float(np.sqrt(np.sum(h1_weights(M) * (v - lam * G.v) ** 2)))
    if r0 > tol:
        raise ContinuationError(f"start point is not converged (residual {r0:.3e})")
    branch = Branch(branch_id or f"mode{m}{'+' if sign > 0 else '-'}", m, sign, [start])
    tau = _tangent(v, lam, k, N, m, sign)
    h = ds
    h_min = ds / 64.0
    reason = "max_steps"
    for _ in range(max_steps):
        x0 = np.concatenate([v, [lam]])
        while True:
            xp = x0 + h * tau
            row = W * tau

            def arc(vv, ll, xp=xp, row=row):
                return float(row @ (np.concatenate([vv, [ll]]) - xp))

            vn, ln, res, ok = _bordered_newton(xp[:M].copy(), xp[M], k, N, row, arc, tol, max_iter)
            if ok:
                break
            h *= 0.5
            branch.halvings += 1
            if h < h_min:
                break
        if not ok:
            reason = "corrector_failure"
            break
        x1 = np.concatenate([vn, [ln]])
        sec = x1 - x0
        tau = sec / np.sqrt(np.sum(W * sec * sec))
        v, lam = vn, ln
        branch.points.append(_make_point(v, lam, m, k, N, res))
        h = min(2.0 * h, ds)
        if lam > lambda_max:
            reason = "lambda_max"
            break
        if lam < lambda_min:
            reason = "lambda_min"
            break
    branch.termination = reason
    return branch


def trivial_branch(k: KernelSpec, lambdas, M: int, N: int | None = None) -> Branch:
    b = Branch("trivial", None, 0)
    zero = SpectralField.zeros(M)
    for lam in lambdas:
        rep = spectrum(zero, float(lam), k, N)
        b.points.append(BranchPoint(float(lam), zero, 0.0, rep.min_eig, rep.stable, 0.0))
    b.termination = "range"
    return b


def trace_diagram(k: KernelSpec, lambda_max: float, n_branches: int = 1, M: int = 32,
                  N: int | None = None, ds: float = 0.05, t0: float = 0.02,
                  tol: float = 1e-10, max_steps: int = 2000, trivial_samples: int = 401,
                  onset_window: float = 0.1) -> list[Branch]:
    """Trivial branch plus both signs of the first ``n_branches`` bifurcating branches.

    A branch born beyond ``lambda_max`` is still traced over
    ``[lambda_m, (1 + onset_window) lambda_m]`` so its onset stability is recorded.
    """
    pts = [(m, lm) for m, lm in bifurcation_points(k) if m <= M][:n_branches]
    top = max([lambda_max] + [lm for _, lm in pts])
    branches = [trivial_branch(k, np.linspace(0.0, lambda_max, trivial_samples), M, N)]
    for m, lm in pts:
        stop = lambda_max if lm < lambda_max else (1.0 + onset_window) * lm
        for s in (1, -1):
            start = switch_branch(m, k, t0, s, M, N, tol)
            b = continue_branch(start, k, m, ds=ds, lambda_max=stop, max_steps=max_steps,
                                N=N, tol=tol, sign=s,
                                branch_id=f"mode{m}{'+' if s > 0 else '-'}")
            branches.append(b)
    log.debug("diagram traced up to lambda %.6g", top)
    return branches
