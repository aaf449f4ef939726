"""Interaction kernels in Fourier form and their closed-form predictions.

A kernel is stored as ``K(theta) = mean + sum_m coeffs[m-1] * cos(2 m theta)``.
Only the zero-mean part enters the fixed-point map; ``mean`` is kept for
free-energy reporting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class KernelError(ValueError):
    pass


class Criticality(str, Enum):
    SUPERCRITICAL = "supercritical"
    SUBCRITICAL = "subcritical"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class KernelSpec:
    mean: float
    coeffs: np.ndarray = field(repr=False)
    label: str = "custom"

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size < 1:
            raise KernelError("kernel needs at least one Fourier coefficient")
        if not np.all(np.isfinite(c)) or not np.isfinite(self.mean):
            raise KernelError("kernel coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "mean", float(self.mean))

    @property
    def P(self) -> int:
        return self.coeffs.size

    def k(self, m: int) -> float:
        """Coefficient k_m, zero outside the stored range."""
        if 1 <= m <= self.P:
            return float(self.coeffs[m - 1])
        return 0.0

    def truncated(self, M: int) -> np.ndarray:
        """k_1..k_M, zero padded or cut to length M."""
        out = np.zeros(M)
        n = min(M, self.P)
        out[:n] = self.coeffs[:n]
        return out

    def evaluate(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        m = np.arange(1, self.P + 1)
        return self.mean + np.cos(2.0 * np.multiply.outer(theta, m)) @ self.coeffs

    def tail_bound(self) -> float:
        """Upper bound on sum_{m>P} |k_m| where known in closed form, else 0."""
        if self.label.startswith("onsager"):
            return 2.0 / (np.pi * (2 * self.P + 1))
        return 0.0

    def __eq__(self, other):
        if not isinstance(other, KernelSpec):
            return NotImplemented
        return (self.mean == other.mean and self.label == other.label
                and np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.mean, self.label, self.coeffs.tobytes()))


def onsager_coefficients(P: int) -> KernelSpec:
    """Onsager kernel ``|sin theta|`` truncated to P modes."""
    if int(P) != P or P < 1:
        raise KernelError(f"truncation order must be a positive integer, got {P!r}")
    m = np.arange(1, int(P) + 1, dtype=float)
    coeffs = -4.0 / (np.pi * (4.0 * m**2 - 1.0))
    return KernelSpec(2.0 / np.pi, coeffs, label=f"onsager-P{int(P)}")


def maier_saupe() -> KernelSpec:
    # cos^2 theta - 1/3 = 1/6 + cos(2 theta)/2
    return KernelSpec(1.0 / 6.0, [0.5], label="maier-saupe")


def from_coefficients(mean: float, coeffs, label: str = "custom") -> KernelSpec:
    return KernelSpec(mean, coeffs, label=label)


def from_samples(values, tol: float = 1e-10, label: str = "sampled") -> KernelSpec:
    """Project kernel samples on ``theta_j = 2 pi j / N`` onto cos(2 m theta).

    Keeps m = 1..N/4. Raises :class:`KernelError` when the samples carry more
    than ``tol`` (sup norm) of content that is not even and pi-periodic.
    """
    g = np.asarray(values, dtype=float).ravel()
    N = g.size
    if N < 4 or N % 2:
        raise KernelError(f"need an even number of samples >= 4, got {N}")
    if not np.all(np.isfinite(g)):
        raise KernelError("kernel samples must be finite")
    P = N // 4
    theta = 2.0 * np.pi * np.arange(N) / N
    m = np.arange(1, P + 1)
    C = np.cos(2.0 * np.outer(theta, m))
    coeffs = (2.0 / N) * (g @ C)
    if 2 * P == N // 2:
        # Nyquist column: cos(N theta_j / 2) = (-1)^j carries half weight
        coeffs[-1] *= 0.5
    mean = float(g.mean())
    residual = float(np.max(np.abs(g - mean - C @ coeffs)))
    if residual > tol:
        raise KernelError(
            f"samples are not an even pi-periodic kernel: discarded content {residual:.3e} > tol {tol:.1e}"
        )
    return KernelSpec(mean, coeffs, label=label)


def lambda_zero(k: KernelSpec) -> float:
    """Uniqueness threshold 1 / sum |k_m| over the stored coefficients.

    For a truncated kernel the true threshold lies in
    ``[1/(S + tail), 1/S]`` with ``tail = k.tail_bound()``.
    """
    s = float(np.sum(np.abs(k.coeffs)))
    if s == 0.0:
        raise KernelError("all coefficients vanish; uniqueness threshold undefined")
    return 1.0 / s


def bifurcation_points(k: KernelSpec) -> list[tuple[int, float]]:
    """Pairs (m, -2/k_m) for every attractive mode, ascending in lambda."""
    pts = [(m, -2.0 / km) for m, km in enumerate(k.coeffs, start=1) if km < 0]
    return sorted(pts, key=lambda p: (p[1], p[0]))


def gamma_ratio(k: KernelSpec, m: int) -> float:
    km = k.k(m)
    if km == 0.0:
        raise KernelError(f"mode {m} has zero coefficient")
    return k.k(2 * m) / km


def classify_criticality(k: KernelSpec, m: int) -> Criticality:
    """Pitchfork direction at lambda_m from the sign of (2g - 1)/(g - 1), g = k_2m/k_m."""
    g = gamma_ratio(k, m)
    if 2.0 * g == 1.0 or g == 1.0:
        return Criticality.DEGENERATE
    return Criticality.SUPERCRITICAL if (2.0 * g - 1.0) / (g - 1.0) > 0 else Criticality.SUBCRITICAL
