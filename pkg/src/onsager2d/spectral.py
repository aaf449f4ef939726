"""Cosine-series fields on the circle and the Gibbs measures they induce.

Elements of the solution space are even, pi-periodic, zero-mean functions
``V(theta) = sum_{m=1}^M v_m cos(2 m theta)``. Grid functions live on the
uniform grid ``theta_j = 2 pi j / N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    pass


class SymmetryError(ValueError):
    pass


def default_grid(M: int) -> int:
    return max(256, 8 * M)


def h1_weights(M: int) -> np.ndarray:
    """Squared H^1 norms of cos(2 m theta), m = 1..M: (1 + 4 m^2) pi."""
    m = np.arange(1, M + 1, dtype=float)
    return (1.0 + 4.0 * m**2) * np.pi


def basis_scale(M: int) -> np.ndarray:
    """sqrt((4 m^2 + 1) pi); the orthonormal basis is cos(2 m theta) / basis_scale."""
    return np.sqrt(h1_weights(M))


def grid(N: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(N) / N


@dataclass(frozen=True)
class SpectralField:
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.v, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("field coefficients must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def M(self) -> int:
        return self.v.size

    @classmethod
    def zeros(cls, M: int) -> "SpectralField":
        return cls(np.zeros(M))

    @classmethod
    def mode(cls, m: int, amplitude: float, M: int) -> "SpectralField":
        v = np.zeros(M)
        v[m - 1] = amplitude
        return cls(v)

    def padded(self, M: int) -> "SpectralField":
        out = np.zeros(M)
        n = min(M, self.M)
        out[:n] = self.v[:n]
        return SpectralField(out)

    def __add__(self, other):
        M = max(self.M, other.M)
        return SpectralField(self.padded(M).v + other.padded(M).v)

    def __sub__(self, other):
        M = max(self.M, other.M)
        return SpectralField(self.padded(M).v - other.padded(M).v)

    def __mul__(self, c: float):
        return SpectralField(c * self.v)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(-self.v)

    def __eq__(self, other):
        if not isinstance(other, SpectralField):
            return NotImplemented
        return np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash(self.v.tobytes())

    def h1_norm(self) -> float:
        return float(np.sqrt(h1_inner(self, self)))

    def amplitude(self, m: int) -> float:
        """H^1 projection onto the orthonormal basis function of mode m."""
        if m > self.M:
            return 0.0
        return float(self.v[m - 1] * np.sqrt((4.0 * m * m + 1.0) * np.pi))

    def shifted(self, m: int = 1) -> "SpectralField":
        """The field rotated by pi/(2m): v_{jm} -> (-1)^j v_{jm}.

        For m = 1 this is the quarter turn theta -> theta + pi/2 and maps
        any element of H to another one. For m > 1 it is only defined on
        fields whose modes are all multiples of m.
        """
        idx = np.arange(1, self.M + 1)
        if m > 1 and np.any(self.v[idx % m != 0] != 0.0):
            raise SymmetryError(f"field has modes that are not multiples of {m}")
        sign = np.where((idx // m) % 2 == 1, -1.0, 1.0)
        return SpectralField(sign * self.v)


@dataclass(frozen=True)
class GridFunction:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.array(self.values, dtype=float).ravel()
        if g.size % 2 or g.size == 0:
            raise GridError(f"grid size must be even and positive, got {g.size}")
        if not np.all(np.isfinite(g)):
            raise GridError("grid values must be finite")
        g.setflags(write=False)
        object.__setattr__(self, "values", g)

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return grid(self.N)


def _cos_table(N: int, M: int) -> np.ndarray:
    # columns cos(2 m theta_j), m = 1..M; index 2mj mod N keeps the angles exact
    j = np.arange(N)[:, None]
    m = np.arange(1, M + 1)[None, :]
    return np.cos(2.0 * np.pi * ((2 * m * j) % N) / N)


def synthesize(f: SpectralField, N: int) -> GridFunction:
    if N < 4 * f.M:
        raise GridError(f"grid N={N} below the 4M={4 * f.M} floor")
    if f.M == 0:
        return GridFunction(np.zeros(N))
    return GridFunction(_cos_table(N, f.M) @ f.v)


def analyze(g: GridFunction, M: int, tol: float = 1e-10) -> SpectralField:
    """Cosine coefficients of a grid function, m = 1..M.

    Needs ``N > 4M`` so the top mode stays below Nyquist. Raises
    :class:`SymmetryError` if the part not representable in the space
    (mean, sine content, higher frequencies) exceeds ``tol`` in sup norm.
    """
    N = g.N
    if N <= 4 * M:
        raise GridError(f"grid N={N} must exceed 4M={4 * M}")
    C = _cos_table(N, M)
    v = (2.0 / N) * (g.values @ C)
    residual = float(np.max(np.abs(g.values - C @ v))) if N else 0.0
    if residual > tol:
        raise SymmetryError(f"discarded content {residual:.3e} exceeds tol {tol:.1e}")
    return SpectralField(v)


def h1_inner(u: SpectralField, v: SpectralField) -> float:
    M = max(u.M, v.M)
    return float(np.sum(h1_weights(M) * u.padded(M).v * v.padded(M).v))


def h1_norm_coeffs(v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(np.sum(h1_weights(v.size) * v * v)))


@dataclass(frozen=True)
class GibbsMeasure:
    """Probability weights proportional to exp(-V) on the grid, plus moments.

    ``moments[k]`` is the integral of cos(2 k theta) against the measure,
    k = 0..2M.
    """

    source: SpectralField
    weights: np.ndarray = field(repr=False)
    moments: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.weights.size

    def sin_moments(self, K: int) -> np.ndarray:
        th = grid(self.N)
        k = np.arange(1, K + 1)
        return np.sin(2.0 * np.outer(th, k)).T @ self.weights


def gibbs_weights(values: np.ndarray) -> np.ndarray:
    x = -np.asarray(values, dtype=float)
    # shift by the max exponent; the quotient is unchanged
    x = x - x.max()
    w = np.exp(x)
    return w / w.sum()


def gibbs_measure(V: SpectralField, N: int | None = None, n_moments: int | None = None) -> GibbsMeasure:
    M = V.M
    N = default_grid(M) if N is None else N
    K = 2 * M if n_moments is None else n_moments
    if N < 4 * M or N < 4 * K:
        raise GridError(f"grid N={N} too small for M={M} modes and {K} moments (need N >= 4*max(M, K))")
    w = gibbs_weights(synthesize(V, N).values)
    # moments M_k = sum_j w_j cos(2 k theta_j) = Re FFT(w)[2k]
    spec = np.fft.rfft(w)
    mom = spec.real[0: 2 * K + 1: 2].copy()
    mom[0] = 1.0
    w.setflags(write=False)
    mom.setflags(write=False)
    return GibbsMeasure(V, w, mom)
