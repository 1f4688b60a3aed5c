"""
Samplers for tridiagonal / bidiagonal beta-ensembles and for the
perturbation scale ``l``.

Every sampler draws from an :class:`RngStream`, a ``(seed, stream)`` pair that
maps deterministically onto a numpy ``Generator``; trial ``k`` of a run uses
stream index ``k``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError
from .jacobi import JacobiMatrix

__all__ = [
    "GAUSSIAN",
    "LAGUERRE",
    "CHIRAL",
    "EnsembleSpec",
    "BidiagonalFactor",
    "ScaleLaw",
    "RngStream",
    "chi_sample",
    "chi_samples",
    "sample_gauss_beta",
    "sample_laguerre_beta",
    "bidiag_to_jacobi",
    "sample_jacobi",
    "sample_scale",
]

GAUSSIAN = "gauss"
LAGUERRE = "laguerre"
CHIRAL = "chiral"
_KINDS = (GAUSSIAN, LAGUERRE, CHIRAL)

CDF_GRID_POINTS = 4096


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble, at which beta and size.

    ``m`` is required for the Laguerre and chiral kinds. For those,
    ``a = |m - n| + 1 - 2/beta``; the *hard* regime is ``m <= n - 1``.
    """

    kind: str
    beta: float
    n: int
    m: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown ensemble kind {self.kind!r}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError("beta must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if self.kind == GAUSSIAN:
            if self.m is not None:
                raise DomainError("Gaussian ensemble takes no m")
        elif self.m is None or int(self.m) != self.m or self.m < 1:
            raise DomainError(f"{self.kind} ensemble needs a positive integer m")

    @property
    def a(self) -> float:
        if self.m is None:
            raise DomainError("parameter a is defined for Laguerre/chiral ensembles only")
        return abs(self.m - self.n) + 1 - 2 / self.beta

    @property
    def hard(self) -> bool:
        return self.m is not None and self.m <= self.n - 1

    @property
    def matrix_size(self) -> int:
        """Order of the tridiagonal model: ``n`` or ``min(n, m + 1)``."""
        if self.kind == GAUSSIAN:
            return self.n
        return min(self.n, self.m + 1)

    def laguerre(self) -> "EnsembleSpec":
        """The Laguerre ensemble underlying a chiral spec (identity otherwise)."""
        if self.kind == CHIRAL:
            return EnsembleSpec(LAGUERRE, self.beta, self.n, self.m)
        return self

    def describe(self) -> str:
        tail = "" if self.m is None else f", m={self.m}"
        return f"{self.kind}(beta={self.beta:g}, n={self.n}{tail})"


@dataclass(frozen=True)
class BidiagonalFactor:
    """Upper bidiagonal ``B`` with diagonal ``x`` and superdiagonal ``y``.

    Regime ``m >= n``: ``len(x) == n``, ``len(y) == n - 1``.
    Regime ``m <= n - 1``: ``len(x) == len(y) == m`` and ``B`` is
    ``(m+1) x (m+1)`` with a zero last row.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=float).reshape(-1)
        if len(x) < 1 or len(y) not in (len(x) - 1, len(x)):
            raise DomainError("bidiagonal factor has inconsistent lengths")
        if np.any(x < 0) or np.any(y < 0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("bidiagonal entries must be finite and nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def hard(self) -> bool:
        return len(self.y) == len(self.x)

    def dense(self) -> np.ndarray:
        k = len(self.x) + (1 if self.hard else 0)
        B = np.zeros((k, k))
        B[np.arange(len(self.x)), np.arange(len(self.x))] = self.x
        B[np.arange(len(self.y)), np.arange(1, len(self.y) + 1)] = self.y
        return B


@dataclass(frozen=True)
class _ExponentialPdf:
    rate: float

    def __call__(self, l: float) -> float:
        return self.rate * math.exp(-self.rate * l)


@dataclass(frozen=True)
class _UniformPdf:
    lo: float
    hi: float

    def __call__(self, l: float) -> float:
        return 1.0 / (self.hi - self.lo) if self.lo <= l <= self.hi else 0.0


@dataclass(frozen=True)
class _HalfNormalPdf:
    sigma: float

    def __call__(self, l: float) -> float:
        return math.sqrt(2.0 / math.pi) / self.sigma * math.exp(-0.5 * (l / self.sigma) ** 2)


@dataclass(frozen=True)
class ScaleLaw:
    """Distribution of the perturbation scale ``l``.

    Either a point mass (``point``) or an absolutely continuous law with
    density ``pdf`` on ``support``. ``name`` is a display label.
    """

    point: Optional[float] = None
    pdf: Optional[Callable[[float], float]] = None
    support: tuple = (0.0, math.inf)
    name: str = ""
    _table: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if (self.point is None) == (self.pdf is None):
            raise ConfigurationError("ScaleLaw needs exactly one of point or pdf")
        if self.point is not None:
            if not (self.point > 0 and math.isfinite(self.point)):
                raise ConfigurationError("point mass must sit at a positive finite l")
            object.__setattr__(self, "support", (float(self.point), float(self.point)))
            return
        lo, hi = self.support
        if not (0.0 <= lo < hi):
            raise ConfigurationError(f"bad support {self.support!r}")

    @classmethod
    def point_mass(cls, l0: float) -> "ScaleLaw":
        return cls(point=float(l0), name=f"point({l0:g})")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "ScaleLaw":
        if rate <= 0:
            raise ConfigurationError("rate must be positive")
        return cls(pdf=_ExponentialPdf(float(rate)), support=(0.0, math.inf), name=f"exp({rate:g})")

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "ScaleLaw":
        if not (0 <= lo < hi):
            raise ConfigurationError("uniform law needs 0 <= lo < hi")
        return cls(pdf=_UniformPdf(float(lo), float(hi)), support=(float(lo), float(hi)),
                   name=f"uniform({lo:g},{hi:g})")

    @classmethod
    def halfnormal(cls, sigma: float = 1.0) -> "ScaleLaw":
        if sigma <= 0:
            raise ConfigurationError("sigma must be positive")
        return cls(pdf=_HalfNormalPdf(float(sigma)), support=(0.0, math.inf),
                   name=f"halfnormal({sigma:g})")

    @property
    def is_point(self) -> bool:
        return self.point is not None

    def in_support(self, l: float, rtol: float = 1e-8) -> bool:
        if self.is_point:
            return abs(l - self.point) <= rtol * (1.0 + self.point)
        lo, hi = self.support
        return lo <= l <= hi and l > 0

    def log_pdf(self, l: float) -> float:
        if self.is_point:
            raise ConfigurationError("a point-mass law has no density")
        v = self.pdf(l)
        return math.log(v) if v > 0 else -math.inf

    def _inverse_cdf_table(self):
        if "grid" in self._table:
            return self._table["grid"], self._table["cdf"]
        lo, hi = self.support
        name = self.name or "scale law"
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                total, _ = integrate.quad(self.pdf, lo, hi, limit=200)
                if not (math.isfinite(total) and total > 0):
                    raise ConfigurationError(f"density of {name} is not integrable on its support")
                if math.isinf(hi):
                    hi = max(lo + 1.0, 1.0)
                    while integrate.quad(self.pdf, hi, math.inf, limit=200)[0] > 1e-12 * total:
                        hi = lo + 2.0 * (hi - lo)
                        if hi > 1e12:
                            raise ConfigurationError("density tail too heavy for the tabulated inverse CDF")
            except integrate.IntegrationWarning:
                raise ConfigurationError(f"density of {name} is not integrable on its support") from None
        grid = np.linspace(lo, hi, CDF_GRID_POINTS)
        dens = np.array([self.pdf(t) for t in grid])
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
        if cdf[-1] <= 0:
            raise ConfigurationError("density vanishes on its support")
        cdf /= cdf[-1]
        self._table["grid"], self._table["cdf"] = grid, cdf
        return grid, cdf


class RngStream:
    """Deterministic random stream identified by ``(seed, stream)``."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream,)))
        )

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"


# ---------------------------------------------------------------------------
# primitive draws
# ---------------------------------------------------------------------------


def chi_samples(k, rng: RngStream, size=None):
    """Draws from the chi distribution with ``k`` degrees of freedom.

    ``k`` may be an array; each draw is ``sqrt(2 * Gamma(k/2))``.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0) or not np.all(np.isfinite(k)):
        raise DomainError("chi degrees of freedom must be positive")
    return np.sqrt(2.0 * rng.generator.standard_gamma(k / 2.0, size=size))


def chi_sample(k: float, rng: RngStream) -> float:
    return float(chi_samples(k, rng))


def sample_gauss_beta(beta: float, n: int, rng: RngStream) -> JacobiMatrix:
    """Tridiagonal Gaussian beta-ensemble matrix.

    ``b_j ~ N(0, 1)`` and ``a_j = chi_{beta(n-j)} / sqrt(2)``, which gives the
    coefficient density proportional to ``a^{beta(n-j)-1} exp(-a^2)``.
    """
    if beta <= 0 or n < 1:
        raise DomainError("need beta > 0 and n >= 1")
    b = rng.generator.standard_normal(n)
    if n == 1:
        return JacobiMatrix(b)
    a = chi_samples(beta * np.arange(n - 1, 0, -1), rng) / math.sqrt(2.0)
    return JacobiMatrix(b, a)


def sample_laguerre_beta(beta: float, m: int, n: int, rng: RngStream) -> BidiagonalFactor:
    """Bidiagonal factor ``B`` of a Laguerre beta-ensemble matrix ``B* B``."""
    if beta <= 0 or m < 1 or n < 1:
        raise DomainError("need beta > 0 and m, n >= 1")
    k = min(m, n)
    x = chi_samples(beta * (m - np.arange(1, k + 1) + 1), rng)
    ny = n - 1 if m >= n else m
    y = chi_samples(beta * (n - np.arange(1, ny + 1)), rng) if ny else np.zeros(0)
    return BidiagonalFactor(x, y)


def bidiag_to_jacobi(B: BidiagonalFactor) -> JacobiMatrix:
    """``B* B`` as a Jacobi matrix: ``b_j = x_j^2 + y_{j-1}^2``, ``a_j = x_j y_j``.

    In the hard regime the result is ``(m+1) x (m+1)`` with ``b_{m+1} = y_m^2``.
    """
    x2 = B.x**2
    y2 = B.y**2
    if B.hard:
        b = np.concatenate([x2, [0.0]])
        b[1:] += y2
    else:
        b = x2.copy()
        b[1:] += y2
    return JacobiMatrix(b, B.x[: len(B.y)] * B.y)


def sample_jacobi(spec: EnsembleSpec, rng: RngStream) -> JacobiMatrix:
    """Jacobi matrix of the Gaussian or Laguerre model behind ``spec``."""
    if spec.kind == GAUSSIAN:
        return sample_gauss_beta(spec.beta, spec.n, rng)
    return bidiag_to_jacobi(sample_laguerre_beta(spec.beta, spec.m, spec.n, rng))


def sample_scale(law: ScaleLaw, rng: RngStream) -> float:
    """Draw ``l`` from ``law``; densities use an inverse CDF on a 4096-point grid."""
    if law.is_point:
        return float(law.point)
    grid, cdf = law._inverse_cdf_table()
    u = rng.generator.random()
    l = float(np.interp(u, cdf, grid))
    if l <= 0.0:
        # l = 0 is excluded from every support we model
        l = float(grid[np.searchsorted(cdf, u, side="right")])
    return l
