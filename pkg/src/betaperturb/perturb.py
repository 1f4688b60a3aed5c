"""
Rank-one non-Hermitian perturbations of Jacobi matrices and their spectra.

The multiplicative perturbation ``(I + i l e1 e1*) J`` has characteristic
polynomial ``(1 + il) p(z) - il z q(z)``, where ``p`` and ``q`` are the
characteristic polynomials of ``J`` and of ``J`` without its first row and
column. Spectra are computed as roots of that polynomial. The additive
perturbation ``J + i l e1 e1*`` has characteristic polynomial
``p(z) - il q(z)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensembles import CHIRAL, GAUSSIAN, LAGUERRE, EnsembleSpec
from .errors import DomainError, SizeError
from .jacobi import JacobiMatrix, SpectralMeasure, char_polys, jacobi_to_measure
from .numerics import arg_half_period_array, canonical_order, poly_from_roots, poly_roots

__all__ = [
    "MULTIPLICATIVE",
    "ADDITIVE",
    "EigenConfiguration",
    "Quaternion",
    "multiplicative_charpoly",
    "additive_charpoly",
    "eigenvalues_multiplicative",
    "eigenvalues_additive",
    "spectrum_from_measure",
    "additive_spectrum_from_measure",
    "perturbed_spectrum",
    "measure_charpolys",
    "chiral_spectrum",
    "symplectic_double",
    "quaternion_embed",
    "quaternion_matrix_embed",
    "symplectic_block_matrix",
]

log = logging.getLogger(__name__)

MULTIPLICATIVE = "multiplicative"
ADDITIVE = "additive"

ZERO_RTOL = 1e-8
ANGLE_TOL = 1e-9
MAX_DEGREE = 50
WARN_DEGREE = 30


@dataclass(frozen=True)
class EigenConfiguration:
    """Eigenvalues of a perturbed operator.

    ``z`` holds the nonzero eigenvalues in canonical (Re, Im) order;
    ``zero_count`` counts eigenvalues classified as structural zeros.
    """

    z: np.ndarray
    l: float
    spec: Optional[EnsembleSpec] = None
    zero_count: int = 0
    kind: str = MULTIPLICATIVE

    def __post_init__(self):
        z = canonical_order(np.asarray(self.z, dtype=complex).reshape(-1))
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "l", float(self.l))

    def __len__(self):
        return len(self.z)

    @property
    def angle_sum(self) -> float:
        """Sum of the half-period arguments of the eigenvalues."""
        return float(np.sum(arg_half_period_array(self.z)))

    @property
    def arg_sum(self) -> float:
        """Sum of the principal arguments."""
        return float(np.sum(np.angle(self.z)))

    @property
    def product(self) -> complex:
        return complex(np.prod(self.z))

    @property
    def upper_count(self) -> int:
        return int(np.count_nonzero(self.z.imag > 0))

    @property
    def regime(self) -> str:
        if self.kind == ADDITIVE:
            return ADDITIVE
        if self.spec is None or self.spec.kind == GAUSSIAN:
            return GAUSSIAN
        return "hard" if self.spec.hard else LAGUERRE

    def violations(self, tol: float = ANGLE_TOL) -> list:
        """Configuration constraints that this spectrum breaks (empty if none)."""
        out = []
        target = math.atan(self.l)
        regime = self.regime
        if regime == ADDITIVE:
            if np.any(self.z.imag <= 0):
                out.append("eigenvalue outside the open upper half-plane")
            if abs(float(np.sum(self.z.imag)) - self.l) > tol * max(1.0, self.l):
                out.append("sum of imaginary parts differs from l")
            return out
        if regime == GAUSSIAN:
            if np.any(self.z.imag == 0):
                out.append("real eigenvalue")
            s = self.angle_sum
            if s >= math.pi / 2:
                out.append("angle sum reaches pi/2")
            if abs(s - target) > tol:
                out.append(f"angle sum {s!r} differs from arctan(l) = {target!r}")
            return out
        if np.any(self.z.imag <= 0):
            out.append("eigenvalue outside the open upper half-plane")
        s = self.arg_sum
        if regime == LAGUERRE:
            if abs(s - target) > tol:
                out.append(f"argument sum {s!r} differs from arctan(l) = {target!r}")
        else:
            if self.zero_count < 1:
                out.append("missing zero eigenvalue")
            if not s < target:
                out.append(f"argument sum {s!r} not below arctan(l) = {target!r}")
        return out


# ---------------------------------------------------------------------------
# characteristic polynomials
# ---------------------------------------------------------------------------


def _combine(p, q, l, kind):
    kappa = p.astype(complex)
    if kind == MULTIPLICATIVE:
        kappa *= 1 + 1j * l
        kappa[1:] -= 1j * l * q
    else:
        kappa[:-1] -= 1j * l * q
    return kappa


def multiplicative_charpoly(J: JacobiMatrix, l: float) -> np.ndarray:
    """Coefficients (ascending) of ``det(zI - (I + il e1 e1*) J)``."""
    p, q = char_polys(J)
    return _combine(p, q, l, MULTIPLICATIVE)


def additive_charpoly(J: JacobiMatrix, l: float) -> np.ndarray:
    """Coefficients (ascending) of ``det(zI - J - il e1 e1*)``."""
    p, q = char_polys(J)
    return _combine(p, q, l, ADDITIVE)


def measure_charpolys(mu: SpectralMeasure):
    """``(p, q)`` rebuilt from a spectral measure.

    ``p = prod (z - lambda_j)`` and ``q = p(z) * sum_j w_j / (z - lambda_j)``,
    i.e. the characteristic polynomials of the Jacobi matrix with measure
    ``mu`` and of its first truncation.
    """
    lam, w = mu.atoms, mu.weights
    p = poly_from_roots(lam)
    q = np.zeros(len(lam))
    for j in range(len(lam)):
        q += w[j] * poly_from_roots(np.delete(lam, j))
    return p, q


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


def _check_degree(d):
    if d > MAX_DEGREE:
        raise SizeError(f"degree {d} exceeds the supported cap of {MAX_DEGREE}")
    if d > WARN_DEGREE:
        log.warning("degree %d > %d: monomial-basis root finding is poorly conditioned", d, WARN_DEGREE)


def _split_zeros(kappa, zero_rtol):
    roots = poly_roots(kappa)
    scale = 1.0 + float(np.max(np.abs(roots)))
    small = np.abs(roots) <= zero_rtol * scale
    nzero = int(np.count_nonzero(small))
    if nzero == 0:
        return roots, 0
    if nzero == len(roots):
        return np.zeros(0, dtype=complex), nzero
    # deflate: the low-order coefficients are round-off around exact zeros
    return poly_roots(kappa[nzero:]), nzero


def _check_l(l):
    if not (l > 0 and math.isfinite(l)):
        raise DomainError("perturbation scale l must be positive and finite")


def eigenvalues_multiplicative(J: JacobiMatrix, l: float, spec: Optional[EnsembleSpec] = None,
                               zero_rtol: float = ZERO_RTOL) -> EigenConfiguration:
    """Spectrum of ``(I + il e1 e1*) J``.

    Roots with ``|z| <= zero_rtol * (1 + max|z|)`` are counted in
    ``zero_count`` and left out of ``z``. Constraint violations are logged,
    not raised; see :meth:`EigenConfiguration.violations`.
    """
    _check_l(l)
    _check_degree(J.n)
    z, nzero = _split_zeros(multiplicative_charpoly(J, l), zero_rtol)
    config = EigenConfiguration(z, l, spec, nzero, MULTIPLICATIVE)
    bad = config.violations()
    if bad:
        log.warning("configuration constraint violated: %s", "; ".join(bad))
    return config


def eigenvalues_additive(J: JacobiMatrix, l: float, spec: Optional[EnsembleSpec] = None) -> EigenConfiguration:
    """Spectrum of ``J + il e1 e1*``."""
    _check_l(l)
    _check_degree(J.n)
    z = poly_roots(additive_charpoly(J, l))
    return EigenConfiguration(z, l, spec, 0, ADDITIVE)


def _polish_rational(z, mu, l, kind, steps=6):
    # Newton on kappa(z) / p(z) = (1 + il) - il z m(z)  (multiplicative)
    #                           = 1 - il m(z)           (additive),
    # m(z) = sum_k w_k / (z - lambda_k). Each root is carried as
    # z = lambda_k + d with lambda_k its nearest atom, so a root hugging the
    # real axis keeps Im z = Im d to full relative precision.
    lam, w = mu.atoms, mu.weights
    z = np.array(z, dtype=complex)
    if len(z) == 0:
        return z
    near = np.argmin(np.abs(z[:, None] - lam[None, :]), axis=1)
    base = lam[near]
    others = np.ones((len(z), len(lam)), dtype=bool)
    others[np.arange(len(z)), near] = False
    w_near = w[near]

    def g_and_dg(d):
        x = base + d
        inv = np.where(others, 1.0 / (x[:, None] - lam[None, :]), 0.0)
        m = inv @ w + w_near / d
        dm = -(inv**2) @ w - w_near / d**2
        if kind == MULTIPLICATIVE:
            return (1 + 1j * l) - 1j * l * x * m, -1j * l * (m + x * dm)
        return 1 - 1j * l * m, -1j * l * dm

    d = z - base
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g, dg = g_and_dg(d)
        for _ in range(steps):
            trial = d - g / dg
            ok = np.isfinite(trial) & (trial != 0)
            g_trial, dg_trial = g_and_dg(np.where(ok, trial, d))
            better = ok & np.isfinite(g_trial) & (np.abs(g_trial) < np.abs(g))
            if not better.any():
                break
            d = np.where(better, trial, d)
            g = np.where(better, g_trial, g)
            dg = np.where(better, dg_trial, dg)
    return (base + d.real) + 1j * d.imag


def spectrum_from_measure(mu: SpectralMeasure, l: float, spec: Optional[EnsembleSpec] = None,
                          zero_rtol: float = ZERO_RTOL) -> EigenConfiguration:
    """Multiplicative spectrum computed straight from spectral data.

    This is the forward map ``(lambda, w, l) -> {z_j}`` without building the
    Jacobi matrix. A pinned zero atom produces an exact zero eigenvalue.
    """
    _check_l(l)
    _check_degree(mu.size)
    p, q = measure_charpolys(mu)
    z, nzero = _split_zeros(_combine(p, q, l, MULTIPLICATIVE), zero_rtol)
    z = _polish_rational(z, mu, l, MULTIPLICATIVE)
    return EigenConfiguration(z, l, spec, nzero, MULTIPLICATIVE)


def additive_spectrum_from_measure(mu: SpectralMeasure, l: float,
                                   spec: Optional[EnsembleSpec] = None) -> EigenConfiguration:
    """Additive counterpart of :func:`spectrum_from_measure`."""
    _check_l(l)
    _check_degree(mu.size)
    p, q = measure_charpolys(mu)
    z = _polish_rational(poly_roots(_combine(p, q, l, ADDITIVE)), mu, l, ADDITIVE)
    return EigenConfiguration(z, l, spec, 0, ADDITIVE)


def perturbed_spectrum(J: JacobiMatrix, l: float, spec: Optional[EnsembleSpec] = None) -> EigenConfiguration:
    """Spectrum of ``(I + il e1 e1*) J`` through its spectral measure.

    More accurate than :func:`eigenvalues_multiplicative` for large ``n``.
    In the rank-deficient Laguerre regime the smallest atom is pinned to zero.
    """
    mu = jacobi_to_measure(J)
    if spec is not None and spec.laguerre().hard:
        mu = mu.pin_zero_atom()
    config = spectrum_from_measure(mu, l, spec)
    bad = config.violations()
    if bad:
        log.warning("configuration constraint violated: %s", "; ".join(bad))
    return config


# ---------------------------------------------------------------------------
# structure maps
# ---------------------------------------------------------------------------


def chiral_spectrum(config: EigenConfiguration, m: int, n: int) -> EigenConfiguration:
    """Spectrum of the perturbed chiral matrix built on a perturbed Laguerre one.

    Nonzero eigenvalues are ``+-sqrt(z_j)``. The zero eigenvalue count is
    ``|m - n|`` plus twice the number of zeros of the Laguerre spectrum
    beyond the single structural zero of the rank-deficient regime, so the
    total is always ``m + n``.
    """
    if m < 1 or n < 1:
        raise DomainError("m and n must be positive")
    roots = np.sqrt(config.z)
    z = np.concatenate([roots, -roots])
    structural = 1 if m <= n - 1 else 0
    extra = max(config.zero_count - structural, 0)
    zeros = abs(m - n) + 2 * extra
    spec = config.spec
    if spec is not None:
        spec = EnsembleSpec(CHIRAL, spec.beta, n, m)
    return EigenConfiguration(z, config.l, spec, zeros, config.kind)


def symplectic_double(config: EigenConfiguration) -> EigenConfiguration:
    """Spectrum combined with its complex-conjugate image (quaternion case)."""
    z = np.concatenate([config.z, np.conj(config.z)])
    return EigenConfiguration(z, config.l, config.spec, 2 * config.zero_count, config.kind)


@dataclass(frozen=True)
class Quaternion:
    """Real quaternion ``q1 + q2 i + q3 j + q4 k``."""

    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0
    q4: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(float(c)) for c in (self.q1, self.q2, self.q3, self.q4)):
            raise DomainError("quaternion components must be finite")

    def __abs__(self):
        return math.sqrt(self.q1**2 + self.q2**2 + self.q3**2 + self.q4**2)

    def conj(self) -> "Quaternion":
        return Quaternion(self.q1, -self.q2, -self.q3, -self.q4)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        a1, b1, c1, d1 = self.q1, self.q2, self.q3, self.q4
        a2, b2, c2, d2 = other.q1, other.q2, other.q3, other.q4
        return Quaternion(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )


def quaternion_embed(q: Quaternion) -> np.ndarray:
    """2x2 complex matrix ``[[q1 + i q2, q3 + i q4], [-q3 + i q4, q1 - i q2]]``."""
    return np.array(
        [[complex(q.q1, q.q2), complex(q.q3, q.q4)],
         [complex(-q.q3, q.q4), complex(q.q1, -q.q2)]]
    )


def quaternion_matrix_embed(Q) -> np.ndarray:
    """Embed an ``n x n`` quaternion matrix (array of shape ``(n, n, 4)``) as a
    ``2n x 2n`` complex matrix with 2x2 blocks."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for r in range(n):
        for s in range(n):
            out[2 * r:2 * r + 2, 2 * s:2 * s + 2] = quaternion_embed(Quaternion(*Q[r, s]))
    return out


def symplectic_block_matrix(J: JacobiMatrix, l: float) -> np.ndarray:
    """Complex ``2n x 2n`` realization of ``(I + l i e1 e1*) J`` with ``J``
    a real-quaternion Jacobi matrix."""
    n = J.n
    pert = np.zeros((n, n, 4))
    pert[:, :, 0] = np.eye(n)
    pert[0, 0, 1] = l
    jq = np.zeros((n, n, 4))
    jq[:, :, 0] = J.dense()
    return quaternion_matrix_embed(pert) @ quaternion_matrix_embed(jq)
