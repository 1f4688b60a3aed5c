"""
Inverse of the eigenvalue map: from a perturbed configuration back to the
spectral data ``(lambda, w[, w0], l)``.

The real parts of the coefficients of ``prod (z - z_j)`` are the coefficients
of ``prod (z - lambda_j)``; ``l`` is ``Im(prod z) / Re(prod z)``; weights come
from the residues of ``prod (z - z_k) / prod (z - lambda_k)`` at the atoms.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .errors import ConsistencyError, DomainError, SingularityError
from .jacobi import SpectralMeasure
from .numerics import poly_from_roots, poly_roots
from .perturb import EigenConfiguration

__all__ = [
    "SpectralData",
    "averaged_polynomial",
    "recover_spectral_data",
    "recover_spectral_data_hard",
    "recover",
]

REAL_ROOT_RTOL = 1e-8
WEIGHT_SUM_TOL = 1e-8
PHASE_RTOL = 1e-6


class SpectralData(NamedTuple):
    lam: np.ndarray
    w: np.ndarray
    l: float
    w0: float = 0.0

    def measure(self) -> SpectralMeasure:
        if self.w0 > 0:
            atoms = np.concatenate([[0.0], self.lam])
            weights = np.concatenate([[self.w0], self.w])
            return SpectralMeasure(atoms, weights, has_zero_atom=True)
        return SpectralMeasure(self.lam, self.w)


def averaged_polynomial(z) -> np.ndarray:
    """Coefficients of ``(prod (x - z_j) + prod (x - conj z_j)) / 2``."""
    z = np.asarray(z, dtype=complex)
    return 0.5 * (poly_from_roots(z) + poly_from_roots(np.conj(z)))


def _real_atoms(z):
    coeffs = poly_from_roots(np.asarray(z, dtype=complex)).real
    roots = poly_roots(coeffs)
    if np.any(np.abs(roots.imag) > REAL_ROOT_RTOL * (1.0 + np.abs(roots))):
        raise ConsistencyError("the real-part polynomial has non-real roots")
    return _polish_atoms(np.sort(roots.real), np.asarray(z, dtype=complex))


def _polish_atoms(lam, z, steps=4):
    # for real x the polynomial equals Re prod (x - z_k); Newton in product
    # form keeps atoms accurate next to eigenvalues that hug the real axis
    for _ in range(steps):
        diff = lam[:, None] - z[None, :]
        prod = np.prod(diff, axis=1)
        f = prod.real
        df = (prod * np.sum(1.0 / diff, axis=1)).real
        with np.errstate(divide="ignore", invalid="ignore"):
            trial = lam - f / df
        ok = np.isfinite(trial)
        f_trial = np.prod(np.where(ok, trial, lam)[:, None] - z[None, :], axis=1).real
        better = ok & (np.abs(f_trial) < np.abs(f))
        if not better.any():
            break
        lam = np.where(better, trial, lam)
    return np.sort(lam)


def _residue_weights(lam, z, l):
    # signed w_j = prod_k (lambda_j - z_k) / (-i l lambda_j prod_{k != j} (lambda_j - lambda_k))
    w = np.empty(len(lam))
    for j, x in enumerate(lam):
        if x == 0:
            raise SingularityError("recovered atom at zero")
        num = np.prod(x - z)
        den = -1j * l * x * np.prod(np.delete(x - lam, j))
        signed = num / den
        if signed.real <= 0 or abs(signed.imag) > PHASE_RTOL * abs(signed):
            raise ConsistencyError(f"recovered weight {signed!r} is not positive")
        w[j] = abs(num) / abs(den)
    return w


def recover_spectral_data(config: EigenConfiguration, sum_tol: float = WEIGHT_SUM_TOL) -> SpectralData:
    """Spectral data of the Jacobi matrix behind a multiplicative configuration
    (Gaussian or ``m >= n`` Laguerre, nonsingular case)."""
    z = config.z
    if len(z) == 0:
        raise DomainError("empty configuration")
    prod = np.prod(z)
    if prod.real == 0:
        raise SingularityError("Re(prod z) vanishes")
    l = prod.imag / prod.real
    if not l > 0:
        raise ConsistencyError(f"recovered l = {l!r} is not positive")
    lam = _real_atoms(z)
    w = _residue_weights(lam, z, l)
    total = w.sum()
    if abs(total - 1.0) > sum_tol:
        raise ConsistencyError(f"recovered weights sum to {total!r}")
    return SpectralData(lam, w / total, float(l))


def recover_spectral_data_hard(config: EigenConfiguration, l: Optional[float] = None,
                               sum_tol: float = WEIGHT_SUM_TOL) -> SpectralData:
    """Spectral data ``(lambda, w, w0)`` behind the ``m`` nonzero eigenvalues of a
    rank-deficient Laguerre perturbation at fixed ``l``."""
    l = config.l if l is None else float(l)
    if not l > 0:
        raise DomainError("l must be positive")
    z = config.z
    if len(z) == 0:
        raise DomainError("empty configuration")
    prod = np.prod(z)
    if prod.real == 0:
        raise SingularityError("Re(prod z) vanishes")
    w0 = (l * prod.real - prod.imag) / (l * prod.real)
    if not 0.0 < w0 < 1.0:
        raise ConsistencyError(f"recovered zero-atom weight {w0!r} outside (0, 1)")
    lam = _real_atoms(z)
    w = _residue_weights(lam, z, l)
    total = w.sum() + w0
    if abs(total - 1.0) > sum_tol:
        raise ConsistencyError(f"recovered weights sum to {total!r}")
    return SpectralData(lam, w / total, l, float(w0 / total))


def recover(config: EigenConfiguration) -> SpectralData:
    """Dispatch on the regime recorded in ``config``."""
    if config.regime == "hard":
        return recover_spectral_data_hard(config)
    if config.regime == "additive":
        raise DomainError("inversion of additive configurations is not implemented")
    return recover_spectral_data(config)
