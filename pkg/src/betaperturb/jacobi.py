"""Jacobi matrices, their characteristic polynomials and spectral measures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, DomainError, SizeError
from .numerics import symm_tridiag_eigen

__all__ = [
    "JacobiMatrix",
    "SpectralMeasure",
    "char_polys",
    "char_poly_values",
    "truncate_first",
    "measure_to_jacobi",
    "jacobi_to_measure",
]

COINCIDENT_ATOM_RTOL = 1e-12


@dataclass(frozen=True)
class JacobiMatrix:
    """Real symmetric tridiagonal matrix with diagonal ``b`` and positive
    off-diagonal ``a`` (length ``n - 1``)."""

    b: np.ndarray
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        b = np.array(self.b, dtype=float).reshape(-1)
        a = np.array(self.a, dtype=float).reshape(-1)
        if len(b) < 1:
            raise SizeError("Jacobi matrix needs n >= 1")
        if len(a) != len(b) - 1:
            raise SizeError(f"off-diagonal has length {len(a)}, expected {len(b) - 1}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise DomainError("Jacobi coefficients must be finite")
        if np.any(a <= 0):
            raise DomainError("Jacobi off-diagonal entries must be positive")
        b.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return len(self.b)

    def dense(self) -> np.ndarray:
        return np.diag(self.b) + np.diag(self.a, 1) + np.diag(self.a, -1)

    def trace(self) -> float:
        return float(self.b.sum())


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite atomic probability measure sum_j w_j delta_{lambda_j}.

    With ``has_zero_atom`` set exactly one atom sits at 0; its weight is
    exposed as :attr:`w0` (the rank-deficient Laguerre regime).
    """

    atoms: np.ndarray
    weights: np.ndarray
    has_zero_atom: bool = False

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float).reshape(-1)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if len(atoms) == 0 or len(atoms) != len(weights):
            raise SizeError("atoms and weights must be non-empty and of equal length")
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(weights))):
            raise DomainError("measure data must be finite")
        if np.any(weights <= 0):
            raise DomainError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-10 * len(weights):
            raise DomainError(f"weights sum to {weights.sum()!r}, not 1")
        if len(np.unique(atoms)) != len(atoms):
            raise DomainError("atoms must be pairwise distinct")
        if self.has_zero_atom and np.count_nonzero(atoms == 0.0) != 1:
            raise DomainError("zero-atom flag requires exactly one atom at 0")
        order = np.argsort(atoms)
        atoms, weights = atoms[order], weights[order]
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return len(self.atoms)

    @property
    def w0(self) -> float:
        if not self.has_zero_atom:
            return 0.0
        return float(self.weights[self.atoms == 0.0][0])

    @property
    def nonzero_atoms(self) -> np.ndarray:
        return self.atoms[self.atoms != 0.0] if self.has_zero_atom else self.atoms

    @property
    def nonzero_weights(self) -> np.ndarray:
        return self.weights[self.atoms != 0.0] if self.has_zero_atom else self.weights

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * self.atoms**k))

    def pin_zero_atom(self) -> "SpectralMeasure":
        """Snap the atom of smallest modulus to exactly 0 and flag it."""
        atoms = self.atoms.copy()
        atoms[np.argmin(np.abs(atoms))] = 0.0
        return SpectralMeasure(atoms, self.weights, has_zero_atom=True)


def _recurrence_polys(J: JacobiMatrix):
    # P_k = (z - b_{n-k+1}) P_{k-1} - a_{n-k+1}^2 P_{k-2}, from the bottom corner up
    n = J.n
    polys = [np.ones(1)]
    prev2 = None
    for k in range(1, n + 1):
        idx = n - k  # 0-based index of b_{n-k+1}
        prev = polys[-1]
        cur = np.zeros(k + 1)
        cur[1:] += prev
        cur[:-1] -= J.b[idx] * prev
        if k >= 2:
            cur[:-2] -= J.a[idx] ** 2 * prev2
        prev2 = prev
        polys.append(cur)
    return polys


def char_polys(J: JacobiMatrix):
    """Characteristic polynomials ``(p, q)`` of ``J`` and of ``J`` with its
    first row and column deleted; ascending coefficients, both monic."""
    polys = _recurrence_polys(J)
    return polys[-1], polys[-2]


def char_poly_values(J: JacobiMatrix, z):
    """Values ``(p(z), q(z), r(z))`` by running the three-term recurrence at
    the points ``z`` (``r`` belongs to the twice-truncated matrix)."""
    z = np.asarray(z, dtype=complex)
    n = J.n
    prev2 = np.zeros_like(z)
    prev = np.ones_like(z)
    history = [prev]
    for k in range(1, n + 1):
        idx = n - k
        cur = (z - J.b[idx]) * prev
        if k >= 2:
            cur = cur - J.a[idx] ** 2 * prev2
        prev2, prev = prev, cur
        history.append(cur)
    r = history[-3] if n >= 2 else np.zeros_like(z)
    return history[-1], history[-2], r


def truncate_first(J: JacobiMatrix) -> JacobiMatrix:
    """Delete the first row and column."""
    if J.n < 2:
        raise SizeError("cannot truncate a 1x1 Jacobi matrix")
    return JacobiMatrix(J.b[1:], J.a[1:])


def jacobi_to_measure(J: JacobiMatrix) -> SpectralMeasure:
    return symm_tridiag_eigen(J)


def measure_to_jacobi(mu: SpectralMeasure) -> JacobiMatrix:
    """Jacobi matrix whose spectral measure is ``mu``.

    Lanczos on ``diag(atoms)`` started from ``sqrt(weights)`` with full
    reorthogonalization.
    """
    lam = mu.atoms
    N = len(lam)
    span = lam[-1] - lam[0]
    if N > 1 and np.min(np.diff(lam)) < COINCIDENT_ATOM_RTOL * span:
        raise ConditioningError("measure has nearly coincident atoms")

    V = np.zeros((N, N))
    V[:, 0] = np.sqrt(mu.weights)
    V[:, 0] /= np.linalg.norm(V[:, 0])
    b = np.zeros(N)
    a = np.zeros(max(N - 1, 0))
    for k in range(N):
        u = lam * V[:, k]
        b[k] = V[:, k] @ u
        if k == N - 1:
            break
        u -= b[k] * V[:, k]
        if k > 0:
            u -= a[k - 1] * V[:, k - 1]
        basis = V[:, : k + 1]
        for _ in range(2):
            u -= basis @ (basis.T @ u)
        a[k] = np.linalg.norm(u)
        if a[k] <= 0.0:
            raise ConditioningError("Lanczos breakdown: measure support too small")
        V[:, k + 1] = u / a[k]
    return JacobiMatrix(b, a)
