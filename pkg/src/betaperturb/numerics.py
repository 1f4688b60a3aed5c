"""
Numerical kernels shared by the rest of the package.

* ``arg_half_period``  -- the argument of a complex number folded into [0, pi)
* ``poly_roots``       -- all roots of a complex polynomial (Aberth-Ehrlich)
* ``symm_tridiag_eigen`` -- eigenvalues and first eigenvector components of a
  symmetric tridiagonal matrix (implicit QL with Wilkinson shifts)
* ``log_gamma``        -- Lanczos approximation of ln Gamma

Polynomials are passed around as coefficient arrays in ascending degree.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError, NumericError, SizeError

if TYPE_CHECKING:  # pragma: no cover
    from .jacobi import JacobiMatrix, SpectralMeasure

__all__ = [
    "arg_half_period",
    "arg_half_period_array",
    "poly_roots",
    "poly_from_roots",
    "poly_eval",
    "canonical_order",
    "symm_tridiag_eigen",
    "tridiag_eig_first_row",
    "log_gamma",
]

EPS = np.finfo(float).eps

# ---------------------------------------------------------------------------
# angles
# ---------------------------------------------------------------------------


_BELOW_PI = math.nextafter(math.pi, 0.0)


def arg_half_period(z: complex) -> float:
    """Argument of ``z`` folded into ``[0, pi)``.

    Upper half-plane points return ``Arg z``, real points return 0 and lower
    half-plane points return ``pi + Arg z``. Off the real axis this equals
    ``arccot(Re z / Im z)``.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"arg_half_period needs a finite argument, got {z!r}")
    if z.imag == 0.0:
        return 0.0
    # pi + Arg z equals Arg(-z); negation is exact, adding pi is not
    # atan2 rather than cmath.phase, which raises on subnormal parts
    w = -z if z.imag < 0.0 else z
    angle = math.atan2(w.imag, w.real)
    return min(angle, _BELOW_PI)


def arg_half_period_array(z) -> np.ndarray:
    """Vectorised :func:`arg_half_period`."""
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("arg_half_period needs finite arguments")
    angle = np.minimum(np.angle(np.where(z.imag < 0.0, -z, z)), _BELOW_PI)
    return np.where(z.imag == 0.0, 0.0, angle)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


def poly_eval(coeffs, z):
    """Evaluate an ascending-coefficient polynomial at ``z`` by Horner's rule."""
    coeffs = np.asarray(coeffs)
    z = np.asarray(z)
    acc = np.zeros_like(z, dtype=np.result_type(coeffs, z, float))
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def poly_from_roots(roots) -> np.ndarray:
    """Monic polynomial (ascending coefficients) with the given roots."""
    roots = np.asarray(roots)
    coeffs = np.ones(1, dtype=np.result_type(roots, float))
    for r in roots:
        shifted = np.zeros(len(coeffs) + 1, dtype=coeffs.dtype)
        shifted[1:] = coeffs
        shifted[:-1] -= r * coeffs
        coeffs = shifted
    return coeffs


def canonical_order(z) -> np.ndarray:
    """Sort complex numbers lexicographically by (Re, Im)."""
    z = np.asarray(z, dtype=complex)
    return z[np.lexsort((z.imag, z.real))]


def _horner_with_derivative(a, z):
    p = np.full_like(z, a[-1])
    dp = np.zeros_like(z)
    for c in a[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _cauchy_radius(a) -> float:
    # unique positive root of x^d - sum_{k<d} |a_k| x^k (a monic), found by
    # bisection in log x on 1 - sum |a_k| x^(k-d) so large degrees cannot overflow
    mags = np.abs(a[:-1])
    d = len(a) - 1
    keep = mags > 0
    if not keep.any():
        return 0.0
    log_c = np.log(mags[keep])
    gaps = (d - np.arange(d))[keep]
    hi = math.log1p(float(mags.max()))
    lo = hi - 750.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        v = log_c - gaps * mid
        top = v.max()
        if top > 0.0 or top + math.log(np.exp(v - top).sum()) > 0.0:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def poly_roots(coeffs, tol: float = 1e-13, maxiter: int = 500) -> np.ndarray:
    """All roots of a polynomial, with multiplicity.

    Parameters
    ----------
    coeffs : array_like
        Coefficients in ascending degree; the last one must be nonzero.
    tol : float
        Relative backward-error target. Iteration stops once every root
        satisfies ``|p(z)| <= tol * sum_k |a_k| |z|^k``.
    maxiter : int
        Aberth iteration cap. Exceeding it raises :class:`NumericError`
        carrying the last iterate in ``.best``.

    Returns
    -------
    numpy.ndarray
        ``d`` complex roots in canonical (Re, Im) order.
    """
    a = np.array(coeffs, dtype=complex)
    if a.ndim != 1 or len(a) < 2:
        raise SizeError("poly_roots needs a polynomial of degree >= 1")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if not np.all(np.isfinite(a)):
        raise DomainError("polynomial coefficients must be finite")
    if a[-1] == 0:
        raise DomainError("leading coefficient must be nonzero")

    # exact zero roots
    nz = 0
    while a[nz] == 0:
        nz += 1
    a = a[nz:] / a[-1]
    d = len(a) - 1
    if d == 0:
        return canonical_order(np.zeros(nz, dtype=complex))
    if d == 1:
        return canonical_order(np.concatenate([[-a[0]], np.zeros(nz)]))

    radius = _cauchy_radius(a)
    k = np.arange(d)
    z = radius * np.exp(1j * (2 * np.pi * k / d + 0.4))
    abs_a = np.abs(a)
    eye = np.eye(d, dtype=bool)

    for _ in range(maxiter):
        p, dp = _horner_with_derivative(a, z)
        scale = poly_eval(abs_a, np.abs(z))
        done = np.abs(p) <= tol * scale
        if done.all():
            break
        diff = z[:, None] - z[None, :]
        diff[eye] = 1.0
        repulsion = (1.0 / diff).sum(axis=1) - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            w = ratio / (1.0 - ratio * repulsion)
        w = np.where(done | ~np.isfinite(w), 0.0, w)
        z = z - w
    else:
        raise NumericError(f"Aberth iteration did not converge in {maxiter} steps", best=z)

    z = _newton_polish(a, z)
    if nz:
        z = np.concatenate([z, np.zeros(nz)])
    return canonical_order(z)


def _newton_polish(a, z, steps: int = 2):
    for _ in range(steps):
        p, dp = _horner_with_derivative(a, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            trial = z - p / dp
        p_trial, _ = _horner_with_derivative(a, np.where(np.isfinite(trial), trial, z))
        better = np.isfinite(trial) & (np.abs(p_trial) < np.abs(p))
        z = np.where(better, trial, z)
    return z


# ---------------------------------------------------------------------------
# symmetric tridiagonal eigenproblem
# ---------------------------------------------------------------------------


def tridiag_eig_first_row(diag, offdiag, max_sweeps: int = 60):
    """Implicit QL on a symmetric tridiagonal matrix.

    Returns ``(eigenvalues, first_components)`` sorted by eigenvalue. Only the
    first row of the eigenvector matrix is accumulated.
    """
    d = [float(x) for x in diag]
    n = len(d)
    e = [float(x) for x in offdiag] + [0.0]
    if len(e) != n:
        raise SizeError("off-diagonal must have length n-1")
    z = [0.0] * n
    z[0] = 1.0

    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if sweeps == max_sweeps:
                raise NumericError(
                    f"QL iteration exceeded {max_sweeps} sweeps for eigenvalue {l}",
                    best=np.array(d),
                )
            sweeps += 1
            # Wilkinson-type shift from the leading 2x2 block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    lam = np.array(d)
    first = np.array(z)
    order = np.argsort(lam, kind="stable")
    return lam[order], first[order]


def symm_tridiag_eigen(J: "JacobiMatrix") -> "SpectralMeasure":
    """Spectral measure of a Jacobi matrix: its eigenvalues and the squared
    first components of the normalized eigenvectors."""
    from .jacobi import SpectralMeasure

    lam, first = tridiag_eig_first_row(J.b, J.a)
    w = first**2
    w = w / w.sum()
    return SpectralMeasure(lam, w)


# ---------------------------------------------------------------------------
# log-gamma
# ---------------------------------------------------------------------------

# Lanczos coefficients for g = 607/128, 15 terms (P. Godfrey).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_COEF = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for ``x > 0``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    if x == 1.0 or x == 2.0:
        return 0.0
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)
    zz = x - 1.0
    series = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        series += _LANCZOS_COEF[k] / (zz + k)
    t = zz + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zz + 0.5) * math.log(t) - t + math.log(series)
