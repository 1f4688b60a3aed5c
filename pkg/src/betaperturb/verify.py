"""
Certification harness.

Each suite runs a set of numerical checks over independent trials. Trial
``t`` draws everything from ``RngStream(seed, t)``, so a failure is
reproducible from ``(seed, t)`` alone and the report does not depend on the
order in which trials complete.

Suites: charpoly, configuration, jacobian, pushforward, roundtrip,
statistics, chiral, symplectic (and ``all``).

Setting the environment variable ``BETAPERTURB_FAULT`` flips the sign of the
perturbation scale inside the charpoly and configuration checks; it exists
only to prove that the harness can fail.
"""

from __future__ import annotations

import json
import math
import os
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special
from scipy.optimize import linear_sum_assignment

from .density import (
    log_base_density,
    log_density,
    log_density_gauss_add,
    log_density_laguerre_hard,
    log_jacobian_additive,
    log_jacobian_hard,
    log_jacobian_multiplicative,
)
from .ensembles import (
    GAUSSIAN,
    LAGUERRE,
    EnsembleSpec,
    RngStream,
    ScaleLaw,
    bidiag_to_jacobi,
    sample_gauss_beta,
    sample_jacobi,
    sample_laguerre_beta,
    sample_scale,
)
from .errors import BetaPerturbError, ConditioningError, DomainError
from .inverse import SpectralData, recover_spectral_data, recover_spectral_data_hard
from .jacobi import SpectralMeasure, char_poly_values, jacobi_to_measure
from .perturb import (
    additive_spectrum_from_measure,
    chiral_spectrum,
    eigenvalues_multiplicative,
    spectrum_from_measure,
    symplectic_block_matrix,
    symplectic_double,
)

__all__ = [
    "SUITES",
    "FAULT_ENV",
    "Check",
    "VerificationReport",
    "cofactor_det",
    "multiset_distance",
    "jacobian_fd",
    "log_jacobian_fd",
    "pushforward_check",
    "pushforward_discrepancy",
    "ks_test",
    "kolmogorov_sf",
    "run_suite",
]

FAULT_ENV = "BETAPERTURB_FAULT"

FD_STEP = 1e-5
P_THRESHOLD = 0.01

# check name -> tolerance; errors are relative unless noted in the check
TOLERANCES = {
    "charpoly_identity": 1e-10,
    "three_term_recurrence": 1e-10,
    "angle_sum": 1e-9,
    "halfplane_count": 0,
    "nonreal": 0,
    "upper_half_plane": 0,
    "arg_sum": 1e-9,
    "arg_sum_below": 0,
    "zero_eigenvalue": 0,
    "real_trace": 1e-10,
    "product_identity": 1e-8,
    "jacobian_soft": 1e-5,
    "jacobian_hard": 1e-5,
    "fd_step_halving": 1e-2,
    "pushforward_gauss": 1e-8,
    "pushforward_laguerre": 1e-8,
    "pushforward_hard": 1e-8,
    "pushforward_additive_variance": 1e-16,
    "recover_forward": 1e-8,
    "forward_recover": 1e-8,
    "sign_consistency": 0,
    "chiral_squares": 1e-10,
    "chiral_zero_count": 0,
    "chiral_dense": 1e-8,
    "symplectic_conjugation": 0,
    "symplectic_block": 1e-8,
}


def _fault() -> bool:
    return bool(os.environ.get(FAULT_ENV))


# ---------------------------------------------------------------------------
# report types
# ---------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    worst_error: float
    tolerance: Optional[float] = None
    p_value: Optional[float] = None
    statistic: Optional[float] = None
    count: int = 0
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"name": self.name, "pass": bool(self.passed), "worst_error": _finite_or_none(self.worst_error)}
        if self.p_value is not None:
            out["p_value"] = self.p_value
            out["statistic"] = self.statistic
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        out["count"] = self.count
        if self.failures:
            out["failed_trials"] = self.failures
        return out


def _finite_or_none(x):
    return float(x) if x is not None and math.isfinite(x) else None


@dataclass
class VerificationReport:
    """Outcome of one suite run. ``wall_time`` is kept out of :meth:`to_dict`
    so serialized reports are identical for identical inputs."""

    suite: str
    seed: int
    trials: int
    checks: list
    specs: list = field(default_factory=list)
    law: str = ""
    resampled: int = 0
    errors: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and not self.errors

    def failed_checks(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "pass": self.passed,
            "specs": self.specs,
            "law": self.law,
            "resampled": self.resampled,
            "errors": self.errors,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def summary_lines(self) -> list:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = f" p={c.p_value:.4g}" if c.p_value is not None else f" worst={c.worst_error:.3e}"
            lines.append(f"[{status}] {self.suite}/{c.name}{extra}")
        for e in self.errors:
            lines.append(f"[FAIL] {self.suite}/error {e}")
        return lines


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def cofactor_det(M) -> np.ndarray:
    """Determinant by Laplace (cofactor) expansion.

    ``M`` has shape ``(n, n)`` or ``(n, n, k)``; the trailing axis evaluates
    ``k`` matrices with a shared sparsity pattern at once. Each step expands
    along the row or column with the fewest structural nonzeros and minors
    are memoized, so banded matrices cost little.
    """
    M = np.asarray(M)
    if M.ndim == 2:
        M = M[:, :, None]
        squeeze = True
    else:
        squeeze = False
    n = M.shape[0]
    nonzero = np.any(M != 0, axis=2)
    memo = {}

    def det(rows, cols):
        key = (rows, cols)
        if key in memo:
            return memo[key]
        if len(rows) == 1:
            val = M[rows[0], cols[0]]
            memo[key] = val
            return val
        sub = nonzero[np.ix_(rows, cols)]
        row_nz = sub.sum(axis=1)
        col_nz = sub.sum(axis=0)
        total = np.zeros(M.shape[2], dtype=M.dtype)
        if row_nz.min() <= col_nz.min():
            i = int(np.argmin(row_nz))
            for j in np.flatnonzero(sub[i]):
                minor = det(rows[:i] + rows[i + 1:], cols[:j] + cols[j + 1:])
                total = total + (-1) ** (i + j) * M[rows[i], cols[j]] * minor
        else:
            j = int(np.argmin(col_nz))
            for i in np.flatnonzero(sub[:, j]):
                minor = det(rows[:i] + rows[i + 1:], cols[:j] + cols[j + 1:])
                total = total + (-1) ** (i + j) * M[rows[i], cols[j]] * minor
        memo[key] = total
        return total

    out = det(tuple(range(n)), tuple(range(n)))
    return out[0] if squeeze else out


def multiset_distance(a, b) -> float:
    """Largest distance between optimally matched elements of two complex
    multisets (``inf`` when the sizes differ)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if len(a) != len(b):
        return math.inf
    if len(a) == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def kolmogorov_sf(x: float, terms: int = 100) -> float:
    """Survival function of the Kolmogorov distribution,
    ``2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)``."""
    if x <= 0.2:
        return 1.0
    k = np.arange(1, terms + 1)
    val = 2.0 * float(np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k**2 * x * x)))
    return min(max(val, 0.0), 1.0)


def ks_test(samples, cdf: Callable) -> tuple:
    """Two-sided one-sample Kolmogorov-Smirnov test with the asymptotic
    p-value. Needs at least 100 samples."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n < 100:
        raise DomainError(f"KS test needs at least 100 samples, got {n}")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - F)), float(np.max(F - (i - 1) / n)))
    d = min(max(d, 0.0), 1.0)
    return d, kolmogorov_sf(math.sqrt(n) * d)


# ---------------------------------------------------------------------------
# finite-difference Jacobians
# ---------------------------------------------------------------------------


def _match(base, z):
    cost = np.abs(base[:, None] - z[None, :])
    r, c = linear_sum_assignment(cost)
    return z[c[np.argsort(r)]]


def _flat(z):
    out = np.empty(2 * len(z))
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def _fd_setup(data: SpectralData, additive: bool):
    lam = np.asarray(data.lam, dtype=float)
    w = np.asarray(data.w, dtype=float)
    hard = data.w0 > 0
    if hard:
        if additive:
            raise DomainError("additive map has no zero-atom variant")
        coords = np.concatenate([lam, w])
        weights_all = np.concatenate([w, [data.w0]])
        k = len(lam)

        def forward(x):
            lam_x, w_x = x[:k], x[k:]
            mu = SpectralMeasure(np.concatenate([[0.0], lam_x]),
                                 np.concatenate([[1.0 - w_x.sum()], w_x]), has_zero_atom=True)
            return spectrum_from_measure(mu, data.l).z
    else:
        n = len(lam)
        coords = np.concatenate([lam, w[:-1], [data.l]])
        weights_all = w
        spectrum = additive_spectrum_from_measure if additive else spectrum_from_measure

        def forward(x):
            lam_x, w_x, l_x = x[:n], x[n:2 * n - 1], x[-1]
            mu = SpectralMeasure(lam_x, np.concatenate([w_x, [1.0 - w_x.sum()]]))
            return spectrum(mu, l_x).z
    return coords, weights_all, forward


def log_jacobian_fd(data: SpectralData, step: float = FD_STEP, additive: bool = False) -> float:
    """log |det| of the forward map's derivative by central differences.

    Free coordinates are ``(lambda, w_1..w_{n-1}, l)`` (``w_n = 1 - sum``),
    or ``(lambda_1..lambda_m, w_1..w_m)`` at fixed ``l`` when ``data.w0 > 0``
    (``w0 = 1 - sum``). The step for coordinate ``x`` is ``step (1 + |x|)``.
    """
    coords, weights_all, forward = _fd_setup(data, additive)
    # every perturbed point keeps all weights at least 2h away from the boundary
    if np.min(weights_all) < 4 * step:
        raise ConditioningError("finite-difference step would leave the simplex")
    base = forward(coords)
    cols = []
    for i in range(len(coords)):
        h = step * (1.0 + abs(coords[i]))
        xp = coords.copy()
        xm = coords.copy()
        xp[i] += h
        xm[i] -= h
        zp = _match(base, forward(xp))
        zm = _match(base, forward(xm))
        cols.append((_flat(zp) - _flat(zm)) / (2 * h))
    D = np.column_stack(cols)
    sign, logdet = np.linalg.slogdet(D)
    if sign == 0:
        return -math.inf
    return float(logdet)


def jacobian_fd(data: SpectralData, step: float = FD_STEP, additive: bool = False) -> float:
    """|det| of the forward map's derivative by central differences."""
    return math.exp(log_jacobian_fd(data, step, additive))


def _closed_log_jacobian(data: SpectralData, additive: bool = False) -> float:
    if data.w0 > 0:
        z = spectrum_from_measure(data.measure(), data.l).z
        return log_jacobian_hard(data.lam, z, data.l)
    if additive:
        z = additive_spectrum_from_measure(data.measure(), data.l).z
        return log_jacobian_additive(data.lam, z, data.l)
    z = spectrum_from_measure(data.measure(), data.l).z
    return log_jacobian_multiplicative(data.lam, z, data.l)


# ---------------------------------------------------------------------------
# pushforward
# ---------------------------------------------------------------------------


def _sample_spectral(spec: EnsembleSpec, law: ScaleLaw, rng: RngStream):
    J = sample_jacobi(spec.laguerre(), rng)
    mu = jacobi_to_measure(J)
    if spec.hard:
        mu = mu.pin_zero_atom()
    l = sample_scale(law, rng)
    return J, mu, l


def pushforward_discrepancy(rng: RngStream, spec: EnsembleSpec, law: ScaleLaw, additive: bool = False) -> float:
    """Signed ``closed-form log-density - (log base density - log Jacobian)``
    at one sampled point of the spectral data."""
    spec = spec.laguerre()
    _, mu, l = _sample_spectral(spec, law, rng)
    if additive:
        if spec.kind != GAUSSIAN:
            raise DomainError("additive pushforward is implemented for the Gaussian ensemble")
        config = additive_spectrum_from_measure(mu, l, spec)
        closed = log_density_gauss_add(config, law).log_value
        jac = log_jacobian_additive(mu.atoms, config.z, l)
        return closed - (log_base_density(mu, spec, l, law).log_value - jac)
    config = spectrum_from_measure(mu, l, spec)
    if spec.hard:
        closed = log_density_laguerre_hard(config, spec.beta, spec.m, spec.n, l).log_value
        jac = log_jacobian_hard(mu.nonzero_atoms, config.z, l)
    else:
        closed = log_density(config, law).log_value
        jac = log_jacobian_multiplicative(mu.atoms, config.z, l)
    return closed - (log_base_density(mu, spec, l, law).log_value - jac)


def pushforward_check(seed: int, spec: EnsembleSpec, law: ScaleLaw, trial: int = 0) -> float:
    """Absolute log-discrepancy of the closed-form density at one sampled point."""
    return abs(pushforward_discrepancy(RngStream(seed, trial), spec, law))


# ---------------------------------------------------------------------------
# suites: per-trial workers return {check_name: value}
# ---------------------------------------------------------------------------


def _rel(a, b, floor=0.0):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


def _trial_charpoly(seed, t, spec, law):
    rng = RngStream(seed, t)
    g = rng.generator
    if spec is None:
        beta = float(g.choice([1.0, 2.0, 4.0]))
        spec = EnsembleSpec(GAUSSIAN, beta, int(g.integers(1, 13)))
        l = float(g.uniform(0.0, 10.0)) or 10.0
    else:
        l = sample_scale(law, rng)
    J = sample_jacobi(spec.laguerre(), rng)
    n = J.n
    R = 1.0 + float(np.max(np.abs(J.b))) + 2.0 * float(np.max(J.a, initial=0.0))
    pts = g.uniform(-R, R, 20) + 1j * g.uniform(-R, R, 20)
    p, q, r = char_poly_values(J, pts)
    signed_l = -l if _fault() else l
    identity = (1 + 1j * signed_l) * p - 1j * signed_l * pts * q
    dense = np.diag(np.ones(n, dtype=complex))
    dense[0, 0] += 1j * l
    M = dense @ J.dense()
    stack = pts[None, None, :] * np.eye(n)[:, :, None] - M[:, :, None]
    oracle = cofactor_det(stack)
    out = {"charpoly_identity": _rel(identity, oracle)}
    if n >= 2:
        pq = (pts - J.b[0]) * q - J.a[0] ** 2 * r
        out["three_term_recurrence"] = _rel(pq, p)
    return out


def _trial_configuration(seed, t, spec, law):
    rng = RngStream(seed, t)
    J, mu, l = _sample_spectral(spec, law, rng)
    config = eigenvalues_multiplicative(J, l, spec)
    z = config.z
    out = {}
    scale = 1.0 + float(np.sum(np.abs(z)))
    out["real_trace"] = abs(float(np.sum(z.real)) - J.trace()) / scale
    target = math.atan(-l if _fault() else l)
    if spec.kind == GAUSSIAN:
        lam = mu.atoms
        out["nonreal"] = float(np.count_nonzero(z.imag == 0) + config.zero_count)
        out["angle_sum"] = abs(config.angle_sum - target)
        out["halfplane_count"] = float(abs(config.upper_count - int(np.count_nonzero(lam > 0))))
        out["product_identity"] = abs(config.product.real - float(np.prod(lam))) / abs(float(np.prod(lam)))
        return out
    out["upper_half_plane"] = float(np.count_nonzero(z.imag <= 0))
    if spec.hard:
        out["zero_eigenvalue"] = float(abs(config.zero_count - 1))
        out["arg_sum_below"] = 0.0 if config.arg_sum < target else 1.0
        lam = mu.nonzero_atoms
    else:
        out["arg_sum"] = abs(config.arg_sum - target)
        lam = mu.atoms
    out["product_identity"] = abs(config.product.real - float(np.prod(lam))) / abs(float(np.prod(lam)))
    return out


def _interior_data(spec, law, rng, step=FD_STEP, attempts=50):
    for k in range(attempts):
        _, mu, l = _sample_spectral(spec, law, rng)
        if spec.hard:
            data = SpectralData(mu.nonzero_atoms, mu.nonzero_weights, l, mu.w0)
            weights = np.concatenate([data.w, [data.w0]])
        else:
            data = SpectralData(mu.atoms, mu.weights, l)
            weights = data.w
        if np.min(weights) >= 4 * step:
            return data, k
    raise ConditioningError("could not draw an interior point for the finite-difference Jacobian")


def _trial_jacobian(seed, t, spec, law):
    rng = RngStream(seed, t)
    data, resampled = _interior_data(spec, law, rng)
    closed = _closed_log_jacobian(data)
    fd = log_jacobian_fd(data)
    fd_half = log_jacobian_fd(data, FD_STEP / 2)
    name = "jacobian_hard" if spec.hard else "jacobian_soft"
    return {
        name: abs(math.expm1(fd - closed)),
        "fd_step_halving": abs(math.expm1(fd_half - fd)),
        "_resampled": float(resampled),
    }


def _trial_pushforward(seed, t, spec, law):
    rng = RngStream(seed, t)
    if spec.kind == GAUSSIAN:
        name = "pushforward_gauss"
    else:
        name = "pushforward_hard" if spec.hard else "pushforward_laguerre"
    out = {name: abs(pushforward_discrepancy(rng, spec, law))}
    if spec.kind == GAUSSIAN and not law.is_point:
        out["_additive_offset:" + spec.describe()] = pushforward_discrepancy(RngStream(seed, t), spec, law, additive=True)
    return out


def _trial_roundtrip(seed, t, spec, law):
    rng = RngStream(seed, t)
    J, mu, l = _sample_spectral(spec, law, rng)
    config = eigenvalues_multiplicative(J, l, spec)
    out = {}
    if spec.hard:
        rec = recover_spectral_data_hard(config, l)
        err = max(_rel(rec.lam, mu.nonzero_atoms, 1.0), float(np.max(np.abs(rec.w - mu.nonzero_weights))),
                  abs(rec.w0 - mu.w0))
    else:
        rec = recover_spectral_data(config)
        err = max(_rel(rec.lam, mu.atoms, 1.0), float(np.max(np.abs(rec.w - mu.weights))),
                  abs(rec.l - l) / (1.0 + l))
        if spec.kind == GAUSSIAN:
            out["sign_consistency"] = float(abs(int(np.count_nonzero(rec.lam < 0))
                                                - int(np.count_nonzero(config.z.imag < 0))))
    out["recover_forward"] = err
    again = spectrum_from_measure(rec.measure(), rec.l, spec)
    out["forward_recover"] = multiset_distance(again.z, config.z) / (1.0 + float(np.max(np.abs(config.z))))
    return out


def _trial_statistics(seed, t, spec, law):
    rng = RngStream(seed, t)
    spec = spec.laguerre()
    out = {}
    if spec.kind == GAUSSIAN:
        J = sample_gauss_beta(spec.beta, spec.n, rng)
        for j, a in enumerate(J.a, start=1):
            out[f"_coef_{j}"] = 2.0 * a * a
    else:
        J = sample_jacobi(spec, rng)
    l = sample_scale(law, rng)
    config = eigenvalues_multiplicative(J, l, spec)
    out["_trace"] = float(np.sum(config.z.real))
    return out


def _laguerre_dense_chiral(B, m, n, l):
    # X is m x n with X* X equal to the n x n Laguerre matrix (zero-padded in the hard regime)
    Bd = B.dense()
    if not B.hard:
        X = np.zeros((m, n))
        X[:n, :] = Bd
    else:
        X = np.zeros((m, n))
        X[:, : m + 1] = Bd[:m, :]
    pert = np.eye(n, dtype=complex)
    pert[0, 0] += 1j * l
    H = np.zeros((m + n, m + n), dtype=complex)
    H[:n, n:] = pert @ X.T
    H[n:, :n] = X
    return H


def _trial_chiral(seed, t, spec, law):
    rng = RngStream(seed, t)
    lag = spec.laguerre()
    m, n = lag.m, lag.n
    B = sample_laguerre_beta(lag.beta, m, n, rng)
    J = bidiag_to_jacobi(B)
    l = sample_scale(law, rng)
    config = eigenvalues_multiplicative(J, l, lag)
    ch = chiral_spectrum(config, m, n)
    nonzero = ch.z
    squares = nonzero**2
    doubled = np.concatenate([config.z, config.z])
    scale = 1.0 + float(np.max(np.abs(doubled)))
    out = {
        "chiral_squares": multiset_distance(squares, doubled) / scale,
        "chiral_zero_count": float(abs(ch.zero_count - abs(m - n)) + abs(len(nonzero) + ch.zero_count - (m + n))),
    }
    ev = np.linalg.eigvals(_laguerre_dense_chiral(B, m, n, l))
    ev_scale = 1.0 + float(np.max(np.abs(ev)))
    order = np.argsort(np.abs(ev))
    dense_nonzero = ev[order[ch.zero_count:]]
    out["chiral_dense"] = multiset_distance(dense_nonzero, nonzero) / ev_scale
    return out


def _trial_symplectic(seed, t, spec, law):
    rng = RngStream(seed, t)
    lag = spec.laguerre()
    J = sample_jacobi(lag, rng)
    l = sample_scale(law, rng)
    config = eigenvalues_multiplicative(J, l, lag)
    doubled = symplectic_double(config)
    z = doubled.z
    closed = multiset_distance(z, np.conj(z))
    ev = np.linalg.eigvals(symplectic_block_matrix(J, l))
    scale = 1.0 + float(np.max(np.abs(ev)))
    order = np.argsort(np.abs(ev))
    ev_nonzero = ev[order[doubled.zero_count:]]
    return {
        "symplectic_conjugation": 0.0 if closed <= 1e-12 * scale else 1.0,
        "symplectic_block": multiset_distance(ev_nonzero, z) / scale,
    }


def _g(beta, n):
    return EnsembleSpec(GAUSSIAN, beta, n)


def _lag(beta, n, m):
    return EnsembleSpec(LAGUERRE, beta, n, m)


# default panels: trial t uses panel[t % len(panel)]
DEFAULT_PANELS = {
    "charpoly": [None],
    "configuration": [_g(2, 10), _lag(2, 5, 7), _lag(2, 6, 3)],
    "jacobian": [_g(1, 2), _g(2, 4), _g(4, 6), _g(2, 1), _lag(2, 3, 5), _lag(1, 5, 6),
                 _lag(2, 4, 2), _lag(1, 6, 4), _lag(4, 3, 1), _lag(2, 5, 3)],
    "pushforward": [_g(1, 3), _g(2, 6), _g(4, 4), _g(0.5, 5), _lag(2, 3, 4), _lag(1, 5, 6),
                    _lag(4, 4, 4), _lag(2, 4, 2), _lag(1, 6, 4), _lag(4, 5, 1)],
    "roundtrip": [_g(1, 10), _g(2, 7), _g(4, 4), _lag(2, 10, 10), _lag(1, 6, 9),
                  _lag(2, 5, 3), _lag(4, 10, 7)],
    "statistics": [_g(2, 5)],
    "chiral": [_lag(2, 3, 5), _lag(1, 4, 4), _lag(2, 5, 3), _lag(4, 4, 1)],
    "symplectic": [_g(4, 3), _g(4, 6), _lag(4, 4, 5)],
}

_WORKERS = {
    "charpoly": _trial_charpoly,
    "configuration": _trial_configuration,
    "jacobian": _trial_jacobian,
    "pushforward": _trial_pushforward,
    "roundtrip": _trial_roundtrip,
    "statistics": _trial_statistics,
    "chiral": _trial_chiral,
    "symplectic": _trial_symplectic,
}

SUITES = tuple(_WORKERS)

DEFAULT_LAWS = {
    "jacobian": ScaleLaw.exponential(1.0),
    "pushforward": ScaleLaw.exponential(1.0),
}


def _run_trial(args):
    name, seed, t, spec, law = args
    try:
        return t, _WORKERS[name](seed, t, spec, law), None
    except BetaPerturbError as exc:  # recorded, reproducible from (seed, t)
        return t, {}, f"trial {t}: {type(exc).__name__}: {exc}"


def _finalize_statistics(values, spec):
    checks = []
    trace = np.array(values.get("_trace", []))
    lag = spec.laguerre() if spec is not None else None
    if len(trace) >= 100:
        if lag is None or lag.kind == GAUSSIAN:
            n = lag.n if lag is not None else 5
            cdf = lambda x: 0.5 * (1.0 + special.erf(x / math.sqrt(2.0 * n)))
        else:
            dof = lag.beta * lag.m * lag.n
            cdf = lambda x: special.gammainc(dof / 2.0, np.maximum(x, 0.0) / 2.0)
        d, p = ks_test(trace, cdf)
        checks.append(Check("ks_trace", p > P_THRESHOLD, d, p_value=p, statistic=d, count=len(trace)))
    coef_keys = sorted((k for k in values if k.startswith("_coef_")), key=lambda k: int(k.split("_")[-1]))
    for key in coef_keys:
        j = int(key.split("_")[-1])
        dof = lag.beta * (lag.n - j)
        d, p = ks_test(values[key], lambda x, dof=dof: special.gammainc(dof / 2.0, np.maximum(x, 0.0) / 2.0))
        checks.append(Check(f"ks_coefficient_{j}", p > P_THRESHOLD, d, p_value=p, statistic=d,
                            count=len(values[key])))
    return checks


def run_suite(name: str, spec: Optional[EnsembleSpec] = None, law: Optional[ScaleLaw] = None,
              trials: int = 100, seed: int = 0, jobs: int = 1) -> VerificationReport:
    """Run one named suite (or ``"all"``).

    ``spec`` is one ensemble, a list of ensembles that trials cycle through,
    or ``None`` for the suite's default panel. ``jobs > 1`` spreads trials over worker processes; results are
    aggregated in trial order either way. ``"all"`` leaves out suites that
    cannot run in the given setting (statistics below 100 trials, the
    soft-edge Jacobian under a point-mass law).
    """
    if name == "all":
        if isinstance(spec, (list, tuple)):
            raise DomainError('"all" takes a single spec or none')
        start = time.perf_counter()
        reports = [run_suite(s, spec, law, trials, seed, jobs) for s in SUITES if _applicable(s, spec, law, trials)]
        checks, errors, specs = [], [], []
        resampled = 0
        for r in reports:
            checks.extend(Check(f"{r.suite}/{c.name}", c.passed, c.worst_error, c.tolerance, c.p_value,
                                c.statistic, c.count, c.failures) for c in r.checks)
            errors.extend(f"{r.suite}: {e}" for e in r.errors)
            specs.extend(s for s in r.specs if s not in specs)
            resampled += r.resampled
        return VerificationReport("all", seed, trials, checks, specs, reports[0].law if reports else "",
                                  resampled, errors, time.perf_counter() - start)
    if name not in _WORKERS:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    if trials < 1:
        raise DomainError("trials must be positive")
    if name == "statistics" and trials < 100:
        raise DomainError("the statistics suite needs at least 100 trials")

    start = time.perf_counter()
    if law is None:
        law = DEFAULT_LAWS.get(name, ScaleLaw.point_mass(1.0))
    if isinstance(spec, (list, tuple)):
        if not spec:
            raise DomainError("empty spec panel")
        if name == "statistics" and len(spec) > 1:
            raise DomainError("the statistics suite takes a single spec")
        panel = list(spec)
        spec = panel[0]
    else:
        panel = [spec] if spec is not None else DEFAULT_PANELS[name]
    if name == "symplectic":
        panel = [s for s in panel if s is None or s.beta == 4] or panel
    if name == "chiral":
        panel = [s for s in panel if s.kind != GAUSSIAN]
        if not panel:
            raise DomainError("the chiral suite needs a Laguerre or chiral spec")
    if name == "jacobian" and law.is_point:
        panel = [s for s in panel if s.kind != GAUSSIAN and s.hard]
        if not panel:
            raise DomainError("the soft-edge jacobian suite needs a scale law with a density")
    tasks = [(name, seed, t, panel[t % len(panel)], law) for t in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=max(1, trials // (4 * jobs))))
    else:
        results = [_run_trial(task) for task in tasks]
    results.sort(key=lambda r: r[0])

    values = defaultdict(list)
    trial_of = defaultdict(list)
    errors = []
    for t, res, err in results:
        if err:
            errors.append(err)
        for key, v in res.items():
            values[key].append(v)
            trial_of[key].append(t)

    checks = []
    if name == "statistics":
        checks = _finalize_statistics(values, spec if spec is not None else panel[0])
    else:
        for key in values:
            if key.startswith("_"):
                continue
            tol = TOLERANCES[key]
            arr = np.array(values[key], dtype=float)
            bad = ~(arr <= tol)
            failures = [trial_of[key][i] for i in np.flatnonzero(bad)[:20]]
            worst = float(np.nanmax(arr)) if not np.all(np.isnan(arr)) else math.nan
            if np.any(np.isnan(arr)):
                worst = math.inf
            checks.append(Check(key, not bad.any(), worst, tol, count=len(arr), failures=failures))
        # the additive density is unnormalized: the offset must be constant per ensemble
        groups = [k for k in values if k.startswith("_additive_offset:")]
        if groups:
            var = max(float(np.var(values[k])) for k in groups)
            tol = TOLERANCES["pushforward_additive_variance"]
            count = sum(len(values[k]) for k in groups)
            checks.append(Check("pushforward_additive_variance", var <= tol, var, tol, count=count))
    resampled = int(sum(values.get("_resampled", [])))
    specs = []
    for s in panel:
        label = s.describe() if s is not None else "random gauss(beta in {1,2,4}, n<=12)"
        if label not in specs:
            specs.append(label)
    return VerificationReport(name, seed, trials, checks, specs, law.name, resampled, errors,
                              time.perf_counter() - start)


def _applicable(suite, spec, law=None, trials=100):
    # suites that cannot run in this setting are left out of "all"
    if suite == "statistics" and trials < 100:
        return False
    if suite == "jacobian" and law is not None and law.is_point:
        if spec is None or spec.laguerre().kind == GAUSSIAN or not spec.laguerre().hard:
            return False
    if spec is None:
        return True
    lag = spec.laguerre()
    if suite == "chiral":
        return lag.kind != GAUSSIAN
    if suite == "symplectic":
        return lag.beta == 4
    return True
