"""
Closed-form log-densities of perturbed eigenvalue configurations, the joint
densities of the spectral data they are pushed forward from, and the
normalization constants.

Everything is evaluated in log space. Products over eigenvalue pairs are
accumulated as sums of ``log|.|`` so nothing underflows for moderate ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ensembles import CHIRAL, GAUSSIAN, LAGUERRE, EnsembleSpec, ScaleLaw
from .errors import DomainError, SingularityError
from .jacobi import SpectralMeasure
from .numerics import arg_half_period_array, log_gamma
from .perturb import EigenConfiguration

__all__ = [
    "LogDensityReport",
    "log_norm_gauss",
    "log_norm_laguerre",
    "log_density_gauss_mult",
    "log_density_gauss_add",
    "log_density_laguerre_mult",
    "log_density_laguerre_hard",
    "log_density",
    "log_density_chiral",
    "log_base_density",
    "log_jacobian_multiplicative",
    "log_jacobian_hard",
    "log_jacobian_additive",
]

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class LogDensityReport:
    """A log-density value with its additive constituents.

    ``normalized`` is False whenever a constant or reference measure is
    unknown (point-mass scale laws, the additive model).
    """

    log_value: float
    normalized: bool
    terms: dict = field(default_factory=dict)

    @classmethod
    def from_terms(cls, terms: dict, normalized: bool) -> "LogDensityReport":
        return cls(float(sum(terms.values())), normalized, dict(terms))

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


# ---------------------------------------------------------------------------
# normalization constants
# ---------------------------------------------------------------------------


def log_norm_gauss(beta: float, n: int):
    """``(log g, log c, log C)`` for the Gaussian beta-ensemble.

    ``g = (2 pi)^{n/2} prod_j Gamma(1 + beta j/2) / Gamma(1 + beta/2)``,
    ``c = Gamma(beta/2)^n / Gamma(beta n/2)`` and ``C = g c 2^{n(beta/2-1)}``.
    """
    _check_beta_n(beta, n)
    lg1 = log_gamma(1 + beta / 2)
    log_g = 0.5 * n * math.log(2 * math.pi) + sum(log_gamma(1 + beta * j / 2) - lg1 for j in range(1, n + 1))
    log_c = n * log_gamma(beta / 2) - log_gamma(beta * n / 2)
    log_C = log_g + log_c + n * (beta / 2 - 1) * LOG2
    return log_g, log_c, log_C


def log_norm_laguerre(beta: float, m: int, n: int, which: Optional[str] = None):
    """``(log s, log C)`` for ``m >= n`` or ``(log t, log C)`` for ``m <= n - 1``.

    ``which`` may name the constant explicitly (``"s"`` or ``"t"``); asking
    for the one that does not belong to the regime raises ``DomainError``.
    """
    _check_beta_n(beta, n)
    if m < 1:
        raise DomainError("m must be positive")
    hard = m <= n - 1
    if which not in (None, "s", "t"):
        raise DomainError(f"unknown constant {which!r}")
    if which == "s" and hard or which == "t" and not hard:
        raise DomainError(f"constant {which} is not defined for (m, n) = ({m}, {n})")
    a = abs(m - n) + 1 - 2 / beta
    k = m if hard else n
    lg1 = log_gamma(1 + beta / 2)
    log_base = (
        k * (a * beta / 2 + 1 + (k - 1) * beta / 2) * LOG2
        + k * log_gamma(beta / 2)
        - log_gamma(beta * n / 2)
        + sum(
            log_gamma(1 + beta * j / 2) + log_gamma(1 + beta * a / 2 + beta * (j - 1) / 2) - lg1
            for j in range(1, k + 1)
        )
    )
    if hard:
        log_base += log_gamma(beta * (n - m) / 2)
    return log_base, log_base + k * (beta / 2 - 1) * LOG2


def _check_beta_n(beta, n):
    if not beta > 0:
        raise DomainError("beta must be positive")
    if n < 1:
        raise DomainError("n must be positive")


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------


def _pair_terms(z, beta):
    diff = z[:, None] - z[None, :]
    iu = np.triu_indices(len(z), 1)
    vdm = 2.0 * float(np.sum(np.log(np.abs(diff[iu]))))
    conj = np.abs(z[:, None] - np.conj(z)[None, :])
    conj_term = (beta / 2 - 1) * float(np.sum(np.log(conj)))
    return conj_term, vdm


def _gauss_exponent(z):
    # (sum Re z)^2 - sum_{j != k} Re(z_j z_k), which equals sum lambda_j^2
    s = np.sum(z)
    cross = (s * s - np.sum(z * z)).real
    return -0.5 * (s.real**2 - cross)


def _check_distinct(z):
    if len(z) > 1:
        d = np.abs(z[:, None] - z[None, :])[np.triu_indices(len(z), 1)]
        if np.any(d == 0):
            raise SingularityError("repeated eigenvalue")


def _scale_terms(l, law: Optional[ScaleLaw], power):
    terms = {"scale_power": power * math.log(l)}
    normalized = law is not None and not law.is_point
    if law is not None:
        if not law.in_support(l):
            raise DomainError(f"l = {l!r} is outside the support of the scale law {law.name}")
        if not law.is_point:
            terms["scale_density"] = law.log_pdf(l)
    return terms, normalized


def _beta_of(config, beta):
    if beta is None:
        if config.spec is None:
            raise DomainError("beta must be given when the configuration carries no ensemble spec")
        beta = config.spec.beta
    return float(beta)


def _angle_l(total):
    if not 0.0 < total < math.pi / 2:
        raise DomainError(f"angle sum {total!r} lies outside (0, pi/2): not a perturbed configuration")
    return math.tan(total)


# ---------------------------------------------------------------------------
# closed-form configuration densities
# ---------------------------------------------------------------------------


def log_density_gauss_mult(config: EigenConfiguration, law: Optional[ScaleLaw] = None,
                           beta: Optional[float] = None) -> LogDensityReport:
    """Joint log-density of the eigenvalues of ``(I + il e1 e1*) J``, ``J``
    Gaussian, with ``l = tan(sum Arg_[0,pi) z_j)``.

    With a point-mass ``law`` (or none) the ``F(l)`` factor is dropped and the
    result is flagged unnormalized.
    """
    beta = _beta_of(config, beta)
    z = config.z
    n = len(z)
    if n == 0:
        raise DomainError("empty configuration")
    if np.any(z.imag == 0):
        raise SingularityError("eigenvalue on the real axis")
    _check_distinct(z)
    l = _angle_l(float(np.sum(arg_half_period_array(z))))
    re_prod = np.prod(z).real
    if re_prod == 0:
        raise SingularityError("Re(prod z) vanishes")
    conj_term, vdm = _pair_terms(z, beta)
    terms = {
        "exponential": _gauss_exponent(z),
        "re_product": -(beta / 2) * math.log(abs(re_prod)),
        "conjugate_pairs": conj_term,
        "vandermonde": vdm,
        "normalization": -log_norm_gauss(beta, n)[2],
    }
    scale, normalized = _scale_terms(l, law, 1 - beta * n / 2)
    terms.update(scale)
    return LogDensityReport.from_terms(terms, normalized)


def log_density_gauss_add(config: EigenConfiguration, law: Optional[ScaleLaw] = None,
                          beta: Optional[float] = None) -> LogDensityReport:
    """Unnormalized joint log-density of the eigenvalues of ``J + il e1 e1*``,
    ``J`` Gaussian, with ``l = sum Im z_j``. The constant is not included."""
    beta = _beta_of(config, beta)
    z = config.z
    n = len(z)
    if n == 0:
        raise DomainError("empty configuration")
    if np.any(z.imag <= 0):
        raise DomainError("additive configurations live in the open upper half-plane")
    _check_distinct(z)
    l = float(np.sum(z.imag))
    conj_term, vdm = _pair_terms(z, beta)
    terms = {"exponential": _gauss_exponent(z), "conjugate_pairs": conj_term, "vandermonde": vdm}
    scale, _ = _scale_terms(l, law, 1 - beta * n / 2)
    terms.update(scale)
    return LogDensityReport.from_terms(terms, False)


def log_density_laguerre_mult(config: EigenConfiguration, beta: float, m: int, n: int,
                              law: Optional[ScaleLaw] = None) -> LogDensityReport:
    """Joint log-density of the perturbed Laguerre spectrum for ``m >= n``,
    with ``l = tan(sum Arg z_j)``."""
    if m < n:
        raise DomainError("the m >= n density needs m >= n")
    z = config.z
    if len(z) != n:
        raise DomainError(f"expected {n} eigenvalues, got {len(z)}")
    if np.any(z.imag <= 0):
        raise DomainError("Laguerre configurations live in the open upper half-plane")
    _check_distinct(z)
    l = _angle_l(float(np.sum(np.angle(z))))
    re_prod = np.prod(z).real
    if re_prod == 0:
        raise SingularityError("Re(prod z) vanishes")
    a = abs(m - n) + 1 - 2 / beta
    conj_term, vdm = _pair_terms(z, beta)
    terms = {
        "exponential": -0.5 * float(np.sum(z.real)),
        "re_product": (a * beta / 2 - beta / 2) * math.log(abs(re_prod)),
        "conjugate_pairs": conj_term,
        "vandermonde": vdm,
        "normalization": -log_norm_laguerre(beta, m, n)[1],
    }
    scale, normalized = _scale_terms(l, law, 1 - beta * n / 2)
    terms.update(scale)
    return LogDensityReport.from_terms(terms, normalized)


def log_density_laguerre_hard(config: EigenConfiguration, beta: float, m: int, n: int,
                              l: Optional[float] = None) -> LogDensityReport:
    """Joint log-density of the ``m`` nonzero eigenvalues for ``m <= n - 1``
    at fixed ``l`` (defaults to ``config.l``)."""
    if m > n - 1:
        raise DomainError("the rank-deficient density needs m <= n - 1")
    l = config.l if l is None else float(l)
    if not l > 0:
        raise DomainError("l must be positive")
    z = config.z
    if len(z) != m:
        raise DomainError(f"expected {m} nonzero eigenvalues, got {len(z)}")
    if np.any(z.imag <= 0):
        raise DomainError("Laguerre configurations live in the open upper half-plane")
    if not float(np.sum(np.angle(z))) < math.atan(l):
        raise DomainError("argument sum must stay below arctan(l)")
    _check_distinct(z)
    prod = np.prod(z)
    defect = abs(prod.imag - l * prod.real)
    exponent = beta * (n - m) / 2 - 1
    if defect == 0 and exponent != 0:
        raise SingularityError("Im(prod z) - l Re(prod z) vanishes")
    conj_term, vdm = _pair_terms(z, beta)
    terms = {
        "scale_power": (1 - beta * n / 2) * math.log(l),
        "exponential": -0.5 * float(np.sum(z.real)),
        "defect": exponent * math.log(defect) if exponent != 0 else 0.0,
        "conjugate_pairs": conj_term,
        "vandermonde": vdm,
        "normalization": -log_norm_laguerre(beta, m, n)[1],
    }
    return LogDensityReport.from_terms(terms, True)


def log_density(config: EigenConfiguration, law: Optional[ScaleLaw] = None) -> LogDensityReport:
    """Dispatch on ``config.spec`` and ``config.kind`` to the matching closed form."""
    spec = config.spec
    if spec is None:
        raise DomainError("configuration carries no ensemble spec")
    if config.kind == "additive":
        if spec.kind != GAUSSIAN:
            raise DomainError("only the Gaussian additive density is available")
        return log_density_gauss_add(config, law)
    if spec.kind == CHIRAL:
        return log_density_chiral(config, law)
    if spec.kind == GAUSSIAN:
        return log_density_gauss_mult(config, law)
    if spec.hard:
        return log_density_laguerre_hard(config, spec.beta, spec.m, spec.n)
    return log_density_laguerre_mult(config, spec.beta, spec.m, spec.n, law)


def log_density_chiral(config: EigenConfiguration, law: Optional[ScaleLaw] = None) -> LogDensityReport:
    """Density of the right-half-plane representatives ``zeta_j`` of a
    perturbed chiral spectrum.

    The nonzero eigenvalues come in pairs ``+-zeta_j`` with ``zeta_j**2``
    the perturbed Laguerre spectrum, so the density is the Laguerre one at
    ``zeta**2`` times ``prod |2 zeta_j|^2``.
    """
    spec = config.spec
    if spec is None or spec.kind != CHIRAL:
        raise DomainError("expected a chiral configuration")
    z = config.z
    right = z[z.real > 0]
    if 2 * len(right) != len(z):
        raise DomainError("chiral spectrum is not symmetric under z -> -z")
    lag = EnsembleSpec(LAGUERRE, spec.beta, spec.n, spec.m)
    structural = 1 if lag.hard else 0
    inner = EigenConfiguration(right**2, config.l, lag, structural, config.kind)
    base = log_density(inner, law)
    terms = dict(base.terms)
    terms["square_root_jacobian"] = float(np.sum(2.0 * np.log(2.0 * np.abs(right))))
    return LogDensityReport.from_terms(terms, base.normalized)


# ---------------------------------------------------------------------------
# densities of the spectral data
# ---------------------------------------------------------------------------


def _log_vdm(lam):
    if len(lam) < 2:
        return 0.0
    d = np.abs(lam[:, None] - lam[None, :])[np.triu_indices(len(lam), 1)]
    return float(np.sum(np.log(d)))


def log_base_density(mu: SpectralMeasure, spec: EnsembleSpec, l: Optional[float] = None,
                     law: Optional[ScaleLaw] = None) -> LogDensityReport:
    """Joint log-density of ``(lambda, w[, w0], l)``.

    For the Gaussian and ``m >= n`` Laguerre regimes ``l`` is random with law
    ``law`` and ``log F(l)`` is included when the law has a density. In the
    rank-deficient regime ``l`` is a fixed parameter and does not enter.
    """
    spec = spec.laguerre()
    beta = spec.beta
    terms = {}
    if spec.kind == GAUSSIAN:
        lam, w = mu.atoms, mu.weights
        if len(lam) != spec.n:
            raise DomainError(f"expected {spec.n} atoms, got {len(lam)}")
        log_g, log_c, _ = log_norm_gauss(beta, spec.n)
        terms["gaussian"] = -0.5 * float(np.sum(lam**2))
        terms["normalization"] = -(log_g + log_c)
    else:
        a = spec.a
        if spec.hard:
            if not mu.has_zero_atom:
                raise DomainError("rank-deficient regime needs a measure with a pinned zero atom")
            lam, w = mu.nonzero_atoms, mu.nonzero_weights
            if len(lam) != spec.m:
                raise DomainError(f"expected {spec.m} nonzero atoms, got {len(lam)}")
            terms["zero_weight"] = (beta * (spec.n - spec.m) / 2 - 1) * math.log(mu.w0)
        else:
            lam, w = mu.atoms, mu.weights
            if len(lam) != spec.n:
                raise DomainError(f"expected {spec.n} atoms, got {len(lam)}")
        if np.any(lam <= 0):
            raise DomainError("Laguerre atoms must be positive")
        terms["laguerre"] = float(np.sum(beta * a / 2 * np.log(lam) - lam / 2))
        terms["normalization"] = -log_norm_laguerre(beta, spec.m, spec.n)[0]
    terms["vandermonde"] = beta * _log_vdm(lam)
    terms["weights"] = (beta / 2 - 1) * float(np.sum(np.log(w)))

    if spec.kind != GAUSSIAN and spec.hard:
        return LogDensityReport.from_terms(terms, True)
    normalized = False
    if law is not None and not law.is_point:
        if l is None:
            raise DomainError("l is required to evaluate F(l)")
        if not law.in_support(l):
            raise DomainError(f"l = {l!r} is outside the support of the scale law")
        terms["scale_density"] = law.log_pdf(l)
        normalized = True
    return LogDensityReport.from_terms(terms, normalized)


# ---------------------------------------------------------------------------
# closed-form Jacobians of the forward maps
# ---------------------------------------------------------------------------


def _log_zdiff(z):
    z = np.asarray(z, dtype=complex)
    if len(z) < 2:
        return 0.0
    d = np.abs(z[:, None] - z[None, :])[np.triu_indices(len(z), 1)]
    return float(np.sum(np.log(d)))


def log_jacobian_multiplicative(lam, z, l: float) -> float:
    """log |d(Re z, Im z) / d(lambda, w_1..w_{n-1}, l)| for the multiplicative map:
    ``l^{n-1} prod|lambda_j - lambda_k|^2 / prod|z_j - z_k|^2 * |prod lambda|``."""
    lam = np.asarray(lam, dtype=float)
    n = len(lam)
    return ((n - 1) * math.log(l) + 2 * _log_vdm(lam) - 2 * _log_zdiff(z)
            + float(np.sum(np.log(np.abs(lam)))))


def log_jacobian_hard(lam, z, l: float) -> float:
    """log |d(Re z, Im z) / d(lambda_1..lambda_m, w_1..w_m)| at fixed ``l`` for a
    measure with an atom at 0 (``lam`` are the nonzero atoms)."""
    lam = np.asarray(lam, dtype=float)
    m = len(lam)
    return (m * math.log(l) + 2 * _log_vdm(lam) - 2 * _log_zdiff(z)
            + float(np.sum(np.log(np.abs(lam)))))


def log_jacobian_additive(lam, z, l: float) -> float:
    """log |d(Re z, Im z) / d(lambda, w_1..w_{n-1}, l)| for ``J + il e1 e1*``:
    ``l^{n-1} prod|lambda_j - lambda_k|^2 / prod|z_j - z_k|^2``."""
    lam = np.asarray(lam, dtype=float)
    n = len(lam)
    return (n - 1) * math.log(l) + 2 * _log_vdm(lam) - 2 * _log_zdiff(z)
