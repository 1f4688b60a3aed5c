import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from betaperturb.errors import DomainError, NumericError, SizeError
from betaperturb.jacobi import JacobiMatrix
from betaperturb.numerics import (
    arg_half_period,
    canonical_order,
    log_gamma,
    poly_eval,
    poly_from_roots,
    poly_roots,
    symm_tridiag_eigen,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
nonzero_imag = st.floats(min_value=1e-6, max_value=1e6) | st.floats(min_value=-1e6, max_value=-1e-6)


class TestArgHalfPeriod:
    def test_real_is_zero(self):
        assert arg_half_period(3.7) == 0.0
        assert arg_half_period(-2.0 + 0j) == 0.0

    def test_imaginary_unit(self):
        assert arg_half_period(1j) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_lower_half_plane(self):
        assert arg_half_period(-1 - 1j) == pytest.approx(math.pi / 4, abs=1e-15)

    @pytest.mark.parametrize("bad", [complex(math.inf, 0), complex(0, math.nan), math.nan])
    def test_non_finite(self, bad):
        with pytest.raises(DomainError):
            arg_half_period(bad)

    @given(finite, nonzero_imag)
    def test_matches_arccot(self, x, y):
        z = complex(x, y)
        arccot = math.pi / 2 - math.atan(x / y)
        assert arg_half_period(z) == pytest.approx(arccot, abs=1e-12)

    @given(finite, nonzero_imag, st.floats(min_value=1e-3, max_value=1e3))
    def test_scale_invariant(self, x, y, t):
        z = complex(x, y)
        assert arg_half_period(t * z) == pytest.approx(arg_half_period(z), abs=1e-12)

    @given(finite, nonzero_imag)
    def test_conjugate_reflection(self, x, y):
        z = complex(x, y)
        assert arg_half_period(z.conjugate()) == pytest.approx(math.pi - arg_half_period(z), abs=1e-12)

    @given(finite, finite)
    def test_range(self, x, y):
        v = arg_half_period(complex(x, y))
        assert 0.0 <= v < math.pi

    def test_just_below_negative_axis_stays_below_pi(self):
        assert arg_half_period(complex(1.0, -1e-300)) < math.pi
        assert arg_half_period(complex(-1.0, -1e-300)) == pytest.approx(1e-300, rel=1e-12)


class TestPolyRoots:
    def test_linear(self):
        c = 2.5 - 1j
        roots = poly_roots([-c, 1.0])
        assert roots == pytest.approx([c])

    def test_square_root_of_one_plus_i(self):
        roots = poly_roots([-(1 + 1j), 0.0, 1.0])
        principal = cmath.sqrt(1 + 1j)
        assert principal == pytest.approx(1.098684 + 0.455090j, abs=1e-6)
        for r in roots:
            assert r * r == pytest.approx(1 + 1j, abs=1e-14)
        assert sorted(roots, key=lambda r: r.real) == pytest.approx([-principal, principal], abs=1e-14)

    def test_plus_minus_i(self):
        roots = poly_roots([1.0, 0.0, 1.0])
        assert roots == pytest.approx(np.array([-1j, 1j]), abs=1e-14)

    def test_zero_roots_kept(self):
        roots = poly_roots([0.0, 0.0, -4.0, 0.0, 1.0])
        assert np.count_nonzero(roots == 0) == 2
        assert np.sort(roots.real) == pytest.approx([-2, 0, 0, 2], abs=1e-14)

    def test_backward_error(self, rng):
        d = 20
        coeffs = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        roots = poly_roots(coeffs)
        scale = poly_eval(np.abs(coeffs), np.abs(roots))
        assert np.all(np.abs(poly_eval(coeffs, roots)) <= 1e-12 * scale)

    @pytest.mark.parametrize("d", [2, 7, 15, 30])
    def test_rebuild_coefficients(self, rng, d):
        angles = 2 * np.pi * np.arange(d) / d
        true = (1.0 + 0.5 * np.arange(d) / d) * np.exp(1j * angles)
        coeffs = poly_from_roots(true)
        roots = poly_roots(coeffs)
        rebuilt = poly_from_roots(roots)
        assert np.max(np.abs(rebuilt - coeffs)) <= 1e-8 * np.max(np.abs(coeffs))

    def test_large_coefficients_do_not_overflow(self):
        roots = np.arange(1, 31) * 10.0
        found = poly_roots(poly_from_roots(roots))
        assert len(found) == 30
        assert np.all(np.isfinite(found))

    def test_deterministic(self, rng):
        coeffs = rng.normal(size=9)
        assert np.array_equal(poly_roots(coeffs), poly_roots(coeffs))

    def test_canonical_order(self, rng):
        roots = poly_roots(rng.normal(size=9))
        assert np.array_equal(roots, canonical_order(roots))

    def test_iteration_cap(self, rng):
        with pytest.raises(NumericError) as info:
            poly_roots(rng.normal(size=12), tol=1e-300, maxiter=3)
        assert info.value.best is not None and len(info.value.best) == 11

    @pytest.mark.parametrize("coeffs", [[1.0], [1.0, 0.0]])
    def test_bad_input(self, coeffs):
        with pytest.raises((SizeError, DomainError)):
            poly_roots(coeffs)

    def test_bad_tol(self):
        with pytest.raises(DomainError):
            poly_roots([1.0, 1.0], tol=0)


class TestSymmTridiagEigen:
    def test_single(self):
        mu = symm_tridiag_eigen(JacobiMatrix([2.5], []))
        assert mu.atoms == pytest.approx([2.5])
        assert mu.weights == pytest.approx([1.0])

    def test_two_by_two(self):
        mu = symm_tridiag_eigen(JacobiMatrix([0.0, 0.0], [1.0]))
        assert mu.atoms == pytest.approx([-1.0, 1.0], abs=1e-15)
        assert mu.weights == pytest.approx([0.5, 0.5], abs=1e-15)

    @pytest.mark.parametrize("n", [5, 12, 40])
    def test_moments(self, rng, n):
        J = JacobiMatrix(rng.normal(size=n), rng.uniform(0.3, 2.0, size=n - 1))
        mu = symm_tridiag_eigen(J)
        assert np.all(np.diff(mu.atoms) > 0)
        assert np.all(mu.weights > 0)
        assert mu.weights.sum() == pytest.approx(1.0, abs=1e-14)
        M = J.dense()
        for k in range(4):
            expected = np.linalg.matrix_power(M, k)[0, 0]
            assert mu.moment(k) == pytest.approx(expected, rel=1e-11, abs=1e-11)
        # direct comparison with a dense eigensolver
        ev, vec = np.linalg.eigh(M)
        assert mu.atoms == pytest.approx(ev, abs=1e-12)
        assert mu.weights == pytest.approx(vec[0] ** 2, abs=1e-12)


class TestLogGamma:
    def test_special_values(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(2.0) == 0.0
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.nan])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            log_gamma(x)

    def test_against_scipy(self):
        xs = np.concatenate([np.geomspace(1e-3, 1e6, 400), [0.999, 1.001, 1.999, 2.001]])
        for x in xs:
            ref = special.gammaln(x)
            assert abs(log_gamma(x) - ref) <= 1e-12 * max(1.0, abs(ref)), x
