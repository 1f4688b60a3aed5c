import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betaperturb.ensembles import GAUSSIAN, LAGUERRE, EnsembleSpec, RngStream, sample_jacobi
from betaperturb.errors import ConsistencyError, DomainError, SingularityError
from betaperturb.inverse import averaged_polynomial, recover, recover_spectral_data, recover_spectral_data_hard
from betaperturb.jacobi import SpectralMeasure, jacobi_to_measure
from betaperturb.numerics import poly_from_roots, poly_roots
from betaperturb.perturb import ADDITIVE, EigenConfiguration, perturbed_spectrum, spectrum_from_measure


def test_single_eigenvalue():
    data = recover_spectral_data(EigenConfiguration([1 + 1j], 0.0))
    assert data.l == pytest.approx(1.0, rel=1e-15)
    np.testing.assert_allclose(data.lam, [1.0], rtol=1e-15)
    np.testing.assert_allclose(data.w, [1.0], rtol=1e-15)


def test_symmetric_pair():
    r = np.sqrt(1 + 1j)
    data = recover_spectral_data(EigenConfiguration([r, -r], 1.0))
    assert data.l == pytest.approx(1.0, rel=1e-14)
    np.testing.assert_allclose(data.lam, [-1.0, 1.0], rtol=1e-14)
    np.testing.assert_allclose(data.w, [0.5, 0.5], rtol=1e-14)


def test_averaged_polynomial_is_real_part():
    z = np.array([1 + 2j, -0.5 + 0.1j, 3 - 0.4j])
    avg = averaged_polynomial(z)
    assert np.max(np.abs(avg.imag)) <= 1e-14
    np.testing.assert_allclose(avg.real, poly_from_roots(z).real, rtol=1e-14)


@pytest.mark.parametrize("spec", [EnsembleSpec(GAUSSIAN, 1.0, 6), EnsembleSpec(LAGUERRE, 2.0, 5, 7)],
                         ids=lambda s: s.describe())
def test_averaged_polynomial_has_real_roots(spec):
    for trial in range(20):
        stream = RngStream(11, trial)
        config = perturbed_spectrum(sample_jacobi(spec, stream), 0.5 + trial / 10, spec)
        roots = poly_roots(averaged_polynomial(config.z).real)
        assert np.max(np.abs(roots.imag)) <= 1e-8 * (1 + np.max(np.abs(roots)))


@pytest.mark.parametrize("spec", [EnsembleSpec(GAUSSIAN, 2.0, 4), EnsembleSpec(GAUSSIAN, 0.5, 8),
                                  EnsembleSpec(LAGUERRE, 1.0, 4, 6)], ids=lambda s: s.describe())
def test_roundtrip(spec):
    for trial in range(25):
        stream = RngStream(5, trial)
        mu = jacobi_to_measure(sample_jacobi(spec, stream))
        l = float(stream.generator.exponential())
        data = recover(spectrum_from_measure(mu, l, spec))
        assert data.l == pytest.approx(l, rel=1e-8)
        np.testing.assert_allclose(data.lam, mu.atoms, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(data.w, mu.weights, rtol=1e-6, atol=1e-10)
        assert data.w.sum() == pytest.approx(1.0, abs=1e-15)


def test_hard_single_atom():
    # m = 1, zero atom of weight w0 and atom at 2 of weight 1 - w0
    l, w0 = 1.5, 0.3
    mu = SpectralMeasure([0.0, 2.0], [w0, 1 - w0], has_zero_atom=True)
    config = spectrum_from_measure(mu, l, EnsembleSpec(LAGUERRE, 2.0, 2, 1))
    assert config.zero_count == 1
    data = recover_spectral_data_hard(config)
    assert data.w0 == pytest.approx(w0, rel=1e-12)
    np.testing.assert_allclose(data.lam, [2.0], rtol=1e-12)
    np.testing.assert_allclose(data.w, [1 - w0], rtol=1e-12)
    np.testing.assert_allclose(data.measure().atoms, [0.0, 2.0], atol=1e-12)


def test_hard_roundtrip():
    spec = EnsembleSpec(LAGUERRE, 2.0, 5, 3)
    for trial in range(25):
        stream = RngStream(9, trial)
        J = sample_jacobi(spec, stream)
        mu = jacobi_to_measure(J).pin_zero_atom()
        config = perturbed_spectrum(J, 1.0, spec)
        data = recover(config)
        assert len(data.lam) == spec.m
        keep = mu.atoms != 0
        np.testing.assert_allclose(data.lam, mu.atoms[keep], rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(data.w, mu.weights[keep], rtol=1e-6, atol=1e-10)
        assert data.w0 == pytest.approx(mu.weights[~keep][0], rel=1e-6, abs=1e-10)


def test_hard_boundary():
    # the argument sum approaching arctan l drives w0 to zero
    l = 1.0
    for gap in [1e-2, 1e-5]:
        theta = math.atan(l) - gap
        data = recover_spectral_data_hard(EigenConfiguration([complex(math.cos(theta), math.sin(theta))], l), l)
        assert 0 < data.w0 < 2 * gap
    on_boundary = EigenConfiguration([complex(1.0, 1.0)], l)
    with pytest.raises(ConsistencyError):
        recover_spectral_data_hard(on_boundary, l)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1), st.floats(0.05, 20.0))
def test_signed_weights_positive(n, seed, l):
    spec = EnsembleSpec(GAUSSIAN, 2.0, n)
    mu = jacobi_to_measure(sample_jacobi(spec, RngStream(seed)))
    data = recover_spectral_data(spectrum_from_measure(mu, l, spec))
    assert np.all(data.w > 0)
    assert data.l == pytest.approx(l, rel=1e-7)


class TestErrors:
    def test_empty(self):
        with pytest.raises(DomainError):
            recover_spectral_data(EigenConfiguration([], 1.0))
        with pytest.raises(DomainError):
            recover_spectral_data_hard(EigenConfiguration([], 1.0))

    def test_vanishing_real_product(self):
        with pytest.raises(SingularityError):
            recover_spectral_data(EigenConfiguration([2j], 1.0))

    def test_negative_l(self):
        with pytest.raises(ConsistencyError):
            recover_spectral_data(EigenConfiguration([1 - 1j], 1.0))

    def test_nonreal_atoms(self):
        # l > 0 but the real-part polynomial x^2 - 2.2 x + 2.2 has complex roots
        with pytest.raises(ConsistencyError):
            recover_spectral_data(EigenConfiguration([1 + 1j, 1.2 - 1j], 1.0))

    def test_hard_bad_l(self):
        with pytest.raises(DomainError):
            recover_spectral_data_hard(EigenConfiguration([1 + 1j], 1.0), -1.0)

    def test_additive(self):
        with pytest.raises(DomainError):
            recover(EigenConfiguration([1 + 1j], 1.0, EnsembleSpec(GAUSSIAN, 2.0, 1), 0, ADDITIVE))
