import json
import math

import numpy as np
import pytest
from scipy import special, stats

from betaperturb.ensembles import GAUSSIAN, LAGUERRE, EnsembleSpec, RngStream, ScaleLaw
from betaperturb.errors import ConditioningError, DomainError
from betaperturb.inverse import SpectralData
from betaperturb.verify import (
    FAULT_ENV,
    TOLERANCES,
    _closed_log_jacobian,
    _interior_data,
    cofactor_det,
    jacobian_fd,
    kolmogorov_sf,
    ks_test,
    log_jacobian_fd,
    multiset_distance,
    pushforward_check,
    pushforward_discrepancy,
    run_suite,
)

EXP1 = ScaleLaw.exponential(1.0)


class TestOracles:
    def test_cofactor_det_matches_lapack(self, rng):
        for n in range(1, 7):
            M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            assert cofactor_det(M) == pytest.approx(np.linalg.det(M), rel=1e-12)

    def test_multiset_distance(self):
        assert multiset_distance([1, 2j, 3], [3, 1, 2j]) == 0.0
        assert multiset_distance([1.0, 2.0], [2.0, 1.5]) == pytest.approx(0.5)


class TestFiniteDifferenceJacobian:
    def test_single_atom(self):
        # (lambda, l) -> lambda (1 + i l) has Jacobian |lambda|
        for lam in [0.3, -2.0, 5.5]:
            data = SpectralData(np.array([lam]), np.array([1.0]), 0.7)
            assert jacobian_fd(data) == pytest.approx(abs(lam), rel=1e-8)

    def test_soft_matches_closed_form(self):
        spec = EnsembleSpec(GAUSSIAN, 2.0, 4)
        for t in range(5):
            data, _ = _interior_data(spec, EXP1, RngStream(3, t))
            assert math.expm1(log_jacobian_fd(data) - _closed_log_jacobian(data)) == pytest.approx(0, abs=1e-5)

    def test_hard_matches_closed_form(self):
        spec = EnsembleSpec(LAGUERRE, 2.0, 4, 2)
        for t in range(5):
            data, _ = _interior_data(spec, EXP1, RngStream(4, t))
            assert data.w0 > 0
            assert math.expm1(log_jacobian_fd(data) - _closed_log_jacobian(data)) == pytest.approx(0, abs=1e-5)

    def test_additive_matches_closed_form(self):
        spec = EnsembleSpec(GAUSSIAN, 1.0, 3)
        data, _ = _interior_data(spec, EXP1, RngStream(6))
        fd = log_jacobian_fd(data, additive=True)
        assert math.expm1(fd - _closed_log_jacobian(data, additive=True)) == pytest.approx(0, abs=1e-5)

    def test_boundary_guard(self):
        data = SpectralData(np.array([-1.0, 1.0]), np.array([1 - 1e-6, 1e-6]), 1.0)
        with pytest.raises(ConditioningError):
            log_jacobian_fd(data)


class TestPushforward:
    @pytest.mark.parametrize("spec,law", [
        (EnsembleSpec(GAUSSIAN, 1.0, 3), EXP1),
        (EnsembleSpec(LAGUERRE, 2.0, 3, 4), EXP1),
        (EnsembleSpec(LAGUERRE, 2.0, 4, 2), ScaleLaw.point_mass(1.0)),
        (EnsembleSpec(GAUSSIAN, 4.0, 5), ScaleLaw.uniform(0.5, 3.0)),
    ], ids=["gauss", "laguerre", "hard", "uniform"])
    def test_closed_form_matches_change_of_variables(self, spec, law):
        for trial in range(10):
            assert pushforward_check(7, spec, law, trial) <= 1e-8

    def test_additive_offset_is_constant(self):
        spec = EnsembleSpec(GAUSSIAN, 2.0, 4)
        offsets = [pushforward_discrepancy(RngStream(8, t), spec, EXP1, additive=True) for t in range(20)]
        assert np.var(offsets) <= 1e-16

    def test_additive_laguerre_rejected(self):
        with pytest.raises(DomainError):
            pushforward_discrepancy(RngStream(0), EnsembleSpec(LAGUERRE, 2.0, 3, 3), EXP1, additive=True)


class TestKolmogorovSmirnov:
    def test_sf_against_scipy(self):
        for x in [0.3, 0.5, 0.8, 1.0, 1.36, 2.0, 3.0]:
            assert kolmogorov_sf(x) == pytest.approx(stats.kstwobign.sf(x), rel=1e-10, abs=1e-15)
        assert kolmogorov_sf(0.1) == 1.0
        assert kolmogorov_sf(0.0) == 1.0

    def test_uniform_samples_mostly_pass(self):
        rng = np.random.default_rng(12)
        passes = sum(ks_test(rng.uniform(size=500), lambda x: np.clip(x, 0, 1))[1] > 0.01 for _ in range(100))
        assert passes >= 95

    def test_constant_samples_fail(self):
        d, p = ks_test(np.full(200, 0.5), lambda x: np.clip(x, 0, 1))
        assert 0 <= d <= 1
        assert p < 1e-10

    def test_statistic_matches_scipy(self):
        x = np.random.default_rng(1).standard_normal(300)
        d, _ = ks_test(x, special.ndtr)
        assert d == pytest.approx(stats.kstest(x, "norm").statistic, rel=1e-12)

    def test_needs_100_samples(self):
        with pytest.raises(DomainError):
            ks_test(np.zeros(99), lambda x: x)


class TestRunSuite:
    def test_deterministic(self):
        a = run_suite("pushforward", trials=20, seed=3)
        b = run_suite("pushforward", trials=20, seed=3)
        assert a.passed
        assert a.to_json() == b.to_json()

    def test_jobs_do_not_change_results(self):
        a = run_suite("roundtrip", trials=14, seed=2)
        b = run_suite("roundtrip", trials=14, seed=2, jobs=2)
        assert a.to_json() == b.to_json()

    def test_report_json(self):
        report = run_suite("charpoly", trials=10, seed=0)
        data = json.loads(report.to_json())
        assert data["pass"] is True
        assert "wall_time" not in data
        assert {c["name"] for c in data["checks"]} >= {"charpoly_identity"}
        for c in data["checks"]:
            assert c["tolerance"] == TOLERANCES[c["name"]]
            assert c["worst_error"] <= c["tolerance"]

    @pytest.mark.parametrize("suite", ["configuration", "chiral", "symplectic"])
    def test_structural_suites_pass(self, suite):
        report = run_suite(suite, trials=12, seed=5)
        assert report.passed, report.summary_lines()

    def test_statistics_suite(self):
        report = run_suite("statistics", trials=200, seed=1)
        assert report.passed, report.summary_lines()
        assert any(c.name == "ks_trace" for c in report.checks)

    def test_statistics_needs_100_trials(self):
        with pytest.raises(DomainError):
            run_suite("statistics", trials=50)

    def test_unknown_suite(self):
        with pytest.raises(DomainError):
            run_suite("nonsense")

    def test_fault_hook_names_failures(self, monkeypatch):
        monkeypatch.setenv(FAULT_ENV, "1")
        report = run_suite("charpoly", trials=5, seed=0)
        assert not report.passed
        assert "charpoly_identity" in report.failed_checks()
        check = next(c for c in report.checks if c.name == "charpoly_identity")
        assert check.failures == [0, 1, 2, 3, 4]
        assert any(line.startswith("[FAIL]") for line in report.summary_lines())

    def test_all_prefixes_check_names(self):
        report = run_suite("all", EnsembleSpec(LAGUERRE, 2.0, 2, 3), trials=2, seed=0)
        names = [c.name for c in report.checks]
        assert all("/" in n for n in names)
        assert any(n.startswith("chiral/") for n in names)
        assert not any(n.startswith("symplectic/") for n in names)
