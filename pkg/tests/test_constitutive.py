"""
Tests for the energy models, relative quantities, entropy recovery and
hypothesis audits.
"""
import numpy as np
import pytest

from constitutive import (
    State,
    check_growth_hypotheses,
    relative_bounds_report,
    make_model,
    recover_entropy,
    recover_entropy_values,
    relative_energy,
    relative_entropy_density,
    relative_stress,
    tilde_energy,
)
from constitutive.models import PolyconvexDet
from errors import InadmissibleState, ModelNotFound, RecoveryFailure


class TestQuadraticModel:
    """Closed-form values of the quadratic thermoelastic energy."""

    def test_values_at_identity(self, quadratic):
        F = np.eye(2)
        assert quadratic.energy(F, 0.0) == pytest.approx(1.0)
        np.testing.assert_allclose(quadratic.stress(F, 0.0), F)
        assert quadratic.temperature(F, 0.0) == pytest.approx(1.0)

    def test_hessian_is_identity(self, quadratic):
        block = quadratic.hessian(np.eye(2), 0.5)
        np.testing.assert_allclose(block.FF_matrix, np.eye(4))
        assert block.e_etaeta == pytest.approx(1.0)

    def test_batched_evaluation(self, quadratic):
        F = np.stack([np.eye(2), 2 * np.eye(2)])
        eta = np.array([0.0, 1.0])
        np.testing.assert_allclose(quadratic.energy(F, eta), [1.0, 5.5])

    def test_inadmissible_entropy(self, quadratic):
        with pytest.raises(InadmissibleState):
            quadratic.energy(np.eye(2), -2.0)

    def test_non_finite_state(self, quadratic):
        with pytest.raises(InadmissibleState):
            quadratic.stress(np.full((2, 2), np.nan), 0.0)


class TestCatalogue:
    """Model lookup by name."""

    def test_make_known_models(self):
        for name in ('quadratic', 'powerlaw', 'rank1defective'):
            assert make_model(name, dim=2).name == name
        assert make_model('polyconvex', dim=2).name == 'polyconvex'

    def test_unknown_model(self):
        with pytest.raises(ModelNotFound):
            make_model('nope')

    def test_exponent_ordering(self):
        with pytest.raises(ValueError):
            make_model('powerlaw', p=2.0, q=4.0)

    def test_polyconvex_needs_two_dimensions(self):
        with pytest.raises(ValueError):
            PolyconvexDet(dim=3)


class TestRelativeQuantities:
    """Taylor remainders around a base state."""

    def test_relative_energy_vanishes_at_base(self, powerlaw):
        z = (np.array([[1.2, 0.1], [0.0, 0.8]]), 0.3)
        assert relative_energy(powerlaw, z, z) == pytest.approx(0.0, abs=1e-12)

    def test_quadratic_relative_energy_is_half_square(self, quadratic):
        Fb = np.eye(2)
        F = Fb + np.array([[0.1, 0.0], [0.2, 0.0]])
        value = relative_energy(quadratic, (F, 0.5), (Fb, 0.2))
        assert value == pytest.approx(0.5 * (0.01 + 0.04) + 0.5 * 0.09)

    def test_relative_entropy_kinetic_part(self, quadratic):
        delta = 0.3
        U = State(np.eye(2), np.array([delta, 0.0]), 0.0)
        Ubar = State(np.eye(2), np.zeros(2), 0.0)
        assert relative_entropy_density(quadratic, U, Ubar) == pytest.approx(0.5 * delta ** 2)

    def test_relative_stress_of_quadratic_is_zero(self, quadratic):
        F = np.array([[1.5, 0.2], [0.1, 0.7]])
        np.testing.assert_allclose(relative_stress(quadratic, (F, 1.0), (np.eye(2), 0.0)), 0.0, atol=1e-14)

    def test_tilde_energy_lowers_energy(self, powerlaw):
        tilde = tilde_energy(powerlaw, 0.01, 0.01)
        F = np.array([[1.1, 0.0], [0.0, 0.9]])
        assert tilde.energy(F, 0.2) < powerlaw.energy(F, 0.2)

    def test_tilde_constants_nonnegative(self, powerlaw):
        with pytest.raises(ValueError):
            tilde_energy(powerlaw, -1.0, 0.0)


class TestEntropyRecovery:
    """Inverting the energy for the entropy."""

    def test_round_trip(self, powerlaw):
        F = np.array([[1.1, 0.2], [-0.1, 0.9]])
        v = np.array([0.3, -0.4])
        eta = 0.7
        E = powerlaw.energy(F, eta) + 0.5 * np.sum(v ** 2)
        assert recover_entropy(powerlaw, F, v, E) == pytest.approx(eta, abs=1e-10)

    def test_vectorized_round_trip(self, quadratic):
        rng = np.random.default_rng(3)
        F = np.eye(2) + 0.3 * rng.normal(size=(50, 2, 2))
        eta = rng.uniform(-0.5, 2.0, size=50)
        internal = quadratic.energy(F, eta)
        np.testing.assert_allclose(recover_entropy_values(quadratic, F, internal), eta, atol=1e-10)

    def test_energy_below_attainable_range(self, quadratic):
        with pytest.raises(RecoveryFailure):
            recover_entropy(quadratic, np.eye(2), np.zeros(2), 0.0)


class TestAudits:
    """Growth hypotheses and relative-quantity constants."""

    def test_quadratic_hypotheses_pass(self, quadratic):
        report = check_growth_hypotheses(quadratic, K=5.0, n_samples=500, seed=0)
        assert report.passed
        assert report.witness is None
        assert report.constants['lowerb_delta'] > 0

    def test_sample_count_minimum(self, quadratic):
        with pytest.raises(ValueError):
            check_growth_hypotheses(quadratic, n_samples=10)

    def test_report_summary_lists_constants(self, quadratic):
        report = check_growth_hypotheses(quadratic, n_samples=200)
        assert 'H2_upper_c' in report.summary()

    @pytest.mark.slow
    def test_quadratic_constants(self, quadratic):
        report = relative_bounds_report(quadratic, K=2.0, n_samples=400, seed=1)
        assert set(report.constants) == {'C1', 'C2', 'C3', 'C4'}
        assert all(value >= 0 for value in report.constants.values())
        assert report.constants['C3'] == pytest.approx(0.0, abs=1e-6)
