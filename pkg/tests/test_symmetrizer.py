"""
Tests for the conservation-law structure, the symmetrizer and the
wave-speed bounds.
"""
import numpy as np
import pytest

from constitutive import State, make_model
from symmetrizer import (
    acoustic_speed,
    check_symmetrizability,
    conserved_vector,
    entropy_pair_residual,
    legendre_hadamard_minimum,
    max_wave_speed,
    random_admissible_states,
    report_frame,
    sobol_directions,
    symmetrizer_matrix,
)
from utils.transformations import state_size


class TestStructure:
    """Conserved vector and the entropy-flux pair."""

    def test_conserved_vector_layout(self, quadratic):
        W = conserved_vector(quadratic, np.eye(2), np.array([1.0, 0.0]), 0.0)
        assert W.shape == (state_size(2),)
        np.testing.assert_allclose(W, [1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.5])

    @pytest.mark.parametrize('fixture', ['quadratic', 'powerlaw'])
    def test_entropy_pair_identities(self, fixture, request):
        model = request.getfixturevalue(fixture)
        report = entropy_pair_residual(model, n_samples=10, seed=0)
        assert report.states_checked == 10
        assert report.max_residual < 1e-5

    def test_random_states_are_admissible(self, powerlaw):
        states = random_admissible_states(powerlaw, 25, np.random.default_rng(0))
        assert len(states) == 25
        assert all(powerlaw.is_admissible(U.F, U.eta) for U in states)


class TestSymmetrizer:
    """Positivity on the full space and on the wave cone."""

    def test_quadratic_symmetrizer_is_scaled_identity(self, quadratic):
        result = symmetrizer_matrix(quadratic, np.eye(2), 1.0)
        assert result.theta == pytest.approx(2.0)
        np.testing.assert_allclose(result.matrix, 0.5 * np.eye(7))

    def test_full_mode(self, quadratic):
        U = State(np.eye(2), np.zeros(2), 0.0)
        result = check_symmetrizability(quadratic, U, mode='full')
        assert result.min_eig_full == pytest.approx(1.0)
        assert result.witness.shape == (7,)

    def test_defective_model_fails_on_the_cone(self, defective):
        U = State(np.eye(2), np.zeros(2), 0.0)
        result = check_symmetrizability(defective, U, mode='wave_cone', n_dirs=256, seed=0)
        assert result.min_eig_full == pytest.approx(-1.0)
        assert result.min_quotient_cone < -0.9
        w = result.witness
        assert w @ result.matrix @ w == pytest.approx(result.min_quotient_cone)

    def test_polyconvex_cone_positive_where_full_fails(self):
        model = make_model('polyconvex', beta=0.0, gamma=2.0)
        U = State(np.zeros((2, 2)), np.zeros(2), 0.0)
        result = check_symmetrizability(model, U, mode='wave_cone', n_dirs=256, seed=1)
        assert result.min_eig_full < 0
        assert result.min_quotient_cone > 0

    def test_unknown_mode(self, quadratic):
        with pytest.raises(ValueError):
            check_symmetrizability(quadratic, State(np.eye(2), np.zeros(2), 0.0), mode='nope')

    def test_report_frame(self, quadratic):
        U = State(np.eye(2), np.zeros(2), 0.0)
        frame = report_frame([U], [check_symmetrizability(quadratic, U)])
        assert list(frame.columns[:3]) == ['F', 'v', 'eta']
        assert frame.loc[0, 'min_eig_full'] == pytest.approx(1.0)


class TestDirectionsAndSpeeds:
    """Sobol directions, Legendre-Hadamard minimum and wave speeds."""

    def test_sobol_directions_are_unit(self):
        dirs = sobol_directions(4, 64, seed=3)
        assert dirs.shape == (64, 4)
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)

    def test_legendre_hadamard(self, quadratic, defective):
        value, _, _ = legendre_hadamard_minimum(quadratic, np.eye(2), 0.0)
        assert value == pytest.approx(1.0)
        value, a, n = legendre_hadamard_minimum(defective, np.eye(2), 0.0)
        assert value == pytest.approx(-1.0, abs=1e-2)
        assert abs(a[0]) == pytest.approx(1.0, abs=0.05)

    def test_acoustic_speed(self, quadratic):
        assert acoustic_speed(quadratic, np.eye(2), 0.0) == pytest.approx(1.1)

    def test_max_wave_speed_matches_acoustic(self, quadratic_1d):
        U = State(np.array([[1.0]]), np.array([0.2]), 0.5)
        assert max_wave_speed(quadratic_1d, U) == pytest.approx(1.1, rel=1e-3)
