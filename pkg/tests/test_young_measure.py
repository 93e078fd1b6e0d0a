"""
Tests for empirical Young measures, concentration mass, measure-valued
residuals and time localization.
"""
import numpy as np
import pandas as pd
import pytest

from errors import GridMismatch, UnqueryableInput, UnresolvableScale
from fields.grid import make_grid
from young_measure import (
    SequenceSpec,
    SpaceTimeSequence,
    barycenter,
    concentration_mass,
    dirac_measure,
    empirical_young_measure,
    generate_members,
    merge_atoms,
    mv_residuals,
    time_localize,
    wasserstein1_per_cell,
    write_eym_csv,
    ym_pair,
)

A = np.array([1.5, 0.0, 0.0])
B = np.array([0.5, 0.0, 0.0])


@pytest.fixture
def laminate_spec():
    return SequenceSpec('laminate', (1.0 / 32, 1.0 / 64), subgrid=32, dim=1,
                        params={'A': A, 'B': B, 'fraction': 0.25})


class TestSequenceSpec:
    """Validation of sequence descriptions."""

    def test_scales_must_descend(self):
        with pytest.raises(ValueError):
            SequenceSpec('laminate', (1.0 / 64, 1.0 / 32))

    def test_unknown_generator(self):
        with pytest.raises(ValueError):
            SequenceSpec('fractal', (0.1,))

    def test_unresolvable_scale(self):
        spec = SequenceSpec('laminate', (1.0 / 1024,), subgrid=4, dim=1, params={'A': A, 'B': B})
        with pytest.raises(UnresolvableScale):
            generate_members(spec, make_grid(1, 16))

    def test_dimension_mismatch(self, laminate_spec):
        with pytest.raises(GridMismatch):
            generate_members(laminate_spec, make_grid(2, 16))


class TestEmpiricalMeasure:
    """Atoms and weights of laminate and concentrating sequences."""

    def test_laminate_weights(self, laminate_spec):
        nu = empirical_young_measure(laminate_spec, make_grid(1, 16))
        assert np.all(nu.atom_counts() == 2)
        for atoms, weights in zip(nu.atoms, nu.weights):
            order = np.argsort(atoms[:, 0])
            np.testing.assert_allclose(atoms[order], np.stack([B, A]))
            np.testing.assert_allclose(weights[order], [0.75, 0.25])

    def test_barycenter_and_energy(self, laminate_spec, quadratic_1d):
        nu = empirical_young_measure(laminate_spec, make_grid(1, 16))
        F, v, eta = barycenter(nu)
        np.testing.assert_allclose(F.values, 0.75)
        np.testing.assert_allclose(v.values, 0.0)
        np.testing.assert_allclose(ym_pair(nu, 'energy', quadratic_1d).values, 0.375)

    def test_unknown_pairing(self, laminate_spec):
        nu = empirical_young_measure(laminate_spec, make_grid(1, 16))
        with pytest.raises(ValueError):
            ym_pair(nu, 'entropy_flux')

    def test_pairing_needs_model(self, laminate_spec):
        nu = empirical_young_measure(laminate_spec, make_grid(1, 16))
        with pytest.raises(ValueError):
            ym_pair(nu, 'temperature')

    def test_f_eta_subspace_drops_velocity(self, laminate_spec):
        nu = empirical_young_measure(laminate_spec, make_grid(1, 16), subspace='F-eta')
        assert nu.component_names() == ['F11', 'eta']
        assert barycenter(nu)[1] is None

    def test_merge_atoms(self):
        values = np.array([[1.0, 0.0], [1.0 + 1e-9, 0.0], [2.0, 0.0], [1.0, 0.0]])
        atoms, weights = merge_atoms(values)
        assert len(atoms) == 2
        np.testing.assert_allclose(sorted(weights), [0.25, 0.75])

    def test_wasserstein_of_identical_measures(self, laminate_spec):
        nu = empirical_young_measure(laminate_spec, make_grid(1, 16))
        np.testing.assert_allclose(wasserstein1_per_cell(nu, nu), 0.0)

    def test_csv_has_one_row_per_atom(self, tmp_path, laminate_spec):
        nu = empirical_young_measure(laminate_spec, make_grid(1, 16))
        frame = pd.read_csv(write_eym_csv(nu, str(tmp_path / 'eym.csv')))
        assert list(frame.columns) == ['i0', 'F11', 'v1', 'eta', 'weight']
        assert len(frame) == 32


class TestConcentration:
    """Energy carried by a concentrating spike."""

    def test_spike_mass(self, quadratic_1d):
        spec = SequenceSpec('concentrator', (1.0 / 64, 1.0 / 128), subgrid=64, dim=1,
                            params={'component': 1})
        grid = make_grid(1, 16)
        members = generate_members(spec, grid)
        nu = empirical_young_measure(spec, grid, members=members)
        report = concentration_mass(spec, nu, quadratic_1d, members)
        assert report.total == pytest.approx(0.5)
        assert report.mass.values[0] == pytest.approx(0.5)
        assert report.peak_cell == (0,)
        assert report.cauchy
        assert report.clamped == 0
        assert report.excluded_weight == pytest.approx(0.125)

    def test_laminate_has_no_concentration(self, laminate_spec, quadratic_1d):
        grid = make_grid(1, 16)
        nu = empirical_young_measure(laminate_spec, grid)
        report = concentration_mass(laminate_spec, nu, quadratic_1d)
        assert report.total == pytest.approx(0.0, abs=1e-12)


class TestMeasureValuedResiduals:
    """Weak residuals of Dirac measures of uniform states."""

    @staticmethod
    def _series(grid, velocity, times):
        F = np.ones((1, 1) + grid.shape)
        eta = np.zeros(grid.shape)
        return [(t, dirac_measure(grid, F, np.full((1,) + grid.shape, velocity(t)), eta)) for t in times]

    def test_uniform_state_is_a_solution(self, quadratic_1d):
        grid = make_grid(1, 8)
        series = self._series(grid, lambda t: 0.0, np.linspace(0.0, 1.0, 101))
        report = mv_residuals(series, None, quadratic_1d)
        assert report.passed(1e-10)

    def test_momentum_violation_is_measured(self, quadratic_1d):
        grid = make_grid(1, 8)
        c = 0.2
        series = self._series(grid, lambda t: c * t, np.linspace(0.0, 1.0, 401))
        report = mv_residuals(series, None, quadratic_1d)
        first = report.rows[(report.rows.test == 0) & (report.rows.row == 'v1')].residual.iloc[0]
        assert first == pytest.approx(0.5 * c, rel=1e-3)
        assert report.energy_violation == pytest.approx(0.5 * c ** 2)

    def test_gamma_must_be_nonnegative(self, quadratic_1d):
        grid = make_grid(1, 8)
        series = self._series(grid, lambda t: 0.0, [0.0, 1.0])
        with pytest.raises(ValueError):
            mv_residuals(series, [0.0, -1.0], quadratic_1d)


class TestTimeLocalization:
    """Localizing a stationary oscillating sequence."""

    @staticmethod
    def _sequence(amplitude=0.3):
        def displacement(scale, t, points):
            return amplitude * scale / (2.0 * np.pi) * np.sin(2.0 * np.pi * points / scale)

        def entropy(scale, t, points):
            return np.zeros(points.shape[1:])

        def limit(t, points):
            return np.zeros_like(points)

        return SpaceTimeSequence((1.0 / 8, 1.0 / 16, 1.0 / 32), displacement, entropy, subgrid=32, limit=limit)

    def test_stationary_sequence(self):
        _, report = time_localize(self._sequence(), 0.5, 10.0, make_grid(1, 8))
        assert report.max_w1 == pytest.approx(0.0, abs=1e-10)
        assert report.matches_slice and report.equiintegrable and report.converging
        assert report.lp_distances[1] == pytest.approx(0.5 * report.lp_distances[0], rel=1e-6)

    def test_localized_spec_carries_members(self):
        spec, _ = time_localize(self._sequence(), 0.5, 10.0, make_grid(1, 8))
        assert spec.generator == 'custom'
        assert set(spec.params['members']) == {1.0 / 8, 1.0 / 16, 1.0 / 32}

    def test_boundary_time(self):
        with pytest.raises(UnqueryableInput):
            time_localize(self._sequence(), 0.0, 10.0, make_grid(1, 8))

    def test_unqueryable_member(self):
        seq = SpaceTimeSequence((0.25,), lambda s, t, x: np.zeros(3), lambda s, t, x: np.zeros(x.shape[1:]))
        with pytest.raises(UnqueryableInput):
            time_localize(seq, 0.5, 10.0, make_grid(1, 8))
