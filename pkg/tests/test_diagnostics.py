"""
Tests for the relative entropy series, the Gronwall fit and the weak-strong
experiment.
"""
import numpy as np
import pytest

from diagnostics import (
    RelEntropySeries,
    WeakStrongReport,
    gronwall_fit,
    growth_rate,
    reference_trajectory,
    relative_entropy_total,
    rhs_terms,
    weak_strong_experiment,
)
from errors import GridMismatch, MissingTimeDerivatives
from fields.grid import grid_coordinates, make_grid
from solver import SolverConfig, conserved_from_primitive, manufactured_solution, simulate
from solver.scheme import Trajectory


def _series(I_total, distance, times=(0.0, 1.0, 2.0)):
    n = len(times)
    return RelEntropySeries(np.asarray(times, dtype=float), np.asarray(I_total, dtype=float),
                            np.zeros(n), np.asarray(distance, dtype=float))


class _ShiftedReference:
    """A reference translated by whole cells along the first axis."""
    has_time_derivatives = True

    def __init__(self, ref, cells):
        self.ref = ref
        self.grid = ref.grid
        self.cells = cells

    def state(self, t):
        return tuple(np.roll(a, self.cells, axis=-self.grid.dim) for a in self.ref.state(t))

    def dt_state(self, t):
        return tuple(np.roll(a, self.cells, axis=-self.grid.dim) for a in self.ref.dt_state(t))


class TestRelativeEntropy:
    """Series of a trajectory against a reference."""

    def test_reference_against_itself_vanishes(self, powerlaw):
        grid = make_grid(2, 8)
        ref, _ = manufactured_solution('mms', powerlaw, grid)
        traj = reference_trajectory(ref, [0.0, 0.1, 0.2])
        series = rhs_terms(powerlaw, traj, ref)
        for values in (series.I_total, series.distance, series.lower_order,
                       series.rhs_theta, series.rhs_sigma, series.rhs_heat):
            np.testing.assert_allclose(values, 0.0, atol=1e-12)

    def test_constant_velocity_offset(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1)
        delta = 0.01
        times = [0.0, 0.5, 1.0]
        traj = Trajectory(grid1, 1)
        for t in times:
            F, v, eta = ref.state(t)
            traj.times.append(t)
            traj.states.append(conserved_from_primitive(quadratic_1d, F, v + delta, eta))
            traj.etas.append(eta)
        series = relative_entropy_total(quadratic_1d, traj, ref)
        np.testing.assert_allclose(series.I_total, 0.5 * delta ** 2, rtol=1e-10)
        np.testing.assert_allclose(series.lower_order, 2.0 * (delta * np.asarray(times)) ** 2, rtol=1e-8)

    def test_quadratic_channels_vanish(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1)
        F, v, eta = ref.state(0.0)
        traj = simulate(quadratic_1d, (F, v + 0.05, eta), SolverConfig(grid1, t_end=0.05))
        series = rhs_terms(quadratic_1d, traj, ref)
        np.testing.assert_allclose(series.rhs_theta, 0.0, atol=1e-14)
        np.testing.assert_allclose(series.rhs_sigma, 0.0, atol=1e-14)
        assert list(series.frame().columns) == ['t', 'I_total', 'lower_order', 'distance',
                                                'rhs_theta', 'rhs_sigma', 'rhs_heat']

    def test_periodic_shift_invariance(self, powerlaw):
        grid = make_grid(2, 8)
        ref, _ = manufactured_solution('mms', powerlaw, grid)
        x = grid_coordinates(grid)
        bump = np.sin(2.0 * np.pi * (x[0] + 2.0 * x[1]))
        traj = Trajectory(grid, 2)
        for t in (0.0, 0.1, 0.2):
            F, v, eta = ref.state(t)
            eta = eta + 0.05 * bump
            traj.times.append(t)
            traj.states.append(conserved_from_primitive(powerlaw, F, v + 0.02 * bump, eta))
            traj.etas.append(eta)
        shifted = Trajectory(grid, 2, times=list(traj.times),
                             states=[np.roll(W, 3, axis=-2) for W in traj.states],
                             etas=[np.roll(eta, 3, axis=-2) for eta in traj.etas])
        before = rhs_terms(powerlaw, traj, ref, r=0.5)
        after = rhs_terms(powerlaw, shifted, _ShiftedReference(ref, 3), r=0.5)
        assert np.all(before.I_total > 0.0)
        for name in ('I_total', 'rhs_theta', 'rhs_sigma', 'rhs_heat'):
            np.testing.assert_allclose(getattr(after, name), getattr(before, name), rtol=0.0, atol=1e-10)

    def test_grid_mismatch(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1)
        other, _ = manufactured_solution('linear-wave', quadratic_1d, make_grid(1, 32))
        with pytest.raises(GridMismatch):
            relative_entropy_total(quadratic_1d, reference_trajectory(other, [0.0]), ref)

    def test_reference_without_time_derivatives(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1)
        traj = reference_trajectory(ref, [0.0])
        ref.has_time_derivatives = False
        with pytest.raises(MissingTimeDerivatives):
            rhs_terms(quadratic_1d, traj, ref)


class TestGronwall:
    """Fitting the Gronwall constant and the growth rate."""

    def test_linear_growth(self):
        fit = gronwall_fit(_series([1.0, 2.0, 3.0], [1.0, 1.0, 1.0]))
        assert fit.feasible
        assert fit.C == pytest.approx(1.0)
        assert fit.binding_time == pytest.approx(1.0)
        assert np.all(fit.margins >= -1e-12)

    def test_decay_needs_no_constant(self):
        fit = gronwall_fit(_series([1.0, 0.5, 0.25], [1.0, 1.0, 1.0]))
        assert fit.C == 0.0 and fit.feasible

    def test_growth_without_distance_is_infeasible(self):
        fit = gronwall_fit(_series([1.0, 2.0, 3.0], [0.0, 0.0, 0.0]))
        assert not fit.feasible and fit.C == np.inf

    def test_floor_absorbs_growth(self):
        fit = gronwall_fit(_series([1.0, 1.5, 1.5], [0.0, 0.0, 0.0]), floor=1.0)
        assert fit.feasible and fit.C == 0.0

    def test_longer_window_never_lowers_the_constant(self):
        times = np.arange(5.0)
        I_total = [1.0, 1.5, 1.7, 2.6, 2.8]
        constants = [gronwall_fit(_series(I_total[:k], np.ones(k), times=times[:k])).C for k in range(2, 6)]
        assert all(b >= a for a, b in zip(constants, constants[1:]))
        assert constants[-1] > constants[0]

    def test_empty_series(self):
        with pytest.raises(ValueError):
            gronwall_fit(_series([], [], times=()))

    def test_growth_rate(self):
        assert growth_rate(_series(np.exp([0.0, 1.0, 2.0]), [1.0, 1.0, 1.0])) == pytest.approx(1.0)
        assert np.isnan(growth_rate(_series([0.0, 1.0, 1.0], [1.0, 1.0, 1.0])))


class TestWeakStrongReport:
    """Pass criteria of the weak-strong report."""

    def test_unstable_constant_fails(self):
        report = WeakStrongReport([], {16: 1e-3, 32: 1e-5}, {0.01: 1.0}, {0.01: True}, 2.0, {0.01: 0.9})
        assert report.uniqueness_decreasing and report.floor_ok and report.exponent_ok
        assert not report.constants_stable
        assert not report.passed
        assert report.failures() == ['Gronwall constant spread above 0.2']

    def test_finest_floor_is_bounded(self):
        report = WeakStrongReport([], {16: 1e-2, 32: 1e-3}, {0.01: 1.0}, {0.01: True}, 2.0, {0.01: 0.1})
        assert report.uniqueness_decreasing and not report.floor_ok
        assert not report.passed
        loose = WeakStrongReport([], {16: 1e-2, 32: 1e-3}, {0.01: 1.0}, {0.01: True}, 2.0, {0.01: 0.1},
                                 floor_tolerance=1e-2)
        assert loose.passed and loose.failures() == []

    def test_unvalidated_growth_is_reported(self):
        report = WeakStrongReport([], {16: 1e-5}, {0.01: 1.0, 0.1: 1.0}, {0.01: True, 0.1: False}, np.nan)
        assert report.failures() == ['growth not validated at delta=0.1']


class TestWeakStrong:
    """The (delta, mesh) experiment on the exact wave."""

    @pytest.mark.slow
    def test_small_experiment(self, quadratic_1d):
        report = weak_strong_experiment(quadratic_1d, 'linear-wave', delta_list=(0.0, 1e-2, 1e-1),
                                        mesh_list=(16, 32), t_end=0.05, amplitude=0.1)
        assert report.delta_exponent == pytest.approx(2.0, abs=1e-6)
        assert report.exponent_ok
        assert set(report.floors) == {16, 32}
        assert report.floors[32] <= report.floors[16]
        frame = report.frame()
        assert {'delta', 'n', 'I_total', 'C'} <= set(frame.columns)
        assert len(frame[frame['delta'] == 0.0]['n'].unique()) == 2
