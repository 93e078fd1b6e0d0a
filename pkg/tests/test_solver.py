"""
Tests for the finite-volume solver and the classical reference solutions.
"""
import os

import numpy as np
import pytest

from errors import CFLViolation, EnergyBoundExceeded, UnsupportedCombination
from fields.grid import make_grid
from solver import (
    SolverConfig,
    ViscousFamily,
    balance_residuals,
    clausius_duhem_residual,
    conserved_from_primitive,
    l1_error,
    manufactured_solution,
    mean_entropy_production,
    recover_primitive,
    simulate,
    step,
    viscous_family,
    write_trajectory,
)


class TestSolverConfig:
    """Validation of the solver options."""

    def test_defaults(self, grid1):
        config = SolverConfig(grid1)
        assert config.cfl == 0.45 and config.flux == 'llf' and config.time_scheme == 'ssp-rk2'

    @pytest.mark.parametrize('kwargs', [{'cfl': 0.0}, {'cfl': 1.5}, {'flux': 'roe'},
                                        {'time_scheme': 'euler'}, {'viscosity_eps': -1.0},
                                        {'record_every': 0}])
    def test_rejects_bad_options(self, grid1, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(grid1, **kwargs)


class TestReferences:
    """The exact wave and the manufactured solution satisfy the balance laws."""

    def test_linear_wave_residuals(self, quadratic_1d, grid1):
        ref, source = manufactured_solution('linear-wave', quadratic_1d, grid1, amplitude=0.1)
        assert source is None
        residuals = balance_residuals(quadratic_1d, ref, 0.3)
        assert max(residuals.values()) < 1e-9

    @pytest.mark.parametrize('fixture', ['quadratic_1d', 'powerlaw'])
    def test_manufactured_residuals(self, fixture, request):
        model = request.getfixturevalue(fixture)
        grid = make_grid(model.dim, 32)
        ref, source = manufactured_solution('mms', model, grid)
        assert source is not None
        residuals = balance_residuals(model, ref, 0.2)
        assert max(residuals.values()) < 1e-8

    def test_linear_wave_needs_quadratic_model(self, powerlaw, grid2):
        with pytest.raises(UnsupportedCombination):
            manufactured_solution('linear-wave', powerlaw, grid2)

    def test_unknown_reference(self, quadratic_1d, grid1):
        with pytest.raises(UnsupportedCombination):
            manufactured_solution('shock', quadratic_1d, grid1)


class TestSimulate:
    """Time integration of the conservative system."""

    @pytest.fixture
    def wave_run(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1, amplitude=0.1)
        traj = simulate(quadratic_1d, ref.state(0.0), SolverConfig(grid1, t_end=0.2))
        return ref, traj

    def test_energy_is_conserved(self, wave_run):
        _, traj = wave_run
        energy = traj.frame()['total_energy'].to_numpy()
        assert np.max(np.abs(energy - energy[0])) < 1e-12

    def test_entropy_does_not_decrease(self, quadratic_1d, wave_run):
        _, traj = wave_run
        assert np.all(mean_entropy_production(traj) > -1e-9)
        assert len(clausius_duhem_residual(quadratic_1d, traj)) == len(traj.times) - 1
        assert traj.frame()['min_theta'].min() > 0

    def test_frame_columns(self, wave_run):
        _, traj = wave_run
        assert list(traj.frame().columns) == ['t', 'total_energy', 'total_entropy', 'min_theta',
                                              'curl_residual', 'cd_residual']
        assert traj.times[-1] == pytest.approx(0.2)

    def test_converges_to_exact_wave(self, quadratic_1d):
        errors = []
        for n in (32, 64):
            grid = make_grid(1, n)
            ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid, amplitude=0.1)
            traj = simulate(quadratic_1d, ref.state(0.0), SolverConfig(grid, t_end=0.2))
            errors.append(l1_error(traj.states[-1], ref.conserved(0.2), grid))
        assert errors[1] < errors[0] < 0.1

    @pytest.mark.slow
    def test_first_order_convergence(self, quadratic_1d):
        meshes = (64, 128, 256)
        errors = []
        for n in meshes:
            grid = make_grid(1, n)
            ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid, amplitude=0.1)
            traj = simulate(quadratic_1d, ref.state(0.0), SolverConfig(grid, t_end=0.2, record_every=1000))
            errors.append(l1_error(traj.states[-1], ref.conserved(0.2), grid))
        order = -np.polyfit(np.log(meshes), np.log(errors), 1)[0]
        assert order >= 0.9

    def test_manufactured_solution_with_source(self, quadratic_1d):
        grid = make_grid(1, 64)
        ref, source = manufactured_solution('mms', quadratic_1d, grid)
        traj = simulate(quadratic_1d, ref.state(0.0), SolverConfig(grid, t_end=0.1, source=source))
        assert l1_error(traj.states[-1], ref.conserved(0.1), grid) < 0.05

    def test_primitive_round_trip(self, powerlaw):
        grid = make_grid(2, 8)
        ref, _ = manufactured_solution('mms', powerlaw, grid)
        F, v, eta = ref.state(0.0)
        W = conserved_from_primitive(powerlaw, F, v, eta)
        _, _, recovered = recover_primitive(powerlaw, W, 2)
        np.testing.assert_allclose(recovered, eta, atol=1e-10)

    def test_step_rejects_large_time_step(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1)
        config = SolverConfig(grid1)
        with pytest.raises(CFLViolation):
            step(quadratic_1d, ref.conserved(0.0), 1.0, config)

    def test_bad_initial_shape(self, quadratic_1d, grid1):
        with pytest.raises(ValueError):
            simulate(quadratic_1d, np.zeros((3, 8)), SolverConfig(grid1))

    def test_viscous_family_order(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1)
        with pytest.raises(ValueError):
            viscous_family(quadratic_1d, ref.state(0.0), [0.001, 0.01], SolverConfig(grid1, t_end=0.01))

    def test_viscous_family_energy_bound(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1, amplitude=0.1)
        config = SolverConfig(grid1, t_end=0.05)
        family = viscous_family(quadratic_1d, ref.state(0.0), [1e-2, 1e-3, 0.0], config)
        assert isinstance(family, ViscousFamily)
        assert len(family) == 3 and family.eps == [1e-2, 1e-3, 0.0]
        assert family.uniform
        inviscid = family.sup_energy[0.0]
        for eps in (1e-2, 1e-3):
            assert family.sup_energy[eps] == pytest.approx(inviscid, rel=0.01)
        assert list(family.frame().columns) == ['eps', 'sup_energy', 'bound']

    def test_inviscid_member_matches_simulate(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1, amplitude=0.1)
        config = SolverConfig(grid1, t_end=0.02)
        family = viscous_family(quadratic_1d, ref.state(0.0), [1e-3, 0.0], config)
        plain = simulate(quadratic_1d, ref.state(0.0), config)
        member = family[-1]
        assert member.times == plain.times
        for a, b in zip(member.states, plain.states):
            np.testing.assert_array_equal(a, b)

    def test_viscous_family_over_bound(self, quadratic_1d, grid1):
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid1, amplitude=0.1)
        config = SolverConfig(grid1, t_end=0.01)
        family = viscous_family(quadratic_1d, ref.state(0.0), [1e-2, 1e-3], config, bound=-1.0)
        assert not family.uniform
        assert family.bound == -1.0
        with pytest.raises(EnergyBoundExceeded):
            viscous_family(quadratic_1d, ref.state(0.0), [1e-2, 1e-3], config, bound=-1.0, strict=True)

    def test_write_trajectory(self, tmp_path, quadratic_1d):
        grid = make_grid(1, 8)
        ref, _ = manufactured_solution('linear-wave', quadratic_1d, grid)
        traj = simulate(quadratic_1d, ref.state(0.0), SolverConfig(grid, t_end=0.05, record_every=100))
        written = write_trajectory(traj, str(tmp_path / 'traj'))
        assert len(written) == 4 * len(traj.times) + 1
        assert os.path.exists(tmp_path / 'traj' / 'diagnostics.csv')
        assert os.path.exists(tmp_path / 'traj' / 'state_0000_eta.bin')
