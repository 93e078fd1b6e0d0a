"""
Tests for grids, spectral calculus and the GridField binary format.
"""
import numpy as np
import pytest

from errors import FormatVersionMismatch, GridMismatch, InvalidDimension, InvalidResolution
from fields.grid import (
    GridField,
    grid_coordinates,
    make_grid,
    quadrature,
    truncate_tau,
    truncate_tau_field,
    v_aux,
    vp_norm_sq,
    zero_field,
)
from fields.io import decode_grid_field, encode_grid_field, read_grid_field, write_grid_field
from fields.spectral import (
    centered_gradient,
    curl_residual,
    helmholtz_curl_free,
    recover_potential,
    spectral_divergence,
    spectral_gradient,
)


class TestMakeGrid:
    """Validation of dimension and resolution."""

    def test_valid_grid(self):
        grid = make_grid(2, 16)
        assert grid.shape == (16, 16)
        assert grid.cell_count == 256
        assert grid.cell_volume == pytest.approx(1.0 / 256)

    @pytest.mark.parametrize('dim', [0, 4])
    def test_bad_dimension(self, dim):
        with pytest.raises(InvalidDimension):
            make_grid(dim, 16)

    @pytest.mark.parametrize('n', [2, 6, 24, 8192])
    def test_bad_resolution(self, n):
        with pytest.raises(InvalidResolution):
            make_grid(1, n)

    def test_coordinates_are_cell_centres(self):
        x = grid_coordinates(make_grid(1, 4))
        np.testing.assert_allclose(x[0], [0.125, 0.375, 0.625, 0.875])


class TestAuxiliaryFunctions:
    """V_i, truncation and quadrature."""

    def test_v_aux(self):
        assert v_aux(np.array([3.0, 4.0]), 2) == pytest.approx(np.sqrt(50.0))
        assert v_aux(np.zeros(3), 4) == 0.0

    def test_v_aux_rejects_small_exponent(self):
        with pytest.raises(ValueError):
            v_aux(1.0, 1)

    def test_truncate_inside_ball_is_identity(self):
        z1, z2 = truncate_tau(np.eye(2) * 0.1, 0.2, 1.0)
        np.testing.assert_allclose(z1, np.eye(2) * 0.1)
        assert z2 == pytest.approx(0.2)

    def test_truncate_outside_ball_clamps_norm(self):
        z1, z2 = truncate_tau(np.array([[3.0, 0.0], [0.0, 0.0]]), 4.0, 1.0)
        assert np.sqrt(np.sum(z1 ** 2) + z2 ** 2) == pytest.approx(1.0)
        assert z2 / z1[0, 0] == pytest.approx(4.0 / 3.0)

    def test_truncate_field_matches_pointwise(self, grid2):
        rng = np.random.default_rng(0)
        F = GridField(grid2, 'matrix', 3.0 * rng.normal(size=(2, 2) + grid2.shape))
        eta = GridField(grid2, 'scalar', rng.normal(size=grid2.shape))
        Ft, etat = truncate_tau_field(F, eta, 2.0)
        z1, z2 = truncate_tau(F.values[:, :, 3, 5], eta.values[3, 5], 2.0)
        np.testing.assert_allclose(Ft.values[:, :, 3, 5], z1)
        assert etat.values[3, 5] == pytest.approx(z2)

    def test_quadrature_of_constant(self, grid2):
        field = GridField(grid2, 'scalar', np.full(grid2.shape, 2.0))
        assert quadrature(field) == pytest.approx(2.0)

    def test_quadrature_of_raw_array(self, grid2):
        x = grid_coordinates(grid2)
        values = np.sin(2.0 * np.pi * x[0]) ** 2
        assert quadrature(values, grid2) == pytest.approx(0.5, abs=1e-12)
        assert quadrature(values, grid2) == pytest.approx(quadrature(GridField(grid2, 'scalar', values)))
        with pytest.raises(TypeError):
            quadrature(values)
        with pytest.raises(GridMismatch):
            quadrature(values[:8], grid2)

    def test_vp_norm_of_unit_field(self, grid2):
        field = GridField(grid2, 'scalar', np.ones(grid2.shape))
        assert vp_norm_sq(field, 4) == pytest.approx(2.0)

    def test_non_finite_values_rejected(self, grid2):
        values = np.zeros(grid2.shape)
        values[0, 0] = np.nan
        with pytest.raises(ValueError):
            GridField(grid2, 'scalar', values)


class TestSpectralCalculus:
    """Gradient, divergence, curl-free projection and potential recovery."""

    def test_gradient_of_sine_is_exact(self, grid1):
        x = grid_coordinates(grid1)[0]
        u = GridField(grid1, 'scalar', np.sin(2 * np.pi * x))
        grad = spectral_gradient(u)
        assert grad.rank == 'vector'
        np.testing.assert_allclose(grad.values[0], 2 * np.pi * np.cos(2 * np.pi * x), atol=1e-10)

    def test_centered_gradient_is_second_order(self):
        errors = []
        for n in (32, 64):
            grid = make_grid(1, n)
            x = grid_coordinates(grid)[0]
            u = GridField(grid, 'scalar', np.sin(2 * np.pi * x))
            exact = 2 * np.pi * np.cos(2 * np.pi * x)
            errors.append(np.max(np.abs(centered_gradient(u).values[0] - exact)))
        assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.05)

    def test_divergence_of_gradient_is_laplacian(self, grid2):
        x = grid_coordinates(grid2)
        u = GridField(grid2, 'scalar', np.sin(2 * np.pi * x[0]) * np.cos(2 * np.pi * x[1]))
        lap = spectral_divergence(spectral_gradient(u))
        np.testing.assert_allclose(lap.values, -8 * np.pi ** 2 * u.values, atol=1e-8)

    def test_projection_removes_curl(self, grid2):
        rng = np.random.default_rng(1)
        V = GridField(grid2, 'matrix', rng.normal(size=(2, 2) + grid2.shape))
        assert curl_residual(V) > 1.0
        assert curl_residual(helmholtz_curl_free(V)) < 1e-9

    def test_projection_keeps_gradients_and_mean(self, grid2):
        x = grid_coordinates(grid2)
        y = np.stack([np.sin(2 * np.pi * x[0]), np.cos(2 * np.pi * x[1])])
        F = spectral_gradient(GridField(grid2, 'vector', y))
        shifted = GridField(grid2, 'matrix', F.values + np.eye(2).reshape(2, 2, 1, 1))
        np.testing.assert_allclose(helmholtz_curl_free(shifted).values, shifted.values, atol=1e-10)

    def test_recover_potential(self, grid2):
        x = grid_coordinates(grid2)
        y = np.stack([np.sin(2 * np.pi * x[0]), np.cos(2 * np.pi * (x[0] + x[1]))])
        F = spectral_gradient(GridField(grid2, 'vector', y))
        recovered = recover_potential(F)
        np.testing.assert_allclose(recovered.values, y, atol=1e-10)

    def test_curl_residual_vanishes_in_one_dimension(self, grid1):
        F = GridField(grid1, 'matrix', np.ones((1, 1) + grid1.shape))
        assert curl_residual(F) == 0.0


class TestGridFieldIO:
    """The 24-byte header binary format."""

    def test_round_trip(self, tmp_path, grid2):
        rng = np.random.default_rng(2)
        field = GridField(grid2, 'vector', rng.normal(size=(2,) + grid2.shape))
        path = write_grid_field(field, str(tmp_path / 'v.bin'))
        loaded = read_grid_field(path)
        assert loaded.grid == grid2 and loaded.rank == 'vector'
        np.testing.assert_array_equal(loaded.values, field.values)

    def test_header_layout(self, grid2):
        payload = encode_grid_field(zero_field(grid2, 'matrix'))
        assert np.frombuffer(payload[:24], dtype='<i8').tolist() == [2, 16, 2]
        assert len(payload) == 24 + 8 * 4 * 256

    def test_truncated_payload(self, grid2):
        payload = encode_grid_field(zero_field(grid2, 'scalar'))
        with pytest.raises(FormatVersionMismatch):
            decode_grid_field(payload[:-8])
        with pytest.raises(FormatVersionMismatch):
            decode_grid_field(payload[:10])

    def test_grid_mismatch(self, grid2):
        other = make_grid(2, 8)
        with pytest.raises(GridMismatch):
            zero_field(grid2, 'scalar') + zero_field(other, 'scalar')
