"""Fourier calculus on the unit torus.

All operators use the same derivative symbol i*k with the Nyquist mode
removed, so the curl-free projection, the gradient and the potential
recovery are mutually consistent.
"""
import numpy as np

from errors import FieldError
from fields.grid import Grid, GridField


def wavenumbers(grid: Grid) -> list:
    """Per-axis derivative wavenumbers broadcastable over the grid axes."""
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    k[grid.n // 2] = 0.0
    out = []
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = grid.n
        out.append(k.reshape(shape))
    return out


def _check_finite(values: np.ndarray):
    if not np.all(np.isfinite(values)):
        raise ValueError(FieldError.NON_FINITE)


def _fft(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.fftn(values, axes=grid.axes)


def _ifft(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.real(np.fft.ifftn(values, axes=grid.axes))


def gradient_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Spectral gradient of component-first values; appends a trailing component axis."""
    _check_finite(values)
    hat = _fft(values, grid)
    lead = values.shape[:values.ndim - grid.dim]
    out = np.empty(lead + (grid.dim,) + grid.shape)
    for alpha, k in enumerate(wavenumbers(grid)):
        out[(Ellipsis, alpha) + (slice(None),) * grid.dim] = _ifft(1j * k * hat, grid)
    return out


def divergence_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Spectral divergence over the last component axis."""
    _check_finite(values)
    hat = _fft(values, grid)
    total = np.zeros(hat.shape[:-grid.dim - 1] + grid.shape, dtype=complex)
    for alpha, k in enumerate(wavenumbers(grid)):
        total += 1j * k * hat[(Ellipsis, alpha) + (slice(None),) * grid.dim]
    return _ifft(total, grid)


def centered_gradient_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    lead = values.shape[:values.ndim - grid.dim]
    out = np.empty(lead + (grid.dim,) + grid.shape)
    h = grid.spacing
    for alpha in range(grid.dim):
        axis = values.ndim - grid.dim + alpha
        diff = (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)
        out[(Ellipsis, alpha) + (slice(None),) * grid.dim] = diff
    return out


def centered_divergence_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    h = grid.spacing
    total = np.zeros(values.shape[:-grid.dim - 1] + grid.shape)
    for alpha in range(grid.dim):
        comp = values[(Ellipsis, alpha) + (slice(None),) * grid.dim]
        axis = comp.ndim - grid.dim + alpha
        total += (np.roll(comp, -1, axis=axis) - np.roll(comp, 1, axis=axis)) / (2.0 * h)
    return total


def _raise_rank(rank: str) -> str:
    if rank == 'scalar':
        return 'vector'
    if rank == 'vector':
        return 'matrix'
    raise ValueError(FieldError.BAD_RANK)


def _lower_rank(rank: str) -> str:
    if rank == 'matrix':
        return 'vector'
    if rank == 'vector':
        return 'scalar'
    raise ValueError(FieldError.BAD_RANK)


def spectral_gradient(u: GridField) -> GridField:
    """Gradient of the trigonometric interpolant; output[i, alpha] = d_alpha u_i."""
    return GridField(u.grid, _raise_rank(u.rank), gradient_values(u.values, u.grid))


def centered_gradient(u: GridField) -> GridField:
    return GridField(u.grid, _raise_rank(u.rank), centered_gradient_values(u.values, u.grid))


def spectral_divergence(G: GridField) -> GridField:
    return GridField(G.grid, _lower_rank(G.rank), divergence_values(G.values, G.grid))


def curl_free_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Row-wise projection of (d, d, grid) values onto gradients, mean kept."""
    _check_finite(values)
    hat = _fft(values, grid)
    ks = wavenumbers(grid)
    k2 = sum(k ** 2 for k in ks)
    safe = np.where(k2 > 0, k2, 1.0)
    k_dot = sum(ks[b] * hat[:, b] for b in range(grid.dim))
    projected = np.empty_like(hat)
    for alpha in range(grid.dim):
        projected[:, alpha] = np.where(k2 > 0, ks[alpha] * k_dot / safe, 0.0)
    zero = (slice(None), slice(None)) + (0,) * grid.dim
    projected[zero] = hat[zero]
    return _ifft(projected, grid)


def helmholtz_curl_free(V: GridField) -> GridField:
    """P_curl V on a matrix field: each row projected onto gradients."""
    if V.rank != 'matrix':
        raise ValueError(FieldError.BAD_RANK)
    return GridField(V.grid, 'matrix', curl_free_values(V.values, V.grid))


def potential_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    _check_finite(values)
    hat = _fft(values, grid)
    ks = wavenumbers(grid)
    k2 = sum(k ** 2 for k in ks)
    safe = np.where(k2 > 0, k2, 1.0)
    k_dot = sum(ks[b] * hat[:, b] for b in range(grid.dim))
    y_hat = np.where(k2 > 0, -1j * k_dot / safe, 0.0)
    return _ifft(y_hat, grid)


def recover_potential(F: GridField) -> GridField:
    """Zero-mean y with grad y = P_curl(F - mean F)."""
    if F.rank != 'matrix':
        raise ValueError(FieldError.BAD_RANK)
    return GridField(F.grid, 'vector', potential_values(F.values, F.grid))


def curl_residual(F: GridField) -> float:
    """max |d_alpha F_{i beta} - d_beta F_{i alpha}| over cells and index pairs."""
    if F.grid.dim == 1:
        return 0.0
    D = gradient_values(F.values, F.grid)
    worst = 0.0
    for alpha in range(F.grid.dim):
        for beta in range(alpha + 1, F.grid.dim):
            worst = max(worst, float(np.max(np.abs(D[:, beta, alpha] - D[:, alpha, beta]))))
    return worst
