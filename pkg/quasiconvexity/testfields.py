"""Test-field families for the quasiconvexity and Garding checks.

Periodic fields are differentiated spectrally. Zero-trace fields vanish on a
one-cell collar, ramp up over RAMP_CELLS cells, and are differentiated with
centred differences.
"""
import itertools
import logging
import os

import numpy as np

from errors import CubeExceedsDomain, InvalidTestField, SearchError
from fields.grid import Grid, GridField, TestField, grid_coordinates
from fields.io import read_grid_field, write_grid_field
from fields.spectral import (
    centered_divergence_values,
    centered_gradient_values,
    divergence_values,
    gradient_values,
)

logger = logging.getLogger(__name__)

COLLAR_CELLS = 1
RAMP_CELLS = 4
MAX_DIRECTION_ENTRY = 4
MEAN_TOLERANCE = 1e-10


def _profile(b: np.ndarray, collar: int = COLLAR_CELLS, ramp: int = RAMP_CELLS) -> np.ndarray:
    """Cutoff as a function of the cell distance b to the boundary."""
    ramped = np.sin(0.5 * np.pi * (b - collar + 1) / (ramp + 1)) ** 2
    return np.where(b < collar, 0.0, np.where(b < collar + ramp, ramped, 1.0))


def collar_mask(grid: Grid) -> np.ndarray:
    """Cutoff vanishing on the boundary collar of the unit cube."""
    i = np.arange(grid.n)
    axis = _profile(np.minimum(i, grid.n - 1 - i))
    mask = np.ones(grid.shape)
    for alpha in range(grid.dim):
        shape = [1] * grid.dim
        shape[alpha] = grid.n
        mask = mask * axis.reshape(shape)
    return mask


def cube_mask(grid: Grid, x0, r: float) -> np.ndarray:
    """Cutoff supported in the periodic cube of side r centred on cell x0."""
    if r <= 0 or r > 1.0:
        raise CubeExceedsDomain(f'{SearchError.CUBE_TOO_LARGE}: r={r}')
    x0 = tuple(int(c) for c in np.atleast_1d(x0))
    half = 0.5 * r * grid.n
    mask = np.ones(grid.shape)
    i = np.arange(grid.n)
    for alpha in range(grid.dim):
        offset = (i - x0[alpha] + grid.n // 2) % grid.n - grid.n // 2
        b = np.floor(half - np.abs(offset) - 0.5)
        shape = [1] * grid.dim
        shape[alpha] = grid.n
        mask = mask * _profile(b).reshape(shape)
    return mask


def field_gradient(tf: TestField) -> np.ndarray:
    """grad phi in component-first layout (d, d, grid)."""
    if tf.boundary_mode == 'zero_trace':
        return centered_gradient_values(tf.phi.values, tf.grid)
    return gradient_values(tf.phi.values, tf.grid)


def adjoint_gradient(values: np.ndarray, grid: Grid, boundary_mode: str) -> np.ndarray:
    """Transpose of field_gradient applied to a (d, d, grid) array: -div."""
    if boundary_mode == 'zero_trace':
        return -centered_divergence_values(values, grid)
    return -divergence_values(values, grid)


def cell_major_pair(tf: TestField):
    """(grad phi as (grid..., d, d), psi as (grid...))."""
    G = np.moveaxis(field_gradient(tf), (0, 1), (-2, -1))
    return G, tf.psi.values


def make_test_field(grid: Grid, phi: np.ndarray, psi: np.ndarray, boundary_mode: str = 'periodic') -> TestField:
    return TestField(GridField(grid, 'vector', phi), GridField(grid, 'scalar', psi), boundary_mode)


def check_test_field(tf: TestField, zero_mean_psi: bool = False) -> None:
    """Raise InvalidTestField when the field breaks its boundary mode."""
    phi = tf.phi.values
    scale = 1.0 + float(np.max(np.abs(phi), initial=0.0))
    if tf.boundary_mode == 'zero_trace':
        edge = collar_mask(tf.grid) == 0.0
        if np.any(np.abs(phi[:, edge]) > MEAN_TOLERANCE * scale):
            raise InvalidTestField(f'{SearchError.BAD_TEST_FIELD}: phi nonzero on the collar')
    elif tf.boundary_mode == 'periodic':
        means = phi.reshape(phi.shape[0], -1).mean(axis=1)
        if np.any(np.abs(means) > MEAN_TOLERANCE * scale):
            raise InvalidTestField(f'{SearchError.BAD_TEST_FIELD}: phi has nonzero mean')
    else:
        raise InvalidTestField(f'{SearchError.BAD_TEST_FIELD}: mode {tf.boundary_mode!r}')
    if zero_mean_psi:
        psi = tf.psi.values
        if abs(float(psi.mean())) > MEAN_TOLERANCE * (1.0 + float(np.max(np.abs(psi)))):
            raise InvalidTestField(f'{SearchError.BAD_TEST_FIELD}: psi must have zero mean')


def field_size(tf: TestField) -> float:
    """(int |grad phi|^2 + psi^2)^(1/2)."""
    G = field_gradient(tf)
    total = np.sum(G ** 2) + np.sum(tf.psi.values ** 2)
    return float(np.sqrt(total * tf.grid.cell_volume))


def normalized(tf: TestField, size: float) -> TestField:
    current = field_size(tf)
    if current == 0.0:
        return tf
    return tf.scaled(size / current)


def snap_direction(n, limit: int = MAX_DIRECTION_ENTRY):
    """Closest integer direction with entries in [-limit, limit]; returns (m, snapped, moved)."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    best, best_cos = None, -np.inf
    for m in itertools.product(range(-limit, limit + 1), repeat=n.size):
        m = np.array(m, dtype=float)
        length = np.linalg.norm(m)
        if length == 0.0:
            continue
        cos = float(m @ n) / length
        if cos > best_cos + 1e-12:
            best, best_cos = m, cos
    snapped = best / np.linalg.norm(best)
    return best.astype(int), snapped, bool(best_cos < 1.0 - 1e-12)


def _laminate_profile(s: np.ndarray, fraction: float, frequencies: np.ndarray, damping: np.ndarray):
    """Periodic antiderivative P of the zero-mean step chi and chi itself, mollified."""
    omega = 2j * np.pi * frequencies
    c = damping * (1.0 - np.exp(-omega * fraction)) / omega
    phase = np.exp(np.multiply.outer(s, omega))
    P = 2.0 * np.real(phase @ (c / omega))
    chi = 2.0 * np.real(phase @ c)
    return P, chi


def laminate_field(a, n, fraction: float, amplitude: float, grid: Grid, smoothing: float = 1.0,
                   boundary_mode: str = 'periodic', frequency: int = 1, psi_weight: float = 0.0) -> TestField:
    """Simple laminate: grad phi = amplitude * chi(m.x) a(x)n with chi in {1 - fraction, -fraction}.

    n is snapped to the nearest integer direction the torus supports. The
    step is mollified with a Gaussian over `smoothing` cells. psi_weight
    adds an in-phase oscillation of the entropy.
    """
    a = np.asarray(a, dtype=float)
    if abs(np.linalg.norm(a) - 1.0) > 1e-8 or abs(np.linalg.norm(n) - 1.0) > 1e-8:
        raise ValueError('laminate directions must be unit vectors')
    if not 0.0 < fraction < 1.0:
        raise ValueError('laminate fraction must lie in (0, 1)')
    m, snapped, moved = snap_direction(n)
    if moved:
        logger.debug('laminate normal %s snapped to %s', np.round(n, 6), m)
    m = m * int(frequency)
    top = int((grid.n // 2 - 1) // max(1, int(np.max(np.abs(m)))))
    if top < 1:
        raise ValueError(f'laminate normal {m} not resolvable on n={grid.n}')
    freq = np.arange(1, top + 1, dtype=float)
    k = 2.0 * np.pi * freq * np.linalg.norm(m)
    damping = np.exp(-0.5 * (smoothing * grid.spacing * k) ** 2)

    s = np.tensordot(m.astype(float), grid_coordinates(grid), axes=1)
    P, chi = _laminate_profile(s, fraction, freq, damping)
    phi = (amplitude / np.linalg.norm(m)) * a.reshape((-1,) + (1,) * grid.dim) * P
    psi = psi_weight * amplitude * chi
    if boundary_mode == 'zero_trace':
        mask = collar_mask(grid)
        phi = phi * mask
        psi = psi - psi.mean()
    return make_test_field(grid, phi, psi, boundary_mode)


def _random_trig(grid: Grid, rng, modes: int, lead: tuple) -> np.ndarray:
    """Real random trigonometric polynomial with |k_alpha| <= modes and no mean."""
    modes = max(1, min(int(modes), grid.n // 2 - 1))
    hat = np.zeros(lead + grid.shape, dtype=complex)
    for idx in itertools.product(range(-modes, modes + 1), repeat=grid.dim):
        if not any(idx):
            continue
        weight = 1.0 / np.sqrt(1.0 + sum(i * i for i in idx))
        slot = (Ellipsis,) + tuple(i % grid.n for i in idx)
        hat[slot] = weight * (rng.standard_normal(lead) + 1j * rng.standard_normal(lead))
    return np.real(np.fft.ifftn(hat, axes=grid.axes))


def random_test_field(grid: Grid, rng, modes: int = 4, boundary_mode: str = 'periodic', size: float = 1.0,
                      psi_scale: float = 1.0, phi_scale: float = 1.0, mask: np.ndarray = None,
                      zero_mean_psi: bool = True) -> TestField:
    """Random smooth (phi, psi) normalized to field_size == size.

    With a mask, both phi and psi are supported where the mask is; the mask
    implies zero-trace differentiation.
    """
    phi = phi_scale * _random_trig(grid, rng, modes, (grid.dim,))
    psi = psi_scale * _random_trig(grid, rng, modes, ())
    if mask is not None:
        phi = phi * mask
        psi = psi * mask
        boundary_mode = 'zero_trace'
    elif boundary_mode == 'zero_trace':
        phi = phi * collar_mask(grid)
    if zero_mean_psi and mask is not None:
        psi = psi - psi.mean()
    return normalized(make_test_field(grid, phi, psi, boundary_mode), size)


def localized_test_field(grid: Grid, rng, x0, r: float, modes: int = 4, size: float = 1.0,
                         psi_scale: float = 1.0) -> TestField:
    return random_test_field(grid, rng, modes, size=size, psi_scale=psi_scale,
                             mask=cube_mask(grid, x0, r), zero_mean_psi=False)


def write_test_field(tf: TestField, directory: str, prefix: str = 'witness') -> list:
    os.makedirs(directory, exist_ok=True)
    return [write_grid_field(tf.phi, os.path.join(directory, f'{prefix}_phi.bin')),
            write_grid_field(tf.psi, os.path.join(directory, f'{prefix}_psi.bin'))]


def read_test_field(directory: str, prefix: str = 'witness', boundary_mode: str = 'periodic') -> TestField:
    phi = read_grid_field(os.path.join(directory, f'{prefix}_phi.bin'))
    psi = read_grid_field(os.path.join(directory, f'{prefix}_psi.bin'))
    return TestField(phi, psi, boundary_mode)
