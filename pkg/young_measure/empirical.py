"""Empirical Young measures: per-cell atom tables built from subgrid samples of scale-indexed sequences."""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import wasserstein_distance

from constitutive.models import EnergyModel
from errors import ArtifactWriteError, FieldError, GridMismatch, MeasureError, RunError, UnresolvableScale
from fields.grid import Grid, GridField, grid_coordinates, vp_density
from solver.scheme import viscous_family
from utils.transformations import state_size, vector_to_state

logger = logging.getLogger(__name__)

MERGE_TOLERANCE = 1e-6
WEIGHT_TOLERANCE = 1e-12
MIN_SUBGRID = 4
MIN_POINTS_PER_PERIOD = 8
CONCENTRATION_GROWTH = 1.05
CAUCHY_TOLERANCE = 0.1
CLAMP_TOLERANCE = 1e-6

GENERATORS = ('laminate', 'concentrator', 'viscous-family', 'custom')
SUBSPACES = ('full', 'F-eta')
CATALOGUE = ('id', 'sq', 'energy', 'kinetic', 'total_energy', 'stress', 'temperature', 'inverse_temperature', 'vp')


@dataclass
class SequenceSpec:
    """Scale-indexed sequence; params depend on the generator.

    laminate: A, B (state vectors), normal (integer vector), fraction
    concentrator: base (state vector), component, the spike sits on [0, scale]^d
    viscous-family: model, init, config (its grid must be the sampling grid),
        optional energy_bound; generation records the uniform energy check in energy_check
    custom: members, a callable (scale, points) -> samples or a dict scale -> samples
    """
    generator: str
    scales: tuple
    subgrid: int = 8
    dim: int = 1
    params: dict = field(default_factory=dict)
    energy_check: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f'unknown generator {self.generator!r}')
        self.scales = tuple(float(s) for s in self.scales)
        if not self.scales or any(b >= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError('scales must be a nonempty descending list')
        if self.subgrid < MIN_SUBGRID:
            raise ValueError(f'subgrid must be at least {MIN_SUBGRID}')

    @property
    def finest(self) -> float:
        return self.scales[-1]


@dataclass
class EmpiricalYoungMeasure:
    grid: Grid
    atoms: list
    weights: list
    subspace: str = 'full'
    scale: float = np.nan

    def __post_init__(self):
        if self.subspace not in SUBSPACES:
            raise ValueError(f'unknown subspace {self.subspace!r}')
        if len(self.atoms) != self.grid.cell_count or len(self.weights) != self.grid.cell_count:
            raise ValueError('one atom table per cell is required')
        for w in self.weights:
            if np.any(w < 0.0) or abs(float(np.sum(w)) - 1.0) > WEIGHT_TOLERANCE:
                raise ValueError('atom weights must be nonnegative and sum to one')

    @property
    def dim(self) -> int:
        return self.grid.dim

    def component_names(self) -> list:
        d = self.dim
        names = [f'F{i + 1}{j + 1}' for i in range(d) for j in range(d)]
        if self.subspace == 'full':
            names += [f'v{i + 1}' for i in range(d)]
        return names + ['eta']

    def full_atoms(self, cell: int) -> np.ndarray:
        """Atoms of one cell in the full state layout, v = 0 on the F-eta subspace."""
        atoms = self.atoms[cell]
        if self.subspace == 'full':
            return atoms
        d = self.dim
        out = np.zeros((atoms.shape[0], state_size(d)))
        out[:, :d * d] = atoms[:, :d * d]
        out[:, -1] = atoms[:, -1]
        return out

    def atom_counts(self) -> np.ndarray:
        return np.array([len(w) for w in self.weights]).reshape(self.grid.shape)


def sample_grid(grid: Grid, subgrid: int) -> Grid:
    """The fine grid carrying subgrid samples per cell and dimension."""
    return Grid(dim=grid.dim, n=grid.n * subgrid)


def cell_samples(samples: np.ndarray, grid: Grid, subgrid: int) -> np.ndarray:
    """(m, N, ..., N) fine samples to (cells, subgrid^d, m)."""
    d, n, s = grid.dim, grid.n, subgrid
    m = samples.shape[0]
    blocked = samples.reshape((m,) + (n, s) * d)
    order = tuple(1 + 2 * a for a in range(d)) + tuple(2 + 2 * a for a in range(d)) + (0,)
    return blocked.transpose(order).reshape(n ** d, s ** d, m)


def _project(values: np.ndarray, dim: int, subspace: str) -> np.ndarray:
    if subspace == 'full':
        return values
    return np.concatenate([values[..., :dim * dim], values[..., -1:]], axis=-1)


def merge_atoms(values: np.ndarray, tolerance: float = MERGE_TOLERANCE):
    """Group sample vectors that agree to the tolerance; returns (atoms, weights)."""
    keys = np.round(values / tolerance).astype(np.int64)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    atoms = np.zeros((counts.size, values.shape[1]))
    np.add.at(atoms, inverse, values)
    return atoms / counts[:, None], counts / counts.sum()


def from_samples(samples: np.ndarray, grid: Grid, subgrid: int, subspace: str = 'full',
                 scale: float = np.nan) -> EmpiricalYoungMeasure:
    per_cell = _project(cell_samples(samples, grid, subgrid), grid.dim, subspace)
    atoms, weights = [], []
    for values in per_cell:
        a, w = merge_atoms(values)
        atoms.append(a)
        weights.append(w)
    return EmpiricalYoungMeasure(grid, atoms, weights, subspace, scale)


def _check_resolved(spec: SequenceSpec, grid: Grid, period: float) -> None:
    points = period * grid.n * spec.subgrid
    if points < MIN_POINTS_PER_PERIOD:
        raise UnresolvableScale(f'{MeasureError.UNRESOLVABLE}: {points:.3g} samples per period')


def _state_vector(value, dim: int) -> np.ndarray:
    value = np.asarray(value, dtype=float).reshape(-1)
    if value.size != state_size(dim):
        raise ValueError(f'state vectors have {state_size(dim)} components, got {value.size}')
    return value


def _laminate(spec: SequenceSpec, grid: Grid, points: np.ndarray) -> dict:
    d = grid.dim
    A = _state_vector(spec.params['A'], d)
    B = _state_vector(spec.params['B'], d)
    normal = np.asarray(spec.params.get('normal', np.eye(d)[0]), dtype=float)
    fraction = float(spec.params.get('fraction', 0.5))
    _check_resolved(spec, grid, spec.finest / np.max(np.abs(normal)))
    projection = np.tensordot(normal, points, axes=1)
    members = {}
    for scale in spec.scales:
        phase = np.mod(projection / scale, 1.0)
        members[scale] = np.where(phase < fraction, A.reshape((-1,) + (1,) * d), B.reshape((-1,) + (1,) * d))
    return members


def _concentrator(spec: SequenceSpec, grid: Grid, points: np.ndarray) -> dict:
    d = grid.dim
    base = _state_vector(spec.params.get('base', np.zeros(state_size(d))), d)
    component = int(spec.params.get('component', d * d))
    _check_resolved(spec, grid, spec.finest)
    members = {}
    for scale in spec.scales:
        inside = np.all(points < scale, axis=0)
        values = np.broadcast_to(base.reshape((-1,) + (1,) * d), (base.size,) + points.shape[1:]).copy()
        values[component] = np.where(inside, base[component] + scale ** (-d / 2.0), base[component])
        members[scale] = values
    return members


def _viscous(spec: SequenceSpec, grid: Grid, points: np.ndarray) -> dict:
    config = spec.params['config']
    if config.grid != sample_grid(grid, spec.subgrid):
        raise ValueError('the solver grid must carry subgrid samples of the target grid')
    family = viscous_family(spec.params['model'], spec.params['init'], spec.scales, config,
                            bound=spec.params.get('energy_bound'))
    spec.energy_check = family
    members = {}
    for scale, traj in zip(spec.scales, family):
        F, v, eta = traj.fields(len(traj.times) - 1)
        members[scale] = np.concatenate([F.values.reshape((-1,) + F.grid.shape), v.values, eta.values[None]])
    return members


def _custom(spec: SequenceSpec, grid: Grid, points: np.ndarray) -> dict:
    source = spec.params['members']
    members = {}
    for scale in spec.scales:
        values = source(scale, points) if callable(source) else source[scale]
        members[scale] = np.asarray(values, dtype=float)
    return members


_BUILDERS = {'laminate': _laminate, 'concentrator': _concentrator, 'viscous-family': _viscous, 'custom': _custom}


def generate_members(spec: SequenceSpec, target_grid: Grid) -> dict:
    """scale -> fine samples of shape (d^2 + d + 1, N, ..., N), N = n * subgrid."""
    if spec.dim != target_grid.dim:
        raise GridMismatch(FieldError.GRID_MISMATCH)
    fine = sample_grid(target_grid, spec.subgrid)
    points = grid_coordinates(fine)
    members = _BUILDERS[spec.generator](spec, target_grid, points)
    expected = (state_size(target_grid.dim),) + fine.shape
    for scale, values in members.items():
        if values.shape != expected:
            raise ValueError(f'member at scale {scale} has shape {values.shape}, expected {expected}')
    return members


def empirical_young_measure(spec: SequenceSpec, target_grid: Grid, subspace: str = 'full',
                            members: dict = None) -> EmpiricalYoungMeasure:
    """Per-cell histogram of the finest member, atoms merged within 1e-6."""
    members = members or generate_members(spec, target_grid)
    nu = from_samples(members[spec.finest], target_grid, spec.subgrid, subspace, spec.finest)
    logger.info('%s measure at scale %g: up to %d atoms per cell', spec.generator, spec.finest,
                int(nu.atom_counts().max()))
    return nu


def _require(model):
    if model is None:
        raise ValueError('this pairing needs an energy model')
    return model


def _evaluate(g: str, atoms: np.ndarray, dim: int, model: EnergyModel):
    if g == 'id':
        return atoms
    if g == 'sq':
        return np.sum(atoms ** 2, axis=-1)
    F, v, eta = vector_to_state(atoms, dim)
    if g == 'kinetic':
        return 0.5 * np.sum(v ** 2, axis=-1)
    model = _require(model)
    model.check_admissible(F, eta)
    if g == 'energy':
        return model._energy(F, eta)
    if g == 'total_energy':
        return 0.5 * np.sum(v ** 2, axis=-1) + model._energy(F, eta)
    if g == 'stress':
        return model._stress(F, eta)
    if g == 'temperature':
        return model._temperature(F, eta)
    if g == 'inverse_temperature':
        return 1.0 / model._temperature(F, eta)
    return (vp_density(np.sqrt(np.sum(F ** 2, axis=(-2, -1))), model.p)
            + vp_density(np.abs(eta), model.q))


def pair_values(nu: EmpiricalYoungMeasure, g: str, model: EnergyModel = None, mask=None) -> np.ndarray:
    """Per-cell averages <nu_x, g> stacked cell-major: (cells,) + shape of g."""
    if g not in CATALOGUE:
        raise ValueError(f'{g!r} is not in the pairing catalogue {CATALOGUE}')
    out = []
    for cell in range(nu.grid.cell_count):
        atoms = nu.atoms[cell] if g in ('id', 'sq') else nu.full_atoms(cell)
        weights = nu.weights[cell] if mask is None else nu.weights[cell] * mask[cell]
        values = _evaluate(g, atoms, nu.dim, model)
        out.append(np.tensordot(weights, values, axes=1))
    return np.array(out)


def ym_pair(nu: EmpiricalYoungMeasure, g: str, model: EnergyModel = None):
    """<nu_x, g> per cell. Scalar entries return a scalar GridField, 'stress' a matrix GridField
    and 'id' the (F, v, eta) GridFields of the barycenter (v is None on the F-eta subspace).
    """
    grid = nu.grid
    values = pair_values(nu, g, model)
    if g == 'id':
        d = grid.dim
        cells = values.reshape(grid.shape + (-1,))
        F = GridField(grid, 'matrix', np.moveaxis(cells[..., :d * d].reshape(grid.shape + (d, d)), (-2, -1), (0, 1)))
        eta = GridField(grid, 'scalar', cells[..., -1].copy())
        v = GridField(grid, 'vector', np.moveaxis(cells[..., d * d:d * d + d], -1, 0)) \
            if nu.subspace == 'full' else None
        return F, v, eta
    if g == 'stress':
        d = grid.dim
        return GridField(grid, 'matrix', np.moveaxis(values.reshape(grid.shape + (d, d)), (-2, -1), (0, 1)))
    return GridField(grid, 'scalar', values.reshape(grid.shape))


def barycenter(nu: EmpiricalYoungMeasure):
    return ym_pair(nu, 'id')


@dataclass
class ConcentrationReport:
    mass: GridField
    total: float
    clamped: int
    cauchy: bool
    excluded_weight: float

    @property
    def peak_cell(self) -> tuple:
        return tuple(int(i) for i in np.unravel_index(np.argmax(self.mass.values), self.mass.grid.shape))


def concentration_mass(spec: SequenceSpec, nu: EmpiricalYoungMeasure, model: EnergyModel,
                       members: dict = None) -> ConcentrationReport:
    """Per-cell energy defect between the sequence and its measure.

    The cell energy is extrapolated from the two finest scales. Atoms whose
    norm exceeds the coarser member's largest sample are carried by
    concentrations and left out of the pairing.
    """
    grid = nu.grid
    members = members or generate_members(spec, grid)
    volume = grid.cell_volume
    energies = []
    for scale in spec.scales[-2:]:
        values = cell_samples(members[scale], grid, spec.subgrid)
        F, v, eta = vector_to_state(values, grid.dim)
        model.check_admissible(F, eta)
        density = 0.5 * np.sum(v ** 2, axis=-1) + model._energy(F, eta)
        energies.append(np.mean(density, axis=1) * volume)
    if len(energies) == 2:
        ratio = spec.scales[-2] / spec.scales[-1]
        limit = energies[1] + (energies[1] - energies[0]) / (ratio - 1.0)
        coarse_total, fine_total = float(np.sum(energies[0])), float(np.sum(energies[1]))
        cauchy = abs(fine_total - coarse_total) <= CAUCHY_TOLERANCE * max(1.0, abs(coarse_total))
    else:
        limit, cauchy = energies[0], True
    if not cauchy:
        logger.warning('cell energies are not Cauchy across the two finest scales')

    reference = members[spec.scales[-2]] if len(spec.scales) > 1 else members[spec.finest]
    level = CONCENTRATION_GROWTH * float(np.max(np.sqrt(np.sum(_project(reference.T, grid.dim, nu.subspace) ** 2,
                                                               axis=-1))))
    mask = [np.sqrt(np.sum(a ** 2, axis=-1)) <= level for a in nu.atoms]
    excluded = max(float(np.sum(w[~m])) for w, m in zip(nu.weights, mask))
    paired = pair_values(nu, 'total_energy', model, mask) * volume

    mass = limit - paired
    clamped = int(np.sum(mass < -CLAMP_TOLERANCE))
    mass = np.maximum(mass, 0.0)
    report = ConcentrationReport(GridField(grid, 'scalar', mass.reshape(grid.shape)), float(np.sum(mass)),
                                 clamped, cauchy, excluded)
    logger.info('concentration mass %.6g (%d clamped cells)', report.total, clamped)
    return report


def wasserstein1_per_cell(nu_a: EmpiricalYoungMeasure, nu_b: EmpiricalYoungMeasure) -> np.ndarray:
    """Per-cell max over components of the one-dimensional Wasserstein-1 distance."""
    if nu_a.grid != nu_b.grid or nu_a.subspace != nu_b.subspace:
        raise GridMismatch(FieldError.GRID_MISMATCH)
    out = np.zeros(nu_a.grid.cell_count)
    for cell in range(nu_a.grid.cell_count):
        a, wa = nu_a.atoms[cell], nu_a.weights[cell]
        b, wb = nu_b.atoms[cell], nu_b.weights[cell]
        out[cell] = max(wasserstein_distance(a[:, k], b[:, k], wa, wb) for k in range(a.shape[1]))
    return out.reshape(nu_a.grid.shape)


def eym_frame(nu: EmpiricalYoungMeasure) -> pd.DataFrame:
    names = nu.component_names()
    rows = []
    for cell in range(nu.grid.cell_count):
        index = np.unravel_index(cell, nu.grid.shape)
        for atom, weight in zip(nu.atoms[cell], nu.weights[cell]):
            row = {f'i{a}': int(index[a]) for a in range(nu.dim)}
            row.update(zip(names, atom))
            row['weight'] = weight
            rows.append(row)
    return pd.DataFrame(rows)


def write_eym_csv(nu: EmpiricalYoungMeasure, path: str) -> str:
    try:
        eym_frame(nu).to_csv(path, index=False, float_format='%.17g')
    except OSError as e:
        raise ArtifactWriteError(f'{RunError.WRITE_FAILED}: {path}: {e}')
    return path
