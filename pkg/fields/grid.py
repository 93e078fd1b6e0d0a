from dataclasses import dataclass

import numpy as np

from errors import FieldError, InvalidDimension, InvalidResolution, GridMismatch

MIN_RESOLUTION = 4
MAX_RESOLUTION = 4096

RANKS = ('scalar', 'vector', 'matrix')
BOUNDARY_MODES = ('periodic', 'zero_trace')


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the unit d-torus."""
    dim: int
    n: int

    @property
    def spacing(self) -> float:
        return 1.0 / self.n

    @property
    def cell_count(self) -> int:
        return self.n ** self.dim

    @property
    def cell_volume(self) -> float:
        return float(self.n) ** (-self.dim)

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def axes(self) -> tuple:
        """Grid axes of a component-first array of any rank."""
        return tuple(range(-self.dim, 0))

    def components(self, rank: str) -> tuple:
        if rank == 'scalar':
            return ()
        if rank == 'vector':
            return (self.dim,)
        if rank == 'matrix':
            return (self.dim, self.dim)
        raise ValueError(FieldError.BAD_RANK)


@dataclass(frozen=True)
class GridField:
    """Samples of a scalar, vector or matrix field at cell centres.

    values has the component axes first followed by the d grid axes.
    """
    grid: Grid
    rank: str
    values: np.ndarray

    def __post_init__(self):
        expected = self.grid.components(self.rank) + self.grid.shape
        if self.values.shape != expected:
            raise ValueError(f'{FieldError.BAD_RANK}: expected shape {expected}, got {self.values.shape}')
        if not np.all(np.isfinite(self.values)):
            raise ValueError(FieldError.NON_FINITE)

    def cell_major(self) -> np.ndarray:
        """Values with the grid axes first, components last."""
        k = len(self.grid.components(self.rank))
        return np.moveaxis(self.values, tuple(range(k)), tuple(range(-k, 0))) if k else self.values

    def __add__(self, other: 'GridField') -> 'GridField':
        check_same_grid(self, other)
        return GridField(self.grid, self.rank, self.values + other.values)

    def __sub__(self, other: 'GridField') -> 'GridField':
        check_same_grid(self, other)
        return GridField(self.grid, self.rank, self.values - other.values)

    def scaled(self, factor: float) -> 'GridField':
        return GridField(self.grid, self.rank, factor * self.values)


@dataclass(frozen=True)
class TestField:
    """Test pair (phi, psi) for the quasiconvexity and Garding functionals."""
    __test__ = False

    phi: GridField
    psi: GridField
    boundary_mode: str = 'periodic'

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    def scaled(self, factor: float) -> 'TestField':
        return TestField(self.phi.scaled(factor), self.psi.scaled(factor), self.boundary_mode)

    def negated(self) -> 'TestField':
        return self.scaled(-1.0)


def make_grid(dim: int, n: int) -> Grid:
    """Validate (dim, n) and build the grid."""
    if dim not in (1, 2, 3):
        raise InvalidDimension(FieldError.BAD_DIMENSION)
    if n < MIN_RESOLUTION or n > MAX_RESOLUTION:
        raise InvalidResolution(FieldError.OUT_OF_RANGE)
    if n & (n - 1):
        raise InvalidResolution(FieldError.NOT_POWER_OF_TWO)
    return Grid(dim=dim, n=n)


def check_same_grid(*fields) -> None:
    grids = {f.grid for f in fields}
    if len(grids) > 1:
        raise GridMismatch(FieldError.GRID_MISMATCH)


def grid_coordinates(grid: Grid) -> np.ndarray:
    """Cell-centre coordinates, shape (d, n, ..., n)."""
    x = (np.arange(grid.n) + 0.5) / grid.n
    return np.stack(np.meshgrid(*([x] * grid.dim), indexing='ij'))


def zero_field(grid: Grid, rank: str) -> GridField:
    return GridField(grid, rank, np.zeros(grid.components(rank) + grid.shape))


def quadrature(u, grid: Grid = None) -> float:
    """Midpoint rule on cell centres for a scalar field, or a raw array of grid.shape when grid is given."""
    if isinstance(u, GridField):
        return float(np.sum(u.values) * u.grid.cell_volume)
    if grid is None:
        raise TypeError('quadrature of a raw array needs its grid')
    values = np.asarray(u, dtype=float)
    if values.shape != grid.shape:
        raise GridMismatch(f'{FieldError.GRID_MISMATCH}: {values.shape} against {grid.shape}')
    return float(np.sum(values) * grid.cell_volume)


def v_aux(z, i: int):
    """V_i(z) = (|z|^i + |z|^2)^(1/2) for a tensor z (Euclidean norm)."""
    if i < 2:
        raise ValueError('exponent must be at least 2')
    r = np.sqrt(np.sum(np.square(np.asarray(z, dtype=float))))
    return float(np.sqrt(r ** i + r ** 2))


def vp_density(norms: np.ndarray, i: float) -> np.ndarray:
    """|V_i|^2 evaluated from pointwise Euclidean norms."""
    return norms ** i + norms ** 2


def pointwise_norm(u: GridField) -> np.ndarray:
    k = len(u.grid.components(u.rank))
    if k == 0:
        return np.abs(u.values)
    return np.sqrt(np.sum(np.square(u.values), axis=tuple(range(k))))


def vp_norm_sq(u: GridField, i: int) -> float:
    """Quadrature of |V_i(u(x))|^2."""
    if i < 2:
        raise ValueError('exponent must be at least 2')
    density = vp_density(pointwise_norm(u), i)
    return float(np.sum(density) * u.grid.cell_volume)


def truncate_tau(z1, z2, n: float):
    """Radial clamp of the pair (z1, z2) to the ball of radius n."""
    if n <= 0:
        raise ValueError('truncation level must be positive')
    z1 = np.asarray(z1, dtype=float)
    z2 = float(z2)
    norm = np.sqrt(np.sum(z1 ** 2) + z2 ** 2)
    if norm <= n:
        return z1.copy(), z2
    scale = n / norm
    return z1 * scale, z2 * scale


def truncate_tau_field(F: GridField, eta: GridField, n: float):
    """Cellwise truncate_tau on a matrix field and a scalar field."""
    if n <= 0:
        raise ValueError('truncation level must be positive')
    check_same_grid(F, eta)
    norm = np.sqrt(np.sum(F.values ** 2, axis=(0, 1)) + eta.values ** 2)
    scale = np.where(norm > n, n / np.maximum(norm, np.finfo(float).tiny), 1.0)
    return (GridField(F.grid, 'matrix', F.values * scale),
            GridField(eta.grid, 'scalar', eta.values * scale))
