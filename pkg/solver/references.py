"""Classical reference solutions: the exact linear wave and manufactured solutions with sources."""
import logging

import numpy as np

from constitutive.models import EnergyModel, QuadraticThermoelastic
from errors import SolverError, UnsupportedCombination
from fields.grid import Grid, GridField, grid_coordinates
from fields.spectral import divergence_values, gradient_values
from solver.scheme import conserved_from_primitive, to_cell_major
from utils.transformations import join_conserved

logger = logging.getLogger(__name__)


class Reference:
    """Smooth solution sampled at cell centres; arrays are component-first."""
    has_time_derivatives = True
    kind = 'reference'

    def __init__(self, model: EnergyModel, grid: Grid):
        self.model = model
        self.grid = grid
        self.coords = grid_coordinates(grid)
        self._unit = np.zeros((grid.dim,) + grid.shape)
        self._unit[0] = 1.0

    def _identity(self) -> np.ndarray:
        d = self.grid.dim
        return np.broadcast_to(np.eye(d).reshape((d, d) + (1,) * d), (d, d) + self.grid.shape).copy()

    def _e11(self, profile: np.ndarray) -> np.ndarray:
        d = self.grid.dim
        out = np.zeros((d, d) + self.grid.shape)
        out[0, 0] = profile
        return out

    def state(self, t: float):
        raise NotImplementedError

    def dt_state(self, t: float):
        raise NotImplementedError

    def displacement(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def source(self, t: float, coords=None):
        return None

    def conserved(self, t: float) -> np.ndarray:
        return conserved_from_primitive(self.model, *self.state(t))

    def fields(self, t: float):
        F, v, eta = self.state(t)
        return (GridField(self.grid, 'matrix', F), GridField(self.grid, 'vector', v),
                GridField(self.grid, 'scalar', eta))

    def temperature(self, t: float) -> np.ndarray:
        F, v, eta = self.state(t)
        Fc, _ = to_cell_major(F, v)
        return self.model._temperature(Fc, eta)


class LinearWave(Reference):
    """Exact travelling wave of the quadratic model:
    F = I + A cos(2 pi (x1 - c t)) e1 (x) e1, v = -c A cos(2 pi (x1 - c t)) e1, eta = 0, c = sqrt(k).
    """
    kind = 'linear-wave'

    def __init__(self, model: EnergyModel, grid: Grid, amplitude: float = 0.1):
        if not isinstance(model, QuadraticThermoelastic):
            raise UnsupportedCombination(f'{SolverError.UNSUPPORTED}: linear-wave needs the quadratic model')
        super().__init__(model, grid)
        self.amplitude = float(amplitude)
        self.speed = float(np.sqrt(model.stiffness))

    def _phase(self, t):
        return 2.0 * np.pi * (self.coords[0] - self.speed * t)

    def state(self, t):
        wave = self.amplitude * np.cos(self._phase(t))
        return self._identity() + self._e11(wave), -self.speed * wave * self._unit, np.zeros(self.grid.shape)

    def dt_state(self, t):
        rate = 2.0 * np.pi * self.speed * self.amplitude * np.sin(self._phase(t))
        return self._e11(rate), -self.speed * rate * self._unit, np.zeros(self.grid.shape)

    def displacement(self, t):
        return self.coords + self.amplitude / (2.0 * np.pi) * np.sin(self._phase(t)) * self._unit


class ManufacturedSolution(Reference):
    """y = x + a sin(2 pi x1) e^-t e1 and eta = eta_base + b sin(2 pi x1) e^-t with matching sources.

    The momentum and energy sources enter through the general source hook;
    the deformation equation needs none since v = dy/dt.
    """
    kind = 'mms'

    def __init__(self, model: EnergyModel, grid: Grid, amplitude: float = 0.05, eta_base: float = 0.5,
                 eta_amplitude: float = 0.1):
        super().__init__(model, grid)
        self.amplitude = float(amplitude)
        self.eta_base = float(eta_base)
        self.eta_amplitude = float(eta_amplitude)
        self._sin = np.sin(2.0 * np.pi * self.coords[0])
        self._cos = np.cos(2.0 * np.pi * self.coords[0])

    def state(self, t):
        decay = np.exp(-t)
        F = self._identity() + self._e11(2.0 * np.pi * self.amplitude * self._cos * decay)
        v = -self.amplitude * self._sin * decay * self._unit
        eta = self.eta_base + self.eta_amplitude * self._sin * decay
        return F, v, eta

    def dt_state(self, t):
        F, v, eta = self.state(t)
        return -(F - self._identity()), -v, -(eta - self.eta_base)

    def displacement(self, t):
        return self.coords + self.amplitude * self._sin * np.exp(-t) * self._unit

    def entropy_source(self, t) -> np.ndarray:
        """theta * d eta/dt, the energy supply that the entropy balance requires."""
        return self.temperature(t) * self.dt_state(t)[2]

    def source(self, t, coords=None):
        F, v, eta = self.state(t)
        _, dv, _ = self.dt_state(t)
        Fc, _ = to_cell_major(F, v)
        sigma = np.moveaxis(self.model._stress(Fc, eta), (-2, -1), (0, 1))
        S_v = dv - divergence_values(sigma, self.grid)
        S_E = np.sum(v * S_v, axis=0) + self.entropy_source(t)
        return join_conserved(np.zeros_like(F), S_v, S_E)


REFERENCES = {'linear-wave': LinearWave, 'mms': ManufacturedSolution}


def manufactured_solution(kind: str, model: EnergyModel, grid: Grid, **params):
    """(reference, source hook or None) for kind in linear-wave | mms."""
    if kind not in REFERENCES:
        raise UnsupportedCombination(f'{SolverError.UNSUPPORTED}: {kind}')
    reference = REFERENCES[kind](model, grid, **params)
    source = reference.source if kind == 'mms' else None
    return reference, source


def balance_residuals(model: EnergyModel, ref: Reference, t: float) -> dict:
    """Max pointwise residual of each balance law, spatial derivatives taken spectrally."""
    grid = ref.grid
    F, v, eta = ref.state(t)
    dF, dv, deta = ref.dt_state(t)
    Fc, _ = to_cell_major(F, v)
    sigma = np.moveaxis(model._stress(Fc, eta), (-2, -1), (0, 1))
    theta = model._temperature(Fc, eta)
    source = ref.source(t)
    if source is None:
        source = np.zeros((grid.dim * grid.dim + grid.dim + 1,) + grid.shape)
    d2 = grid.dim * grid.dim

    res_F = dF - gradient_values(v, grid)
    res_v = dv - divergence_values(sigma, grid) - source[d2:d2 + grid.dim]
    dE = np.sum(v * dv, axis=0) + np.einsum('ij...,ij...->...', sigma, dF) + theta * deta
    power = np.einsum('ia...,i...->a...', sigma, v)
    res_E = dE - divergence_values(power, grid) - source[-1]
    return {'F': float(np.max(np.abs(res_F))), 'v': float(np.max(np.abs(res_v))),
            'E': float(np.max(np.abs(res_E)))}


def l1_error(W: np.ndarray, reference_W: np.ndarray, grid: Grid) -> float:
    return float(np.sum(np.abs(W - reference_W)) * grid.cell_volume)
