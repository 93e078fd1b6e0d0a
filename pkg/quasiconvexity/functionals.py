"""Quasiconvexity quotient, its gradient, and a normalized descent loop."""
import logging
from dataclasses import dataclass

import numpy as np

from constitutive.models import EnergyModel
from errors import InadmissibleExcursion, SearchError, ZeroDenominator
from fields.grid import TestField
from quasiconvexity.testfields import adjoint_gradient, cell_major_pair, collar_mask, make_test_field, normalized

logger = logging.getLogger(__name__)

MAX_BACKTRACK = 20
INITIAL_STEP = 0.1


def base_state(model: EnergyModel, lambda1, lambda2):
    F0, eta0 = model.check_admissible(lambda1, lambda2)
    return F0, eta0


def check_excursion(model: EnergyModel, F, eta) -> None:
    if not np.all(model.is_admissible(F, eta)):
        raise InadmissibleExcursion(SearchError.EXCURSION)


def weight_density(G, psi, p: float, q: float) -> np.ndarray:
    """|V_p(G)|^2 + |V_q(psi)|^2 cellwise."""
    r = np.sqrt(np.sum(G ** 2, axis=(-2, -1)))
    s = np.abs(psi)
    return r ** p + r ** 2 + s ** q + s ** 2


def weight_gradient(G, psi, p: float, q: float):
    r = np.sqrt(np.sum(G ** 2, axis=(-2, -1)))
    s = np.abs(psi)
    return (p * r ** (p - 2) + 2.0)[..., None, None] * G, (q * s ** (q - 2) + 2.0) * psi


def to_component_first(G: np.ndarray) -> np.ndarray:
    return np.moveaxis(G, (-2, -1), (0, 1))


@dataclass
class QuotientValue:
    numerator: float
    denominator: float
    grad_phi: np.ndarray = None
    grad_psi: np.ndarray = None

    @property
    def value(self) -> float:
        return self.numerator / self.denominator


def evaluate_quotient(model: EnergyModel, F0, eta0, tf: TestField, gradient: bool = False) -> QuotientValue:
    """Numerator int e(F0 + grad phi, eta0 + psi) - e(F0, eta0) - e_eta(F0, eta0) psi over the V-weighted denominator."""
    G, psi = cell_major_pair(tf)
    F = F0 + G
    eta = eta0 + psi
    check_excursion(model, F, eta)
    volume = tf.grid.cell_volume
    theta0 = model._temperature(F0, eta0)
    numerator = float(np.sum(model._energy(F, eta) - model._energy(F0, eta0) - theta0 * psi) * volume)
    denominator = float(np.sum(weight_density(G, psi, model.p, model.q)) * volume)
    if not denominator > 0.0:
        raise ZeroDenominator(SearchError.ZERO_DENOMINATOR)
    result = QuotientValue(numerator, denominator)
    if gradient:
        Q = result.value
        dD_G, dD_psi = weight_gradient(G, psi, model.p, model.q)
        dN_G = model._stress(F, eta) - model._stress(F0, eta0)
        dN_psi = model._temperature(F, eta) - theta0
        gG = (dN_G - Q * dD_G) * (volume / denominator)
        result.grad_phi = adjoint_gradient(to_component_first(gG), tf.grid, tf.boundary_mode)
        result.grad_psi = (dN_psi - Q * dD_psi) * (volume / denominator)
    return result


def qc_quotient(model: EnergyModel, lambda1, lambda2, tf: TestField) -> float:
    F0, eta0 = base_state(model, lambda1, lambda2)
    return evaluate_quotient(model, F0, eta0, tf).value


def hessian_form_quotient(block, G, psi) -> float:
    """int L[(G, psi), (G, psi)] / int (|G|^2 + psi^2) for cell-major G."""
    numerator = float(np.sum(block.form(G, psi)))
    denominator = float(np.sum(G ** 2) + np.sum(psi ** 2))
    if not denominator > 0.0:
        raise ZeroDenominator(SearchError.ZERO_DENOMINATOR)
    return numerator / denominator


@dataclass
class DescentResult:
    field: TestField
    value: float
    evaluations: int
    steps: int


def descend(objective, tf: TestField, iters: int, size: float, project=None) -> DescentResult:
    """Backtracking descent on raw grid values, renormalized to field_size == size after each step.

    objective(tf) returns (value, grad_phi, grad_psi); excursions and trivial
    fields count as rejected steps. project(grad_phi, grad_psi) restricts the
    search direction. Zero-trace fields without project keep phi on the collar support.
    """
    if project is None and tf.boundary_mode == 'zero_trace':
        mask = collar_mask(tf.grid)

        def project(g_phi, g_psi):
            return g_phi * mask, g_psi

    value, g_phi, g_psi = objective(tf)
    evaluations, steps = 1, 0
    raw = np.sqrt(np.sum(tf.phi.values ** 2) + np.sum(tf.psi.values ** 2))
    step = None
    for _ in range(iters):
        if project is not None:
            g_phi, g_psi = project(g_phi, g_psi)
        g_norm = np.sqrt(np.sum(g_phi ** 2) + np.sum(g_psi ** 2))
        if not g_norm > 0.0:
            break
        if step is None:
            step = INITIAL_STEP * raw / g_norm
        accepted = False
        for _ in range(MAX_BACKTRACK):
            phi = tf.phi.values - step * g_phi
            psi = tf.psi.values - step * g_psi
            candidate = normalized(make_test_field(tf.grid, phi, psi, tf.boundary_mode), size)
            evaluations += 1
            try:
                new_value, new_phi, new_psi = objective(candidate)
            except (InadmissibleExcursion, ZeroDenominator):
                step *= 0.5
                continue
            if new_value < value:
                tf, value, g_phi, g_psi = candidate, new_value, new_phi, new_psi
                step *= 2.0
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        steps += 1
    logger.debug('descent finished at %.6g after %d steps', value, steps)
    return DescentResult(tf, value, evaluations, steps)


def quotient_objective(model: EnergyModel, F0, eta0):
    def objective(tf):
        result = evaluate_quotient(model, F0, eta0, tf, gradient=True)
        return result.value, result.grad_phi, result.grad_psi
    return objective
