"""Hessian coercivity, localization probes and the Garding inequality over background fields."""
import logging
from dataclasses import dataclass, field

import numpy as np

from constitutive.models import EnergyModel, tilde_energy
from constitutive.relative import relative_energy_values
from errors import InadmissibleExcursion, InvalidTestField, SearchError, ZeroDenominator
from fields.grid import Grid, GridField, TestField, grid_coordinates, pointwise_norm
from quasiconvexity.functionals import (
    check_excursion,
    descend,
    hessian_form_quotient,
    to_component_first,
    weight_density,
    weight_gradient,
)
from quasiconvexity.search import minimize_qc_quotient
from quasiconvexity.testfields import (
    adjoint_gradient,
    cell_major_pair,
    check_test_field,
    collar_mask,
    cube_mask,
    field_size,
    laminate_field,
    localized_test_field,
    make_test_field,
    random_test_field,
)
from symmetrizer.analysis import sobol_directions

logger = logging.getLogger(__name__)

DELTA = 0.1
C_PEN_GRID = (0.0, 0.1, 1.0, 10.0, 100.0)
C0_START = 0.5
C0_RATIO = 1.125
C0_STEPS = 40
C1_LADDER = (0.0, 0.01, 0.1, 1.0, 10.0)
LAMINATE_FREQUENCIES = (1, 2, 4, 8)
MARGIN_TOLERANCE = 1e-10


@dataclass(frozen=True)
class BackgroundField:
    """Frozen background (Fbar, etabar) with sup |Fbar| + sup |etabar| <= K."""
    Fbar: GridField
    etabar: GridField
    K: float
    omega: float = 0.0

    def __post_init__(self):
        sup = float(np.max(pointwise_norm(self.Fbar))) + float(np.max(np.abs(self.etabar.values)))
        if sup > self.K * (1.0 + 1e-12):
            raise ValueError(f'background leaves U_K: sup norm {sup:.6g} > K={self.K}')

    @property
    def grid(self) -> Grid:
        return self.Fbar.grid

    def cell_major(self):
        return self.Fbar.cell_major(), self.etabar.values

    def at(self, cell):
        cell = tuple(int(c) for c in np.atleast_1d(cell))
        return self.Fbar.values[(slice(None), slice(None)) + cell], float(self.etabar.values[cell])

    def peak_cell(self) -> tuple:
        size = pointwise_norm(self.Fbar) + np.abs(self.etabar.values)
        return tuple(int(i) for i in np.unravel_index(np.argmax(size), size.shape))

    def quiet_cell(self) -> tuple:
        size = pointwise_norm(self.Fbar)
        return tuple(int(i) for i in np.unravel_index(np.argmin(size), size.shape))


def make_background(grid: Grid, base_F=None, base_eta: float = 0.0, amplitude: float = 0.0,
                    wavenumber: int = 1, K: float = 5.0, eta_amplitude: float = 0.0,
                    direction=None) -> BackgroundField:
    """Fbar = base_F + amplitude cos(2 pi k x1) E, etabar = base_eta + eta_amplitude cos(2 pi k x1).

    E is a unit matrix (default e1 (x) e1); omega is the Lipschitz constant.
    """
    d = grid.dim
    base_F = np.zeros((d, d)) if base_F is None else np.asarray(base_F, dtype=float).reshape(d, d)
    E = np.zeros((d, d)) if direction is None else np.asarray(direction, dtype=float).reshape(d, d)
    if direction is None:
        E[0, 0] = 1.0
    E = E / np.linalg.norm(E)
    wave = np.cos(2.0 * np.pi * wavenumber * grid_coordinates(grid)[0])
    F = base_F.reshape((d, d) + (1,) * d) + amplitude * E.reshape((d, d) + (1,) * d) * wave
    eta = base_eta + eta_amplitude * wave
    omega = 2.0 * np.pi * wavenumber * float(np.hypot(amplitude, eta_amplitude))
    return BackgroundField(GridField(grid, 'matrix', F), GridField(grid, 'scalar', eta), float(K), omega)


def _modified(model: EnergyModel, c1: float, c2: float) -> EnergyModel:
    return tilde_energy(model, c1, c2) if (c1 or c2) else model


def _unit_pairs(dim: int, count: int, seed: int):
    for pair in sobol_directions(2 * dim, count, seed):
        a, n = pair[:dim], pair[dim:]
        if np.linalg.norm(a) > 1e-12 and np.linalg.norm(n) > 1e-12:
            yield a / np.linalg.norm(a), n / np.linalg.norm(n)


def coercivity_fields(grid: Grid, n_fields: int, seed: int, modes: int = 4) -> list:
    """Zero-trace random fields plus zero-trace laminates."""
    rng = np.random.default_rng(seed)
    fields = [random_test_field(grid, rng, modes, boundary_mode='zero_trace') for _ in range(n_fields)]
    for a, n in _unit_pairs(grid.dim, max(2, n_fields // 2), seed):
        fields.append(laminate_field(a, n, 0.5, 1.0, grid, boundary_mode='zero_trace'))
    return fields


@dataclass
class CoercivityReport:
    minimum: float
    c0: float
    cell: tuple
    evaluations: int
    witness: TestField = None


def hessian_coercivity_fixed_point(model: EnergyModel, bg: BackgroundField, x0=None, n_fields: int = 32,
                                   seed: int = 0, c1: float = 0.0, c2: float = 0.0,
                                   modes: int = 4) -> CoercivityReport:
    """min of int L~[(grad phi, psi), .] / int (|grad phi|^2 + psi^2) with coefficients frozen at x0."""
    x0 = bg.peak_cell() if x0 is None else tuple(np.atleast_1d(x0))
    tilde = _modified(model, c1, c2)
    F0, eta0 = bg.at(x0)
    block = tilde.hessian(F0, eta0)
    best, witness = np.inf, None
    fields = coercivity_fields(bg.grid, n_fields, seed, modes)
    for tf in fields:
        G, psi = cell_major_pair(tf)
        try:
            ratio = hessian_form_quotient(block, G, psi)
        except ZeroDenominator:
            continue
        if ratio < best:
            best, witness = ratio, tf
    logger.info('%s coercivity at cell %s: %.6g', tilde.name, x0, best)
    return CoercivityReport(best, best, x0, len(fields), witness)


@dataclass
class DelocalizedReport:
    c: float
    delta: float
    needed_c_pen: float
    feasible_c_pen: float
    worst_margin: float
    c_pen_grid: tuple = C_PEN_GRID

    @property
    def passed(self) -> bool:
        return self.feasible_c_pen is not None


def delocalized_fields(bg: BackgroundField, n_fields: int, seed: int, modes: int = 4, radius: float = 0.25) -> list:
    """Periodic random fields plus fields localized around random cells and the quietest cell."""
    grid = bg.grid
    rng = np.random.default_rng(seed)
    fields = [random_test_field(grid, rng, modes) for _ in range(max(1, n_fields // 2))]
    centres = [bg.quiet_cell()] + [tuple(rng.integers(0, grid.n, size=grid.dim)) for _ in range(max(1, n_fields // 4))]
    per_centre = max(1, (n_fields - len(fields)) // len(centres))
    for centre in centres:
        for _ in range(per_centre):
            fields.append(localized_test_field(grid, rng, centre, radius, modes))
    return fields


def delocalized_hessian_check(model: EnergyModel, bg: BackgroundField, c_pen_grid=C_PEN_GRID, n_fields: int = 32,
                              seed: int = 0, delta: float = DELTA, c1: float = 0.0, c2: float = 0.0,
                              x0=None, modes: int = 4) -> DelocalizedReport:
    """Smallest C_pen with int L~(x)[.] >= c (1 - delta)^2 int (|grad phi|^2 + psi^2) - C_pen int |phi|^2."""
    c = hessian_coercivity_fixed_point(model, bg, x0, n_fields, seed, c1, c2, modes).minimum
    tilde = _modified(model, c1, c2)
    Fb, eb = bg.cell_major()
    tilde.check_admissible(Fb, eb)
    block = tilde._hessian(Fb, eb)
    volume = bg.grid.cell_volume
    target = c * (1.0 - delta) ** 2

    rows = []
    for tf in delocalized_fields(bg, n_fields, seed + 1, modes):
        G, psi = cell_major_pair(tf)
        A = float(np.sum(block.form(G, psi)) * volume)
        B = float((np.sum(G ** 2) + np.sum(psi ** 2)) * volume)
        P = float(np.sum(tf.phi.values ** 2) * volume)
        rows.append((A, B, P))
    needed = 0.0
    for A, B, P in rows:
        deficit = target * B - A
        if deficit > 0.0:
            needed = max(needed, deficit / P if P > 0 else np.inf)
    feasible = next((cp for cp in sorted(c_pen_grid) if cp >= needed - 1e-12), None)
    used = feasible if feasible is not None else max(c_pen_grid)
    worst = min(A - target * B + used * P for A, B, P in rows)
    logger.info('%s delocalized check: c=%.6g needs C_pen >= %.6g (grid choice %s)', tilde.name, c, needed, feasible)
    return DelocalizedReport(c, delta, needed, feasible, worst, tuple(c_pen_grid))


@dataclass
class CubeProbeReport:
    radius: float
    c0: float
    per_radius: dict = field(default_factory=dict)
    violations: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.radius is not None


def _relative_and_weight(model: EnergyModel, bg: BackgroundField, tf: TestField):
    Fb, eb = bg.cell_major()
    G, psi = cell_major_pair(tf)
    F, eta = Fb + G, eb + psi
    check_excursion(model, F, eta)
    volume = bg.grid.cell_volume
    relative = float(np.sum(relative_energy_values(model, F, eta, Fb, eb)) * volume)
    weight = float(np.sum(weight_density(G, psi, model.p, model.q)) * volume)
    return relative, weight


def small_cube_radius_probe(model: EnergyModel, bg: BackgroundField, x0, radii=(0.5, 0.25, 0.125),
                            n_fields: int = 16, seed: int = 0, c0: float = None, c1: float = 0.0,
                            c2: float = 0.0, modes: int = 4, size: float = 0.1) -> CubeProbeReport:
    """Largest radius r at which int_Q(x0, r) e~(. | Fbar, etabar) >= (c0/4) int V-weights held on every sample."""
    radii = tuple(float(r) for r in radii)
    if list(radii) != sorted(radii, reverse=True):
        raise ValueError('radii must be given in descending order')
    tilde = _modified(model, c1, c2)
    x0 = tuple(int(c) for c in np.atleast_1d(x0))
    grid = bg.grid
    if c0 is None:
        F0, eta0 = bg.at(x0)
        c0 = minimize_qc_quotient(tilde, F0, eta0, grid=grid, iters=10, n_dirs=8, restarts=1, seed=seed).c0_estimate
    rng = np.random.default_rng(seed)
    per_radius, violations = {}, {}
    for r in radii:
        mask = cube_mask(grid, x0, r)
        if not np.any(mask == 1.0):
            logger.warning('cube of side %g around %s holds no interior cells on n=%d; skipped', r, x0, grid.n)
            continue
        fields = [random_test_field(grid, rng, modes, size=size, mask=mask, zero_mean_psi=False)
                  for _ in range(n_fields)]
        for a, n in _unit_pairs(grid.dim, max(2, n_fields // 4), seed):
            lam = laminate_field(a, n, 0.5, size, grid, psi_weight=0.5)
            fields.append(make_test_field(grid, lam.phi.values * mask, lam.psi.values * mask, 'zero_trace'))
        worst = np.inf
        count = 0
        for tf in fields:
            try:
                relative, weight = _relative_and_weight(tilde, bg, tf)
            except InadmissibleExcursion:
                continue
            if weight <= 0.0:
                continue
            worst = min(worst, relative / weight)
            if relative < 0.25 * c0 * weight - MARGIN_TOLERANCE * weight:
                count += 1
        per_radius[r] = worst
        violations[r] = count
        logger.debug('cube r=%g: worst ratio %.6g, %d violations', r, worst, count)
    clean = [r for r in per_radius if violations[r] == 0]
    radius = max(clean) if clean else None
    logger.info('%s small-cube probe at %s: R=%s (c0=%.6g)', tilde.name, x0, radius, c0)
    return CubeProbeReport(radius, c0, per_radius, violations)


@dataclass
class GardingReport:
    C0: float
    C1: float
    margins: list
    min_margin: float
    violator: int = None
    witness: TestField = None

    @property
    def passed(self) -> bool:
        return self.violator is None


def _margin_terms(model: EnergyModel, bg: BackgroundField, tf: TestField):
    relative, weight = _relative_and_weight(model, bg, tf)
    phi_norm = np.sqrt(np.sum(tf.phi.values ** 2, axis=0))
    lower = float(np.sum(phi_norm ** model.p + phi_norm ** 2) * bg.grid.cell_volume)
    return relative, lower, weight


def garding_margin(model: EnergyModel, bg: BackgroundField, C0: float, C1: float, tf: TestField) -> float:
    """C0 int e(. | Fbar, etabar) + C1 int |V_p(phi)|^2 - int (|V_p(grad phi)|^2 + |V_q(psi)|^2)."""
    relative, lower, weight = _margin_terms(model, bg, tf)
    return C0 * relative + C1 * lower - weight


def garding_check(model: EnergyModel, bg: BackgroundField, C0: float, C1: float, tf_batch) -> GardingReport:
    """Margins over a batch of zero-trace fields with zero-mean psi."""
    margins = []
    violator, worst = None, np.inf
    for index, tf in enumerate(tf_batch):
        if tf.boundary_mode != 'zero_trace':
            raise InvalidTestField(f'{SearchError.BAD_TEST_FIELD}: Garding fields must be zero-trace')
        check_test_field(tf, zero_mean_psi=True)
        relative, lower, weight = _margin_terms(model, bg, tf)
        margin = C0 * relative + C1 * lower - weight
        margins.append(margin)
        if margin < worst:
            worst = margin
        if violator is None and margin < -MARGIN_TOLERANCE * max(1.0, weight):
            violator = index
    return GardingReport(C0, C1, margins, worst if margins else 0.0, violator,
                         tf_batch[violator] if violator is not None else None)


def garding_batch(grid: Grid, seed: int, n_fields: int = 12, modes: int = 4,
                  amplitudes=(0.01, 0.1, 1.0)) -> list:
    """Zero-trace fields with zero-mean psi: mixed, psi-dominant, phi-only and high-wavenumber laminates."""
    rng = np.random.default_rng(seed)
    batch = []
    per = max(1, n_fields // (3 * len(amplitudes)))
    for t in amplitudes:
        for _ in range(per):
            batch.append(random_test_field(grid, rng, modes, 'zero_trace', size=t))
            batch.append(random_test_field(grid, rng, modes, 'zero_trace', size=t, phi_scale=0.05))
            batch.append(random_test_field(grid, rng, modes, 'zero_trace', size=t, psi_scale=0.0))
    axes = np.eye(grid.dim)
    for frequency in LAMINATE_FREQUENCIES:
        if (grid.n // 2 - 1) // frequency < 1:
            continue
        for t in amplitudes:
            batch.append(laminate_field(axes[0], axes[0], 0.5, t, grid, boundary_mode='zero_trace',
                                        frequency=frequency))
            if grid.dim > 1:
                batch.append(laminate_field(axes[1], axes[0], 0.5, t, grid, boundary_mode='zero_trace',
                                            frequency=frequency))
    return batch


def _margin_objective(model: EnergyModel, bg: BackgroundField, C0: float, C1: float):
    Fb, eb = bg.cell_major()
    volume = bg.grid.cell_volume
    mask = collar_mask(bg.grid)
    p, q = model.p, model.q

    def objective(tf):
        G, psi = cell_major_pair(tf)
        F, eta = Fb + G, eb + psi
        check_excursion(model, F, eta)
        relative = np.sum(relative_energy_values(model, F, eta, Fb, eb))
        weight = np.sum(weight_density(G, psi, p, q))
        phi_norm = np.sqrt(np.sum(tf.phi.values ** 2, axis=0))
        lower = np.sum(phi_norm ** p + phi_norm ** 2)
        value = float((C0 * relative + C1 * lower - weight) * volume)

        dW_G, dW_psi = weight_gradient(G, psi, p, q)
        g_G = C0 * (model._stress(F, eta) - model._stress(Fb, eb)) - dW_G
        g_psi = C0 * (model._temperature(F, eta) - model._temperature(Fb, eb)) - dW_psi
        d_lower = (p * phi_norm ** (p - 2) + 2.0) * tf.phi.values
        g_phi = adjoint_gradient(to_component_first(g_G), bg.grid, 'zero_trace') + C1 * d_lower
        return value, g_phi * volume, g_psi * volume

    def project(g_phi, g_psi):
        return g_phi * mask, g_psi - g_psi.mean()

    return objective, project


def _adversarial_round(model, bg, C0, C1, batch, report: GardingReport, iters: int, worst_count: int = 3):
    """Descend on the margin from the worst fields; returns a violating field or None."""
    objective, project = _margin_objective(model, bg, C0, C1)
    order = np.argsort(report.margins)[:worst_count]
    for index in order:
        start = batch[int(index)]
        try:
            result = descend(objective, start, iters, field_size(start), project)
        except (InadmissibleExcursion, ZeroDenominator):
            continue
        if result.value < -MARGIN_TOLERANCE:
            return result.field
    return None


@dataclass
class GardingEvidence:
    verified: bool
    feasible: bool
    worst_margin: float
    holdout_margin: float
    pairs_checked: int
    batch_size: int
    ladder_step: int
    witness: TestField = field(default=None, repr=False)


def garding_estimate_constants(model: EnergyModel, bg: BackgroundField, budget: int = 2, seed: int = 0,
                               n_fields: int = 12, iters: int = 10, modes: int = 4):
    """Grow (C0, C1) on geometric ladders until no violating field is found; returns (C0, C1, evidence)."""
    grid = bg.grid
    batch = garding_batch(grid, seed, n_fields, modes)
    pairs = 0
    witness = None
    for step in range(C0_STEPS):
        C0 = C0_START * C0_RATIO ** step
        for C1 in C1_LADDER:
            pairs += 1
            try:
                report = garding_check(model, bg, C0, C1, batch)
            except InadmissibleExcursion:
                logger.warning('garding batch left the admissible region; dropping its large fields')
                batch = [tf for tf in batch if _admissible(model, bg, tf)]
                report = garding_check(model, bg, C0, C1, batch)
            if not report.passed:
                witness = report.witness
                continue
            found = None
            for _ in range(budget):
                found = _adversarial_round(model, bg, C0, C1, batch, report, iters)
                if found is None:
                    break
                witness = found
                batch.append(found)
                report = garding_check(model, bg, C0, C1, batch)
                if not report.passed:
                    break
            if found is not None:
                continue
            holdout = garding_check(model, bg, C0, C1, garding_batch(grid, seed + 1, n_fields, modes))
            evidence = GardingEvidence(holdout.passed, True, report.min_margin, holdout.min_margin,
                                       pairs, len(batch), step, holdout.witness)
            logger.info('%s Garding constants C0=%.4g C1=%.4g (holdout margin %.3g)',
                        model.name, C0, C1, holdout.min_margin)
            return C0, C1, evidence
    logger.warning('%s: no feasible Garding pair up to C0=%.4g, C1=%.4g', model.name, C0, C1_LADDER[-1])
    evidence = GardingEvidence(False, False, report.min_margin, np.nan, pairs, len(batch), C0_STEPS - 1,
                               witness)
    return C0, C1_LADDER[-1], evidence


def _admissible(model: EnergyModel, bg: BackgroundField, tf: TestField) -> bool:
    Fb, eb = bg.cell_major()
    G, psi = cell_major_pair(tf)
    return bool(np.all(model.is_admissible(Fb + G, eb + psi)))
