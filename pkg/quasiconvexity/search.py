"""Search for the quasiconvexity constant: laminate sweeps plus gradient descent."""
import logging
from dataclasses import dataclass, field

import numpy as np

from constitutive.models import EnergyModel
from errors import InadmissibleExcursion, ZeroDenominator
from fields.grid import Grid, GridField, TestField, make_grid
from quasiconvexity.functionals import (
    base_state,
    descend,
    evaluate_quotient,
    quotient_objective,
    weight_density,
)
from quasiconvexity.testfields import cell_major_pair, laminate_field, normalized, random_test_field
from symmetrizer.analysis import sobol_directions

logger = logging.getLogger(__name__)

AMPLITUDES = (1e-2, 1e-1, 1.0, 3.0)
FRACTIONS = (0.5, 0.25)
PSI_WEIGHTS = (0.0, 0.5, -0.5)
POSITIVE_THRESHOLD = 1e-6
NEGATIVE_THRESHOLD = -1e-6
DEFAULT_RESOLUTION = 32

CERTIFIED = 'certified-positive'
COUNTEREXAMPLE = 'counterexample'
INCONCLUSIVE = 'inconclusive'


def classify(value: float) -> str:
    if value < NEGATIVE_THRESHOLD:
        return COUNTEREXAMPLE
    if value >= POSITIVE_THRESHOLD:
        return CERTIFIED
    return INCONCLUSIVE


@dataclass
class QCReport:
    c0_estimate: float
    witness: TestField
    status: str
    evaluations: int
    model: str = ''
    lambda1: np.ndarray = None
    lambda2: float = 0.0
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return self.status == CERTIFIED

    def summary(self) -> str:
        return (f'{self.model}: c0 ~ {self.c0_estimate:.6g} ({self.status}) after '
                f'{self.evaluations} evaluations, {self.skipped} excursions skipped')


class _Tracker:
    """Keeps the smallest quotient seen and counts evaluations."""

    def __init__(self, model, F0, eta0):
        self.model, self.F0, self.eta0 = model, F0, eta0
        self.best, self.witness = np.inf, None
        self.evaluations = 0
        self.skipped = 0

    def consider(self, tf: TestField) -> float:
        self.evaluations += 1
        try:
            value = evaluate_quotient(self.model, self.F0, self.eta0, tf).value
        except InadmissibleExcursion:
            self.skipped += 1
            return np.inf
        except ZeroDenominator:
            return np.inf
        self.offer(value, tf)
        return value

    def offer(self, value: float, tf: TestField) -> None:
        if value < self.best:
            self.best, self.witness = value, tf


def laminate_sweep(tracker: _Tracker, grid: Grid, amplitudes, n_dirs: int, seed: int,
                   fractions=FRACTIONS, psi_weights=PSI_WEIGHTS, boundary_mode: str = 'periodic') -> dict:
    """Evaluate laminates over Sobol (a, n) pairs; returns the best laminate per amplitude."""
    d = grid.dim
    best_at = {}
    for pair in sobol_directions(2 * d, n_dirs, seed):
        a, n = pair[:d], pair[d:]
        if np.linalg.norm(a) < 1e-12 or np.linalg.norm(n) < 1e-12:
            continue
        a, n = a / np.linalg.norm(a), n / np.linalg.norm(n)
        for t in amplitudes:
            for fraction in fractions:
                for weight in psi_weights:
                    tf = laminate_field(a, n, fraction, t, grid, boundary_mode=boundary_mode, psi_weight=weight)
                    value = tracker.consider(tf)
                    if value < best_at.get(t, (np.inf, None))[0]:
                        best_at[t] = (value, tf)
    return best_at


def minimize_qc_quotient(model: EnergyModel, lambda1, lambda2, grid: Grid = None, modes: int = 4,
                         amplitudes=AMPLITUDES, iters: int = 40, seed: int = 0, n_dirs: int = 32,
                         restarts: int = 2) -> QCReport:
    """Smallest quasiconvexity quotient found at (lambda1, lambda2), classified by sign."""
    grid = grid or make_grid(model.dim, DEFAULT_RESOLUTION)
    F0, eta0 = base_state(model, lambda1, lambda2)
    tracker = _Tracker(model, F0, eta0)
    rng = np.random.default_rng(seed)

    best_at = laminate_sweep(tracker, grid, amplitudes, n_dirs, seed)
    logger.info('%s laminate sweep: best quotient %.6g over %d fields', model.name, tracker.best, tracker.evaluations)

    objective = quotient_objective(model, F0, eta0)
    for t in amplitudes:
        starts = [random_test_field(grid, rng, modes, size=t) for _ in range(restarts)]
        if t in best_at and best_at[t][1] is not None:
            starts.insert(0, normalized(best_at[t][1], t))
        for start in starts:
            try:
                result = descend(objective, start, iters, t)
            except (InadmissibleExcursion, ZeroDenominator):
                tracker.skipped += 1
                continue
            tracker.evaluations += result.evaluations
            tracker.offer(result.value, result.field)

    if tracker.skipped:
        logger.warning('%d test fields left the admissible region and were skipped', tracker.skipped)
    if tracker.witness is None:
        return QCReport(np.nan, None, INCONCLUSIVE, tracker.evaluations, model.name,
                        np.asarray(F0), float(eta0), tracker.skipped)
    c0 = evaluate_quotient(model, F0, eta0, tracker.witness).value
    report = QCReport(c0, tracker.witness, classify(c0), tracker.evaluations, model.name,
                      np.asarray(F0), float(eta0), tracker.skipped)
    logger.info(report.summary())
    return report


@dataclass
class EquivalenceReport:
    c0_definition: float
    c0_curl_form: float
    max_split_residual: float
    max_zero_mean_gap: float
    same_sign: bool
    fields: int
    mean_only_fields: int = 0

    @property
    def passed(self) -> bool:
        return self.same_sign


def _curl_form(model, F0, eta0, tf: TestField):
    """Split psi = m + (psi - m) and evaluate the curl form at (F0, eta0 + m) without e_eta correction."""
    G, psi = cell_major_pair(tf)
    m = float(psi.mean())
    fluct = psi - m
    volume = tf.grid.cell_volume
    shifted = eta0 + m
    numerator = float(np.sum(model._energy(F0 + G, shifted + fluct) - model._energy(F0, shifted)) * volume)
    denominator = float(np.sum(weight_density(G, fluct, model.p, model.q)) * volume)
    mean_part = float(model._energy(F0, shifted) - model._energy(F0, eta0) - model._temperature(F0, eta0) * m)
    return numerator, denominator, mean_part, m


def qc_equivalence_check(model: EnergyModel, lambda1, lambda2, budget: int = 16, seed: int = 0,
                         grid: Grid = None, modes: int = 3, size: float = 0.5) -> EquivalenceReport:
    """Compare the e_eta-corrected functional with the zero-mean curl form on shared fields."""
    grid = grid or make_grid(model.dim, DEFAULT_RESOLUTION)
    F0, eta0 = base_state(model, lambda1, lambda2)
    rng = np.random.default_rng(seed)

    batch = []
    for k in range(budget):
        tf = random_test_field(grid, rng, modes, size=size)
        if k % 2:
            offset = rng.uniform(-0.5, 0.5) * size
            tf = TestField(tf.phi, GridField(grid, 'scalar', tf.psi.values + offset))
        batch.append(tf)
    for pair in sobol_directions(2 * grid.dim, max(2, budget // 4), seed):
        a, n = pair[:grid.dim], pair[grid.dim:]
        batch.append(laminate_field(a / np.linalg.norm(a), n / np.linalg.norm(n), 0.5, size, grid))

    definition, curl_form = [], []
    split, gap, mean_only = 0.0, 0.0, 0
    for tf in batch:
        try:
            full = evaluate_quotient(model, F0, eta0, tf)
            numerator, denominator, mean_part, m = _curl_form(model, F0, eta0, tf)
        except (InadmissibleExcursion, ZeroDenominator):
            continue
        definition.append(full.value)
        split = max(split, abs(full.numerator - numerator - mean_part))
        if denominator > 0.0:
            curl_form.append(numerator / denominator)
            if abs(m) <= 1e-14 * (1.0 + size):
                gap = max(gap, abs(full.value - curl_form[-1]))
        else:
            mean_only += 1
    c0_def = min(definition) if definition else np.nan
    c0_curl = min(curl_form) if curl_form else np.nan
    same = classify(c0_def) == classify(c0_curl)
    logger.info('%s equivalence: definition %.6g, curl form %.6g, split residual %.3g',
                model.name, c0_def, c0_curl, split)
    return EquivalenceReport(c0_def, c0_curl, split, gap, same, len(definition), mean_only)


@dataclass
class RankOneProfile:
    min_curvature: float
    t_at: float
    amplitude_at: float
    convex: bool
    curvatures: dict = field(default_factory=dict)


def rank_one_profile(model: EnergyModel, lambda1, lambda2, a, n, amplitudes=(0.1, 1.0, 3.0),
                     points: int = 41) -> RankOneProfile:
    """Second differences of t -> e(lambda1 + t a(x)n, lambda2) over [-T, T] for each T."""
    F0, eta0 = base_state(model, lambda1, lambda2)
    M = np.outer(np.asarray(a, dtype=float), np.asarray(n, dtype=float))
    worst, t_at, amp_at = np.inf, 0.0, 0.0
    curvatures = {}
    for T in amplitudes:
        ts = np.linspace(-T, T, points)
        h = ts[1] - ts[0]
        F = F0 + ts[:, None, None] * M
        eta = np.full(ts.shape, float(eta0))
        values = np.where(model.is_admissible(F, eta), model._energy(F, eta), np.nan)
        second = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / h ** 2
        curvatures[T] = second
        if np.all(np.isnan(second)):
            continue
        k = int(np.nanargmin(second))
        if second[k] < worst:
            worst, t_at, amp_at = float(second[k]), float(ts[k + 1]), T
    return RankOneProfile(worst, t_at, amp_at, bool(worst >= -1e-8), curvatures)
