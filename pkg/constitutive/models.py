"""Internal-energy models e(F, eta) and their derivatives.

Every model evaluates on stacks of states: F has shape (..., d, d) and eta
has shape (...). The public methods validate admissibility; subclasses
implement the underscored hooks.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from errors import InadmissibleState, ModelError, ModelNotFound

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HessianBlock:
    e_FF: np.ndarray      # (..., d, d, d, d)
    e_Feta: np.ndarray    # (..., d, d)
    e_etaeta: np.ndarray  # (...)

    @property
    def FF_matrix(self) -> np.ndarray:
        d = self.e_FF.shape[-1]
        return self.e_FF.reshape(self.e_FF.shape[:-4] + (d * d, d * d))

    def form(self, G: np.ndarray, psi: np.ndarray) -> np.ndarray:
        """L[(G, psi), (G, psi)] for stacked G (..., d, d) and psi (...)."""
        quad = np.einsum('...ij,...ijkl,...kl->...', G, self.e_FF, G)
        cross = np.einsum('...ij,...ij->...', self.e_Feta, G)
        return quad + 2.0 * cross * psi + self.e_etaeta * psi ** 2


def frobenius_sq(F: np.ndarray) -> np.ndarray:
    return np.asarray(np.sum(F ** 2, axis=(-2, -1)))


def trace(F: np.ndarray) -> np.ndarray:
    return np.asarray(np.trace(F, axis1=-2, axis2=-1))


def identity4(dim: int) -> np.ndarray:
    """delta_ik delta_jl, the identity on d x d matrices."""
    eye = np.eye(dim)
    return np.einsum('ik,jl->ijkl', eye, eye)


class EnergyModel:
    """Base class and extension interface for energy densities."""
    name = 'base'

    def __init__(self, dim: int, p: float = 2.0, q: float = 2.0, eta_min: float = -np.inf):
        if not (p >= q >= 2):
            raise ValueError(ModelError.BAD_EXPONENTS)
        self.dim = dim
        self.p = float(p)
        self.q = float(q)
        self.admissible_eta_min = float(eta_min)

    @property
    def parameters(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {'name': self.name, 'dim': self.dim, 'p': self.p, 'q': self.q, **self.parameters}

    # hooks
    def _energy(self, F, eta):
        raise NotImplementedError

    def _stress(self, F, eta):
        raise NotImplementedError

    def _temperature(self, F, eta):
        raise NotImplementedError

    def _hessian(self, F, eta) -> HessianBlock:
        raise NotImplementedError

    def _positivity_temperature(self, F, eta):
        return self._temperature(F, eta)

    # validated interface
    def as_matrix(self, F) -> np.ndarray:
        F = np.asarray(F, dtype=float)
        if F.ndim >= 2 and F.shape[-2:] == (self.dim, self.dim):
            return F
        if self.dim == 1:
            return F[..., None, None]
        raise ValueError(f'expected matrices of shape ({self.dim}, {self.dim}), got {F.shape}')

    def is_admissible(self, F, eta) -> np.ndarray:
        F = self.as_matrix(F)
        eta = np.asarray(eta, dtype=float)
        finite = np.all(np.isfinite(F), axis=(-2, -1)) & np.isfinite(eta)
        with np.errstate(invalid='ignore', over='ignore'):
            theta = self._positivity_temperature(F, eta)
            return finite & (eta > self.admissible_eta_min) & (theta > 0)

    def check_admissible(self, F, eta):
        F = self.as_matrix(F)
        eta = np.asarray(eta, dtype=float)
        if not np.all(np.isfinite(F)) or not np.all(np.isfinite(eta)):
            raise InadmissibleState(ModelError.NON_FINITE)
        if not np.all(self.is_admissible(F, eta)):
            raise InadmissibleState(f'{ModelError.INADMISSIBLE} for {self.name}')
        return F, eta

    def energy(self, F, eta):
        F, eta = self.check_admissible(F, eta)
        return self._energy(F, eta)

    def stress(self, F, eta):
        F, eta = self.check_admissible(F, eta)
        return self._stress(F, eta)

    def temperature(self, F, eta):
        F, eta = self.check_admissible(F, eta)
        return self._temperature(F, eta)

    def hessian(self, F, eta) -> HessianBlock:
        F, eta = self.check_admissible(F, eta)
        return self._hessian(F, eta)


class QuadraticThermoelastic(EnergyModel):
    """e = k/2 |F|^2 + eta^2/2 + alpha*eta."""
    name = 'quadratic'

    def __init__(self, alpha: float = 1.0, dim: int = 2, stiffness: float = 1.0):
        super().__init__(dim, 2.0, 2.0, eta_min=-alpha)
        self.alpha = float(alpha)
        self.stiffness = float(stiffness)

    @property
    def parameters(self) -> dict:
        return {'alpha': self.alpha, 'stiffness': self.stiffness}

    def _energy(self, F, eta):
        return 0.5 * self.stiffness * frobenius_sq(F) + 0.5 * eta ** 2 + self.alpha * eta

    def _stress(self, F, eta):
        return self.stiffness * F * np.ones_like(eta)[..., None, None]

    def _temperature(self, F, eta):
        return (eta + self.alpha) * np.ones(F.shape[:-2])

    def _hessian(self, F, eta):
        batch = np.broadcast_shapes(F.shape[:-2], np.shape(eta))
        d = self.dim
        return HessianBlock(
            e_FF=np.broadcast_to(self.stiffness * identity4(d), batch + (d, d, d, d)).copy(),
            e_Feta=np.zeros(batch + (d, d)),
            e_etaeta=np.ones(batch),
        )


class PowerLawCoupled(EnergyModel):
    """e = (1/p)(1+|F|^2)^(p/2) + (1/q)(1+eta^2)^(q/2) + alpha*eta + kappa*tr(F)*eta.

    The admissible entropy bound is where h'(eta) dominates the coupling
    over |F| <= K, so theta > 0 there.
    """
    name = 'powerlaw'

    def __init__(self, p: float = 4.0, q: float = 2.0, kappa: float = 0.1, alpha: float = 1.0,
                 dim: int = 2, K: float = 5.0):
        self.kappa = float(kappa)
        self.alpha = float(alpha)
        self.K = float(K)
        super().__init__(dim, p, q)
        self.admissible_eta_min = self._entropy_floor()

    @property
    def parameters(self) -> dict:
        return {'kappa': self.kappa, 'alpha': self.alpha, 'K': self.K}

    def _h_prime(self, eta):
        return eta * (1.0 + eta ** 2) ** (self.q / 2 - 1) + self.alpha

    def _entropy_floor(self) -> float:
        target = abs(self.kappa) * np.sqrt(self.dim) * self.K
        g = lambda e: self._h_prime(e) - target
        hi = 1.0
        while g(hi) <= 0:
            hi *= 2.0
        lo = -1.0
        while g(lo) >= 0:
            lo *= 2.0
        root = brentq(g, lo, hi, xtol=1e-14)
        logger.debug('powerlaw entropy floor %.6g for K=%g', root, self.K)
        return root

    def _energy(self, F, eta):
        s = 1.0 + frobenius_sq(F)
        return (s ** (self.p / 2) / self.p + (1.0 + eta ** 2) ** (self.q / 2) / self.q
                + self.alpha * eta + self.kappa * trace(F) * eta)

    def _stress(self, F, eta):
        s = 1.0 + frobenius_sq(F)
        eye = np.eye(self.dim)
        return s[..., None, None] ** (self.p / 2 - 1) * F + self.kappa * np.asarray(eta)[..., None, None] * eye

    def _temperature(self, F, eta):
        return self._h_prime(eta) + self.kappa * trace(F)

    def _hessian(self, F, eta):
        s = 1.0 + frobenius_sq(F)
        d = self.dim
        e_FF = (s ** (self.p / 2 - 1))[..., None, None, None, None] * identity4(d) \
            + (self.p - 2) * (s ** (self.p / 2 - 2))[..., None, None, None, None] \
            * np.einsum('...ij,...kl->...ijkl', F, F)
        batch = np.broadcast_shapes(F.shape[:-2], np.shape(eta))
        w = 1.0 + eta ** 2
        e_etaeta = w ** (self.q / 2 - 1) + (self.q - 2) * eta ** 2 * w ** (self.q / 2 - 2)
        return HessianBlock(
            e_FF=np.broadcast_to(e_FF, batch + (d, d, d, d)).copy(),
            e_Feta=np.broadcast_to(self.kappa * np.eye(d), batch + (d, d)).copy(),
            e_etaeta=np.broadcast_to(e_etaeta, batch).copy(),
        )


def _cofactor2(F):
    cof = np.empty_like(F)
    cof[..., 0, 0] = F[..., 1, 1]
    cof[..., 0, 1] = -F[..., 1, 0]
    cof[..., 1, 0] = -F[..., 0, 1]
    cof[..., 1, 1] = F[..., 0, 0]
    return cof


def _det_hessian2() -> np.ndarray:
    H = np.zeros((2, 2, 2, 2))
    H[0, 0, 1, 1] = H[1, 1, 0, 0] = 1.0
    H[0, 1, 1, 0] = H[1, 0, 0, 1] = -1.0
    return H


class PolyconvexDet(EnergyModel):
    """Two-dimensional polyconvex energy with a (det F - 1)^2 term.

    Not convex in F near F = 0 but positive on rank-one directions.
    """
    name = 'polyconvex'

    def __init__(self, beta: float = 0.1, gamma: float = 2.0, alpha: float = 1.0, dim: int = 2):
        if dim != 2:
            raise ValueError('PolyconvexDet is defined for d = 2')
        super().__init__(2, 4.0 if beta > 0 else 2.0, 2.0, eta_min=-alpha)
        self.beta = float(beta)
        self.gamma = float(gamma)
        self.alpha = float(alpha)

    @property
    def parameters(self) -> dict:
        return {'beta': self.beta, 'gamma': self.gamma, 'alpha': self.alpha}

    def _energy(self, F, eta):
        n2 = frobenius_sq(F)
        det = np.asarray(np.linalg.det(F))
        return (0.5 * n2 + 0.25 * self.beta * n2 ** 2 + 0.5 * self.gamma * (det - 1.0) ** 2
                + 0.5 * eta ** 2 + self.alpha * eta)

    def _stress(self, F, eta):
        n2 = frobenius_sq(F)[..., None, None]
        det = np.asarray(np.linalg.det(F))[..., None, None]
        out = F + self.beta * n2 * F + self.gamma * (det - 1.0) * _cofactor2(F)
        return out * np.ones_like(eta)[..., None, None]

    def _temperature(self, F, eta):
        return (eta + self.alpha) * np.ones(F.shape[:-2])

    def _hessian(self, F, eta):
        n2 = frobenius_sq(F)[..., None, None, None, None]
        det = np.asarray(np.linalg.det(F))[..., None, None, None, None]
        cof = _cofactor2(F)
        e_FF = (identity4(2) + self.beta * (n2 * identity4(2) + 2.0 * np.einsum('...ij,...kl->...ijkl', F, F))
                + self.gamma * (np.einsum('...ij,...kl->...ijkl', cof, cof) + (det - 1.0) * _det_hessian2()))
        batch = np.broadcast_shapes(F.shape[:-2], np.shape(eta))
        return HessianBlock(
            e_FF=np.broadcast_to(e_FF, batch + (2, 2, 2, 2)).copy(),
            e_Feta=np.zeros(batch + (2, 2)),
            e_etaeta=np.ones(batch),
        )


class RankOneDefective(EnergyModel):
    """Quadratic energy minus (beta/2)(F : a(x)n)^2; loses rank-one convexity for beta > 1."""
    name = 'rank1defective'

    def __init__(self, beta: float = 2.0, a=None, n=None, alpha: float = 1.0, dim: int = 2):
        super().__init__(dim, 2.0, 2.0, eta_min=-alpha)
        self.beta = float(beta)
        self.alpha = float(alpha)
        a = np.eye(dim)[0] if a is None else np.asarray(a, dtype=float)
        n = np.eye(dim)[0] if n is None else np.asarray(n, dtype=float)
        self.a = a / np.linalg.norm(a)
        self.n = n / np.linalg.norm(n)
        self.M = np.outer(self.a, self.n)

    @property
    def parameters(self) -> dict:
        return {'beta': self.beta, 'alpha': self.alpha}

    def _energy(self, F, eta):
        proj = np.einsum('...ij,ij->...', F, self.M)
        return 0.5 * frobenius_sq(F) - 0.5 * self.beta * proj ** 2 + 0.5 * eta ** 2 + self.alpha * eta

    def _stress(self, F, eta):
        proj = np.einsum('...ij,ij->...', F, self.M)[..., None, None]
        return (F - self.beta * proj * self.M) * np.ones_like(eta)[..., None, None]

    def _temperature(self, F, eta):
        return (eta + self.alpha) * np.ones(F.shape[:-2])

    def _hessian(self, F, eta):
        d = self.dim
        batch = np.broadcast_shapes(F.shape[:-2], np.shape(eta))
        e_FF = identity4(d) - self.beta * np.einsum('ij,kl->ijkl', self.M, self.M)
        return HessianBlock(
            e_FF=np.broadcast_to(e_FF, batch + (d, d, d, d)).copy(),
            e_Feta=np.zeros(batch + (d, d)),
            e_etaeta=np.ones(batch),
        )


def _vp_parts(x_sq, exponent):
    """|z|^i + |z|^2 and its first two radial-derivative factors from |z|^2."""
    r = np.sqrt(x_sq)
    value = r ** exponent + x_sq
    with np.errstate(divide='ignore', invalid='ignore'):
        first = np.where(r > 0, exponent * r ** (exponent - 2), 0.0 if exponent > 2 else exponent) + 2.0
        second = np.where(r > 0, exponent * (exponent - 2) * r ** (exponent - 4), 0.0)
    return value, first, second


class TildeEnergyModel(EnergyModel):
    """e~ = e - c1 |V_p(F)|^2 - c2 |V_q(eta)|^2; admissibility follows the base model."""

    def __init__(self, base: EnergyModel, c1: float, c2: float):
        if c1 < 0 or c2 < 0:
            raise ValueError('tilde constants must be nonnegative')
        super().__init__(base.dim, base.p, base.q, eta_min=base.admissible_eta_min)
        self.base = base
        self.c1 = float(c1)
        self.c2 = float(c2)
        self.name = f'tilde({base.name})'

    @property
    def parameters(self) -> dict:
        return {'c1': self.c1, 'c2': self.c2, **self.base.parameters}

    def _positivity_temperature(self, F, eta):
        return self.base._positivity_temperature(F, eta)

    def _energy(self, F, eta):
        vf, _, _ = _vp_parts(frobenius_sq(F), self.p)
        ve, _, _ = _vp_parts(eta ** 2, self.q)
        return self.base._energy(F, eta) - self.c1 * vf - self.c2 * ve

    def _stress(self, F, eta):
        _, first, _ = _vp_parts(frobenius_sq(F), self.p)
        return self.base._stress(F, eta) - self.c1 * first[..., None, None] * F

    def _temperature(self, F, eta):
        _, first, _ = _vp_parts(eta ** 2, self.q)
        return self.base._temperature(F, eta) - self.c2 * first * eta

    def _hessian(self, F, eta):
        block = self.base._hessian(F, eta)
        _, f1, f2 = _vp_parts(frobenius_sq(F), self.p)
        _, g1, g2 = _vp_parts(eta ** 2, self.q)
        d = self.dim
        corr_FF = f1[..., None, None, None, None] * identity4(d) \
            + f2[..., None, None, None, None] * np.einsum('...ij,...kl->...ijkl', F, F)
        corr_eta = g1 + g2 * eta ** 2
        return HessianBlock(
            e_FF=block.e_FF - self.c1 * corr_FF,
            e_Feta=block.e_Feta,
            e_etaeta=block.e_etaeta - self.c2 * corr_eta,
        )


def tilde_energy(model: EnergyModel, c1: float, c2: float) -> EnergyModel:
    return TildeEnergyModel(model, c1, c2)


MODEL_CATALOGUE = {
    'quadratic': QuadraticThermoelastic,
    'powerlaw': PowerLawCoupled,
    'polyconvex': PolyconvexDet,
    'rank1defective': RankOneDefective,
}


def make_model(name: str, **params) -> EnergyModel:
    """Build a catalogue model by name."""
    if name not in MODEL_CATALOGUE:
        raise ModelNotFound(f'{ModelError.NOT_FOUND}: {name}')
    if 'dim' in params:
        params['dim'] = int(params['dim'])
    return MODEL_CATALOGUE[name](**params)


def energy(model: EnergyModel, F, eta):
    return model.energy(F, eta)


def stress(model: EnergyModel, F, eta):
    return model.stress(F, eta)


def temperature(model: EnergyModel, F, eta):
    return model.temperature(F, eta)


def hessian(model: EnergyModel, F, eta) -> HessianBlock:
    return model.hessian(F, eta)
