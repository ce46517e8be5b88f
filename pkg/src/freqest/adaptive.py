"""Two-branch adaptive law for the squared frequency.

The estimate zeta_hat of zeta = w**2 is driven by the regression residual
e = zeta_hat*g1 - g2 built from the window integrals g1, g2 of |z2|, |z4|.
While g1 exceeds the excitation threshold epsilon the law cancels the window
drift exactly, so e obeys the autonomous dynamics
    de/dt = -alpha1*spow(e, 1+q/p) - beta1*spow(e, 1-q/p),
which reaches zero within a time bound independent of e(0). Below the
threshold the same fixed-time dynamics drive zeta_hat itself to zero (the
w = 0 case). The frequency output is w_hat = |zeta_hat|**(1/2).

All fractional powers go through spow: for odd p, q the literal real root of a
negative residual would be nonnegative (an even integer power of the p-th
root), which destabilizes the law for e < 0, and naive floating-point pow on a
negative base is NaN. The sign-preserving odd reading is the one under which
the convergence analysis holds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .differentiator import spow
from .errors import ConfigInvalid, NonFiniteInput

#: loud-failure clamp for the squared-frequency estimate
ZETA_LIMIT = 1e10


@dataclass(frozen=True)
class EstimatorConfig:
    """Adaptation gains, exponent pair, excitation threshold and window length."""

    alpha1: float = 1.0
    beta1: float = 1.0
    p: int = 3
    q: int = 1
    epsilon: float = 0.01
    r: float = 1.0

    def __post_init__(self):
        if not (self.alpha1 > 0 and self.beta1 > 0):
            raise ConfigInvalid("adaptation gains alpha1, beta1 must be > 0")
        if int(self.p) != self.p or int(self.q) != self.q:
            raise ConfigInvalid("p and q must be integers")
        if self.p <= 0 or self.q <= 0 or self.p % 2 == 0 or self.q % 2 == 0:
            raise ConfigInvalid("p and q must be odd positive integers")
        if not (self.q < 2 * self.p):
            raise ConfigInvalid("need q < 2p so the exponent 1 - q/p stays above -1")
        if not (self.epsilon > 0):
            raise ConfigInvalid("excitation threshold epsilon must be > 0")
        if not (self.r > 0):
            raise ConfigInvalid("window length r must be > 0")

    @property
    def exp_hi(self) -> float:
        return 1.0 + self.q / self.p

    @property
    def exp_lo(self) -> float:
        return 1.0 - self.q / self.p


@dataclass
class EstimatorState:
    """Adaptive-law state: zeta_hat, its output w_hat, last branch and residual."""

    zeta_hat: float = 0.0
    w_hat: float = 0.0
    branch: str = "unexcited"
    e_gamma: float = 0.0

    def __post_init__(self):
        self.w_hat = step_output(self.zeta_hat)


def residual(zeta_hat: float, gamma1_hat: float, gamma2_hat: float) -> float:
    """Regression residual zeta_hat*g1 - g2; zero iff the window relation holds."""
    return zeta_hat * gamma1_hat - gamma2_hat


def step_output(zeta_hat: float) -> float:
    """Frequency output |zeta_hat|**(1/2); nonnegative by construction."""
    return math.sqrt(abs(zeta_hat))


def adapt_field(
    state: EstimatorState,
    gamma1_hat: float,
    gamma2_hat: float,
    z2_now: float,
    z2_delayed: float,
    z4_now: float,
    z4_delayed: float,
    cfg: EstimatorConfig,
) -> float:
    """Time derivative of zeta_hat; also refreshes state.branch and state.e_gamma.

    Excited branch (g1 > epsilon): cancel the window drift and push the
    residual along its fixed-time decay. Unexcited branch: drive zeta_hat
    itself to zero along the same decay.
    """
    vals = (gamma1_hat, gamma2_hat, z2_now, z2_delayed, z4_now, z4_delayed, state.zeta_hat)
    if not all(math.isfinite(v) for v in vals):
        raise NonFiniteInput("non-finite input to adapt_field")
    zeta = state.zeta_hat
    e = residual(zeta, gamma1_hat, gamma2_hat)
    state.e_gamma = e
    if gamma1_hat > cfg.epsilon:
        state.branch = "excited"
        drift = zeta * (abs(z2_now) - abs(z2_delayed)) - (abs(z4_now) - abs(z4_delayed))
        return -(cfg.alpha1 * spow(e, cfg.exp_hi) + cfg.beta1 * spow(e, cfg.exp_lo) + drift) / gamma1_hat
    state.branch = "unexcited"
    return -cfg.alpha1 * spow(zeta, cfg.exp_hi) - cfg.beta1 * spow(zeta, cfg.exp_lo)


def settling_bound(cfg: EstimatorConfig) -> float:
    """Upper bound on the fixed-time settling of the scalar decay dynamics.

    For dV/dt <= -a*V^(1+1/mu) - b*V^(1-1/mu) the settling time is at most
    pi*mu/(2*sqrt(a*b)); with V = e**2/2 the decay coefficients become
    a = 2^(1+q/2p)*alpha1, b = 2^(1-q/2p)*beta1 and mu = 2p/q, so the bound
    simplifies to pi*(2p/q)/(4*sqrt(alpha1*beta1)).
    """
    mu = 2.0 * cfg.p / cfg.q
    return math.pi * mu / (4.0 * math.sqrt(cfg.alpha1 * cfg.beta1))
