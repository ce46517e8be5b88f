"""Finite-time comparison estimator: Volterra-kernel filters plus a
second-order sliding-mode adaptation.

The measurement is pushed through twelve non-asymptotic kernels built from
three poles b1, b2, b3 and a common rate b_bar; the filtered combinations K1,
K2 satisfy K1 ~ -w**2 * K2 once the kernel transients die out, so the leaky
integrals r1, r2 of |K1|, |K2| expose the squared frequency as r1/r2. A
super-twisting loop drives the estimate h toward that ratio; settling time
grows with the initial error |h(0) - w**2|, which is the behavior the
fixed-time estimator is benchmarked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .differentiator import spow
from .errors import ConfigInvalid, NonFiniteInput


@dataclass(frozen=True)
class BaselineConfig:
    """Kernel poles, leakage, dead-zone and sliding-mode gains.

    g_a is accepted and stored for config fidelity with the published
    parameter set but is not used by the update law.
    """

    b1: float = 1.0
    b2: float = 2.0
    b3: float = 3.0
    b_bar: float = 2.5
    g: float = 1.0
    delta_eps: float = 0.001
    L1: float = 10.0
    L2: float = 2.0
    g_a: float | None = None

    def __post_init__(self):
        poles = (self.b1, self.b2, self.b3)
        if any(b <= 0 for b in poles) or len(set(poles)) != 3:
            raise ConfigInvalid("kernel poles b1, b2, b3 must be positive and pairwise distinct")
        if self.b_bar <= 0 or self.g <= 0 or self.delta_eps <= 0 or self.L1 <= 0 or self.L2 <= 0:
            raise ConfigInvalid("b_bar, g, delta_eps, L1, L2 must all be > 0")


@dataclass
class BaselineState:
    """Filter states, leaky integrators, squared-frequency estimate and the
    sliding-mode auxiliary integrator."""

    xi: np.ndarray          # (xi11, xi13, xi21, xi23, xi31, xi33)
    r1: float = 0.0
    r2: float = 0.0
    h: float = 0.0
    y_sm: float = 0.0

    @classmethod
    def zero(cls, h0: float = 0.0) -> "BaselineState":
        return cls(xi=np.zeros(6), h=float(h0))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.xi, [self.r1, self.r2, self.h, self.y_sm]])


def kernels(t: float, cfg: BaselineConfig) -> dict:
    """The twelve kernel values at time t.

    F(t) = 1 - 3*exp(-b_bar*t) + 3*exp(-2*b_bar*t) - exp(-3*b_bar*t) is shared
    by the three channels; per channel j and power k = 1..3,
    F_jk(t) = b_j^k - 3*(b_j-b_bar)^k*e1 + 3*(b_j-2b_bar)^k*e2 - (b_j-3b_bar)^k*e3.
    All of F, F_j1 vanish at t = 0, so the filter inputs start smoothly.
    """
    e1 = math.exp(-cfg.b_bar * t)
    e2 = e1 * e1
    e3 = e2 * e1
    out = {"F": 1.0 - 3.0 * e1 + 3.0 * e2 - e3}
    for j, b in enumerate((cfg.b1, cfg.b2, cfg.b3), start=1):
        for k in (1, 2, 3):
            out[f"F{j}{k}"] = (
                b**k
                - 3.0 * (b - cfg.b_bar) ** k * e1
                + 3.0 * (b - 2.0 * cfg.b_bar) ** k * e2
                - (b - 3.0 * cfg.b_bar) ** k * e3
            )
    return out


def baseline_field(state: BaselineState, y_meas: float, t: float, cfg: BaselineConfig) -> np.ndarray:
    """Time derivatives of (xi..., r1, r2, h, y_sm) for measurement y_meas at t.

    When the dead zone is active (r2 <= delta_eps) h is frozen but the
    sliding-mode integrator y_sm keeps integrating.
    """
    if not (np.all(np.isfinite(state.xi)) and all(map(math.isfinite, (state.r1, state.r2, state.h, state.y_sm, y_meas)))):
        raise NonFiniteInput("non-finite state or measurement in baseline_field")
    K = kernels(t, cfg)
    xi = state.xi
    poles = (cfg.b1, cfg.b2, cfg.b3)

    dxi = np.empty(6)
    Ka, Kb, Kd = [], [], []
    for j, b in enumerate(poles, start=1):
        xi1, xi3 = xi[2 * (j - 1)], xi[2 * (j - 1) + 1]
        dxi[2 * (j - 1)] = K[f"F{j}1"] * y_meas - b * xi1
        dxi[2 * (j - 1) + 1] = K[f"F{j}3"] * y_meas - b * xi3
        Ka.append(xi3 - K[f"F{j}2"] * y_meas)
        Kb.append(K[f"F{j}1"])
        Kd.append(xi1 - K["F"] * y_meas)
    comb = (Kb[2] - Kb[1], Kb[0] - Kb[2], Kb[1] - Kb[0])
    K1 = sum(a * c for a, c in zip(Ka, comb))
    K2 = sum(d * c for d, c in zip(Kd, comb))

    dr1 = abs(K1) - cfg.g * state.r1
    dr2 = abs(K2) - cfg.g * state.r2
    R = state.r1 - state.r2 * state.h
    if state.r2 > cfg.delta_eps:
        dh = (state.y_sm + cfg.L1 * spow(R, 0.5) - state.h * dr2 + dr1) / state.r2
    else:
        dh = 0.0
    dy_sm = cfg.L2 * float(np.sign(R))
    return np.concatenate([dxi, [dr1, dr2, dh, dy_sm]])


def baseline_output(state: BaselineState) -> float:
    """Frequency estimate |h|**(1/2)."""
    return math.sqrt(abs(state.h))
