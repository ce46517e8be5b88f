"""Hybrid m-th order differentiator.

Two correction-term families act on the output error z1 - y: before the switch
time T_u, "uniform" terms with exponents > 1 drag arbitrarily large errors into
a bounded set in a time independent of the initial condition; from T_u on,
standard homogeneous sliding-mode terms (exponents < 1, sign term on the last
state) take over and achieve exact differentiation in finite time. The states
z1..zm track y, y', ..., y^(m-1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, EmptyTrace, NonFiniteInput

#: divergence guard: any |z_i| beyond this aborts a run instead of propagating Inf
STATE_LIMIT = 1e12

# sliding-mode gain recipe coefficients, highest-to-lowest state, per order m
_GAIN_COEFFS = {
    4: (5.0, 3.0, 1.5, 1.1),
    5: (8.0, 5.0, 3.0, 1.5, 1.1),
    6: (12.0, 8.0, 5.0, 3.0, 1.5, 1.1),
}


def spow(x, a):
    """Signed power |x|**a * sign(x) for a > 0; the odd extension of x**a.

    spow(0, a) == 0. Works on scalars and arrays.
    """
    if a <= 0:
        raise ValueError("exponent must be > 0")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.abs(x) ** a
    return float(out) if out.ndim == 0 else out


def theta(t: float, T_u: float) -> int:
    """Switch indicator: 0 before T_u, 1 from T_u on (right-continuous at T_u)."""
    return 1 if t >= T_u else 0


@dataclass(frozen=True)
class DifferentiatorConfig:
    """Gains and switching time of the hybrid differentiator.

    kappa are the sliding-mode gains (active from T_u), k the uniform gains
    (active before T_u), alpha > 0 the homogeneity parameter of the uniform part.
    """

    m: int = 4
    kappa: tuple = (16.0, 88.0, 140.0, 110.0)
    k: tuple = (24.0, 216.0, 864.0, 1296.0)
    alpha: float = 0.6
    T_u: float = 3.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 4:
            raise ConfigInvalid("order m must be an integer >= 4")
        object.__setattr__(self, "kappa", tuple(float(v) for v in self.kappa))
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        if len(self.kappa) != self.m or len(self.k) != self.m:
            raise ConfigInvalid(f"need exactly m={self.m} gains in kappa and k")
        if any(v <= 0 for v in self.kappa) or any(v <= 0 for v in self.k):
            raise ConfigInvalid("all gains must be strictly positive")
        if not (self.alpha > 0):
            raise ConfigInvalid("alpha must be > 0")
        if not (self.T_u > 0):
            raise ConfigInvalid("T_u must be > 0")

    def kappa_array(self) -> np.ndarray:
        return np.asarray(self.kappa, dtype=float)

    def k_array(self) -> np.ndarray:
        return np.asarray(self.k, dtype=float)


@dataclass
class DifferentiatorState:
    """Differentiator state vector z (estimates of y..y^(m-1)) at time t."""

    z: np.ndarray
    t: float = 0.0

    @classmethod
    def zero(cls, m: int) -> "DifferentiatorState":
        return cls(z=np.zeros(m), t=0.0)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.z)) and np.all(np.abs(self.z) <= STATE_LIMIT))


def kappa_from_bound(L: float, m: int = 4) -> tuple:
    """Sliding-mode gains from the derivative bound L via the standard recipe.

    kappa_m = c_m*L, kappa_1 = c_1*L^(1/m), and in between
    kappa_i = c_i * L^(1/(m-i+1)) * kappa_{i-1}^((m-i)/(m-i+1)),
    with the classic coefficient ladder c = (5, 3, 1.5, 1.1) for m = 4.
    """
    if not (L > 0):
        raise ConfigInvalid("L must be > 0")
    try:
        coeffs = _GAIN_COEFFS[m]
    except KeyError:
        raise ConfigInvalid(f"gain recipe coefficients available for m in {sorted(_GAIN_COEFFS)}")
    kap = [coeffs[0] * L ** (1.0 / m)]
    for i in range(2, m):
        kap.append(coeffs[i - 1] * L ** (1.0 / (m - i + 1)) * kap[-1] ** ((m - i) / (m - i + 1)))
    kap.append(coeffs[m - 1] * L)
    return tuple(kap)


def derivative_field(
    state: DifferentiatorState, y_meas: float, cfg: DifferentiatorConfig
) -> np.ndarray:
    """Time derivative of the state vector for measurement y_meas at state.t.

    With e = z1 - y_meas and th = theta(t, T_u):
      dz_i = -kappa_i*th*spow(e, (m-i)/m) - k_i*(1-th)*spow(e, (m+alpha*i)/m) + z_{i+1}
      dz_m = -kappa_m*th*sign(e)          - k_m*(1-th)*spow(e, 1+alpha)
    """
    z = np.asarray(state.z, dtype=float)
    if not (np.all(np.isfinite(z)) and math.isfinite(y_meas)):
        raise NonFiniteInput("non-finite state or measurement in derivative_field")
    m = cfg.m
    th = float(theta(state.t, cfg.T_u))
    e = float(z[0]) - y_meas
    dz = np.empty(m)
    for i in range(1, m):
        dz[i - 1] = (
            -cfg.kappa[i - 1] * th * spow(e, (m - i) / m)
            - cfg.k[i - 1] * (1.0 - th) * spow(e, (m + cfg.alpha * i) / m)
            + z[i]
        )
    dz[m - 1] = -cfg.kappa[m - 1] * th * float(np.sign(e)) - cfg.k[m - 1] * (1.0 - th) * spow(
        e, 1.0 + cfg.alpha
    )
    return dz


def exactness_time(result, tol: float) -> float:
    """First recorded time after which max_i |z_i - y^(i-1)| stays <= tol.

    Scans the recorded trace of a scenario result; returns math.inf if the
    residual never stays below tol through the end of the horizon.
    """
    t, z = result.t, result.z
    if t is None or z is None or len(t) == 0:
        raise EmptyTrace("exactness_time needs a non-empty trace with z columns")
    truth = result.signal.derivative_stack(t, z.shape[1])
    resid = np.max(np.abs(z.T - truth), axis=0)
    return first_time_within(t, resid, tol)


def first_time_within(t: np.ndarray, resid: np.ndarray, tol: float) -> float:
    """Earliest t[i] such that resid[j] <= tol for all j >= i (inf if none)."""
    bad = np.nonzero(resid > tol)[0]
    if len(bad) == 0:
        return float(t[0])
    if bad[-1] + 1 >= len(t):
        return math.inf
    return float(t[bad[-1] + 1])
