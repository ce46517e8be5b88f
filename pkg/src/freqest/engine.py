"""Fixed-step integration of the composed system and scenario orchestration.

One run wires signal -> noise -> differentiator -> window integrals ->
adaptive estimator (and/or the baseline estimator) on a shared measurement
stream, integrates with forward Euler or RK4 at a fixed dt, and records a
thinned trace. Runs are deterministic for a fixed configuration and seed.

Update ordering within a step is fixed: read measurement, differentiator step,
window push with the post-step states, adaptation step, baseline step, record.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .adaptive import EstimatorConfig
from .baseline import BaselineConfig
from .differentiator import DifferentiatorConfig
from .errors import ConfigInvalid, EmptyTrace, NonFiniteState, UnknownAxis
from .signal import DerivativeBound, NoiseSpec, SignalSpec
from .windows import pe_lower_bound

#: steps per kernel invocation; fixed so chunking never affects results
CHUNK = 1_000_000

#: settling tolerance used for the summary metric unless overridden
DEFAULT_SETTLE_TOL = 0.02

SCHEMES = ("euler", "rk4")
ESTIMATORS = ("proposed", "baseline")

_BASE_VARS = ("xi11", "xi13", "xi21", "xi23", "xi31", "xi33", "r1", "r2", "h", "y_sm")


@dataclass(frozen=True)
class SimConfig:
    """Step size, horizon, scheme, estimator set and output thinning."""

    dt: float = 1e-6
    horizon: float = 10.0
    scheme: str = "euler"
    estimators: tuple = ("proposed",)
    record_stride: int = 100

    def __post_init__(self):
        if not (self.dt > 0):
            raise ConfigInvalid("dt must be > 0")
        if self.horizon < 0:
            raise ConfigInvalid("horizon must be >= 0")
        if self.horizon / self.dt > 1e9:
            raise ConfigInvalid("horizon/dt exceeds the 1e9 step guard")
        if self.scheme not in SCHEMES:
            raise ConfigInvalid(f"scheme must be one of {SCHEMES}")
        est = tuple(e for e in ESTIMATORS if e in self.estimators)
        if not est or set(self.estimators) - set(ESTIMATORS):
            raise ConfigInvalid(f"estimators must be a non-empty subset of {ESTIMATORS}")
        object.__setattr__(self, "estimators", est)
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigInvalid("record_stride must be an integer >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class ScenarioResult:
    """Recorded trace plus derived metrics for one scenario run."""

    signal: SignalSpec
    estimators: tuple
    t: np.ndarray
    y: np.ndarray
    y_meas: np.ndarray
    z: np.ndarray | None = None
    gamma1_hat: np.ndarray | None = None
    gamma2_hat: np.ndarray | None = None
    e_gamma: np.ndarray | None = None
    zeta_hat: np.ndarray | None = None
    w_hat: np.ndarray | None = None
    branch: np.ndarray | None = None
    w_hat_baseline: np.ndarray | None = None
    settling_times: dict = field(default_factory=dict)
    final_errors: dict = field(default_factory=dict)
    branch_switches: int = 0
    settle_tol: float = DEFAULT_SETTLE_TOL

    @property
    def w_true(self) -> float:
        return self.signal.w

    @property
    def rows(self) -> int:
        return len(self.t)

    def column_names(self) -> list:
        names = ["t", "y", "y_meas", "w_true"]
        if "proposed" in self.estimators:
            names += [f"z{i + 1}" for i in range(self.z.shape[1])]
            names += ["gamma1_hat", "gamma2_hat", "e_gamma", "zeta_hat", "w_hat", "branch"]
        if "baseline" in self.estimators:
            names.append("w_hat_baseline")
        return names

    def column_data(self) -> list:
        cols = [self.t, self.y, self.y_meas, np.full(self.rows, self.w_true)]
        if "proposed" in self.estimators:
            cols += [self.z[:, i] for i in range(self.z.shape[1])]
            cols += [self.gamma1_hat, self.gamma2_hat, self.e_gamma, self.zeta_hat,
                     self.w_hat, self.branch.astype(float)]
        if "baseline" in self.estimators:
            cols.append(self.w_hat_baseline)
        return cols


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one run: configs plus initial conditions."""

    signal: SignalSpec
    noise: NoiseSpec = NoiseSpec()
    diff: DifferentiatorConfig = DifferentiatorConfig()
    est: EstimatorConfig = EstimatorConfig()
    base: BaselineConfig | None = None
    sim: SimConfig = SimConfig()
    zeta0: float = 1.0
    z0: tuple | None = None
    h0: float = 1.0
    bound: DerivativeBound | None = None
    name: str = "custom"

    def replace(self, **kw) -> "Scenario":
        return dataclasses.replace(self, **kw)

    def run(self) -> ScenarioResult:
        return run(
            self.signal,
            self.noise,
            self.diff,
            self.est,
            self.base,
            self.sim,
            zeta0=self.zeta0,
            z0=self.z0,
            h0=self.h0,
            bound=self.bound,
        )


def _multiple_of(value: float, dt: float, label: str) -> int:
    n = round(value / dt)
    if n < 1 or abs(n * dt - value) > 1e-9 * max(value, 1.0):
        raise ConfigInvalid(f"{label}={value} must be a positive integer multiple of dt={dt}")
    return int(n)


def run(
    signal: SignalSpec,
    noise: NoiseSpec,
    diff: DifferentiatorConfig,
    est: EstimatorConfig,
    base: BaselineConfig | None,
    sim: SimConfig,
    *,
    zeta0: float = 1.0,
    z0=None,
    h0: float = 1.0,
    bound: DerivativeBound | None = None,
    settle_tol: float = DEFAULT_SETTLE_TOL,
) -> ScenarioResult:
    """Integrate the enabled estimators over [0, horizon] and return the trace.

    Raises NonFiniteState (with the offending time and variable) if any state
    diverges, ConfigInvalid for inconsistent configuration.
    """
    use_prop = "proposed" in sim.estimators
    use_base = "baseline" in sim.estimators
    if use_base and base is None:
        raise ConfigInvalid("baseline estimator enabled but no BaselineConfig given")
    if bound is not None:
        bound.validate(signal)

    dt = sim.dt
    steps = sim.steps
    stride = int(sim.record_stride)
    nrows = steps // stride

    if use_prop:
        nwin = _multiple_of(est.r, dt, "window length r")
        switch_step = _multiple_of(diff.T_u, dt, "switch time T_u")
        if signal.w > 0:
            floor = pe_lower_bound(signal, est.r)
            if est.epsilon > floor:
                warnings.warn(
                    f"excitation threshold epsilon={est.epsilon:g} exceeds the "
                    f"guaranteed window floor {floor:g} for this signal",
                    stacklevel=2,
                )
        m = diff.m
        z = np.zeros(m) if z0 is None else np.asarray(z0, dtype=float).copy()
        if z.shape != (m,):
            raise ConfigInvalid(f"z0 must have exactly m={m} entries")
        kap = diff.kappa_array()
        kk = diff.k_array()
        alpha = diff.alpha
        buf2 = np.zeros(nwin)
        buf4 = np.zeros(nwin)
        est_par = np.array([est.alpha1, est.beta1, est.exp_hi, est.exp_lo, est.epsilon])
    else:
        m = 0
        nwin = 1
        switch_step = 0
        z = np.zeros(0)
        kap = np.zeros(0)
        kk = np.zeros(0)
        alpha = 1.0
        buf2 = np.zeros(1)
        buf4 = np.zeros(1)
        est_par = np.zeros(5)

    widx = np.zeros(3, dtype=np.int64)  # head, filled, pushes
    wsum = np.zeros(2)
    est_state = np.array([float(zeta0)])
    counters = np.array([-1, 0], dtype=np.int64)

    if use_base:
        bstate = np.zeros(10)
        bstate[8] = float(h0)
        bpar = np.array([base.b1, base.b2, base.b3, base.b_bar, base.g,
                         base.delta_eps, base.L1, base.L2])
    else:
        bstate = np.zeros(10)
        bpar = np.array([1.0, 2.0, 3.0, 2.5, 1.0, 1e-3, 1.0, 1.0])

    col_g1 = 3 + m if use_prop else -1
    ncols = 3 + (m + 6 if use_prop else 0) + (1 if use_base else 0)
    col_wbase = ncols - 1 if use_base else -1
    rec = np.empty((nrows, ncols))

    scheme = SCHEMES.index(sim.scheme)
    stream = noise.stream()
    carry = None
    k0 = 0
    while k0 < steps:
        n = min(CHUNK, steps - k0)
        t_nodes = (k0 + np.arange(n + 1)) * dt
        y_clean = np.asarray(signal.eval(t_nodes), dtype=float)
        if carry is None:
            nvals = stream.block(k0, n + 1, dt)
        else:
            nvals = np.concatenate(([carry], stream.block(k0 + 1, n, dt)))
        carry = nvals[-1]
        ym = y_clean + nvals
        if scheme == 1:
            ym_mid = np.asarray(signal.eval(t_nodes[:-1] + 0.5 * dt), dtype=float) + nvals[:-1]
        else:
            ym_mid = np.zeros(0)

        status, fail_step, fail_var = _kernels.run_chunk(
            k0, n, dt, scheme, switch_step, stride, use_prop, use_base,
            ym, ym_mid, y_clean, z, kap, kk, alpha,
            buf2, buf4, nwin, widx, wsum, est_state, est_par, counters,
            bstate, bpar, rec, col_g1, col_wbase,
        )
        if status != 0:
            t_fail = (fail_step + 1) * dt
            if status == 1:
                var = f"z{fail_var + 1}"
            elif status == 2:
                var = "zeta_hat"
            else:
                var = _BASE_VARS[fail_var]
            raise NonFiniteState(
                f"state {var} diverged at t={t_fail:.6g} (non-finite or past guard)",
                t=t_fail,
                variable=var,
            )
        k0 += n

    result = ScenarioResult(
        signal=signal,
        estimators=sim.estimators,
        t=rec[:, 0].copy(),
        y=rec[:, 1].copy(),
        y_meas=rec[:, 2].copy(),
        settle_tol=settle_tol,
    )
    if use_prop:
        result.z = rec[:, 3 : 3 + m].copy()
        result.gamma1_hat = rec[:, col_g1].copy()
        result.gamma2_hat = rec[:, col_g1 + 1].copy()
        result.e_gamma = rec[:, col_g1 + 2].copy()
        result.zeta_hat = rec[:, col_g1 + 3].copy()
        result.w_hat = rec[:, col_g1 + 4].copy()
        result.branch = rec[:, col_g1 + 5].astype(np.int8)
        result.branch_switches = int(counters[1])
    if use_base:
        result.w_hat_baseline = rec[:, col_wbase].copy()

    for name in sim.estimators:
        if nrows == 0:
            result.settling_times[name] = math.inf
            result.final_errors[name] = math.inf
            continue
        result.settling_times[name] = settling_time(result, signal.w, settle_tol, estimator=name)
        col = result.w_hat if name == "proposed" else result.w_hat_baseline
        result.final_errors[name] = float(abs(col[-1] - signal.w))
    return result


def settling_time(result: ScenarioResult, w_true: float, tol_abs: float, estimator: str = "proposed") -> float:
    """Smallest recorded t* with |w_hat(t) - w_true| <= tol_abs for all t >= t*.

    Returns math.inf if the estimate is still outside the band at the last
    recorded sample.
    """
    col = result.w_hat if estimator == "proposed" else result.w_hat_baseline
    if col is None or len(col) == 0:
        raise EmptyTrace("settling_time needs a non-empty recorded trace")
    bad = np.nonzero(np.abs(col - w_true) > tol_abs)[0]
    if len(bad) == 0:
        return float(result.t[0])
    if bad[-1] + 1 >= len(col):
        return math.inf
    return float(result.t[bad[-1] + 1])


#: sweepable axes and how they transform the base scenario
_AXES = {
    "zeta0": lambda sc, v: sc.replace(zeta0=float(v)),
    "h0": lambda sc, v: sc.replace(h0=float(v)),
    "eta": lambda sc, v: sc.replace(noise=_with_eta(sc.noise, float(v))),
    "dt": lambda sc, v: sc.replace(sim=dataclasses.replace(sc.sim, dt=float(v))),
    "r": lambda sc, v: sc.replace(est=dataclasses.replace(sc.est, r=float(v))),
}


def _with_eta(noise: NoiseSpec, eta: float) -> NoiseSpec:
    kind = noise.kind
    if kind == "none" and eta > 0:
        kind = "uniform"
    return dataclasses.replace(noise, eta=eta, kind=kind)


@dataclass
class SweepRow:
    """Summary of one sweep point."""

    axis: str
    value: float
    settling_times: dict
    final_errors: dict
    branch_switches: int


def sweep(base: Scenario, axis: str, values, max_workers: int = 4) -> list:
    """Run the base scenario once per axis value; one summary row per value.

    Scenarios run concurrently (thread pool over the compiled loops); rows come
    back in input order.
    """
    if axis not in _AXES:
        raise UnknownAxis(f"axis must be one of {sorted(_AXES)}, got {axis!r}")
    scenarios = [_AXES[axis](base, v) for v in values]
    rows: list = []
    with ThreadPoolExecutor(max_workers=min(max_workers, max(1, len(scenarios)))) as pool:
        futures = [pool.submit(sc.run) for sc in scenarios]
        for v, fut in zip(values, futures):
            res = fut.result()
            rows.append(
                SweepRow(
                    axis=axis,
                    value=float(v),
                    settling_times=dict(res.settling_times),
                    final_errors=dict(res.final_errors),
                    branch_switches=res.branch_switches,
                )
            )
    return rows
