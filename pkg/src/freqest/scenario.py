"""Declarative scenario files (TOML) and the built-in presets.

A scenario file has sections [signal], [noise], [differentiator], [estimator],
[baseline], [sim]; every field is optional when a top-level `preset = "name"`
supplies the rest. Unknown keys are rejected so typos fail loudly. The
resolved configuration echoed into a run summary re-parses to an identical
scenario.
"""
from __future__ import annotations

import copy
import math
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .adaptive import EstimatorConfig
from .baseline import BaselineConfig
from .differentiator import DifferentiatorConfig, kappa_from_bound
from .engine import Scenario, SimConfig
from .errors import ConfigInvalid
from .signal import DerivativeBound, NoiseSpec, SignalSpec

_SECTION_KEYS = {
    "signal": {"A", "B", "w", "phi0", "B_min", "w_min"},
    "noise": {"kind", "eta", "seed", "freq", "phase"},
    "differentiator": {"m", "kappa", "k", "alpha", "T_u", "z0", "L"},
    "estimator": {"alpha1", "beta1", "p", "q", "epsilon", "r", "zeta0"},
    "baseline": {"b1", "b2", "b3", "b_bar", "g", "g_a", "delta_eps", "L1", "L2", "h0"},
    "sim": {"dt", "horizon", "scheme", "estimators", "record_stride"},
}
_TOP_KEYS = set(_SECTION_KEYS) | {"preset", "name"}


def _sec5_proposed(T_u: float, kappa: list) -> dict:
    return {
        "signal": {"A": 10.0, "B": 4.0, "w": 2.0, "phi0": 2.0},
        "noise": {"kind": "none"},
        "differentiator": {
            "m": 4,
            "kappa": kappa,
            "k": [24.0, 216.0, 864.0, 1296.0],
            "alpha": 0.6,
            "T_u": T_u,
            "L": 160.0,
        },
        "estimator": {"alpha1": 1.0, "beta1": 1.0, "p": 3, "q": 1, "epsilon": 0.01,
                      "r": 1.0, "zeta0": 1.0},
        "sim": {"dt": 1e-6, "horizon": 10.0, "scheme": "euler",
                "estimators": ["proposed"], "record_stride": 100},
    }


def _sec5_baseline(g: float, L1: float, L2: float, h0: float, g_a=None) -> dict:
    base = {"b1": 1.0, "b2": 2.0, "b3": 3.0, "b_bar": 2.5, "g": g,
            "delta_eps": 0.001, "L1": L1, "L2": L2, "h0": h0}
    if g_a is not None:
        base["g_a"] = g_a
    return {
        "signal": {"A": 10.0, "B": 4.0, "w": 2.0, "phi0": 2.0},
        "noise": {"kind": "none"},
        "baseline": base,
        "sim": {"dt": 1e-6, "horizon": 40.0, "scheme": "euler",
                "estimators": ["baseline"], "record_stride": 1000},
    }


def _a3_baseline(h0: float, horizon: float) -> dict:
    return {
        "signal": {"A": 2.0, "B": 3.0, "w": 4.0, "phi0": math.pi / 4},
        "noise": {"kind": "none"},
        "baseline": {"b1": 1.0, "b2": 2.0, "b3": 3.0, "b_bar": 2.5, "g": 3.0,
                     "delta_eps": 1e-4, "L1": 30.0, "L2": 2.0, "h0": h0},
        "sim": {"dt": 1e-5, "horizon": horizon, "scheme": "euler",
                "estimators": ["baseline"], "record_stride": 1000},
    }


# initial squared-frequency values for the five growing-error baseline runs,
# chosen so the initial frequency errors are -1.7, 17, 7e4, 2.2e5, 7e6
_A1_OFFSETS = (-1.7, 17.0, 7e4, 2.2e5, 7e6)
_A1_HORIZONS = (5.0, 5.0, 150.0, 400.0, 150.0)

PRESETS: dict[str, dict] = {
    "fig1-proposed": _sec5_proposed(3.0, [16.0, 88.0, 140.0, 110.0]),
    "fig1-proposed-mfile": _sec5_proposed(1.0, list(kappa_from_bound(160.0, 4))),
    "fig2-proposed": None,  # filled below
    "fig1-baseline-text": _sec5_baseline(0.1, 1.5, 1.1, 1.0, g_a=25.0),
    "fig1-baseline-mfile": _sec5_baseline(1.0, 10.0, 2.0, 5e6),
}
_fig2 = _sec5_proposed(3.0, [16.0, 88.0, 140.0, 110.0])
_fig2["noise"] = {"kind": "uniform", "eta": 0.25, "seed": 2020}
PRESETS["fig2-proposed"] = _fig2
for _label, _off, _hor in zip("abcde", _A1_OFFSETS, _A1_HORIZONS):
    PRESETS[f"figA1-{_label}"] = _a3_baseline((4.0 + _off) ** 2, _hor)

PRESET_NOTES = {
    "fig1-proposed": "demo signal 4*sin(2t+2)+10, proposed estimator, noise-free",
    "fig1-proposed-mfile": "same with switch at t=1 and bound-derived sliding gains",
    "fig2-proposed": "same signal with uniform noise, |n| <= 0.25",
    "fig1-baseline-text": "baseline estimator, narrative parameter set (g=0.1, L1=1.5, L2=1.1)",
    "fig1-baseline-mfile": "baseline estimator, reference-code parameter set (g=1, L1=10, L2=2)",
    "figA1-a": "baseline growth study, initial frequency error -1.7",
    "figA1-b": "baseline growth study, initial frequency error 17",
    "figA1-c": "baseline growth study, initial frequency error 7e4",
    "figA1-d": "baseline growth study, initial frequency error 2.2e5",
    "figA1-e": "baseline growth study, initial frequency error 7e6",
}


def _check_keys(raw: dict) -> None:
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown top-level keys in scenario: {sorted(unknown)}")
    for section, allowed in _SECTION_KEYS.items():
        if section in raw:
            if not isinstance(raw[section], dict):
                raise ConfigInvalid(f"section [{section}] must be a table")
            bad = set(raw[section]) - allowed
            if bad:
                raise ConfigInvalid(f"unknown keys in [{section}]: {sorted(bad)}")


def merge_preset(raw: dict) -> dict:
    """Overlay an explicit scenario dict onto its preset (if any)."""
    _check_keys(raw)
    name = raw.get("preset")
    if name is None:
        merged: dict[str, Any] = {}
    else:
        if name not in PRESETS:
            raise ConfigInvalid(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
        merged = copy.deepcopy(PRESETS[name])
    for section in _SECTION_KEYS:
        if section in raw:
            merged.setdefault(section, {}).update(raw[section])
    if "name" in raw:
        merged["name"] = raw["name"]
    elif name is not None:
        merged.setdefault("name", name)
    return merged


def build_scenario(raw: dict) -> Scenario:
    """Typed Scenario from a (possibly partial) scenario dict; presets applied."""
    d = merge_preset(raw)
    sig = d.get("signal", {})
    if not {"A", "B", "w", "phi0"} <= set(sig):
        raise ConfigInvalid("scenario needs [signal] A, B, w, phi0 (directly or via preset)")
    signal = SignalSpec(**sig)
    noise = NoiseSpec(**d.get("noise", {}))
    dsec = dict(d.get("differentiator", {}))
    z0 = dsec.pop("z0", None)
    L = dsec.pop("L", None)
    diff = DifferentiatorConfig(**dsec)
    bound = DerivativeBound(m=diff.m, L=float(L)) if L is not None else None
    esec = dict(d.get("estimator", {}))
    zeta0 = float(esec.pop("zeta0", 1.0))
    est = EstimatorConfig(**esec)
    bsec = dict(d.get("baseline", {}))
    h0 = float(bsec.pop("h0", 1.0))
    base = BaselineConfig(**bsec) if bsec or "baseline" in d else None
    ssec = dict(d.get("sim", {}))
    if "estimators" in ssec:
        ssec["estimators"] = tuple(ssec["estimators"])
    sim = SimConfig(**ssec)
    if z0 is not None:
        z0 = tuple(float(v) for v in z0)
    return Scenario(
        signal=signal, noise=noise, diff=diff, est=est, base=base, sim=sim,
        zeta0=zeta0, z0=z0, h0=h0, bound=bound, name=d.get("name", "custom"),
    )


def scenario_to_dict(sc: Scenario) -> dict:
    """Fully resolved scenario dict; build_scenario on it reproduces sc."""
    d: dict[str, Any] = {
        "name": sc.name,
        "signal": {"A": sc.signal.A, "B": sc.signal.B, "w": sc.signal.w,
                   "phi0": sc.signal.phi0, "B_min": sc.signal.B_min, "w_min": sc.signal.w_min},
        "noise": {"kind": sc.noise.kind, "eta": sc.noise.eta, "seed": sc.noise.seed,
                  "freq": sc.noise.freq, "phase": sc.noise.phase},
        "differentiator": {"m": sc.diff.m, "kappa": list(sc.diff.kappa), "k": list(sc.diff.k),
                           "alpha": sc.diff.alpha, "T_u": sc.diff.T_u},
        "estimator": {"alpha1": sc.est.alpha1, "beta1": sc.est.beta1, "p": sc.est.p,
                      "q": sc.est.q, "epsilon": sc.est.epsilon, "r": sc.est.r,
                      "zeta0": sc.zeta0},
        "sim": {"dt": sc.sim.dt, "horizon": sc.sim.horizon, "scheme": sc.sim.scheme,
                "estimators": list(sc.sim.estimators), "record_stride": sc.sim.record_stride},
    }
    if sc.z0 is not None:
        d["differentiator"]["z0"] = list(sc.z0)
    if sc.bound is not None:
        d["differentiator"]["L"] = sc.bound.L
    if sc.base is not None:
        d["baseline"] = {"b1": sc.base.b1, "b2": sc.base.b2, "b3": sc.base.b3,
                         "b_bar": sc.base.b_bar, "g": sc.base.g,
                         "delta_eps": sc.base.delta_eps, "L1": sc.base.L1,
                         "L2": sc.base.L2, "h0": sc.h0}
        if sc.base.g_a is not None:
            d["baseline"]["g_a"] = sc.base.g_a
    return d


def load_scenario_file(path) -> Scenario:
    """Parse a TOML scenario file into a typed Scenario."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return build_scenario(raw)


def preset_scenario(name: str) -> Scenario:
    return build_scenario({"preset": name})
