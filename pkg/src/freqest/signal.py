"""Ground-truth biased sinusoid, its analytic derivatives, and bounded measurement noise.

The signal is y(t) = A + B*sin(w*t + phi0) with constant offset A, amplitude B > 0,
angular frequency w (either exactly zero or at least w_min) and initial phase phi0.
Everything here is analytic in continuous time; discretization lives in the engine.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid

_DERIV_CYCLE = (np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x))


@dataclass(frozen=True)
class SignalSpec:
    """Parameters of the biased sinusoid A + B*sin(w*t + phi0)."""

    A: float
    B: float
    w: float
    phi0: float
    B_min: float = 0.01
    w_min: float = 0.01

    def __post_init__(self):
        if not (self.B_min > 0):
            raise ConfigInvalid("B_min must be > 0")
        if not (self.w_min > 0):
            raise ConfigInvalid("w_min must be > 0")
        if not (self.B >= self.B_min):
            raise ConfigInvalid(f"B={self.B} must satisfy B >= B_min={self.B_min} > 0")
        if not (self.w == 0.0 or self.w >= self.w_min):
            raise ConfigInvalid(
                f"w={self.w} must be 0 or >= w_min={self.w_min} (admissible frequency set)"
            )

    def eval(self, t):
        """Signal value A + B*sin(w*t + phi0); accepts scalars or arrays."""
        return self.A + self.B * np.sin(self.w * np.asarray(t, dtype=float) + self.phi0)

    def eval_derivative(self, t, order: int):
        """Exact order-th time derivative, order >= 1.

        The derivative of B*sin(w*t + phi0) cycles through sin/cos with period 4 in
        the order and picks up a factor w per differentiation; w = 0 gives 0.
        """
        if order < 1:
            raise ValueError("order must be >= 1 (use eval for the signal itself)")
        t = np.asarray(t, dtype=float)
        if self.w == 0.0:
            return np.zeros_like(t)
        fn = _DERIV_CYCLE[order % 4]
        return self.B * self.w**order * fn(self.w * t + self.phi0)

    def derivative_stack(self, t, m: int) -> np.ndarray:
        """Array of y, y', ..., y^(m-1) evaluated at t (rows are derivative orders)."""
        t = np.asarray(t, dtype=float)
        out = np.empty((m,) + t.shape, dtype=float)
        out[0] = self.eval(t)
        for i in range(1, m):
            out[i] = self.eval_derivative(t, i)
        return out


@dataclass(frozen=True)
class NoiseSpec:
    """Bounded measurement noise: |n(t)| <= eta at all times.

    kind "none" is exact measurement, "uniform" draws i.i.d. samples from
    eta*U(-1, 1) (seeded, reproducible), "sinusoidal" is the worst-case
    deterministic tone eta*sin(freq*t + phase).
    """

    eta: float = 0.0
    kind: str = "none"
    seed: int = 0
    freq: float = 50.0
    phase: float = 0.0

    def __post_init__(self):
        if self.eta < 0:
            raise ConfigInvalid("noise bound eta must be >= 0")
        if self.kind not in ("none", "uniform", "sinusoidal"):
            raise ConfigInvalid(f"unknown noise kind {self.kind!r}")

    def stream(self) -> "NoiseStream":
        return NoiseStream(self)


class NoiseStream:
    """Per-run noise sample source; carries the RNG state for the uniform kind.

    One stream is confined to a single scenario run: blocks are drawn sequentially
    and replaying a fresh stream with the same seed reproduces the sample sequence.
    """

    def __init__(self, spec: NoiseSpec):
        self.spec = spec
        self._rng = np.random.default_rng(spec.seed)

    def block(self, k0: int, n: int, dt: float) -> np.ndarray:
        """Noise samples for steps k0 .. k0+n-1 (sample k applies on [k*dt, (k+1)*dt))."""
        s = self.spec
        if n == 0 or s.kind == "none" or s.eta == 0.0:
            return np.zeros(n)
        if s.kind == "uniform":
            return s.eta * self._rng.uniform(-1.0, 1.0, n)
        t = (k0 + np.arange(n)) * dt
        return s.eta * np.sin(s.freq * t + s.phase)

    def draw(self, n: int = 1) -> np.ndarray:
        """n sequential uniform draws scaled to [-eta, eta]."""
        return self.spec.eta * self._rng.uniform(-1.0, 1.0, n)


def measure(spec: SignalSpec, noise: NoiseSpec, t, stream: NoiseStream | None = None):
    """Noisy measurement y(t) + n(t) with |n(t)| <= noise.eta.

    The uniform kind needs a NoiseStream (sequential draws); pass the same stream
    for consecutive samples of one run.
    """
    y = spec.eval(t)
    if noise.kind == "none" or noise.eta == 0.0:
        return y
    if noise.kind == "sinusoidal":
        return y + noise.eta * np.sin(noise.freq * np.asarray(t, dtype=float) + noise.phase)
    if stream is None:
        raise ConfigInvalid("uniform noise requires a NoiseStream (use NoiseSpec.stream())")
    shape = np.shape(np.asarray(t))
    samples = stream.draw(shape[0] if shape else 1)
    return y + (samples if shape else samples[0])


@dataclass(frozen=True)
class DerivativeBound:
    """Known bound |y^(m)(t)| <= L for the differentiator design, m >= 4."""

    m: int = 4
    L: float = 160.0

    def __post_init__(self):
        if self.m < 4 or int(self.m) != self.m:
            raise ConfigInvalid("derivative order m must be an integer >= 4")
        if not (self.L > 0):
            raise ConfigInvalid("derivative bound L must be > 0")

    def validate(self, spec: SignalSpec) -> None:
        """Check the bound actually holds for spec: max |y^(m)| = B*w^m must be <= L."""
        peak = spec.B * spec.w**self.m
        if peak > self.L:
            raise ConfigInvalid(
                f"derivative bound violated: B*w^m = {peak:g} exceeds L = {self.L:g}"
            )
