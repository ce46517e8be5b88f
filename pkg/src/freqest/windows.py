"""Sliding-window absolute-value integrals over a fixed-rate sample stream.

A WindowIntegral maintains int_{t-r}^{t} |u(tau)| dtau by rectangle rule on a
ring buffer of the last N = r/dt samples, with access to the r-delayed sample
needed by the adaptive law. Samples before t = 0 read as zero, so the integral
ramps up over the first r seconds.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ConfigInvalid, NonFiniteSample, NonPositiveWindow
from .signal import SignalSpec


class WindowIntegral:
    """Ring-buffered running integral of |u| over the trailing window of length r.

    dt must divide r exactly (otherwise the window ages relative to the sample
    grid). The incremental update accumulates floating-point error over long
    runs, so the buffer is re-summed every N pushes to re-anchor the value.
    """

    def __init__(self, r: float, dt: float, quadrature: str = "left"):
        if not (r > 0):
            raise NonPositiveWindow("window length r must be > 0")
        if not (dt > 0):
            raise ConfigInvalid("sample period dt must be > 0")
        n = round(r / dt)
        if n < 1 or abs(n * dt - r) > 1e-9 * max(r, 1.0):
            raise ConfigInvalid(f"r={r} must be an integer multiple of dt={dt}")
        if quadrature not in ("left", "trapezoid"):
            raise ConfigInvalid("quadrature must be 'left' or 'trapezoid'")
        self.r = float(r)
        self.dt = float(dt)
        self.n = int(n)
        self.quadrature = quadrature
        self.buf = np.zeros(self.n)
        self.head = 0          # slot that holds the oldest sample / receives the next push
        self.filled = 0        # samples received, saturates at n
        self._sum = 0.0        # running rectangle sum of the buffer contents
        self._pushes = 0
        self._last = 0.0       # newest sample, for the trapezoid endpoint
        self._evicted = 0.0    # sample from exactly r ago, the other endpoint

    @property
    def value(self) -> float:
        """Current integral estimate over the trailing window."""
        if self.quadrature == "left":
            return self._sum
        # true trapezoid over [t-r, t]: the r-old (just evicted) sample and the
        # newest one enter with half weight
        return self._sum + 0.5 * self.dt * (self._evicted - self._last)

    def push(self, u_abs: float) -> float:
        """Add the newest sample |u|, evict the one from r seconds ago.

        Returns the evicted sample (0.0 while the window is still filling),
        which is exactly the r-delayed value the adaptive law subtracts.
        """
        if not math.isfinite(u_abs):
            raise NonFiniteSample(f"non-finite sample {u_abs!r} pushed to WindowIntegral")
        if u_abs < 0:
            raise NonFiniteSample("window integrand is an absolute value; sample must be >= 0")
        evicted = float(self.buf[self.head]) if self.filled == self.n else 0.0
        self._sum += (u_abs - evicted) * self.dt
        self.buf[self.head] = u_abs
        self.head = (self.head + 1) % self.n
        if self.filled < self.n:
            self.filled += 1
        self._last = float(u_abs)
        self._evicted = evicted
        self._pushes += 1
        if self._pushes % self.n == 0:
            self._sum = float(self.buf[: self.filled].sum()) * self.dt
        return evicted

    def delayed(self) -> float:
        """Oldest sample still inside the window (0.0 until the window has filled)."""
        if self.filled < self.n:
            return 0.0
        return float(self.buf[self.head])


def pe_lower_bound(spec: SignalSpec, r: float) -> float:
    """Guaranteed floor of the |y'| window integral once the observer is exact.

    For w > 0 the integral of B*w*|cos| over any window of length r is at least
    2B when r covers a half-period (r >= pi/w) and 2B*(1 - |cos(r*w/2)|) for
    shorter windows; for w = 0 the integrand vanishes identically.
    """
    if not (r > 0):
        raise NonPositiveWindow("window length r must be > 0")
    w, B = spec.w, spec.B
    if w == 0.0:
        return 0.0
    if r >= math.pi / w:
        return 2.0 * B
    return 2.0 * B * (1.0 - abs(math.cos(0.5 * r * w)))
