"""Compiled inner loops for the fixed-step engine.

Everything here works on plain float64/int64 arrays so numba can compile it;
the public modules wrap these kernels with validation and typed configs. If
numba is unavailable the same functions run as plain Python (slowly).

Status codes returned by run_chunk: 0 ok, 1 differentiator state non-finite or
past the divergence guard, 2 squared-frequency estimate past its clamp,
3 baseline state non-finite.
"""
from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


Z_GUARD = 1e12
ZETA_GUARD = 1e10
BASE_GUARD = 1e16


@njit(cache=True, nogil=True)
def _spow(x: float, a: float) -> float:
    if x > 0.0:
        return x**a
    if x < 0.0:
        return -((-x) ** a)
    return 0.0


@njit(cache=True, nogil=True)
def _diff_field(z, y, th, kap, kk, alpha, out):
    m = z.shape[0]
    e = z[0] - y
    for j in range(m - 1):
        out[j] = (
            -kap[j] * th * _spow(e, (m - j - 1) / m)
            - kk[j] * (1.0 - th) * _spow(e, (m + alpha * (j + 1)) / m)
            + z[j + 1]
        )
    sgn = 0.0
    if e > 0.0:
        sgn = 1.0
    elif e < 0.0:
        sgn = -1.0
    out[m - 1] = -kap[m - 1] * th * sgn - kk[m - 1] * (1.0 - th) * _spow(e, 1.0 + alpha)


@njit(cache=True, nogil=True)
def _exc_rate(zeta, g1, g2, d2, d4, a1, b1, ehi, elo):
    e = zeta * g1 - g2
    return -(a1 * _spow(e, ehi) + b1 * _spow(e, elo) + zeta * d2 - d4) / g1


@njit(cache=True, nogil=True)
def _unexc_rate(zeta, a1, b1, ehi, elo):
    return -a1 * _spow(zeta, ehi) - b1 * _spow(zeta, elo)


@njit(cache=True, nogil=True)
def _base_field(bs, y, t, bpar, out):
    bb = bpar[3]
    g = bpar[4]
    delta = bpar[5]
    L1 = bpar[6]
    L2 = bpar[7]
    e1 = math.exp(-bb * t)
    e2 = e1 * e1
    e3 = e2 * e1
    F = 1.0 - 3.0 * e1 + 3.0 * e2 - e3
    K1 = 0.0
    K2 = 0.0
    fb = np.empty(3)
    fa = np.empty(3)
    fd = np.empty(3)
    for j in range(3):
        b = bpar[j]
        f1 = b - 3.0 * (b - bb) * e1 + 3.0 * (b - 2.0 * bb) * e2 - (b - 3.0 * bb) * e3
        f2 = b**2 - 3.0 * (b - bb) ** 2 * e1 + 3.0 * (b - 2.0 * bb) ** 2 * e2 - (b - 3.0 * bb) ** 2 * e3
        f3 = b**3 - 3.0 * (b - bb) ** 3 * e1 + 3.0 * (b - 2.0 * bb) ** 3 * e2 - (b - 3.0 * bb) ** 3 * e3
        out[2 * j] = f1 * y - b * bs[2 * j]
        out[2 * j + 1] = f3 * y - b * bs[2 * j + 1]
        fb[j] = f1
        fa[j] = bs[2 * j + 1] - f2 * y
        fd[j] = bs[2 * j] - F * y
    c0 = fb[2] - fb[1]
    c1 = fb[0] - fb[2]
    c2 = fb[1] - fb[0]
    K1 = fa[0] * c0 + fa[1] * c1 + fa[2] * c2
    K2 = fd[0] * c0 + fd[1] * c1 + fd[2] * c2
    dr1 = abs(K1) - g * bs[6]
    dr2 = abs(K2) - g * bs[7]
    R = bs[6] - bs[7] * bs[8]
    sgn = 0.0
    if R > 0.0:
        sgn = 1.0
    elif R < 0.0:
        sgn = -1.0
    if bs[7] > delta:
        out[8] = (bs[9] + L1 * math.sqrt(abs(R)) * sgn - bs[8] * dr2 + dr1) / bs[7]
    else:
        out[8] = 0.0
    out[6] = dr1
    out[7] = dr2
    out[9] = L2 * sgn


@njit(cache=True, nogil=True)
def run_chunk(
    k0,
    n,
    dt,
    scheme,
    switch_step,
    stride,
    use_prop,
    use_base,
    ym,
    ym_mid,
    y_clean,
    z,
    kap,
    kk,
    alpha,
    buf2,
    buf4,
    nwin,
    widx,
    wsum,
    est,
    est_par,
    counters,
    bstate,
    bpar,
    rec,
    col_g1,
    col_wbase,
):
    """Advance the composed system n steps from global step k0; record rows in rec.

    Per step: measurement -> differentiator step -> window push (post-step z)
    -> adaptation step -> baseline step -> record. Returns
    (status, failed_step, failed_variable).
    """
    m = z.shape[0]
    d1 = np.empty(m)
    d2v = np.empty(m)
    d3 = np.empty(m)
    d4v = np.empty(m)
    ztmp = np.empty(m)
    bd1 = np.empty(10)
    bd2 = np.empty(10)
    bd3 = np.empty(10)
    bd4 = np.empty(10)
    btmp = np.empty(10)
    a1 = est_par[0]
    b1 = est_par[1]
    ehi = est_par[2]
    elo = est_par[3]
    eps = est_par[4]

    for i in range(n):
        kg = k0 + i
        if use_prop:
            th_a = 1.0 if kg >= switch_step else 0.0
            if scheme == 0:
                _diff_field(z, ym[i], th_a, kap, kk, alpha, d1)
                for j in range(m):
                    z[j] += dt * d1[j]
            else:
                th_b = 1.0 if kg + 1 >= switch_step else 0.0
                _diff_field(z, ym[i], th_a, kap, kk, alpha, d1)
                for j in range(m):
                    ztmp[j] = z[j] + 0.5 * dt * d1[j]
                _diff_field(ztmp, ym_mid[i], th_a, kap, kk, alpha, d2v)
                for j in range(m):
                    ztmp[j] = z[j] + 0.5 * dt * d2v[j]
                _diff_field(ztmp, ym_mid[i], th_a, kap, kk, alpha, d3)
                for j in range(m):
                    ztmp[j] = z[j] + dt * d3[j]
                _diff_field(ztmp, ym[i + 1], th_b, kap, kk, alpha, d4v)
                for j in range(m):
                    z[j] += dt / 6.0 * (d1[j] + 2.0 * d2v[j] + 2.0 * d3[j] + d4v[j])
            for j in range(m):
                if not (abs(z[j]) <= Z_GUARD):
                    return 1, kg, j

            # window push with the post-step z; the evicted sample is the
            # exactly r-delayed value the adaptive law subtracts
            a2 = abs(z[1])
            a4 = abs(z[3])
            head = widx[0]
            ev2 = buf2[head]
            ev4 = buf4[head]
            if widx[1] < nwin:
                ev2 = 0.0
                ev4 = 0.0
            wsum[0] += (a2 - ev2) * dt
            wsum[1] += (a4 - ev4) * dt
            buf2[head] = a2
            buf4[head] = a4
            widx[0] = (head + 1) % nwin
            if widx[1] < nwin:
                widx[1] += 1
            widx[2] += 1
            if widx[2] % nwin == 0:
                s2 = 0.0
                s4 = 0.0
                for j in range(nwin):
                    s2 += buf2[j]
                    s4 += buf4[j]
                wsum[0] = s2 * dt
                wsum[1] = s4 * dt

            g1 = wsum[0]
            g2 = wsum[1]
            dd2 = a2 - ev2
            dd4 = a4 - ev4
            zeta = est[0]
            if g1 > eps:
                br = 1
                if scheme == 0:
                    zeta += dt * _exc_rate(zeta, g1, g2, dd2, dd4, a1, b1, ehi, elo)
                else:
                    r1 = _exc_rate(zeta, g1, g2, dd2, dd4, a1, b1, ehi, elo)
                    r2 = _exc_rate(zeta + 0.5 * dt * r1, g1, g2, dd2, dd4, a1, b1, ehi, elo)
                    r3 = _exc_rate(zeta + 0.5 * dt * r2, g1, g2, dd2, dd4, a1, b1, ehi, elo)
                    r4 = _exc_rate(zeta + dt * r3, g1, g2, dd2, dd4, a1, b1, ehi, elo)
                    zeta += dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4)
            else:
                br = 0
                if scheme == 0:
                    zeta += dt * _unexc_rate(zeta, a1, b1, ehi, elo)
                else:
                    r1 = _unexc_rate(zeta, a1, b1, ehi, elo)
                    r2 = _unexc_rate(zeta + 0.5 * dt * r1, a1, b1, ehi, elo)
                    r3 = _unexc_rate(zeta + 0.5 * dt * r2, a1, b1, ehi, elo)
                    r4 = _unexc_rate(zeta + dt * r3, a1, b1, ehi, elo)
                    zeta += dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4)
            est[0] = zeta
            if not (abs(zeta) <= ZETA_GUARD):
                return 2, kg, 0
            if counters[0] >= 0 and br != counters[0]:
                counters[1] += 1
            counters[0] = br

        if use_base:
            t = kg * dt
            if scheme == 0:
                _base_field(bstate, ym[i], t, bpar, bd1)
                for j in range(10):
                    bstate[j] += dt * bd1[j]
            else:
                _base_field(bstate, ym[i], t, bpar, bd1)
                for j in range(10):
                    btmp[j] = bstate[j] + 0.5 * dt * bd1[j]
                _base_field(btmp, ym_mid[i], t + 0.5 * dt, bpar, bd2)
                for j in range(10):
                    btmp[j] = bstate[j] + 0.5 * dt * bd2[j]
                _base_field(btmp, ym_mid[i], t + 0.5 * dt, bpar, bd3)
                for j in range(10):
                    btmp[j] = bstate[j] + dt * bd3[j]
                _base_field(btmp, ym[i + 1], t + dt, bpar, bd4)
                for j in range(10):
                    bstate[j] += dt / 6.0 * (bd1[j] + 2.0 * bd2[j] + 2.0 * bd3[j] + bd4[j])
            for j in range(10):
                if not (abs(bstate[j]) <= BASE_GUARD):
                    return 3, kg, j

        if (kg + 1) % stride == 0:
            row = (kg + 1) // stride - 1
            rec[row, 0] = (kg + 1) * dt
            rec[row, 1] = y_clean[i + 1]
            rec[row, 2] = ym[i + 1]
            if use_prop:
                for j in range(m):
                    rec[row, 3 + j] = z[j]
                rec[row, col_g1] = wsum[0]
                rec[row, col_g1 + 1] = wsum[1]
                rec[row, col_g1 + 2] = est[0] * wsum[0] - wsum[1]
                rec[row, col_g1 + 3] = est[0]
                rec[row, col_g1 + 4] = math.sqrt(abs(est[0]))
                rec[row, col_g1 + 5] = counters[0]
            if use_base:
                rec[row, col_wbase] = math.sqrt(abs(bstate[8]))

    return 0, -1, -1


@njit(cache=True, nogil=True)
def decay_trajectory(e0, a1, b1, ehi, elo, dt, nsteps):
    """Euler trajectory of the scalar fixed-time decay de/dt = -a1*spow(e,ehi) - b1*spow(e,elo)."""
    out = np.empty(nsteps + 1)
    e = e0
    out[0] = e
    for i in range(nsteps):
        e += dt * (-a1 * _spow(e, ehi) - b1 * _spow(e, elo))
        out[i + 1] = e
    return out
