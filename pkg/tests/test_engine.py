"""Engine: determinism, ordering semantics, metrics, sweeps, guards."""
import dataclasses
import math
import warnings

import numpy as np
import pytest

import freqest as fq
from freqest import (
    ConfigInvalid,
    EmptyTrace,
    NoiseSpec,
    Scenario,
    SimConfig,
    UnknownAxis,
    settling_time,
    sweep,
)
from freqest import engine as eng
from freqest.adaptive import EstimatorState, adapt_field
from freqest.baseline import BaselineState, baseline_field
from freqest.differentiator import DifferentiatorState, derivative_field
from freqest.windows import WindowIntegral


def tiny_scenario(**sim_kw):
    sc = fq.preset_scenario("fig1-proposed")
    sim = dict(dt=1e-3, horizon=0.5, scheme="euler", record_stride=10)
    sim.update(sim_kw)
    return sc.replace(sim=SimConfig(estimators=sc.sim.estimators, **sim))


class TestSimConfig:
    def test_invariants(self):
        with pytest.raises(ConfigInvalid):
            SimConfig(dt=0.0)
        with pytest.raises(ConfigInvalid):
            SimConfig(horizon=-1.0)
        with pytest.raises(ConfigInvalid):
            SimConfig(dt=1e-6, horizon=2000.0)  # > 1e9 steps
        with pytest.raises(ConfigInvalid):
            SimConfig(scheme="heun")
        with pytest.raises(ConfigInvalid):
            SimConfig(estimators=())
        with pytest.raises(ConfigInvalid):
            SimConfig(estimators=("proposed", "magic"))
        with pytest.raises(ConfigInvalid):
            SimConfig(record_stride=0)

    def test_estimator_order_normalized(self):
        sim = SimConfig(estimators=("baseline", "proposed"))
        assert sim.estimators == ("proposed", "baseline")

    def test_grid_alignment_enforced(self):
        sc = tiny_scenario(dt=7e-4)  # r = 1 is not a multiple
        with pytest.raises(ConfigInvalid):
            sc.run()
        sc2 = fq.preset_scenario("fig1-proposed")
        sc2 = sc2.replace(
            diff=dataclasses.replace(sc2.diff, T_u=0.00013),
            sim=SimConfig(dt=1e-4, horizon=0.01, record_stride=1),
        )
        with pytest.raises(ConfigInvalid):
            sc2.run()


class TestDeterminism:
    def test_noise_free_replay(self):
        a = tiny_scenario().run()
        b = tiny_scenario().run()
        np.testing.assert_array_equal(a.w_hat, b.w_hat)
        np.testing.assert_array_equal(a.z, b.z)

    def test_noisy_replay(self):
        sc = fq.preset_scenario("fig2-proposed")
        sc = sc.replace(sim=dataclasses.replace(sc.sim, dt=1e-4, horizon=0.3, record_stride=5))
        a, b = sc.run(), sc.run()
        np.testing.assert_array_equal(a.y_meas, b.y_meas)
        np.testing.assert_array_equal(a.w_hat, b.w_hat)

    @pytest.mark.parametrize("scheme", ["euler", "rk4"])
    def test_chunk_boundaries_do_not_matter(self, monkeypatch, scheme):
        sc = fq.preset_scenario("fig2-proposed")
        sc = sc.replace(sim=dataclasses.replace(sc.sim, dt=1e-4, horizon=0.5,
                                                scheme=scheme, record_stride=7))
        ref = sc.run()
        monkeypatch.setattr(eng, "CHUNK", 614)
        chunked = sc.run()
        np.testing.assert_array_equal(ref.y_meas, chunked.y_meas)
        np.testing.assert_array_equal(ref.w_hat, chunked.w_hat)
        np.testing.assert_array_equal(ref.gamma1_hat, chunked.gamma1_hat)


class TestRecording:
    def test_row_count_and_spacing(self):
        res = tiny_scenario(dt=1e-3, horizon=0.5, record_stride=10).run()
        assert res.rows == 50
        np.testing.assert_allclose(np.diff(res.t), 10 * 1e-3, rtol=1e-9)
        assert np.all(np.diff(res.t) > 0)

    def test_reference_row_arithmetic(self, sec5_result):
        # 10 s at dt = 1e-6 with stride 100 -> exactly 1e5 data rows
        assert sec5_result.rows == 100_000

    def test_empty_horizon(self):
        res = tiny_scenario(horizon=0.0).run()
        assert res.rows == 0
        assert res.settling_times["proposed"] == math.inf
        with pytest.raises(EmptyTrace):
            settling_time(res, 2.0, 0.02)

    def test_column_names_both_estimators(self):
        sc = fq.preset_scenario("fig1-proposed")
        base = fq.preset_scenario("fig1-baseline-mfile").base
        sc = sc.replace(
            base=base,
            sim=SimConfig(dt=1e-3, horizon=0.1, record_stride=10,
                          estimators=("proposed", "baseline")),
        )
        res = sc.run()
        names = res.column_names()
        assert names[:4] == ["t", "y", "y_meas", "w_true"]
        assert names[-1] == "w_hat_baseline"
        assert "zeta_hat" in names and "branch" in names
        assert len(res.column_data()) == len(names)


class TestSettlingTime:
    def test_already_settled(self):
        res = tiny_scenario().run()
        res.w_hat = np.full(res.rows, 2.0)
        assert settling_time(res, 2.0, 0.02) == res.t[0]

    def test_never_settles(self):
        res = tiny_scenario().run()
        res.w_hat = np.full(res.rows, 5.0)
        assert settling_time(res, 2.0, 0.02) == math.inf

    def test_last_excursion_counts(self):
        res = tiny_scenario().run()
        w = np.full(res.rows, 2.0)
        w[res.rows // 2] = 3.0
        res.w_hat = w
        assert settling_time(res, 2.0, 0.02) == res.t[res.rows // 2 + 1]


class TestManualComposition:
    """Step the documented update ordering by hand with the pure module
    functions and demand agreement with the compiled engine."""

    @pytest.mark.parametrize("scheme", ["euler", "rk4"])
    def test_matches_engine(self, scheme):
        dt, steps = 1e-3, 400
        spec = fq.SignalSpec(A=10.0, B=4.0, w=2.0, phi0=2.0)
        diff = fq.DifferentiatorConfig(T_u=0.1)  # switch inside the horizon
        est = fq.EstimatorConfig(r=0.05)
        base = fq.BaselineConfig()
        sim = SimConfig(dt=dt, horizon=steps * dt, scheme=scheme,
                        estimators=("proposed", "baseline"), record_stride=1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # epsilon vs short-window floor
            res = Scenario(signal=spec, diff=diff, est=est, base=base, sim=sim,
                           zeta0=1.0, h0=2.0).run()

        z = np.zeros(4)
        wi2 = WindowIntegral(r=0.05, dt=dt)
        wi4 = WindowIntegral(r=0.05, dt=dt)
        zeta = 1.0
        bs = BaselineState.zero(h0=2.0)
        est_state = EstimatorState(zeta_hat=zeta)
        rows_w, rows_z, rows_g1, rows_wb = [], [], [], []
        for k in range(steps):
            t = k * dt
            y = float(spec.eval(t))
            y_mid = float(spec.eval(t + dt / 2))
            y_next = float(spec.eval(t + dt))
            if scheme == "euler":
                dz = derivative_field(DifferentiatorState(z=z, t=t), y, diff)
                z = z + dt * dz
            else:
                k1 = derivative_field(DifferentiatorState(z=z, t=t), y, diff)
                k2 = derivative_field(DifferentiatorState(z=z + 0.5 * dt * k1, t=t), y_mid, diff)
                k3 = derivative_field(DifferentiatorState(z=z + 0.5 * dt * k2, t=t), y_mid, diff)
                k4 = derivative_field(DifferentiatorState(z=z + dt * k3, t=t + dt), y_next, diff)
                z = z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            ev2 = wi2.push(abs(z[1]))
            ev4 = wi4.push(abs(z[3]))
            g1, g2 = wi2.value, wi4.value
            est_state.zeta_hat = zeta
            if scheme == "euler":
                zeta = zeta + dt * adapt_field(est_state, g1, g2, abs(z[1]), ev2, abs(z[3]), ev4, est)
            else:
                rates = []
                for frac in (0.0, 0.5, 0.5, 1.0):
                    est_state.zeta_hat = zeta + frac * dt * (rates[-1] if rates else 0.0)
                    rates.append(adapt_field(est_state, g1, g2, abs(z[1]), ev2, abs(z[3]), ev4, est))
                zeta = zeta + dt / 6 * (rates[0] + 2 * rates[1] + 2 * rates[2] + rates[3])
            if scheme == "euler":
                d = baseline_field(bs, y, t, base)
                vec = bs.as_vector() + dt * d
            else:
                d1 = baseline_field(bs, y, t, base)
                s1 = _bs_from(bs.as_vector() + 0.5 * dt * d1)
                d2 = baseline_field(s1, y_mid, t + 0.5 * dt, base)
                s2 = _bs_from(bs.as_vector() + 0.5 * dt * d2)
                d3 = baseline_field(s2, y_mid, t + 0.5 * dt, base)
                s3 = _bs_from(bs.as_vector() + dt * d3)
                d4 = baseline_field(s3, y_next, t + dt, base)
                vec = bs.as_vector() + dt / 6 * (d1 + 2 * d2 + 2 * d3 + d4)
            bs = _bs_from(vec)
            rows_w.append(math.sqrt(abs(zeta)))
            rows_z.append(z.copy())
            rows_g1.append(g1)
            rows_wb.append(math.sqrt(abs(bs.h)))

        np.testing.assert_allclose(res.w_hat, rows_w, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(res.z, rows_z, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(res.gamma1_hat, rows_g1, rtol=1e-9, atol=1e-14)
        np.testing.assert_allclose(res.w_hat_baseline, rows_wb, rtol=1e-9, atol=1e-12)


def _bs_from(vec):
    st = BaselineState(xi=vec[:6].copy())
    st.r1, st.r2, st.h, st.y_sm = vec[6], vec[7], vec[8], vec[9]
    return st


class TestSchemeConsistency:
    def test_euler_step_halving(self):
        times = {}
        for dt in (2e-5, 1e-5):
            sc = fq.preset_scenario("fig1-proposed")
            sc = sc.replace(sim=dataclasses.replace(sc.sim, dt=dt, record_stride=int(1e-3 / dt)))
            times[dt] = sc.run().settling_times["proposed"]
        assert abs(times[2e-5] - times[1e-5]) / times[1e-5] < 0.05

    def test_rk4_coarse_matches_euler_fine(self, sec5_result):
        # compared at a 0.05 band: at 0.02 the coarse grid's chattering floor
        # of the last differentiator state intrudes into the band
        sc = fq.preset_scenario("fig1-proposed")
        sc = sc.replace(sim=dataclasses.replace(sc.sim, dt=1e-4, scheme="rk4", record_stride=10))
        rk4_time = settling_time(sc.run(), 2.0, 0.05)
        euler_time = settling_time(sec5_result, 2.0, 0.05)
        assert abs(rk4_time - euler_time) / euler_time < 0.05


class TestGuardsAndErrors:
    def test_baseline_without_config(self):
        sc = tiny_scenario()
        sc = sc.replace(base=None, sim=dataclasses.replace(sc.sim, estimators=("baseline",)))
        with pytest.raises(ConfigInvalid):
            sc.run()

    def test_zeta_clamp_aborts(self):
        sc = tiny_scenario().replace(zeta0=2e10)
        with pytest.raises(fq.NonFiniteState) as ei:
            sc.run()
        assert ei.value.variable == "zeta_hat"

    def test_pe_threshold_warning(self):
        sc = tiny_scenario()
        sc = sc.replace(est=dataclasses.replace(sc.est, epsilon=100.0))
        with pytest.warns(UserWarning, match="excitation threshold"):
            sc.run()

    def test_zero_frequency_run_does_not_warn(self):
        spec = fq.SignalSpec(A=10.0, B=4.0, w=0.0, phi0=0.5)
        sc = tiny_scenario().replace(signal=spec)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            sc.run()

    def test_wrong_z0_length(self):
        sc = tiny_scenario().replace(z0=(1.0, 2.0))
        with pytest.raises(ConfigInvalid):
            sc.run()


class TestSweep:
    def test_unknown_axis(self):
        with pytest.raises(UnknownAxis):
            sweep(tiny_scenario(), "gamma", [1.0])

    def test_zeta0_axis_order_and_fields(self):
        rows = sweep(tiny_scenario(), "zeta0", [1.0, 9.0, 4.0])
        assert [r.value for r in rows] == [1.0, 9.0, 4.0]
        for r in rows:
            assert "proposed" in r.settling_times
            assert r.branch_switches >= 0

    def test_eta_axis_activates_uniform_noise(self):
        rows = sweep(tiny_scenario(), "eta", [0.0, 0.1])
        assert len(rows) == 2

    def test_dt_axis(self):
        rows = sweep(tiny_scenario(), "dt", [1e-3, 5e-4])
        assert [r.value for r in rows] == [1e-3, 5e-4]

    def test_fixed_time_settling_spread(self):
        # recorded from reference runs: all three settle at the same instant
        sc = fq.preset_scenario("fig1-proposed")
        sc = sc.replace(sim=dataclasses.replace(sc.sim, dt=1e-5, record_stride=100))
        rows = sweep(sc, "zeta0", [1.0, 1e3, 5e6])
        times = [r.settling_times["proposed"] for r in rows]
        assert all(t <= 5.0 for t in times)
        assert max(times) - min(times) < 1.0
        assert max(times) - min(times) < 0.01  # measured: identical to the grid

    def test_eta_axis_error_ordering(self):
        # steady error grows with the noise bound
        sc = fq.preset_scenario("fig1-proposed")
        sc = sc.replace(
            noise=NoiseSpec(kind="uniform", eta=0.0, seed=5),
            sim=dataclasses.replace(sc.sim, dt=1e-5, record_stride=100),
        )
        rows = sweep(sc, "eta", [0.0, 0.05, 0.25])
        errs = [r.final_errors["proposed"] for r in rows]
        assert errs[0] <= errs[1] <= errs[2]
