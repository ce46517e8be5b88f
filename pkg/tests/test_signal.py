"""Signal model: evaluation, analytic derivatives, bounded noise."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freqest import ConfigInvalid, DerivativeBound, NoiseSpec, SignalSpec, measure

SEC5 = SignalSpec(A=10.0, B=4.0, w=2.0, phi0=2.0)


class TestEval:
    def test_demo_signal_at_zero(self):
        assert SEC5.eval(0.0) == pytest.approx(10.0 + 4.0 * math.sin(2.0), abs=1e-12)
        assert SEC5.eval(0.0) == pytest.approx(13.6372, abs=5e-5)

    def test_zero_frequency_is_constant(self):
        spec = SignalSpec(A=10.0, B=4.0, w=0.0, phi0=0.0)
        for t in (0.0, 1.0, 17.3, 1e4):
            assert spec.eval(t) == 10.0

    def test_second_example_signal(self):
        spec = SignalSpec(A=2.0, B=3.0, w=4.0, phi0=math.pi / 4)
        assert spec.eval(0.0) == pytest.approx(2.0 + 3.0 * math.sin(math.pi / 4), abs=1e-12)
        assert spec.eval(0.0) == pytest.approx(4.1213, abs=5e-5)

    def test_array_evaluation(self):
        t = np.linspace(0, 5, 11)
        np.testing.assert_allclose(SEC5.eval(t), 10 + 4 * np.sin(2 * t + 2), rtol=1e-15)


class TestDerivatives:
    def test_first_derivative_at_zero(self):
        assert SEC5.eval_derivative(0.0, 1) == pytest.approx(8 * math.cos(2.0), abs=1e-12)
        assert SEC5.eval_derivative(0.0, 1) == pytest.approx(-3.3292, abs=5e-5)

    def test_third_is_minus_w_squared_times_first(self):
        t = np.linspace(0, 10, 257)
        np.testing.assert_allclose(
            SEC5.eval_derivative(t, 3), -SEC5.w**2 * SEC5.eval_derivative(t, 1), rtol=1e-13
        )

    def test_zero_frequency_derivatives_vanish(self):
        spec = SignalSpec(A=5.0, B=1.0, w=0.0, phi0=0.3)
        for order in range(1, 6):
            assert spec.eval_derivative(2.0, order) == 0.0

    def test_order_zero_rejected(self):
        with pytest.raises(ValueError):
            SEC5.eval_derivative(1.0, 0)

    @given(
        order=st.integers(min_value=1, max_value=8),
        t=st.floats(min_value=0.0, max_value=100.0),
        w=st.floats(min_value=0.05, max_value=20.0),
        B=st.floats(min_value=0.5, max_value=50.0),
        phi0=st.floats(min_value=-math.pi, max_value=math.pi),
    )
    @settings(max_examples=60, deadline=None)
    def test_harmonic_recurrence(self, order, t, w, B, phi0):
        # differentiating twice multiplies by -w^2
        spec = SignalSpec(A=1.0, B=B, w=w, phi0=phi0)
        lhs = spec.eval_derivative(t, order + 2)
        rhs = -(w**2) * spec.eval_derivative(t, order)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-9 * B * w ** (order + 2))

    def test_derivative_stack_orders(self):
        t = np.array([0.0, 0.7])
        stack = SEC5.derivative_stack(t, 4)
        np.testing.assert_allclose(stack[0], SEC5.eval(t), rtol=1e-15)
        for i in (1, 2, 3):
            np.testing.assert_allclose(stack[i], SEC5.eval_derivative(t, i), rtol=1e-15)

    def test_bound_holds_on_grid(self):
        bound = DerivativeBound(m=4, L=160.0)
        bound.validate(SEC5)
        t = np.linspace(0, 20, 4001)
        assert np.max(np.abs(SEC5.eval_derivative(t, 4))) <= bound.L

    def test_bound_violation_rejected(self):
        with pytest.raises(ConfigInvalid):
            DerivativeBound(m=4, L=10.0).validate(SEC5)  # B*w^4 = 64 > 10
        with pytest.raises(ConfigInvalid):
            DerivativeBound(m=3, L=100.0)
        with pytest.raises(ConfigInvalid):
            DerivativeBound(m=4, L=0.0)


class TestSpecInvariants:
    def test_amplitude_floor(self):
        with pytest.raises(ConfigInvalid):
            SignalSpec(A=0.0, B=0.005, w=1.0, phi0=0.0, B_min=0.01)

    def test_frequency_gap(self):
        with pytest.raises(ConfigInvalid):
            SignalSpec(A=0.0, B=1.0, w=0.005, phi0=0.0, w_min=0.01)
        SignalSpec(A=0.0, B=1.0, w=0.0, phi0=0.0)  # exactly zero is admissible

    def test_negative_offset_allowed(self):
        # the estimator never uses the sign of the offset
        SignalSpec(A=-3.0, B=1.0, w=1.0, phi0=0.0)


class TestNoise:
    def test_zero_eta_is_exact(self):
        noise = NoiseSpec(eta=0.0, kind="uniform")
        stream = noise.stream()
        for t in (0.0, 0.5, 2.0):
            assert measure(SEC5, noise, t, stream) == SEC5.eval(t)

    def test_uniform_band(self):
        noise = NoiseSpec(eta=0.25, kind="uniform", seed=123)
        stream = noise.stream()
        t = np.linspace(0, 1, 5000)
        ym = measure(SEC5, noise, t, stream)
        assert np.max(np.abs(ym - SEC5.eval(t))) <= 0.25

    def test_uniform_block_bound_and_reproducibility(self):
        noise = NoiseSpec(eta=0.25, kind="uniform", seed=99)
        a = noise.stream().block(0, 10000, 1e-4)
        b = noise.stream().block(0, 10000, 1e-4)
        np.testing.assert_array_equal(a, b)
        assert np.max(np.abs(a)) <= 0.25

    def test_sinusoidal_kind(self):
        noise = NoiseSpec(eta=0.25, kind="sinusoidal", freq=50.0, phase=0.3)
        t = np.linspace(0, 0.5, 100)
        expected = SEC5.eval(t) + 0.25 * np.sin(50 * t + 0.3)
        np.testing.assert_allclose(measure(SEC5, noise, t), expected, rtol=1e-14)
        block = noise.stream().block(0, 100, 1e-3)
        np.testing.assert_allclose(block, 0.25 * np.sin(50 * np.arange(100) * 1e-3 + 0.3), rtol=1e-14)

    def test_uniform_scalar_needs_stream(self):
        noise = NoiseSpec(eta=0.1, kind="uniform")
        with pytest.raises(ConfigInvalid):
            measure(SEC5, noise, 0.5)

    def test_bad_specs_rejected(self):
        with pytest.raises(ConfigInvalid):
            NoiseSpec(eta=-0.1)
        with pytest.raises(ConfigInvalid):
            NoiseSpec(kind="gaussian")
