import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adsorb_frac.analytic import (
    barrier_control,
    henry_dc,
    henry_mixed,
    henry_mixed_double_series,
    henry_mixed_expansion,
    henry_mixed_series,
    lambda_roots,
    lambda_series_value,
    volmer_barrier_envelope,
)
from adsorb_frac.errors import DomainError, RangeError
from adsorb_frac.solver import Kernel, build_mesh, weights

sys.path.insert(0, str(Path(__file__).parent))
from oracles import HENRY_MIXED  # noqa: E402

SQRT_PI = math.sqrt(math.pi)


class TestDiffusionControlled:
    def test_examples(self):
        assert henry_dc(0.0) == 0.0
        assert henry_dc(1.0) == pytest.approx(0.5724164238, abs=1e-10)

    def test_small_time_series(self):
        t = 1e-8
        assert henry_dc(t) == pytest.approx(2.0 * math.sqrt(t / math.pi) - t, rel=1e-7)

    def test_rejects_negative_time(self):
        with pytest.raises(DomainError):
            henry_dc(-1.0)


class TestRoots:
    def test_real_pair(self):
        pair = lambda_roots(3.0 / 16.0)
        assert pair.real
        assert pair.lambda_plus == pytest.approx(-4.0 / 3.0, rel=1e-15)
        assert pair.lambda_minus == pytest.approx(-4.0, rel=1e-15)

    def test_double_root(self):
        pair = lambda_roots(0.25)
        assert pair.real and pair.lambda_plus == pair.lambda_minus == -2.0

    def test_complex_pair(self):
        pair = lambda_roots(1.0)
        assert not pair.real
        assert pair.lambda_plus == pytest.approx(complex(-0.5, math.sqrt(3) / 2), rel=1e-15)
        assert pair.lambda_minus == pair.lambda_plus.conjugate()

    def test_degenerate(self):
        with pytest.raises(DomainError):
            lambda_roots(0.0)


class TestMixed:
    @pytest.mark.parametrize("t, Ba, expected", HENRY_MIXED)
    def test_frozen_oracle(self, t, Ba, expected):
        assert henry_mixed(t, Ba) == pytest.approx(expected, rel=1e-10)

    def test_examples(self):
        assert henry_mixed(0.0, 3.0) == 0.0
        assert henry_mixed(1.0, 0.0) == pytest.approx(0.5724164238, abs=1e-10)
        t = 1e-4
        assert henry_mixed(t, 10.0) == pytest.approx(t / 10.0, rel=1e-3)

    def test_array_input(self):
        t = np.array([[0.0, 0.5], [1.0, 2.0]])
        out = henry_mixed(t, 1.0)
        assert out.shape == (2, 2)
        assert out[1, 0] == pytest.approx(henry_mixed(1.0, 1.0))

    @pytest.mark.parametrize("Ba", [-1.0, math.inf, math.nan])
    def test_bad_ba(self, Ba):
        with pytest.raises(DomainError):
            henry_mixed(1.0, Ba)

    @pytest.mark.parametrize("Ba", [1e-18, 5e-324])
    def test_vanishing_ba_is_diffusion_control(self, Ba):
        assert henry_mixed(2.0, Ba) == pytest.approx(henry_dc(2.0), rel=1e-15)

    @pytest.mark.parametrize("t", [1e-300, 1e-40, 1e-13])
    def test_tiny_time_diffusion_control(self, t):
        assert henry_mixed(t, 0.0) == pytest.approx(2.0 * math.sqrt(t / math.pi) - t, rel=1e-14)

    def test_large_ba(self):
        # Close to the barrier limit 1 - exp(-t/Ba) for large Ba at t ~ Ba.
        assert henry_mixed(1e3, 1e3) == pytest.approx(1.0 - math.exp(-1.0), abs=0.05)


class TestSeries:
    def test_leading_term(self):
        assert henry_mixed_series(0.02, 2.0, 1) == pytest.approx(0.01, rel=1e-15)

    def test_cross_validation(self):
        assert henry_mixed_series(0.01, 1.0, 20) == pytest.approx(henry_mixed(0.01, 1.0), abs=1e-8)

    @pytest.mark.parametrize("Ba", [0.1, 0.25, 1.0, 5.0])
    def test_double_sum_is_the_same_series(self, Ba):
        t = 0.05 * Ba
        assert henry_mixed_double_series(t, Ba, 10) == pytest.approx(henry_mixed_series(t, Ba, 10), rel=1e-13)

    @pytest.mark.parametrize("Ba", [0.1, 0.25, 1.0, 5.0])
    def test_real_recurrence_matches_complex_roots(self, Ba):
        t = 0.1 * Ba
        z = lambda_series_value(t, Ba, 15)
        assert abs(z.imag) <= 1e-14 * abs(z.real)
        assert z.real == pytest.approx(henry_mixed_series(t, Ba, 15), rel=1e-12)

    def test_divergence_detected(self):
        with pytest.raises(RangeError):
            henry_mixed_series(50.0, 0.5, 30)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            henry_mixed_series(1.0, 0.0)
        with pytest.raises(DomainError):
            henry_mixed_series(1.0, 1.0, 0)


class TestExpansion:
    def test_leading_term_accuracy(self):
        Ba = 2.0
        t = 1e-4 * Ba
        # The first correction is relative order sqrt(t)/Ba.
        gap = abs(henry_mixed(t, Ba) - t / Ba) / (t / Ba)
        assert gap == pytest.approx(4.0 * math.sqrt(t) / (3.0 * SQRT_PI * Ba), rel=0.02)
        assert henry_mixed_expansion(t, Ba) == pytest.approx(henry_mixed(t, Ba), rel=1e-8)

    def test_direct_evaluation(self):
        Ba, t = 10.0, 0.1
        expected = (t - 4 * t**1.5 / (3 * SQRT_PI * Ba) + 0.5 * t**2 * (1 / Ba**2 - 1 / Ba)
                    + 8 * t**2.5 / (15 * SQRT_PI) * (2 / Ba**2 - 1 / Ba**3)) / Ba
        assert henry_mixed_expansion(t, Ba) == pytest.approx(expected, rel=1e-15)
        assert henry_mixed_expansion(t, Ba) == pytest.approx(0.01, rel=0.05)
        assert henry_mixed_expansion(0.0, Ba) == 0.0


class TestLimits:
    def test_barrier_control(self):
        assert barrier_control(0.0) == 0.0
        assert barrier_control(math.log(2.0)) == pytest.approx(0.5, rel=1e-15)
        assert barrier_control(800.0) == 1.0

    def test_volmer_envelope(self):
        assert volmer_barrier_envelope(0.5) == 0.5
        assert volmer_barrier_envelope(2.0) == 1.0
        assert volmer_barrier_envelope(1.0) == 1.0


@pytest.mark.invariant
class TestInvariants:
    def test_zero_ba_is_diffusion_control(self):
        t = np.logspace(-4, 2, 25)
        np.testing.assert_allclose(henry_mixed(t, 0.0), henry_dc(t), rtol=0.0, atol=1e-9)

    @given(st.floats(1e-3, 1e3), st.floats(0.0, 1e3))
    def test_bounded_by_limits(self, Ba, t):
        # Both limiting processes are faster than their combination.
        value = henry_mixed(t, Ba)
        assert 0.0 <= value <= min(henry_dc(t), barrier_control(t / Ba)) + 1e-6

    @given(st.floats(0.0, 1e3), st.floats(1e-3, 1e3), st.floats(1.01, 10.0))
    def test_decreasing_in_ba(self, t, Ba, factor):
        assert henry_mixed(t, Ba * factor) <= henry_mixed(t, Ba) + 1e-12

    @given(st.floats(1e-3, 1e3), st.floats(1e-4, 1e3), st.floats(1.01, 10.0))
    def test_increasing_in_time(self, Ba, t, factor):
        assert henry_mixed(t * factor, Ba) > henry_mixed(t, Ba)

    @given(st.floats(0.05, 20.0), st.floats(1e-4, 0.1))
    def test_series_matches_integral(self, Ba, x):
        t = x * Ba
        assert henry_mixed_series(t, Ba, 30) == pytest.approx(henry_mixed(t, Ba), rel=1e-8)

    @given(st.floats(1e-4, 1e4))
    def test_root_identities(self, Ba):
        pair = lambda_roots(Ba)
        lp, lm = pair.lambda_plus, pair.lambda_minus
        assert abs(Ba * lp * lm - 1.0) <= 1e-12
        assert abs(Ba * (lp + lm) + 1.0) <= 1e-12
        for lam in (lp, lm):
            assert abs(Ba * lam * lam + lam + 1.0) <= 1e-12 * max(1.0, abs(Ba * lam * lam))
        assert pair.real == (Ba <= 0.25)

    def test_discrete_half_integral_reproduces_solution(self):
        # Diffusion-controlled henry: Gamma*_h = J^(1/2)(1 - Gamma*_h).  The
        # piecewise-linear interpolant of sqrt(t) limits this to first order.
        kernel = Kernel.diffusion()
        errors = []
        for h in (0.02, 0.01):
            mesh = build_mesh([(1.0, h)])
            u = 1.0 - henry_dc(mesh.nodes)
            err = max(abs(weights(kernel, mesh, n, "trapezoid") @ u[: n + 1] - henry_dc(mesh.nodes[n]))
                      for n in range(1, len(mesh.nodes)))
            assert err <= 0.2 * h
            errors.append(err)
        assert 1.8 <= errors[0] / errors[1] <= 2.2
