import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qodknap.optics import (
    BEAM_SEPARATION,
    MIRROR_SIZE,
    REFERENCE_DEVICE,
    DeviceError,
    DeviceParameters,
    divergence,
    feasibility_check,
    final_diameter,
    optimal_beam_diameter,
    reference_report,
    size_device,
)


class TestDivergence:
    def test_reference_values(self):
        assert divergence(5e-7, 2e-3) == pytest.approx(3.0e-4, rel=1e-12)

    def test_unit_ratio(self):
        assert divergence(1e-3, 1e-3) == pytest.approx(1.2)

    def test_scaling(self):
        assert divergence(5e-7, 4e-3) == pytest.approx(divergence(5e-7, 2e-3) / 2)

    @pytest.mark.parametrize("lam, d", [(0, 1), (1, 0), (-1, 1)])
    def test_rejects(self, lam, d):
        with pytest.raises(DeviceError):
            divergence(lam, d)


class TestFinalDiameter:
    def test_no_divergence(self):
        assert final_diameter(10, 1.0, 0.0, 2e-3) == 2e-3

    def test_direct(self):
        # 30 * (1/3) * sin(3e-4) + 2e-3
        assert final_diameter(30, 1 / 3, 3e-4, 2e-3) == pytest.approx(5.0e-3, rel=1e-6)

    def test_optimal_source_roughly_doubles(self):
        d_b = optimal_beam_diameter(30, 10 / 30, 5e-7)
        d = final_diameter(30, 10 / 30, divergence(5e-7, d_b), d_b)
        # 1 + 1.2: the closed form drops the 1.2 and reads 2*d_b
        assert d / d_b == pytest.approx(2.2, rel=1e-6)
        assert d == pytest.approx(2 * d_b, rel=0.1)

    def test_rejects_grazing_angle(self):
        with pytest.raises(DeviceError):
            final_diameter(1, 1.0, math.pi / 2, 1e-3)


class TestOptimalDiameter:
    def test_reference(self):
        d = optimal_beam_diameter(30, 10 / 30, 5e-7)
        assert d == pytest.approx(math.sqrt(5e-6))
        assert abs(d - 2e-3) / 2e-3 < 0.12

    def test_unit(self):
        assert optimal_beam_diameter(1, 1.0, 1.0) == 1.0

    def test_sqrt_scaling(self):
        assert optimal_beam_diameter(4, 10.0, 5e-7) == pytest.approx(2 * optimal_beam_diameter(1, 10.0, 5e-7))

    @pytest.mark.parametrize("nL", [0.1, 1.0, 10.0, 250.0])
    def test_near_minimum(self, nL):
        lam = 5e-7
        d_b = optimal_beam_diameter(1, nL, lam)
        grid = np.linspace(d_b / 10, 10 * d_b, 100)
        f = nL * 1.2 * lam / grid + grid
        f_at = nL * 1.2 * lam / d_b + d_b
        assert f_at <= 1.25 * f.min()


class TestFeasibility:
    def test_reference_device(self):
        rep = feasibility_check(REFERENCE_DEVICE, 200)
        assert rep.feasible
        assert REFERENCE_DEVICE.kappa >= 2 * REFERENCE_DEVICE.d_b
        assert rep.bound_ratio == 2000
        assert rep.B_plus_max == 1999
        assert rep.kappa_min_closed_form == pytest.approx(4e-3)

    def test_separation_violation(self):
        dev = replace(REFERENCE_DEVICE, kappa=REFERENCE_DEVICE.d_final / 2)
        rep = feasibility_check(dev, 10)
        assert BEAM_SEPARATION in rep.violations and not rep.feasible

    def test_mirror_violation(self):
        dev = REFERENCE_DEVICE
        dev = replace(dev, R_M=dev.kappa * dev.n_gates + dev.d_b / 2)
        assert MIRROR_SIZE in feasibility_check(dev, 0).violations

    def test_bound_violation(self):
        rep = feasibility_check(REFERENCE_DEVICE, 2000)
        assert "bound range" in rep.violations

    def test_reference_note(self):
        rep = reference_report()
        assert rep.notes and "200" in rep.notes[0] and "2000" in rep.notes[0]

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1.0, 50.0), st.integers(0, 3000))
    def test_enlarging_mirror_never_adds_violations(self, grow, max_sum):
        a = set(feasibility_check(REFERENCE_DEVICE, max_sum).violations)
        b = set(feasibility_check(replace(REFERENCE_DEVICE, R_M=REFERENCE_DEVICE.R_M * grow), max_sum).violations)
        assert b <= a

    @given(st.floats(0.01, 0.999))
    def test_shrinking_kappa_below_d_final(self, frac):
        dev = replace(REFERENCE_DEVICE, kappa=REFERENCE_DEVICE.d_final * frac)
        assert BEAM_SEPARATION in feasibility_check(dev, 0).violations

    @given(st.floats(1e-3, 1e3))
    def test_length_rescaling(self, s):
        dev = REFERENCE_DEVICE
        big = dev.scaled(s)
        assert big.alpha == pytest.approx(dev.alpha, rel=1e-12)
        assert big.d_final == pytest.approx(dev.d_final * s, rel=1e-12)
        assert feasibility_check(big, 100).violations == feasibility_check(dev, 100).violations


class TestSizeDevice:
    def test_example(self):
        dev = size_device(30, 200, 5e-7, 1 / 3)
        assert feasibility_check(dev, 200).feasible
        assert dev.delta_p == 1e-7 and dev.T_atom == 1e-8

    def test_zero_sum(self):
        assert feasibility_check(size_device(5, 0, 5e-7, 1.0), 0).feasible

    def test_halved_kappa_fails(self):
        dev = size_device(30, 200, 5e-7, 1 / 3)
        assert not feasibility_check(replace(dev, kappa=dev.kappa / 2), 200).feasible

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 200), st.integers(0, 10**5), st.floats(1e-7, 1e-5), st.floats(1e-3, 10.0))
    def test_round_trip(self, n, max_sum, lam, L):
        dev = size_device(n, max_sum, lam, L)
        assert feasibility_check(dev, max_sum).feasible


class TestDeviceValidation:
    @pytest.mark.parametrize("kw", [{"kappa": -1}, {"gain": 0.5}, {"phase_jitter": -0.1}, {"n_gates": 0}])
    def test_rejects(self, kw):
        base = dict(lambda_=5e-7, d_b=2e-3, L=1.0, n_gates=3, R_M=1.0, kappa=5e-3)
        base.update(kw)
        with pytest.raises(DeviceError):
            DeviceParameters(**base)
