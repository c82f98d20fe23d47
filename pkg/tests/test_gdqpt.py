import logging
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from uhlquench import gdqpt, spin_half
from uhlquench.errors import CyclicityError
from uhlquench.gdqpt import (
    CyclicSample,
    GdqptEvent,
    Topology,
    bisect_sign_change,
    classify_topology,
    cyclic_sample,
    cyclic_samples,
    detect_phase_jumps,
    find_critical_times,
    golden_section,
    scan_trajectory,
)
from uhlquench.quench import QuenchScenario, TrajectorySample, UhlmannQuench, rate_function
from uhlquench.spin_half import SIGMA_X, SIGMA_Z
from uhlquench.uhlmann import angle_distance

from conftest import make_quench


# Zeros of the T = omega0 equator amplitude, frozen from a 30-digit mpmath
# findroot on the two-cosine form of the closed expression.
WARM_ZEROS = (28.0297423763798385, 84.0468884033954320, 139.846591968360923, 193.244842496426104)


@pytest.fixture(scope="module")
def cold_scan(equator_cold):
    _, q = equator_cold
    samples = scan_trajectory(q, 20.0, 0.01)
    events = detect_phase_jumps(samples, find_critical_times(samples, q))
    return q, samples, events


@pytest.fixture(scope="module")
def warm_scan(equator_T1):
    _, q = equator_T1
    samples = scan_trajectory(q, 200.0, 0.01)
    events = detect_phase_jumps(samples, find_critical_times(samples, q))
    return q, samples, events


def analytic_zeros(p, t_max, dt=1e-3):
    f = lambda t: spin_half.loschmidt_equator(p, t)
    ts = np.arange(0.0, t_max, dt)
    vals = np.array([f(t) for t in ts])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    return [brentq(f, ts[k], ts[k + 1], xtol=1e-13) for k in idx]


class TestRootFinders:
    def test_golden_section(self):
        a, b = golden_section(lambda x: (x - 0.3) ** 2, -1.0, 2.0, 1e-9)
        assert b - a <= 1e-9 and a <= 0.3 + 1e-9 and b >= 0.3 - 1e-9

    def test_bisection(self):
        a, b = bisect_sign_change(math.cos, 1.0, 2.0, 1e-12)
        assert abs(0.5 * (a + b) - math.pi / 2) < 1e-12

    def test_bisection_exact_root(self):
        assert bisect_sign_change(lambda x: x, 0.0, 1.0, 1e-9) == (0.0, 0.0)


class TestScan:
    def test_single_sample(self, equator_T1):
        samples = scan_trajectory(equator_T1[1], 0.0, 0.01)
        assert len(samples) == 1 and samples[0].G == pytest.approx(1.0)

    def test_bad_arguments(self, equator_T1):
        with pytest.raises(ValueError):
            scan_trajectory(equator_T1[1], 1.0, 0.0)
        with pytest.raises(ValueError):
            scan_trajectory(equator_T1[1], -1.0, 0.1)

    def test_cold_traces_cosine(self, cold_scan):
        _, samples, _ = cold_scan
        assert len(samples) == 2001
        assert max(abs(s.abs_G - abs(math.cos(s.t / 2))) for s in samples) < 2e-2


class TestCriticalTimes:
    def test_infinite_temperature_has_none(self):
        _, q = make_quench(T=math.inf)
        samples = scan_trajectory(q, 20.0, 0.05)
        assert find_critical_times(samples, q) == []

    def test_cold_zeros(self, cold_scan):
        _, _, events = cold_scan
        assert len(events) == 3
        for n, ev in enumerate(events):
            assert abs(ev.t_star - (2 * n + 1) * math.pi) < 1e-3
            assert ev.abs_G < 1e-6
            assert ev.refinement_width <= 1e-8

    def test_warm_first_zero_matches_bisection_oracle(self, warm_scan):
        _, _, events = warm_scan
        p = spin_half.SpinHalfParams(T=1.0)
        oracle = analytic_zeros(p, 40.0)[0]
        assert abs(oracle - WARM_ZEROS[0]) < 1e-9
        assert abs(events[0].t_star - oracle) < 1e-6

    def test_warm_all_zeros_found(self, warm_scan):
        _, _, events = warm_scan
        oracle = analytic_zeros(spin_half.SpinHalfParams(T=1.0), 200.0)
        assert len(events) == len(oracle) == len(WARM_ZEROS)
        for ev, z, frozen in zip(events, oracle, WARM_ZEROS):
            assert abs(z - frozen) < 1e-9
            assert abs(ev.t_star - z) < 1e-6

    def test_complex_branch(self):
        # off the equator G is complex; zeros (if any) go through the |G|^2 path
        p, q = make_quench(T=0.05, theta=1.2)
        samples = scan_trajectory(q, 30.0, 0.02)
        assert not gdqpt._is_real_branch(samples)
        events = find_critical_times(samples, q)
        for ev in events:
            assert abs(spin_half.loschmidt_analytic(p, ev.t_star)) < 1e-6

    def test_shallow_minimum_dropped(self, caplog):
        # |G| dips to 1e-3 (below the coarse threshold) but never vanishes
        def fake(t):
            g = (t - 1.0) ** 2 + 1e-3j
            return TrajectorySample(t, g, 0.0, 0.0, 0.0, rate_function(g), True)

        caplog.set_level(logging.INFO, logger="uhlquench.gdqpt")
        samples = scan_trajectory(fake, 2.0, 0.01)
        assert find_critical_times(samples, fake) == []
        assert "dropped" in caplog.text

    def test_synthetic_complex_zero(self):
        def fake(t):
            g = (t - 1.234567) * (1.0 + 1.0j)
            return TrajectorySample(t, g, 0.0, 0.0, 0.0, rate_function(g), abs(g) > 1e-6)

        samples = scan_trajectory(fake, 2.0, 0.01)
        (ev,) = find_critical_times(samples, fake)
        assert abs(ev.t_star - 1.234567) < 1e-8


class TestJumps:
    def test_no_events(self, cold_scan):
        _, samples, _ = cold_scan
        assert detect_phase_jumps(samples, []) == []

    @pytest.mark.parametrize("which", ["cold", "warm"])
    def test_jumps_are_pi(self, which, cold_scan, warm_scan):
        _, _, events = cold_scan if which == "cold" else warm_scan
        assert events
        for ev in events:
            assert abs(abs(ev.jump) - math.pi) < 0.05
            assert not ev.anomalous

    def test_anomaly_flag(self, cold_scan):
        _, samples, events = cold_scan
        fake = GdqptEvent(0, 2.0, 0.0, 1e-8)
        (out,) = detect_phase_jumps(samples, [fake])
        assert out.anomalous and abs(out.jump) < 0.2


class TestCyclic:
    def test_n_zero(self, equator_T1):
        assert cyclic_sample(equator_T1[1], 0).theta_U == 0.0

    def test_cold_alternates(self, cold_scan):
        q, _, events = cold_scan
        cyc = cyclic_samples(q, 5)
        want = [math.pi, 0.0, math.pi, 0.0, math.pi]
        for c, w in zip(cyc, want):
            assert angle_distance(c.theta_U, w) < 1e-3
        assert classify_topology(cyc[0]) is Topology.NONTRIVIAL
        assert classify_topology(cyc[1]) is Topology.TRIVIAL

    def test_cold_parity_rule(self):
        # with every crossing before n tau detected, odd counts pair with theta_U = pi
        _, q = make_quench(T=0.01)
        samples = scan_trajectory(q, 33.0, 0.01)
        events = find_critical_times(samples, q)
        for c in cyclic_samples(q, 5, events):
            assert c.crossings_before == c.n
            nontrivial = classify_topology(c) is Topology.NONTRIVIAL
            assert nontrivial == (c.crossings_before % 2 == 1)

    def test_warm_constant_between_events(self, warm_scan):
        q, _, events = warm_scan
        cyc = cyclic_samples(q, 31, events)
        for a, b in zip(cyc, cyc[1:]):
            if a.crossings_before == b.crossings_before:
                assert angle_distance(a.theta_U, b.theta_U) < 1e-3
        gaps = np.diff([ev.t_star for ev in events])
        assert np.all(gaps > spin_half.period(spin_half.SpinHalfParams()))

    def test_no_period(self):
        s = QuenchScenario(SIGMA_Z, SIGMA_X, 1.0, period_hint=1.0)
        with pytest.raises(CyclicityError):
            cyclic_samples(UhlmannQuench(s), 2)

    def test_wrong_tau_rejected(self, equator_T1):
        with pytest.raises(CyclicityError):
            cyclic_sample(equator_T1[1], 1, tau=1.0)


class TestClassify:
    @pytest.mark.parametrize(
        "theta, want",
        [
            (0.0, Topology.TRIVIAL),
            (math.pi, Topology.NONTRIVIAL),
            (-math.pi + 1e-9, Topology.NONTRIVIAL),
            (5e-4, Topology.TRIVIAL),
            (1.5, Topology.UNCLASSIFIABLE),
            (math.nan, Topology.UNCLASSIFIABLE),
        ],
    )
    def test_values(self, theta, want):
        assert classify_topology(CyclicSample(1, 1.0, theta, 0)) is want

    def test_near_but_outside_tolerance_warns(self, caplog):
        assert classify_topology(CyclicSample(1, 1.0, math.pi - 0.05, 0)) is Topology.NONTRIVIAL
        assert "proximity" in caplog.text
