import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from uhlquench import spin_half
from uhlquench.errors import NonAntiHermitianError, PhaseUndefinedError
from uhlquench.matfun import DensityMatrix, commutator, dagger, frob, is_unitary, unitary_evolution
from uhlquench.quench import naive_purification
from uhlquench.randomized import random_density_matrix, random_hermitian, random_unitary
from uhlquench.spin_half import SpinHalfParams
from uhlquench.uhlmann import (
    ConnectionSample,
    QuenchConnection,
    TransportGrid,
    angle_distance,
    holonomy_integrate,
    quench_connection,
    transport_residual,
    uhlmann_connection_generic,
    uhlmann_phase,
    wrap_angle,
)

seeds = st.integers(0, 2**32 - 1)


def closed_form_holonomy(rho0, h, t):
    """exp(-iHt) exp(iKt), with K built here from the definition."""
    lam, v = rho0.eigenvalues, rho0.eigenvectors
    hn = dagger(v) @ h @ v
    w = 2 * np.sqrt(np.outer(lam, lam)) / (lam[:, None] + lam[None, :])
    k = v @ (w * hn) @ dagger(v)
    return expm(-1j * h * t) @ expm(1j * k * t)


def generic_along_quench(rho0, h, t):
    u = unitary_evolution(h, t)
    rho_t = rho0.conjugated(u)
    d_sqrt = -1j * commutator(h, rho_t.sqrt)
    return uhlmann_connection_generic(rho_t, d_sqrt, t)


class TestAngles:
    def test_wrap_range(self):
        assert wrap_angle(-math.pi) == math.pi
        assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
        assert wrap_angle(0.5) == 0.5
        assert wrap_angle(-0.5 - 2 * math.pi) == pytest.approx(-0.5)

    def test_distance(self):
        assert angle_distance(math.pi - 1e-9, -math.pi + 1e-9) == pytest.approx(2e-9, abs=1e-15)


class TestGenericConnection:
    def test_commuting_derivative_gives_zero(self, rng):
        rho = DensityMatrix.from_spectrum([0.2, 0.3, 0.5], np.eye(3))
        a = uhlmann_connection_generic(rho, np.diag([0.1, -0.4, 0.3]))
        assert frob(a.matrix) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.integers(2, 4), st.floats(0, 10))
    def test_matches_quench_form(self, seed, d, t):
        rng = np.random.default_rng(seed)
        rho0 = random_density_matrix(rng, d)
        h = random_hermitian(rng, d)
        a_gen = generic_along_quench(rho0, h, t).matrix
        a_q = quench_connection(rho0, h, t).matrix
        assert frob(a_gen - a_q) < 1e-9
        assert frob(a_q + dagger(a_q)) < 1e-10

    def test_definition_entrywise(self, rng):
        rho = random_density_matrix(rng, 3)
        ds = random_hermitian(rng, 3)
        a = uhlmann_connection_generic(rho, ds).matrix
        v, lam = rho.eigenvectors, rho.eigenvalues
        c = commutator(ds, rho.sqrt)
        want = np.zeros((3, 3), dtype=complex)
        for n in range(3):
            for m in range(3):
                pn = np.outer(v[:, n], v[:, n].conj())
                pm = np.outer(v[:, m], v[:, m].conj())
                want -= pn @ c @ pm / (lam[n] + lam[m])
        assert frob(a - want) < 1e-12


class TestQuenchConnection:
    def test_spin_is_chi_h_tilde(self):
        for T in (0.3, 1.0, 5.0):
            for th in (0.4, math.pi / 2):
                p = SpinHalfParams(T=T, theta=th, phi=0.7)
                s = spin_half.scenario(p)
                a0 = quench_connection(s.rho0, s.H, 0.0).matrix
                # i A_U(0) = chi H~
                assert frob(1j * a0 - spin_half.chi(p) * spin_half.h_tilde(p)) < 1e-12

    def test_commuting_quench_is_zero(self):
        rho0 = DensityMatrix.from_spectrum([0.3, 0.7], np.eye(2))
        h = np.diag([0.4, -1.2])
        conn = QuenchConnection(rho0, h)
        assert frob(conn(1.3).matrix) < 1e-15
        assert frob(commutator(conn(1.3).matrix, rho0.matrix)) < 1e-15
        path = holonomy_integrate(conn, TransportGrid.uniform(5.0, 0.01))
        assert frob(path[-1].g - np.eye(2)) < 1e-14

    def test_sample_many_matches_scalar(self, rng):
        conn = QuenchConnection(random_density_matrix(rng, 3), random_hermitian(rng, 3))
        ts = [0.0, 0.4, 2.5]
        for t, a in zip(ts, conn.sample_many(ts)):
            assert frob(a - conn(t).matrix) == 0.0


class TestHolonomy:
    def test_zero_connection(self):
        path = holonomy_integrate(lambda t: np.zeros((3, 3)), TransportGrid.uniform(2.0, 0.1))
        assert all(frob(h.g - np.eye(3)) == 0.0 for h in path)

    def test_initial_is_identity_and_unitary(self, rng):
        conn = QuenchConnection(random_density_matrix(rng, 3), random_hermitian(rng, 3))
        path = holonomy_integrate(conn, TransportGrid.uniform(10.0, 0.01))
        assert frob(path[0].g - np.eye(3)) == 0.0
        assert all(is_unitary(h.g, 1e-9) for h in path)

    @settings(max_examples=15, deadline=None)
    @given(seeds, st.integers(2, 4))
    def test_matches_closed_form(self, seed, d):
        rng = np.random.default_rng(seed)
        rho0 = random_density_matrix(rng, d)
        h = random_hermitian(rng, d)
        conn = QuenchConnection(rho0, h)
        bw = np.ptp(np.linalg.eigvalsh(h))
        grid = TransportGrid.uniform(5.0, 2 * math.pi / bw / 2000)
        path = holonomy_integrate(conn, grid)
        t = float(grid.times[-1])
        assert frob(path[-1].g - closed_form_holonomy(rho0, h, t)) < 1e-8

    def test_midpoint_is_second_order(self):
        p = SpinHalfParams(T=1.0, theta=math.pi / 3)
        s = spin_half.scenario(p)
        conn = QuenchConnection(s.rho0, s.H)
        t_end = 10.0
        exact = spin_half.holonomy_analytic(p, t_end)
        errs = []
        steps = [0.1, 0.05, 0.025, 0.0125]
        for dt in steps:
            path = holonomy_integrate(conn, TransportGrid.uniform(t_end, dt), method="midpoint")
            errs.append(frob(path[-1].g - exact))
        slopes = np.diff(np.log(errs)) / np.diff(np.log(steps))
        assert np.all(np.abs(slopes - 2.0) < 0.2), slopes

    def test_magnus4_is_fourth_order(self):
        p = SpinHalfParams(T=1.0, theta=math.pi / 3)
        s = spin_half.scenario(p)
        conn = QuenchConnection(s.rho0, s.H)
        exact = spin_half.holonomy_analytic(p, 10.0)
        errs = [
            frob(holonomy_integrate(conn, TransportGrid.uniform(10.0, dt))[-1].g - exact)
            for dt in (0.2, 0.1, 0.05)
        ]
        slopes = np.diff(np.log(errs)) / np.log(0.5)
        assert np.all(np.abs(slopes - 4.0) < 0.3), slopes

    def test_off_grid_evaluation(self, rng):
        rho0, h = random_density_matrix(rng, 2), random_hermitian(rng, 2)
        path = holonomy_integrate(QuenchConnection(rho0, h), TransportGrid.uniform(3.0, 0.001))
        assert frob(path.at(1.23456).g - closed_form_holonomy(rho0, h, 1.23456)) < 1e-9
        with pytest.raises(ValueError):
            path.at(3.5)

    def test_rejects_non_anti_hermitian(self):
        with pytest.raises(NonAntiHermitianError):
            holonomy_integrate(lambda t: ConnectionSample(t, np.eye(2)), TransportGrid.uniform(1.0, 0.1))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            holonomy_integrate(lambda t: np.zeros((2, 2)), TransportGrid.uniform(1.0, 0.1), method="rk4")

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            TransportGrid(np.array([0.0, 0.1, 0.3]))
        with pytest.raises(ValueError):
            TransportGrid(np.array([0.1, 0.2]))
        with pytest.raises(ValueError):
            TransportGrid.uniform(1.0, 0.0)
        assert TransportGrid.uniform(1.0, 0.25).dt == 0.25


class TestUhlmannPhase:
    def test_identity(self, rng):
        assert uhlmann_phase(random_density_matrix(rng, 3), np.eye(3)) == 0.0

    @pytest.mark.parametrize("n, expected", [(1, math.pi), (2, 0.0)])
    def test_cold_equator(self, n, expected):
        p = SpinHalfParams(T=0.01)
        s = spin_half.scenario(p)
        tau = spin_half.period(p)
        path = holonomy_integrate(QuenchConnection(s.rho0, s.H), TransportGrid.uniform(n * tau, tau / 2000))
        assert angle_distance(uhlmann_phase(s.rho0, path[-1]), expected) < 1e-9

    def test_undefined(self):
        rho0 = DensityMatrix.from_spectrum([0.5, 0.5], np.eye(2))
        with pytest.raises(PhaseUndefinedError):
            uhlmann_phase(rho0, np.array([[1, 0], [0, -1]]))

    @settings(max_examples=20, deadline=None)
    @given(seeds)
    def test_gauge_invariance(self, seed):
        rng = np.random.default_rng(seed)
        d = 3
        rho0 = random_density_matrix(rng, d)
        h = random_hermitian(rng, d)
        perm = rng.permutation(d)
        phases = np.exp(1j * rng.uniform(-math.pi, math.pi, d))
        regauged = DensityMatrix(rho0.eigenvalues[perm], rho0.eigenvectors[:, perm] * phases[perm])
        grid = TransportGrid.uniform(3.0, 0.002)
        g1 = holonomy_integrate(QuenchConnection(rho0, h), grid)[-1]
        g2 = holonomy_integrate(QuenchConnection(regauged, h), grid)[-1]
        try:
            a = uhlmann_phase(rho0, g1)
        except PhaseUndefinedError:
            return
        assert angle_distance(a, uhlmann_phase(regauged, g2)) < 1e-9


class TestTransportResidual:
    def test_constant(self, rng):
        w = random_unitary(rng, 3)
        assert transport_residual(lambda t: w, 0.3) < 1e-15

    def test_uhlmann_vs_naive(self, equator_T1):
        p, q = equator_T1
        uhl = transport_residual(lambda t: q.purification(t).W, 2.0, 1e-4)
        naive = transport_residual(naive_purification(q.scenario), 2.0, 1e-4)
        assert uhl < 1e-6
        assert naive > 0.1

    def test_naive_matches_anticommutator_oracle(self, equator_T1):
        # W = exp(-iHt) sqrt(rho0): W^dag W' - h.c. = -2i sqrt(rho0) H sqrt(rho0)
        _, q = equator_T1
        s = q.scenario
        want = 2 * frob(s.rho0.sqrt @ s.H @ s.rho0.sqrt)
        assert transport_residual(naive_purification(s), 1.0, 1e-4) == pytest.approx(want, rel=1e-6)

    def test_side_argument(self, rng):
        with pytest.raises(ValueError):
            transport_residual(lambda t: np.eye(2), 0.0, side="up")
        w = lambda t: unitary_evolution(np.diag([1.0, 2.0]), t)
        assert transport_residual(w, 0.5, side="right") > 1.0
