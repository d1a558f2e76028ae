"""Model tests: parameters, joint kinematics, mass/force, contact geometry."""

import math

import numpy as np
import pytest

from ujointsim.model import (
    State,
    SystemParams,
    Wall,
    contact_jacobians,
    contact_set,
    contact_snapshot,
    eval_kinematics,
    force_vector,
    gap_functions,
    kinematics_arrays,
    mass_matrix,
    relative_velocities,
)

BETA5 = math.radians(5.0)

# frozen reference values, evaluated at 30 significant digits from the
# closed-form expressions
ETA_0_5DEG = 1.0038198375433474
NU_0_5DEG = -0.0874886635259240
M22_0 = 0.013217312812762644
WT1_0_5DEG = -0.0017497732705184801


class TestSystemParams:
    def test_defaults_are_reference_set(self):
        p = SystemParams()
        assert p.j1 == 0.014
        assert (p.j2x, p.j2y, p.j2z) == (0.00111, 0.00202, 0.00111)
        assert p.j3 == 0.012
        assert p.ks == 1000.0
        assert p.cs == 5.0
        assert p.r1 == 0.02
        assert p.clearance == 50e-6
        assert p.beta == pytest.approx(BETA5, rel=1e-15)
        assert p.arm_length == 0.04
        assert p.eps_n == p.eps_t == 0.45
        assert p.mu == 0.8
        assert p.omega == 100.0
        assert p.t0 == 1.0
        assert p.dt == 1e-5

    @pytest.mark.parametrize(
        "field,value",
        [
            ("j1", 0.0), ("j1", -1.0), ("j3", 0.0), ("r1", 0.0),
            ("arm_length", 0.0), ("dt", 0.0), ("clearance", -1e-9),
            ("eps_n", -0.1), ("eps_n", 1.1), ("eps_t", 2.0),
            ("mu", -0.5), ("beta", -0.1), ("beta", math.pi / 2),
            ("ks", -1.0), ("cs", -1.0), ("t_final", -1.0),
            ("omega", -1.0), ("t0", -1.0), ("j2y", float("nan")),
        ],
    )
    def test_invalid_values_rejected(self, field, value):
        with pytest.raises(ValueError):
            SystemParams(**{field: value})

    def test_zero_stiffness_damping_clearance_allowed(self):
        SystemParams(ks=0.0, cs=0.0, clearance=0.0, mu=0.0, t_final=0.0)

    def test_state_rejects_non_finite(self):
        with pytest.raises(ValueError):
            State(0.0, (float("nan"), 0.0), (0.0, 0.0))


class TestKinematics:
    def test_aligned_joint_is_identity(self):
        kin = eval_kinematics(0.3, 2.0, 0.0)
        assert kin.eta == 1.0
        assert kin.nu == 0.0
        assert kin.phi2 == 0.0
        assert kin.phi4 == pytest.approx(0.3, rel=1e-15)
        assert kin.phi4_dot == 2.0

    def test_reference_point_values(self):
        kin = eval_kinematics(0.0, 0.0, BETA5)
        assert kin.eta == pytest.approx(ETA_0_5DEG, rel=1e-13)
        assert kin.nu == pytest.approx(NU_0_5DEG, rel=1e-13)
        # consistency identity at phi1c = 0
        assert kin.eta * (1.0 - math.sin(BETA5) ** 2) == pytest.approx(
            math.cos(BETA5), rel=1e-14
        )
        assert kin.phi2 == 0.0
        assert kin.phi4 == 0.0

    def test_quarter_turn_values(self):
        kin = eval_kinematics(math.pi / 2, 1.0, BETA5)
        assert kin.eta == pytest.approx(math.cos(BETA5), rel=1e-13)
        assert kin.nu == pytest.approx(0.0, abs=1e-15)
        assert kin.phi2 == pytest.approx(-BETA5, rel=1e-13)
        assert kin.phi4 == pytest.approx(math.pi / 2, rel=1e-13)
        assert kin.phi4_dot == pytest.approx(math.cos(BETA5), rel=1e-13)

    def test_eta_nu_bounds(self, rng):
        for _ in range(2000):
            beta = rng.uniform(0.0, math.pi / 2 * 0.95)
            phi = rng.uniform(-10.0, 10.0)
            kin = eval_kinematics(phi, 0.0, beta)
            assert math.cos(beta) - 1e-12 <= kin.eta <= 1.0 / math.cos(beta) + 1e-12
            assert abs(kin.nu) <= math.tan(beta) + 1e-12

    def test_derivatives_match_central_differences(self, rng):
        h = 1e-6
        for _ in range(2000):
            phi = rng.uniform(-2 * math.pi, 2 * math.pi)
            beta = rng.uniform(0.0, math.pi / 3)
            kin = eval_kinematics(phi, 0.0, beta)
            plus = eval_kinematics(phi + h, 0.0, beta)
            minus = eval_kinematics(phi - h, 0.0, beta)
            fd_eta = (plus.eta - minus.eta) / (2 * h)
            fd_nu = (plus.nu - minus.nu) / (2 * h)
            assert abs(kin.eta_prime - fd_eta) <= 1e-6 * max(1.0, abs(kin.eta_prime))
            assert abs(kin.nu_prime - fd_nu) <= 1e-6 * max(1.0, abs(kin.nu_prime))

    def test_phi2_derivative_is_nu(self, rng):
        # the gyroscopic reduction relies on d(phi2)/d(phi1c) = nu
        h = 1e-6
        for _ in range(500):
            phi = rng.uniform(-2 * math.pi, 2 * math.pi)
            beta = rng.uniform(0.0, math.pi / 3)
            kin = eval_kinematics(phi, 0.0, beta)
            fd = (
                eval_kinematics(phi + h, 0.0, beta).phi2
                - eval_kinematics(phi - h, 0.0, beta).phi2
            ) / (2 * h)
            assert fd == pytest.approx(kin.nu, rel=1e-7, abs=1e-9)

    def test_phi4_branch_continuity(self):
        # no principal-value jumps over many turns
        phis = np.linspace(-8 * math.pi, 8 * math.pi, 20001)
        vals = [eval_kinematics(p, 0.0, BETA5).phi4 for p in phis]
        jumps = np.abs(np.diff(vals))
        assert jumps.max() < 0.01

    def test_phi4_cardan_error_symmetry(self):
        # phi4 - phi1c is pi-periodic and vanishes at multiples of pi/2
        for k in range(-6, 7):
            phi = k * math.pi / 2
            kin = eval_kinematics(phi, 0.0, BETA5)
            assert kin.phi4 - phi == pytest.approx(0.0, abs=1e-12)
        for phi in np.linspace(-2.0, 2.0, 101):
            err = eval_kinematics(phi, 0.0, BETA5).phi4 - phi
            err_shift = eval_kinematics(phi + math.pi, 0.0, BETA5).phi4 - (phi + math.pi)
            assert err_shift == pytest.approx(err, abs=1e-12)

    def test_kinematics_arrays_match_scalar(self, rng):
        phis = rng.uniform(-12.0, 12.0, 200)
        eta, nu, phi2, phi4 = kinematics_arrays(phis, BETA5)
        for i, phi in enumerate(phis):
            kin = eval_kinematics(phi, 0.0, BETA5)
            assert eta[i] == pytest.approx(kin.eta, rel=1e-14)
            assert nu[i] == pytest.approx(kin.nu, rel=1e-14, abs=1e-15)
            assert phi2[i] == pytest.approx(kin.phi2, rel=1e-14, abs=1e-15)
            assert phi4[i] == pytest.approx(kin.phi4, rel=1e-14, abs=1e-14)


class TestMassMatrix:
    def test_aligned_reduction(self):
        p = SystemParams(beta=0.0)
        for phi in (0.0, 0.7, -2.0):
            kin = eval_kinematics(phi, 0.0, 0.0)
            m11, m22 = mass_matrix(p, kin)
            assert m11 == p.j1
            assert m22 == pytest.approx(p.j3 + p.j2x, rel=1e-15)

    def test_reference_value_at_origin(self):
        p = SystemParams()
        kin = eval_kinematics(0.0, 0.0, p.beta)
        m11, m22 = mass_matrix(p, kin)
        assert m11 == 0.014
        assert m22 == pytest.approx(M22_0, rel=1e-12)

    def test_positive_definite_everywhere(self, rng):
        p = SystemParams()
        for _ in range(500):
            kin = eval_kinematics(rng.uniform(-10, 10), rng.normal(), p.beta)
            m11, m22 = mass_matrix(p, kin)
            assert m11 > 0.0
            assert m22 > 0.0


class TestForceVector:
    def test_rest_at_origin_is_zero(self):
        p = SystemParams()
        kin = eval_kinematics(0.0, 0.0, p.beta)
        h = force_vector(p, State(0.0, (0.0, 0.0), (0.0, 0.0)), kin)
        assert h == (0.0, 0.0)

    def test_peak_torque(self):
        p = SystemParams()
        t = math.pi / (2.0 * p.omega)
        kin = eval_kinematics(0.0, 0.0, p.beta)
        h = force_vector(p, State(t, (0.0, 0.0), (0.0, 0.0)), kin)
        assert h[0] == pytest.approx(1.0, rel=1e-12)
        assert h[1] == 0.0

    def test_symmetric_crosspiece_kills_sin2phi2_term(self, rng):
        # j2x == j2z at the defaults, so h2 must not contain the
        # sin(2 phi2) contribution at any state
        p = SystemParams()
        assert p.j2x == p.j2z
        for _ in range(100):
            phi = rng.uniform(-3, 3)
            u2 = rng.normal()
            t = rng.uniform(0, 1)
            kin = eval_kinematics(phi, u2, p.beta)
            h1, h2 = force_vector(p, State(t, (phi, phi), (0.0, u2)), kin)
            manual = -(
                (p.j3 * kin.eta * kin.eta_prime + p.j2y * kin.nu * kin.nu_prime)
                * u2 * u2
                + p.ks * kin.eta * kin.phi4
                + p.cs * kin.eta * kin.phi4_dot
            )
            assert h2 == pytest.approx(manual, rel=1e-14, abs=1e-14)

    def test_asymmetric_crosspiece_feels_sin2phi2_term(self):
        p = SystemParams(j2x=0.002, j2z=0.001)
        kin = eval_kinematics(0.7, 1.5, p.beta)
        h1, h2 = force_vector(p, State(0.0, (0.7, 0.7), (0.0, 1.5)), kin)
        without = -(
            (p.j3 * kin.eta * kin.eta_prime + p.j2y * kin.nu * kin.nu_prime)
            * 1.5 * 1.5
            + p.ks * kin.eta * kin.phi4
            + p.cs * kin.eta * kin.phi4_dot
        )
        assert h2 != pytest.approx(without, rel=1e-12)


class TestContactGeometry:
    def test_centered_gaps(self):
        p = SystemParams()
        assert gap_functions(p, (0.0, 0.0)) == (p.clearance, p.clearance)

    def test_gap_arithmetic(self):
        p = SystemParams()  # arm_length 0.04, clearance 50e-6
        g_minus, g_plus = gap_functions(p, (0.001, 0.0))
        assert g_minus == pytest.approx(1.0e-5, rel=1e-12)
        assert g_plus == pytest.approx(9.0e-5, rel=1e-12)

    def test_zero_clearance_sign_split(self):
        p = SystemParams(clearance=0.0)
        for delta in (1e-9, 1e-3, -1e-9, -2.0):
            g_minus, g_plus = gap_functions(p, (delta, 0.0))
            assert (g_minus < 0.0) != (g_plus < 0.0)

    def test_gaps_sum_to_twice_clearance(self, rng):
        # affine complements; float error stays below 2e-20 over the
        # physically reachable transmission-error range
        p = SystemParams()
        lim = 3 * p.clearance / p.arm_length
        for _ in range(300):
            delta = rng.uniform(-lim, lim)
            g_minus, g_plus = gap_functions(p, (delta, 0.0))
            assert g_minus + g_plus == pytest.approx(2 * p.clearance, abs=1e-18)

    def test_contact_set_cases(self):
        p = SystemParams()
        assert contact_set(p, (0.0, 0.0)) == ()
        delta_touch = p.clearance / p.arm_length
        assert contact_set(p, (delta_touch, 0.0)) == (Wall.LEFT,)
        assert contact_set(p, (-delta_touch, 0.0)) == (Wall.RIGHT,)
        p0 = SystemParams(clearance=0.0)
        assert contact_set(p0, (0.0, 0.0)) == (Wall.LEFT, Wall.RIGHT)
        with pytest.raises(ValueError):
            contact_set(p, (0.0, 0.0), activation_tol=-1.0)

    def test_contact_jacobians(self):
        p = SystemParams()
        kin = eval_kinematics(0.0, 0.0, p.beta)
        w_n, w_t = contact_jacobians(p, (Wall.LEFT,), kin)
        assert w_n == ((-0.04, 0.04),)
        assert w_t[0] == pytest.approx(WT1_0_5DEG, rel=1e-12)
        assert w_t[1] == 0.0
        w_n, _ = contact_jacobians(p, (Wall.RIGHT,), kin)
        assert w_n == ((0.04, -0.04),)
        kin0 = eval_kinematics(0.3, 0.0, 0.0)
        _, w_t0 = contact_jacobians(SystemParams(beta=0.0), (Wall.LEFT,), kin0)
        assert w_t0 == (0.0, 0.0)
        with pytest.raises(ValueError):
            contact_jacobians(p, (), kin)

    def test_relative_velocities(self):
        w_n = ((-0.04, 0.04), (0.04, -0.04))
        w_t = (-0.0017, 0.0)
        gamma_n, gamma_t = relative_velocities(w_n, w_t, (0.0, 0.0))
        assert gamma_n == (0.0, 0.0)
        assert gamma_t == 0.0
        gamma_n, _ = relative_velocities(((-0.04, 0.04),), w_t, (1.0, 0.0))
        assert gamma_n[0] == pytest.approx(-0.04, rel=1e-15)
        # rigid co-rotation keeps both gaps constant
        gamma_n, _ = relative_velocities(w_n, w_t, (1.0, 1.0))
        assert gamma_n == (0.0, 0.0)

    def test_snapshot_assembly(self):
        p = SystemParams()
        kin = eval_kinematics(0.0, 0.0, p.beta)
        snap = contact_snapshot(p, (p.clearance / p.arm_length, 0.0), (1.0, 0.0), kin)
        assert snap.active == (Wall.LEFT,)
        assert snap.g_minus + snap.g_plus == pytest.approx(2 * p.clearance, abs=1e-18)
        assert snap.gamma_n[0] == pytest.approx(-0.04, rel=1e-15)
        assert snap.gamma_t == pytest.approx(WT1_0_5DEG, rel=1e-12)
        open_snap = contact_snapshot(p, (0.0, 0.0), (1.0, 0.0), kin)
        assert open_snap.active == ()
        assert open_snap.gamma_n == ()
