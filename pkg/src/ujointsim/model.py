"""Physical model of a two-shaft driveline coupled by a universal joint.

The input shaft (inertia j1) drives the output shaft (inertia j3,
torsional stiffness ks, damping cs) through a Cardan joint bent by the
angle beta.  The crosspiece rides inside the input yoke with a radial
clearance, so the input yoke and the crosspiece carry separate rotation
angles: the generalized coordinates are q = (phi1, phi1c) with
velocities u = (phi1_dot, phi1c_dot).

This module owns:

* the parameter set (:class:`SystemParams`, SI units throughout),
* the joint kinematics eta, nu, phi2, phi4 and their derivatives,
* the diagonal mass matrix and the smooth force vector,
* the contact geometry: gap functions of the two yoke walls, the active
  set, the generalized normal/tangential direction vectors and the
  relative contact velocities.

Everything here is a pure function of its arguments; the time-stepping
loop lives in :mod:`ujointsim.stepper`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "SystemParams",
    "State",
    "KinematicsEval",
    "ContactSnapshot",
    "Wall",
    "eval_kinematics",
    "kinematics_arrays",
    "mass_matrix",
    "force_vector",
    "gap_functions",
    "contact_set",
    "contact_jacobians",
    "relative_velocities",
    "contact_snapshot",
]

_PI = math.pi


class Wall(enum.Enum):
    """The two walls of the input-yoke bore that can touch the crosspiece."""

    LEFT = "left"
    RIGHT = "right"


#: Canonical wall ordering used for active-contact tuples.
WALLS = (Wall.LEFT, Wall.RIGHT)


@dataclass(frozen=True)
class SystemParams:
    """All physical and integration constants of the driveline model.

    Defaults are the reference parameter set used throughout the test
    suite: a 5 degree joint angle, 50 um radial clearance, sinusoidal
    input torque T = t0 sin(omega t), and a 1e-5 s integration step.

    Units are SI: inertias kg m^2, stiffness N m/rad, damping N m s/rad,
    lengths m, angles rad, torque N m, times s.
    """

    j1: float = 0.014           # input shaft inertia
    j2x: float = 0.00111        # crosspiece inertia about X'
    j2y: float = 0.00202        # crosspiece inertia about Y'
    j2z: float = 0.00111        # crosspiece inertia about Z'
    j3: float = 0.012           # output shaft inertia
    ks: float = 1000.0          # output shaft torsional stiffness
    cs: float = 5.0             # output shaft damping coefficient
    r1: float = 0.02            # crosspiece cap radius
    clearance: float = 50e-6    # radial clearance between cap and yoke bore
    beta: float = math.radians(5.0)  # joint bend angle
    arm_length: float = 0.04    # crosspiece arm length
    eps_n: float = 0.45         # normal restitution coefficient
    eps_t: float = 0.45         # tangential restitution coefficient
    mu: float = 0.8             # Coulomb friction coefficient
    omega: float = 100.0        # forcing frequency, rad/s
    t0: float = 1.0             # forcing torque amplitude
    dt: float = 1e-5            # integration time step
    t_final: float = 1.0        # simulation horizon

    def __post_init__(self):
        positive = {
            "j1": self.j1, "j2x": self.j2x, "j2y": self.j2y, "j2z": self.j2z,
            "j3": self.j3, "r1": self.r1, "arm_length": self.arm_length,
            "dt": self.dt,
        }
        for name, value in positive.items():
            if not value > 0.0:
                raise ValueError(f"{name} must be > 0, got {value}")
        nonnegative = {
            "ks": self.ks, "cs": self.cs, "clearance": self.clearance,
            "mu": self.mu, "t_final": self.t_final,
        }
        for name, value in nonnegative.items():
            if not value >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        for name, value in (("eps_n", self.eps_n), ("eps_t", self.eps_t)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if not 0.0 <= self.beta < _PI / 2:
            raise ValueError(f"beta must be in [0, pi/2), got {self.beta}")
        for name, value in (("omega", self.omega), ("t0", self.t0)):
            if not value >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        for name, value in vars(self).items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class State:
    """Instantaneous mechanical state: time, positions q, velocities u.

    q = (phi1, phi1c): input yoke angle and crosspiece angle, rad.
    u = (phi1_dot, phi1c_dot): their time derivatives, rad/s.
    """

    t: float
    q: tuple[float, float]
    u: tuple[float, float]

    def __post_init__(self):
        vals = (self.t, *self.q, *self.u)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"state entries must be finite, got {vals}")


class KinematicsEval(NamedTuple):
    """Joint kinematics evaluated at one crosspiece configuration.

    eta and nu are the velocity transmission ratios of the output shaft
    and of the crosspiece Y' spin (phi4_dot = eta phi1c_dot, phi2_dot =
    nu phi1c_dot); eta_prime and nu_prime are their derivatives with
    respect to phi1c.  phi4 is branch-continuous: it follows phi1c
    across quadrants without principal-value jumps, which the torsional
    spring term requires.
    """

    eta: float
    nu: float
    eta_prime: float
    nu_prime: float
    phi2: float
    phi4: float
    phi4_dot: float


def eval_kinematics(phi1c: float, phi1c_dot: float, beta: float) -> KinematicsEval:
    """Evaluate eta, nu, their derivatives, phi2, phi4 and phi4_dot.

    The common denominator 1 - sin(beta)^2 cos(phi1c)^2 >= cos(beta)^2
    is strictly positive for |beta| < pi/2, so the evaluation never
    degenerates.
    """
    sb = math.sin(beta)
    cb = math.cos(beta)
    sb2 = sb * sb
    s = math.sin(phi1c)
    c = math.cos(phi1c)
    den = 1.0 - sb2 * c * c
    den2 = den * den

    eta = cb / den
    nu = -sb * cb * c / den
    eta_prime = -cb * sb2 * (2.0 * s * c) / den2
    nu_prime = sb * cb * s * (1.0 + sb2 * c * c) / den2
    phi2 = -math.atan(sb / cb * s)

    # Branch-continuous phi4 = arctan(tan(phi1c)/cos(beta)): fold phi1c
    # into [-pi/2, pi/2] by whole half-turns, take the principal value
    # there, and add the half-turns back.  atan2 keeps the fold edges
    # continuous even when rounding pushes the residual past +-pi/2.
    k = round(phi1c / _PI)
    if k & 1:
        s_r, c_r = -s, -c
    else:
        s_r, c_r = s, c
    phi4 = k * _PI + math.atan2(s_r, cb * c_r)

    return KinematicsEval(eta, nu, eta_prime, nu_prime, phi2, phi4, eta * phi1c_dot)


def kinematics_arrays(phi1c: np.ndarray, beta: float):
    """Vectorized (eta, nu, phi2, phi4) over an array of crosspiece angles.

    Same formulas as :func:`eval_kinematics`, used for post-processing
    sampled trajectories (energy audits, report columns).
    """
    phi1c = np.asarray(phi1c, dtype=float)
    sb = math.sin(beta)
    cb = math.cos(beta)
    s = np.sin(phi1c)
    c = np.cos(phi1c)
    den = 1.0 - (sb * sb) * c * c
    eta = cb / den
    nu = -sb * cb * c / den
    phi2 = -np.arctan(sb / cb * s)
    k = np.round(phi1c / _PI)
    parity = 1.0 - 2.0 * (np.asarray(k) % 2.0)
    phi4 = k * _PI + np.arctan2(parity * s, cb * parity * c)
    return eta, nu, phi2, phi4


def mass_matrix(p: SystemParams, kin: KinematicsEval) -> tuple[float, float]:
    """Diagonal of the 2x2 generalized mass matrix, (m11, m22).

    The matrix is diagonal for this model: the input shaft contributes
    j1, and the crosspiece/output assembly reflected onto phi1c
    contributes j3 eta^2 + j2y nu^2 + j2x cos(phi2)^2 + j2z sin(phi2)^2.
    Both entries are strictly positive for any valid configuration.
    """
    c2 = math.cos(kin.phi2)
    s2 = math.sin(kin.phi2)
    m22 = (
        p.j3 * kin.eta * kin.eta
        + p.j2y * kin.nu * kin.nu
        + p.j2x * c2 * c2
        + p.j2z * s2 * s2
    )
    return (p.j1, m22)


def force_vector(p: SystemParams, state: State, kin: KinematicsEval) -> tuple[float, float]:
    """Generalized smooth forces h = (h1, h2) such that M u_dot = h.

    h1 is the input torque t0 sin(omega t).  h2 collects, with opposite
    sign, the gyroscopic terms quadratic in phi1c_dot and the reflected
    output-shaft spring and damper torques ks eta phi4 + cs eta phi4_dot.
    """
    return _force(p, state.t, state.u[1], kin)


def _force(p: SystemParams, t: float, u2: float, kin: KinematicsEval) -> tuple[float, float]:
    h1 = p.t0 * math.sin(p.omega * t)
    c2 = math.cos(kin.phi2)
    s2 = math.sin(kin.phi2)
    sin2phi2 = 2.0 * s2 * c2
    # d(phi2)/d(phi1c) equals nu, so the gyroscopic coefficient
    # (d(phi2)/d(phi1c) - 2 nu) reduces to -nu.
    gyro = (
        p.j3 * kin.eta * kin.eta_prime
        + p.j2y * kin.nu * kin.nu_prime
        - kin.nu * 0.5 * (p.j2x - p.j2z) * sin2phi2
    ) * u2 * u2
    h2 = -(gyro + p.ks * kin.eta * kin.phi4 + p.cs * kin.eta * kin.phi4_dot)
    return (h1, h2)


def gap_functions(p: SystemParams, q: tuple[float, float]) -> tuple[float, float]:
    """Normal gaps (g_minus, g_plus) of the left and right yoke walls.

    With the transmission error delta = phi1 - phi1c, the crosspiece cap
    sits delta * arm_length from the bore center, so
    g_minus = clearance - delta * arm_length and
    g_plus = clearance + delta * arm_length.
    The two gaps always sum to 2 * clearance.
    """
    delta = q[0] - q[1]
    dl = delta * p.arm_length
    return (p.clearance - dl, p.clearance + dl)


def contact_set(
    p: SystemParams, q: tuple[float, float], activation_tol: float = 0.0
) -> tuple[Wall, ...]:
    """Walls whose gap is closed (gap <= activation_tol) at configuration q."""
    if activation_tol < 0.0:
        raise ValueError("activation_tol must be >= 0")
    g_minus, g_plus = gap_functions(p, q)
    active = []
    if g_minus <= activation_tol:
        active.append(Wall.LEFT)
    if g_plus <= activation_tol:
        active.append(Wall.RIGHT)
    return tuple(active)


def contact_jacobians(
    p: SystemParams, active: tuple[Wall, ...], kin: KinematicsEval
) -> tuple[tuple[tuple[float, float], ...], tuple[float, float]]:
    """Generalized contact direction vectors (w_n per contact, w_t).

    w_n is the gap gradient with respect to q: (-L, +L) for the left
    wall and (+L, -L) for the right wall.  w_t is the gradient of the
    tangential slip velocity gamma_t = nu * phi1_dot * r1 with respect
    to u, i.e. (nu * r1, 0); it is the same for both walls, so sign
    effects of sliding reversal are resolved inside the contact LCP.
    """
    if not active:
        raise ValueError("contact_jacobians requires a non-empty active set")
    length = p.arm_length
    w_n = tuple(
        (-length, length) if wall is Wall.LEFT else (length, -length)
        for wall in active
    )
    w_t = (kin.nu * p.r1, 0.0)
    return w_n, w_t


def relative_velocities(
    w_n: tuple[tuple[float, float], ...],
    w_t: tuple[float, float],
    u: tuple[float, float],
) -> tuple[tuple[float, ...], float]:
    """Normal relative velocities per contact and the tangential slip velocity."""
    u1, u2 = u
    gamma_n = tuple(wn[0] * u1 + wn[1] * u2 for wn in w_n)
    gamma_t = w_t[0] * u1 + w_t[1] * u2
    return gamma_n, gamma_t


@dataclass(frozen=True)
class ContactSnapshot:
    """Contact geometry and kinematics frozen at one configuration."""

    delta: float
    g_minus: float
    g_plus: float
    active: tuple[Wall, ...]
    w_n: tuple[tuple[float, float], ...]
    w_t: tuple[float, float]
    gamma_n: tuple[float, ...]
    gamma_t: float


def contact_snapshot(
    p: SystemParams,
    q: tuple[float, float],
    u: tuple[float, float],
    kin: KinematicsEval,
    activation_tol: float = 0.0,
) -> ContactSnapshot:
    """Assemble the full contact picture at configuration (q, u)."""
    g_minus, g_plus = gap_functions(p, q)
    active = contact_set(p, q, activation_tol)
    if active:
        w_n, w_t = contact_jacobians(p, active, kin)
        gamma_n, gamma_t = relative_velocities(w_n, w_t, u)
    else:
        w_n, w_t = (), (kin.nu * p.r1, 0.0)
        gamma_n, gamma_t = (), w_t[0] * u[0]
    return ContactSnapshot(
        delta=q[0] - q[1],
        g_minus=g_minus,
        g_plus=g_plus,
        active=active,
        w_n=w_n,
        w_t=w_t,
        gamma_n=gamma_n,
        gamma_t=gamma_t,
    )
