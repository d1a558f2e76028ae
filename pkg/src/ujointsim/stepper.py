"""Midpoint time-stepping of the non-smooth joint dynamics.

Each step advances positions to the midpoint with the old velocities,
evaluates the mass matrix, smooth forces and contact geometry there,
and then either performs a plain velocity update (no closed contacts)
or assembles and solves a small complementarity problem that yields the
normal and tangential contact impulses for the step.  Impulsive
collisions and persistent contact are handled by the same update; there
is no event detection and no branching between the two regimes.

The complementarity system couples, per active contact, the normal
impulse p_n, the shifted tangential impulse p_r and the slack xi_l of
the friction saturation bound.  The physical tangential impulse is
p_t = p_r - mu * p_n, confined to the Coulomb cone |p_t| <= mu * p_n.
Newton velocity restitution (coefficients eps_n, eps_t) enters through
the constant vector.

The inner loop runs on plain floats; :func:`step` is the object-level
wrapper around the same core used by :func:`simulate`.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lcp import (
    LcpProblem,
    LcpSolution,
    LcpStatus,
    lemke_lists,
    residual_lists,
)
from .model import (
    State,
    SystemParams,
    Wall,
    _force,
    eval_kinematics,
    mass_matrix,
)

__all__ = [
    "StepResult",
    "StepError",
    "StepFailure",
    "Trajectory",
    "ImpulseTable",
    "step",
    "assemble_lcp",
    "simulate",
    "num_steps",
]

#: Impact-event reporting threshold on the approach velocity, m/s.
#: Separates true collisions from persistent-contact holding impulses.
IMPACT_VELOCITY_THRESHOLD = 1e-6

#: Default complementarity tolerance for the per-step contact solve.
STEP_LCP_TOL = 1e-10

_WALL_INDEX = {Wall.LEFT: 0, Wall.RIGHT: 1}
_WALL_FROM_INDEX = (Wall.LEFT, Wall.RIGHT)
_BOTH = (Wall.LEFT, Wall.RIGHT)
_LEFT_ONLY = (Wall.LEFT,)
_RIGHT_ONLY = (Wall.RIGHT,)
_EMPTY: tuple = ()


@dataclass(frozen=True)
class StepResult:
    """Outcome of one integration step.

    Impulse tuples are aligned with ``active``; all are empty when no
    contact was closed at the midpoint (lcp_status is then None).
    p_t = p_r - mu * p_n is the signed tangential impulse.
    """

    state_end: State
    active: tuple[Wall, ...]
    p_n: tuple[float, ...]
    p_r: tuple[float, ...]
    p_t: tuple[float, ...]
    gamma_na: tuple[float, ...]
    gamma_ne: tuple[float, ...]
    lcp_status: Optional[LcpStatus]
    lcp_pivots: int = 0
    lcp_residual: float = 0.0


@dataclass(frozen=True)
class StepFailure:
    """Diagnostics for a failed step (LCP ray termination or pivot limit)."""

    t: float
    state: State
    active: tuple[Wall, ...]
    status: LcpStatus
    problem: LcpProblem
    solution: LcpSolution

    def describe(self) -> str:
        return (
            f"step failed at t={self.t:.9g}: LCP status {self.status.value} "
            f"with active contacts {[w.value for w in self.active]}, "
            f"state q={self.state.q}, u={self.state.u}"
        )


class StepError(RuntimeError):
    """Raised when the contact LCP cannot be solved; carries diagnostics."""

    def __init__(self, failure: StepFailure):
        super().__init__(failure.describe())
        self.failure = failure


def assemble_lcp(
    m_diag: tuple[float, float],
    h: tuple[float, float],
    w_n: tuple[tuple[float, float], ...],
    w_t: tuple[float, float],
    gamma_na: tuple[float, ...],
    gamma_ta: float,
    eps_n: float,
    eps_t: float,
    mu: float,
    dt: float,
) -> LcpProblem:
    """Build the contact complementarity problem for one step.

    With G_xy = W_x^T M^-1 W_y over the active contacts, the unknown
    z = (p_n, p_r, xi_l) >= 0 complements w = (xi_n, xi_r, p_l) >= 0 in

        xi_n = (G_nn - G_nt mu) p_n + G_nt p_r           + b_n
        xi_r = (G_tn - G_tt mu) p_n + G_tt p_r + I xi_l  + b_t
        p_l  = 2 mu p_n - I p_r

    where b_n = W_n^T M^-1 h dt + (1 + eps_n) gamma_na and likewise for
    the tangential row with eps_t and gamma_ta.  xi_n = gamma_ne +
    eps_n gamma_na vanishes at loaded contacts, which is the Newton
    impact law; xi_r - xi_l is the tangential counterpart, and the
    third row keeps p_r within [0, 2 mu p_n], i.e. p_t within the
    Coulomb cone.
    """
    a, b = _assemble_blocks(
        m_diag, h, w_n, w_t, gamma_na, gamma_ta, eps_n, eps_t, mu, dt
    )
    return LcpProblem(np.array(a), np.array(b))


def _assemble_blocks(m_diag, h, w_n, w_t, gamma_na, gamma_ta, eps_n, eps_t, mu, dt):
    """List-valued (A, b) of :func:`assemble_lcp`; shared with the hot loop."""
    nc = len(w_n)
    if nc == 0:
        raise ValueError("assemble_lcp requires at least one active contact")
    inv1 = 1.0 / m_diag[0]
    inv2 = 1.0 / m_diag[1]
    n = 3 * nc
    a = [[0.0] * n for _ in range(n)]
    b = [0.0] * n

    # Tangential direction is shared by all contacts, so G_tt is constant
    # and G_nt[i, j] depends on the normal index only.
    wt1, wt2 = w_t
    h1, h2 = h
    g_tt = wt1 * wt1 * inv1 + wt2 * wt2 * inv2
    wt_minv_h = (wt1 * h1 * inv1 + wt2 * h2 * inv2) * dt
    g_nt = [wn[0] * wt1 * inv1 + wn[1] * wt2 * inv2 for wn in w_n]

    for i in range(nc):
        wni1, wni2 = w_n[i]
        row_n = a[i]
        row_t = a[nc + i]
        for j in range(nc):
            wnj1, wnj2 = w_n[j]
            g_nn = wni1 * wnj1 * inv1 + wni2 * wnj2 * inv2
            row_n[j] = g_nn - g_nt[i] * mu
            row_t[j] = g_nt[j] - g_tt * mu
            row_n[nc + j] = g_nt[i]
            row_t[nc + j] = g_tt
        row_t[2 * nc + i] = 1.0
        a[2 * nc + i][i] = 2.0 * mu
        a[2 * nc + i][nc + i] = -1.0
        b[i] = (wni1 * h1 * inv1 + wni2 * h2 * inv2) * dt + (1.0 + eps_n) * gamma_na[i]
        b[nc + i] = wt_minv_h + (1.0 + eps_t) * gamma_ta
    return a, b


def _step_core(p: SystemParams, t_a: float, q1: float, q2: float,
               u1: float, u2: float, dt: float):
    """Advance one step on scalars.

    Returns (q1e, q2e, u1e, u2e, active, p_n, p_r, p_t, gamma_na,
    gamma_ne, status, pivots, residual).  Raises :class:`StepError` on
    an unsolved contact LCP.
    """
    half = 0.5 * dt
    q1m = q1 + half * u1
    q2m = q2 + half * u2

    kin = eval_kinematics(q2m, u2, p.beta)
    m11, m22 = mass_matrix(p, kin)
    h1, h2 = _force(p, t_a + half, u2, kin)

    length = p.arm_length
    dl = (q1m - q2m) * length
    clearance = p.clearance
    g_minus = clearance - dl
    g_plus = clearance + dl

    du1 = dt * h1 / m11
    du2 = dt * h2 / m22

    left = g_minus <= 0.0
    right = g_plus <= 0.0
    if not (left or right):
        u1e = u1 + du1
        u2e = u2 + du2
        return (
            q1m + half * u1e, q2m + half * u2e, u1e, u2e,
            _EMPTY, _EMPTY, _EMPTY, _EMPTY, _EMPTY, _EMPTY, None, 0, 0.0,
        )

    if left and right:
        active = _BOTH
        w_n = ((-length, length), (length, -length))
        gna = (-length * u1 + length * u2, length * u1 - length * u2)
    elif left:
        active = _LEFT_ONLY
        w_n = ((-length, length),)
        gna = (-length * u1 + length * u2,)
    else:
        active = _RIGHT_ONLY
        w_n = ((length, -length),)
        gna = (length * u1 - length * u2,)
    mu = p.mu
    wt1 = kin.nu * p.r1
    w_t = (wt1, 0.0)
    gta = wt1 * u1

    a, b = _assemble_blocks(
        (m11, m22), (h1, h2), w_n, w_t, gna, gta, p.eps_n, p.eps_t, mu, dt
    )
    n = len(b)
    z, w, status, pivots = lemke_lists(a, b, 100 * n, STEP_LCP_TOL)
    if status is not LcpStatus.SOLVED:
        state = State(t_a, (q1, q2), (u1, u2))
        problem = LcpProblem(np.array(a), np.array(b))
        solution = LcpSolution(np.array(z), np.array(w), status, pivots)
        raise StepError(StepFailure(t_a, state, active, status, problem, solution))

    nc = len(active)
    imp1 = 0.0
    imp2 = 0.0
    p_n = []
    p_r = []
    p_t = []
    for i in range(nc):
        pn = z[i]
        pr = z[nc + i]
        p_n.append(pn)
        p_r.append(pr)
        p_t.append(pr - mu * pn)
        wn1, wn2 = w_n[i]
        imp1 += (wn1 - mu * wt1) * pn + wt1 * pr
        imp2 += wn2 * pn  # w_t has no second component
    u1e = u1 + du1 + imp1 / m11
    u2e = u2 + du2 + imp2 / m22
    gne = tuple(wn[0] * u1e + wn[1] * u2e for wn in w_n)
    res = residual_lists(a, b, z, w)
    return (
        q1m + half * u1e, q2m + half * u2e, u1e, u2e,
        active, tuple(p_n), tuple(p_r), tuple(p_t), gna, gne,
        status, pivots, res,
    )


def step(p: SystemParams, state_a: State, dt: float) -> StepResult:
    """Advance the system one step of size dt from state_a.

    Positions move to the midpoint with the old velocities; the contact
    set is evaluated there.  Without closed contacts the velocity update
    is u_e = u_a + M^-1 h dt; otherwise the step impulse from the
    contact LCP is added.  Positions then complete the step with the new
    velocities.  Raises :class:`StepError` when the LCP solver reports
    ray termination or a pivot overrun.
    """
    q1, q2 = state_a.q
    u1, u2 = state_a.u
    (q1e, q2e, u1e, u2e, active, p_n, p_r, p_t, gna, gne,
     status, pivots, res) = _step_core(p, state_a.t, q1, q2, u1, u2, dt)
    state_e = State(state_a.t + dt, (q1e, q2e), (u1e, u2e))
    return StepResult(state_e, active, p_n, p_r, p_t, gna, gne, status, pivots, res)


@dataclass(frozen=True)
class ImpulseTable:
    """Columnar per-step impulse records (rows where p_n > 0 only)."""

    t: np.ndarray
    wall: np.ndarray        # 0 = left, 1 = right
    p_n: np.ndarray
    p_r: np.ndarray
    p_t: np.ndarray
    gamma_na: np.ndarray
    gamma_ne: np.ndarray

    def __len__(self) -> int:
        return self.t.shape[0]

    def wall_at(self, row: int) -> Wall:
        return _WALL_FROM_INDEX[int(self.wall[row])]


@dataclass(frozen=True)
class Trajectory:
    """Sampled states plus impulse records and per-run diagnostics.

    Sample arrays hold the initial state and every ``sample_every``-th
    step end at uniform spacing dt * sample_every.  The impulse table
    retains every contact with a positive normal impulse regardless of
    the sampling stride.  The scalar diagnostics are tracked over every
    step:

    * min_end_gap: smallest wall gap seen at any step end,
    * max_abs_gamma_n: largest |normal relative velocity| at any
      contact-active step (pre or post impulse),
    * max_cone_violation: largest |p_t| - mu * p_n over loaded contacts,
    * max_lcp_residual: worst complementarity residual of any solved
      step LCP.
    """

    params: SystemParams
    dt: float
    sample_every: int
    n_steps: int
    t: np.ndarray
    phi1: np.ndarray
    phi1c: np.ndarray
    phi1_dot: np.ndarray
    phi1c_dot: np.ndarray
    impulses: ImpulseTable
    min_end_gap: float
    max_abs_gamma_n: float
    max_cone_violation: float
    max_lcp_residual: float
    failure: Optional[StepFailure] = None

    @property
    def n_samples(self) -> int:
        return self.t.shape[0]

    def final_state(self) -> State:
        i = self.n_samples - 1
        return State(
            float(self.t[i]),
            (float(self.phi1[i]), float(self.phi1c[i])),
            (float(self.phi1_dot[i]), float(self.phi1c_dot[i])),
        )


def num_steps(t_final: float, dt: float) -> int:
    """Number of fixed steps covering [0, t_final], floor(t_final / dt).

    The ratio is nudged by a few ulps before flooring so that horizons
    that are exact multiples of dt in decimal do not lose a step to
    binary roundoff (e.g. 1.0 / 1e-5 evaluates below 100000).
    """
    if t_final < 0.0 or dt <= 0.0:
        raise ValueError("require t_final >= 0 and dt > 0")
    ratio = t_final / dt
    return int(math.floor(ratio * (1.0 + 4e-15) + 1e-9))


def _as_float_array(buf: array) -> np.ndarray:
    return np.frombuffer(buf, dtype=float).copy() if buf else np.empty(0)


def simulate(
    p: SystemParams,
    initial: State | None = None,
    sample_every: int = 1,
) -> Trajectory:
    """Integrate from ``initial`` (rest at the origin by default) to t_final.

    Runs floor(t_final / dt) fixed steps, recording sampled states, all
    non-zero impulse records and the per-run diagnostics.  Fully
    deterministic for identical inputs.  On a step failure the partial
    trajectory is returned with the failure diagnostics attached.
    """
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    if initial is None:
        initial = State(0.0, (0.0, 0.0), (0.0, 0.0))

    dt = p.dt
    n = num_steps(p.t_final, dt)
    n_rows = 1 + n // sample_every
    samples = np.empty((n_rows, 5))
    samples[0] = (initial.t, *initial.q, *initial.u)
    row = 1

    imp_t = array("d")
    imp_wall = array("b")
    imp_pn = array("d")
    imp_pr = array("d")
    imp_pt = array("d")
    imp_gna = array("d")
    imp_gne = array("d")

    t0 = initial.t
    q1, q2 = initial.q
    u1, u2 = initial.u
    length = p.arm_length
    clearance = p.clearance
    mu = p.mu
    min_end_gap = math.inf
    max_abs_gamma = 0.0
    max_cone = -math.inf
    max_res = 0.0
    failure = None

    for k in range(n):
        try:
            (q1, q2, u1, u2, active, p_n, _p_r, p_t, gna, gne,
             _status, _pivots, res) = _step_core(p, t0 + k * dt, q1, q2, u1, u2, dt)
        except StepError as exc:
            failure = exc.failure
            break

        dl = (q1 - q2) * length
        g = clearance - dl
        if g < min_end_gap:
            min_end_gap = g
        g = clearance + dl
        if g < min_end_gap:
            min_end_gap = g

        if active:
            if res > max_res:
                max_res = res
            t_end = t0 + (k + 1) * dt
            for i in range(len(active)):
                ga = gna[i]
                ge = gne[i]
                if ga < 0.0:
                    ga_abs = -ga
                else:
                    ga_abs = ga
                if ga_abs > max_abs_gamma:
                    max_abs_gamma = ga_abs
                if ge < 0.0:
                    ge_abs = -ge
                else:
                    ge_abs = ge
                if ge_abs > max_abs_gamma:
                    max_abs_gamma = ge_abs
                pn = p_n[i]
                if pn > 0.0:
                    pt = p_t[i]
                    cone = (pt if pt >= 0.0 else -pt) - mu * pn
                    if cone > max_cone:
                        max_cone = cone
                    imp_t.append(t_end)
                    imp_wall.append(_WALL_INDEX[active[i]])
                    imp_pn.append(pn)
                    imp_pr.append(_p_r[i])
                    imp_pt.append(pt)
                    imp_gna.append(ga)
                    imp_gne.append(ge)

        if (k + 1) % sample_every == 0:
            samples[row] = (t0 + (k + 1) * dt, q1, q2, u1, u2)
            row += 1

    samples = samples[:row]
    impulses = ImpulseTable(
        t=_as_float_array(imp_t),
        wall=np.frombuffer(imp_wall, dtype=np.int8).copy()
        if imp_wall else np.empty(0, dtype=np.int8),
        p_n=_as_float_array(imp_pn),
        p_r=_as_float_array(imp_pr),
        p_t=_as_float_array(imp_pt),
        gamma_na=_as_float_array(imp_gna),
        gamma_ne=_as_float_array(imp_gne),
    )
    return Trajectory(
        params=p,
        dt=dt,
        sample_every=sample_every,
        n_steps=n,
        t=samples[:, 0].copy(),
        phi1=samples[:, 1].copy(),
        phi1c=samples[:, 2].copy(),
        phi1_dot=samples[:, 3].copy(),
        phi1c_dot=samples[:, 4].copy(),
        impulses=impulses,
        min_end_gap=min_end_gap if math.isfinite(min_end_gap) else clearance,
        max_abs_gamma_n=max_abs_gamma,
        max_cone_violation=max_cone if max_cone > -math.inf else 0.0,
        max_lcp_residual=max_res,
        failure=failure,
    )
