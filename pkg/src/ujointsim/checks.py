"""Self-contained verification batteries.

Each battery exercises one implementation against an independent oracle:
complementary pivoting against exhaustive enumeration, the analytic
kinematic derivatives against central differences, the discrete impact
law against the restitution coefficient, and the zero-clearance time
stepper against a smooth high-order reference integration.

``ujointsim check`` runs all of them; the acceptance tests reuse them
with the same tolerances.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .analysis import extract_events, restitution_audit, smooth_reference
from .lcp import LcpProblem, LcpStatus, residual, solve_enumerative, solve_lemke
from .model import SystemParams, eval_kinematics
from .stepper import simulate

__all__ = [
    "CheckResult",
    "random_pd_problem",
    "check_lcp_oracle",
    "check_kinematics",
    "check_restitution",
    "check_zero_clearance",
    "run_all",
]

DEFAULT_SEED = 20250810


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name:24s} {self.elapsed:6.2f}s  {self.detail}"


def random_pd_problem(rng: np.random.Generator, n: int) -> LcpProblem:
    """Random symmetric positive-definite LCP with eigenvalues in [0.1, 10]."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = np.exp(rng.uniform(math.log(0.1), math.log(10.0), n))
    a = (q * eigs) @ q.T
    a = 0.5 * (a + a.T)
    b = rng.uniform(-1.0, 1.0, n)
    return LcpProblem(a, b)


def check_lcp_oracle(
    trials: int = 1000,
    max_dim: int = 8,
    seed: int = DEFAULT_SEED,
    residual_tol: float = 1e-10,
    match_tol: float = 1e-8,
) -> CheckResult:
    """Lemke vs enumeration on random positive-definite instances.

    Every instance must come back solved with complementarity residual
    below residual_tol, and the two solvers must agree on z within
    match_tol in the sup norm.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_res = 0.0
    worst_diff = 0.0
    unsolved = 0
    for _ in range(trials):
        n = int(rng.integers(1, max_dim + 1))
        problem = random_pd_problem(rng, n)
        lemke = solve_lemke(problem)
        if lemke.status is not LcpStatus.SOLVED:
            unsolved += 1
            continue
        enum = solve_enumerative(problem)
        worst_res = max(worst_res, residual(problem, lemke))
        worst_diff = max(worst_diff, float(np.max(np.abs(lemke.z - enum.z))))
    passed = unsolved == 0 and worst_res <= residual_tol and worst_diff <= match_tol
    detail = (
        f"{trials} PD instances n<={max_dim}: unsolved={unsolved}, "
        f"residual={worst_res:.2e} (tol {residual_tol:.0e}), "
        f"|z_lemke-z_enum|={worst_diff:.2e} (tol {match_tol:.0e})"
    )
    return CheckResult("lcp-oracle", passed, detail, time.perf_counter() - start)


def check_kinematics(
    samples: int = 10_000,
    seed: int = DEFAULT_SEED,
    fd_step: float = 1e-6,
    deriv_tol: float = 1e-6,
    phi2_tol: float = 1e-8,
) -> CheckResult:
    """Analytic eta', nu' vs central differences; phi2 vs integrated nu.

    Derivative errors are measured relative to max(1, |derivative|) so
    the test stays meaningful at the zeros of the derivatives.  The
    closed-form phi2 is compared against a fine fixed-step RK4
    integration of d(phi2)/d(phi1c) = nu over one full turn.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        phi = rng.uniform(-2.0 * math.pi, 2.0 * math.pi)
        beta = rng.uniform(0.0, math.pi / 3.0)
        kin = eval_kinematics(phi, 0.0, beta)
        plus = eval_kinematics(phi + fd_step, 0.0, beta)
        minus = eval_kinematics(phi - fd_step, 0.0, beta)
        fd_eta = (plus.eta - minus.eta) / (2.0 * fd_step)
        fd_nu = (plus.nu - minus.nu) / (2.0 * fd_step)
        err_eta = abs(kin.eta_prime - fd_eta) / max(1.0, abs(kin.eta_prime))
        err_nu = abs(kin.nu_prime - fd_nu) / max(1.0, abs(kin.nu_prime))
        worst = max(worst, err_eta, err_nu)

    # phi2 closed form against integrating its own derivative.
    worst_phi2 = 0.0
    for beta in (math.radians(5.0), math.radians(30.0)):
        n = 4096
        h = 2.0 * math.pi / n
        phi2 = 0.0

        def nu_of(phi: float, b: float = beta) -> float:
            return eval_kinematics(phi, 0.0, b).nu

        for i in range(n):
            x = i * h
            k1 = nu_of(x)
            k2 = nu_of(x + 0.5 * h)
            k4 = nu_of(x + h)
            phi2 += h / 6.0 * (k1 + 4.0 * k2 + k4)
            closed = eval_kinematics((i + 1) * h, 0.0, beta).phi2
            worst_phi2 = max(worst_phi2, abs(phi2 - closed))

    passed = worst <= deriv_tol and worst_phi2 <= phi2_tol
    detail = (
        f"{samples} samples: derivative err={worst:.2e} (tol {deriv_tol:.0e}), "
        f"phi2 integral err={worst_phi2:.2e} (tol {phi2_tol:.0e})"
    )
    return CheckResult("kinematics", passed, detail, time.perf_counter() - start)


def check_restitution(
    t_final: float = 0.5,
    ratio_tol: float = 1e-6,
    min_events: int = 10,
) -> CheckResult:
    """Frictionless diagnostic run: every impact must rebound at eps_n.

    With mu = 0 the discrete impact law gives gamma_ne = -eps_n *
    gamma_na exactly at every loaded contact, so the rebound ratios of
    all extracted events must match eps_n to ratio_tol (relative).
    """
    start = time.perf_counter()
    p = SystemParams(mu=0.0, t_final=t_final)
    traj = simulate(p, sample_every=100)
    events = extract_events(traj)
    ratios = restitution_audit(events)
    worst = max((abs(r / p.eps_n - 1.0) for _, r in ratios), default=math.inf)
    passed = (
        traj.failure is None
        and len(events) >= min_events
        and worst <= ratio_tol
    )
    detail = (
        f"{len(events)} impacts over {t_final}s: worst |ratio/eps_n - 1|="
        f"{worst:.2e} (tol {ratio_tol:.0e})"
    )
    return CheckResult("restitution", passed, detail, time.perf_counter() - start)


def check_zero_clearance(
    t_final: float = 1.0,
    deviation_tol: float = 1e-3,
) -> CheckResult:
    """Zero-clearance regression against the smooth reference oracle.

    The time-stepped trajectory must produce no impact events and track
    the reference phi1c within deviation_tol in the sup norm.
    """
    start = time.perf_counter()
    p = SystemParams(clearance=0.0, t_final=t_final)
    traj = simulate(p)
    events = extract_events(traj)
    ref = smooth_reference(p)
    dev = float(np.max(np.abs(traj.phi1c - ref.phi1c)))
    passed = traj.failure is None and not events and dev <= deviation_tol
    detail = (
        f"{t_final}s horizon: {len(events)} impact events, "
        f"sup|phi1c - ref|={dev:.2e} (tol {deviation_tol:.0e})"
    )
    return CheckResult("zero-clearance", passed, detail, time.perf_counter() - start)


def run_all(verbose: bool = False) -> list[CheckResult]:
    """Run every battery; print one line per check."""
    results = [
        check_lcp_oracle(),
        check_kinematics(),
        check_restitution(),
        check_zero_clearance(),
    ]
    for res in results:
        print(res.line())
    if verbose:
        n_pass = sum(r.passed for r in results)
        print(f"{n_pass}/{len(results)} checks passed")
    return results
