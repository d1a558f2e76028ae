"""Non-smooth contact dynamics of a driveline universal joint with clearance.

A 2-DOF shaft pair coupled by a Cardan joint whose crosspiece rattles
inside the input yoke.  Contacts follow rigid unilateral laws (Signorini
normal contact, Coulomb friction, Newton restitution) resolved per time
step through a linear complementarity problem, so impacts, sticking and
persistent contact all pass through the same update.

Typical use::

    from ujointsim import SystemParams, simulate

    params = SystemParams(clearance=10e-6, t_final=2.0)
    traj = simulate(params, sample_every=10)

The command line front end lives in :mod:`ujointsim.cli`
(``ujointsim simulate | sweep | check``).
"""

from .lcp import LcpProblem, LcpSolution, LcpStatus, residual, solve_enumerative, solve_lemke
from .model import (
    ContactSnapshot,
    KinematicsEval,
    State,
    SystemParams,
    Wall,
    contact_jacobians,
    contact_set,
    contact_snapshot,
    eval_kinematics,
    force_vector,
    gap_functions,
    mass_matrix,
    relative_velocities,
)
from .stepper import (
    ImpulseTable,
    StepError,
    StepFailure,
    StepResult,
    Trajectory,
    assemble_lcp,
    simulate,
    step,
)
from .analysis import (
    Classification,
    EnergyBudget,
    ImpactEvent,
    RegimeSummary,
    energy_audit,
    extract_events,
    poincare_section,
    restitution_audit,
    smooth_reference,
)

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "ContactSnapshot",
    "EnergyBudget",
    "ImpactEvent",
    "ImpulseTable",
    "KinematicsEval",
    "LcpProblem",
    "LcpSolution",
    "LcpStatus",
    "RegimeSummary",
    "State",
    "StepError",
    "StepFailure",
    "StepResult",
    "SystemParams",
    "Trajectory",
    "Wall",
    "assemble_lcp",
    "contact_jacobians",
    "contact_set",
    "contact_snapshot",
    "energy_audit",
    "eval_kinematics",
    "extract_events",
    "force_vector",
    "gap_functions",
    "mass_matrix",
    "poincare_section",
    "relative_velocities",
    "residual",
    "restitution_audit",
    "simulate",
    "smooth_reference",
    "solve_enumerative",
    "solve_lemke",
    "step",
]
