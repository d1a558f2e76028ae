"""Dense linear complementarity problem (LCP) solvers.

Given a square matrix A and a vector b, find z >= 0 such that
w = A z + b >= 0 and z^T w = 0.

Two solvers are provided:

* :func:`solve_lemke` -- Lemke's complementary pivoting with a covering
  vector and lexicographic ratio test.  This is the production solver;
  the lexicographic rule guarantees finite termination on degenerate
  problems without anti-cycling heuristics.
* :func:`solve_enumerative` -- brute-force enumeration of all 2^n
  complementary index sets.  Exponential, but an independent oracle for
  cross-checking the pivoting solver on small problems.

Problem sizes in this package are tiny (n <= 6 for the contact stepper,
n <= 14 supported by the oracle), so everything is dense and the pivot
loop runs on plain Python floats.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LcpProblem",
    "LcpSolution",
    "LcpStatus",
    "solve_lemke",
    "solve_enumerative",
    "residual",
]

#: Maximum dimension accepted by the enumeration oracle (2^n subsets).
ENUM_MAX_DIM = 14

#: Entries smaller than this are never used as pivots.
_PIVOT_EPS = 1e-12

#: Relative tolerance for tie grouping in the minimum-ratio test.
#: Structurally identical rows drift apart by rounding noise; treating
#: near-equal ratios as exact ties keeps the lexicographic rule (and the
#: drive-the-auxiliary-out preference) effective in floating point.
_TIE_TOL = 1e-12


class LcpStatus(enum.Enum):
    """Outcome of an LCP solve."""

    SOLVED = "solved"
    RAY_TERMINATION = "ray_termination"
    PIVOT_LIMIT = "pivot_limit"


@dataclass(frozen=True)
class LcpProblem:
    """The data (A, b) of the complementarity problem w = A z + b.

    A must be square, b of matching length, and all entries finite.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, got shape {a.shape}")
        if b.ndim != 1 or b.shape[0] != a.shape[0]:
            raise ValueError(f"b must have length {a.shape[0]}, got shape {b.shape}")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("LCP data must not contain NaN or Inf")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class LcpSolution:
    """Solution candidate (z, w) plus solver status and pivot count.

    z and w are only meaningful when status is ``LcpStatus.SOLVED``.
    """

    z: np.ndarray
    w: np.ndarray
    status: LcpStatus
    pivots: int = 0

    @property
    def solved(self) -> bool:
        return self.status is LcpStatus.SOLVED


def residual(problem: LcpProblem, solution: LcpSolution) -> float:
    """Worst violation of the LCP conditions by a candidate solution.

    Returns the max of the equation residual ||w - A z - b||_inf, the
    negativity of z and w, and the complementarity gap |z^T w|.
    """
    z = np.asarray(solution.z, dtype=float)
    w = np.asarray(solution.w, dtype=float)
    if z.shape != problem.b.shape or w.shape != problem.b.shape:
        raise ValueError("solution dimensions do not match problem")
    eq = float(np.max(np.abs(w - problem.a @ z - problem.b))) if problem.n else 0.0
    neg_z = max(0.0, -float(z.min())) if problem.n else 0.0
    neg_w = max(0.0, -float(w.min())) if problem.n else 0.0
    comp = abs(float(z @ w))
    return max(eq, neg_z, neg_w, comp)


def residual_lists(a: list, b: list, z: list, w: list) -> float:
    """Scalar-path twin of :func:`residual` for list-valued data."""
    n = len(b)
    worst = 0.0
    comp = 0.0
    for i in range(n):
        ai = a[i]
        s = b[i]
        for j in range(n):
            s += ai[j] * z[j]
        eq = w[i] - s
        if eq < 0.0:
            eq = -eq
        if eq > worst:
            worst = eq
        if -z[i] > worst:
            worst = -z[i]
        if -w[i] > worst:
            worst = -w[i]
        comp += z[i] * w[i]
    if comp < 0.0:
        comp = -comp
    return comp if comp > worst else worst


def _lex_less(num_i: list, den_i: float, num_j: list, den_j: float) -> bool:
    """Compare the ratio vectors num_i/den_i < num_j/den_j lexicographically.

    Components within the tie tolerance of each other are treated as
    equal and the comparison moves to the next component.
    """
    for a, b in zip(num_i, num_j):
        ra = a / den_i
        rb = b / den_j
        if abs(ra - rb) > _TIE_TOL * max(1.0, abs(ra), abs(rb)):
            return ra < rb
    return False


def solve_lemke(
    problem: LcpProblem,
    max_pivots: int | None = None,
    tol: float = 1e-10,
) -> LcpSolution:
    """Solve an LCP by Lemke's complementary pivoting method.

    The standard covering-vector augmentation is used: an artificial
    variable z0 with column -e enters first, and the almost-complementary
    path is followed until z0 leaves the basis (solved) or the entering
    column has no positive entries (secondary ray, no solution found
    along the path).  Ties in the minimum-ratio test are broken
    lexicographically, which rules out cycling on degenerate bases.

    Parameters
    ----------
    problem : the LCP data.
    max_pivots : pivot budget; default 100 * n.  Exceeding it returns
        status ``PIVOT_LIMIT`` (cycling cannot happen with the
        lexicographic rule, so hitting the limit indicates bad data).
    tol : nonnegative feasibility tolerance used for the trivial b >= 0
        shortcut and final clamping.
    """
    n = problem.n
    if max_pivots is None:
        max_pivots = 100 * n
    if max_pivots < 1:
        raise ValueError("max_pivots must be >= 1")
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    if n == 0:
        return LcpSolution(np.zeros(0), np.zeros(0), LcpStatus.SOLVED, 0)
    z, w, status, pivots = lemke_lists(
        problem.a.tolist(), problem.b.tolist(), max_pivots, tol
    )
    return LcpSolution(np.array(z), np.array(w), status, pivots)


def lemke_lists(
    a: list, b: list, max_pivots: int, tol: float
) -> tuple[list, list, LcpStatus, int]:
    """Pivoting core of :func:`solve_lemke` on plain Python floats.

    Separated out so the contact stepper can run tiny problems without
    array round trips; a and b are a list of row lists and a flat list.
    """
    n = len(b)
    if min(b) >= -tol:
        return [0.0] * n, [x if x > 0.0 else 0.0 for x in b], LcpStatus.SOLVED, 0

    # Tableau columns: [w_0..w_{n-1} | z_0..z_{n-1} | z_aux | rhs].
    # Row i holds the equation for the current basic variable of row i.
    # The leading identity block tracks the basis inverse, which is what
    # the lexicographic ratio test compares.
    width = 2 * n + 2
    col_aux = 2 * n
    col_rhs = 2 * n + 1
    tableau = []
    for i in range(n):
        row = [0.0] * width
        row[i] = 1.0
        ai = a[i]
        for j in range(n):
            row[n + j] = -ai[j]
        row[col_aux] = -1.0
        row[col_rhs] = b[i]
        tableau.append(row)
    basis = list(range(n))  # row -> variable index (w_i = i, z_i = n+i, aux = 2n)

    def pivot(row: int, col: int) -> None:
        prow = tableau[row]
        piv = prow[col]
        inv = 1.0 / piv
        for j in range(width):
            prow[j] *= inv
        for i in range(n):
            if i == row:
                continue
            r = tableau[i]
            f = r[col]
            if f != 0.0:
                for j in range(width):
                    r[j] -= f * prow[j]
                r[col] = 0.0
        prow[col] = 1.0

    # Entering pivot for z_aux: drive the most negative rhs to zero.
    # Lexicographic minimum of (rhs, basis-inverse row) keeps all
    # subsequent keys lexicographically positive.
    row0 = 0
    key0 = [tableau[0][col_rhs]] + tableau[0][:n]
    for i in range(1, n):
        key = [tableau[i][col_rhs]] + tableau[i][:n]
        if _lex_less(key, 1.0, key0, 1.0):
            row0, key0 = i, key
    leaving = basis[row0]
    pivot(row0, col_aux)
    basis[row0] = col_aux
    pivots = 1
    entering = leaving + n if leaving < n else leaving - n

    while True:
        if pivots >= max_pivots:
            return _extract(tableau, basis, n, col_rhs, LcpStatus.PIVOT_LIMIT, pivots)
        # Minimum-ratio test over rows with positive entries in the
        # entering column.  Rows whose ratios agree within the tie
        # tolerance form a group; if the auxiliary variable's row is in
        # the group it leaves immediately (terminating the path),
        # otherwise the group is resolved lexicographically.
        ratios = []
        best_ratio = float("inf")
        for i in range(n):
            den = tableau[i][entering]
            if den <= _PIVOT_EPS:
                continue
            r = tableau[i][col_rhs] / den
            ratios.append((i, den, r))
            if r < best_ratio:
                best_ratio = r
        if not ratios:
            return _extract(
                tableau, basis, n, col_rhs, LcpStatus.RAY_TERMINATION, pivots
            )
        slack = _TIE_TOL * max(1.0, abs(best_ratio))
        group = [(i, den) for i, den, r in ratios if r <= best_ratio + slack]
        row = -1
        for i, _den in group:
            if basis[i] == col_aux:
                row = i
                break
        if row < 0:
            row, best_den = group[0]
            best_num = [tableau[row][col_rhs]] + tableau[row][:n]
            for i, den in group[1:]:
                num = [tableau[i][col_rhs]] + tableau[i][:n]
                if _lex_less(num, den, best_num, best_den):
                    row, best_num, best_den = i, num, den
        leaving = basis[row]
        pivot(row, entering)
        basis[row] = entering
        pivots += 1
        if leaving == col_aux:
            return _extract(tableau, basis, n, col_rhs, LcpStatus.SOLVED, pivots)
        entering = leaving + n if leaving < n else leaving - n


def _extract(
    tableau: list, basis: list, n: int, col_rhs: int, status: LcpStatus, pivots: int
) -> tuple[list, list, LcpStatus, int]:
    """Read (z, w) off the tableau; basic values come from the rhs column."""
    z = [0.0] * n
    w = [0.0] * n
    for i, var in enumerate(basis):
        val = tableau[i][col_rhs]
        if val < 0.0:  # roundoff chatter only; the invariant keeps rhs >= 0
            val = 0.0
        if var < n:
            w[var] = val
        elif var < 2 * n:
            z[var - n] = val
        # the auxiliary variable is dropped
    return z, w, status, pivots


def solve_enumerative(problem: LcpProblem, tol: float = 1e-10) -> LcpSolution:
    """Solve an LCP by enumerating complementary index sets.

    For every subset alpha of {0..n-1}, solve A[alpha, alpha] z_alpha =
    -b[alpha] with z zero elsewhere, compute w = A z + b, and accept the
    first candidate with z >= -tol and w >= -tol (small negative values
    are clamped to exactly zero to avoid sign chatter).  Singular
    sub-blocks are skipped.

    Exponential in n; refuses problems with n > ``ENUM_MAX_DIM``.
    Returns status ``RAY_TERMINATION`` when no subset yields a feasible
    complementary point.  The ``pivots`` field counts examined subsets.
    """
    n = problem.n
    if n > ENUM_MAX_DIM:
        raise ValueError(f"enumeration supports n <= {ENUM_MAX_DIM}, got {n}")
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    a, b = problem.a, problem.b
    tried = 0
    for mask in range(1 << n):
        tried += 1
        alpha = [i for i in range(n) if mask & (1 << i)]
        z = np.zeros(n)
        if alpha:
            sub = a[np.ix_(alpha, alpha)]
            try:
                z_alpha = np.linalg.solve(sub, -b[alpha])
            except np.linalg.LinAlgError:
                continue
            z[alpha] = z_alpha
        w = a @ z + b
        if float(z.min(initial=0.0)) >= -tol and float(w.min(initial=0.0)) >= -tol:
            z[z < 0.0] = 0.0
            w[w < 0.0] = 0.0
            return LcpSolution(z, w, LcpStatus.SOLVED, tried)
    return LcpSolution(np.zeros(n), np.zeros(n), LcpStatus.RAY_TERMINATION, tried)
