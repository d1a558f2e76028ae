"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from ujointsim.model import SystemParams
from ujointsim.stepper import ImpulseTable, Trajectory


def empty_impulse_table() -> ImpulseTable:
    e = np.empty(0)
    return ImpulseTable(
        t=e, wall=np.empty(0, dtype=np.int8),
        p_n=e, p_r=e, p_t=e, gamma_na=e, gamma_ne=e,
    )


def impulse_table(rows: list[tuple]) -> ImpulseTable:
    """Rows of (t, wall_index, p_n, p_r, p_t, gamma_na, gamma_ne)."""
    if not rows:
        return empty_impulse_table()
    arr = np.array(rows, dtype=float)
    return ImpulseTable(
        t=arr[:, 0],
        wall=arr[:, 1].astype(np.int8),
        p_n=arr[:, 2],
        p_r=arr[:, 3],
        p_t=arr[:, 4],
        gamma_na=arr[:, 5],
        gamma_ne=arr[:, 6],
    )


def make_trajectory(
    t: np.ndarray,
    phi1c: np.ndarray,
    phi1c_dot: np.ndarray,
    params: SystemParams | None = None,
    phi1: np.ndarray | None = None,
    phi1_dot: np.ndarray | None = None,
    impulses: ImpulseTable | None = None,
    sample_every: int = 1,
) -> Trajectory:
    """Synthetic trajectory for post-processing tests."""
    t = np.asarray(t, dtype=float)
    phi1c = np.asarray(phi1c, dtype=float)
    phi1c_dot = np.asarray(phi1c_dot, dtype=float)
    if params is None:
        params = SystemParams()
    if phi1 is None:
        phi1 = phi1c.copy()
    if phi1_dot is None:
        phi1_dot = phi1c_dot.copy()
    return Trajectory(
        params=params,
        dt=params.dt,
        sample_every=sample_every,
        n_steps=max(t.shape[0] - 1, 0) * sample_every,
        t=t,
        phi1=np.asarray(phi1, dtype=float),
        phi1c=phi1c,
        phi1_dot=np.asarray(phi1_dot, dtype=float),
        phi1c_dot=phi1c_dot,
        impulses=impulses if impulses is not None else empty_impulse_table(),
        min_end_gap=params.clearance,
        max_abs_gamma_n=0.0,
        max_cone_violation=0.0,
        max_lcp_residual=0.0,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
