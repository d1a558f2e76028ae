"""Command line front end: simulate, sweep and check.

Configuration is a line-oriented ``key = value`` file with ``#``
comments; unknown keys and out-of-range values are rejected with their
line number.  Every run writes trajectory.csv, events.csv, the report
figures and a summary.json into its output directory; sweeps add one
subdirectory per clearance value plus an aggregated regimes.csv.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .analysis import RegimeSummary, extract_events, poincare_section
from .model import State, SystemParams, kinematics_arrays
from .stepper import Trajectory, simulate

__all__ = [
    "RunConfig",
    "ConfigError",
    "parse_config",
    "render_config",
    "cmd_simulate",
    "cmd_sweep",
    "cmd_check",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

_DEFAULT_PARAMS = SystemParams()
DEFAULT_SAMPLE_EVERY = 10
DEFAULT_OUTPUT_DIR = "out"


class ConfigError(ValueError):
    """Configuration problem, with the offending line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class RunConfig:
    """Everything one simulation (or sweep) needs."""

    params: SystemParams
    initial: State
    sample_every: int
    output_dir: Path
    clearance_sweep: Optional[tuple[float, ...]] = None


def _parse_float(raw: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"not a number: {raw!r}", line) from None


def _parse_int(raw: str, line: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"not an integer: {raw!r}", line) from None


def _parse_float_list(raw: str, line: int) -> tuple[float, ...]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError("empty list", line)
    return tuple(_parse_float(s, line) for s in items)


#: key -> (SystemParams field, parser, validator, description)
_PARAM_KEYS = {
    "j1": ("j1", lambda v: v > 0, "> 0"),
    "j2x": ("j2x", lambda v: v > 0, "> 0"),
    "j2y": ("j2y", lambda v: v > 0, "> 0"),
    "j2z": ("j2z", lambda v: v > 0, "> 0"),
    "j3": ("j3", lambda v: v > 0, "> 0"),
    "ks": ("ks", lambda v: v >= 0, ">= 0"),
    "cs": ("cs", lambda v: v >= 0, ">= 0"),
    "r1_m": ("r1", lambda v: v > 0, "> 0"),
    "clearance_m": ("clearance", lambda v: v >= 0, ">= 0"),
    "arm_length_m": ("arm_length", lambda v: v > 0, "> 0"),
    "eps_n": ("eps_n", lambda v: 0 <= v <= 1, "in [0, 1]"),
    "eps_t": ("eps_t", lambda v: 0 <= v <= 1, "in [0, 1]"),
    "mu": ("mu", lambda v: v >= 0, ">= 0"),
    "omega_rad_s": ("omega", lambda v: v >= 0, ">= 0"),
    "t0_nm": ("t0", lambda v: v >= 0, ">= 0"),
    "dt_s": ("dt", lambda v: v > 0, "> 0"),
    "t_final_s": ("t_final", lambda v: v >= 0, ">= 0"),
}

_CONFIG_KEYS = set(_PARAM_KEYS) | {
    "beta_deg",
    "sample_every",
    "output_dir",
    "sweep_clearances_m",
}


def parse_config(text: str) -> RunConfig:
    """Parse the key = value configuration format.

    Missing keys fall back to the built-in defaults; unknown keys,
    malformed lines, duplicate keys and out-of-range values raise
    :class:`ConfigError` carrying the line number.  Units are SI with
    the two documented exceptions (beta_deg in degrees,
    sweep_clearances_m a comma-separated list of meters).
    """
    fields: dict = {}
    sample_every = DEFAULT_SAMPLE_EVERY
    output_dir = DEFAULT_OUTPUT_DIR
    sweep: Optional[tuple[float, ...]] = None
    seen: dict[str, int] = {}

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line!r}", lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        value = raw_value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)

        if key in _PARAM_KEYS:
            field, ok, bounds = _PARAM_KEYS[key]
            num = _parse_float(value, lineno)
            if not (math.isfinite(num) and ok(num)):
                raise ConfigError(f"{key} must be {bounds}, got {value}", lineno)
            fields[field] = num
        elif key == "beta_deg":
            num = _parse_float(value, lineno)
            if not 0.0 <= num < 90.0:
                raise ConfigError(f"beta_deg must be in [0, 90), got {value}", lineno)
            fields["beta"] = math.radians(num)
        elif key == "sample_every":
            num = _parse_int(value, lineno)
            if num < 1:
                raise ConfigError(f"sample_every must be >= 1, got {value}", lineno)
            sample_every = num
        elif key == "output_dir":
            output_dir = value
        elif key == "sweep_clearances_m":
            values = _parse_float_list(value, lineno)
            if any(not (math.isfinite(v) and v >= 0.0) for v in values):
                raise ConfigError("sweep clearances must be >= 0", lineno)
            sweep = values

    try:
        params = dataclasses.replace(_DEFAULT_PARAMS, **fields)
    except ValueError as exc:  # per-key checks should have caught everything
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        params=params,
        initial=State(0.0, (0.0, 0.0), (0.0, 0.0)),
        sample_every=sample_every,
        output_dir=Path(output_dir),
        clearance_sweep=sweep,
    )


def _degrees_exact(beta: float) -> float:
    """Degrees value whose radians conversion reproduces beta exactly.

    math.radians(math.degrees(x)) can be off by an ulp; searching the
    neighbors keeps parse(render(config)) an exact round trip.
    """
    deg = math.degrees(beta)
    if math.radians(deg) == beta:
        return deg
    for direction in (math.inf, -math.inf):
        cand = deg
        for _ in range(3):
            cand = math.nextafter(cand, direction)
            if math.radians(cand) == beta:
                return cand
    return deg


def render_config(config: RunConfig) -> str:
    """Serialize a RunConfig back to the config format."""
    p = config.params
    lines = [
        f"j1 = {p.j1!r}",
        f"j2x = {p.j2x!r}",
        f"j2y = {p.j2y!r}",
        f"j2z = {p.j2z!r}",
        f"j3 = {p.j3!r}",
        f"ks = {p.ks!r}",
        f"cs = {p.cs!r}",
        f"r1_m = {p.r1!r}",
        f"clearance_m = {p.clearance!r}",
        f"beta_deg = {_degrees_exact(p.beta)!r}",
        f"arm_length_m = {p.arm_length!r}",
        f"eps_n = {p.eps_n!r}",
        f"eps_t = {p.eps_t!r}",
        f"mu = {p.mu!r}",
        f"omega_rad_s = {p.omega!r}",
        f"t0_nm = {p.t0!r}",
        f"dt_s = {p.dt!r}",
        f"t_final_s = {p.t_final!r}",
        f"sample_every = {config.sample_every}",
        f"output_dir = {config.output_dir}",
    ]
    if config.clearance_sweep is not None:
        joined = ", ".join(repr(v) for v in config.clearance_sweep)
        lines.append(f"sweep_clearances_m = {joined}")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    """Full-precision CSV of the sampled trajectory.

    Columns: t, phi1, phi1c, phi4, phi1_dot, phi1c_dot, g_minus, g_plus,
    delta, delta_dot.
    """
    p = traj.params
    _, _, _, phi4 = kinematics_arrays(traj.phi1c, p.beta)
    delta = traj.phi1 - traj.phi1c
    delta_dot = traj.phi1_dot - traj.phi1c_dot
    g_minus = p.clearance - delta * p.arm_length
    g_plus = p.clearance + delta * p.arm_length
    with open(path, "w", newline="") as fh:
        fh.write("t,phi1,phi1c,phi4,phi1_dot,phi1c_dot,g_minus,g_plus,delta,delta_dot\n")
        cols = (traj.t, traj.phi1, traj.phi1c, phi4, traj.phi1_dot,
                traj.phi1c_dot, g_minus, g_plus, delta, delta_dot)
        for row in zip(*cols):
            fh.write(",".join(_fmt(x) for x in row))
            fh.write("\n")


def write_events_csv(traj: Trajectory, path: Path) -> int:
    """Impact events CSV (t, wall, gamma_na, gamma_ne, p_n, p_t)."""
    events = extract_events(traj)
    with open(path, "w", newline="") as fh:
        fh.write("t,wall,gamma_na,gamma_ne,p_n,p_t\n")
        for ev in events:
            fh.write(
                f"{_fmt(ev.t)},{ev.wall.value},{_fmt(ev.gamma_na)},"
                f"{_fmt(ev.gamma_ne)},{_fmt(ev.p_n)},{_fmt(ev.p_t)}\n"
            )
    return len(events)


def write_regimes_csv(rows: list[tuple[float, RegimeSummary | None]], path: Path) -> None:
    """Aggregated per-clearance regime rows for a sweep."""
    with open(path, "w", newline="") as fh:
        fh.write("clearance_m,impacts_per_period,poincare_diameter,classification\n")
        for clearance, regime in rows:
            if regime is None:
                fh.write(f"{_fmt(clearance)},nan,nan,InsufficientHorizon\n")
            else:
                fh.write(
                    f"{_fmt(clearance)},{_fmt(regime.impacts_per_forcing_period)},"
                    f"{_fmt(regime.poincare_diameter)},{regime.classification.value}\n"
                )


def _run_one(params: SystemParams, initial: State, sample_every: int,
             outdir: Path) -> tuple[int, Optional[RegimeSummary]]:
    """Simulate one configuration and write all its outputs.

    Returns (exit_code, regime).  Partial outputs are retained when the
    stepper fails mid-run.
    """
    outdir.mkdir(parents=True, exist_ok=True)
    traj = simulate(params, initial=initial, sample_every=sample_every)

    write_trajectory_csv(traj, outdir / "trajectory.csv")
    n_events = write_events_csv(traj, outdir / "events.csv")

    from .figures import save_report_figures  # defer the matplotlib import

    save_report_figures(traj, outdir)

    regime: Optional[RegimeSummary] = None
    regime_error = None
    try:
        regime = poincare_section(traj)
    except ValueError as exc:
        regime_error = str(exc)

    summary = {
        "params": dataclasses.asdict(params),
        "sample_every": sample_every,
        "n_steps": traj.n_steps,
        "n_samples": traj.n_samples,
        "n_impact_events": n_events,
        "min_end_gap_m": traj.min_end_gap,
        "max_abs_gamma_n_ms": traj.max_abs_gamma_n,
        "max_cone_violation": traj.max_cone_violation,
        "max_lcp_residual": traj.max_lcp_residual,
        "regime": None if regime is None else {
            "impacts_per_forcing_period": regime.impacts_per_forcing_period,
            "poincare_diameter_rad": regime.poincare_diameter,
            "classification": regime.classification.value,
        },
        "regime_unavailable": regime_error,
        "failure": None if traj.failure is None else traj.failure.describe(),
    }
    with open(outdir / "summary.json", "w", newline="") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if traj.failure is not None:
        print(traj.failure.describe(), file=sys.stderr)
        return EXIT_SOLVER, regime
    print(
        f"wrote {outdir}: {traj.n_samples} samples, {n_events} impact events"
        + (f", regime {regime.classification.value}" if regime else "")
    )
    return EXIT_OK, regime


def cmd_simulate(config: RunConfig) -> int:
    """Run a single simulation and write its report."""
    try:
        code, _ = _run_one(config.params, config.initial, config.sample_every,
                           config.output_dir)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


def cmd_sweep(config: RunConfig) -> int:
    """Run the clearance sweep; one subdirectory per value plus regimes.csv."""
    if not config.clearance_sweep:
        print("config error: sweep requires a non-empty sweep_clearances_m",
              file=sys.stderr)
        return EXIT_CONFIG
    rows: list[tuple[float, Optional[RegimeSummary]]] = []
    worst = EXIT_OK
    try:
        for clearance in config.clearance_sweep:
            params = dataclasses.replace(config.params, clearance=clearance)
            subdir = config.output_dir / f"c_{clearance:.3e}"
            code, regime = _run_one(params, config.initial,
                                    config.sample_every, subdir)
            worst = max(worst, code)
            rows.append((clearance, regime))
        write_regimes_csv(rows, config.output_dir / "regimes.csv")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return worst


def cmd_check(verbose: bool = False) -> int:
    """Run the verification batteries; nonzero exit on any failure."""
    from .checks import run_all  # deferred: keeps --help fast

    results = run_all(verbose=verbose)
    return EXIT_OK if all(r.passed for r in results) else 1


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        config = parse_config(text)
    else:
        config = parse_config("")

    fields: dict = {}
    if args.clearance is not None:
        fields["clearance"] = args.clearance
    if args.t_final is not None:
        fields["t_final"] = args.t_final
    if args.dt is not None:
        fields["dt"] = args.dt
    if fields:
        try:
            params = dataclasses.replace(config.params, **fields)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        config = dataclasses.replace(config, params=params)
    if args.out is not None:
        config = dataclasses.replace(config, output_dir=Path(args.out))
    return config


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="PATH", help="configuration file")
    sub.add_argument("--out", metavar="DIR", help="output directory override")
    sub.add_argument("--clearance", type=float, metavar="M",
                     help="radial clearance override, meters")
    sub.add_argument("--t-final", type=float, metavar="S",
                     help="simulation horizon override, seconds")
    sub.add_argument("--dt", type=float, metavar="S",
                     help="time step override, seconds")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ujointsim",
        description="Non-smooth simulation of a universal joint with radial clearance",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    sim = subparsers.add_parser("simulate", help="run one simulation")
    _add_run_flags(sim)

    swp = subparsers.add_parser("sweep", help="run a clearance sweep")
    _add_run_flags(swp)

    chk = subparsers.add_parser("check", help="run the verification batteries")
    chk.add_argument("-v", "--verbose", action="store_true")

    args = parser.parse_args(argv)

    if args.command == "check":
        return cmd_check(verbose=args.verbose)

    try:
        config = _load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "simulate":
        return cmd_simulate(config)
    return cmd_sweep(config)


if __name__ == "__main__":
    sys.exit(main())
