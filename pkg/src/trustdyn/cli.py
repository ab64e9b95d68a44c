"""Command-line front end.

Exit codes: 0 success, 2 invalid arguments or configuration, 3 runtime failure
(a simulation that never settles, an unwritable output file, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import IO, Any, Iterator, Optional, Sequence

from trustdyn import __version__
from trustdyn.dynamics import (
    IntegratorConfig,
    LimitLabel,
    PopulationState,
    counter_invasion_state,
    integrate,
    invasion_state,
)
from trustdyn.equilibria import Regime, equilibrium_offers, equilibrium_set
from trustdyn.errors import DomainError, RegimeError, TrustDynError
from trustdyn.experiments import (
    halfway_q,
    lambda_star,
    sweep_lambda_star,
    sweep_total_cheating,
)
from trustdyn.model import ModelParams, realized_cheating
from trustdyn import output

log = logging.getLogger("trustdyn")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

COMMANDS = (
    "equilibria",
    "flow",
    "simulate",
    "lambda-star",
    "halfway-q",
    "sweep-cheating",
    "sweep-lambda-star",
)
PRESETS = ("invasion", "counter-invasion")
FLOW_GRID_POINTS = 101


class ConfigError(TrustDynError, ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs, after merging defaults, config file and flags."""

    command: Optional[str] = None
    theta: Optional[float] = None
    q: Optional[float] = None
    delta: float = 1.0
    lam: Optional[float] = None
    s1_0: Optional[float] = None
    s0_0: Optional[float] = None
    preset: Optional[str] = None
    step: Optional[float] = None
    t_max: Optional[float] = None
    tol: float = 1e-10
    bisect_tol: float = 1e-12
    theta_grid: Optional[tuple[float, ...]] = None
    q_grid: Optional[tuple[float, ...]] = None
    q_mode: str = "fixed"
    out: Optional[str] = None
    format: str = "csv"
    stride: int = 10
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.step is None and self.delta > 0:
            object.__setattr__(self, "step", min(1e-2, 1e-1 / self.delta))

    def params(self) -> ModelParams:
        return ModelParams(self.theta, self.q, self.delta)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(step=self.step, t_max=self.t_max, tol=self.tol, stride=self.stride)


# config-file key -> RunConfig field
_KEY_TO_FIELD = {
    "theta": "theta",
    "q": "q",
    "delta": "delta",
    "lambda": "lam",
    "s1_0": "s1_0",
    "s0_0": "s0_0",
    "preset": "preset",
    "step": "step",
    "t_max": "t_max",
    "tol": "tol",
    "bisect_tol": "bisect_tol",
    "theta_grid": "theta_grid",
    "q_grid": "q_grid",
    "q_mode": "q_mode",
    "out": "out",
    "format": "format",
    "stride": "stride",
    "jobs": "jobs",
}
_FLOAT_FIELDS = {"theta", "q", "delta", "lam", "s1_0", "s0_0", "step", "t_max", "tol", "bisect_tol"}
_INT_FIELDS = {"stride", "jobs"}
_GRID_FIELDS = {"theta_grid", "q_grid"}


def parse_grid(text: str, name: str = "grid") -> tuple[float, ...]:
    """Parse ``lo:hi:n`` into ``n`` evenly spaced points including both ends."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name}: expected lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{name}: expected lo:hi:n with numeric fields, got {text!r}") from None
    if n < 1:
        raise ConfigError(f"{name}: point count must be at least 1, got {n}")
    if n == 1:
        return (lo,)
    return tuple(lo + (hi - lo) * i / (n - 1) for i in range(n))


def _coerce(field_name: str, key: str, value: Any) -> Any:
    if value is None:
        return None
    if field_name in _GRID_FIELDS:
        if isinstance(value, str):
            return parse_grid(value, key)
        if isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                           for v in value) and value:
            return tuple(float(v) for v in value)
        raise ConfigError(f"{key}: expected 'lo:hi:n' or a nonempty list of numbers, got {value!r}")
    if field_name in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if field_name in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value


def read_config_file(path: str) -> dict[str, Any]:
    """Read a JSON config file into RunConfig field values.

    Raises:
        ConfigError: on unreadable files, malformed JSON (with line and column)
            or unknown keys.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path!r}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config: {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path}: top level must be a JSON object")
    values = {}
    for key, value in data.items():
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"config: unknown key {key!r} in {path}")
        field_name = _KEY_TO_FIELD[key]
        values[field_name] = _coerce(field_name, key, value)
    return values


def load_config(
    path: Optional[str] = None,
    overrides: Optional[dict[str, Any]] = None,
    command: Optional[str] = None,
) -> RunConfig:
    """Build a RunConfig from defaults, an optional JSON file and overrides.

    Overrides (normally command-line flags) take precedence over the file.
    """
    values: dict[str, Any] = {}
    if path is not None:
        values.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if key not in _KEY_TO_FIELD.values():
            raise ConfigError(f"unknown setting {key!r}")
        values[key] = value
    if command is not None:
        values["command"] = command
    return RunConfig(**values)


def validate(cfg: RunConfig) -> None:
    """Reject settings the selected command cannot run with.

    Raises:
        ConfigError: naming the offending field.
    """
    cmd = cfg.command
    if cmd not in COMMANDS:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {cmd!r}")

    def need(*names: str) -> None:
        for name in names:
            if getattr(cfg, name) is None:
                raise ConfigError(f"--{_flag(name)} is required for {cmd}")

    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"--format: expected csv or json, got {cfg.format!r}")
    if not cfg.delta > 0:
        raise ConfigError(f"--delta: must be positive, got {cfg.delta!r}")
    if cfg.step is not None and not cfg.step > 0:
        raise ConfigError(f"--step: must be positive, got {cfg.step!r}")
    if cfg.t_max is not None and not cfg.t_max > 0:
        raise ConfigError(f"--t-max: must be positive, got {cfg.t_max!r}")
    if not cfg.tol > 0:
        raise ConfigError(f"--tol: must be positive, got {cfg.tol!r}")
    if not cfg.bisect_tol >= 1e-12:
        raise ConfigError(f"--bisect-tol: must be at least 1e-12, got {cfg.bisect_tol!r}")
    if cfg.stride < 1:
        raise ConfigError(f"--stride: must be at least 1, got {cfg.stride!r}")
    if cfg.jobs < 1:
        raise ConfigError(f"--jobs: must be at least 1, got {cfg.jobs!r}")
    if cfg.q_mode not in ("fixed", "halfway"):
        raise ConfigError(f"--q-mode: expected fixed or halfway, got {cfg.q_mode!r}")
    if cfg.preset is not None and cfg.preset not in PRESETS:
        raise ConfigError(f"--preset: expected one of {', '.join(PRESETS)}, got {cfg.preset!r}")

    if cmd in ("equilibria", "flow", "simulate", "lambda-star"):
        need("theta", "q")
    if cmd == "simulate":
        need("lam")
        if cfg.preset is not None and (cfg.s1_0 is not None or cfg.s0_0 is not None):
            raise ConfigError("--preset: cannot be combined with --s1-0/--s0-0")
        if cfg.preset is None and (cfg.s1_0 is None) != (cfg.s0_0 is None):
            raise ConfigError("--s1-0/--s0-0: give both initial perceptions or neither")
        for name in ("lam", "s1_0", "s0_0"):
            value = getattr(cfg, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ConfigError(f"--{_flag(name)}: must lie in [0, 1], got {value!r}")
    if cmd == "halfway-q":
        need("theta")
        if not cfg.theta > 1:
            raise ConfigError(f"--theta: halfway-q requires theta > 1, got {cfg.theta!r}")
    if cmd == "sweep-cheating":
        need("theta", "q_grid")
        if not cfg.theta > 1:
            raise ConfigError(f"--theta: sweep-cheating requires theta > 1, got {cfg.theta!r}")
        for value in cfg.q_grid:
            if not 0.0 < value < 1.0:
                raise ConfigError(f"--q-grid: every q must lie in (0, 1), got {value!r}")
    if cmd == "sweep-lambda-star":
        need("theta_grid")
        if cfg.q_mode == "fixed":
            need("q")

    if cfg.theta is not None and cfg.q is not None:
        try:
            ModelParams(cfg.theta, cfg.q, cfg.delta)
        except DomainError as exc:
            raise ConfigError(f"model parameters: {exc}") from None


def _flag(field_name: str) -> str:
    return {"lam": "lambda", "s1_0": "s1-0", "s0_0": "s0-0"}.get(field_name, field_name.replace("_", "-"))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    model = common.add_argument_group("model")
    model.add_argument("--theta", type=float, help="social-cost weight theta")
    model.add_argument("--q", type=float, help="proportion of scoundrels, in (0, 1)")
    model.add_argument("--delta", type=float, help="perception adjustment speed (default 1)")
    dyn = common.add_argument_group("dynamics")
    dyn.add_argument("--lambda", dest="lam", type=float, help="outsider share lambda")
    dyn.add_argument("--s1-0", dest="s1_0", type=float, help="initial insider perception")
    dyn.add_argument("--s0-0", dest="s0_0", type=float, help="initial outsider perception")
    dyn.add_argument("--preset", choices=PRESETS,
                     help="invasion: s1(0)=0, s0(0)=s_b; counter-invasion: s1(0)=s_b, s0(0)=0")
    dyn.add_argument("--step", type=float, help="RK4 step (default min(0.01, 0.1/delta))")
    dyn.add_argument("--t-max", dest="t_max", type=float, help="time horizon (default 1000/delta)")
    dyn.add_argument("--tol", type=float, help="convergence tolerance (default 1e-10)")
    dyn.add_argument("--bisect-tol", dest="bisect_tol", type=float,
                     help="bisection tolerance for lambda-star and halfway-q (default 1e-12)")
    sweep = common.add_argument_group("sweeps")
    sweep.add_argument("--theta-grid", dest="theta_grid", help="theta grid as lo:hi:n")
    sweep.add_argument("--q-grid", dest="q_grid", help="q grid as lo:hi:n")
    sweep.add_argument("--q-mode", dest="q_mode", choices=("fixed", "halfway"),
                       help="sweep-lambda-star: fixed --q, or halfway q per theta")
    out = common.add_argument_group("output")
    out.add_argument("--out", help="output path (tables go to stdout when omitted)")
    out.add_argument("--format", choices=("csv", "json"), help="machine output format (default csv)")
    out.add_argument("--stride", type=int, help="record every N-th integration step (default 10)")
    out.add_argument("--jobs", type=int, help="parallel workers for sweeps (env TRUSTDYN_JOBS)")
    out.add_argument("--config", help="JSON file with default settings; flags override it")

    parser = argparse.ArgumentParser(
        prog="trustdyn",
        description="Equilibria, perception dynamics and invasion experiments for the "
                    "trust game with scoundrels.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    helps = {
        "equilibria": "regime, rest points and offers for --theta/--q",
        "flow": f"common-perception flow on a {FLOW_GRID_POINTS}-point grid of s",
        "simulate": "integrate an invasion and write the trajectory (t,s1,s0,s)",
        "lambda-star": "minimum disrupting invasion size by bisection",
        "halfway-q": "q placing the unstable equilibrium midway between the others",
        "sweep-cheating": "total cheating across --q-grid at fixed --theta",
        "sweep-lambda-star": "lambda-star across --theta-grid",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


@contextmanager
def _sink(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _summary_stream(cfg: RunConfig) -> IO[str]:
    # keep stdout clean for the table when no --out is given
    return sys.stdout if cfg.out is not None else sys.stderr


def _cmd_equilibria(cfg: RunConfig) -> int:
    params = cfg.params()
    eq = equilibrium_set(params)
    offers = equilibrium_offers(eq, params)
    for warning in eq.warnings:
        log.warning("%s", warning)
    print(f"regime      {eq.regime}")
    print(f"s_star      {output.fmt_human(eq.s_star)}")
    print(f"q_hat       {output.fmt_human(eq.q_hat)}")
    for name in ("s_g", "s_u", "s_b", "s_interior"):
        value = getattr(eq, name)
        if value is not None:
            print(f"{name:<11} {output.fmt_human(value)}    offer {output.fmt_human(offers[name])}")
    if cfg.out is not None:
        row = {"theta": params.theta, "q": params.q, "regime": str(eq.regime),
               "s_star": eq.s_star, "q_hat": eq.q_hat, "s_g": eq.s_g, "s_u": eq.s_u,
               "s_b": eq.s_b, "s_interior": eq.s_interior,
               "x_g": offers.get("s_g"), "x_u": offers.get("s_u"), "x_b": offers.get("s_b"),
               "x_interior": offers.get("s_interior")}
        with _sink(cfg.out) as fh:
            output.write_records([row], list(row), fh, cfg.format)
    return EXIT_OK


def _cmd_flow(cfg: RunConfig) -> int:
    params = cfg.params()
    eq = equilibrium_set(params)
    rows = []
    for i in range(FLOW_GRID_POINTS):
        s_p = i / (FLOW_GRID_POINTS - 1)
        realized = realized_cheating(s_p, params)
        diff = realized - s_p
        rows.append({"s_p": s_p, "s_realized": realized, "direction": (diff > 0) - (diff < 0)})
    with _sink(cfg.out) as fh:
        output.write_records(rows, ("s_p", "s_realized", "direction"), fh, cfg.format)
    err = _summary_stream(cfg)
    print(f"regime {eq.regime}; rest points {', '.join(output.fmt_human(p) for p in eq.rest_points())}",
          file=err)
    if eq.regime in (Regime.TRIPARTITE, Regime.BOUNDARY):
        print(f"good basin [0, {output.fmt_human(eq.s_u)}), bad basin ({output.fmt_human(eq.s_u)}, 1]",
              file=err)
    return EXIT_OK


def _initial_state(cfg: RunConfig, params: ModelParams) -> PopulationState:
    if cfg.s1_0 is not None:
        return PopulationState(0.0, cfg.s1_0, cfg.s0_0, cfg.lam)
    if cfg.preset == "counter-invasion":
        return counter_invasion_state(params, cfg.lam)
    return invasion_state(params, cfg.lam)


def _cmd_simulate(cfg: RunConfig) -> int:
    params = cfg.params()
    initial = _initial_state(cfg, params)
    trajectory = integrate(initial, params, cfg.integrator())
    with _sink(cfg.out) as fh:
        output.write_records(output.trajectory_rows(trajectory), output.TRAJECTORY_COLUMNS,
                             fh, cfg.format)
    term = trajectory.terminal
    print(f"terminal {term.label} at s={output.fmt_human(term.value)} "
          f"(t={output.fmt_human(trajectory.final.t)}, residual={term.residual:.3g})",
          file=_summary_stream(cfg))
    if term.label is LimitLabel.MAX_TIME_EXCEEDED:
        log.error("trajectory did not converge by t_max")
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_lambda_star(cfg: RunConfig) -> int:
    params = cfg.params()
    result = lambda_star(params, cfg.bisect_tol, cfg.integrator())
    if result.lambda_star is None:
        print("lambda_star absent: an invasion of size 1/2 is assimilated")
    else:
        lo, hi = result.bracket
        print(f"lambda_star {output.fmt_human(result.lambda_star)}  "
              f"bracket [{lo:.17g}, {hi:.17g}]  probes {len(result.verdicts)}")
    if cfg.out is not None:
        row = {"theta": params.theta, "q": params.q, "lambda_star": result.lambda_star,
               "verdict_count": len(result.verdicts)}
        with _sink(cfg.out) as fh:
            output.write_records([row], output.LAMBDA_STAR_COLUMNS, fh, cfg.format)
    return EXIT_OK


def _cmd_halfway_q(cfg: RunConfig) -> int:
    q = halfway_q(cfg.theta, cfg.bisect_tol)
    print(f"halfway q {output.fmt_human(q)}")
    if cfg.out is not None:
        with _sink(cfg.out) as fh:
            output.write_records([{"theta": cfg.theta, "q": q}], ("theta", "q"), fh, cfg.format)
    return EXIT_OK


def _cmd_sweep_cheating(cfg: RunConfig) -> int:
    records = sweep_total_cheating(cfg.theta, cfg.q_grid)
    with _sink(cfg.out) as fh:
        output.write_records(output.cheating_rows(records), output.CHEATING_COLUMNS, fh, cfg.format)
    return EXIT_OK


def _cmd_sweep_lambda_star(cfg: RunConfig) -> int:
    records = sweep_lambda_star(
        cfg.theta_grid,
        q_mode=cfg.q_mode,
        q=cfg.q,
        tol=cfg.bisect_tol,
        config=cfg.integrator(),
        delta=cfg.delta,
        jobs=cfg.jobs,
    )
    kept = []
    for record in records:
        if record.flag is not None:
            log.warning("skipping theta=%s: %s", output.fmt(record.theta), record.flag)
        else:
            kept.append(record)
    with _sink(cfg.out) as fh:
        output.write_records(output.lambda_star_rows(kept), output.LAMBDA_STAR_COLUMNS, fh, cfg.format)
    return EXIT_OK


_DISPATCH = {
    "equilibria": _cmd_equilibria,
    "flow": _cmd_flow,
    "simulate": _cmd_simulate,
    "lambda-star": _cmd_lambda_star,
    "halfway-q": _cmd_halfway_q,
    "sweep-cheating": _cmd_sweep_cheating,
    "sweep-lambda-star": _cmd_sweep_lambda_star,
}


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    flags = vars(ns).copy()
    command = flags.pop("command")
    config_path = flags.pop("config", None)
    for key in _GRID_FIELDS & flags.keys():
        flags[key] = parse_grid(flags[key], "--" + key.replace("_", "-"))
    file_values = read_config_file(config_path) if config_path is not None else {}
    env_jobs = os.environ.get("TRUSTDYN_JOBS")
    if env_jobs and "jobs" not in flags and "jobs" not in file_values:
        try:
            flags["jobs"] = int(env_jobs)
        except ValueError:
            raise ConfigError(f"TRUSTDYN_JOBS: expected an integer, got {env_jobs!r}") from None
    return RunConfig(command=command, **{**file_values, **flags})


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, dispatch the subcommand and return the exit status."""
    logging.basicConfig(level=logging.WARNING, format="trustdyn: %(levelname)s: %(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = _config_from_args(ns)
        validate(cfg)
    except (ConfigError, TypeError) as exc:
        print(f"trustdyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _DISPATCH[cfg.command](cfg)
    except (DomainError, RegimeError) as exc:
        print(f"trustdyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrustDynError, OSError) as exc:
        print(f"trustdyn: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
