"""Command-line experiment harness.

Subcommands: ``symbol``, ``kernel``, ``evolve``, ``burgers``, ``hj``,
``sde``, ``verify``.  Each run that produces files also writes a
structured-text manifest recording the command line, configuration and
measure digests, grid parameters, seeds, timings and artifact list, so a
run can be reproduced bit-exactly.  Flag reference and file schemas live
in ``docs/cli.md``.

Exit codes: 0 success, 1 computation or check failure, 2 usage error
(unknown flags, malformed input files).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import acceptance, heatkernel, levy, quasilinear, stochastic
from .errors import LevylabError
from .fieldgrid import (Grid, GridField, SpaceTimeField, load_field,
                        load_field_csv, load_trajectory, save_field,
                        save_field_csv, save_trajectory)
from .heatkernel import DriftSchedule
from .linear_solver import (LinearProblem, SolverConfig, drift_solve,
                            duhamel_solve)

USAGE_ERROR = 2


class UsageError(Exception):
    """Malformed flag values or input files; maps to exit code 2."""


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    """Reproducibility record written next to every artifact set."""

    command_line: str
    config_digest: str = ""
    measure_digests: tuple = ()
    grid_parameters: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    fitted_constants: dict = field(default_factory=dict)
    rng_seeds: tuple = ()
    timings: dict = field(default_factory=dict)
    artifacts: tuple = ()

    def render(self) -> str:
        lines = ["# levylab run manifest",
                 f"command: {self.command_line}",
                 f"config-digest: {self.config_digest or '-'}"]
        for d in self.measure_digests:
            lines.append(f"measure-digest: {d}")
        for key, val in sorted(self.grid_parameters.items()):
            lines.append(f"grid.{key}: {val}")
        for key, val in sorted(self.tolerances.items()):
            lines.append(f"tolerance.{key}: {val}")
        for key, val in sorted(self.fitted_constants.items()):
            lines.append(f"constant.{key}: {val!r}")
        for s in self.rng_seeds:
            lines.append(f"seed: {s}")
        for key, val in sorted(self.timings.items()):
            lines.append(f"seconds.{key}: {val:.3f}")
        for a in self.artifacts:
            lines.append(f"artifact: {a}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.render())


def _digest(obj) -> str:
    payload = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _measure_digest(measure) -> str:
    return _digest(levy.measure_digest(measure))


# ---------------------------------------------------------------------------
# input parsing helpers (all schema violations become UsageError -> exit 2)
# ---------------------------------------------------------------------------

def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",")], dtype=float)
    except ValueError as exc:
        raise UsageError(f"expected comma-separated floats, got {text!r}") \
            from exc


def _parse_grid(text: str) -> tuple:
    """'N,L' or 'd,N,L' -> (dim, points_per_axis, side_length)."""
    parts = text.split(",")
    try:
        if len(parts) == 2:
            return 1, int(parts[0]), float(parts[1])
        if len(parts) == 3:
            return int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise UsageError(f"malformed grid spec {text!r}") from exc
    raise UsageError(f"grid spec must be 'N,L' or 'd,N,L', got {text!r}")


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _load_measure(path):
    try:
        return levy.from_dict(_load_json(path))
    except (KeyError, LevylabError) as exc:
        raise UsageError(f"bad measure file {path}: {exc}") from exc


def _load_any_field(path) -> GridField:
    try:
        if str(path).endswith(".csv"):
            return load_field_csv(path)
        return load_field(path)
    except (OSError, ValueError, LevylabError) as exc:
        raise UsageError(f"bad field file {path}: {exc}") from exc


def _save_any_field(fieldv: GridField, path) -> None:
    if str(path).endswith(".csv"):
        save_field_csv(fieldv, path)
    else:
        save_field(fieldv, path)


def _drift_from_dict(spec, dim: int):
    if spec is None:
        return None
    try:
        kind = spec["type"]
        if kind == "constant":
            return DriftSchedule.constant(np.asarray(spec["value"], float))
        if kind == "schedule":
            return DriftSchedule(tuple(spec["breakpoints"]),
                                 tuple(tuple(v) for v in spec["values"]))
    except (KeyError, TypeError, LevylabError) as exc:
        raise UsageError(f"bad drift specification: {exc}") from exc
    raise UsageError(f"unknown drift type {spec.get('type')!r}")


def _solver_config(cfg: dict) -> SolverConfig:
    try:
        return SolverConfig(
            time_step=float(cfg["time_step"]),
            mollifier_width=float(cfg.get("mollifier_width", 0.0)),
            picard_tol=float(cfg.get("picard_tol", 1e-10)),
            max_iterations=int(cfg.get("max_iterations", 50)))
    except (KeyError, ValueError, LevylabError) as exc:
        raise UsageError(f"bad solver config: {exc}") from exc


def _out_dir(path) -> None:
    import os
    os.makedirs(path, exist_ok=True)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_symbol(args) -> int:
    measure = _load_measure(args.measure)
    xi = _parse_vector(args.xi)
    if xi.shape != (measure.dim,):
        raise UsageError(
            f"xi has {xi.size} entries but the measure lives in "
            f"R^{measure.dim}")
    if np.all(xi == 0.0):
        value = 0.0 + 0.0j
    else:
        value = levy.symbol(measure, xi)
    print(f"{value.real:.12g}{value.imag:+.12g}i")
    return 0


def _cmd_kernel(args) -> int:
    t0 = time.perf_counter()
    measure = _load_measure(args.measure)
    dim, n, length = _parse_grid(args.grid)
    if dim != measure.dim:
        raise UsageError("grid dimension does not match the measure")
    g = Grid(dim, n, length)
    p_t = heatkernel.kernel(measure, args.t, g)
    _save_any_field(p_t, args.out)
    manifest = RunManifest(
        command_line=" ".join(sys.argv),
        config_digest=_digest({"t": args.t, "grid": args.grid}),
        measure_digests=(_measure_digest(measure),),
        grid_parameters={"dim": dim, "points_per_axis": n,
                         "side_length": length},
        timings={"kernel": time.perf_counter() - t0},
        artifacts=(str(args.out),))
    manifest.write(str(args.out) + ".manifest")
    print(f"wrote {args.out} (mass "
          f"{float(np.sum(p_t.values) * g.cell_volume):.6f})")
    return 0


def _cmd_evolve(args) -> int:
    t0 = time.perf_counter()
    spec = _load_json(args.problem)
    cfg = _load_json(args.config)
    try:
        measure = levy.from_dict(spec["measure"])
        phi = _load_any_field(spec["phi"])
        lam = float(spec.get("lam", 0.0))
        horizon = float(spec["horizon"])
    except (KeyError, ValueError, LevylabError) as exc:
        raise UsageError(f"bad problem file {args.problem}: {exc}") from exc
    drift = _drift_from_dict(spec.get("drift"), measure.dim)
    forcing = (load_trajectory(spec["forcing"])
               if spec.get("forcing") else None)
    config = _solver_config(cfg)
    solver = cfg.get("solver", "duhamel")
    problem = LinearProblem(measure, drift, lam, forcing, phi, horizon)
    if solver == "duhamel":
        traj = duhamel_solve(problem, config)
    elif solver == "drift":
        traj = drift_solve(problem, config,
                           dealias=bool(cfg.get("dealias", False)))
    else:
        raise UsageError(f"unknown solver {solver!r} (duhamel or drift)")
    _out_dir(args.out)
    traj_path = f"{args.out}/solution.traj"
    save_trajectory(traj, traj_path)
    final = traj.final()
    manifest = RunManifest(
        command_line=" ".join(sys.argv),
        config_digest=_digest(cfg),
        measure_digests=(_measure_digest(measure),),
        grid_parameters={"dim": phi.grid.dim,
                         "points_per_axis": phi.grid.points_per_axis,
                         "side_length": phi.grid.side_length},
        tolerances={"picard_tol": config.picard_tol},
        fitted_constants={"final_sup": float(np.max(np.abs(final.values)))},
        timings={"evolve": time.perf_counter() - t0},
        artifacts=(traj_path,))
    manifest.write(f"{args.out}/manifest.txt")
    print(f"wrote {traj_path} ({len(traj.frames)} frames)")
    return 0


def _quasilinear_common(args, run, label: str) -> int:
    """Shared artifact plumbing for the burgers and hj subcommands."""
    t0 = time.perf_counter()
    phi = _load_any_field(args.phi)
    measure = (_load_measure(args.measure) if args.measure else
               levy.StableSpectral(1.0, levy.SphericalMeasure.isotropic(
                   phi.grid.dim, _iso_mass(phi.grid.dim))))
    config = SolverConfig(time_step=args.dt, picard_tol=args.picard_tol)
    traj = run(phi, measure, config)
    _out_dir(args.out)
    traj_path = f"{args.out}/solution.traj"
    save_trajectory(traj, traj_path)
    manifest = RunManifest(
        command_line=" ".join(sys.argv),
        config_digest=_digest({"dt": args.dt, "T": args.T,
                               "picard_tol": args.picard_tol}),
        measure_digests=(_measure_digest(measure),),
        grid_parameters={"dim": phi.grid.dim,
                         "points_per_axis": phi.grid.points_per_axis,
                         "side_length": phi.grid.side_length},
        tolerances={"picard_tol": args.picard_tol},
        fitted_constants={
            "final_sup": float(np.max(np.abs(traj.final().values)))},
        timings={label: time.perf_counter() - t0},
        artifacts=(traj_path,))
    manifest.write(f"{args.out}/manifest.txt")
    print(f"wrote {traj_path} ({len(traj.frames)} frames)")
    return 0


def _iso_mass(dim: int) -> float:
    """Isotropic mass making psi(xi) = |xi| at alpha = 1."""
    c1 = levy.radial_cosine_constant(1.0)
    return 1.0 / (c1 * levy.isotropic_projection_moment(dim, 1.0))


def _cmd_burgers(args) -> int:
    def run(phi, measure, config):
        return quasilinear.burgers_solve(phi, measure, args.T, config)
    return _quasilinear_common(args, run, "burgers")


def _cmd_hj(args) -> int:
    if args.hamiltonian not in quasilinear.HAMILTONIANS:
        raise UsageError(
            f"unknown hamiltonian {args.hamiltonian!r}; choices: "
            + ", ".join(sorted(quasilinear.HAMILTONIANS)))
    H = quasilinear.HAMILTONIANS[args.hamiltonian]()

    def run(phi, measure, config):
        return quasilinear.hamilton_jacobi_solve(H, phi, measure, args.T,
                                                 config)
    return _quasilinear_common(args, run, "hj")


def _cmd_sde(args) -> int:
    t0 = time.perf_counter()
    spec = _load_json(args.problem)
    try:
        measure = levy.from_dict(spec["measure"])
        phi = _load_any_field(spec["phi"])
        t_final = float(spec["t"])
        x = np.asarray(spec["x"], dtype=float)
        lam = float(spec.get("lam", 0.0))
        n_steps = int(spec.get("n_steps", 64))
    except (KeyError, ValueError, LevylabError) as exc:
        raise UsageError(f"bad problem file {args.problem}: {exc}") from exc
    b_spec = spec.get("drift")
    if b_spec is None:
        b = None
    else:
        try:
            if b_spec["type"] != "constant":
                raise UsageError("sde drift supports only type 'constant'")
            b_vec = np.asarray(b_spec["value"], dtype=float)
        except (KeyError, TypeError) as exc:
            raise UsageError(f"bad drift specification: {exc}") from exc
        b = lambda t, y: np.broadcast_to(b_vec, np.shape(y))

    estimate, std_error = stochastic.feynman_kac(
        phi, None, b, measure, t_final, x, args.paths, args.seed,
        lam=lam, n_steps=n_steps)

    time_grid = np.linspace(0.0, t_final, n_steps + 1)
    ensemble = stochastic.sample_ensemble(b, measure, x, time_grid,
                                          min(args.paths, 2000), args.seed)
    exits = stochastic.exit_fraction(ensemble, x, phi.grid.side_length)
    elapsed = time.perf_counter() - t0

    lines = [f"estimate: {estimate:.10g}",
             f"std-error: {std_error:.4g}",
             f"paths: {args.paths}",
             f"steps: {n_steps}",
             f"exit-fraction: {exits:.4f}",
             f"seconds: {elapsed:.3f}"]
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if args.dump_paths:
        np.save(args.dump_paths, ensemble.states)
    manifest = RunManifest(
        command_line=" ".join(sys.argv),
        config_digest=_digest(spec),
        measure_digests=(_measure_digest(measure),),
        grid_parameters={"dim": phi.grid.dim,
                         "points_per_axis": phi.grid.points_per_axis,
                         "side_length": phi.grid.side_length},
        fitted_constants={"estimate": estimate, "std_error": std_error,
                          "exit_fraction": exits},
        rng_seeds=(args.seed,),
        timings={"sde": elapsed},
        artifacts=tuple(p for p in (str(args.out), args.dump_paths) if p))
    manifest.write(str(args.out) + ".manifest")
    print(f"estimate {estimate:.6g} +/- {std_error:.2g} "
          f"(exit fraction {exits:.2%})")
    return 0


def _cmd_verify(args) -> int:
    if args.all:
        names = list(acceptance.CHECKS)
    elif args.check:
        if args.check not in acceptance.CHECKS:
            raise UsageError(
                f"unknown check {args.check!r}; choices: "
                + ", ".join(acceptance.CHECKS))
        names = [args.check]
    else:
        raise UsageError("verify needs --check NAME or --all")
    all_ok = True
    for name in names:
        result = acceptance.CHECKS[name]()
        print(result.line)
        all_ok = all_ok and result.passed
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levylab",
        description="Numerical laboratory for Levy-type nonlocal operators.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("symbol", help="evaluate a characteristic exponent")
    p.add_argument("--measure", required=True, help="measure JSON file")
    p.add_argument("--xi", required=True,
                   help="frequency, comma-separated floats")
    p.set_defaults(run=_cmd_symbol)

    p = sub.add_parser("kernel", help="tabulate a heat kernel on a grid")
    p.add_argument("--measure", required=True)
    p.add_argument("--t", type=float, required=True, help="time > 0")
    p.add_argument("--grid", required=True, help="'N,L' or 'd,N,L'")
    p.add_argument("--out", required=True,
                   help="output field (.csv for text, else binary)")
    p.set_defaults(run=_cmd_kernel)

    p = sub.add_parser("evolve", help="solve a linear Cauchy problem")
    p.add_argument("--problem", required=True, help="problem JSON file")
    p.add_argument("--config", required=True, help="solver-config JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(run=_cmd_evolve)

    for name, helptext in (("burgers", "critical Burgers evolution"),
                           ("hj", "critical Hamilton-Jacobi evolution")):
        p = sub.add_parser(name, help=helptext)
        if name == "hj":
            p.add_argument("--hamiltonian", required=True,
                           help="|".join(sorted(quasilinear.HAMILTONIANS)))
        p.add_argument("--phi", required=True, help="initial field file")
        p.add_argument("--measure", default=None,
                       help="alpha=1 measure JSON (default: isotropic "
                            "with psi(xi) = |xi|)")
        p.add_argument("--T", type=float, required=True, help="horizon")
        p.add_argument("--dt", type=float, required=True, help="time step")
        p.add_argument("--picard-tol", type=float, default=1e-10)
        p.add_argument("--out", required=True, help="output directory")
        p.set_defaults(run=_cmd_burgers if name == "burgers" else _cmd_hj)

    p = sub.add_parser("sde", help="Monte Carlo probabilistic solution")
    p.add_argument("--problem", required=True, help="problem JSON file")
    p.add_argument("--paths", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="summary text file")
    p.add_argument("--dump-paths", default=None,
                   help="optional .npy dump of sampled paths")
    p.set_defaults(run=_cmd_sde)

    p = sub.add_parser("verify", help="run acceptance checks")
    p.add_argument("--check", default=None, help="check name")
    p.add_argument("--all", action="store_true", help="run every check")
    p.set_defaults(run=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except LevylabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
