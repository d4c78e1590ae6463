"""Command-line front end.

Subcommands: solve1d (field curves at listed times), solve2d (full field
plus the y=0 section), stochastic (trajectory time table), validate
(numeric vs analytic error table at the endpoint orders), bench
(iteration counts with and without the preconditioner).

All outputs are CSV with '#'-prefixed metadata lines carrying the full
configuration echo and the solver report, so a run is reproducible from
its own output file.  Floats are printed with repr, which round-trips
exactly.  Exit codes: 0 success, 1 invalid configuration, 2 solver
non-convergence, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields as dataclass_fields

import numpy as np

from .analytic_reference import heat_solution, wave_solution
from .memory_kernel import MemoryOrder
from .solver_1d import Grid1D, InitialField1D, SolverConvergenceError, solve_1d, sup_error
from .solver_2d import Grid2D, InitialField2D, solve_2d, sparsity_bound, assemble_2d
from .sparse_linalg import bicg_solve, build_preconditioner, write_matrix_market
from .stochastic import NoiseModel, TimePartition, default_partition, simulate_trajectory
from .time_basis import build_basis, coupling_matrix, source_weights

__all__ = ["RunConfig", "ConfigError", "run", "main"]

OUTPUT_DIR_ENV = "MEMWAVE_OUTDIR"

_SUBCOMMANDS = ("solve1d", "solve2d", "stochastic", "validate", "bench")


class ConfigError(ValueError):
    """Invalid configuration (maps to exit code 1)."""


@dataclass
class RunConfig:
    """Flat, serializable description of one run."""

    subcommand: str = "solve1d"
    alpha: float = 1.0
    T: float = 6.0
    n: int = 8
    x_min: float = -15.0
    x_max: float = 15.0
    m: int = 151
    sigma: float = 1.0
    sigma1: float = 0.0
    sigma2: float = 0.0
    method: str = "auto"
    tol: float = 1e-10
    max_iter: int = 10_000
    precond: bool = True
    noise_C: float = 0.1
    noise_mode: str = "per-node"
    ell: float = 1.0
    seed: int = 0
    steps: int = 0
    times: tuple = ()
    output: str = ""
    dump_matrix: str = ""

    def to_text(self) -> str:
        lines = []
        for f in sorted(dataclass_fields(self), key=lambda f: f.name):
            v = getattr(self, f.name)
            if f.name == "times":
                v = ",".join(repr(float(t)) for t in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        known = {f.name: f for f in dataclass_fields(cls)}
        values = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"malformed config line: {raw!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in known:
                raise ConfigError(f"unknown config key: {key!r}")
            values[key] = _parse_value(key, val, known[key].type)
        return cls(**values)


def _parse_value(key: str, val: str, ftype: str):
    try:
        if key == "times":
            return tuple(float(p) for p in val.split(",") if p.strip() != "")
        if ftype == "bool":
            if val not in ("true", "false"):
                raise ValueError(f"expected true/false, got {val!r}")
            return val == "true"
        if ftype == "int":
            return int(val)
        if ftype == "float":
            return float(val)
        return val
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    # argparse normally exits with status 2; route errors to ConfigError
    # so the documented exit code 1 applies.
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="memwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("--alpha", type=float)
        p.add_argument("--T", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--xmin", dest="x_min", type=float)
        p.add_argument("--xmax", dest="x_max", type=float)
        p.add_argument("--m", type=int)
        p.add_argument("--sigma", type=float)
        p.add_argument("--method", choices=("auto", "direct", "bicg"))
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--no-precond", dest="no_precond", action="store_true", default=False)
        p.add_argument("--output", "-o")
        p.add_argument("--dump-matrix", dest="dump_matrix")
        if name == "solve1d":
            p.add_argument("--times", help="comma-separated output times")
        if name == "solve2d":
            p.add_argument("--sigma1", type=float)
            p.add_argument("--sigma2", type=float)
        if name == "stochastic":
            p.add_argument("--C", dest="noise_C", type=float)
            p.add_argument("--noise-mode", dest="noise_mode", choices=("per-node", "smooth"))
            p.add_argument("--ell", type=float)
            p.add_argument("--seed", type=int)
            p.add_argument("--steps", type=int)
    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                config = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    else:
        config = RunConfig()
    config.subcommand = args.subcommand
    for f in dataclass_fields(RunConfig):
        if f.name in ("subcommand", "times", "precond"):
            continue
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(config, f.name, v)
    if getattr(args, "times", None) is not None:
        config.times = _parse_value("times", args.times, "tuple")
    if getattr(args, "no_precond", False):
        config.precond = False
    return config


def _out_path(config: RunConfig, default_name: str) -> str:
    path = config.output or default_name
    if not os.path.isabs(path):
        path = os.path.join(os.environ.get(OUTPUT_DIR_ENV, "."), path)
    return path


def _fmt(v: float) -> str:
    return repr(float(v))


def _metadata(config: RunConfig, extra: list[str]) -> list[str]:
    lines = [f"# memwave {config.subcommand}"]
    lines += [f"# {line}" for line in config.to_text().splitlines()]
    lines += [f"# {line}" for line in extra]
    return lines


def _report_line(report) -> str:
    return (
        f"report: method={report.method} iterations={report.iterations} "
        f"residual={_fmt(report.residual)} converged={report.converged}"
    )


def _write_csv(path: str, meta: list[str], header: str, rows) -> None:
    with open(path, "w") as fh:
        for line in meta:
            fh.write(line + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _initial_1d(config: RunConfig) -> InitialField1D:
    return InitialField1D.gaussian(config.sigma)


def _run_solve1d(config: RunConfig) -> int:
    grid = Grid1D(config.x_min, config.x_max, config.m)
    g = _initial_1d(config)
    field = solve_1d(
        MemoryOrder(config.alpha), config.T, config.n, grid, g,
        method=config.method, tol=config.tol, max_iter=config.max_iter,
        precond=config.precond,
    )
    times = config.times or (0.0, config.T)
    x = grid.points
    rows = []
    for t in times:
        vals = field.reconstruct(float(t))
        rows += [(_fmt(t), _fmt(xi), _fmt(v)) for xi, v in zip(x, vals)]
    path = _out_path(config, "solve1d.csv")
    _write_csv(path, _metadata(config, [_report_line(field.report)]), "t,x,f", rows)
    if config.dump_matrix:
        _dump_matrix_1d(config, grid, g)
    print(f"solve1d: wrote {path} ({field.report.method}, residual {field.report.residual:.3e})")
    return 0


def _dump_matrix_1d(config: RunConfig, grid: Grid1D, g: InitialField1D) -> None:
    from .solver_1d import assemble_1d

    basis = build_basis(config.T, config.n)
    coupling = coupling_matrix(basis, MemoryOrder(config.alpha))
    system = assemble_1d(coupling, source_weights(basis), g, grid)
    write_matrix_market(system.matrix, config.dump_matrix)


def _run_solve2d(config: RunConfig) -> int:
    grid = Grid2D(config.x_min, config.x_max, config.m)
    if config.sigma1 > 0 and config.sigma2 > 0:
        g = InitialField2D.anisotropic_gaussian(config.sigma1, config.sigma2)
    else:
        g = InitialField2D.radial_gaussian(config.sigma)
    field = solve_2d(
        MemoryOrder(config.alpha), config.T, config.n, grid, g,
        method=config.method, tol=config.tol, max_iter=config.max_iter,
        precond=config.precond,
    )
    values = field.reconstruct(config.T)
    x = grid.points
    rows = [
        (_fmt(xi), _fmt(yj), _fmt(values[i, j]))
        for i, xi in enumerate(x)
        for j, yj in enumerate(x)
    ]
    path = _out_path(config, "solve2d.csv")
    meta = _metadata(config, [_report_line(field.report)])
    _write_csv(path, meta, "x,y,f", rows)
    section = field.section(config.T, 0.0)
    sec_path = os.path.splitext(path)[0] + "_section.csv"
    _write_csv(sec_path, meta, "x,f", [(_fmt(xi), _fmt(v)) for xi, v in zip(x, section)])
    if config.dump_matrix:
        basis = build_basis(config.T, config.n)
        coupling = coupling_matrix(basis, MemoryOrder(config.alpha))
        system = assemble_2d(coupling, source_weights(basis), g, grid)
        write_matrix_market(system.matrix, config.dump_matrix)
    print(f"solve2d: wrote {path} and {sec_path} ({field.report.method})")
    return 0


def _run_stochastic(config: RunConfig) -> int:
    alpha = config.alpha
    if alpha not in (1.0, 2.0):
        raise ConfigError("stochastic simulation requires alpha 1 or 2 (closed-form resolvent)")
    grid = Grid1D(config.x_min, config.x_max, config.m)
    g = _initial_1d(config)
    model = NoiseModel(config.noise_C, config.noise_mode, config.ell, config.seed)
    partition = (
        TimePartition(config.T, config.steps) if config.steps > 0
        else default_partition(config.T, grid)
    )
    traj = simulate_trajectory(int(alpha), g, model, partition, grid)
    x = grid.points
    rows = [
        (_fmt(t), _fmt(xi), _fmt(v))
        for t, fieldvals in zip(traj.times, traj.fields)
        for xi, v in zip(x, fieldvals)
    ]
    path = _out_path(config, "stochastic.csv")
    _write_csv(path, _metadata(config, [f"steps={partition.I}", f"tau={_fmt(partition.tau)}"]),
               "t,x,f", rows)
    print(f"stochastic: wrote {path} ({partition.I} steps, C={config.noise_C})")
    return 0


def _run_validate(config: RunConfig) -> int:
    alpha = config.alpha
    if alpha not in (1.0, 2.0):
        raise ConfigError("validate requires alpha 1 or 2 (analytic reference)")
    grid = Grid1D(config.x_min, config.x_max, config.m)
    g = _initial_1d(config)
    field = solve_1d(
        MemoryOrder(alpha), config.T, config.n, grid, g,
        method=config.method, tol=config.tol, max_iter=config.max_iter,
        precond=config.precond,
    )
    x = grid.points
    numeric = field.reconstruct(config.T)
    if alpha == 1.0:
        analytic = heat_solution(x, config.T, config.sigma)
    else:
        analytic = wave_solution(x, config.T, g.evaluate)
    err = np.abs(numeric - analytic)
    max_err = float(err.max())
    rows = [
        (_fmt(xi), _fmt(nv), _fmt(av), _fmt(ev))
        for xi, nv, av, ev in zip(x, numeric, analytic, err)
    ]
    meta = _metadata(config, [_report_line(field.report), f"max_error={_fmt(max_err)}"])
    path = _out_path(config, "validate.csv")
    _write_csv(path, meta, "x,numeric,analytic,abs_error", rows)
    print(f"validate: max error {max_err:.6e} (alpha={alpha}, n={config.n}, m={config.m}); wrote {path}")
    return 0


def _run_bench(config: RunConfig) -> int:
    grid = Grid2D(config.x_min, config.x_max, config.m)
    g = InitialField2D.radial_gaussian(config.sigma if config.sigma > 0 else 2.0)
    basis = build_basis(config.T, config.n)
    coupling = coupling_matrix(basis, MemoryOrder(config.alpha))
    system = assemble_2d(coupling, source_weights(basis), g, grid)
    if config.dump_matrix:
        write_matrix_market(system.matrix, config.dump_matrix)
    pc = build_preconditioner(coupling, grid.h, 2, grid.m**2)
    _, rep_pc = bicg_solve(system.matrix, system.rhs, pc, tol=config.tol,
                           max_iter=config.max_iter)
    _, rep_plain = bicg_solve(system.matrix, system.rhs, None, tol=config.tol,
                              max_iter=config.max_iter)
    rows = [
        ("bicg+precond", str(system.N), str(rep_pc.iterations), _fmt(rep_pc.residual),
         str(rep_pc.converged)),
        ("bicg", str(system.N), str(rep_plain.iterations), _fmt(rep_plain.residual),
         str(rep_plain.converged)),
    ]
    meta = _metadata(config, [f"nnz={system.matrix.nnz}",
                              f"sparsity_bound={sparsity_bound(config.n, config.m)}"])
    path = _out_path(config, "bench.csv")
    _write_csv(path, meta, "variant,N,iterations,residual,converged", rows)
    print(
        f"bench: N={system.N} preconditioned {rep_pc.iterations} iterations, "
        f"plain {rep_plain.iterations} iterations; wrote {path}"
    )
    if not (rep_pc.converged and rep_plain.converged):
        return 2
    return 0


_RUNNERS = {
    "solve1d": _run_solve1d,
    "solve2d": _run_solve2d,
    "stochastic": _run_stochastic,
    "validate": _run_validate,
    "bench": _run_bench,
}


def run(config: RunConfig) -> int:
    """Execute one configured run; returns the process exit code."""
    if config.subcommand not in _RUNNERS:
        raise ConfigError(f"unknown subcommand {config.subcommand!r}")
    return _RUNNERS[config.subcommand](config)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = _merge_config(args)
        return run(config)
    except ConfigError as exc:
        print(f"memwave: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"memwave: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except SolverConvergenceError as exc:
        print(f"memwave: solver failed: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"memwave: I/O failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
