"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .assignment import AssignmentMatrix, solve_lap
from .config import ConfigError, RunConfig, parse_config
from .estimates import NumericalError
from .maximin import ScenarioError
from .serialize import (emit_assignment_csv, emit_csv, emit_matrices_csv, read_matrix_csv,
                        write_metadata)
from .simulation import (Method, generate_scenario, mc_sweep, motivating_example,
                         optimizer_trace, realization_demo)

log = logging.getLogger("dimred_assoc")

COMMANDS = ("motivating", "realization-demo", "optimizer-trace", "mc-sweep", "lap-solve")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_path: Path | None = None
    output_dir: Path = Path("results")
    seed_override: int | None = None
    runs: int | None = None
    methods: tuple[str, ...] = ()
    c_min: float | None = None
    c_max: float | None = None
    c_step: float | None = None
    matrix_path: Path | None = None
    plot: bool = False


def _c_grid(cfg: RunConfig, m: RunManifest) -> tuple[float, ...]:
    if m.c_min is None and m.c_max is None and m.c_step is None:
        return cfg.mc.c_grid
    lo = cfg.mc.c_grid[0] if m.c_min is None else m.c_min
    hi = cfg.mc.c_grid[-1] if m.c_max is None else m.c_max
    step = m.c_step if m.c_step is not None else 0.1
    if lo <= 0 or hi < lo or step <= 0:
        raise ConfigError("need 0 < c-min <= c-max and c-step > 0", "c_grid")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + k * step, 10) for k in range(count))


def apply_overrides(cfg: RunConfig, m: RunManifest) -> RunConfig:
    mc = cfg.mc
    changes = {}
    if m.seed_override is not None:
        changes["seed"] = m.seed_override
    if m.runs is not None:
        if m.runs < 1:
            raise ConfigError("must be at least 1", "runs")
        changes["runs"] = m.runs
    if m.methods:
        try:
            changes["methods"] = tuple(dict.fromkeys(Method.parse(x) for x in m.methods))
        except ValueError as exc:
            raise ConfigError(str(exc), "methods") from None
    grid = _c_grid(cfg, m)
    if grid != mc.c_grid:
        changes["c_grid"] = grid
    try:
        mc = replace(mc, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = replace(cfg, mc=mc)
    if m.seed_override is not None:
        out = replace(out, trace=replace(cfg.trace, seed=m.seed_override))
    return out


def _run(cfg: RunConfig, m: RunManifest) -> dict:
    out = Path(m.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    extra: dict = {}
    if m.command == "motivating":
        grid = np.arange(0.0, 180.0 + 1e-9, cfg.grid_step)
        rows = motivating_example(grid.tolist())
        emit_csv(rows, out / "motivating.csv")
        written.append("motivating.csv")
        if m.plot:
            from .plotting import plot_motivating
            written.append(plot_motivating(rows, out / "motivating.png").name)
        best = min(rows, key=lambda r: r.trace_p)
        print(f"fusion-optimal angle: {best.alpha_deg:g} deg, "
              f"J0 = {best.j0:.6g}, Je = {best.je:.6g}")
    elif m.command == "realization-demo":
        outcomes = realization_demo(cfg.demo_seeds)
        emit_matrices_csv([(o.matrix, o.assignment) for o in outcomes],
                          out / "realization_demo.csv")
        written.append("realization_demo.csv")
        perms = []
        for k, (seed, o) in enumerate(zip(cfg.demo_seeds, outcomes), start=1):
            perm = [p + 1 for p in o.assignment.perm]
            perms.append(perm)
            verdict = "correct" if perm == sorted(perm) else "incorrect"
            print(f"realization {k} (seed {seed}): assignment {perm} -> {verdict}")
        extra["assignments"] = perms
        if m.plot:
            from .plotting import plot_cost_matrices
            written.append(plot_cost_matrices([o.matrix.costs for o in outcomes],
                                              out / "realization_demo.png").name)
    elif m.command == "optimizer-trace":
        t = cfg.trace
        rows = optimizer_trace(t.seed, cfg.mc.bounds, cfg.mc.k_max, t.n_tracks, t.n,
                               None if t.j is None else t.j - 1)
        emit_csv(rows, out / "optimizer_trace.csv")
        written.append("optimizer_trace.csv")
        if m.plot:
            from .plotting import plot_trace
            written.append(plot_trace(rows, out / "optimizer_trace.png").name)
        for variant in ("adaptive", "fixed_low", "fixed_high"):
            last = [r for r in rows if r.variant == variant][-1]
            print(f"{variant:>10}: f_min(k={last.k}) = {last.f_min:.6g}")
    elif m.command == "mc-sweep":
        scenario = generate_scenario(cfg.scenario)
        t0 = time.perf_counter()
        result = mc_sweep(cfg.mc, scenario)
        log.info("sweep finished in %.1f s", time.perf_counter() - t0)
        emit_csv(result, out / "mc_sweep.csv")
        written.append("mc_sweep.csv")
        if m.plot:
            from .plotting import plot_sweep
            written.append(plot_sweep(result, out / "mc_sweep.png").name)
        for row in result.rows:
            print(f"{row.method.value:>9}  c={row.c:<5g} P_IC={row.p_ic_mean:.4f} "
                  f"(std {row.p_ic_std:.4f})")
    elif m.command == "lap-solve":
        if m.matrix_path is not None:
            try:
                costs = read_matrix_csv(m.matrix_path)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot read matrix: {exc}", "matrix") from None
        elif cfg.lap_costs is not None:
            costs = cfg.lap_costs
        else:
            raise ConfigError("no cost matrix: pass --matrix or set lap.costs", "lap.costs")
        try:
            mat = AssignmentMatrix(costs)
        except ValueError as exc:
            raise ConfigError(str(exc), "lap.costs") from None
        asg = solve_lap(mat)
        emit_assignment_csv(mat, asg, out / "assignment.csv")
        written.append("assignment.csv")
        perm = [p + 1 for p in asg.perm]
        extra["assignment"] = perm
        print("assignment (agent-2 track -> agent-1 track): "
              + " ".join(f"{j + 1}->{i}" for j, i in enumerate(perm)))
        print(f"perm = {perm}  cost = {asg.cost:.17g}")
    else:
        raise ConfigError(f"unknown command {m.command!r}")
    return {"outputs": written, **extra}


def run_command(manifest: RunManifest) -> int:
    start = time.perf_counter()
    try:
        cfg = apply_overrides(parse_config(manifest.config_path), manifest)
        info = _run(cfg, manifest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ScenarioError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    meta = {
        "command": manifest.command,
        "version": __version__,
        "seed": cfg.mc.seed,
        "config_path": None if manifest.config_path is None else str(manifest.config_path),
        "config_hash": cfg.digest(),
        "config": cfg.to_dict(),
        "wall_time_s": round(time.perf_counter() - start, 3),
        **info,
    }
    write_metadata(Path(manifest.output_dir) / f"{manifest.command}.json", meta)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML config file (defaults if omitted)")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--runs", type=int, help="Monte Carlo runs per scaling factor")
    common.add_argument("--method", action="append", default=[],
                        help="Full, FusionOpt or AssocOpt (repeatable)")
    common.add_argument("--c-min", type=float)
    common.add_argument("--c-max", type=float)
    common.add_argument("--c-step", type=float)
    common.add_argument("--plot", action="store_true", help="also render PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="dimred-assoc",
        description="Track-to-track association with dimension-reduced estimates.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("motivating", parents=[common],
                   help="two-target losses as a function of the projection angle")
    sub.add_parser("realization-demo", parents=[common],
                   help="same scenario, two noise draws, fusion-optimal map")
    sub.add_parser("optimizer-trace", parents=[common],
                   help="adaptive versus fixed step sizes")
    sub.add_parser("mc-sweep", parents=[common],
                   help="incorrect assignment rate versus scaling factor")
    lap = sub.add_parser("lap-solve", parents=[common], help="solve one assignment problem")
    lap.add_argument("--matrix", type=Path, help="CSV cost matrix (rows: agent-1 tracks)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    manifest = RunManifest(
        command=args.command, config_path=args.config, output_dir=args.out,
        seed_override=args.seed, runs=args.runs, methods=tuple(args.method),
        c_min=args.c_min, c_max=args.c_max, c_step=args.c_step,
        matrix_path=getattr(args, "matrix", None), plot=args.plot)
    return run_command(manifest)


if __name__ == "__main__":
    sys.exit(main())
