"""Command line entry point.

    knothe-brenier continue    [--config PATH] [--steps n] [--schedule standard|full_sweep] ...
    knothe-brenier exact       [--config PATH] --eps E ...
    knothe-brenier correlation [--config PATH] [--steps n] [--grid k] ...

Exit codes: 0 success, 2 bad configuration, 3 cells left the admissible
area band, 4 linear solve failure, 5 fixed-eps solver did not converge,
6 the exact correlation curve failed its shape check.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .cells import build
from .continuation import STANDARD, max_relative_area_error, make_sample, run
from .errors import InvalidProblem, NoConvergence
from .geometry import area
from .oracle import correlation_shape, exact_correlation_curve, solve_fixed_eps, strip_deviation

log = logging.getLogger("knothe_brenier")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EXITED_O = 3
EXIT_LINEAR = 4
EXIT_NO_CONVERGENCE = 5
EXIT_CORRELATION = 6

STATUS_EXIT = {"completed": EXIT_OK, "exited_O": EXIT_EXITED_O,
               "linear_solve_failure": EXIT_LINEAR}


def _snapshot_indices(count: int, k: int) -> list:
    if k <= 0 or count == 0:
        return []
    return sorted(set(np.linspace(0, count - 1, min(k, count)).round().astype(int).tolist()))


def _write_snapshots(out: Path, cfg: io.ProblemConfig, samples: list, k: int) -> None:
    snap_dir = out / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for idx in _snapshot_indices(len(samples), k):
        s = samples[idx]
        if s.frame == STANDARD:
            cells = build(cfg.atoms, s.eps, s.prices, cfg.omega).cells
        else:
            cx = build(cfg.atoms.swapped(), s.eps, s.prices, cfg.omega.swapped())
            cells = [c.swapped() for c in cx.cells]
        io.write_svg(snap_dir / io.snapshot_name(s), cells, cfg.atoms, cfg.omega,
                     title=f"{s.frame} eps={s.eps:.6g}")


def cmd_continue(cfg: io.ProblemConfig, out: Path) -> int:
    traj = run(cfg.atoms, cfg.omega, cfg.schedule, project_every=cfg.project_every)
    total = area(cfg.omega)
    out.mkdir(parents=True, exist_ok=True)
    if traj.samples:
        io.write_trajectory(out / "trajectory.csv", traj.samples)
        final = traj.final()
        io.write_errors(out / "errors.csv", final.areas, total,
                        label=f"{final.frame} eps={final.eps:.17g}")
        io.write_correlation(out / "correlation.csv", traj.samples)
        _write_snapshots(out, cfg, traj.samples, cfg.snapshots)
    code = STATUS_EXIT[traj.status]
    max_err = max_relative_area_error(traj.final().areas, total) if traj.samples else None
    io.write_status(out / "status.json", command="continue", status=traj.status,
                    failure_step=traj.failure_step, message=traj.message,
                    steps=cfg.schedule.steps, schedule=cfg.schedule.kind,
                    samples=len(traj.samples), max_relative_error=max_err, exit_code=code)
    if traj.samples:
        log.info("%s after %d samples; max relative area error %.2f%%",
                 traj.status, len(traj.samples), 100 * max_err)
    if code:
        log.error("%s", traj.message)
    return code


def cmd_exact(cfg: io.ProblemConfig, out: Path, eps: float) -> int:
    out.mkdir(parents=True, exist_ok=True)
    try:
        rep = solve_fixed_eps(cfg.atoms, cfg.omega, eps)
    except NoConvergence as exc:
        io.write_status(out / "status.json", command="exact", status="no_convergence",
                        message=str(exc), eps=eps, exit_code=EXIT_NO_CONVERGENCE)
        log.error("%s", exc)
        return EXIT_NO_CONVERGENCE
    cx = build(cfg.atoms, eps, rep.prices, cfg.omega)
    sample = make_sample(cx, cfg.atoms)
    io.write_trajectory(out / "trajectory.csv", [sample])
    io.write_errors(out / "errors.csv", cx.areas, cx.total_area, label=f"exact eps={eps:.17g}")
    io.write_correlation(out / "correlation.csv", [sample])
    _write_snapshots(out, cfg, [sample], 1)
    dev = strip_deviation(cx.cells, cfg.atoms, cfg.omega)
    io.write_status(out / "status.json", command="exact", status="completed", eps=eps,
                    iterations=rep.iterations, grad_norm=rep.grad_norm,
                    strip_deviation=dev, exit_code=EXIT_OK)
    log.info("eps=%g solved in %d iterations, gradient %.2e, strip deviation %.4g",
             eps, rep.iterations, rep.grad_norm, dev)
    return EXIT_OK


def cmd_correlation(cfg: io.ProblemConfig, out: Path, grid_points: int = 21) -> int:
    out.mkdir(parents=True, exist_ok=True)
    grid = np.linspace(0.0, 1.0, grid_points)
    try:
        z, _ = exact_correlation_curve(cfg.atoms, cfg.omega, grid)
    except NoConvergence as exc:
        log.error("%s", exc)
        return EXIT_NO_CONVERGENCE
    io.write_points(out / "correlation_exact.csv", grid, z)
    traj = run(cfg.atoms, cfg.omega, cfg.schedule, project_every=cfg.project_every)
    if traj.samples:
        io.write_correlation(out / "correlation_continuation.csv", traj.samples)
    shape = correlation_shape(z, grid)
    ok = shape["decreasing"] and shape["concave"] and shape["slope_matches"]
    code = STATUS_EXIT[traj.status] or (EXIT_OK if ok else EXIT_CORRELATION)
    io.write_status(out / "status.json", command="correlation", status=traj.status,
                    message=traj.message, decreasing=shape["decreasing"],
                    concave=shape["concave"], slope_matches=shape["slope_matches"],
                    max_slope_error=shape["max_slope_error"], exit_code=code)
    if not ok:
        log.error("exact correlation curve failed its shape check")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knothe-brenier",
        description="Semi-discrete optimal transport from the Knothe map to the Brenier map "
                    "by continuation in the cost weights.")
    parser.add_argument("command", choices=["continue", "exact", "correlation"])
    parser.add_argument("--config", type=Path, help="JSON problem file")
    parser.add_argument("--steps", type=int, help="Euler steps per unit eps (default 500)")
    parser.add_argument("--eps", type=float, default=1.0, help="eps for the exact command")
    parser.add_argument("--schedule", choices=["standard", "full_sweep"])
    parser.add_argument("--snapshots", type=int, help="number of SVG snapshots (default 5)")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--project-every", type=int,
                        help="re-solve exactly every k steps (default off)")
    parser.add_argument("--seed", type=int, help="seed for generated atoms")
    parser.add_argument("--n-atoms", type=int, help="number of generated atoms (default 5)")
    parser.add_argument("--grid", type=int, default=21,
                        help="eps grid points for the correlation command")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = io.load_config(args.config, steps=args.steps, schedule=args.schedule,
                             seed=args.seed, n_atoms=args.n_atoms, snapshots=args.snapshots,
                             project_every=args.project_every)
    except InvalidProblem as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "continue":
        return cmd_continue(cfg, args.out)
    if args.command == "exact":
        if args.eps < 0:
            print("config error: --eps must be nonnegative", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_exact(cfg, args.out, args.eps)
    return cmd_correlation(cfg, args.out, args.grid)


if __name__ == "__main__":
    sys.exit(main())
