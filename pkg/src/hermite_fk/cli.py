"""Command line entry point: ``hermite-fk <command> ...``."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .errors import ConfigurationError, DomainError, MeshError, SolverError, StageError
from .gauss_geometry import isoperimetric_g, load_corpus, symmetrize
from .harness import DEFAULT_H, TOLERANCE_FK, default_corpus_path, format_real, run_corpus
from .solver_1d import HalfLineProblem, lambda1_sweep, solve_lambda1
from .solver_2d import lambda1_2d, write_mesh


def _cmd_solve1d(args) -> int:
    eig = solve_lambda1(HalfLineProblem(args.sigma, args.beta), tol=args.tol)
    print(f"lambda1 {format_real(eig.lambda1)}")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("t", "beta_t", "w"))
            for t, b, w in zip(eig.grid, eig.trace.beta_values, eig.w_values):
                writer.writerow((format_real(t), format_real(b), format_real(w)))
    return 0


def _cmd_solve2d(args) -> int:
    entries = {e.name: e for e in load_corpus(args.corpus)}
    if args.name not in entries:
        raise ConfigurationError(f"no entry named {args.name!r} in {args.corpus}")
    entry = entries[args.name]
    res = lambda1_2d(entry.domain, entry.beta, args.h)
    print(f"lambda1 {format_real(res.lambda1)}")
    print(f"residual {format_real(res.residual)}")
    print(f"dofs {res.dof_count}")
    if args.mesh_out:
        write_mesh(res.mesh, args.mesh_out)
    return 0


def _cmd_symmetrize(args) -> int:
    print(f"sigma_sharp {format_real(symmetrize(args.measure))}")
    print(f"g {format_real(isoperimetric_g(args.measure))}")
    return 0


def _cmd_sweep(args) -> int:
    if args.steps < 2:
        raise DomainError("--steps must be at least 2")
    if not args.sigma_max > args.sigma_min:
        raise DomainError("--sigma-max must exceed --sigma-min")
    grid = np.linspace(args.sigma_min, args.sigma_max, args.steps)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("sigma", "lambda1"))
    for s, lam in lambda1_sweep(grid, args.beta, tol=args.tol, workers=args.workers):
        writer.writerow((format_real(s), format_real(lam)))
    return 0


def _cmd_verify(args) -> int:
    report = run_corpus(args.corpus, args.out, h=args.h, tolerance_fk=args.tolerance_fk,
                        workers=args.workers)
    for row in report.rows:
        status = "PASS" if row.passed else "FAIL"
        print(f"{status} {row.name}: margin {row.margin:.6g}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hermite-fk",
                                     description="Gaussian Robin eigenvalues and Faber-Krahn checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve1d", help="first eigenvalue on a half-line")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--trace", help="write t,beta_t,w to this CSV")
    p.set_defaults(func=_cmd_solve1d)

    p = sub.add_parser("solve2d", help="first eigenvalue of a corpus domain")
    p.add_argument("--corpus", default=str(default_corpus_path()))
    p.add_argument("--name", required=True)
    p.add_argument("--h", type=float, default=DEFAULT_H)
    p.add_argument("--mesh-out", help="dump the mesh as text")
    p.set_defaults(func=_cmd_solve2d)

    p = sub.add_parser("symmetrize", help="half-space with a given Gaussian measure")
    p.add_argument("--measure", type=float, required=True)
    p.set_defaults(func=_cmd_symmetrize)

    p = sub.add_parser("sweep", help="first eigenvalue along a sigma grid")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--sigma-min", type=float, required=True)
    p.add_argument("--sigma-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run the Faber-Krahn check over a corpus")
    p.add_argument("--corpus", default=str(default_corpus_path()))
    p.add_argument("--out", required=True)
    p.add_argument("--h", type=float, default=DEFAULT_H)
    p.add_argument("--tolerance-fk", type=float, default=TOLERANCE_FK)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, MeshError, SolverError, StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
