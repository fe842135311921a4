"""Command line interface: ``nehari-nodal {solve,sweep,validate,eigen}``."""
import argparse
import json
import logging
import os
import sys

from .errors import ConvergenceError
from .functional import lambda_1p
from .harness import (MeshSpec, ProblemSpec, export_csv, solve_once, sweep_epsilon,
                      write_record)
from .nonlinearity import Nonlinearity
from .solver import SolveOptions


def _add_mesh_args(p):
    p.add_argument("--mesh", default="interval:128", help="interval:N or rect:NX:NY")
    p.add_argument("--a", type=float, default=0.0, help="left end of the interval")
    p.add_argument("--b", type=float, default=1.0, help="right end of the interval")
    p.add_argument("--w", type=float, default=1.0, help="rectangle width")
    p.add_argument("--h", type=float, default=1.0, help="rectangle height")


def _add_problem_args(p):
    _add_mesh_args(p)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--q", type=float, default=4.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--tol-grad", type=float, default=1e-8)
    p.add_argument("--n-starts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="nehari-nodal",
                                     description="Least-energy nodal solutions of -eps^2 Lap u - Lap_p u = f(u).")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one problem and write a JSON run record")
    _add_problem_args(solve)
    solve.add_argument("--out", default=None, help="output JSON file")

    sweep = sub.add_parser("sweep", help="eps-continuation sweep")
    _add_problem_args(sweep)
    sweep.add_argument("--eps-grid", default="0,0.05,0.1,0.2,0.4")
    sweep.add_argument("--out", default=None, help="output directory")

    validate = sub.add_parser("validate", help="hypothesis report for a problem")
    _add_problem_args(validate)

    eigen = sub.add_parser("eigen", help="first Dirichlet eigenvalue of the p-Laplacian")
    _add_mesh_args(eigen)
    eigen.add_argument("--p", type=float, default=2.0)
    return parser


def _mesh_spec(parser, args):
    try:
        kind = args.mesh.split(":")[0]
        extents = (args.a, args.b) if kind == "interval" else (args.w, args.h)
        spec = MeshSpec.parse(args.mesh, extents)
        spec.build()
    except ValueError as exc:
        parser.error(str(exc))
    return spec


def _problem(parser, args):
    if not args.p > 2:
        parser.error(f"--p must exceed 2, got {args.p}")
    if not args.tol_grad > 0 or args.n_starts < 1:
        parser.error("--tol-grad must be positive and --n-starts at least 1")
    spec = ProblemSpec(_mesh_spec(parser, args), Nonlinearity(args.p, args.q, args.mu, args.kappa), args.eps)
    opts = SolveOptions(tol_grad=args.tol_grad, n_starts=args.n_starts, seed=args.seed)
    return spec, opts


def _summary(rec):
    return {"eps": rec.eps, "status": rec.status, "energy": rec.energy, "residual": rec.residual,
            "morse_index": rec.morse_index, "nullity": rec.nullity,
            "nodal_domains": rec.nodal_domains, "iterations": rec.iterations}


def main(argv=None):
    logging.basicConfig(level=os.environ.get("NODAL_LOG", "error").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "eigen":
        if args.p < 2:
            parser.error(f"--p must be at least 2, got {args.p}")
        mesh = _mesh_spec(parser, args).build()
        try:
            est = lambda_1p(mesh, args.p)
        except ConvergenceError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"{est.lam:.10g}")
        return 0

    spec, opts = _problem(parser, args)

    if args.command == "validate":
        report = spec.validate()
        print(json.dumps(report.as_dict(), indent=2))
        return 0 if report.passed else 1

    if args.command == "solve":
        rec = solve_once(spec, opts)
        if args.out:
            write_record(rec, args.out)
        print(json.dumps(_summary(rec)))
        return 0 if rec.status == "ok" else 1

    try:
        grid = [float(x) for x in args.eps_grid.split(",")]
        report = sweep_epsilon(spec, grid, opts)
    except ValueError as exc:
        parser.error(str(exc))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for i, rec in enumerate(report.records):
            write_record(rec, os.path.join(args.out, f"run_{i:03d}_eps{rec.eps:g}.json"))
        with open(os.path.join(args.out, "sweep.csv"), "w", newline="") as fh:
            fh.write(export_csv(report.records))
        with open(os.path.join(args.out, "sweep.json"), "w") as fh:
            json.dump(report.as_dict(), fh, indent=2)
    print(json.dumps(report.as_dict()))
    return 0 if all(r.status == "ok" for r in report.records) else 1


if __name__ == "__main__":
    sys.exit(main())
