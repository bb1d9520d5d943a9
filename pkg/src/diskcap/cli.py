"""Command-line front door for the certified disk-equation toolkit.

Subcommands produce machine-readable artifacts only (JSON or CSV): certified
quadrature rules, transform matrices, evaluation benchmarks, existence-proof
certificates, certificate re-checks, and plotting grids.  Failures exit
nonzero and print a one-line JSON error object to stderr; a ``prove`` run
exits 0 only after the certificate it wrote has been re-verified from disk.
"""

import argparse
import csv
import json
import os
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from .interval import PrecisionContext, ValidatedScalar
from .jacobi import JacobiWeight, eval_forsythe_all, eval_linear_system
from .quadrature import gauss_rule
from .transform import build_immt
from . import proofs
from . import radii
from . import zernike


def _endpoints(x):
    """Lossless JSON form of an interval scalar: exact rational endpoints."""
    return [str(Fraction(*x.lo.as_integer_ratio())),
            str(Fraction(*x.hi.as_integer_ratio()))]


def _emit(payload, out):
    text = json.dumps(payload, indent=2)
    if out is None:
        print(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _fail(message, stage, **extra):
    blob = {"error": str(message), "stage": stage}
    blob.update(extra)
    print(json.dumps(blob), file=sys.stderr)
    return 1


@dataclass(frozen=True)
class Config:
    """Defaults shared by all subcommands; overridable per flag."""

    bits: int = 128
    max_order: int = 512
    fixture_dir: str = None
    out_dir: str = "."

    def __post_init__(self):
        if not isinstance(self.bits, int) or isinstance(self.bits, bool):
            raise ValueError("config bits must be an integer")
        if not 24 <= self.bits <= 4096:
            raise ValueError(f"config bits {self.bits} outside [24, 4096]")
        if not isinstance(self.max_order, int) or self.max_order < 1:
            raise ValueError("config max_order must be a positive integer")
        if self.fixture_dir is not None and not isinstance(self.fixture_dir, str):
            raise ValueError("config fixture_dir must be a path string")
        if not isinstance(self.out_dir, str):
            raise ValueError("config out_dir must be a path string")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        known = {"bits", "max_order", "fixture_dir", "out_dir"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _config_from(args):
    cfg = Config.load(args.config) if args.config else Config()
    if cfg.fixture_dir and not os.environ.get(proofs.FIXTURE_ENV):
        os.environ[proofs.FIXTURE_ENV] = cfg.fixture_dir
    return cfg


def _resolve_out(args, cfg, default_name):
    if args.out is not None:
        return args.out
    if default_name is None:
        return None
    return os.path.join(cfg.out_dir, default_name)


def cmd_quadrature(args):
    cfg = _config_from(args)
    bits = args.bits or cfg.bits
    if args.order > cfg.max_order:
        return _fail(f"order {args.order} exceeds configured cap "
                     f"{cfg.max_order}", "quadrature")
    rule = gauss_rule(JacobiWeight(args.k, args.m), args.order,
                      PrecisionContext(bits), jobs=args.jobs)
    payload = {
        "k": args.k,
        "m": args.m,
        "order": args.order,
        "bits": bits,
        "nodes": [_endpoints(x) for x in rule.nodes],
        "weights": [_endpoints(x) for x in rule.weights],
    }
    _emit(payload, _resolve_out(args, cfg, None))
    return 0


def cmd_mmt(args):
    cfg = _config_from(args)
    bits = args.bits or cfg.bits
    if args.order > cfg.max_order:
        return _fail(f"order {args.order} exceeds configured cap "
                     f"{cfg.max_order}", "mmt")
    basis = JacobiWeight(args.k, args.m)
    node_k = args.k if args.node_k is None else args.node_k
    node_m = args.m if args.node_m is None else args.node_m
    nodes_from = JacobiWeight(node_k, node_m)
    pair = zernike.build_mmt(basis, nodes_from, args.order,
                             method=args.method,
                             ctx=PrecisionContext(bits), jobs=args.jobs)
    if nodes_from == basis:
        pair = build_immt(pair)

    def dump(matrix):
        rows, cols = matrix.shape
        return [[_endpoints(matrix[i, j]) for j in range(cols)]
                for i in range(rows)]

    payload = {
        "basis": [args.k, args.m],
        "nodes_from": [node_k, node_m],
        "order": args.order,
        "bits": bits,
        "shape": list(pair.forward.shape),
        "forward": dump(pair.forward),
        "inverse": dump(pair.inverse) if pair.inverse is not None else None,
    }
    _emit(payload, _resolve_out(args, cfg, None))
    return 0


def cmd_prove(args):
    cfg = _config_from(args)
    bits = args.bits or cfg.bits
    out = _resolve_out(args, cfg, f"certificate_m{args.m}_N{args.N}.json")
    try:
        cert = proofs.prove(args.m, args.N, bits=bits, guess=args.guess,
                            method=args.method, jobs=args.jobs, out=out)
    except proofs.NewtonError as err:
        return _fail(err, "newton", history=[float(h) for h in err.history])
    except radii.CertificationError as err:
        return _fail(err, "certify")
    except (ValueError, OSError) as err:
        return _fail(err, "setup")
    try:
        report = proofs.verify_certificate(out)
    except proofs.CertificateError as err:
        return _fail(err, "recheck", certificate=out)
    report["certificate"] = out
    report["runtime_seconds"] = cert.runtime
    print(json.dumps(report))
    return 0


def cmd_verify(args):
    try:
        report = proofs.verify_certificate(args.certificate)
    except (proofs.CertificateError, OSError, ValueError) as err:
        return _fail(err, "verify", certificate=args.certificate)
    report["certificate"] = args.certificate
    print(json.dumps(report))
    return 0


def cmd_grid(args):
    cfg = _config_from(args)
    try:
        if args.solution:
            with open(args.solution) as fh:
                data = json.load(fh)
            sol = proofs.ApproxSolution(int(data["m"]), int(data["N"]),
                                        [float(v) for v in data["U0"]])
        else:
            sol = proofs.load_fixture(args.m)
            if sol is None:
                return _fail(f"no stored solution for m={args.m}", "grid")
        out = _resolve_out(args, cfg, f"grid_m{sol.m}.csv")
        proofs.export_solution_grid(sol, out, radial=args.radial,
                                    angular=args.angular)
    except (ValueError, OSError, KeyError) as err:
        return _fail(err, "grid")
    print(json.dumps({"grid": out, "m": sol.m, "N": sol.N,
                      "rows": args.radial * args.angular}))
    return 0


def _bench_rows(orders, trials, bits, seed):
    ctx = PrecisionContext(bits)
    w = JacobiWeight(1, 1)
    rng = random.Random(seed)
    for N in orders:
        points = [ValidatedScalar(rng.uniform(-1.0, 1.0), ctx)
                  for _ in range(trials)]
        for method, runner in (
                ("forsythe", lambda x, n=N: eval_forsythe_all(w, n, x, ctx)[n]),
                ("linsys", lambda x, n=N: eval_linear_system(w, n, x, ctx)[n])):
            start = time.perf_counter()
            radius = 0.0
            for x in points:
                value = runner(x)
                radius = max(radius, float(value.hi) - float(value.lo))
            elapsed = time.perf_counter() - start
            yield {"N": N, "method": method, "max_radius": repr(radius),
                   "seconds": f"{elapsed:.6f}"}


def cmd_bench(args):
    cfg = _config_from(args)
    bits = args.bits or 53
    orders = [int(tok) for tok in args.orders.split(",") if tok]
    if not orders or min(orders) < 1:
        return _fail(f"bad order list {args.orders!r}", "bench")
    out = _resolve_out(args, cfg, None)
    rows = list(_bench_rows(orders, args.trials, bits, args.seed))
    target = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.DictWriter(target,
                                fieldnames=["N", "method", "max_radius",
                                            "seconds"])
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out:
            target.close()
    return 0


def _add_common(sub):
    sub.add_argument("--bits", type=int, default=None,
                     help="interval precision in bits")
    sub.add_argument("--jobs", type=int, default=1,
                     help="worker cap for column-parallel stages")
    sub.add_argument("--config", default=None,
                     help="JSON config with defaults (bits, max_order, "
                          "fixture_dir, out_dir)")
    sub.add_argument("--out", default=None, help="output file path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="diskcap",
        description="Certified series proofs for the disk equation: "
                    "quadrature, transforms, benchmarks, and certificates.")
    commands = parser.add_subparsers(dest="command", required=True)

    quad = commands.add_parser("quadrature",
                               help="certified Gauss rule as JSON")
    quad.add_argument("--k", type=int, required=True)
    quad.add_argument("--m", type=int, required=True)
    quad.add_argument("--order", type=int, required=True)
    _add_common(quad)
    quad.set_defaults(func=cmd_quadrature)

    mmt = commands.add_parser("mmt",
                              help="certified transform matrix as JSON")
    mmt.add_argument("--k", type=int, required=True)
    mmt.add_argument("--m", type=int, required=True)
    mmt.add_argument("--order", type=int, required=True)
    mmt.add_argument("--node-k", type=int, default=None)
    mmt.add_argument("--node-m", type=int, default=None)
    mmt.add_argument("--method", default="forsythe",
                     choices=["forsythe", "linsys"])
    _add_common(mmt)
    mmt.set_defaults(func=cmd_mmt)

    prove = commands.add_parser("prove",
                                help="run one existence proof, write its "
                                     "certificate")
    prove.add_argument("--m", type=int, required=True)
    prove.add_argument("--N", type=int, required=True)
    prove.add_argument("--guess", default="auto",
                       help="'auto' (stored fixture or fresh scan) or a "
                            "JSON coefficient file")
    prove.add_argument("--method", default="forsythe",
                       choices=["forsythe", "linsys"])
    _add_common(prove)
    prove.set_defaults(func=cmd_prove)

    verify = commands.add_parser("verify-cert",
                                 help="re-check a stored certificate")
    verify.add_argument("certificate")
    verify.set_defaults(func=cmd_verify)

    grid = commands.add_parser("grid", help="polar evaluation grid as CSV")
    grid.add_argument("--m", type=int, default=0,
                      help="stored solution mode to export")
    grid.add_argument("--solution", default=None,
                      help="JSON solution file instead of a stored fixture")
    grid.add_argument("--radial", type=int, default=33)
    grid.add_argument("--angular", type=int, default=64)
    _add_common(grid)
    grid.set_defaults(func=cmd_grid)

    bench = commands.add_parser("bench",
                                help="evaluation-method comparison CSV")
    bench.add_argument("--orders", default="10,20,40,80",
                       help="comma-separated polynomial degrees")
    bench.add_argument("--trials", type=int, default=50)
    bench.add_argument("--seed", type=int, default=0)
    _add_common(bench)
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as err:
        return _fail(err, "config")


if __name__ == "__main__":
    sys.exit(main())
