"""``cone`` command-line interface.

Exit codes: 0 success, 1 validation failure, 2 domain error, 3 I/O or parse error.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import dual, montecarlo, validation, wishart
from .errors import ConeError, StructureError
from .power import Delta, delta
from .structure import (BlockStructure, graph_to_structure, preset, read_graph, read_structure,
                        validate_structure, write_structure)

EXIT_OK, EXIT_INVALID, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3


class InputError(Exception):
    """Unreadable or malformed input (exit code 3)."""


def fmt(v):
    return "%.17g" % (v + 0.0)


def print_matrix(a, out=None):
    out = out or sys.stdout
    for row in np.atleast_2d(a):
        out.write(" ".join(fmt(v) for v in row) + "\n")


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def load_spec(arg):
    """A cone-spec JSON file, or a preset name such as ``vinberg`` or ``sym(3)``."""
    if not os.path.exists(arg):
        try:
            return preset(arg)
        except (StructureError, ValueError, KeyError):
            raise InputError(f"no such spec file or preset: {arg}") from None
    try:
        return read_structure(arg)
    except (OSError, json.JSONDecodeError, StructureError) as exc:
        raise InputError(f"cannot read spec {arg}: {exc}") from exc


def load_point(path, structure):
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("matrix", data.get("point"))
    try:
        x = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: not a numeric matrix") from exc
    if x.shape != (structure.N, structure.N):
        raise InputError(f"{path}: expected a {structure.N}x{structure.N} matrix, got shape {x.shape}")
    return structure.require_z(x, "point")


def parse_shape(text, structure):
    try:
        s = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad shape vector {text!r}") from exc
    if len(s) != structure.r:
        raise InputError(f"shape vector needs r={structure.r} entries, got {len(s)}")
    return np.array(s)


# -- commands -----------------------------------------------------------------

def cmd_validate(args):
    data = _load_json(args.spec)
    try:
        if isinstance(data, dict) and "source" in data and "target" in data:
            real = dual.DualRealization.from_dict(data)
            reports = [("source", validate_structure(real.source)),
                       ("target", validate_structure(real.target))]
            d = real.source.dim_z
            ok_dims = real.l_matrix.shape == (d, d) == (real.target.dim_z,) * 2
            adj = np.max(np.abs(np.array(data.get("l_star", real.l_star_matrix)) - real.l_matrix.T))
        else:
            reports = [("structure", validate_structure(BlockStructure.from_dict(data)))]
            ok_dims, adj = True, 0.0
    except StructureError as exc:
        print(f"invalid: {exc}")
        return EXIT_INVALID
    ok = ok_dims and adj <= 1e-12
    for name, rep in reports:
        print(f"[{name}]")
        print(rep)
        ok = ok and rep.ok
    if not ok_dims:
        print("bundle: l is not a square map between the two Z spaces")
    elif adj > 1e-12:
        print(f"bundle: l_star is not the transpose of l (gap {adj:.3g})")
    print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_from_graph(args):
    try:
        vertices, edges = read_graph(args.graph)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    except StructureError as exc:
        raise InputError(str(exc)) from exc
    V = graph_to_structure(edges, vertices)
    if args.output:
        write_structure(args.output, V)
        print(f"wrote {args.output}: order {list(V.labels)}, dim Z = {V.dim_z}")
    else:
        print(V.to_json(indent=1))
    return EXIT_OK


def cmd_power(args):
    V = load_spec(args.spec)
    s = parse_shape(args.s, V)
    x = load_point(args.point, V)
    f = Delta if args.which == "Delta" else delta
    print(fmt(f(V, s, x)))
    return EXIT_OK


_MEAN_MAPS = {
    ("mean", "Q"): wishart.mean_Q, ("invmean", "Q"): wishart.inverse_mean_Q,
    ("mean", "P"): wishart.mean_P, ("invmean", "P"): wishart.inverse_mean_P,
}


def cmd_mean(args):
    V = load_spec(args.spec)
    x = load_point(args.point, V)
    if args.command == "lauritzen":
        print_matrix(wishart.lauritzen(V, x))
        return EXIT_OK
    s = parse_shape(args.s, V)
    print_matrix(_MEAN_MAPS[(args.command, args.side.upper())](V, s, x))
    return EXIT_OK


def cmd_variance(args):
    V = load_spec(args.spec)
    s = parse_shape(args.s, V)
    x = load_point(args.point, V)
    op = (wishart.variance_Q if args.side.upper() == "Q" else wishart.variance_P)(V, s, x)
    if args.apply:
        print_matrix(op.apply(load_point(args.apply, V)))
    else:
        print_matrix(op.matrix)
    return EXIT_OK


def cmd_gindikin(args):
    V = load_spec(args.spec)
    print(wishart.gindikin(V, args.side, parse_shape(args.s, V)))
    return EXIT_OK


def cmd_dualize(args):
    V = load_spec(args.spec)
    real = dual.dualize(V)
    text = json.dumps(real.to_dict(), indent=1)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise InputError(str(exc)) from exc
        print(f"wrote {args.output}: sizes {list(real.target.sizes)}, d = {V.dim_z}")
    else:
        print(text)
    return EXIT_OK


def cmd_sample(args):
    V = load_spec(args.spec)
    theta = load_point(args.theta, V)
    batch = montecarlo.sample(V, theta, args.k, args.n, args.seed, workers=args.workers)
    try:
        montecarlo.write_batch(args.output, batch)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    print(f"wrote {batch.M} samples to {args.output}")
    return EXIT_OK


def cmd_check_moments(args):
    V = load_spec(args.spec) if args.spec else None
    theta = load_point(args.theta, V) if (args.theta and V is not None) else None
    try:
        batch = montecarlo.read_batch(args.samples, V, theta)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    except ConeError as exc:
        raise InputError(str(exc)) from exc
    rep = montecarlo.compare_moments(batch, args.mean_limit, args.cov_limit)
    print(f"k = {batch.k}, M = {batch.M}, shape = {','.join(fmt(v) for v in batch.shape)}")
    print(rep)
    return EXIT_OK if rep.passed else EXIT_INVALID


def cmd_fixtures(args):
    reports = validation.run_all_fixtures()
    if args.json:
        print(json.dumps([r.to_dict() for r in reports], indent=1))
    else:
        for r in reports:
            print(r.to_text())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_INVALID


# -- parser -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="cone", description="Wishart laws on homogeneous cones.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("validate", help="check V1-V3 for a cone spec or a dual bundle")
    c.add_argument("spec")
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("from-graph", help="structure of a homogeneous decomposable graph")
    c.add_argument("graph")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_from_graph)

    def spec_s_point(c, shape=True):
        c.add_argument("--spec", required=True, help="spec JSON file or preset name")
        if shape:
            c.add_argument("--s", required=True, help="comma-separated shape vector")
        c.add_argument("--point", required=True, help="JSON file with an N x N matrix")

    c = sub.add_parser("power", help="generalized power function")
    spec_s_point(c)
    c.add_argument("--which", choices=("delta", "Delta"), default="Delta")
    c.set_defaults(func=cmd_power)

    for name, helptext in (("mean", "mean map"), ("invmean", "inverse mean map")):
        c = sub.add_parser(name, help=helptext)
        spec_s_point(c)
        c.add_argument("--side", choices=("Q", "P", "q", "p"), default="Q",
                       help="Q: law on the dual cone (point in P_V); P: law on P_V")
        c.set_defaults(func=cmd_mean)
    c = sub.add_parser("lauritzen", help="inverse completion of a point of Q_V")
    spec_s_point(c, shape=False)
    c.add_argument("--s", help="ignored; accepted for symmetry with mean/invmean")
    c.set_defaults(func=cmd_mean)

    c = sub.add_parser("variance", help="variance function as a d x d matrix")
    spec_s_point(c)
    c.add_argument("--side", choices=("Q", "P", "q", "p"), default="Q")
    c.add_argument("--apply", help="JSON file with a direction; print its image instead")
    c.set_defaults(func=cmd_variance)

    c = sub.add_parser("gindikin", help="Gindikin stratum of a shape vector")
    c.add_argument("--spec", required=True)
    c.add_argument("--s", required=True)
    c.add_argument("--side", choices=("Q", "P", "q", "p"), default="Q")
    c.set_defaults(func=cmd_gindikin)

    c = sub.add_parser("dualize", help="matrix realization of the dual cone")
    c.add_argument("spec")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_dualize)

    c = sub.add_parser("sample", help="draw a Wishart sample batch on Q_V")
    c.add_argument("--spec", required=True)
    c.add_argument("--theta", required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--n", type=int, required=True, help="number of samples M")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_sample)

    c = sub.add_parser("check-moments", help="compare a sample file with the closed forms")
    c.add_argument("samples")
    c.add_argument("--spec", help="override the structure embedded in the file")
    c.add_argument("--theta", help="override theta (requires --spec)")
    c.add_argument("--mean-limit", type=float, default=4.0)
    c.add_argument("--cov-limit", type=float, default=5.0)
    c.set_defaults(func=cmd_check_moments)

    c = sub.add_parser("fixtures", help="run the counterexample fixtures")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConeError as exc:
        witness = getattr(exc, "witness", None)
        print(f"error: {exc}", file=sys.stderr)
        if witness is not None:
            print("witness: " + " ".join(str(v) for v in witness))
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
