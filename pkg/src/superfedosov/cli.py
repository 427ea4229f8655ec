"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 validation failure, 4 degenerate
omega, 5 jet order exhausted, 6 hbar division or no convergence.
"""

import argparse
import io
import random
import sys

from .errors import FedosovError, ParseError
from .expressions import dumps, element_json, format_element, parse_expr
from .fedosov import check_flatness, flat_connection, quantize, star
from .geometry import check_curvature, derive_structures, riemann, validate
from .sampling import random_element
from .specfile import load_spec
from .verification import run_suite

__all__ = ["run_command", "main", "build_parser"]


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--degree", type=int, default=argparse.SUPPRESS, help="override fedosov_degree")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="JSON output")
    p = _Parser(prog="superfedosov", parents=[common], description="Exact Fedosov star products on one chart.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("validate", "check the geometry input"),
        ("curvature", "curvature tensors and identities"),
        ("solve-r", "solve for the deformation one-form r"),
    ):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("spec")
    s = sub.add_parser("quantize", parents=[common], help="horizontal section Q(f)")
    s.add_argument("spec")
    s.add_argument("--symbol", required=True)
    s = sub.add_parser("star", parents=[common], help="star product of two symbols")
    s.add_argument("spec")
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s = sub.add_parser("verify", parents=[common], help="identity and oracle suite")
    s.add_argument("spec")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=10)
    return p


def _report_out(rep, names, as_json, out):
    if as_json:
        out.write(
            dumps(
                {
                    "passed": rep.passed,
                    "checks": [
                        {"name": c.name, "passed": c.passed, "witness": list(c.witness) if c.witness is not None else None}
                        for c in rep.checks
                    ],
                }
            )
            + "\n"
        )
    else:
        for line in rep.lines(names):
            out.write(line + "\n")


def _symbol(text, spec):
    e = parse_expr(text, spec.ring)
    if e.depends_on("y") or e.depends_on("c"):
        raise ParseError("a symbol may depend on the coordinates and hbar only")
    return e


def _idx(names, t):
    return ",".join(names[i] for i in t)


def _run(args, out):
    spec = load_spec(args.spec, getattr(args, "degree", None))
    names = spec.coords.names
    as_json = getattr(args, "json", False)
    cmd = args.command
    if cmd == "validate":
        rep = validate(spec)
        _report_out(rep, names, as_json, out)
        rep.raise_if_failed(names)
        return 0
    if cmd == "curvature":
        d = derive_structures(spec)
        validate(spec, d).raise_if_failed(names)
        curv = riemann(spec, d)
        samples = [random_element(spec.ring, random.Random(0), terms=3) for _ in range(3)]
        rep = check_curvature(spec, curv, d, samples)
        H = curv.curvature_hamiltonian
        if as_json:
            out.write(
                dumps(
                    {
                        "riemann_up": {_idx(names, k): element_json(v) for k, v in sorted(curv.riemann_up.items())},
                        "riemann_pair": {_idx(names, k): element_json(v) for k, v in sorted(curv.riemann_pair.items())},
                        "hamiltonian": element_json(H),
                    }
                )
                + "\n"
            )
        else:
            for (nn, i, j, k), v in sorted(curv.riemann_up.items()):
                out.write(f"R^{names[nn]}_{names[i]},{names[j]},{names[k]} = {format_element(v)}\n")
            for k, v in sorted(curv.riemann_pair.items()):
                out.write(f"R_{_idx(names, k[:2])};{_idx(names, k[2:])} = {format_element(v)}\n")
            out.write(f"hamiltonian = {format_element(H, annotate=True)}\n")
        _report_out(rep, names, as_json, out)
        rep.raise_if_failed(names)
        return 0
    if cmd == "solve-r":
        fc = flat_connection(spec)
        r = fc.r
        rep = check_flatness(fc)
        if as_json:
            out.write(
                dumps(
                    {
                        "r": element_json(r.r),
                        "iterations": r.iterations,
                        "sectors": {str(n): element_json(r.sector(n)) for n in range(spec.ring.ctx.d_max + 1)},
                    }
                )
                + "\n"
            )
        else:
            out.write(f"iterations = {r.iterations}\n")
            for n in range(spec.ring.ctx.d_max + 1):
                out.write(f"r_({n}) = {format_element(r.sector(n))}\n")
        _report_out(rep, names, as_json, out)
        rep.raise_if_failed(names)
        return 0
    if cmd == "quantize":
        f = _symbol(args.symbol, spec)
        fc = flat_connection(spec)
        q = quantize(fc, f)
        if as_json:
            out.write(dumps({"symbol": element_json(f), "section": element_json(q.a)}) + "\n")
        else:
            out.write(format_element(q.a, annotate=True) + "\n")
        return 0
    if cmd == "star":
        f = _symbol(args.left, spec)
        g = _symbol(args.right, spec)
        fc = flat_connection(spec)
        res = star(fc, f, g)
        if as_json:
            out.write(dumps(element_json(res)) + "\n")
        else:
            out.write(format_element(res, annotate=True) + "\n")
        return 0
    if cmd == "verify":
        rep = run_suite(spec, seed=args.seed, trials=args.trials)
        _report_out(rep, names, as_json, out)
        rep.raise_if_failed(names)
        return 0
    raise _ArgError(f"unknown command {cmd}")


def run_command(argv):
    """Run one command; returns (exit code, stdout text, stderr text)."""
    out, err = io.StringIO(), io.StringIO()
    try:
        args = build_parser().parse_args(argv)
        code = _run(args, out)
    except _ArgError as exc:
        err.write(f"usage error: {exc}\n")
        code = 2
    except FedosovError as exc:
        err.write(f"error {exc.code}: {exc}\n")
        code = exc.exit_code
    except OSError as exc:
        err.write(f"error E_PARSE: cannot read spec: {exc}\n")
        code = 2
    return code, out.getvalue(), err.getvalue()


def main(argv=None):
    code, out, err = run_command(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
