"""Command-line front end.

Exit codes: 0 success, 1 negative verdict, 2 usage or input error,
3 resource limit.  Results go to stdout (or ``--out``); diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Sequence

from .errors import ConfigError, DomainError, PreconditionError, ResourceError

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- parsing helpers ----------------------------------------------------------

def parse_points(text: str | None) -> list[tuple[int, ...]]:
    """``"(0,0),(1,1)"`` or ``"0,0;1,1"`` to a list of tuples; blank means empty."""
    if text is None or not text.strip():
        return []
    groups = re.findall(r"\(([^()]*)\)", text) if "(" in text else text.split(";")
    try:
        return [tuple(int(c) for c in g.split(",")) for g in groups if g.strip()]
    except ValueError:
        raise UsageError(f"cannot parse points {text!r}") from None


def parse_ints(text: str) -> list[int]:
    try:
        return [int(c) for c in text.replace(" ", "").split(",") if c]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def spec_from_args(args: argparse.Namespace):
    from .sieve import bfree_lattice, kfree_lattice, kfree_ring, visible

    if args.set == "visible":
        return visible(args.d)
    if args.set == "kfree":
        if args.k is None:
            raise UsageError("--set kfree needs --k")
        return kfree_ring(args.ring, args.k) if args.ring else kfree_lattice(args.d, args.k)
    if args.set == "bfree":
        if not args.B:
            raise UsageError("--set bfree needs --B")
        return bfree_lattice(args.d, parse_ints(args.B))
    raise UsageError(f"unknown set {args.set!r}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str | bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(text if isinstance(text, bytes) else text.encode())
    elif isinstance(text, bytes):
        raise UsageError("binary output needs --out")
    else:
        sys.stdout.write(text)


def _positive(name: str):
    def check(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1")
        return v

    return check


# -- subcommands ------------------------------------------------------------

def cmd_sieve(args) -> int:
    from .sieve import Box, sieve

    spec = spec_from_args(args)
    ps = sieve(spec, Box(spec.d, args.radius), args.threads)
    if args.format == "json":
        _emit(ps.to_json(), args.out)
    elif args.format == "bin":
        _emit(ps.to_bytes(), args.out)
    else:
        rows = [",".join(f"x{i}" for i in range(spec.d))]
        rows += [",".join(map(str, p)) for p in ps.points.tolist()]
        _emit("\n".join(rows) + "\n", args.out)
    if args.svg:
        from .plotting import render_svg

        render_svg([ps], args.svg, embed=args.embed)
    return EXIT_OK


def _load_pointset(path: str):
    from .sieve import PointSet

    raw = Path(path).read_bytes()
    try:
        if raw[:4] == b"KFPS":
            return PointSet.from_bytes(raw)
        return PointSet.from_dict(json.loads(raw))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a valid point set ({exc})") from None


def cmd_render(args) -> int:
    from .plotting import render_ppm, render_svg

    if len(args.files) > 2:
        raise UsageError("render takes at most two point-set files")
    sets = [_load_pointset(f) for f in args.files]
    if args.out.endswith(".ppm"):
        if len(sets) != 1:
            raise UsageError("PPM output takes exactly one point set")
        render_ppm(sets[0], args.out)
    else:
        render_svg(sets, args.out, embed=args.embed, title=args.title)
    return EXIT_OK


def cmd_admissible(args) -> int:
    from .admissibility import is_admissible

    spec = spec_from_args(args)
    res = is_admissible(parse_points(args.points), spec)
    out = {"spec": spec.to_dict(), **res.to_dict()}
    _emit(_dump(out), args.out)
    return EXIT_OK if res.admissible else EXIT_NEGATIVE


def cmd_locate(args) -> int:
    from .admissibility import find_locator

    spec = spec_from_args(args)
    P, Q = parse_points(args.P), parse_points(args.Q)
    res = find_locator(P, Q, spec, radius=args.radius, mode=args.mode, threads=args.threads)
    out = {"spec": spec.to_dict(), "P": [list(p) for p in P], "Q": [list(q) for q in Q], **res.to_dict()}
    _emit(_dump(out), args.out)
    return EXIT_OK if res.status == "found" else EXIT_NEGATIVE


def cmd_stab(args) -> int:
    from .symmetry import stab_search

    spec = spec_from_args(args)
    report = stab_search(spec, args.entry_bound, args.radius, args.threads)
    _emit(_dump(report.to_dict()), args.out)
    return EXIT_OK


def cmd_witness(args) -> int:
    from .symmetry import UniMat, inadmissible_image_witness

    entries = parse_ints(args.matrix)
    if len(entries) != 4:
        raise UsageError("--matrix takes four comma-separated entries a,b,c,d")
    w = inadmissible_image_witness(UniMat.of(*entries), args.ring, args.k, max_shell=args.max_shell)
    _emit(_dump(w.to_dict()), args.out)
    return EXIT_OK


def cmd_density(args) -> int:
    from .analytics import density_report

    spec = spec_from_args(args)
    rep = density_report(spec, parse_ints(args.radii), args.threads)
    _emit(rep.to_csv() if args.format == "csv" else _dump(rep.to_dict()), args.out)
    if args.plot:
        from .plotting import plot_density

        plot_density(rep, args.plot)
    return EXIT_OK


def cmd_entropy(args) -> int:
    from .analytics import entropy, theoretical_density

    spec = spec_from_args(args)
    dens, ent = theoretical_density(spec), entropy(spec)
    out = {
        "spec": spec.to_dict(),
        "density": dens.value,
        "entropy": ent.value,
        "provenance": ent.provenance,
        "truncation": ent.truncation,
    }
    _emit(_dump(out), args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _add_set_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--set", choices=["visible", "kfree", "bfree"], default="visible")
    p.add_argument("--d", type=int, default=2, help="lattice dimension (1-3)")
    p.add_argument("--k", type=int, help="power for k-free sets")
    p.add_argument("--ring", choices=["gauss", "eisenstein", "sqrt2", "golden", "sqrt3", "rational"],
                   help="quadratic ring for k-free ring sets")
    p.add_argument("--B", help="comma-separated moduli for B-free sets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kfree", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=_positive("--threads"), default=None,
                        help="worker threads (default: $KFREE_THREADS or 1)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive("--threads"), default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", parents=[common], help="write the window of a point set")
    _add_set_flags(p)
    p.add_argument("--radius", type=_positive("--radius"), required=True)
    p.add_argument("--format", choices=["json", "bin", "csv"], default="json")
    p.add_argument("--out")
    p.add_argument("--svg", help="also render the window to this SVG file")
    p.add_argument("--embed", action="store_true", help="Eisenstein sets in the real embedding")
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("render", parents=[common], help="draw one or two point-set files")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", required=True, help="output .svg or .ppm")
    p.add_argument("--embed", action="store_true")
    p.add_argument("--title")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("admissible", parents=[common], help="test a finite set for admissibility")
    _add_set_flags(p)
    p.add_argument("--points", default="")
    p.add_argument("--out")
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("locate", parents=[common], help="find t with t+P inside and t+Q outside the set")
    _add_set_flags(p)
    p.add_argument("--P", default="")
    p.add_argument("--Q", default="")
    p.add_argument("--radius", type=_positive("--radius"), default=500)
    p.add_argument("--mode", choices=["radius", "crt"], default="radius")
    p.add_argument("--out")
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("stab", parents=[common], help="search the GL(2,Z) stabiliser")
    _add_set_flags(p)
    p.add_argument("--entry-bound", type=_positive("--entry-bound"), default=2)
    p.add_argument("--radius", type=_positive("--radius"), default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stab)

    p = sub.add_parser("witness", parents=[common], help="admissible S with inadmissible image A(S)")
    p.add_argument("--ring", default="gauss",
                   choices=["gauss", "eisenstein", "sqrt2", "golden", "sqrt3"])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--matrix", required=True, help="entries a,b,c,d of [[a,b],[c,d]]")
    p.add_argument("--max-shell", type=_positive("--max-shell"), default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("density", parents=[common], help="empirical against theoretical density")
    _add_set_flags(p)
    p.add_argument("--radii", default="250,500,1000")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--plot", help="also write a convergence plot (SVG)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("entropy", parents=[common], help="topological entropy of the set")
    _add_set_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, DomainError) as exc:
        print(f"kfree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"kfree: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (ResourceError, OverflowError, MemoryError) as exc:
        print(f"kfree: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"kfree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
