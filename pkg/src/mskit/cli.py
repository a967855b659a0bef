"""Command-line interface: ``mskit classify|norm|experiment|diagram|sweep``.

Exit codes: 0 success, 2 usage or invalid input, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from typing import List, Optional

from . import classifier as C
from .diagrams import CANONICAL, PREDICATES, QueryTemplate, canonical_grid, grid_sweep, render_svg
from .models import ModelKind, ModelSpec, agreement_batch, generate, membership_experiment, \
    strictness_experiment
from .params import InvalidDescriptor, SpaceDescriptor, parse_number
from .seqnorm import (FROM_J_PLUS, FROM_ZERO, CoefficientArray, CoefficientFileError,
                      growth_analyze, growth_series)

EXIT_OK, EXIT_USAGE, EXIT_INTERNAL = 0, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_CLASSIFY = ("linfty", "continuous", "l1loc", "bmo", "lr", "delta", "chi", "functional",
             "mult-algebra", "truncation", "haar", "fatou", "smooth-multiplier",
             "diffeomorphism", "half-space-extension", "trace", "envelope", "embeds",
             "compactness")

_PROPS = {
    "mult-algebra": C.Property.MULTIPLICATION_ALGEBRA,
    "truncation": C.Property.TRUNCATION,
    "haar": C.Property.HAAR_BASIS,
    "fatou": C.Property.FATOU,
    "smooth-multiplier": C.Property.SMOOTH_MULTIPLIER,
    "diffeomorphism": C.Property.DIFFEOMORPHISM,
    "half-space-extension": C.Property.HALF_SPACE_EXTENSION,
}


def _space_args(p: argparse.ArgumentParser, suffix: str = "", required: bool = True) -> None:
    help_sfx = " of the target space" if suffix else ""
    p.add_argument(f"--family{suffix}", default="B", help="B or F" + help_sfx)
    p.add_argument(f"--flavor{suffix}", default="sub", help="sub, sup or classical" + help_sfx)
    p.add_argument(f"--s{suffix}", help="smoothness, e.g. 3/5" + help_sfx)
    p.add_argument(f"--p{suffix}", help="integrability, 'inf' allowed" + help_sfx)
    p.add_argument(f"--q{suffix}", help="fine index; omit to get conditions on q" + help_sfx)
    p.add_argument(f"--rho{suffix}", help="slope parameter in [-n, 0]" + help_sfx)
    if not suffix:
        p.add_argument("--n", help="dimension (integer >= 1)")


def _dimension(args) -> int:
    if args.n is None:
        raise UsageError("--n is required: the dimension n must be an integer >= 1")
    try:
        n = int(args.n)
    except ValueError:
        raise UsageError(f"dimension n must be an integer >= 1 (got {args.n!r})") from None
    if n < 1:
        raise UsageError(f"dimension n must be an integer >= 1 (got {n})")
    return n


def _descriptor(args, suffix: str = "") -> SpaceDescriptor:
    g = lambda name: getattr(args, name + suffix.replace("-", "_"))
    n = _dimension(args)
    for name in ("s", "p"):
        if g(name) is None:
            raise UsageError(f"--{name}{suffix} is required")
    flavor = g("flavor")
    rho = g("rho")
    if str(flavor).lower() != "classical" and rho is None:
        raise UsageError(f"--rho{suffix} is required for the {flavor} flavor")
    return SpaceDescriptor(str(g("family")).upper(), flavor, g("s"), g("p"), g("q"), rho, n)


def _emit(obj, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")
    else:
        import csv
        wr = csv.writer(out, lineterminator="\n")
        wr.writerow(list(obj))
        wr.writerow([json.dumps(v, ensure_ascii=False) if isinstance(v, (list, dict)) else v
                     for v in obj.values()])


# ---------------------------------------------------------------------------
# subcommands

def cmd_classify(args, out) -> int:
    d = _descriptor(args)
    pr = args.predicate
    ground = C.Ground.DOMAIN if args.ground == "domain" else C.Ground.RN
    if pr in ("linfty", "continuous", "l1loc", "bmo", "lr"):
        if pr == "lr":
            if args.r is None:
                raise UsageError("--r is required for the lr predicate")
            tgt = C.TargetSpace.lr(args.r)
        else:
            tgt = {"linfty": C.TargetSpace.linfty, "continuous": C.TargetSpace.continuous,
                   "l1loc": C.TargetSpace.l1loc, "bmo": C.TargetSpace.bmo}[pr]()
        result = C.embeds(C.EmbeddingQuery(d, tgt, ground)).to_json()
    elif pr == "delta":
        result = C.member(C.Element.DELTA, d).to_json()
    elif pr == "chi":
        result = C.member(C.Element.CHI_Q, d).to_json()
    elif pr == "functional":
        result = C.functional_chiQ(d).to_json()
    elif pr in _PROPS:
        result = C.check_property(d, _PROPS[pr]).to_json()
    elif pr == "trace":
        result = C.trace(d).to_json()
    elif pr == "envelope":
        result = C.growth_envelope(d, ground).to_json()
    else:
        target = _descriptor(args, "2")
        mode = C.Mode.COMPACT if (args.compact or pr == "compactness") else C.Mode.CONTINUOUS
        q = C.EmbeddingQuery(d, target, ground, mode)
        if pr == "embeds":
            result = C.embeds(q).to_json()
        else:
            result = C.compactness_exponents(q).to_json()
    _emit(result, args.format, out)
    return EXIT_OK


def _model_array(args, n: int) -> CoefficientArray:
    kinds = {"delta": ModelKind.DELTA, "boundary": ModelKind.BOUNDARY,
             "single": ModelKind.SINGLE_CUBE, "random": ModelKind.RANDOM_SPARSE}
    if args.file:
        try:
            a = CoefficientArray.load(args.file)
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
        if args.n is not None and a.n != n:
            raise UsageError(f"--n {n} does not match the file's dimension {a.n}")
        return a
    if args.model is None:
        raise UsageError("give --model or --file")
    m0 = tuple(int(x) for x in args.m0.split(",")) if args.m0 else ()
    spec = ModelSpec(kinds[args.model], n, args.jmax, args.j0, m0, args.seed, args.density)
    return generate(spec)


def cmd_norm(args, out) -> int:
    if args.file and args.n is None:
        n = None
    else:
        n = _dimension(args)
    a = _model_array(args, n)
    if args.s is None or args.p is None or args.q is None:
        raise UsageError("--s, --p and --q are required")
    flavor = args.flavor.capitalize()
    rho = None
    if flavor != "Classical":
        if args.rho is None:
            raise UsageError(f"--rho is required for the {args.flavor} flavor")
        rho = parse_number(args.rho)
    terms, cum = growth_series(a, args.s, args.p, args.q, rho, flavor, args.convention)
    report = growth_analyze(terms, args.rate_tolerance, args.fit_floor, cum)
    value = float(cum[-1]) if len(cum) else 0.0
    if args.format == "json":
        # NaN and infinite rates are not JSON; report them as null
        rate = report.fitted_rate if math.isfinite(report.fitted_rate) else None
        out.write(json.dumps({"value": value, "fitted_rate": rate,
                              "r_squared": report.r_squared, "verdict": report.verdict,
                              "per_level": report.per_level, "cumulative": report.cumulative},
                             sort_keys=True) + "\n")
    else:
        out.write(report.to_csv())
        out.write(f"# value={value!r} " + report.summary()[2:] + "\n")
    return EXIT_OK


def cmd_experiment(args, out) -> int:
    if args.kind == "batch":
        element = C.Element.DELTA if args.element == "delta" else C.Element.CHI_Q
        ns = tuple(int(x) for x in args.n_values.split(","))
        summary = agreement_batch(element, args.count, ns, args.jmax, args.seed)
        if args.format == "json":
            out.write(json.dumps(summary.to_json(), sort_keys=True) + "\n")
        else:
            out.write(summary.to_csv())
            out.write("# " + json.dumps(summary.to_json(), sort_keys=True) + "\n")
        return EXIT_OK
    d = _descriptor(args)
    if args.kind == "strictness":
        rep = strictness_experiment(d, args.jmax)
        obj = rep.to_json()
        obj["descriptor"] = {k: str(v) for k, v in obj["descriptor"].items()}
        out.write(json.dumps(obj, sort_keys=True) + "\n")
        return EXIT_OK
    kind = ModelKind.DELTA if args.element == "delta" else ModelKind.BOUNDARY
    tops = [int(x) for x in args.jmax_list.split(",")] if args.jmax_list else []
    rec = membership_experiment(ModelSpec(kind, d.n, args.jmax), d, tops)
    row = rec.row()
    if args.format == "json":
        row["truncations"] = {str(k): v for k, v in rec.truncations.items()}
    _emit(row, args.format, out)
    return EXIT_OK


def _template(args) -> QueryTemplate:
    n = _dimension(args)
    flavor = args.flavor
    rho = None if str(flavor).lower() == "classical" else args.rho
    if rho is None and str(flavor).lower() != "classical":
        raise UsageError("--rho is required")
    return QueryTemplate(args.predicate, str(args.family).upper(), flavor, args.q or "2",
                         rho if rho is not None else -n, n)


def _ranges(args):
    try:
        xr = tuple(parse_number(x) for x in args.xrange.split(","))
        sr = tuple(parse_number(x) for x in args.srange.split(","))
    except (ValueError, InvalidDescriptor) as exc:
        raise UsageError(f"bad range: {exc}") from None
    if len(xr) != 2 or len(sr) != 2:
        raise UsageError("ranges are given as lo,hi")
    return xr, sr


def cmd_diagram(args, out) -> int:
    if args.canonical:
        grid = canonical_grid(args.canonical)
    else:
        xr, sr = _ranges(args)
        grid = grid_sweep(_template(args), xr, sr, args.resolution)
    svg = render_svg(grid)
    if args.out in (None, "-"):
        out.write(svg)
        return EXIT_OK
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    xr, sr = _ranges(args)
    grid = grid_sweep(_template(args), xr, sr, args.resolution)
    if args.format == "json":
        out.write(json.dumps(grid.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
    else:
        out.write(grid.to_csv())
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mskit", description="Morrey smoothness space toolkit")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("classify", help="decide a property of one space")
    c.add_argument("--predicate", required=True, choices=_CLASSIFY)
    _space_args(c)
    _space_args(c, "2")
    c.add_argument("--r", help="exponent for the lr predicate")
    c.add_argument("--ground", choices=("rn", "domain"), default="rn")
    c.add_argument("--compact", action="store_true", help="ask for a compact embedding")
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(func=cmd_classify)

    nm = sub.add_parser("norm", help="sequence norms of a model or coefficient file")
    src = nm.add_mutually_exclusive_group()
    src.add_argument("--model", choices=("delta", "boundary", "single", "random"))
    src.add_argument("--file", help="JSON-lines coefficient file")
    nm.add_argument("--n")
    nm.add_argument("--s")
    nm.add_argument("--p")
    nm.add_argument("--q")
    nm.add_argument("--rho")
    nm.add_argument("--flavor", choices=("sub", "sup", "classical"), default="sub")
    nm.add_argument("--convention", choices=(FROM_J_PLUS, FROM_ZERO), default=FROM_J_PLUS)
    nm.add_argument("--jmax", type=int, default=14)
    nm.add_argument("--j0", type=int, default=0)
    nm.add_argument("--m0", help="comma-separated cube position for --model single")
    nm.add_argument("--seed", type=int, default=0)
    nm.add_argument("--density", type=float, default=0.01)
    nm.add_argument("--rate-tolerance", type=float, default=0.02)
    nm.add_argument("--fit-floor", type=float, default=0.98)
    nm.add_argument("--format", choices=("json", "csv"), default="csv")
    nm.set_defaults(func=cmd_norm)

    ex = sub.add_parser("experiment", help="membership, strictness or batch agreement runs")
    ex.add_argument("--kind", choices=("membership", "strictness", "batch"),
                    default="membership")
    ex.add_argument("--element", choices=("delta", "chi"), default="delta")
    _space_args(ex)
    ex.add_argument("--jmax", type=int, default=16)
    ex.add_argument("--jmax-list", help="comma-separated truncation levels to report")
    ex.add_argument("--count", type=int, default=200)
    ex.add_argument("--n-values", default="1,2,3")
    ex.add_argument("--seed", type=int, default=0)
    ex.add_argument("--format", choices=("json", "csv"), default="json")
    ex.set_defaults(func=cmd_experiment)

    for name, func, help_ in (("diagram", cmd_diagram, "SVG region diagram"),
                              ("sweep", cmd_sweep, "grid of verdicts as CSV or JSON")):
        g = sub.add_parser(name, help=help_)
        g.add_argument("--predicate", choices=PREDICATES, default="linfty")
        g.add_argument("--family", default="B")
        g.add_argument("--flavor", default="sup")
        g.add_argument("--q")
        g.add_argument("--rho")
        g.add_argument("--n")
        g.add_argument("--xrange", default="0,2", help="1/p range lo,hi")
        g.add_argument("--srange", default="-1,3", help="s range lo,hi")
        g.add_argument("--resolution", type=int, default=40)
        if name == "diagram":
            g.add_argument("--canonical", choices=sorted(CANONICAL))
            g.add_argument("--out", help="output path, '-' for standard output")
        else:
            g.add_argument("--format", choices=("json", "csv"), default="csv")
        g.set_defaults(func=func)
    return ap


def _glue_negatives(argv: List[str]) -> List[str]:
    """Turn ``--s -3/4`` into ``--s=-3/4``; argparse would read -3/4 as an option."""
    out: List[str] = []
    for tok in argv:
        if (out and re.match(r"^-(\d|\.\d|inf)", tok) and out[-1].startswith("--")
                and "=" not in out[-1]):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    err = sys.stderr
    argv = _glue_negatives(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("choose a subcommand: classify, norm, experiment, diagram, sweep")
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"mskit: error: {exc}\n")
        return EXIT_USAGE
    except CoefficientFileError as exc:
        err.write(f"mskit: malformed coefficient file: {exc}\n")
        return EXIT_USAGE
    except (InvalidDescriptor, ValueError) as exc:
        err.write(f"mskit: invalid input: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - last resort
        err.write(f"mskit: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
