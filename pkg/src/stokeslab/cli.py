"""Command-line driver.

Exit codes: 0 pass, 1 I/O or parse error, 2 semantic failure, 3 internal
invariant breach.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import io
from .errors import InternalInvariantError, ParseError, StokesLabError
from .euler import (
    ElementaryModel,
    StratumDatum,
    check_triple_equality,
    chi_stratified,
    classical_irregularity,
    irr_elementary,
    ramified_irr,
)
from .exactcore import GaussianRational, parse_rational
from .laplace import CoStokesSystem, costokes_to_stokes, laplace_bwd, laplace_fwd, roundtrip_report, spider_roundtrip_report
from .newton import (
    ResidueMatrix,
    TwistConfig,
    integral_coef_check,
    is_generic,
    newton_polyhedron,
    resonance_relation,
    twisted_np,
    vertex_hyperplanes,
)
from .spider import SpiderSheaf, plane_cohomology, validate_spider
from .stokes import LAX, STRICT, StokesSystem, filtration_cohomology, validate
from .suites import SUITES, RunConfig, run_suite

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let values such as -1/2 or -2,0 pass as arguments rather than options
        self._negative_number_matcher = re.compile(r"^-\d[\d/,]*$")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _gaussian(text) -> GaussianRational:
    parts = text.split(",")
    if len(parts) == 1:
        return GaussianRational(parse_rational(parts[0]), 0)
    if len(parts) == 2:
        return GaussianRational(parse_rational(parts[0]), parse_rational(parts[1]))
    raise ParseError(f"not a Gaussian rational: {text!r}")


def _intvec(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ParseError(f"not an integer vector: {text!r}") from exc


def _out(text):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _err(text):
    sys.stderr.write(text + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args):
    obj = io.load(args.path)
    if isinstance(obj, StokesSystem):
        rep = validate(obj)
    elif isinstance(obj, SpiderSheaf):
        rep = validate_spider(obj)
    elif isinstance(obj, CoStokesSystem):
        rep = obj.validate()
    else:
        raise ParseError("validate expects a Stokes, spider or co-Stokes document")
    if rep.ok:
        _out("valid")
        return EXIT_OK
    _out(f"invalid: {rep.condition}: {rep.detail}")
    return EXIT_SEMANTIC


def _require_valid_stokes(obj):
    if not isinstance(obj, StokesSystem):
        raise ParseError("expected a stokes_system document")
    rep = validate(obj)
    if not rep.ok:
        _err(f"invalid: {rep.condition}: {rep.detail}")
        return False
    return True


def cmd_laplace(args):
    obj = io.load(args.path)
    if args.direction == "fwd":
        if not _require_valid_stokes(obj):
            return EXIT_SEMANTIC
        sp = laplace_fwd(obj)
        _out(io.dumps(sp))
        _err(f"psi_dim: {sp.psi_dim}")
        _err(f"stalks: {list(sp.phi)}")
        _err(f"plane cohomology: {list(plane_cohomology(sp))}")
        return EXIT_OK
    if not isinstance(obj, SpiderSheaf):
        raise ParseError("expected a spider_sheaf document")
    rep = validate_spider(obj)
    if not rep.ok:
        _err(f"invalid: {rep.condition}: {rep.detail}")
        return EXIT_SEMANTIC
    h = plane_cohomology(obj)
    if h != (0, 0, 0):
        _err(f"plane cohomology {list(h)} does not vanish")
        return EXIT_SEMANTIC
    co = laplace_bwd(obj)
    st = costokes_to_stokes(co)
    _out(io.dumps(co if args.costokes else st))
    _err(f"fiber dimension: {co.dim}")
    _err(f"graded ranks: {list(st.ranks)}")
    _err(f"reconstructed system: {'valid' if validate(st).ok else 'invalid'}")
    return EXIT_OK


def cmd_roundtrip(args):
    obj = io.load(args.path)
    if isinstance(obj, StokesSystem):
        if not _require_valid_stokes(obj):
            return EXIT_SEMANTIC
        rep = roundtrip_report(obj)
    elif isinstance(obj, SpiderSheaf):
        rep = spider_roundtrip_report(obj)
    else:
        raise ParseError("roundtrip expects a Stokes or spider document")
    _out(rep.to_text())
    return EXIT_OK if rep.verdict == "pass" else EXIT_SEMANTIC


def cmd_cohomology(args):
    obj = io.load(args.path)
    if not _require_valid_stokes(obj):
        return EXIT_SEMANTIC
    t = GaussianRational(parse_rational(args.t[0]), parse_rational(args.t[1]))
    kind = LAX if args.lax else STRICT
    h0, h1 = filtration_cohomology(obj, t, kind).dims
    _out(f"t: {t}")
    _out(f"kind: {'lax' if args.lax else 'strict'}")
    _out(f"h0: {h0}")
    _out(f"h1: {h1}")
    return EXIT_OK


def cmd_euler(args):
    if args.op == "chi":
        strata = []
        for s in args.items:
            try:
                a, b = s.split(":")
                strata.append(StratumDatum(int(a), int(b)))
            except ValueError as exc:
                raise ParseError(f"stratum expected as chi_local:chi_stratum, got {s!r}") from exc
        _out(f"chi: {chi_stratified(strata)}")
        return EXIT_OK
    if len(args.items) != 1:
        raise ParseError("expected one model document")
    m = io.load(args.items[0])
    if not isinstance(m, ElementaryModel):
        raise ParseError("expected an elementary_model document")
    if args.op == "irr":
        _out(f"chi convention: {irr_elementary(m)}")
        _out(f"classical irregularity: {classical_irregularity(m)}")
        if args.ramify:
            val, deg = ramified_irr(m, _intvec(args.ramify))
            _out(f"ramified: {val} (degree {deg})")
        return EXIT_OK
    beta = [_gaussian(b) for b in args.beta] if args.beta else [GaussianRational(0)] * m.ell
    rep = check_triple_equality(m, beta)
    for k, v in rep.values.items():
        _out(f"{k}: {v}")
    _out(f"equal: {'yes' if rep.ok else 'no'}")
    return EXIT_OK if rep.ok else EXIT_SEMANTIC


def cmd_newton(args):
    if args.op == "hull":
        P = newton_polyhedron([_intvec(v) for v in args.items])
        for v in P.vertices:
            _out("vertex: (" + ", ".join(str(x) for x in v) + ")")
        return EXIT_OK
    if args.op == "nonres":
        res = [_gaussian(r) for r in args.items]
        m = resonance_relation(res)
        if m is None:
            _out("nonresonant")
            return EXIT_OK
        _out("resonant: m = (" + ", ".join(str(x) for x in m) + ")")
        return EXIT_SEMANTIC
    if len(args.items) != 1:
        raise ParseError("expected one document")
    obj = io.load(args.items[0])
    a = [_gaussian(x) for x in args.a] if args.a else []
    if args.op == "generic":
        if not isinstance(obj, TwistConfig):
            raise ParseError("expected a twist_config document")
        hyps = vertex_hyperplanes(obj)
        for h in hyps:
            _out("hyperplane at (" + ", ".join(str(x) for x in h.vertex) + "): " + h.describe())
        if not args.a:
            return EXIT_OK
        gen = is_generic(obj, a)
        _out(f"generic: {'yes' if gen else 'no'}")
        for v in twisted_np(obj, a).vertices:
            _out("twisted vertex: (" + ", ".join(str(x) for x in v) + ")")
        return EXIT_OK if gen else EXIT_SEMANTIC
    if not isinstance(obj, ResidueMatrix):
        raise ParseError("expected a residue_matrix document")
    res = integral_coef_check(obj, a)
    for i, alpha, v in res.violated:
        _out(f"violated: component {i} alpha {alpha} value {v}")
    for i in res.degenerate:
        _out(f"degenerate form: component {i}")
    _out(f"pass: {'yes' if res.ok else 'no'}")
    return EXIT_OK if res.ok else EXIT_SEMANTIC


def cmd_suite(args):
    cfg = RunConfig(args.seed, args.cases, args.depth, args.format)
    rep = run_suite(args.name, cfg)
    if args.format == "json":
        doc = {"suite": rep.name, "seed": rep.seed, "cases": rep.lines, "passed": rep.passed, "failed": rep.failed,
               "verdict": "pass" if rep.ok else "fail"}
        _out(json.dumps(doc, indent=2))
    else:
        _out(rep.to_text())
    return EXIT_OK if rep.ok else EXIT_SEMANTIC


# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="stokeslab", description="Exact Stokes data, spider data and the topological Laplace transform.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("validate", help="validate a Stokes, spider or co-Stokes document")
    q.add_argument("path")
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("laplace", help="forward or backward transform")
    q.add_argument("direction", choices=["fwd", "bwd"])
    q.add_argument("path")
    q.add_argument("--costokes", action="store_true", help="bwd: emit the co-Stokes document instead of the Stokes system")
    q.set_defaults(func=cmd_laplace)

    q = sub.add_parser("roundtrip", help="round-trip invariant battery")
    q.add_argument("path")
    q.set_defaults(func=cmd_roundtrip)

    q = sub.add_parser("cohomology", help="cohomology of L_{<t} or L_{<=t}")
    q.add_argument("path")
    q.add_argument("--t", nargs=2, metavar=("RE", "IM"), required=True)
    g = q.add_mutually_exclusive_group()
    g.add_argument("--strict", action="store_true", default=True)
    g.add_argument("--lax", action="store_true")
    q.set_defaults(func=cmd_cohomology)

    q = sub.add_parser("euler", help="irregularity and Euler characteristic calculators")
    q.add_argument("op", choices=["irr", "chi", "triple"])
    q.add_argument("items", nargs="*", help="model document (irr, triple) or strata chi_local:chi_stratum (chi)")
    q.add_argument("--ramify", help="irr: ramification orders d1,d2,...")
    q.add_argument("--beta", nargs="*", help="triple: twist residues re,im per branch")
    q.set_defaults(func=cmd_euler)

    q = sub.add_parser("newton", help="Newton polyhedra and residue conditions")
    q.add_argument("op", choices=["hull", "generic", "forms", "nonres"])
    q.add_argument("items", nargs="*", help="vectors (hull), residues (nonres) or a document (generic, forms)")
    q.add_argument("--a", nargs="*", help="coefficients re,im")
    q.set_defaults(func=cmd_newton)

    q = sub.add_parser("suite", help="seeded randomized suite")
    q.add_argument("name", choices=sorted(SUITES))
    q.add_argument("--seed", type=int, default=1)
    q.add_argument("--cases", type=int)
    q.add_argument("--depth", type=int)
    q.add_argument("--format", choices=["human", "json"], default="human")
    q.set_defaults(func=cmd_suite)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors (and --help) end here; report the code to the caller
        return exc.code
    try:
        return args.func(args)
    except ParseError as exc:
        _err(f"parse error: {exc}")
        return EXIT_PARSE
    except InternalInvariantError as exc:
        _err(f"internal invariant breach: {exc}")
        return EXIT_INTERNAL
    except StokesLabError as exc:
        _err(f"error: {exc}")
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
