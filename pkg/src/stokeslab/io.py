"""JSON documents for every domain object.

Rationals are strings "p/q" (integers are also accepted on input); Gaussian
rationals are pairs [re, im]; rays are integer pairs [x, y]; matrices are lists of rows, or
{"rows": r, "cols": c, "entries": [...]} when a dimension is zero.
Every document carries a "kind" field.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import ParseError
from .euler import ElementaryModel
from .exactcore import GaussianRational, QMatrix, Ray, format_rational, parse_rational
from .laplace import CoStokesSystem, costokes_complex
from .newton import ResidueMatrix, TwistConfig
from .spider import SpiderSheaf
from .stokes import StokesSystem

__all__ = [
    "rational_doc",
    "parse_rat",
    "gaussian_doc",
    "parse_gaussian",
    "matrix_doc",
    "parse_matrix",
    "to_doc",
    "from_doc",
    "dumps",
    "loads",
    "load",
    "save",
]

GR = GaussianRational


def rational_doc(x) -> str:
    return format_rational(x)


def parse_rat(v) -> Fraction:
    if isinstance(v, bool):
        raise ParseError(f"not a rational: {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return parse_rational(v)
    raise ParseError(f"not a rational: {v!r}")


def gaussian_doc(z):
    z = GR.of(z)
    return [format_rational(z.re), format_rational(z.im)]


def parse_gaussian(v) -> GaussianRational:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return GR(parse_rat(v[0]), parse_rat(v[1]))
    return GR(parse_rat(v), 0)


def ray_doc(u: Ray):
    return [u.x, u.y]


def parse_ray(v) -> Ray:
    if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(a, int) for a in v)):
        raise ParseError(f"not a ray: {v!r}")
    try:
        return Ray(v[0], v[1])
    except Exception as exc:
        raise ParseError(f"not a ray: {v!r}") from exc


def matrix_doc(M: QMatrix):
    rows = [[format_rational(a) for a in row] for row in M.tolist()]
    if M.rows and M.cols:
        return rows
    return {"rows": M.rows, "cols": M.cols, "entries": rows}


def parse_matrix(v) -> QMatrix:
    if isinstance(v, list):
        v = {"rows": len(v), "cols": len(v[0]) if v else 0, "entries": v}
    try:
        r, c, rows = int(v["rows"]), int(v["cols"]), v["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix: {v!r}") from exc
    if len(rows) != r or any(len(row) != c for row in rows):
        raise ParseError("matrix entries do not match the declared shape")
    if r == 0 or c == 0:
        return QMatrix.zeros(r, c)
    return QMatrix([[parse_rat(a) for a in row] for row in rows])


def _field(doc, key):
    try:
        return doc[key]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field {key!r}") from exc


# ---------------------------------------------------------------------------
# per-kind conversion


def _stokes_to(sys):
    doc = {"kind": "stokes_system", "points": [gaussian_doc(c) for c in sys.points], "ranks": list(sys.ranks)}
    if sys.n == 1:
        doc["monodromy"] = matrix_doc(sys.monodromy)
    else:
        doc["transitions"] = [{"vertex": ray_doc(v), "matrix": matrix_doc(S)} for v, S in zip(sys.complex.vertices, sys.S)]
    return doc


def _stokes_from(doc):
    points = [parse_gaussian(c) for c in _field(doc, "points")]
    ranks = _field(doc, "ranks")
    if "monodromy" in doc:
        return StokesSystem(points, ranks, monodromy=parse_matrix(doc["monodromy"]))
    trans = {parse_ray(t["vertex"]): parse_matrix(t["matrix"]) for t in _field(doc, "transitions")}
    return StokesSystem(points, ranks, transitions=trans)


def _spider_to(sp):
    return {
        "kind": "spider_sheaf",
        "points": [gaussian_doc(c) for c in sp.points],
        "psi_dim": sp.psi_dim,
        "stalks": list(sp.phi),
        "monodromies": [matrix_doc(T) for T in sp.T],
        "gen_maps": [matrix_doc(g) for g in sp.g],
        "cut": ray_doc(sp.cut),
        "base": gaussian_doc(sp.base),
    }


def _spider_from(doc):
    cut = parse_ray(doc["cut"]) if "cut" in doc else None
    base = parse_gaussian(doc["base"]) if "base" in doc else None
    return SpiderSheaf(
        [parse_gaussian(c) for c in _field(doc, "points")],
        _field(doc, "psi_dim"),
        [parse_matrix(m) for m in _field(doc, "monodromies")],
        _field(doc, "stalks"),
        [parse_matrix(m) for m in _field(doc, "gen_maps")],
        cut=cut,
        base=base,
    )


def _costokes_to(co):
    return {
        "kind": "costokes_system",
        "points": [gaussian_doc(c) for c in co.points],
        "dim": co.dim,
        "arcs": [
            {"representative": ray_doc(u), "subspaces": [matrix_doc(S) for S in row]}
            for u, row in zip(co.complex.representatives, co.subspaces)
        ],
        "transitions": [{"vertex": ray_doc(v), "matrix": matrix_doc(M)} for v, M in zip(co.complex.vertices, co.transitions)],
    }


def _costokes_from(doc):
    points = [parse_gaussian(c) for c in _field(doc, "points")]
    cx = costokes_complex(points)
    subs = [[parse_matrix(m) for m in a["subspaces"]] for a in _field(doc, "arcs")]
    trans = [parse_matrix(t["matrix"]) for t in _field(doc, "transitions")]
    return CoStokesSystem(points, cx, int(_field(doc, "dim")), subs, trans)


def _model_to(m):
    return {
        "kind": "elementary_model",
        "ell": m.ell,
        "e": list(m.e),
        "phi_leading": gaussian_doc(m.phi_leading),
        "alpha": [gaussian_doc(a) for a in m.alpha],
        "rank": m.rank,
    }


def _model_from(doc):
    alpha = tuple(parse_gaussian(a) for a in doc.get("alpha", []))
    return ElementaryModel(int(_field(doc, "ell")), tuple(_field(doc, "e")), parse_gaussian(_field(doc, "phi_leading")),
                           alpha, int(doc.get("rank", 1)))


def _twist_to(cfg):
    return {
        "kind": "twist_config",
        "ell": cfg.ell,
        "phi": {"exponent": list(cfg.phi_exp), "unit": gaussian_doc(cfg.phi_unit)},
        "eta": [{"exponent": list(e), "unit": gaussian_doc(u)} for e, u in cfg.eta],
    }


def _twist_from(doc):
    phi = _field(doc, "phi")
    eta = tuple((tuple(t["exponent"]), parse_gaussian(t["unit"])) for t in doc.get("eta", []))
    return TwistConfig(int(_field(doc, "ell")), tuple(phi["exponent"]), parse_gaussian(phi["unit"]), eta)


def _residue_to(rm):
    return {
        "kind": "residue_matrix",
        "res": [[gaussian_doc(x) for x in row] for row in rm.res],
        "A": [[gaussian_doc(x) for x in s] for s in rm.A],
        "d": rm.d,
    }


def _residue_from(doc):
    res = tuple(tuple(parse_gaussian(x) for x in row) for row in _field(doc, "res"))
    A = tuple(tuple(parse_gaussian(x) for x in s) for s in _field(doc, "A"))
    return ResidueMatrix(res, A, int(_field(doc, "d")))


_READERS = {
    "stokes_system": _stokes_from,
    "spider_sheaf": _spider_from,
    "costokes_system": _costokes_from,
    "elementary_model": _model_from,
    "twist_config": _twist_from,
    "residue_matrix": _residue_from,
}


def to_doc(obj):
    writers = [
        (StokesSystem, _stokes_to),
        (SpiderSheaf, _spider_to),
        (CoStokesSystem, _costokes_to),
        (ElementaryModel, _model_to),
        (TwistConfig, _twist_to),
        (ResidueMatrix, _residue_to),
    ]
    for cls, fn in writers:
        if isinstance(obj, cls):
            return fn(obj)
    raise TypeError(f"no document form for {type(obj).__name__}")


def from_doc(doc):
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind not in _READERS:
        raise ParseError(f"unknown document kind {kind!r}")
    try:
        return _READERS[kind](doc)
    except ParseError:
        raise
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"malformed {kind} document: {exc}") from exc


def dumps(obj) -> str:
    doc = obj if isinstance(obj, dict) else to_doc(obj)
    return json.dumps(doc, indent=2) + "\n"


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return from_doc(doc)


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def save(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
