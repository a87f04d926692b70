"""Stokes-filtered local systems of exponential type, in a graded-frame model.

On every arc between Stokes directions the local system is split as a direct
sum of coordinate blocks E_c, one per point c of C.  At a Stokes direction v
the matrix S_v rewrites coordinates of the arc ending at v in the frame of the
arc starting at v.  The filtration L_{<=c} on an arc is the sum of the blocks
E_{c'} with c' <=_theta c; at a vertex it is the germ space of vectors that
stay in the filtration on both sides.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .circle import (
    ArcComplex,
    FramedLocalSystem,
    SubSheaf,
    arc_complex,
    sheaf_cohomology,
    subsheaf,
)
from .errors import ValidationError
from .exactcore import GaussianRational, QMatrix, Ray, dominance, rank_and_kernel, ray_normalize, solve_or_invert

__all__ = [
    "StokesSystem",
    "FiltrationKind",
    "STRICT",
    "LAX",
    "ValidationReport",
    "stokes_rays",
    "wall_rays",
    "validate",
    "filtration_sheaf",
    "point_selection_sheaf",
    "filtration_cohomology",
    "gr_monodromy",
    "total_monodromy",
    "vertex_filtration_table",
    "random_system",
    "random_points",
    "random_invertible",
    "t_walls",
    "conjugate_by_arcs",
]

I_UNIT = GaussianRational(0, 1)


def wall_rays(c, t):
    """The two directions where c and t exchange dominance."""
    u = ray_normalize(I_UNIT * (GaussianRational.of(c) - GaussianRational.of(t)))
    return {u, u.antipode()}


def stokes_rays(points) -> set:
    rays = set()
    for i, c in enumerate(points):
        for c2 in points[i + 1:]:
            rays |= wall_rays(c, c2)
    return rays


@dataclass(frozen=True)
class FiltrationKind:
    strict: bool

    def relates(self, sign: int, same: bool) -> bool:
        """c REL t from sign = dominance(c, t, theta)."""
        if self.strict:
            return sign < 0
        return sign < 0 or same


STRICT = FiltrationKind(True)
LAX = FiltrationKind(False)


def _kind(kind):
    if isinstance(kind, FiltrationKind):
        return kind
    return FiltrationKind(bool(kind))


@dataclass
class ValidationReport:
    ok: bool
    condition: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok

    def raise_if_failed(self):
        if not self.ok:
            raise ValidationError(self.condition, self.detail)


class StokesSystem:
    """Points c_i, ranks r_i, and one transition per Stokes direction.

    For a single point there are no Stokes directions; the stored monodromy
    is placed internally on the direction (1, 0) of the two-vertex
    decomposition {(1, 0), (-1, 0)}, with the identity on (-1, 0).
    """

    def __init__(self, points, ranks, transitions=None, monodromy=None):
        pts = tuple(GaussianRational.of(c) for c in points)
        if not pts:
            raise ValidationError("empty", "a Stokes system needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValidationError("points", "points must be distinct")
        ranks = tuple(int(r) for r in ranks)
        if len(ranks) != len(pts) or any(r <= 0 for r in ranks):
            raise ValidationError("ranks", "one positive rank per point expected")
        self.points = pts
        self.ranks = ranks
        self.offsets = []
        acc = 0
        for r in ranks:
            self.offsets.append(acc)
            acc += r
        self.dim = acc
        self.stokes_complex = arc_complex(stokes_rays(pts))
        if len(pts) == 1:
            if monodromy is None:
                if transitions:
                    raise ValidationError("shape", "a single point stores a monodromy, not transitions")
                monodromy = QMatrix.identity(acc)
            if monodromy.shape != (acc, acc):
                raise ValidationError("shape", "monodromy has the wrong size")
            self.monodromy = monodromy
            self.complex = arc_complex([Ray(1, 0)])
            S = [monodromy, QMatrix.identity(acc)]
        else:
            if monodromy is not None:
                raise ValidationError("shape", "several points need transitions, not a monodromy")
            self.monodromy = None
            self.complex = self.stokes_complex
            S = self._align(transitions)
        for j, m in enumerate(S):
            if m.shape != (acc, acc):
                raise ValidationError("shape", f"transition at {self.complex.vertices[j]} has the wrong size")
        self.S = tuple(S)
        self.local = FramedLocalSystem(self.complex, acc, self.S)
        self._sheaf_cache = {}
        self._refined_cache = {}

    def _align(self, transitions):
        vs = self.complex.vertices
        if transitions is None:
            return [QMatrix.identity(self.dim) for _ in vs]
        if isinstance(transitions, Mapping):
            extra = set(transitions) - set(vs)
            if extra:
                raise ValidationError("vertices", f"transitions given at non-Stokes directions {sorted(extra, key=Ray.key)}")
            missing = [v for v in vs if v not in transitions]
            if missing:
                raise ValidationError("vertices", f"missing transitions at {missing}")
            return [transitions[v] for v in vs]
        transitions = list(transitions)
        if len(transitions) != len(vs):
            raise ValidationError("vertices", "one transition per Stokes direction expected")
        return transitions

    @property
    def n(self):
        return len(self.points)

    def transitions(self):
        """Mapping vertex ray -> S_v (for a single point, the stored monodromy only)."""
        return dict(zip(self.complex.vertices, self.S))

    def block(self, i):
        return list(range(self.offsets[i], self.offsets[i] + self.ranks[i]))

    def coords(self, idx):
        out = []
        for i in sorted(idx):
            out.extend(self.block(i))
        return out

    def selection(self, idx) -> QMatrix:
        cols = self.coords(idx)
        return QMatrix.from_columns([_unit(self.dim, j) for j in cols], self.dim)

    def below(self, i, u: Ray, strict=True):
        """Indices c' with c' <_u c_i (or <=)."""
        out = []
        for k, c in enumerate(self.points):
            if k == i:
                if not strict:
                    out.append(k)
            elif dominance(c, self.points[i], u) < 0:
                out.append(k)
        return out

    def refined_local(self, extra):
        key = frozenset(extra)
        hit = self._refined_cache.get(key)
        if hit is None:
            hit = self.local.refine(extra)
            self._refined_cache[key] = hit
        return hit

    def __eq__(self, other):
        return (
            isinstance(other, StokesSystem)
            and self.points == other.points
            and self.ranks == other.ranks
            and self.S == other.S
        )

    def __repr__(self):
        return f"StokesSystem(points={list(self.points)}, ranks={list(self.ranks)})"


def _unit(n, j):
    v = [Fraction(0)] * n
    v[j] = Fraction(1)
    return v


def _germ(S: QMatrix, Bm: QMatrix, Bp: QMatrix) -> QMatrix:
    """Basis, in the preceding frame, of {x in span Bm : S x in span Bp}."""
    _, ker = rank_and_kernel((S @ Bm).hstack(-Bp))
    return Bm @ QMatrix.from_columns([k[:Bm.cols] for k in ker], Bm.cols)


def _project(sys: StokesSystem, i, X: QMatrix) -> QMatrix:
    return X.submatrix(sys.block(i), range(X.cols))


def validate(sys: StokesSystem) -> ValidationReport:
    """Check invertibility, stalk dimensions and graded local constancy at each vertex."""
    cx = sys.complex
    m = cx.n_vertices
    for j, S in enumerate(sys.S):
        if not S.is_invertible():
            return ValidationReport(False, "singular transition", f"S_v at {cx.vertices[j]} is not invertible")
    if sys.n == 1:
        return ValidationReport(True)
    for j, v in enumerate(cx.vertices):
        um, up = cx.representatives[(j - 1) % m], cx.representatives[j]
        S = sys.S[j]
        for i in range(sys.n):
            for strict in (False, True):
                X = _germ(S, sys.selection(sys.below(i, um, strict)), sys.selection(sys.below(i, up, strict)))
                want = sum(sys.ranks[k] for k in sys.below(i, v, strict))
                if X.cols != want:
                    rel = "<" if strict else "<="
                    return ValidationReport(
                        False,
                        "stalk dimension",
                        f"at {v}: dim L_{rel}c is {X.cols}, expected {want} for c = {sys.points[i]}",
                    )
                if not strict:
                    r = sys.ranks[i]
                    if _project(sys, i, X).rank() != r or _project(sys, i, S @ X).rank() != r:
                        return ValidationReport(
                            False,
                            "graded generization",
                            f"at {v}: graded piece of {sys.points[i]} does not map isomorphically to an adjacent arc",
                        )
    return ValidationReport(True)


def point_selection_sheaf(sys: StokesSystem, extra, chooser) -> SubSheaf:
    """Subsheaf of L on the refinement by ``extra`` whose stalk on a refined arc
    with representative u is the sum of the blocks E_c for which ``chooser(i, u)``."""
    local, parent = sys.refined_local(extra)
    bases, picks = [], []
    for u in local.complex.representatives:
        idx = [i for i in range(sys.n) if chooser(i, u)]
        picks.append(idx)
        bases.append(sys.selection(idx))
    F = subsheaf(local, bases)
    F.parent = parent
    F.arc_points = picks
    return F


def t_walls(sys: StokesSystem, t) -> set:
    t = GaussianRational.of(t)
    rays = set()
    for c in sys.points:
        if c != t:
            rays |= wall_rays(c, t)
    return rays


def filtration_sheaf(sys: StokesSystem, t, kind=STRICT) -> SubSheaf:
    """L_{<t} (strict) or L_{<=t} as a cellular sheaf on the refined complex."""
    t = GaussianRational.of(t)
    kind = _kind(kind)
    key = (t, kind.strict)
    hit = sys._sheaf_cache.get(key)
    if hit is not None:
        return hit
    pts = sys.points

    def chooser(i, u):
        return kind.relates(dominance(pts[i], t, u), pts[i] == t)

    F = point_selection_sheaf(sys, t_walls(sys, t), chooser)
    sys._sheaf_cache[key] = F
    return F


def filtration_cohomology(sys: StokesSystem, t, kind=STRICT):
    return sheaf_cohomology(filtration_sheaf(sys, t, kind))


def _gr_step(sys: StokesSystem, j, i) -> QMatrix:
    cx = sys.complex
    m = cx.n_vertices
    um, up = cx.representatives[(j - 1) % m], cx.representatives[j]
    S = sys.S[j]
    X = _germ(S, sys.selection(sys.below(i, um, False)), sys.selection(sys.below(i, up, False)))
    Pm, Pp = _project(sys, i, X), _project(sys, i, S @ X)
    # any right inverse of Pm works: Pm and Pp share their kernel
    sol, _ = solve_or_invert(Pm, QMatrix.identity(sys.ranks[i]))
    return Pp @ sol


def gr_monodromy(sys: StokesSystem, i) -> QMatrix:
    """Monodromy of gr_{c_i} L, counterclockwise from arc 0."""
    if sys.n == 1:
        return sys.monodromy
    m = sys.complex.n_vertices
    out = QMatrix.identity(sys.ranks[i])
    for s in range(1, m + 1):
        out = _gr_step(sys, s % m, i) @ out
    return out


def total_monodromy(sys: StokesSystem) -> QMatrix:
    if sys.n == 1:
        return sys.monodromy
    return sys.local.monodromy(0)


def vertex_filtration_table(sys: StokesSystem):
    """Measured germ dimensions at every Stokes direction:
    [(v, ((dim L_{<=c,v}, dim L_{<c,v}) for c in C))]."""
    cx = sys.complex
    m = cx.n_vertices
    table = []
    stokes = set(sys.stokes_complex.vertices)
    for j, v in enumerate(cx.vertices):
        if v not in stokes:
            continue
        um, up = cx.representatives[(j - 1) % m], cx.representatives[j]
        row = []
        for i in range(sys.n):
            dims = []
            for strict in (False, True):
                X = _germ(sys.S[j], sys.selection(sys.below(i, um, strict)), sys.selection(sys.below(i, up, strict)))
                dims.append(X.cols)
            row.append(tuple(dims))
        table.append((v, tuple(row)))
    return table


# ---------------------------------------------------------------------------
# generators


def random_invertible(rng: random.Random, n: int, spread=2) -> QMatrix:
    """Product of random unit lower and upper triangular factors with a
    diagonal of small nonzero integers."""
    L = [[Fraction(0)] * n for _ in range(n)]
    U = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        L[i][i] = Fraction(1)
        U[i][i] = Fraction(rng.choice([1, -1, 2, -2, 1, 1]))
        for j in range(i):
            L[i][j] = Fraction(rng.randint(-spread, spread))
        for j in range(i + 1, n):
            U[i][j] = Fraction(rng.randint(-spread, spread))
    return QMatrix(L) @ QMatrix(U) if n else QMatrix.identity(0)


def _block_matrix(sys: StokesSystem, pattern, diag, rng, spread):
    """Random matrix with block (a, b) allowed only when pattern(a, b); diag
    gives the diagonal blocks."""
    r = sys.dim
    M = [[Fraction(0)] * r for _ in range(r)]
    for b in range(sys.n):
        for a in range(sys.n):
            if a == b:
                D = diag[a]
                for x, i in enumerate(sys.block(a)):
                    for y, j in enumerate(sys.block(b)):
                        M[i][j] = D[x, y]
            elif pattern(a, b):
                for i in sys.block(a):
                    for j in sys.block(b):
                        M[i][j] = Fraction(rng.randint(-spread, spread))
    return QMatrix(M)


def random_points(rng: random.Random, n: int, spread=3, halves=True):
    pts = []
    while len(pts) < n:
        den = rng.choice([1, 2]) if halves else 1
        c = GaussianRational(Fraction(rng.randint(-spread, spread), den), Fraction(rng.randint(-spread, spread), den))
        if c not in pts:
            pts.append(c)
    return pts


def random_system(rng: random.Random, points, ranks, spread=1) -> StokesSystem:
    """Valid-by-construction system.

    At a vertex v with adjacent arcs a-, a+, S_v = G+ (G-)^{-1} where G- is
    unipotent and block-triangular for the order on a-, and G+ is
    block-triangular for the order on a+ with invertible diagonal blocks.
    Both preserve their flags, so the germ spaces are exactly the blocks
    c' <=_v c.
    """
    points = [GaussianRational.of(c) for c in points]
    if len(points) == 1:
        return StokesSystem(points, ranks, monodromy=random_invertible(rng, sum(ranks), spread + 1))
    proto = StokesSystem(points, ranks)
    cx = proto.complex
    m = cx.n_vertices
    S = []
    for j in range(m):
        um, up = cx.representatives[(j - 1) % m], cx.representatives[j]

        def below(u):
            return lambda a, b: dominance(points[a], points[b], u) < 0

        Gm = _block_matrix(proto, below(um), [QMatrix.identity(r) for r in ranks], rng, spread)
        Gp = _block_matrix(proto, below(up), [random_invertible(rng, r, spread) for r in ranks], rng, spread)
        S.append(Gp @ Gm.inverse())
    return StokesSystem(points, ranks, transitions=S)


def conjugate_by_arcs(sys: StokesSystem, arc_maps: Sequence[QMatrix]) -> StokesSystem:
    """Change the frame on every arc by the given invertible matrices."""
    if sys.n == 1:
        D = arc_maps[0]
        return StokesSystem(sys.points, sys.ranks, monodromy=D @ sys.monodromy @ D.inverse())
    cx = sys.complex
    m = cx.n_vertices
    S = [arc_maps[j] @ sys.S[j] @ arc_maps[(j - 1) % m].inverse() for j in range(m)]
    return StokesSystem(sys.points, sys.ranks, transitions=S)
