"""Topological Laplace transform between Stokes data and spider data.

Forward: the fiber at t of the pushed-forward family is H^1(S^1, L_{<t});
moving t along a short segment [t0, t1] is realized by the subsheaf K whose
arc stalks keep the blocks c with c <_theta t0 and c <_theta t1.  Both
inclusions K -> L_{<t_j} induce isomorphisms on H^1, so
H^1(K -> L_{<t1}) o H^1(K -> L_{<t0})^{-1} is the parallel transport.

Backward: the fiber over theta of the co-Stokes filtration at s is the space
of sections over the closed half-plane {Re[(t - s) e^{-i theta}] >= 0}, read
at a far anchor point in direction theta.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .circle import FramedLocalSystem, arc_complex, sheaf_cohomology, subsheaf
from .errors import DegenerateError, InternalInvariantError, ValidationError
from .exactcore import (
    GaussianRational,
    QMatrix,
    Ray,
    ccw_strictly_between,
    column_basis,
    dominance,
    extend_basis,
    rank_and_kernel,
    ray_normalize,
    solve_or_invert,
)
from .similarity import elementary_divisors, similarity_invariants
from .spider import (
    SpiderSheaf,
    choose_base,
    choose_cut,
    halfplane_sections,
    loop_monodromy,
    plane_cohomology,
    validate_spider,
)
from .stokes import (
    STRICT,
    StokesSystem,
    filtration_sheaf,
    gr_monodromy,
    point_selection_sheaf,
    stokes_rays,
    t_walls,
    total_monodromy,
    ValidationReport,
    validate,
    vertex_filtration_table,
    wall_rays,
)

__all__ = [
    "DEFAULT_DEPTH",
    "STEP_AUDIT",
    "segment_is_safe",
    "transport_step",
    "transport",
    "transport_path",
    "laplace_fwd",
    "CoStokesSystem",
    "costokes_complex",
    "laplace_bwd",
    "costokes_sheaf",
    "costokes_to_stokes",
    "antipodal_reindex",
    "RoundTripReport",
    "roundtrip_report",
    "spider_roundtrip_report",
    "find_filtered_isomorphism",
]

GR = GaussianRational
DEFAULT_DEPTH = 40

# Counters for the step checks; every step either passes both checks or raises.
STEP_AUDIT = {"steps": 0, "checked": 0}


def max_depth():
    v = os.environ.get("STOKESLAB_DEPTH")
    return int(v) if v else DEFAULT_DEPTH


# ---------------------------------------------------------------------------
# transport of H^1(S^1, L_{<t})


def _wall(c, t):
    return ray_normalize(GR(0, 1) * (GR.of(c) - GR.of(t)))


def segment_is_safe(sys: StokesSystem, t0, t1) -> bool:
    """For every c, the sector swept by the wall of (c, s), s in [t0, t1],
    has no vertex of the union arrangement in its interior."""
    verts = set(sys.complex.vertices) | t_walls(sys, t0) | t_walls(sys, t1)
    for c in sys.points:
        if c == t0 or c == t1:
            continue
        u0, u1 = _wall(c, t0), _wall(c, t1)
        if u0 == u1:
            continue
        cr = u0.x * u1.y - u0.y * u1.x
        lo, hi = (u0, u1) if cr > 0 else (u1, u0)
        if any(ccw_strictly_between(lo, w, hi) for w in verts):
            return False
    return True


def _h1_push(sys: StokesSystem, K, L) -> QMatrix:
    """H^1 map of K -> L when every arc of K lies in an arc of L and carries a
    subset of its blocks (frames are those of the original arcs)."""
    ck, cl = sheaf_cohomology(K), sheaf_cohomology(L)
    pos = []
    for k in range(K.complex.n_arcs):
        p = L.complex.arc_containing(K.complex.representatives[k])
        lcoords = sys.coords(L.arc_points[p])
        where = {g: cl.aoff[p] + a for a, g in enumerate(lcoords)}
        pos.extend(where[g] for g in sys.coords(K.arc_points[k]))
    cols = []
    for h in ck.h1_positions:
        v = [Fraction(0)] * cl.n1
        v[pos[h]] = Fraction(1)
        cols.append(cl.h1_coords(v))
    return QMatrix.from_columns(cols, cl.h1_dim)


def sandwich(sys: StokesSystem, t0, t1):
    """The intersection sheaf of a segment and its two H^1 comparison maps."""
    t0, t1 = GR.of(t0), GR.of(t1)
    pts = sys.points

    def chooser(i, u):
        return dominance(pts[i], t0, u) < 0 and dominance(pts[i], t1, u) < 0

    K = point_selection_sheaf(sys, t_walls(sys, t0) | t_walls(sys, t1), chooser)
    A0 = _h1_push(sys, K, filtration_sheaf(sys, t0, STRICT))
    A1 = _h1_push(sys, K, filtration_sheaf(sys, t1, STRICT))
    return K, A0, A1


def transport_step(sys: StokesSystem, t0, t1) -> QMatrix:
    _, A0, A1 = sandwich(sys, t0, t1)
    STEP_AUDIT["steps"] += 1
    if not (A0.is_invertible() and A1.is_invertible()):
        raise InternalInvariantError(f"intersection sheaf of [{t0}, {t1}] does not compare isomorphically")
    STEP_AUDIT["checked"] += 1
    return A1 @ A0.inverse()


def _on_segment(c, a, b):
    if a == b:
        return c == a
    cr = (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
    if cr != 0:
        return False
    dot = (c.re - a.re) * (b.re - a.re) + (c.im - a.im) * (b.im - a.im)
    return 0 <= dot <= (b - a).norm()


def transport(sys: StokesSystem, t0, t1, depth=None) -> QMatrix:
    """H^1(S^1, L_{<t0}) -> H^1(S^1, L_{<t1}) along the straight segment."""
    t0, t1 = GR.of(t0), GR.of(t1)
    if depth is None:
        depth = max_depth()
    for c in sys.points:
        if _on_segment(c, t0, t1):
            raise DegenerateError(f"segment [{t0}, {t1}] meets the point {c}")
    d = sheaf_cohomology(filtration_sheaf(sys, t0, STRICT)).h1_dim
    if t0 == t1:
        return QMatrix.identity(d)
    return _transport_rec(sys, t0, t1, depth)


def _transport_rec(sys, t0, t1, depth):
    if segment_is_safe(sys, t0, t1):
        return transport_step(sys, t0, t1)
    # K lies in every L_{<t} along the segment, so comparison maps that are
    # invertible at both ends give the transport even without the sector test
    _, A0, A1 = sandwich(sys, t0, t1)
    if A0.is_invertible() and A1.is_invertible():
        STEP_AUDIT["steps"] += 1
        STEP_AUDIT["checked"] += 1
        return A1 @ A0.inverse()
    if depth <= 0:
        raise DegenerateError(f"subdivision depth exhausted on [{t0}, {t1}]")
    mid = (t0 + t1) * Fraction(1, 2)
    return _transport_rec(sys, mid, t1, depth - 1) @ _transport_rec(sys, t0, mid, depth - 1)


def transport_path(sys: StokesSystem, waypoints, closed=False) -> QMatrix:
    pts = [GR.of(p) for p in waypoints]
    segs = list(zip(pts, pts[1:]))
    if closed:
        segs.append((pts[-1], pts[0]))
    M = None
    for a, b in segs:
        step = transport(sys, a, b)
        M = step if M is None else step @ M
    if M is None:
        M = transport(sys, pts[0], pts[0])
    return M


# ---------------------------------------------------------------------------
# forward transform


def _geometry(points):
    """Spider skeleton (no data) carrying the cut conventions for these points."""
    n = len(points)
    return SpiderSheaf(points, 0, [QMatrix.identity(0)] * n, [0] * n, [QMatrix.zeros(0, 0)] * n)


def _local_scale(geo: SpiderSheaf, i):
    """rho with the square c_i +- rho d +- rho n free of other lateral lines."""
    q = geo.cut.x ** 2 + geo.cut.y ** 2
    gaps = [abs(geo.lat(geo.points[i]) - geo.lat(c)) for k, c in enumerate(geo.points) if k != i]
    rho = Fraction(1, 2)
    while gaps and rho * q * 2 >= min(gaps):
        rho /= 2
    return rho


def local_loop(geo: SpiderSheaf, i):
    """Starting point ahead of c_i on the clockwise side of its cut, and the
    counterclockwise square loop from it."""
    c = geo.points[i]
    rho = _local_scale(geo, i)
    q = geo.cut.x ** 2 + geo.cut.y ** 2
    lv, la = geo.level(c), geo.lat(c)
    h = rho * q
    x = geo.from_coords(lv + h, la - h)
    loop = [x, geo.from_coords(lv + h, la + h), geo.from_coords(lv - h, la + h), geo.from_coords(lv - h, la - h)]
    return x, loop


def frame_route(geo: SpiderSheaf, x):
    """Sideways at the base level, then straight along the cut direction."""
    b = geo.base
    y = geo.from_coords(geo.level(b), geo.lat(x))
    return [b, y, x] if y != b else [b, x]


def generization(sys: StokesSystem, ci, x, depth=None):
    """H^1(L_{<c_i}) -> H^1(L_{<x}) through the intersection sheaf of an
    initial piece [c_i, p] of [c_i, x], followed by ordinary transport.

    Any p whose intersection sheaf compares isomorphically with L_{<c_i}
    gives the same map, since that sheaf then also sits inside L_{<s} for
    every s on (c_i, p] compatibly with transport."""
    ci, x = GR.of(ci), GR.of(x)
    if depth is None:
        depth = max_depth()
    p = x
    for k in range(depth + 1):
        p = ci + (x - ci) * Fraction(1, 2 ** k)
        _, A0, A1 = sandwich(sys, ci, p)
        if A0.is_invertible():
            break
        if segment_is_safe(sys, ci, p):
            raise InternalInvariantError(f"intersection sheaf at {ci} does not compare isomorphically")
    else:
        raise DegenerateError(f"no admissible initial piece toward {x} from {ci}")
    STEP_AUDIT["steps"] += 1
    STEP_AUDIT["checked"] += 1
    G = A1 @ A0.inverse()
    if p != x:
        G = transport(sys, p, x) @ G
    return G


def laplace_fwd(sys: StokesSystem, check=True) -> SpiderSheaf:
    rep = validate(sys)
    if not rep.ok:
        raise ValidationError(rep.condition, rep.detail)
    geo = _geometry(sys.points)
    b = geo.base
    psi = sheaf_cohomology(filtration_sheaf(sys, b, STRICT)).h1_dim
    Ts, gs, phis = [], [], []
    for i, c in enumerate(sys.points):
        x, loop = local_loop(geo, i)
        P = transport_path(sys, frame_route(geo, x))
        Lam = transport_path(sys, loop, closed=True)
        Pinv = P.inverse()
        Ts.append(Pinv @ Lam @ P)
        G = generization(sys, c, x)
        gs.append(Pinv @ G)
        phis.append(G.cols)
    sp = SpiderSheaf(sys.points, psi, Ts, phis, gs, cut=geo.cut, base=b)
    if check:
        rep = validate_spider(sp)
        if not rep.ok:
            raise InternalInvariantError(f"forward transform produced invalid spider data: {rep.detail}")
        h = plane_cohomology(sp)
        if h != (0, 0, 0):
            raise InternalInvariantError(f"forward transform has plane cohomology {h}")
    return sp


# ---------------------------------------------------------------------------
# backward transform


class CoStokesSystem:
    """Per-arc subspaces L'_{<c}(a) of a fiber, with transitions between arcs.

    ``subspaces[k][j]`` is a basis matrix of L'_{<c_j} on arc k, in the fiber
    at the anchor of arc k; ``transitions[j]`` carries the fiber of the arc
    ending at vertex j to the fiber of the arc starting there.
    """

    def __init__(self, points, complex_, dim, subspaces, transitions):
        self.points = tuple(GR.of(c) for c in points)
        self.complex = complex_
        self.dim = dim
        self.subspaces = [list(row) for row in subspaces]
        self.transitions = tuple(transitions)
        if len(self.subspaces) != complex_.n_arcs or len(self.transitions) != complex_.n_vertices:
            raise ValidationError("shape", "co-Stokes data does not match its complex")

    @property
    def n(self):
        return len(self.points)

    def arc_order(self, k):
        """Point indices sorted increasingly for the order on arc k."""
        u = self.complex.representatives[k]
        idx = list(range(self.n))
        key = lambda i: self.points[i].re * u.x + self.points[i].im * u.y
        return sorted(idx, key=key)

    def __eq__(self, other):
        return (
            isinstance(other, CoStokesSystem)
            and self.points == other.points
            and self.dim == other.dim
            and self.subspaces == other.subspaces
            and self.transitions == other.transitions
        )

    def dimension_table(self):
        return [tuple(S.cols for S in row) for row in self.subspaces]

    def validate(self):
        for j, M in enumerate(self.transitions):
            if not M.is_invertible():
                return ValidationReport(False, "singular transition", f"transition at vertex {j} is not invertible")
        for k in range(self.complex.n_arcs):
            order = self.arc_order(k)
            prev = QMatrix.zeros(self.dim, 0)
            for i in order:
                S = self.subspaces[k][i]
                if prev.cols and column_basis(S.hstack(prev)).cols != S.cols:
                    return ValidationReport(False, "nesting", f"subspaces on arc {k} are not nested")
                prev = S
        return ValidationReport(True)


def costokes_complex(points):
    rays = stokes_rays(points)
    return arc_complex(rays if rays else [Ray(1, 0)])


def _anchors(sp: SpiderSheaf, cx):
    far = sp.far()
    out = []
    for k, u in enumerate(cx.representatives):
        out.append(far.anchor(u, cx.start(k), cx.end(k)))
    return out


def _far_transitions(sp: SpiderSheaf, cx, anchors):
    far = sp.far()
    m = cx.n_vertices
    return [far.transport(anchors[(j - 1) % m], anchors[j]) for j in range(m)]


def laplace_bwd(sp: SpiderSheaf) -> CoStokesSystem:
    rep = validate_spider(sp)
    if not rep.ok:
        raise ValidationError(rep.condition, rep.detail)
    cx = costokes_complex(sp.points)
    anchors = _anchors(sp, cx)
    subs = []
    for k, u in enumerate(cx.representatives):
        subs.append([halfplane_sections(sp, c, u, anchors[k]) for c in sp.points])
    return CoStokesSystem(sp.points, cx, sp.psi_dim, subs, _far_transitions(sp, cx, anchors))


def costokes_sheaf(sp: SpiderSheaf, s):
    """L'_{<s} as a cellular sheaf, refined by the walls of s."""
    s = GR.of(s)
    rays = stokes_rays(sp.points)
    for c in sp.points:
        if c != s:
            rays |= wall_rays(c, s)
    cx = arc_complex(rays if rays else [Ray(1, 0)])
    anchors = _anchors(sp, cx)
    local = FramedLocalSystem(cx, sp.psi_dim, _far_transitions(sp, cx, anchors))
    bases = [halfplane_sections(sp, s, u, anchors[k]) for k, u in enumerate(cx.representatives)]
    return subsheaf(local, bases)


def costokes_to_stokes(co: CoStokesSystem) -> StokesSystem:
    """Graded frames by greedy complements of L'_{<c} inside L'_{<=c}."""
    rep = co.validate()
    if not rep.ok:
        raise ValidationError(rep.condition, rep.detail)
    cx = co.complex
    n, r = co.n, co.dim
    ranks = None
    frames = []
    full = QMatrix.identity(r)
    for k in range(cx.n_arcs):
        order = co.arc_order(k)
        cols_by_point = {}
        arc_ranks = [0] * n
        for pos, i in enumerate(order):
            lower = co.subspaces[k][i]
            upper = co.subspaces[k][order[pos + 1]] if pos + 1 < n else full
            upper = column_basis(upper)
            ext = extend_basis(lower, upper)
            cols_by_point[i] = ext
            arc_ranks[i] = ext.cols
        if ranks is None:
            ranks = arc_ranks
        elif ranks != arc_ranks:
            raise ValidationError("graded ranks", "graded ranks change from arc to arc")
        G = QMatrix.zeros(r, 0)
        for i in range(n):
            G = G.hstack(cols_by_point[i])
        frames.append(G)
    if any(x <= 0 for x in ranks):
        raise ValidationError("graded ranks", "a point carries a zero graded piece")
    m = cx.n_vertices
    S = [frames[j].inverse() @ co.transitions[j] @ frames[(j - 1) % m] for j in range(m)]
    if n == 1:
        # reframe arc 0 by S[1] so the transition at (-1, 0) becomes the identity
        mono = S[1] @ S[0]
        return StokesSystem(co.points, ranks, monodromy=mono)
    out = StokesSystem(co.points, ranks, transitions=S)
    rep = validate(out)
    if not rep.ok:
        raise InternalInvariantError(f"reconstructed Stokes data is invalid: {rep.detail}")
    return out


def antipodal_reindex(co: CoStokesSystem) -> CoStokesSystem:
    """The same data read through tau -> -tau.

    The direction theta becomes theta + pi, which reverses every order on
    the circle; replacing each point c by -c restores it, so the result is
    again a co-Stokes system over the same complex."""
    cx = co.complex
    m = cx.n_vertices
    h = m // 2
    subs = [list(co.subspaces[(k + h) % cx.n_arcs]) for k in range(cx.n_arcs)]
    trans = [co.transitions[(j + h) % m] for j in range(m)]
    return CoStokesSystem([-c for c in co.points], cx, co.dim, subs, trans)


# ---------------------------------------------------------------------------
# round trips


@dataclass
class RoundTripReport:
    checks: list = field(default_factory=list)
    isomorphism: object = None
    iso_attempted: bool = False

    def add(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))

    @property
    def verdict(self):
        ok = all(c[1] for c in self.checks)
        if self.iso_attempted:
            ok = ok and self.isomorphism is not None
        return "pass" if ok else "fail"

    def to_text(self):
        lines = [f"{name}: {'ok' if ok else 'MISMATCH'}{(' ' + detail) if detail else ''}" for name, ok, detail in self.checks]
        if self.iso_attempted:
            lines.append(f"explicit isomorphism: {'found' if self.isomorphism is not None else 'not found'}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _arc_strict_table(sys: StokesSystem):
    cx = sys.stokes_complex if sys.n > 1 else sys.complex
    out = []
    for u in cx.representatives:
        out.append(tuple(sum(sys.ranks[k] for k in sys.below(i, u, True)) for i in range(sys.n)))
    return out


def roundtrip_report(sys: StokesSystem, search_iso=True) -> RoundTripReport:
    rep = RoundTripReport()
    sp = laplace_fwd(sys)
    co = laplace_bwd(sp)
    back = costokes_to_stokes(co)
    rep.add("points", back.points == sys.points)
    rep.add("ranks", back.ranks == sys.ranks, f"{list(back.ranks)} vs {list(sys.ranks)}")
    rep.add("arc dimensions of L'_{<c}", co.dimension_table() == _arc_strict_table(sys))
    rep.add("vertex filtration tables", vertex_filtration_table(back) == vertex_filtration_table(sys))
    a, b = similarity_invariants(total_monodromy(back)), similarity_invariants(total_monodromy(sys))
    rep.add("total monodromy charpoly", a["charpoly"] == b["charpoly"])
    rep.add("total monodromy invariant factors", a["invariant_factors"] == b["invariant_factors"])
    for i in range(sys.n):
        a, b = similarity_invariants(gr_monodromy(back, i)), similarity_invariants(gr_monodromy(sys, i))
        rep.add(f"graded monodromy {i} charpoly", a["charpoly"] == b["charpoly"])
        rep.add(f"graded monodromy {i} invariant factors", a["invariant_factors"] == b["invariant_factors"])
    if search_iso and sys.n <= 2 and sys.dim <= 2:
        rep.iso_attempted = True
        rep.isomorphism = find_filtered_isomorphism(sys, back)
    return rep


def _spider_invariants(sp: SpiderSheaf):
    I = QMatrix.identity(sp.psi_dim)
    far = sp.far()
    loop = far.corners()
    inv = {
        "psi_dim": sp.psi_dim,
        "stalks": sp.phi,
        "local monodromies": tuple(tuple(elementary_divisors(T)) for T in sp.T),
        "loop at infinity": tuple(elementary_divisors(loop_monodromy(sp, loop))),
        "generization ranks": tuple(g.rank() for g in sp.g),
        "fixed vectors": tuple(sp.psi_dim - (T - I).rank() for T in sp.T),
    }
    return inv


def spider_roundtrip_report(sp: SpiderSheaf) -> RoundTripReport:
    rep = RoundTripReport()
    back = laplace_fwd(costokes_to_stokes(laplace_bwd(sp)))
    a, b = _spider_invariants(back), _spider_invariants(sp)
    for key in a:
        rep.add(key, a[key] == b[key])
    return rep


# ---------------------------------------------------------------------------
# explicit filtered isomorphisms for small ranks


def _kron_action(A: QMatrix, B: QMatrix, r):
    """Matrix of X -> A X B on row-major vec(X) for r x r matrices."""
    out = [[Fraction(0)] * (r * r) for _ in range(r * r)]
    for p in range(r):
        for q in range(r):
            row = p * r + q
            for a in range(r):
                if A[p, a] == 0:
                    continue
                for b in range(r):
                    v = A[p, a] * B[b, q]
                    if v:
                        out[row][a * r + b] += v
    return QMatrix(out)


def find_filtered_isomorphism(src: StokesSystem, dst: StokesSystem, bound=2):
    """Arc-wise block-triangular X_a with X_{a+} S_v = S'_v X_{a-}, searched
    over small integer combinations of a kernel basis; returns X_0 or None."""
    if src.points != dst.points or src.ranks != dst.ranks or src.complex != dst.complex:
        return None
    r = src.dim
    cx = src.complex
    m = cx.n_vertices
    N = r * r
    Phi = QMatrix.identity(N)
    rows = []
    pts = src.points
    owner = []
    for i in range(src.n):
        owner.extend([i] * src.ranks[i])

    def constraints(Phi_k, u):
        out = []
        for p in range(r):
            for q in range(r):
                a, b = owner[p], owner[q]
                if a != b and dominance(pts[a], pts[b], u) >= 0:
                    out.append(Phi_k.row(p * r + q))
        return out

    rows.extend(constraints(Phi, cx.representatives[0]))
    for s in range(1, m + 1):
        j = s % m
        Phi = _kron_action(dst.S[j], src.S[j].inverse(), r) @ Phi
        if j != 0:
            rows.extend(constraints(Phi, cx.representatives[j]))
    closure = Phi - QMatrix.identity(N)
    rows.extend(closure.row(i) for i in range(N))
    _, ker = rank_and_kernel(QMatrix(rows) if rows else QMatrix.zeros(0, N))
    if not ker:
        return None
    rng = range(-bound, bound + 1)
    for coeffs in sorted(product(rng, repeat=len(ker)), key=lambda c: (max(map(abs, c)), c)):
        if not any(coeffs):
            continue
        vec = [sum(c * k[t] for c, k in zip(coeffs, ker)) for t in range(N)]
        X = QMatrix([vec[p * r:(p + 1) * r] for p in range(r)])
        if X.is_invertible():
            return X
    return None
