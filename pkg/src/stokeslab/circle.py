"""Arc decompositions of the circle and cellular sheaf cohomology on them.

A vertex set on S^1 is a finite set of rays, closed under antipode, sorted
counterclockwise from (1, 0).  Arc ``k`` runs from vertex ``k`` to vertex
``k + 1`` (indices mod the vertex count).  A cellular sheaf stores, for each
vertex ``j``, the generization maps to the arc ending at it (``to_prev``) and
to the arc starting at it (``to_next``).
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError
from .exactcore import QMatrix, Ray, coordinates, kernel_from_rref, rank_and_kernel, rref_rows

__all__ = [
    "ArcComplex",
    "CellSheaf",
    "SheafMap",
    "Cohomology",
    "arc_complex",
    "sheaf_cohomology",
    "refine",
    "map_on_cohomology",
    "refine_with_map",
    "refinement_map",
    "FramedLocalSystem",
    "SubSheaf",
    "subsheaf",
    "inclusion_map",
]


class ArcComplex:
    """Cyclically sorted, antipodally closed vertex rays plus arc representatives."""

    __slots__ = ("vertices", "representatives", "_keys", "_index")

    def __init__(self, vertices: Sequence[Ray]):
        vs = sorted(set(vertices), key=Ray.key)
        closed = set(vs) | {v.antipode() for v in vs}
        vs = sorted(closed, key=Ray.key)
        self.vertices = tuple(vs)
        self._keys = [v.key() for v in vs]
        self._index = {v: j for j, v in enumerate(vs)}
        reps = []
        m = len(vs)
        if m == 0:
            reps.append(Ray(1, 0))
        for k in range(m):
            a, b = vs[k], vs[(k + 1) % m]
            if b == a.antipode():
                reps.append(a.rot90())
            else:
                # closure keeps every arc below pi, so the sum is inside
                reps.append(Ray(a.x + b.x, a.y + b.y))
        self.representatives = tuple(reps)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_arcs(self):
        return max(1, len(self.vertices))

    def start(self, k):
        return self.vertices[k]

    def end(self, k):
        return self.vertices[(k + 1) % len(self.vertices)]

    def vertex_index(self, ray: Ray):
        return self._index.get(ray)

    def locate(self, ray: Ray):
        """``("vertex", j)`` if the ray is a vertex, else ``("arc", k)``."""
        j = self._index.get(ray)
        if j is not None:
            return ("vertex", j)
        if not self.vertices:
            return ("arc", 0)
        pos = bisect_right(self._keys, ray.key())
        return ("arc", (pos - 1) % len(self.vertices))

    def arc_containing(self, ray: Ray) -> int:
        kind, idx = self.locate(ray)
        if kind != "arc":
            raise ValidationError("on vertex", f"{ray} is a vertex")
        return idx

    def subdivides(self, other: "ArcComplex") -> bool:
        return set(other.vertices) <= set(self.vertices)

    def __eq__(self, other):
        return isinstance(other, ArcComplex) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        return f"ArcComplex({list(self.vertices)})"


def arc_complex(rays: Iterable[Ray]) -> ArcComplex:
    return ArcComplex(list(rays))


class CellSheaf:
    """Constructible sheaf on an arc decomposition, given cellularly.

    With no vertices, ``monodromy`` is the automorphism of the single arc stalk
    obtained by going once around counterclockwise.
    """

    def __init__(self, complex_: ArcComplex, vdims, adims, to_prev=(), to_next=(), monodromy=None):
        self.complex = complex_
        self.vdims = tuple(vdims)
        self.adims = tuple(adims)
        self.to_prev = tuple(to_prev)
        self.to_next = tuple(to_next)
        self.monodromy = monodromy
        self._coh = None
        self.check_shapes()

    def check_shapes(self):
        cx = self.complex
        m = cx.n_vertices
        if len(self.adims) != cx.n_arcs or len(self.vdims) != m:
            raise ValidationError("shape", "stalk count does not match the complex")
        if m == 0:
            d = self.adims[0]
            if self.monodromy is None or self.monodromy.shape != (d, d):
                raise ValidationError("shape", "monodromy missing or of wrong size")
            return
        if len(self.to_prev) != m or len(self.to_next) != m:
            raise ValidationError("shape", "generization map count mismatch")
        for j in range(m):
            if self.to_prev[j].shape != (self.adims[(j - 1) % m], self.vdims[j]):
                raise ValidationError("shape", f"to_prev map at vertex {j} has wrong shape")
            if self.to_next[j].shape != (self.adims[j], self.vdims[j]):
                raise ValidationError("shape", f"to_next map at vertex {j} has wrong shape")

    def maps_injective(self) -> bool:
        return all(m.rank() == m.cols for m in self.to_prev + self.to_next)

    @property
    def euler_characteristic(self):
        return sum(self.vdims) - sum(self.adims)

    def __repr__(self):
        return f"CellSheaf(vertices={self.complex.n_vertices}, vdims={self.vdims}, adims={self.adims})"


class Cohomology:
    """Cohomology of the two-term cellular complex with explicit bases.

    H^0 basis: kernel vectors of the differential, one per free column, so the
    coordinates of a cocycle are its entries at the free columns.
    H^1 basis: standard cochains at non-pivot positions of the echelon form of
    the image; a cochain is reduced modulo the pivot rows and read there.
    """

    def __init__(self, sheaf: CellSheaf):
        self.sheaf = sheaf
        self.voff = _offsets(sheaf.vdims)
        self.aoff = _offsets(sheaf.adims)
        n0 = sum(sheaf.vdims) if sheaf.complex.n_vertices else sum(sheaf.adims)
        n1 = sum(sheaf.adims)
        self.n0, self.n1 = n0, n1
        cols = _differential_columns(sheaf, self.voff, self.aoff)
        # kernel of D: build D row-wise from the columns
        drows = [dict() for _ in range(n1)]
        for j, col in enumerate(cols):
            for i, v in col.items():
                drows[i][j] = v
        kp, krows = rref_rows(drows, n0)
        self.h0_free = [j for j in range(n0) if j not in set(kp)]
        self.h0_basis = kernel_from_rref(kp, krows, n0)
        ip, irows = rref_rows(cols, n1)
        self._img_pivots = ip
        self._img_rows = irows
        pset = set(ip)
        self.h1_positions = [i for i in range(n1) if i not in pset]

    @property
    def h0_dim(self):
        return len(self.h0_basis)

    @property
    def h1_dim(self):
        return len(self.h1_positions)

    @property
    def dims(self):
        return (self.h0_dim, self.h1_dim)

    def h0_coords(self, vec):
        return tuple(vec[j] for j in self.h0_free)

    def reduce_cochain(self, vec):
        w = {i: Fraction(v) for i, v in enumerate(vec) if v}
        for p, row in zip(self._img_pivots, self._img_rows):
            f = w.get(p)
            if f:
                for j, a in row.items():
                    nv = w.get(j, 0) - f * a
                    if nv:
                        w[j] = nv
                    else:
                        w.pop(j, None)
        return w

    def h1_coords(self, vec):
        w = self.reduce_cochain(vec)
        return tuple(w.get(i, Fraction(0)) for i in self.h1_positions)

    def is_coboundary(self, vec):
        return not self.reduce_cochain(vec)

    def h1_basis_cochain(self, k):
        v = [Fraction(0)] * self.n1
        v[self.h1_positions[k]] = Fraction(1)
        return tuple(v)

    def arc_block(self, vec, k):
        return tuple(vec[self.aoff[k]:self.aoff[k] + self.sheaf.adims[k]])


def _offsets(dims):
    out, acc = [], 0
    for d in dims:
        out.append(acc)
        acc += d
    return out


def _differential_columns(F: CellSheaf, voff, aoff):
    """Columns of the differential as sparse dicts (one per C^0 coordinate)."""
    m = F.complex.n_vertices
    cols = []
    if m == 0:
        T = F.monodromy
        d = F.adims[0]
        for j in range(d):
            col = {}
            for i in range(d):
                v = T[i, j] - (1 if i == j else 0)
                if v:
                    col[i] = v
            cols.append(col)
        return cols
    for j in range(m):
        prev_arc = (j - 1) % m
        P, N = F.to_prev[j], F.to_next[j]
        for a in range(F.vdims[j]):
            col = {}
            # vertex j is the end of prev_arc (+) and the start of arc j (-)
            for i in range(F.adims[prev_arc]):
                v = P[i, a]
                if v:
                    col[aoff[prev_arc] + i] = v
            for i in range(F.adims[j]):
                v = N[i, a]
                if v:
                    key = aoff[j] + i
                    nv = col.get(key, 0) - v
                    if nv:
                        col[key] = nv
                    else:
                        col.pop(key, None)
            cols.append(col)
    return cols


def sheaf_cohomology(F: CellSheaf) -> Cohomology:
    if F._coh is None:
        F._coh = Cohomology(F)
    return F._coh


class SheafMap:
    """Per-cell components of a morphism between sheaves on one complex."""

    def __init__(self, source: CellSheaf, target: CellSheaf, vmaps, amaps, check=True):
        if source.complex != target.complex:
            raise ValidationError("complex mismatch", "sheaf map between different complexes")
        self.source, self.target = source, target
        self.vmaps = tuple(vmaps)
        self.amaps = tuple(amaps)
        if check:
            self.check()

    def check(self):
        s, t = self.source, self.target
        m = s.complex.n_vertices
        for k, f in enumerate(self.amaps):
            if f.shape != (t.adims[k], s.adims[k]):
                raise ValidationError("shape", f"arc component {k} has wrong shape")
        if m == 0:
            f = self.amaps[0]
            if t.monodromy @ f != f @ s.monodromy:
                raise ValidationError("not commuting", "map does not commute with monodromy")
            return
        for j, f in enumerate(self.vmaps):
            if f.shape != (t.vdims[j], s.vdims[j]):
                raise ValidationError("shape", f"vertex component {j} has wrong shape")
            if t.to_prev[j] @ f != self.amaps[(j - 1) % m] @ s.to_prev[j]:
                raise ValidationError("not commuting", f"square fails at vertex {j} (preceding arc)")
            if t.to_next[j] @ f != self.amaps[j] @ s.to_next[j]:
                raise ValidationError("not commuting", f"square fails at vertex {j} (following arc)")

    def apply0(self, vec):
        s = self.source
        if s.complex.n_vertices == 0:
            return tuple(self.amaps[0] @ vec)
        coh_s, coh_t = sheaf_cohomology(s), sheaf_cohomology(self.target)
        out = []
        for j, f in enumerate(self.vmaps):
            out.extend(f @ vec[coh_s.voff[j]:coh_s.voff[j] + s.vdims[j]])
        return tuple(out)

    def apply1(self, vec):
        s = self.source
        coh_s = sheaf_cohomology(s)
        out = []
        for k, f in enumerate(self.amaps):
            out.extend(f @ vec[coh_s.aoff[k]:coh_s.aoff[k] + s.adims[k]])
        return tuple(out)


def map_on_cohomology(f: SheafMap):
    """Matrices of the induced maps on H^0 and H^1 in the standard bases."""
    cs, ct = sheaf_cohomology(f.source), sheaf_cohomology(f.target)
    h0_cols = [ct.h0_coords(f.apply0(v)) for v in cs.h0_basis]
    h1_cols = [ct.h1_coords(f.apply1(cs.h1_basis_cochain(k))) for k in range(cs.h1_dim)]
    return QMatrix.from_columns(h0_cols, ct.h0_dim), QMatrix.from_columns(h1_cols, ct.h1_dim)


def refine(F: CellSheaf, extra: Iterable[Ray]) -> CellSheaf:
    """Subdivide by extra rays; new vertices get the ambient arc stalk.

    Without vertices, the monodromy is placed on the crossing of (1, 0):
    the arc frames are continued counterclockwise from (1, 0).
    """
    return refine_with_map(F, extra)[0]


def refine_with_map(F: CellSheaf, extra: Iterable[Ray]):
    """Refinement together with, for each new arc, the index of the old arc containing it."""
    old = F.complex
    new = arc_complex(list(old.vertices) + list(extra))
    m = new.n_vertices
    if m == old.n_vertices:
        return F, list(range(old.n_arcs))
    parent = [old.locate(new.representatives[k])[1] for k in range(m)]
    if old.n_vertices == 0:
        d = F.adims[0]
        T = F.monodromy
        I = QMatrix.identity(d)
        to_prev, to_next = [], []
        first_is_ref = new.vertices[0] == Ray(1, 0)
        for j in range(m):
            if first_is_ref and j == 0:
                to_prev.append(T)
                to_next.append(I)
            elif not first_is_ref and j == m - 1:
                to_prev.append(I)
                to_next.append(T.inverse())
            else:
                to_prev.append(I)
                to_next.append(I)
        return CellSheaf(new, [d] * m, [d] * m, to_prev, to_next), parent
    vdims, adims, to_prev, to_next = [], [], [], []
    for k in range(m):
        adims.append(F.adims[parent[k]])
    for j, v in enumerate(new.vertices):
        oj = old.vertex_index(v)
        if oj is not None:
            vdims.append(F.vdims[oj])
            to_prev.append(F.to_prev[oj])
            to_next.append(F.to_next[oj])
        else:
            d = F.adims[parent[j]]
            vdims.append(d)
            to_prev.append(QMatrix.identity(d))
            to_next.append(QMatrix.identity(d))
    return CellSheaf(new, vdims, adims, to_prev, to_next), parent


def refinement_map(F: CellSheaf, G: CellSheaf, parent) -> "QMatrix":
    """H^1 comparison F -> G for G a refinement of F (identity on shared stalks).

    A cochain of F on arc k is sent to the cochain of G equal to it on the
    sub-arc of k that starts at the start of k (a single sub-arc suffices,
    since new interior vertices carry identities).
    """
    cf, cg = sheaf_cohomology(F), sheaf_cohomology(G)
    newcx = G.complex
    first_sub = {}
    for k in range(newcx.n_arcs):
        p = parent[k]
        if p not in first_sub:
            first_sub[p] = k
    if F.complex.n_vertices:
        for p in range(F.complex.n_arcs):
            start = F.complex.start(p)
            first_sub[p] = newcx.vertex_index(start)
    cols = []
    for h in range(cf.h1_dim):
        v = cf.h1_basis_cochain(h)
        out = [Fraction(0)] * cg.n1
        for p in range(F.complex.n_arcs):
            blk = cf.arc_block(v, p)
            k = first_sub[p]
            out[cg.aoff[k]:cg.aoff[k] + G.adims[k]] = blk
        cols.append(cg.h1_coords(out))
    return QMatrix.from_columns(cols, cg.h1_dim)


# ---------------------------------------------------------------------------
# Local systems with a frame on each arc, and their subsheaves


class FramedLocalSystem:
    """A local system trivialized on each arc; ``transitions[j]`` maps the
    frame of the arc ending at vertex ``j`` to the frame of the arc starting there."""

    def __init__(self, complex_: ArcComplex, dim: int, transitions):
        if complex_.n_vertices == 0:
            raise ValidationError("shape", "framed local systems need at least one vertex")
        self.complex = complex_
        self.dim = dim
        self.transitions = tuple(transitions)
        if len(self.transitions) != complex_.n_vertices:
            raise ValidationError("shape", "one transition per vertex expected")

    def refine(self, extra):
        """Subdivision, plus the parent arc of every new arc."""
        new = arc_complex(list(self.complex.vertices) + list(extra))
        if new.n_vertices == self.complex.n_vertices:
            return self, list(range(self.complex.n_arcs))
        parent = [self.complex.locate(u)[1] for u in new.representatives]
        I = QMatrix.identity(self.dim)
        trans = []
        for v in new.vertices:
            oj = self.complex.vertex_index(v)
            trans.append(self.transitions[oj] if oj is not None else I)
        return FramedLocalSystem(new, self.dim, trans), parent

    def monodromy(self, start_arc=0):
        """Counterclockwise return map on the frame of ``start_arc``."""
        m = self.complex.n_vertices
        out = QMatrix.identity(self.dim)
        for s in range(1, m + 1):
            out = self.transitions[(start_arc + s) % m] @ out
        return out

    def as_sheaf(self) -> "SubSheaf":
        I = QMatrix.identity(self.dim)
        return subsheaf(self, [I] * self.complex.n_arcs)


class SubSheaf(CellSheaf):
    """Subsheaf of a framed local system given by subspaces on the arcs.

    ``bases[k]`` spans the arc stalk inside the frame of arc ``k``;
    ``vertex_bases[j]`` spans the germ space at vertex ``j``, written in the
    frame of the arc ending at ``j``.
    """

    def __init__(self, local: FramedLocalSystem, bases, vertex_bases, vdims, adims, to_prev, to_next):
        super().__init__(local.complex, vdims, adims, to_prev, to_next)
        self.local = local
        self.bases = tuple(bases)
        self.vertex_bases = tuple(vertex_bases)


def subsheaf(local: FramedLocalSystem, bases) -> SubSheaf:
    """Largest subsheaf with the given arc stalks; vertex stalks are germs.

    A germ at vertex ``j`` is a vector of the preceding arc stalk whose
    transport lies in the following arc stalk.
    """
    cx = local.complex
    m = cx.n_vertices
    bases = list(bases)
    vdims, to_prev, to_next, vbases = [], [], [], []
    for j in range(m):
        Bm, Bp = bases[(j - 1) % m], bases[j]
        S = local.transitions[j]
        _, ker = rank_and_kernel((S @ Bm).hstack(-Bp))
        d = len(ker)
        Y = QMatrix.from_columns([k[:Bm.cols] for k in ker], Bm.cols)
        Z = QMatrix.from_columns([k[Bm.cols:] for k in ker], Bp.cols)
        vdims.append(d)
        to_prev.append(Y)
        to_next.append(Z)
        vbases.append(Bm @ Y)
    adims = [B.cols for B in bases]
    return SubSheaf(local, bases, vbases, vdims, adims, to_prev, to_next)


def inclusion_map(small: SubSheaf, big: SubSheaf, check=False) -> SheafMap:
    """Sheaf map induced by an inclusion of subsheaves of one framed local system."""
    if small.complex != big.complex:
        raise ValidationError("complex mismatch", "subsheaves live on different complexes")
    amaps = [coordinates(B, A) for A, B in zip(small.bases, big.bases)]
    vmaps = [coordinates(B, A) for A, B in zip(small.vertex_bases, big.vertex_bases)]
    return SheafMap(small, big, vmaps, amaps, check=check)
