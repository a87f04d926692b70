"""Spider (quiver) data for constructible sheaves on the plane.

All cuts are parallel rays c_i + lambda * d, lambda >= 0.  The complement of
the points and cuts is simply connected, so the generic stalk Psi has one
global frame there.  Crossing cut i counterclockwise (lateral coordinate
increasing) changes the frame coordinates of a section by T_i; the germs at
c_i enter that frame through g_i, and T_i g_i = g_i.

Coordinates: level(z) = <z, d> runs along the cuts, lat(z) = <z, i d> across.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateError, ValidationError
from .exactcore import (
    GaussianRational,
    QMatrix,
    Ray,
    dominance,
    intersect_spaces,
    preimage_space,
    rank_and_kernel,
    ccw_strictly_between,
    column_basis,
    coordinates,
    ray_normalize,
)
from .stokes import ValidationReport, stokes_rays

__all__ = [
    "SpiderSheaf",
    "PolyPath",
    "choose_cut",
    "choose_base",
    "validate_spider",
    "loop_monodromy",
    "path_transport",
    "halfplane_sections",
    "plane_cohomology",
    "euler_two_ways",
    "FarSquare",
]

GR = GaussianRational


def _dot(z: GaussianRational, r: Ray) -> Fraction:
    return z.re * r.x + z.im * r.y


def _cross_int(a, b):
    return a[0] * b[1] - a[1] * b[0]


def choose_cut(points) -> Ray:
    """First primitive direction, by |a| + |b| then counterclockwise from (1, 0),
    that is not axis-parallel, not diagonal, and not parallel to any
    difference of points or to any Stokes direction."""
    pts = [GR.of(c) for c in points]
    bad = []
    for i, c in enumerate(pts):
        for c2 in pts[i + 1:]:
            dz = c - c2
            bad.append((dz.re, dz.im))
    for u in stokes_rays(pts):
        bad.append((Fraction(u.x), Fraction(u.y)))
    norm = 3
    while True:
        cands = []
        for a in range(-norm, norm + 1):
            b = norm - abs(a)
            for bb in {b, -b}:
                if a == 0 or bb == 0 or abs(a) == abs(bb):
                    continue
                r = Ray(a, bb)
                if (r.x, r.y) == (a, bb):
                    cands.append(r)
        for r in sorted(set(cands), key=Ray.key):
            if all(_cross_int((r.x, r.y), w) != 0 for w in bad):
                return r
        norm += 1


def far_radius(points) -> Fraction:
    m = max((GR.of(c).sup_norm() for c in points), default=Fraction(0))
    return 2 * (1 + m)


def choose_base(points, d: Ray) -> GaussianRational:
    """Base point behind every point, on the antipode of the cut direction."""
    R = far_radius(points)
    return GR(-R * d.x, -R * d.y)


@dataclass
class PolyPath:
    waypoints: list
    closed: bool = False

    def segments(self):
        pts = [GR.of(p) for p in self.waypoints]
        segs = list(zip(pts, pts[1:]))
        if self.closed and len(pts) > 1:
            segs.append((pts[-1], pts[0]))
        return segs


class SpiderSheaf:
    def __init__(self, points, psi_dim, monodromies, stalks, gen_maps, cut=None, base=None):
        self.points = tuple(GR.of(c) for c in points)
        n = len(self.points)
        if len(set(self.points)) != n:
            raise ValidationError("points", "points must be distinct")
        self.psi_dim = int(psi_dim)
        self.T = tuple(monodromies)
        self.phi = tuple(int(s) for s in stalks)
        self.g = tuple(gen_maps)
        if not (len(self.T) == len(self.phi) == len(self.g) == n):
            raise ValidationError("shape", "one monodromy, stalk and generization map per point")
        for i in range(n):
            if self.T[i].shape != (self.psi_dim, self.psi_dim):
                raise ValidationError("shape", f"monodromy {i} has the wrong size")
            if self.g[i].shape != (self.psi_dim, self.phi[i]):
                raise ValidationError("shape", f"generization map {i} has the wrong size")
        self.cut = cut if cut is not None else choose_cut(self.points)
        self.base = GR.of(base) if base is not None else choose_base(self.points, self.cut)
        self.normal = self.cut.rot90()
        self._far = None

    @property
    def n(self):
        return len(self.points)

    def level(self, z):
        return _dot(GR.of(z), self.cut)

    def lat(self, z):
        return _dot(GR.of(z), self.normal)

    def from_coords(self, level, lat):
        """Point with the given level and lateral coordinates."""
        d, nrm = self.cut, self.normal
        q = d.x * d.x + d.y * d.y
        return GR((level * d.x + lat * nrm.x) / q, (level * d.y + lat * nrm.y) / q)

    def on_cut(self, z, i):
        c = self.points[i]
        return self.lat(z) == self.lat(c) and self.level(z) >= self.level(c)

    def far(self):
        if self._far is None:
            self._far = FarSquare(self)
        return self._far

    def __eq__(self, other):
        return (
            isinstance(other, SpiderSheaf)
            and self.points == other.points
            and self.psi_dim == other.psi_dim
            and self.T == other.T
            and self.phi == other.phi
            and self.g == other.g
            and self.cut == other.cut
            and self.base == other.base
        )

    def __repr__(self):
        return f"SpiderSheaf(points={list(self.points)}, psi_dim={self.psi_dim}, stalks={list(self.phi)})"


def validate_spider(sp: SpiderSheaf) -> ValidationReport:
    pts = sp.points
    for i, c in enumerate(pts):
        for c2 in pts[i + 1:]:
            dz = c - c2
            if dz.re * sp.cut.y - dz.im * sp.cut.x == 0:
                return ValidationReport(False, "cut direction", f"cut {sp.cut} is parallel to {c} - {c2}")
    for i in range(sp.n):
        if sp.on_cut(sp.base, i) or sp.base == pts[i]:
            return ValidationReport(False, "base point", f"base {sp.base} lies on the cut of {pts[i]}")
    for i in range(sp.n):
        if not sp.T[i].is_invertible():
            return ValidationReport(False, "singular monodromy", f"T_{i} is not invertible")
    for i in range(sp.n):
        if sp.T[i] @ sp.g[i] != sp.g[i]:
            return ValidationReport(False, "invariance", f"T_{i} g_{i} != g_{i}")
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# crossings


def segment_crossings(sp: SpiderSheaf, P, Q):
    """Cut crossings of the segment P -> Q, in order: list of (i, +1 | -1)."""
    P, Q = GR.of(P), GR.of(Q)
    lvP, lvQ = sp.level(P), sp.level(Q)
    laP, laQ = sp.lat(P), sp.lat(Q)
    hits = []
    for i, c in enumerate(sp.points):
        if P == c or Q == c:
            raise DegenerateError(f"segment endpoint on the point {c}")
        lc, vc = sp.lat(c), sp.level(c)
        lp, lq = laP - lc, laQ - lc
        if lp == 0 and lvP >= vc:
            raise DegenerateError(f"waypoint {P} lies on the cut of {c}")
        if lq == 0 and lvQ >= vc:
            raise DegenerateError(f"waypoint {Q} lies on the cut of {c}")
        if (lp < 0 < lq) or (lq < 0 < lp):
            s = lp / (lp - lq)
            x = lvP + s * (lvQ - lvP)
            if x == vc:
                raise DegenerateError(f"segment {P} -> {Q} passes through {c}")
            if x > vc:
                hits.append((s, i, 1 if lp < 0 else -1))
    hits.sort()
    return [(i, o) for _, i, o in hits]


def path_transport(sp: SpiderSheaf, waypoints, closed=False) -> QMatrix:
    """Change of global-frame coordinates of a section continued along the path."""
    M = QMatrix.identity(sp.psi_dim)
    inv = {}
    for P, Q in PolyPath(list(waypoints), closed).segments():
        for i, o in segment_crossings(sp, P, Q):
            if o > 0:
                M = sp.T[i] @ M
            else:
                if i not in inv:
                    inv[i] = sp.T[i].inverse()
                M = inv[i] @ M
    return M


def loop_monodromy(sp: SpiderSheaf, path) -> QMatrix:
    if isinstance(path, PolyPath):
        return path_transport(sp, path.waypoints, closed=True)
    return path_transport(sp, path, closed=True)


# ---------------------------------------------------------------------------
# far square and anchors


class FarSquare:
    """The square |z|_inf = R around every point, with R avoiding cut lines
    at its corners; anchors on it carry the fibers of the local system at
    infinity."""

    def __init__(self, sp: SpiderSheaf):
        self.sp = sp
        R = far_radius(sp.points)
        step = Fraction(1, 2)
        while not self._corners_ok(R):
            R += step
            step /= 2
        self.R = R

    def corners(self):
        R = self.R
        return [GR(R, R), GR(-R, R), GR(-R, -R), GR(R, -R)]

    def _corners_ok(self, R):
        sp = self.sp
        lats = {sp.lat(c) for c in sp.points}
        for z in (GR(R, R), GR(-R, R), GR(-R, -R), GR(R, -R)):
            if sp.lat(z) in lats:
                return False
        return True

    def good_point(self, z):
        sp = self.sp
        return all(sp.lat(z) != sp.lat(c) for c in sp.points)

    def anchor(self, u: Ray, lo: Ray | None = None, hi: Ray | None = None):
        """Point of the square in direction u, nudged along its edge off every
        cut line while staying in the open arc (lo, hi) when given."""
        R = self.R
        m = max(abs(u.x), abs(u.y))
        z = GR(Fraction(R * u.x, m), Fraction(R * u.y, m))
        if abs(z.re) == R and abs(z.im) == R:
            tangents = [None]
        elif abs(z.re) == R:
            tangents = [(0, 1)]
        else:
            tangents = [(1, 0)]
        k = 3
        cands = [z]
        while True:
            for w in cands:
                ok = self.good_point(w)
                if ok and lo is not None:
                    ok = ccw_strictly_between(lo, ray_normalize(w), hi)
                if ok:
                    return w
            t = tangents[0]
            if t is None:
                raise DegenerateError("anchor at a corner on a cut line")
            delta = R / (2 ** k)
            cands = [z + GR(delta * t[0], delta * t[1]), z - GR(delta * t[0], delta * t[1])]
            k += 1
            if k > 200:
                raise DegenerateError("no admissible anchor")

    def _key(self, z):
        return ray_normalize(z).key()

    def ccw_path(self, z1, z2):
        """Waypoints from z1 counterclockwise along the square to z2."""
        k1, k2 = self._key(z1), self._key(z2)
        cs = sorted(self.corners(), key=self._key)
        if k1 < k2:
            mids = [c for c in cs if k1 < self._key(c) < k2]
        else:
            mids = [c for c in cs if self._key(c) > k1] + [c for c in cs if self._key(c) < k2]
        return [z1] + mids + [z2]

    def transport(self, z1, z2):
        return path_transport(self.sp, self.ccw_path(z1, z2))


# ---------------------------------------------------------------------------
# sections over closed half-planes


def _dist2_to_cut(sp: SpiderSheaf, z, k):
    c = sp.points[k]
    dz = GR.of(z) - c
    d = sp.cut
    q = d.x * d.x + d.y * d.y
    t = dz.re * d.x + dz.im * d.y
    if t <= 0:
        return dz.norm()
    l = dz.re * sp.normal.x + dz.im * sp.normal.y
    return l * l / q


def _collinear(a, b, c):
    return (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re) == 0


def _approach_point(sp: SpiderSheaf, i, P):
    """Point on the segment c_i -> P, close enough to c_i that nothing but
    c_i and its own cut is nearby, and off every cut line."""
    c = sp.points[i]
    r2 = None
    for k in range(sp.n):
        if k == i:
            continue
        for v in ((c - sp.points[k]).norm() / 4, _dist2_to_cut(sp, c, k) / 4):
            r2 = v if r2 is None or v < r2 else r2
    eps = Fraction(1, 2)
    dz = GR.of(P) - c
    while True:
        q = c + dz * eps
        if (r2 is None or (q - c).norm() < r2) and all(sp.lat(q) != sp.lat(x) for x in sp.points):
            return q
        eps /= 2


def evaluation_point(sp: SpiderSheaf, s, u: Ray, anchor):
    """A generic point of the closed half-plane far out along u from the anchor."""
    s = GR.of(s)
    pts = sp.points
    uz = GR(u.x, u.y)

    def generic(P):
        return all(sp.lat(P) != sp.lat(c) for c in pts) and not any(
            _collinear(P, a, b) for i, a in enumerate(pts) for b in pts[i + 1:]
        )

    lam = Fraction(0)
    if dominance(anchor, s, u) <= 0:
        lam = Fraction(1)
        while dominance(anchor + uz * lam, s, u) <= 0:
            lam *= 2
    # slide outward along u and sideways along i*u; both stay off the square
    # that holds the points, so the segment back to the anchor avoids them
    side = GR(-u.y, u.x)
    h = Fraction(1, 2)
    for k in range(200):
        for mu in (Fraction(0), h, -h):
            P = anchor + uz * (lam + h) + side * (mu / (1 + abs(u.x) + abs(u.y)))
            if generic(P):
                return P
        h /= 2
    raise DegenerateError("no generic evaluation point")


def halfplane_sections(sp: SpiderSheaf, s, u: Ray, anchor=None) -> QMatrix:
    """Sections over {t : Re[(t - s) conj(u)] >= 0}, as a subspace of the
    fiber at the anchor point (default: the far anchor in direction u)."""
    s = GR.of(s)
    inside = []
    for i, c in enumerate(sp.points):
        sg = dominance(c, s, u)
        if sg == 0 and c != s:
            raise DegenerateError(f"wall: {c} lies on the boundary line")
        if sg >= 0:
            inside.append(i)
    if anchor is None:
        anchor = sp.far().anchor(u)
    V = QMatrix.identity(sp.psi_dim)
    if inside:
        P = evaluation_point(sp, s, u, anchor)
        for i in inside:
            q = _approach_point(sp, i, P)
            M = path_transport(sp, [P, q])
            img = column_basis(sp.g[i]) if sp.phi[i] else QMatrix.zeros(sp.psi_dim, 0)
            W = preimage_space(M, img)
            V = intersect_spaces(V, W)
            if V.cols == 0:
                break
        if V.cols:
            V = column_basis(path_transport(sp, [P, anchor]) @ V)
    return V


# ---------------------------------------------------------------------------
# global cohomology on the plane


def _kernel_matrix(M: QMatrix) -> QMatrix:
    _, ker = rank_and_kernel(M)
    return QMatrix.from_columns(ker, M.cols)


def plane_cohomology(sp: SpiderSheaf):
    """(dim H^0, dim H^1, dim H^2) by Mayer-Vietoris for the plane covered by
    the punctured plane and small discs.  The loops around the points, routed
    inside the cut complement, have monodromies T_i, and the restriction of
    H^1 of the punctured plane to the punctured discs is onto, so H^2 = 0."""
    p, n = sp.psi_dim, sp.n
    I = QMatrix.identity(p)
    if n == 0:
        return (p, 0, 0)
    # H^0 of the punctured plane: common fixed vectors
    stacked = QMatrix.zeros(0, p)
    for T in sp.T:
        stacked = stacked.vstack(T - I)
    H0U = _kernel_matrix(stacked)
    kers = [_kernel_matrix(T - I) for T in sp.T]
    # A: H0(U) + sum Phi_i -> sum ker(T_i - 1), written in ker-coordinates
    rows = sum(K.cols for K in kers)
    ncols = H0U.cols + sum(sp.phi)
    A = [[Fraction(0)] * ncols for _ in range(rows)]
    r0 = 0
    c_phi = H0U.cols
    for i, K in enumerate(kers):
        if K.cols:
            left = coordinates(K, H0U) if H0U.cols else QMatrix.zeros(K.cols, 0)
            right = coordinates(K, sp.g[i]) if sp.phi[i] else QMatrix.zeros(K.cols, 0)
            for a in range(K.cols):
                for b in range(left.cols):
                    A[r0 + a][b] = left[a, b]
                for b in range(right.cols):
                    A[r0 + a][c_phi + b] = -right[a, b]
        c_phi += sp.phi[i]
        r0 += K.cols
    Am = QMatrix(A, rows, ncols) if rows and ncols else QMatrix.zeros(rows, ncols)
    rk = Am.rank()
    h0 = ncols - rk
    coker_A = rows - rk
    h1U = n * p - (p - H0U.cols)
    coker_T = sum(p - (T - I).rank() for T in sp.T)
    h1 = coker_A + (h1U - coker_T)
    return (h0, h1, 0)


def euler_two_ways(sp: SpiderSheaf):
    """Stratified Euler characteristic versus the Mayer-Vietoris dimensions."""
    strat = (1 - sp.n) * sp.psi_dim + sum(sp.phi)
    h = plane_cohomology(sp)
    return strat, h[0] - h[1] + h[2]
