import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from stokeslab import io
from stokeslab.circle import sheaf_cohomology
from stokeslab.errors import DegenerateError
from stokeslab.exactcore import GR, QMatrix, Ray
from stokeslab.laplace import (
    _geometry,
    antipodal_reindex,
    costokes_sheaf,
    costokes_to_stokes,
    find_filtered_isomorphism,
    frame_route,
    laplace_bwd,
    laplace_fwd,
    local_loop,
    roundtrip_report,
    sandwich,
    spider_roundtrip_report,
    transport,
    transport_path,
)
from stokeslab.spider import SpiderSheaf, halfplane_sections
from stokeslab.stokes import StokesSystem, conjugate_by_arcs, random_points, random_system, validate
from stokeslab.suites import fine_transport

FIX = Path(__file__).parent / "fixtures"
IDENT = StokesSystem([0, 1], [1, 1])


def seeded(seed, nmax=3, rmax=2):
    rng = random.Random(seed)
    n = rng.randint(1, nmax)
    return rng, random_system(rng, random_points(rng, n), [rng.randint(1, rmax) for _ in range(n)])


def third_point(rng, pts, spread=4):
    while True:
        t = GR(Fraction(rng.randint(-4 * spread, 4 * spread), 4), Fraction(rng.randint(-4 * spread, 4 * spread), 4))
        if t not in pts:
            return t


def on_segment(c, a, b):
    d, e = b - a, c - a
    if d.re * e.im - d.im * e.re != 0:
        return False
    x = e.re * d.re + e.im * d.im
    return 0 <= x <= d.re * d.re + d.im * d.im


def clear(pts, *segs):
    return all(not on_segment(c, a, b) for a, b in segs for c in pts)


# ---------------------------------------------------------------------------
# transport


def test_transport_basics():
    t0, t1 = GR(Fraction(1, 2), 1), GR(-1, Fraction(-3, 2))
    assert transport(IDENT, t0, t0).is_identity()
    A, B = transport(IDENT, t0, t1), transport(IDENT, t1, t0)
    assert (B @ A).is_identity()
    sq = [GR(3, 3), GR(5, 3), GR(5, 5), GR(3, 5)]
    assert transport_path(IDENT, sq, closed=True).is_identity()
    with pytest.raises(DegenerateError):
        transport(IDENT, GR(-1), GR(2))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000))
def test_transport_refinement_and_inverse(seed):
    rng, sys = seeded(seed)
    pts = sys.points
    t0, t1 = third_point(rng, pts), third_point(rng, pts)
    if t0 == t1 or not clear(pts, (t0, t1)):
        return
    m = t0 + (t1 - t0) * Fraction(rng.randint(1, 9), 10)
    A = transport(sys, t0, t1)
    assert transport(sys, m, t1) @ transport(sys, t0, m) == A
    assert (transport(sys, t1, t0) @ A).is_identity()


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 100_000))
def test_fixed_subdivision_oracle(seed):
    rng, sys = seeded(seed, nmax=2)
    pts = sys.points
    t0, t1 = third_point(rng, pts), third_point(rng, pts)
    if t0 == t1 or not clear(pts, (t0, t1)):
        return
    try:
        oracle = fine_transport(sys, t0, t1, steps=64)
    except DegenerateError:
        # a uniform piece straddles a degenerate configuration
        return
    assert oracle == transport(sys, t0, t1)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000))
def test_contractible_triangle(seed):
    rng, sys = seeded(seed)
    pts = sys.points
    a, b, c = (third_point(rng, pts) for _ in range(3))
    if len({a, b, c}) < 3 or not clear(pts, (a, b), (b, c), (c, a)):
        return
    # a triangle enclosing no point: every point lies outside
    def inside(z):
        s = [((q - p) * (z - p).conj()).im for p, q in ((a, b), (b, c), (c, a))]
        return all(x > 0 for x in s) or all(x < 0 for x in s)

    if any(inside(z) for z in pts):
        return
    assert transport_path(sys, [a, b, c], closed=True).is_identity()


def test_monodromy_winding_enlarged_loop():
    sys = StokesSystem([0, 1], [1, 1], transitions={Ray(0, 1): QMatrix([[1, 5], [0, 1]]), Ray(0, -1): QMatrix([[1, 0], [-2, 1]])})
    geo = _geometry(sys.points)
    for i, c in enumerate(sys.points):
        x, loop = local_loop(geo, i)
        lv, la = geo.level(x), geo.lat(x)
        h = geo.lat(c) - la
        # same lateral band, stretched far back along the cut direction
        big = [x, geo.from_coords(lv, la + 2 * h), geo.from_coords(lv - 7 * h, la + 2 * h), geo.from_coords(lv - 7 * h, la)]
        assert transport_path(sys, big, closed=True) == transport_path(sys, loop, closed=True)


# ---------------------------------------------------------------------------
# forward transform


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 100_000))
def test_forward_dimensions(seed):
    _, sys = seeded(seed, nmax=3, rmax=2)
    sp = laplace_fwd(sys)
    assert sp.psi_dim == sum(sys.ranks)
    assert sp.phi == tuple(sum(sys.ranks) - r for r in sys.ranks)
    for g in sp.g:
        assert g.rank() == g.cols


def fwd_oracle(sys):
    """Forward data recomputed with the fixed 64-step subdivision."""
    geo = _geometry(sys.points)

    def along(waypoints, closed=False):
        pts = list(waypoints) + ([waypoints[0]] if closed else [])
        M = QMatrix.identity(sum(sys.ranks))
        for a, b in zip(pts, pts[1:]):
            M = fine_transport(sys, a, b) @ M
        return M

    Ts, gs = [], []
    for i, c in enumerate(sys.points):
        x, loop = local_loop(geo, i)
        P = along(frame_route(geo, x))
        Ts.append(P.inverse() @ along(loop, closed=True) @ P)
        for k in range(40):
            p = c + (x - c) * Fraction(1, 2 ** k)
            _, A0, A1 = sandwich(sys, c, p)
            if A0.is_invertible():
                break
        G = A1 @ A0.inverse()
        if p != x:
            G = fine_transport(sys, p, x) @ G
        gs.append(P.inverse() @ G)
    return Ts, gs


@pytest.mark.parametrize("name", ["identity", "unipotent"])
def test_forward_golden(name):
    sys = io.load(FIX / f"stokes_{name}.json")
    golden = io.load(FIX / f"spider_{name}.json")
    sp = laplace_fwd(sys)
    assert sp == golden
    Ts, gs = fwd_oracle(sys)
    assert list(sp.T) == Ts and list(sp.g) == gs


# ---------------------------------------------------------------------------
# backward transform


def test_backward_twisted_point():
    sp = SpiderSheaf([0], 1, [QMatrix([[2]])], [0], [QMatrix.zeros(1, 0)])
    co = laplace_bwd(sp)
    assert all(S.cols == 0 for row in co.subspaces for S in row)
    assert co.validate().ok
    F = costokes_sheaf(sp, 0)
    assert sheaf_cohomology(F).dims == (0, 0)
    # s deep inside the half-plane of u: every point is a condition
    u = Ray(1, 0)
    assert halfplane_sections(sp, GR(-10), u).cols == 0
    # s far out along u: no condition
    assert halfplane_sections(sp, GR(10), u).cols == 1


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 100_000))
def test_backward_cohomology_dimensions(seed):
    rng, sys = seeded(seed, nmax=3, rmax=2)
    sp = laplace_fwd(sys)
    for j, c in enumerate(sp.points):
        assert sheaf_cohomology(costokes_sheaf(sp, c)).dims == (0, sp.phi[j])
    t = third_point(rng, sp.points)
    assert sheaf_cohomology(costokes_sheaf(sp, t)).dims == (0, sp.psi_dim)
    co = laplace_bwd(sp)
    for k, u in enumerate(co.complex.representatives):
        far = GR(u.x, u.y) * (4 * sp.far().R)
        assert halfplane_sections(sp, far, u).cols == sp.psi_dim
    assert validate(costokes_to_stokes(co)).ok


def test_graded_system_reconstructs_graded():
    st_ = costokes_to_stokes(laplace_bwd(laplace_fwd(IDENT)))
    assert st_.ranks == (1, 1)
    assert all(S.is_identity() for S in st_.S)


def test_antipodal_reindex():
    sys = StokesSystem([0, GR(1, 1)], [1, 2])
    co = laplace_bwd(laplace_fwd(sys))
    flip = antipodal_reindex(co)
    assert flip.validate().ok
    assert antipodal_reindex(flip) == co
    st_ = costokes_to_stokes(flip)
    assert st_.points == (GR(0), GR(-1, -1)) and st_.ranks == (1, 2)


# ---------------------------------------------------------------------------
# round trips


def test_roundtrip_examples():
    rep = roundtrip_report(IDENT)
    assert rep.verdict == "pass" and rep.isomorphism is not None
    for m in (2, -1, Fraction(3, 2)):
        sys = StokesSystem([GR(1, 2)], [1], monodromy=QMatrix([[m]]))
        rep = roundtrip_report(sys)
        assert rep.verdict == "pass"
        back = costokes_to_stokes(laplace_bwd(laplace_fwd(sys)))
        assert back.S[0] @ back.S[1] == QMatrix([[m]])


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 100_000))
def test_roundtrip_random(seed):
    _, sys = seeded(seed, nmax=3, rmax=2)
    assert roundtrip_report(sys, search_iso=False).verdict == "pass"
    sp = laplace_fwd(sys)
    assert spider_roundtrip_report(sp).verdict == "pass"


def test_explicit_isomorphism_of_conjugate():
    sys = StokesSystem([0, GR(1, 1)], [1, 1], transitions={Ray(1, -1): QMatrix([[1, 0], [3, 1]]), Ray(-1, 1): QMatrix([[1, 2], [0, 1]])})
    assert validate(sys).ok
    maps = [QMatrix.diag([1, -1])] * sys.complex.n_arcs
    conj = conjugate_by_arcs(sys, maps)
    assert find_filtered_isomorphism(sys, conj) is not None
