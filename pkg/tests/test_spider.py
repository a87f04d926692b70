import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stokeslab.errors import DegenerateError
from stokeslab.exactcore import GR, QMatrix, Ray, intersect_spaces, rank_and_kernel
from stokeslab.laplace import laplace_fwd
from stokeslab.spider import (
    SpiderSheaf,
    euler_two_ways,
    halfplane_sections,
    loop_monodromy,
    path_transport,
    plane_cohomology,
    validate_spider,
)
from stokeslab.stokes import random_invertible, random_points, random_system

ONE = QMatrix([[1]])
EMPTY = QMatrix.zeros(1, 0)


def spider1(T, phi):
    g = ONE if phi else EMPTY
    return SpiderSheaf([0], 1, [QMatrix([[T]])], [phi], [g])


def square(c, r):
    c = GR.of(c)
    return [c + GR(r, -r), c + GR(r, r), c + GR(-r, r), c + GR(-r, -r)]


def fwd_spider(seed, nmax=3, rmax=2):
    rng = random.Random(seed)
    n = rng.randint(1, nmax)
    sys = random_system(rng, random_points(rng, n), [rng.randint(1, rmax) for _ in range(n)])
    return rng, laplace_fwd(sys, check=False)


# ---------------------------------------------------------------------------


def test_validate_examples():
    assert validate_spider(spider1(2, 0)).ok
    assert validate_spider(spider1(1, 1)).ok
    rep = validate_spider(spider1(2, 1))
    assert not rep.ok and rep.condition == "invariance"
    bad = SpiderSheaf([0], 1, [QMatrix([[0]])], [0], [EMPTY])
    assert validate_spider(bad).condition == "singular monodromy"


def test_cut_and_base_are_generic():
    pts = [GR(0), GR(1), GR(0, 1), GR(1, 1)]
    d = Ray(1, 1)
    sp = SpiderSheaf(pts, 1, [ONE] * 4, [0] * 4, [EMPTY] * 4, cut=d)
    assert validate_spider(sp).condition == "cut direction"
    sp = SpiderSheaf(pts, 1, [ONE] * 4, [0] * 4, [EMPTY] * 4)
    assert validate_spider(sp).ok


def test_halfplane_examples():
    right = Ray(1, 0)
    # the half-plane Re(t - 1) >= 0 misses the point 0
    assert halfplane_sections(spider1(2, 0), 1, right).cols == 1
    assert halfplane_sections(spider1(2, 0), -1, right).cols == 0
    assert halfplane_sections(spider1(1, 1), -1, right).cols == 1
    with pytest.raises(DegenerateError):
        halfplane_sections(spider1(2, 0), GR(0, 5), right)


def test_plane_cohomology_examples():
    assert plane_cohomology(spider1(2, 0)) == (0, 0, 0)
    # the constant sheaf on the plane
    assert plane_cohomology(spider1(1, 1)) == (1, 0, 0)
    # extension by zero from the punctured plane: relative cohomology of
    # (plane, point) vanishes since both are contractible
    assert plane_cohomology(spider1(1, 0)) == (0, 0, 0)


def test_plane_cohomology_constant_sheaf_several_points():
    pts = [GR(0), GR(2, 1), GR(-1, 3)]
    I2 = QMatrix.identity(2)
    sp = SpiderSheaf(pts, 2, [I2] * 3, [2] * 3, [I2] * 3)
    assert plane_cohomology(sp) == (2, 0, 0)
    # j_! k on the plane minus three points: H^1 = k^2 (three points, one
    # component)
    sp = SpiderSheaf(pts, 1, [ONE] * 3, [0] * 3, [EMPTY] * 3)
    assert plane_cohomology(sp) == (0, 2, 0)


def test_loop_examples():
    T0, T1 = QMatrix([[1, 1], [0, 1]]), QMatrix([[2, 0], [1, 1]])
    pts = [GR(0), GR(3, 1)]
    Z = QMatrix.zeros(2, 0)
    sp = SpiderSheaf(pts, 2, [T0, T1], [0, 0], [Z, Z])
    # contractible square away from both points
    assert loop_monodromy(sp, square(GR(-5, -5), 1)).is_identity()
    # a small counterclockwise square around one point crosses its cut once
    assert loop_monodromy(sp, square(pts[0], Fraction(1, 2))) == T0
    assert loop_monodromy(sp, list(reversed(square(pts[1], Fraction(1, 2))))) == T1.inverse()
    # a large loop crosses the parallel cuts in order of their lateral offset
    order = sorted(range(2), key=lambda i: sp.lat(pts[i]))
    want = sp.T[order[1]] @ sp.T[order[0]]
    assert loop_monodromy(sp, sp.far().corners()) == want


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_loop_refinement_invariance(seed):
    rng = random.Random(seed)
    pts = random_points(rng, 3)
    sp = SpiderSheaf(pts, 2, [random_invertible(rng, 2) for _ in pts], [0] * 3, [QMatrix.zeros(2, 0)] * 3)
    path = sp.far().corners()
    M = loop_monodromy(sp, path)
    fine = []
    for P, Q in zip(path, path[1:] + path[:1]):
        mids = [P + (Q - P) * Fraction(k, 8) for k in range(1, 8)]
        fine += [P, rng.choice([m for m in mids if sp.far().good_point(m)])]
    assert loop_monodromy(sp, fine) == M
    # open path then its reverse is trivial
    w = path[:3]
    assert (path_transport(sp, w[::-1]) @ path_transport(sp, w)).is_identity()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 100_000))
def test_euler_two_ways(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    pts = random_points(rng, n)
    p = rng.randint(1, 2)
    T = [QMatrix.identity(p) if rng.random() < 0.5 else random_invertible(rng, p) for _ in pts]
    gs, phis = [], []
    for M in T:
        _, ker = rank_and_kernel(M - QMatrix.identity(p))
        g = QMatrix.from_columns(ker, p)
        gs.append(g)
        phis.append(g.cols)
    sp = SpiderSheaf(pts, p, T, phis, gs)
    assert validate_spider(sp).ok
    strat, mv = euler_two_ways(sp)
    assert strat == mv


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 100_000))
def test_transformed_spiders_are_acyclic_with_injective_g(seed):
    _, sp = fwd_spider(seed)
    assert validate_spider(sp).ok
    assert plane_cohomology(sp) == (0, 0, 0)
    for g, d in zip(sp.g, sp.phi):
        assert g.rank() == d


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 100_000))
def test_halfplane_monotone(seed):
    rng, sp = fwd_spider(seed)
    u = rng.choice([Ray(1, 0), Ray(0, 1), Ray(-1, 2), Ray(-3, -1)])
    s = GR(Fraction(rng.randint(-9, 9), 4), Fraction(rng.randint(-9, 9), 4))
    step = GR(u.x, u.y) * Fraction(1, 3)
    try:
        big = halfplane_sections(sp, s, u)
        small = halfplane_sections(sp, s + step, u)
    except DegenerateError:
        return
    assert intersect_spaces(big, small).cols == big.cols
    # far enough out the half-plane holds no point
    far = s + GR(u.x, u.y) * (4 * sp.far().R)
    assert halfplane_sections(sp, far, u).cols == sp.psi_dim
