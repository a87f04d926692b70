import itertools
import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stokeslab.errors import ValidationError
from stokeslab.exactcore import GR
from stokeslab.newton import (
    ResidueMatrix,
    TwistConfig,
    bernstein_rank_one,
    criterion_eigenvalues,
    integral_coef_check,
    is_generic,
    jumping_indices_nonintegral,
    lp_feasible,
    newton_polyhedron,
    nonresonant,
    resonance_relation,
    twisted_np,
    vertex_hyperplanes,
)


def weight_oracle(gens, bound=10):
    """Vertices of conv + octant for l = 2 by scanning positive integer
    weights: g is a vertex iff some w > 0 has g as its unique minimizer.
    With entries of |g| at most 5 every normal cone contains a weight with
    entries at most 10."""
    gens = set(gens)
    out = set()
    for w in itertools.product(range(1, bound + 1), repeat=2):
        vals = {g: w[0] * g[0] + w[1] * g[1] for g in gens}
        m = min(vals.values())
        best = [g for g, v in vals.items() if v == m]
        if len(best) == 1:
            out.add(best[0])
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# polyhedra


def test_polyhedron_examples():
    assert newton_polyhedron([(-2, 0), (0, -1)]).vertices == ((-2, 0), (0, -1))
    # (-1, -1) is no convex combination of the other two plus the octant,
    # but it dominates (0, -1), which therefore drops out
    assert newton_polyhedron([(-2, 0), (0, -1), (-1, -1)]).vertices == ((-2, 0), (-1, -1))
    assert newton_polyhedron([(-2, 0), (0, -2), (-1, -1)]).vertices == ((-2, 0), (0, -2))
    assert newton_polyhedron([(-4, 0), (0, -4), (-3, -3)]).vertices == ((-4, 0), (-3, -3), (0, -4))
    assert newton_polyhedron([(-2, 0), (0, -2), (-1, 0)]).vertices == ((-2, 0), (0, -2))
    assert newton_polyhedron([(-2, 0), (-1, 0)]).vertices == ((-2, 0),)
    with pytest.raises(ValidationError):
        newton_polyhedron([(-1, 0), (-1,)])
    with pytest.raises(ValidationError):
        newton_polyhedron([(1, 0)])


def test_lp_with_dependent_equations():
    # x + y = 1 stated twice, x - y = 0
    x = lp_feasible([([1, 1], 1), ([2, 2], 2), ([1, -1], 0)], [], 2)
    assert x == [Fraction(1, 2), Fraction(1, 2)]
    assert lp_feasible([([1, 1], -1)], [], 2) is None


vec2 = st.tuples(st.integers(-5, 0), st.integers(-5, 0))
vec3 = st.tuples(st.integers(-5, 0), st.integers(-5, 0), st.integers(-5, 0))


@settings(max_examples=80, deadline=None)
@given(st.lists(vec2, min_size=1, max_size=7))
def test_polyhedron_against_weight_scan(gens):
    assert newton_polyhedron(gens).vertices == weight_oracle(gens)


@settings(max_examples=40, deadline=None)
@given(st.lists(vec3, min_size=1, max_size=6), st.integers(0, 100))
def test_vertex_minimality(gens, k):
    P = newton_polyhedron(gens)
    for a in P.vertices:
        for b in P.vertices:
            assert a == b or not all(x >= y for x, y in zip(a, b))
    # a generator dominated by a vertex never changes the output
    v = P.vertices[k % len(P.vertices)]
    extra = tuple(min(0, x + (k >> j) % 2) for j, x in enumerate(v))
    assert newton_polyhedron(list(gens) + [extra]).vertices == P.vertices


# ---------------------------------------------------------------------------
# twists


def test_hyperplane_examples():
    cfg = TwistConfig(1, (0,), 0, (((2,), 1),))
    (h,) = vertex_hyperplanes(cfg)
    assert h.contains([0]) and not h.contains([1]) and h.describe() == "(1)*a1 = 0"
    cfg = TwistConfig(1, (2,), 1, (((2,), 1),))
    (h,) = vertex_hyperplanes(cfg)
    assert h.contains([-1]) and h.describe() == "(1) + (1)*a1 = 0"
    cfg = TwistConfig(2, (2, 0), 1, (((0, 3), 1),))
    hs = vertex_hyperplanes(cfg)
    assert [h.vertex for h in hs] == [(0, -3)]


def test_twisted_examples():
    cfg = TwistConfig(2, (2, 0), 1, (((0, 3), 1),))
    assert twisted_np(cfg, [GR(5)]).vertices == cfg.polyhedron().vertices
    cfg = TwistConfig(2, (2, 2), 1, (((2, 2), 1), ((3, 0), 1)))
    assert twisted_np(cfg, [GR(-1), GR(1)]).vertices == ((-3, 0),)
    with pytest.raises(ValidationError) as err:
        twisted_np(TwistConfig(1, (0,), 0, (((1,), 1),)), [0])
    assert err.value.condition == "zero function"
    assert is_generic(TwistConfig(1, (0,), 0, (((1,), 1),)), [1])
    assert not is_generic(TwistConfig(1, (2,), 1, (((2,), 1),)), [-1])
    lone = TwistConfig(1, (2,), 1)
    assert vertex_hyperplanes(lone) == [] and is_generic(lone, [])


def random_config(rng):
    ell = rng.randint(1, 3)
    r = rng.randint(1, 3)
    pool = [tuple(rng.randint(0, 5) for _ in range(ell)) for _ in range(3)]
    phi_exp = rng.choice(pool)
    phi_unit = GR(rng.randint(-2, 2), rng.randint(-2, 2))
    eta = []
    for _ in range(r):
        eta.append((rng.choice(pool), GR(rng.choice([-2, -1, 1, 2]), rng.randint(-1, 1))))
    return TwistConfig(ell, phi_exp, phi_unit, tuple(eta))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_np_equality(seed):
    rng = random.Random(seed)
    cfg = random_config(rng)
    full = cfg.polyhedron().vertices
    a = [GR(Fraction(rng.randint(-9, 9), rng.randint(1, 4)), rng.randint(-2, 2)) for _ in range(cfg.r)]
    if is_generic(cfg, a):
        assert twisted_np(cfg, a).vertices == full
    hs = vertex_hyperplanes(cfg)
    if not hs:
        return
    h = rng.choice(hs)
    k = next(j for j, c in enumerate(h.coeffs) if not c.is_zero())
    rest = h.const + sum((c * x for j, (c, x) in enumerate(zip(h.coeffs, a)) if j != k), GR(0))
    a[k] = -rest / h.coeffs[k]
    assert h.contains(a)
    if sum(g.contains(a) for g in hs) != 1:
        return
    try:
        P = twisted_np(cfg, a)
    except ValidationError:
        return
    assert h.vertex not in P.vertices


# ---------------------------------------------------------------------------
# residues


def test_nonresonant_examples():
    assert not nonresonant([1, -1]) and resonance_relation([1, -1]) == (1, 1)
    assert nonresonant([1, 1])
    assert resonance_relation([GR(1), GR(0, 1), GR(-1, -1)]) == (1, 1, 1)
    with pytest.raises(ValidationError):
        nonresonant([1, 0])


gauss = st.builds(GR, st.integers(-3, 3), st.integers(-3, 3)).filter(lambda z: not z.is_zero())


@settings(max_examples=80, deadline=None)
@given(st.lists(gauss, min_size=1, max_size=5), st.fractions(min_value=Fraction(1, 7), max_value=7), st.randoms())
def test_nonresonant_invariance(res, scale, rnd):
    base = nonresonant(res)
    perm = list(res)
    rnd.shuffle(perm)
    assert nonresonant(perm) == base
    assert nonresonant([r * scale for r in res]) == base
    m = resonance_relation(res)
    if m is not None:
        assert all(x >= 0 for x in m) and any(m)
        assert sum((x * r for x, r in zip(m, res)), GR(0)).is_zero()
    else:
        for mm in itertools.product(range(4), repeat=len(res)):
            if any(mm):
                assert not sum((x * r for x, r in zip(mm, res)), GR(0)).is_zero()


def test_integral_coef_examples():
    assert integral_coef_check(ResidueMatrix(((1,),), ((0,),), 1), [Fraction(1, 2)]).ok
    res = integral_coef_check(ResidueMatrix(((1,),), ((Fraction(1, 3),),), 3), [0])
    assert not res.ok and res.violated[0][0] == 0
    res = integral_coef_check(ResidueMatrix(((0, 1),), ((Fraction(1, 2),), (Fraction(1, 2),)), 1), [1])
    assert res.degenerate == [0]
    # a nonzero imaginary part is never in the lattice
    assert integral_coef_check(ResidueMatrix(((1,),), ((0,),), 5), [GR(0, 1)]).ok


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 12), st.lists(st.fractions(max_denominator=12), min_size=1, max_size=3),
       st.lists(st.fractions(max_denominator=6), min_size=2, max_size=2))
def test_integral_coef_divisors(d, alphas, a):
    rm = lambda dd: ResidueMatrix(((1, 2), (Fraction(1, 2), -1)), (tuple(alphas), tuple(reversed(alphas))), dd)
    big = integral_coef_check(rm(d), a).ok
    for dp in range(1, d + 1):
        if d % dp == 0 and not integral_coef_check(rm(dp), a).ok:
            assert not big


def test_criterion_and_bernstein():
    assert not criterion_eigenvalues([Fraction(1, 3)], 3)
    assert criterion_eigenvalues([Fraction(1, 5)], 3)
    assert criterion_eigenvalues([GR(Fraction(1, 2), 1)], 100)
    assert bernstein_rank_one(Fraction(1, 2), 1, False) == (GR(1), GR(Fraction(1, 2)))
    assert bernstein_rank_one(Fraction(1, 2), 1, True) == (GR(1),)
    assert bernstein_rank_one(0, 1, False) == (GR(1), GR(1))
    assert not jumping_indices_nonintegral(0)
    assert jumping_indices_nonintegral(Fraction(1, 2))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        bernstein_rank_one(3, 1, False)
    assert w
