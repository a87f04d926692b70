"""Newton polyhedra of twisted functions, genericity, and residue conditions.

Exponents are stored as e in N^l; the polyhedron of a family of monomials
x^{-e} is the convex hull of the octants -e + R_{>=0}^l, kept as its vertex
set.  All feasibility questions are tiny bounded linear programs, decided
exactly by enumerating basic solutions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

from .errors import ValidationError
from .exactcore import GaussianRational, QMatrix, solve_or_invert

__all__ = [
    "lp_feasible",
    "NewtonPolyhedron",
    "newton_polyhedron",
    "TwistConfig",
    "Hyperplane",
    "vertex_hyperplanes",
    "twisted_np",
    "is_generic",
    "nonresonant",
    "resonance_relation",
    "ResidueMatrix",
    "IntegralCoefResult",
    "in_lattice",
    "integral_coef_check",
    "criterion_eigenvalues",
    "bernstein_rank_one",
    "jumping_indices_nonintegral",
]

GR = GaussianRational


# ---------------------------------------------------------------------------
# exact feasibility


def lp_feasible(eqs, ineqs, nvars):
    """A point x >= 0 with E x = e and A x <= a, or None.

    ``eqs`` and ``ineqs`` are lists of (row, rhs).  The feasible set must be
    bounded (every caller normalizes by sum x = 1), so it is empty or has a
    vertex, and vertices are cut out by nvars independent tight constraints."""
    eqs = [([Fraction(v) for v in r], Fraction(b)) for r, b in eqs]
    ineqs = [([Fraction(v) for v in r], Fraction(b)) for r, b in ineqs]
    bounds = [([Fraction(int(j == k)) for j in range(nvars)], Fraction(0)) for k in range(nvars)]
    optional = ineqs + bounds
    # dependent equations (say a zero imaginary row) need extra tight rows
    for size in range(max(0, nvars - len(eqs)), nvars + 1):
        for pick in combinations(range(len(optional)), size):
            rows = eqs + [optional[p] for p in pick]
            M = QMatrix([r for r, _ in rows])
            rhs = QMatrix([[b] for _, b in rows])
            try:
                x, ker = solve_or_invert(M, rhs)
            except ValidationError:
                continue
            if ker:
                continue
            x = [x[i, 0] for i in range(nvars)]
            if any(v < 0 for v in x):
                continue
            if any(sum(c * v for c, v in zip(r, x)) > b for r, b in ineqs):
                continue
            return x
    return None


# ---------------------------------------------------------------------------
# Newton polyhedra


@dataclass(frozen=True)
class NewtonPolyhedron:
    dim: int
    vertices: tuple

    def __post_init__(self):
        vs = tuple(sorted(set(tuple(int(x) for x in v) for v in self.vertices)))
        object.__setattr__(self, "vertices", vs)

    def to_doc(self):
        return {"dim": self.dim, "vertices": [list(v) for v in self.vertices]}


def _dominates(a, b):
    """a in b + R_{>=0}^l, a != b."""
    return a != b and all(x >= y for x, y in zip(a, b))


def _in_hull_plus_octant(g, others):
    """g in conv(others) + R_{>=0}^l, i.e. some convex combination is <= g."""
    if not others:
        return False
    m, l = len(others), len(g)
    eqs = [([1] * m, 1)]
    ineqs = [([h[k] for h in others], g[k]) for k in range(l)]
    return lp_feasible(eqs, ineqs, m) is not None


def newton_polyhedron(generators) -> NewtonPolyhedron:
    gens = [tuple(int(x) for x in g) for g in generators]
    if not gens:
        raise ValidationError("newton", "no generators")
    l = len(gens[0])
    if any(len(g) != l for g in gens):
        raise ValidationError("newton", "dimension mismatch")
    if any(x > 0 for g in gens for x in g):
        raise ValidationError("newton", "generators must lie in (-N)^l")
    gens = sorted(set(gens))
    gens = [g for g in gens if not any(_dominates(g, h) for h in gens)]
    verts = [g for g in gens if not _in_hull_plus_octant(g, [h for h in gens if h != g])]
    return NewtonPolyhedron(l, verts)


# ---------------------------------------------------------------------------
# twists


@dataclass(frozen=True)
class TwistConfig:
    """phi = u_phi x^{-e(phi)} and eta_k = u_k x^{-e(eta_k)}, leading units only."""

    ell: int
    phi_exp: tuple
    phi_unit: GaussianRational
    eta: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "phi_exp", tuple(int(x) for x in self.phi_exp))
        object.__setattr__(self, "phi_unit", GR.of(self.phi_unit))
        object.__setattr__(self, "eta", tuple((tuple(int(x) for x in e), GR.of(u)) for e, u in self.eta))
        for e in [self.phi_exp] + [e for e, _ in self.eta]:
            if len(e) != self.ell or any(x < 0 for x in e):
                raise ValidationError("twist", "exponents must lie in N^l")
        if self.phi_unit.is_zero() and all(u.is_zero() for _, u in self.eta):
            raise ValidationError("twist", "at least one nonzero term is needed")

    @property
    def r(self):
        return len(self.eta)

    def exponents(self):
        """Exponents e of the nonzero terms (monomials x^{-e})."""
        out = [self.phi_exp] if not self.phi_unit.is_zero() else []
        out += [e for e, u in self.eta if not u.is_zero()]
        return out

    def polyhedron(self):
        return newton_polyhedron([tuple(-x for x in e) for e in self.exponents()])


@dataclass(frozen=True)
class Hyperplane:
    """const + sum_k coeffs[k] a_k = 0, attached to the vertex -e."""

    vertex: tuple
    const: GaussianRational
    coeffs: tuple

    def value(self, a):
        return self.const + sum((c * GR.of(x) for c, x in zip(self.coeffs, a)), GR(0))

    def contains(self, a):
        return self.value(a).is_zero()

    def describe(self):
        terms = [f"({c})*a{k + 1}" for k, c in enumerate(self.coeffs) if not c.is_zero()]
        if not self.const.is_zero():
            terms.insert(0, f"({self.const})")
        return " + ".join(terms) + " = 0"


def vertex_hyperplanes(cfg: TwistConfig):
    out = []
    for v in cfg.polyhedron().vertices:
        e = tuple(-x for x in v)
        const = cfg.phi_unit if cfg.phi_exp == e else GR(0)
        coeffs = tuple(u if ee == e else GR(0) for ee, u in cfg.eta)
        if all(c.is_zero() for c in coeffs):
            # constant equation: empty when const != 0 (const = 0 cannot occur at a vertex)
            continue
        out.append(Hyperplane(v, const, coeffs))
    return out


def twisted_np(cfg: TwistConfig, a) -> NewtonPolyhedron:
    a = [GR.of(x) for x in a]
    if len(a) != cfg.r:
        raise ValidationError("twist", "one coefficient per eta term expected")
    total = {}
    total[cfg.phi_exp] = total.get(cfg.phi_exp, GR(0)) + cfg.phi_unit
    for (e, u), ak in zip(cfg.eta, a):
        total[e] = total.get(e, GR(0)) + ak * u
    alive = [tuple(-x for x in e) for e, c in total.items() if not c.is_zero()]
    if not alive:
        raise ValidationError("zero function", "all coefficients vanish")
    return newton_polyhedron(alive)


def is_generic(cfg: TwistConfig, a) -> bool:
    return not any(h.contains(a) for h in vertex_hyperplanes(cfg))


# ---------------------------------------------------------------------------
# residues


def resonance_relation(residues):
    """Nonzero m in N^k with sum m_i res_i = 0, or None."""
    res = [GR.of(r) for r in residues]
    if any(r.is_zero() for r in res):
        raise ValidationError("residue", "residues must be nonzero")
    k = len(res)
    if k == 0:
        return None
    eqs = [([1] * k, 1), ([r.re for r in res], 0), ([r.im for r in res], 0)]
    x = lp_feasible(eqs, [], k)
    if x is None:
        return None
    den = 1
    for v in x:
        den = den * v.denominator // _gcd(den, v.denominator)
    m = [int(v * den) for v in x]
    g = 0
    for v in m:
        g = _gcd(g, v)
    return tuple(v // g for v in m)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def nonresonant(residues) -> bool:
    return resonance_relation(residues) is None


@dataclass(frozen=True)
class ResidueMatrix:
    """res[k][i] for forms k and components i, exponent sets A[i], order d."""

    res: tuple
    A: tuple
    d: int

    def __post_init__(self):
        object.__setattr__(self, "res", tuple(tuple(GR.of(x) for x in row) for row in self.res))
        object.__setattr__(self, "A", tuple(tuple(GR.of(x) for x in s) for s in self.A))
        if self.d < 1:
            raise ValidationError("residue", "d must be positive")
        if any(len(row) != len(self.A) for row in self.res):
            raise ValidationError("residue", "one residue per component in every form")

    @property
    def r(self):
        return len(self.res)

    @property
    def components(self):
        return len(self.A)


class IntegralCoefResult(NamedTuple):
    ok: bool
    violated: list
    degenerate: list


def in_lattice(z, d) -> bool:
    """z in (1/d)Z; a nonzero imaginary part is never in the lattice."""
    z = GR.of(z)
    return z.im == 0 and (z.re * d).denominator == 1


def integral_coef_check(rm: ResidueMatrix, a) -> IntegralCoefResult:
    a = [GR.of(x) for x in a]
    if len(a) != rm.r:
        raise ValidationError("residue", "one coefficient per form expected")
    violated, degenerate = [], []
    for i in range(rm.components):
        shift = sum((a[k] * rm.res[k][i] for k in range(rm.r)), GR(0))
        if all(rm.res[k][i].is_zero() for k in range(rm.r)):
            degenerate.append(i)
        for alpha in rm.A[i]:
            v = alpha + shift
            if in_lattice(v, rm.d):
                violated.append((i, alpha, v))
    return IntegralCoefResult(not violated, violated, degenerate)


def criterion_eigenvalues(alphas, d) -> bool:
    """No exp(-2 pi i alpha) is a root of unity of order <= d."""
    for a in alphas:
        a = GR.of(a)
        if a.im != 0:
            continue
        if a.re.denominator <= d:
            return False
    return True


def bernstein_rank_one(alpha_i, m_i, in_pole_support):
    """Coefficients (leading first) of the Bernstein polynomial along D_i."""
    alpha_i = GR.of(alpha_i)
    if in_pole_support:
        return (GR(1),)
    if not m_i > alpha_i.re:
        warnings.warn("m_i should exceed the real part of alpha_i", stacklevel=2)
    return (GR(1), -(alpha_i - m_i))


def jumping_indices_nonintegral(alpha_i) -> bool:
    alpha_i = GR.of(alpha_i)
    return not (alpha_i.im == 0 and alpha_i.re.denominator == 1)
