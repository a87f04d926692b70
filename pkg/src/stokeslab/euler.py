"""Irregularity numbers of elementary rank-one models and Euler characteristics.

The model is d + d(phi) + sum alpha_i dx_i/x_i with phi = u x^{-e}.  Its
irregularity is the Euler characteristic with compact support of the open
subset of the torus (S^1)^l where Re(phi(0) e^{-i<e, theta>}) > 0.  The sign
is that of chi; the classical irregularity is its negation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, prod

from .errors import ValidationError
from .exactcore import GaussianRational, Ray, dominance, ray_normalize

__all__ = [
    "ElementaryModel",
    "StratumDatum",
    "irr_elementary",
    "classical_irregularity",
    "torus_chi_c",
    "torus_cells",
    "chi_stratified",
    "TripleReport",
    "check_triple_equality",
    "ramified_irr",
    "dual_model",
    "twist_model",
    "sample_directions",
]

GR = GaussianRational


@dataclass(frozen=True)
class ElementaryModel:
    ell: int
    e: tuple
    phi_leading: GaussianRational
    alpha: tuple = ()
    rank: int = 1

    def __post_init__(self):
        object.__setattr__(self, "e", tuple(int(x) for x in self.e))
        object.__setattr__(self, "phi_leading", GR.of(self.phi_leading))
        alpha = tuple(GR.of(a) for a in self.alpha) if self.alpha else tuple(GR(0) for _ in range(self.ell))
        object.__setattr__(self, "alpha", alpha)
        if self.ell < 1:
            raise ValidationError("model", "at least one divisor branch is needed")
        if len(self.e) != self.ell or len(self.alpha) != self.ell:
            raise ValidationError("model", "e and alpha need one entry per branch")
        if any(x < 0 for x in self.e):
            raise ValidationError("model", "pole orders are nonnegative")
        if self.rank < 1:
            raise ValidationError("model", "rank must be positive")
        if self.phi_leading.is_zero() and any(self.e):
            raise ValidationError("model", "phi = 0 forces e = 0")

    @property
    def phi_zero(self):
        return self.phi_leading.is_zero()


@dataclass(frozen=True)
class StratumDatum:
    chi_local: int
    chi_stratum: int


def irr_elementary(m: ElementaryModel) -> int:
    """Closed form: 0 if phi = 0 or l >= 2, and -e_1 * rank for l = 1."""
    if m.phi_zero or m.ell >= 2:
        return 0
    return -m.e[0] * m.rank


def classical_irregularity(m: ElementaryModel) -> int:
    return -irr_elementary(m)


# ---------------------------------------------------------------------------
# cell oracle on the torus


def torus_cells(e, phi_leading):
    """Cells of (S^1)^l (l <= 2) adapted to {Re(phi(0) w) > 0}, w = e^{-i<e,theta>}.

    Write e = g e' with e' primitive.  theta -> <e', theta> is a fibration
    over S^1 with connected fibers (a point for l = 1, a circle for l = 2),
    and w is its composite with the g-fold cover.  On the w-circle the
    boundary consists of the two rays +-i conj(phi(0)); each arc between them
    lifts to g arcs.  Returns a list of (dimension, inside) pairs."""
    e = tuple(int(x) for x in e)
    phi = GR.of(phi_leading)
    if len(e) not in (1, 2):
        raise ValidationError("torus", "the cell oracle handles one or two branches")
    if not any(e) or phi.is_zero():
        raise ValidationError("torus", "need e != 0 and phi(0) != 0")
    g = 0
    for x in e:
        g = gcd(g, abs(x))
    # w-circle: the condition is dominance(w, 0, conj(phi)) > 0, exactly
    nu = ray_normalize(phi.conj())
    b = nu.rot90()
    w_cells = [(0, False), (0, False)]
    for rep in (Ray(nu.x, nu.y), Ray(-nu.x, -nu.y)):
        w_cells.append((1, dominance(GR(rep.x, rep.y), 0, nu) > 0))
    assert all(dominance(GR(v.x, v.y), 0, nu) == 0 for v in (b, b.antipode()))
    fiber = [(0,)] if len(e) == 1 else [(0,), (1,)]
    cells = []
    for dim, inside in w_cells:
        for _ in range(g):
            for (fd,) in fiber:
                cells.append((dim + fd, inside))
    return cells


def torus_chi_c(e, phi_leading) -> int:
    """Sum of (-1)^dim over the open cells inside the set."""
    return sum((-1) ** dim for dim, inside in torus_cells(e, phi_leading) if inside)


def sample_directions(count=20):
    """Deterministic nonzero Gaussian integers spread around the circle."""
    out = []
    r = 1
    while len(out) < count:
        for a in range(-r, r + 1):
            for b in range(-r, r + 1):
                if max(abs(a), abs(b)) == r and gcd(a, b) == 1:
                    out.append(GR(a, b))
        r += 1
    return out[:count]


# ---------------------------------------------------------------------------
# combinatorial formulas


def chi_stratified(strata) -> int:
    return sum(s.chi_local * s.chi_stratum for s in strata)


def dual_model(m: ElementaryModel) -> ElementaryModel:
    return ElementaryModel(m.ell, m.e, -m.phi_leading, tuple(-a for a in m.alpha), m.rank)


def twist_model(m: ElementaryModel, beta) -> ElementaryModel:
    beta = tuple(GR.of(b) for b in beta)
    if len(beta) != m.ell:
        raise ValidationError("twist", "one twist residue per branch expected")
    return ElementaryModel(m.ell, m.e, m.phi_leading, tuple(a + b for a, b in zip(m.alpha, beta)), m.rank)


@dataclass
class TripleReport:
    values: dict = field(default_factory=dict)

    @property
    def ok(self):
        return len(set(self.values.values())) == 1

    @property
    def common(self):
        return next(iter(self.values.values())) if self.ok else None


def check_triple_equality(m: ElementaryModel, twist_beta) -> TripleReport:
    rep = TripleReport()
    rep.values["model"] = irr_elementary(m)
    rep.values["dual"] = irr_elementary(dual_model(m))
    rep.values["twist"] = irr_elementary(twist_model(m, twist_beta))
    return rep


def ramified_irr(m: ElementaryModel, d):
    """Irregularity after the ramification x_i = x_i'^{d_i}, with its degree."""
    d = tuple(int(x) for x in d)
    if len(d) != m.ell or any(x <= 0 for x in d):
        raise ValidationError("ramification", "one positive order per branch expected")
    pulled = ElementaryModel(m.ell, tuple(a * b for a, b in zip(d, m.e)), m.phi_leading,
                             tuple(a * b for a, b in zip(d, m.alpha)), m.rank)
    deg = prod(d)
    value = irr_elementary(pulled)
    if value != deg * irr_elementary(m):
        raise ValidationError("ramification", "scaling identity fails")
    return value, deg
