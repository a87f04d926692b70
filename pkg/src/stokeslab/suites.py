"""Seeded randomized suites with deterministic plain-text reports.

Every case draws from its own random.Random keyed by (seed, corpus, index),
so a case does not depend on which other cases ran, and two runs with the
same seed produce identical reports.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .circle import sheaf_cohomology
from .errors import StokesLabError
from .euler import (
    ElementaryModel,
    check_triple_equality,
    irr_elementary,
    ramified_irr,
    sample_directions,
    torus_chi_c,
)
from .exactcore import GaussianRational, QMatrix
from .laplace import (
    STEP_AUDIT,
    costokes_sheaf,
    laplace_bwd,
    laplace_fwd,
    roundtrip_report,
    transport,
    transport_path,
)
from .newton import (
    ResidueMatrix,
    TwistConfig,
    integral_coef_check,
    is_generic,
    nonresonant,
    twisted_np,
    vertex_hyperplanes,
)
from .spider import plane_cohomology
from .stokes import (
    LAX,
    STRICT,
    filtration_cohomology,
    gr_monodromy,
    random_points,
    random_system,
)

__all__ = [
    "RunConfig",
    "SuiteReport",
    "SUITES",
    "DEFAULT_CASES",
    "case_rng",
    "stokes_case",
    "random_t",
    "fine_transport",
    "run_suite",
]

GR = GaussianRational


@dataclass(frozen=True)
class RunConfig:
    seed: int = 1
    cases: int | None = None
    depth: int | None = None
    fmt: str = "human"


@dataclass
class SuiteReport:
    name: str
    seed: int
    lines: list = field(default_factory=list)
    passed: int = 0
    failed: int = 0

    def case(self, label, ok, detail=""):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
        self.lines.append(f"{label}: {'pass' if ok else 'FAIL'}{(' ' + detail) if detail else ''}")

    @property
    def ok(self):
        return self.failed == 0

    def to_text(self):
        head = [f"suite: {self.name}", f"seed: {self.seed}"]
        tail = [f"summary: {self.passed} passed, {self.failed} failed", f"verdict: {'pass' if self.ok else 'fail'}"]
        return "\n".join(head + self.lines + tail) + "\n"


def case_rng(seed, corpus, k):
    return random.Random(f"{seed}:{corpus}:{k}")


def stokes_case(seed, corpus, k, nmax, rmax):
    """The k-th random valid system of a corpus."""
    rng = case_rng(seed, corpus, k)
    n = rng.randint(1, nmax)
    pts = random_points(rng, n)
    ranks = [rng.randint(1, rmax) for _ in range(n)]
    return rng, random_system(rng, pts, ranks)


def random_t(rng, avoid, spread=4):
    while True:
        t = GR(Fraction(rng.randint(-2 * spread, 2 * spread), 2), Fraction(rng.randint(-2 * spread, 2 * spread), 2))
        if t not in avoid:
            return t


def _fmt_dims(d):
    return "(" + ", ".join(str(x) for x in d) + ")"


# ---------------------------------------------------------------------------
# sheaves on the circle


def suite_hkfl(cfg: RunConfig, rep: SuiteReport):
    for k in range(cfg.cases):
        rng, sys = stokes_case(cfg.seed, "stokes", k, 4, 3)
        ts = list(sys.points) + [random_t(rng, sys.points) for _ in range(5)]
        bad = []
        for t in ts:
            h0, h1 = filtration_cohomology(sys, t, STRICT).dims
            want = sys.dim - (sys.ranks[sys.points.index(t)] if t in sys.points else 0)
            if (h0, h1) != (0, want):
                bad.append(f"t={t} got {_fmt_dims((h0, h1))} want {_fmt_dims((0, want))}")
        rep.case(f"case {k} n={sys.n} ranks={list(sys.ranks)}", not bad, "; ".join(bad))


def suite_nonstrict(cfg: RunConfig, rep: SuiteReport):
    for k in range(cfg.cases):
        _, sys = stokes_case(cfg.seed, "stokes", k, 4, 3)
        bad = []
        for i, c in enumerate(sys.points):
            h0, h1 = filtration_cohomology(sys, c, LAX).dims
            _, s1 = filtration_cohomology(sys, c, STRICT).dims
            g = gr_monodromy(sys, i)
            fixed = sys.ranks[i] - (g - QMatrix.identity(sys.ranks[i])).rank()
            # on the circle dim H^1 = dim H^0 for a local system
            want = (fixed, s1 + fixed)
            if (h0, h1) != want:
                bad.append(f"c={c} got {_fmt_dims((h0, h1))} want {_fmt_dims(want)}")
        rep.case(f"case {k} n={sys.n} ranks={list(sys.ranks)}", not bad, "; ".join(bad))


# ---------------------------------------------------------------------------
# transforms


def _small_case(cfg, k):
    return stokes_case(cfg.seed, "small", k, 3, 2)


def suite_forward(cfg: RunConfig, rep: SuiteReport):
    for k in range(cfg.cases):
        _, sys = _small_case(cfg, k)
        try:
            sp = laplace_fwd(sys)
        except StokesLabError as exc:
            rep.case(f"case {k}", False, f"error {type(exc).__name__}: {exc}")
            continue
        h = plane_cohomology(sp)
        want_phi = tuple(sys.dim - r for r in sys.ranks)
        inj = all(g.rank() == g.cols for g in sp.g)
        ok = h == (0, 0, 0) and sp.psi_dim == sys.dim and sp.phi == want_phi and inj
        rep.case(f"case {k} n={sys.n} ranks={list(sys.ranks)}", ok,
                 f"plane={_fmt_dims(h)} psi={sp.psi_dim} phi={_fmt_dims(sp.phi)} injective={inj}")


def suite_backward(cfg: RunConfig, rep: SuiteReport):
    for k in range(cfg.cases):
        rng, sys = _small_case(cfg, k)
        sp = laplace_fwd(sys)
        ss = list(sys.points) + [random_t(rng, sys.points) for _ in range(3)]
        bad = []
        for s in ss:
            d = sheaf_cohomology(costokes_sheaf(sp, s)).dims
            want = (0, sp.phi[sys.points.index(s)] if s in sys.points else sp.psi_dim)
            if tuple(d) != want:
                bad.append(f"s={s} got {_fmt_dims(d)} want {_fmt_dims(want)}")
        rep.case(f"case {k} n={sys.n} ranks={list(sys.ranks)}", not bad, "; ".join(bad))


def _on_segment(c, a, b):
    cr = (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
    if cr != 0:
        return False
    dot = (c.re - a.re) * (b.re - a.re) + (c.im - a.im) * (b.im - a.im)
    return 0 <= dot <= (b - a).norm()


def _winding_free(c, loop):
    """True when c is outside the polygon (even-odd rule, exact)."""
    inside = False
    m = len(loop)
    for j in range(m):
        a, b = loop[j], loop[(j + 1) % m]
        if (a.im > c.im) != (b.im > c.im):
            x = a.re + (c.im - a.im) * (b.re - a.re) / (b.im - a.im)
            if x > c.re:
                inside = not inside
    return not inside


def _segment_pair(rng, pts):
    while True:
        t0, t1 = random_t(rng, pts), random_t(rng, pts)
        if t0 != t1 and not any(_on_segment(c, t0, t1) for c in pts):
            return t0, t1


def fine_transport(sys, t0, t1, steps=64):
    """Independent oracle: a fixed uniform subdivision, no adaptivity."""
    t0, t1 = GR.of(t0), GR.of(t1)
    M = None
    for j in range(steps):
        a = t0 + (t1 - t0) * Fraction(j, steps)
        b = t0 + (t1 - t0) * Fraction(j + 1, steps)
        step = transport(sys, a, b, depth=0)
        M = step if M is None else step @ M
    return M


def suite_transport(cfg: RunConfig, rep: SuiteReport):
    for k in range(cfg.cases):
        rng, sys = _small_case(cfg, k)
        pts = sys.points
        before = dict(STEP_AUDIT)
        notes = []
        t0, t1 = _segment_pair(rng, pts)
        A = transport(sys, t0, t1)
        # refinement: split at a random interior point
        lam = Fraction(rng.randint(1, 7), 8)
        m = t0 + (t1 - t0) * lam
        if transport(sys, m, t1) @ transport(sys, t0, m) != A:
            notes.append("refinement")
        if transport(sys, t1, t0) @ A != QMatrix.identity(A.rows):
            notes.append("inverse path")
        # contractible loop: a triangle through t0, t1 and a third point, kept only if empty
        for _ in range(20):
            t2 = random_t(rng, pts)
            loop = [t0, t1, t2]
            edges = [(t0, t1), (t1, t2), (t2, t0)]
            if t2 in (t0, t1) or any(_on_segment(c, a, b) for c in pts for a, b in edges):
                continue
            if all(_winding_free(c, loop) for c in pts):
                if transport_path(sys, loop, closed=True) != QMatrix.identity(A.rows):
                    notes.append("contractible loop")
                break
        after = dict(STEP_AUDIT)
        if after["steps"] - before["steps"] != after["checked"] - before["checked"]:
            notes.append("step acyclicity")
        rep.case(f"case {k} n={sys.n} ranks={list(sys.ranks)}", not notes, ", ".join(notes))


def suite_roundtrip(cfg: RunConfig, rep: SuiteReport):
    for k in range(cfg.cases):
        _, sys = _small_case(cfg, k)
        try:
            r = roundtrip_report(sys)
            ok, detail = r.verdict == "pass", ""
            if not ok:
                detail = "; ".join(name for name, good, _ in r.checks if not good)
                if r.iso_attempted and r.isomorphism is None:
                    detail = (detail + "; " if detail else "") + "no explicit isomorphism"
            elif r.iso_attempted:
                detail = "explicit isomorphism found"
        except StokesLabError as exc:
            ok, detail = False, f"error {type(exc).__name__}: {exc}"
        rep.case(f"case {k} n={sys.n} ranks={list(sys.ranks)}", ok, detail)


# ---------------------------------------------------------------------------
# calculators


def suite_euler(cfg: RunConfig, rep: SuiteReport):
    dirs = sample_directions(20)
    rng = case_rng(cfg.seed, "euler", 0)
    for ell in (1, 2):
        for e in product(range(5), repeat=ell):
            if not any(e):
                continue
            bad = []
            for phi in dirs:
                m = ElementaryModel(ell, e, phi)
                if irr_elementary(m) != m.rank * torus_chi_c(e, phi):
                    bad.append(f"oracle at phi={phi}")
                beta = [GR(Fraction(rng.randint(-4, 4), 2), Fraction(rng.randint(-4, 4), 2)) for _ in range(ell)]
                mm = ElementaryModel(ell, e, phi, tuple(GR(Fraction(rng.randint(-4, 4), 3)) for _ in range(ell)))
                if not check_triple_equality(mm, beta).ok:
                    bad.append(f"triple at phi={phi}")
                d = [rng.randint(1, 4) for _ in range(ell)]
                val, deg = ramified_irr(mm, d)
                if val != deg * irr_elementary(mm):
                    bad.append(f"ramification at phi={phi}")
            rep.case(f"ell={ell} e={list(e)} value={irr_elementary(ElementaryModel(ell, e, 1))}", not bad, "; ".join(bad))


def _random_twist(rng):
    ell = rng.randint(1, 3)
    r = rng.randint(1, 3)

    def expo():
        return tuple(rng.randint(0, 5) for _ in range(ell))

    def unit():
        return GR(rng.randint(-3, 3) or 1, rng.randint(-2, 2))

    phi_e = expo()
    pool = [phi_e, expo(), expo()]
    eta = tuple((rng.choice(pool) if rng.random() < 0.6 else expo(), unit()) for _ in range(r))
    return TwistConfig(ell, phi_e, unit(), eta)


def _random_a(rng, r):
    return [GR(Fraction(rng.randint(-6, 6), rng.randint(1, 3)), Fraction(rng.randint(-6, 6), rng.randint(1, 3))) for _ in range(r)]


def suite_newton(cfg: RunConfig, rep: SuiteReport):
    for k in range(cfg.cases):
        rng = case_rng(cfg.seed, "newton", k)
        tw = _random_twist(rng)
        full = tw.polyhedron()
        notes = []
        a = _random_a(rng, tw.r)
        while not is_generic(tw, a):
            a = _random_a(rng, tw.r)
        if twisted_np(tw, a) != full:
            notes.append("generic equality")
        placed = "no hyperplane"
        hyps = vertex_hyperplanes(tw)
        if hyps:
            H = hyps[rng.randrange(len(hyps))]
            kk = next(j for j, c in enumerate(H.coeffs) if not c.is_zero())
            for _ in range(50):
                b = _random_a(rng, tw.r)
                rest = H.value([x if j != kk else GR(0) for j, x in enumerate(b)])
                b[kk] = -rest / H.coeffs[kk]
                if H.contains(b) and sum(h.contains(b) for h in hyps) == 1:
                    break
            else:
                b = None
            if b is None:
                notes.append("placement")
            else:
                try:
                    gone = H.vertex not in twisted_np(tw, b).vertices
                except StokesLabError:
                    gone = True
                placed = "vertex removed" if gone else "vertex kept"
                if not gone:
                    notes.append("vertex deletion")
        rep.case(f"case {k} ell={tw.ell} r={tw.r} vertices={len(full.vertices)} {placed}", not notes, ", ".join(notes))
    # hand cases
    hand = [
        ("nonresonant (1, -1)", nonresonant([1, -1]) is False),
        ("nonresonant (1, 1)", nonresonant([1, 1]) is True),
        ("nonresonant (1, i, -1-i)", nonresonant([1, GR(0, 1), GR(-1, -1)]) is False),
        ("integral alpha=0 res=1 a=1/2 d=1", integral_coef_check(ResidueMatrix(((1,),), ((0,),), 1), [Fraction(1, 2)]).ok),
        ("integral alpha=1/3 res=1 a=0 d=3", not integral_coef_check(ResidueMatrix(((1,),), ((Fraction(1, 3),),), 3), [0]).ok),
        ("integral zero form flagged", integral_coef_check(ResidueMatrix(((0,),), ((Fraction(1, 3),),), 1), [1]).degenerate == [0]),
    ]
    for label, ok in hand:
        rep.case(label, ok)


SUITES = {
    "hkfl": suite_hkfl,
    "nonstrict": suite_nonstrict,
    "forward": suite_forward,
    "backward": suite_backward,
    "transport": suite_transport,
    "roundtrip": suite_roundtrip,
    "euler": suite_euler,
    "newton": suite_newton,
}

DEFAULT_CASES = {
    "hkfl": 100,
    "nonstrict": 100,
    "forward": 25,
    "backward": 25,
    "transport": 25,
    "roundtrip": 25,
    "euler": 1,
    "newton": 50,
}


def run_suite(name, cfg: RunConfig | None = None) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    cfg = cfg or RunConfig()
    if cfg.cases is None:
        cfg = RunConfig(cfg.seed, DEFAULT_CASES[name], cfg.depth, cfg.fmt)
    rep = SuiteReport(name, cfg.seed)
    saved = os.environ.get("STOKESLAB_DEPTH")
    if cfg.depth is not None:
        os.environ["STOKESLAB_DEPTH"] = str(cfg.depth)
    try:
        SUITES[name](cfg, rep)
    finally:
        if cfg.depth is not None:
            if saved is None:
                del os.environ["STOKESLAB_DEPTH"]
            else:
                os.environ["STOKESLAB_DEPTH"] = saved
    return rep
