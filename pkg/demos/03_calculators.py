"""Irregularity numbers and Newton polyhedra of twisted forms."""

from fractions import Fraction

from stokeslab.exactcore import GR
from stokeslab.euler import ElementaryModel, check_triple_equality, irr_elementary, ramified_irr, torus_chi_c
from stokeslab.newton import TwistConfig, is_generic, newton_polyhedron, nonresonant, twisted_np, vertex_hyperplanes

# phi = x^{-3}: three decay intervals on the circle
m = ElementaryModel(1, (3,), 1)
print(irr_elementary(m), torus_chi_c((3,), 1))
print(check_triple_equality(m, [GR(Fraction(1, 2), 1)]).values)
print(ramified_irr(ElementaryModel(1, (2,), 1), (3,)))

# two branches: the open set is a union of bands, chi_c = 0
print(irr_elementary(ElementaryModel(2, (1, 2), GR(1, 1))), torus_chi_c((1, 2), GR(1, 1)))

print(newton_polyhedron([(-2, 0), (0, -1), (-1, -1)]).vertices)

# phi = x^{-2} y^{-2} and eta_1 = x^{-2} y^{-2}, eta_2 = x^{-3}
cfg = TwistConfig(2, (2, 2), 1, (((2, 2), 1), ((3, 0), 1)))
for h in vertex_hyperplanes(cfg):
    print(h.vertex, h.describe())
print(is_generic(cfg, [1, 1]), twisted_np(cfg, [1, 1]).vertices)
print(is_generic(cfg, [-1, 1]), twisted_np(cfg, [-1, 1]).vertices)

print(nonresonant([1, GR(0, 1)]), nonresonant([1, GR(0, 1), GR(-1, -1)]))
