"""Stokes data on the circle and the cohomology of its filtration sheaves."""

from fractions import Fraction

from stokeslab.exactcore import GR, QMatrix, Ray
from stokeslab.stokes import LAX, STRICT, StokesSystem, filtration_cohomology, gr_monodromy, validate

# two exponential factors 0 and 1, one dimension each
# the Stokes directions are +-i, where 0 and 1 swap dominance
up = QMatrix([[1, 5], [0, 1]])
low = QMatrix([[1, 0], [-2, 1]])
sys = StokesSystem([0, 1], [1, 1], transitions={Ray(0, 1): up, Ray(0, -1): low})
print(sys.complex.vertices)
print(validate(sys))

# swapping the two lines is not a Stokes transition
swap = StokesSystem([0, 1], [1, 1], transitions={Ray(0, 1): QMatrix([[0, 1], [1, 0]]), Ray(0, -1): QMatrix.identity(2)})
print(validate(swap).condition)

# H^0 of L_{<t} vanishes and H^1 has the expected dimension
for t in [GR(0), GR(1), GR(Fraction(1, 2), 3), GR(-4, -1)]:
    print(t, filtration_cohomology(sys, t, STRICT).dims)

# at a point c the non-strict sheaf picks up gr_c
print(filtration_cohomology(sys, 0, LAX).dims, gr_monodromy(sys, 0))
