"""Forward and backward topological Laplace transform on a small example."""

from stokeslab import QMatrix, Ray, io
from stokeslab.laplace import costokes_to_stokes, laplace_bwd, laplace_fwd, roundtrip_report
from stokeslab.spider import plane_cohomology
from stokeslab.stokes import StokesSystem, total_monodromy

sys = StokesSystem([0, 1], [1, 1], transitions={Ray(0, 1): QMatrix([[1, 5], [0, 1]]), Ray(0, -1): QMatrix([[1, 0], [-2, 1]])})

# spider data: generic stalk, local monodromies, vanishing stalks, generization maps
sp = laplace_fwd(sys)
print(sp.psi_dim, sp.phi)
for T, g in zip(sp.T, sp.g):
    print(T, g)
print(plane_cohomology(sp))  # (0, 0, 0)

# back again: half-plane sections give a co-Stokes filtration
co = laplace_bwd(sp)
print(co.dimension_table())
back = costokes_to_stokes(co)
print(back.ranks, total_monodromy(back), total_monodromy(sys))

print(roundtrip_report(sys).to_text())
print(io.dumps(sp).splitlines()[:3])
