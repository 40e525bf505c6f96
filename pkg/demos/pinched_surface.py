"""Mesh a genus-2 surface with one short separating geodesic and solve.

Compares lambda_1 with the reduced model and shows the angular energy of the
eigenfunction decaying toward the middle of the collar.
"""
import numpy as np

from hypspec import fncalculus, spectrum, surface

fn = surface.FNCoordinates(surface.genus2_graph(), [0.2, 1.0, 1.0])
mesh = surface.build_mesh(fn, surface.MeshParams(h=0.1, n_theta=64))
res = spectrum.solve_surface(mesh, k=3)
print(f"dofs {mesh.n_dof}, area {mesh.area():.5f} (4 pi = {4 * np.pi:.5f})")
print("eigenvalues", res.values)
print("sl model   ", fncalculus.Backend("sl")(fn))

prof = spectrum.angular_energy(res, mesh, 0)
for s, e in list(zip(prof.s, prof.theta_energy))[:: max(1, len(prof.s) // 12)]:
    print(f"  s={s:8.3f}  theta energy {e:.3e}")
print("decay slope", spectrum.decay_slope(prof, spectrum.roundoff_floor(res, mesh)))
