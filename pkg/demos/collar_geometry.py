"""Collar geometry and dz^2 norms for a few geodesic lengths.

Prints half-length, width, area and the L2 norm of dz^2 next to its
small-ell expansion.
"""
from hypspec import collar, qdiff

print(f"{'ell':>8} {'X':>12} {'width':>10} {'area':>10} {'L2^2':>14} {'expansion':>14}")
for ell in (1.0, 0.5, 0.2, 0.1, 0.05):
    norms = qdiff.dz2_norms(ell)
    print(f"{ell:8.3f} {collar.half_length(ell):12.4f} {collar.width(ell):10.4f} "
          f"{collar.full_area(ell):10.5f} {norms.L2_squared:14.6g} {qdiff.l2_expansion(ell):14.6g}")
