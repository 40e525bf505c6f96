"""Small Laplace eigenvalues of closed hyperbolic surfaces near a pinched geodesic.

Modules: ``collar`` (collar formulas), ``hexagon`` (right-angled hexagons),
``surface`` (Fenchel-Nielsen surfaces and meshes), ``spectrum`` (finite
elements), ``reduced`` (1D and graph models), ``qdiff`` (collar quadratic
differentials), ``fncalculus`` (derivatives in Fenchel-Nielsen coordinates)
and ``cli``.
"""

__version__ = "0.1.0"
