"""Right-angled hyperbolic hexagons in the upper half-plane.

A right-angled hexagon is fixed by the lengths ``a, b, c`` of three
alternating sides ``gamma_a, gamma_b, gamma_c``.  The remaining sides are
the seams ``Gamma_a, Gamma_b, Gamma_c``, where ``Gamma_x`` is the side
opposite ``gamma_x``.  Gluing two mirror copies along the seams gives a pair
of pants with boundary lengths ``2a, 2b, 2c``.

The embedding walks the boundary with orientation-preserving isometries of
the half-plane, stored as 2x2 real matrices acting by Moebius maps.  A frame
``F`` places the base point ``i`` with unit tangent pointing up at
``F(i)`` with tangent ``F'(i) i``.  Walking a side of length ``t`` is right
multiplication by ``diag(e^{t/2}, e^{-t/2})``; a left turn by ``pi/2`` is
right multiplication by a rotation about ``i``.

Side order around the hexagon (counterclockwise, interior on the left):

    0: gamma_a  (v0 -> v1)      3: Gamma_a (v3 -> v4)
    1: Gamma_c  (v1 -> v2)      4: gamma_c (v4 -> v5)
    2: gamma_b  (v2 -> v3)      5: Gamma_b (v5 -> v0)
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DomainError

ANGLE_TOL = 1e-9
CLOSURE_TOL = 1e-8

SIDE_NAMES = ("gamma_a", "Gamma_c", "gamma_b", "Gamma_a", "gamma_c", "Gamma_b")


def translation(t):
    """Isometry moving ``i`` to ``i e^t`` along the imaginary axis."""
    h = 0.5 * t
    return np.array([[np.exp(h), 0.0], [0.0, np.exp(-h)]])


def rotation(phi):
    """Counterclockwise rotation by ``phi`` about the point ``i``."""
    c, s = np.cos(0.5 * phi), np.sin(0.5 * phi)
    return np.array([[c, s], [-s, c]])


def mobius(m, z):
    """Apply the Moebius map of matrix ``m`` to (an array of) complex ``z``."""
    z = np.asarray(z, dtype=complex)
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def mobius_derivative(m, z):
    z = np.asarray(z, dtype=complex)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return det / (m[1, 0] * z + m[1, 1]) ** 2


def distance(z, w):
    """Hyperbolic distance in the upper half-plane."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    arg = 1.0 + np.abs(z - w) ** 2 / (2.0 * z.imag * w.imag)
    return np.arccosh(np.maximum(arg, 1.0))


def _opposite(x, y, z):
    """Length of the seam opposite the side of length ``z``."""
    num = np.cosh(z) + np.cosh(x) * np.cosh(y)
    den = np.sinh(x) * np.sinh(y)
    arg = num / den
    if arg < 1.0:
        raise DomainError("hexagon cosh rule produced an argument below 1")
    return float(np.arccosh(arg))


@dataclass(frozen=True)
class HexagonSpec:
    """Lengths of the alternating sides ``gamma_a, gamma_b, gamma_c``."""

    a: float
    b: float
    c: float
    bound: float = None

    def __post_init__(self):
        for name in "abc":
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise DomainError(f"hexagon side {name} must be positive, got {v!r}")
            if self.bound is not None and v > self.bound:
                raise DomainError(f"hexagon side {name}={v} exceeds bound {self.bound}")

    @property
    def sides(self):
        return (self.a, self.b, self.c)


def solve_hexagon(spec):
    """Seam lengths ``(Gamma_a, Gamma_b, Gamma_c)`` from the hexagon cosh rule."""
    a, b, c = spec.sides
    return (_opposite(b, c, a), _opposite(c, a, b), _opposite(a, b, c))


@dataclass
class EmbeddedHexagon:
    """A right-angled hexagon realized in the upper half-plane.

    ``frames[k]`` sends the standard frame at ``i`` to the start of side
    ``k``; ``lengths[k]`` is the length of that side.  ``seam_feet[j]``
    holds the arclength positions, along the gamma side ``j`` (a, b, c), of
    the two seam endpoints.
    """

    spec: HexagonSpec
    seams: tuple
    frames: list
    lengths: np.ndarray
    vertices: np.ndarray = field(repr=False)
    seam_feet: tuple = ()

    def point_on_side(self, k, t):
        """Point at arclength ``t`` along side ``k``."""
        t = np.asarray(t, dtype=float)
        return mobius(self.frames[k], 1j * np.exp(t))

    def point_inside(self, k, t, d):
        """Point at distance ``d`` into the hexagon from arclength ``t`` of side ``k``.

        The perpendicular geodesic through the foot point is followed toward
        the interior.  Vectorized over ``t`` and ``d``.
        """
        t, d = np.broadcast_arrays(np.asarray(t, float), np.asarray(d, float))
        # frame_k . translation(t) . rotation(pi/2) . translation(d) applied to i
        w = np.exp(t) * mobius(rotation(0.5 * np.pi), 1j * np.exp(d))
        out = mobius(self.frames[k], w)
        return out if out.shape else complex(out)

    def gamma_side(self, j):
        """Index in the walk of the gamma side ``j`` (0=a, 1=b, 2=c)."""
        return 2 * j

    def tangent(self, k, t):
        """Unit tangent (as a complex number) of side ``k`` at arclength ``t``."""
        g = self.frames[k] @ translation(t)
        v = mobius_derivative(g, 1j) * 1j
        return v / abs(v)

    def interior_angles(self):
        """Angles between incoming and outgoing sides at ``v0..v5``."""
        out = []
        for k in range(6):
            prev = (k - 1) % 6
            t_in = self.tangent(prev, self.lengths[prev])
            t_out = self.tangent(k, 0.0)
            out.append(float(np.pi - abs(np.angle(t_out / t_in))))
        return np.array(out)

    def measured_lengths(self):
        return np.array([distance(self.vertices[k], self.vertices[(k + 1) % 6]) for k in range(6)])


def embed_hexagon(spec):
    """Walk the hexagon boundary and return its half-plane realization."""
    ga, gb, gc = solve_hexagon(spec)
    lengths = np.array([spec.a, gc, spec.b, ga, spec.c, gb])
    turn = rotation(0.5 * np.pi)
    frame = np.eye(2)
    frames, vertices = [], []
    for length in lengths:
        frames.append(frame.copy())
        vertices.append(complex(mobius(frame, 1j)))
        frame = frame @ translation(length) @ turn
    # closure: back at the identity up to sign
    err = min(np.max(np.abs(frame - np.eye(2))), np.max(np.abs(frame + np.eye(2))))
    if err > CLOSURE_TOL * max(1.0, np.max(np.abs(frame))):
        raise ConsistencyError(f"hexagon walk failed to close (error {err:.3e})")
    vertices = np.array(vertices)
    if np.any(vertices.imag <= 0):
        raise ConsistencyError("hexagon vertex left the upper half-plane")
    feet = tuple((0.0, float(lengths[2 * j])) for j in range(3))
    return EmbeddedHexagon(spec, (ga, gb, gc), frames, lengths, vertices, feet)


@dataclass(frozen=True)
class BoundaryMarking:
    """Seam feet on one boundary circle of a pair of pants.

    Angles are in the arclength-proportional coordinate ``theta`` of the
    boundary circle, which runs over the first hexagon copy for
    ``theta in [0, pi]`` and over the mirror copy for ``[pi, 2 pi]``.
    """

    length: float
    foot_angles: tuple
    foot_seams: tuple
    hexagon_side: int


def pants_boundary_marking(l1, l2, l3):
    """Markings of the three boundary circles of a pair of pants.

    The pants is two copies of the hexagon with sides ``(l1/2, l2/2, l3/2)``.
    Boundary ``j`` is swept by gamma side ``j`` of both copies; its seam feet
    sit at ``theta = 0`` (the vertex shared with the preceding seam in the
    walk) and ``theta = pi``.
    """
    for v in (l1, l2, l3):
        if not np.isfinite(v) or v <= 0:
            raise DomainError("boundary lengths must be positive")
    spec = HexagonSpec(0.5 * l1, 0.5 * l2, 0.5 * l3)
    solve_hexagon(spec)
    seams = (("Gamma_b", "Gamma_c"), ("Gamma_c", "Gamma_a"), ("Gamma_a", "Gamma_b"))
    return [
        BoundaryMarking(float(length), (0.0, float(np.pi)), seams[j], 2 * j)
        for j, length in enumerate((l1, l2, l3))
    ]
