"""Closed-form geometry of a hyperbolic collar.

A collar around a simple closed geodesic of length ``ell`` is the cylinder
``(-X, X) x S^1`` with the conformal metric ``rho(s)^2 (ds^2 + dtheta^2)``,

    rho(s) = ell / (2 pi cos(ell s / 2 pi)),
    X(ell) = (2 pi / ell) (pi/2 - arctan(sinh(ell/2))).

Everything here is an explicit formula; the functions accept scalars or
numpy arrays for the ``s`` arguments.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Length at which the collar width equals the geodesic length.
SELF_DUAL_LENGTH = 2.0 * np.arcsinh(1.0)


def _check_ell(ell):
    if not np.isfinite(ell) or ell <= 0:
        raise DomainError(f"geodesic length must be positive, got {ell!r}")


def _check_interior(ell, s):
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= half_length(ell)):
        raise DomainError("collar coordinate must satisfy |s| < X(ell)")
    return s


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x


def half_length(ell):
    """Half the conformal length ``X(ell)`` of the collar."""
    _check_ell(ell)
    return 2.0 * np.pi / ell * (0.5 * np.pi - np.arctan(np.sinh(0.5 * ell)))


def conformal_factor(ell, s):
    """Conformal factor ``rho(s)`` of the collar metric, ``|s| < X(ell)``."""
    s = _check_interior(ell, s)
    return _unwrap(ell / (2.0 * np.pi * np.cos(ell * s / (2.0 * np.pi))))


def boundary_factor(ell):
    """Limit of ``rho(s)`` as ``s -> X(ell)``, equal to ``ell / (2 pi tanh(ell/2))``."""
    _check_ell(ell)
    return ell / (2.0 * np.pi * np.tanh(0.5 * ell))


def log_factor_derivative(ell, s):
    """``d/ds log rho(s) = (ell / 2 pi) tan(ell s / 2 pi)``."""
    s = _check_interior(ell, s)
    return _unwrap(ell / (2.0 * np.pi) * np.tan(ell * s / (2.0 * np.pi)))


def width(ell):
    """Distance between the two boundary circles, ``sinh(w/2) sinh(ell/2) = 1``."""
    _check_ell(ell)
    return 2.0 * np.arcsinh(1.0 / np.sinh(0.5 * ell))


def distance_from_core(ell, s):
    """Signed hyperbolic distance from the central geodesic to the circle ``{s}``.

    This is ``int_0^s rho = arsinh(tan(ell s / 2 pi))``.
    """
    s = _check_interior(ell, s)
    return _unwrap(np.arcsinh(np.tan(ell * s / (2.0 * np.pi))))


def coordinate_at_distance(ell, d):
    """Inverse of :func:`distance_from_core`; ``|d| < width(ell)/2``."""
    _check_ell(ell)
    d = np.asarray(d, dtype=float)
    if np.any(np.abs(d) > 0.5 * width(ell)):
        raise DomainError("distance exceeds the half width of the collar")
    return _unwrap(2.0 * np.pi / ell * np.arctan(np.sinh(d)))


def thin_cut(ell, delta):
    """``X_delta(ell)``: the delta-thin part of the collar is ``|s| < X_delta``.

    Returns 0 when ``delta < ell/2`` (the collar has no delta-thin part).
    """
    _check_ell(ell)
    if not 0.0 < delta < np.arcsinh(1.0):
        raise DomainError(f"delta must lie in (0, arsinh(1)), got {delta!r}")
    if delta < 0.5 * ell:
        return 0.0
    ratio = min(np.sinh(0.5 * ell) / np.sinh(delta), 1.0)
    return 2.0 * np.pi / ell * (0.5 * np.pi - np.arcsin(ratio))


def injectivity_radius(ell, s):
    """Injectivity radius on the circle ``{s}`` of the collar.

    Inverts the defining relation of :func:`thin_cut`:
    ``sinh(inj) = sinh(ell/2) / cos(ell s / 2 pi) = (2 pi / ell) sinh(ell/2) rho(s)``.
    Lies between ``rho(s)`` and ``pi rho(s)`` for ``ell <= 2 arsinh(1)``.
    """
    s = _check_interior(ell, s)
    return _unwrap(np.arcsinh(np.sinh(0.5 * ell) / np.cos(ell * s / (2.0 * np.pi))))


def _y_level(ell, c):
    y0 = np.arctan(np.sinh(0.5 * ell))
    return 2.0 * np.arctan(np.exp(c) * np.tan(0.5 * y0))


def truncation_level(ell, c):
    """Coordinate ``Z_c`` of the circle at distance ``c`` from the collar boundary.

    ``Z_c = (2 pi / ell) (pi/2 - Y_c)`` with
    ``Y_c = 2 arctan(e^c tan(Y_0 / 2))`` and ``Y_0 = arctan(sinh(ell/2))``,
    so that ``int_{Z_c}^{X} rho ds = c``.
    """
    _check_ell(ell)
    half = 0.5 * width(ell)
    if c < 0 or c > half * (1 + 1e-14):
        raise DomainError(f"c must lie in [0, width/2] = [0, {half}], got {c!r}")
    return max(2.0 * np.pi / ell * (0.5 * np.pi - _y_level(ell, c)), 0.0)


def geodesic_curvature(ell, s):
    """Geodesic curvature ``-sin(ell s / 2 pi)`` of the circle ``{s} x S^1``."""
    s = _check_interior(ell, s)
    return _unwrap(-np.sin(ell * s / (2.0 * np.pi)))


def collar_area(ell, s1, s2):
    """Area of ``[s1, s2] x S^1``: ``ell (tan(ell s2 / 2 pi) - tan(ell s1 / 2 pi))``.

    The endpoints may sit on the collar boundary ``|s| = X``.
    """
    x = half_length(ell)
    tol = 1e-12 * x
    if not (-x - tol <= s1 <= s2 <= x + tol):
        raise DomainError("need -X <= s1 <= s2 <= X")
    k = ell / (2.0 * np.pi)

    def tan_at(s):
        if abs(s) >= x - tol:
            return np.sign(s) / np.sinh(0.5 * ell)
        return np.tan(k * s)

    return ell * (tan_at(s2) - tan_at(s1))


def full_area(ell):
    """Area of the whole collar, ``2 ell / sinh(ell/2)``."""
    _check_ell(ell)
    return 2.0 * ell / np.sinh(0.5 * ell)


@dataclass(frozen=True)
class CollarGeometry:
    """Bundle of the collar formulas for a fixed central length."""

    ell: float

    def __post_init__(self):
        _check_ell(self.ell)

    @property
    def is_short(self):
        return self.ell < SELF_DUAL_LENGTH

    @property
    def half_length(self):
        return half_length(self.ell)

    @property
    def width(self):
        return width(self.ell)

    @property
    def area(self):
        return full_area(self.ell)

    def rho(self, s):
        return conformal_factor(self.ell, s)

    def thin_cut(self, delta):
        return thin_cut(self.ell, delta)

    def truncation_level(self, c):
        return truncation_level(self.ell, c)

    def curvature(self, s):
        return geodesic_curvature(self.ell, s)

    def area_between(self, s1, s2):
        return collar_area(self.ell, s1, s2)

    def injectivity_radius(self, s):
        return injectivity_radius(self.ell, s)
