"""Reduced models for the first eigenvalue under pinching of a disconnecting geodesic.

* ``c_top``: the topological constant ``-chi(M) / (2 pi^2 chi(M-) chi(M+))``.
* ``graph_lambda``: two-vertex weighted graph with vertex masses ``|chi+|``,
  ``|chi-|`` and edge conductance ``ell``, rescaled by ``1 / (2 pi^2)``.
* ``sl_lambda``: the collar Sturm-Liouville problem with the two thick sides
  lumped into point masses at the collar ends.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from . import collar as _collar
from .errors import DomainError


@dataclass(frozen=True)
class SplitTopology:
    genus_plus: int
    genus_minus: int

    def __post_init__(self):
        if self.genus_plus < 1 or self.genus_minus < 1:
            raise DomainError("both sides of the disconnecting curve need genus >= 1")

    @property
    def chi_plus(self):
        return 1 - 2 * self.genus_plus

    @property
    def chi_minus(self):
        return 1 - 2 * self.genus_minus

    @property
    def chi(self):
        return self.chi_plus + self.chi_minus

    @property
    def genus(self):
        return self.genus_plus + self.genus_minus

    @classmethod
    def from_graph(cls, graph, curve=0):
        from .surface import disconnecting_genera

        return cls(*disconnecting_genera(graph, curve))


def c_top(top):
    """``2 (g - 1) / (2 pi^2 (2 g+ - 1)(2 g- - 1))``."""
    # integer product first keeps the result exactly symmetric in the two sides
    return -top.chi / (2.0 * np.pi**2 * (top.chi_minus * top.chi_plus))


def graph_lambda(top, ell, return_vector=False):
    """Smallest nonzero graph eigenvalue divided by ``2 pi^2``.

    Solves ``L v = mu D v`` with ``L = ell [[1, -1], [-1, 1]]`` and
    ``D = diag(|chi+|, |chi-|)``.
    """
    if ell <= 0:
        raise DomainError("ell must be positive")
    L = ell * np.array([[1.0, -1.0], [-1.0, 1.0]])
    D = np.diag([abs(top.chi_plus), abs(top.chi_minus)]).astype(float)
    mu, V = la.eigh(L, D)
    value = mu[1] / (2.0 * np.pi**2)
    return (value, V[:, 1]) if return_vector else value


def corrected_masses(top, ell):
    """End masses ``2 pi |chi| - ell / sinh(ell/2)`` (side area minus half collar)."""
    half = 0.5 * _collar.full_area(ell)
    return 2.0 * np.pi * abs(top.chi_plus) - half, 2.0 * np.pi * abs(top.chi_minus) - half


@dataclass(frozen=True)
class SLModel:
    ell: float
    mass_plus: float
    mass_minus: float
    grid: int = 8192

    def __post_init__(self):
        if self.ell <= 0:
            raise DomainError("ell must be positive")
        if self.grid < 64:
            raise DomainError("grid must have at least 64 intervals")
        if self.mass_plus <= 0 or self.mass_minus <= 0:
            raise DomainError("end masses must be positive (ell too large for the reduction)")

    @classmethod
    def for_topology(cls, top, ell, grid=8192):
        return cls(ell, *corrected_masses(top, ell), grid=grid)


def sl_solve(model, count=2):
    """Lowest ``count`` eigenpairs of the lumped collar problem.

    Uniform grid of ``model.grid`` intervals on ``[-X, X]``; stiffness is
    ``2 pi`` times the P1 form of ``int v'^2``, mass is ``2 pi rho^2`` times
    trapezoid weights plus the end masses.  Returns ``(values, s, vectors)``
    with vectors normalized in the mass inner product.
    """
    ell = model.ell
    x = _collar.half_length(ell)
    s = np.linspace(-x, x, model.grid + 1)
    ds = s[1] - s[0]
    rho = np.empty_like(s)
    rho[1:-1] = _collar.conformal_factor(ell, s[1:-1])
    rho[0] = rho[-1] = _collar.boundary_factor(ell)
    w = np.full_like(s, ds)
    w[0] = w[-1] = 0.5 * ds
    mass = 2.0 * np.pi * rho**2 * w
    mass[-1] += model.mass_plus
    mass[0] += model.mass_minus
    k = 2.0 * np.pi / ds
    main = np.full_like(s, 2.0 * k)
    main[0] = main[-1] = k
    off = np.full(len(s) - 1, -k)
    # symmetric scaling D^-1/2 K D^-1/2
    r = 1.0 / np.sqrt(mass)
    vals, vecs = la.eigh_tridiagonal(main * r * r, off * r[:-1] * r[1:], select="i", select_range=(0, count - 1))
    return vals, s, vecs * r[:, None]


def sl_lambda(model):
    """Smallest nonzero eigenvalue of the collar Sturm-Liouville model."""
    vals, _, _ = sl_solve(model, 2)
    return float(vals[1])


def f_of_ell(top, ells, grid=8192):
    """Table rows ``(ell, sl_lambda, sl_lambda / ell, graph_lambda / ell)``."""
    rows = []
    for ell in ells:
        if not 0 < ell < 2.0 * np.arcsinh(1.0):
            raise DomainError(f"ell must lie in (0, 2 arsinh 1), got {ell}")
        lam = sl_lambda(SLModel.for_topology(top, ell, grid))
        rows.append((float(ell), lam, lam / ell, graph_lambda(top, ell) / ell))
    return rows
