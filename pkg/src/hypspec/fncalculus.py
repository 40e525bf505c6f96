"""Finite-difference derivatives of the first eigenvalue in Fenchel-Nielsen coordinates.

A backend maps ``FNCoordinates`` to ``lambda_1``:

* ``"fem"``: mesh the surface and solve the 2D problem;
* ``"sl"`` / ``"graph"``: reduced models driven by the length of the
  pinched curve only, so every twist derivative is exactly zero;
* any callable ``fn -> float``.

Lengths are stepped by ``max(1e-3, 0.05 ell_j)`` unless a step is given.
FEM twist steps must be multiples of ``2 pi / n_theta``; the default is one
quantum.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import reduced as _reduced
from . import spectrum as _spectrum
from . import surface as _surface
from .errors import DomainError, SolverError

SCHEMES = ("central", "richardson")


@dataclass(frozen=True)
class Backend:
    """How ``lambda_1`` is computed; ``curve`` is the pinched curve for reduced models."""

    kind: str = "fem"
    params: _surface.MeshParams = None
    curve: int = 0
    grid: int = 8192
    func: object = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("fem", "sl", "graph", "callable"):
            raise DomainError(f"unknown backend {self.kind!r}")
        if self.kind == "callable" and not callable(self.func):
            raise DomainError("callable backend needs func")
        if self.kind == "fem" and self.params is None:
            object.__setattr__(self, "params", _surface.MeshParams())

    @property
    def twist_free(self):
        return self.kind in ("sl", "graph")

    def __call__(self, fn):
        if self.kind == "callable":
            return float(self.func(fn))
        if self.kind == "fem":
            try:
                mesh = _surface.build_mesh(fn, self.params)
                return float(_spectrum.solve_surface(mesh, k=2, seed=self.seed).values[1])
            except SolverError as exc:
                exc.config = _surface.config_dict(fn, self.params)
                raise
        top = _reduced.SplitTopology.from_graph(fn.graph, self.curve)
        ell = fn.lengths[self.curve]
        if self.kind == "sl":
            return _reduced.sl_lambda(_reduced.SLModel.for_topology(top, ell, self.grid))
        return float(_reduced.graph_lambda(top, ell))


@dataclass(frozen=True)
class DerivativeRequest:
    base: _surface.FNCoordinates
    kind: str
    index: int
    backend: Backend = field(default_factory=Backend)
    step: float = None
    scheme: str = "central"

    def __post_init__(self):
        if self.kind not in ("length", "twist"):
            raise DomainError(f"coordinate kind must be 'length' or 'twist', got {self.kind!r}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if not 0 <= self.index < len(self.base.lengths):
            raise DomainError(f"no curve {self.index}")
        if self.step is None:
            object.__setattr__(self, "step", default_step(self))
        if self.step <= 0:
            raise DomainError("step must be positive")
        if self.kind == "twist" and self.backend.kind == "fem":
            _surface.twist_steps(self.step, self.backend.params.n_theta)
        if self.kind == "length" and self.base.lengths[self.index] - self.step <= 0:
            raise DomainError("length step leaves the positive range")

    @property
    def quantum(self):
        if self.kind == "twist" and self.backend.kind == "fem":
            return 2.0 * np.pi / self.backend.params.n_theta
        return 0.0

    def at(self, offset):
        if self.kind == "length":
            return self.base.with_length(self.index, self.base.lengths[self.index] + offset)
        return self.base.with_twist(self.index, self.base.twists[self.index] + offset)


def default_step(req):
    if req.kind == "length":
        return max(1e-3, 0.05 * req.base.lengths[req.index])
    if req.backend.kind == "fem":
        return 2.0 * np.pi / req.backend.params.n_theta
    return 1e-2


def _central(req, h, cache):
    vals = []
    for off in (h, -h):
        if off not in cache:
            cache[off] = req.backend(req.at(off))
        vals.append(cache[off])
    return (vals[0] - vals[1]) / (2.0 * h)


def fd_derivative(req):
    """``(value, error_estimate)`` of the requested partial derivative.

    Central: ``(f(c+h) - f(c-h)) / 2h`` with error ``|D(h) - D(h/2)|``.
    Richardson: ``(4 D(h/2) - D(h)) / 3`` with error ``|D(h/2) - D(h)| / 3``.
    When ``h/2`` is not a mesh-realizable twist the pair ``(2h, h)`` is used.
    """
    if req.kind == "twist" and req.backend.twist_free:
        return 0.0, 0.0
    cache = {}
    h = req.step
    q = req.quantum
    fine, coarse = 0.5 * h, h
    if q > 0 and abs(round(fine / q) - fine / q) > 1e-9:
        fine, coarse = h, 2.0 * h
    d_coarse = _central(req, coarse, cache)
    d_fine = _central(req, fine, cache)
    if req.scheme == "central":
        value = d_coarse if coarse == h else d_fine
        return value, abs(d_coarse - d_fine)
    return (4.0 * d_fine - d_coarse) / 3.0, abs(d_fine - d_coarse) / 3.0


@dataclass
class ExperimentReport:
    """Rows of an experiment sweep, in sweep order, plus fitted log-log slopes."""

    name: str
    columns: list
    rows: list
    fits: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def column(self, name):
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def loglog_slope(x, y):
    x, y = np.asarray(x, float), np.abs(np.asarray(y, float))
    keep = (x > 0) & (y > 0)
    if np.count_nonzero(keep) < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def _map(func, items, workers):
    items = list(items)
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(it) for it in items]


def _with_ell1(base, ell1, curve):
    return base.with_length(curve, ell1)


def mesh_noise_floor(fn, params, seed=0):
    """``|lambda(h) - lambda(2h)| / 3``: estimated discretization error of ``lambda_1`` at ``h``."""
    fine = Backend("fem", params, seed=seed)(fn)
    coarse_params = _surface.MeshParams(2.0 * params.h, params.n_theta, params.delta_cut)
    coarse = Backend("fem", coarse_params, seed=seed)(fn)
    return abs(fine - coarse) / 3.0


@dataclass(frozen=True)
class _RateJob:
    base: _surface.FNCoordinates
    backend: Backend
    curve: int
    other: int
    twist_curve: int
    scheme: str

    def __call__(self, ell1):
        fn = _with_ell1(self.base, ell1, self.curve)
        lam = self.backend(fn)
        d1, e1 = fd_derivative(DerivativeRequest(fn, "length", self.curve, self.backend, scheme=self.scheme))
        row = [ell1, lam, d1, e1, abs(d1 - lam / ell1)]
        if self.backend.kind == "fem":
            dj, ej = fd_derivative(DerivativeRequest(fn, "length", self.other, self.backend, scheme="central"))
            req = DerivativeRequest(fn, "twist", self.twist_curve, self.backend)
            dlam = abs(self.backend(req.at(req.step)) - lam)
            floor = mesh_noise_floor(fn, self.backend.params, self.backend.seed)
            row += [dj, ej, dlam, floor]
        return row


def rate_experiment_fn(base, ell1_list, backend, curve=0, other=1, twist_curve=0, scheme="central", workers=1):
    """Sweep the pinched length and record derivative rates.

    Columns: ``ell1, lam, dlam_dell1, err1, r1`` where ``r1 = |dlam/dell1 - lam/ell1|``;
    the fem backend adds ``dlam_dellj, errj`` for curve ``other``, the eigenvalue
    change under one twist quantum of ``twist_curve`` and the mesh-noise floor.
    """
    ells = [float(v) for v in ell1_list]
    if any(b >= a for a, b in zip(ells, ells[1:])):
        raise DomainError("ell1 values must be strictly descending")
    if any(not 0 < v < 2 * np.arcsinh(1.0) for v in ells):
        raise DomainError("ell1 values must lie in (0, 2 arsinh 1)")
    job = _RateJob(base, backend, curve, other, twist_curve, scheme)
    rows = _map(job, ells, workers)
    cols = ["ell1", "lam", "dlam_dell1", "err1", "r1"]
    if backend.kind == "fem":
        cols += ["dlam_dellj", "errj", "dlam_twist", "noise_floor"]
    rep = ExperimentReport("deriv", cols, rows, meta={"backend": backend.kind, "curve": curve, "other": other})
    x = rep.column("ell1")
    rep.fits["r1"] = loglog_slope(x, rep.column("r1"))
    if backend.kind == "fem":
        rep.fits["dlam_dellj"] = loglog_slope(x, rep.column("dlam_dellj"))
    return rep


@dataclass(frozen=True)
class _PairJob:
    first: _surface.FNCoordinates
    second: _surface.FNCoordinates
    backend: Backend
    curve: int

    def __call__(self, ell1):
        a = self.backend(_with_ell1(self.first, ell1, self.curve))
        b = self.backend(_with_ell1(self.second, ell1, self.curve))
        return a, b


def c0_comparison(first, second, ell_list, backend, reduced="sl", curve=0, workers=1):
    """FEM ``lambda`` on two surfaces sharing the pinched length, against a reduced model.

    Columns: ``ell1, lam, lam_tilde, diff, diff_over_ell2, reduced, rel_to_reduced``.
    """
    ells = [float(v) for v in ell_list]
    pairs = _map(_PairJob(first, second, backend, curve), ells, workers)
    red = Backend(reduced, curve=curve)
    rows = []
    for ell1, (a, b) in zip(ells, pairs):
        f = red(_with_ell1(first, ell1, curve))
        rows.append([ell1, a, b, abs(a - b), abs(a - b) / ell1**2, f, abs(a - f) / a])
    rep = ExperimentReport(
        "c0", ["ell1", "lam", "lam_tilde", "diff", "diff_over_ell2", "reduced", "rel_to_reduced"], rows
    )
    rep.fits["diff"] = loglog_slope(rep.column("ell1"), rep.column("diff"))
    return rep


def sharpness_experiment(ell1_list, ell2_pair=(0.5, 1.0), params=None, others=1.0, workers=1, seed=0):
    """Genus-3 test: ``D(ell1) = |lambda(ell2=a) - lambda(ell2=b)|`` for the two disconnecting curves.

    Columns: ``ell1, lam_a, lam_b, D, D_over_ell2``.
    """
    graph = _surface.genus3_graph()
    lengths = [1.0, ell2_pair[0]] + [float(others)] * (len(graph.curves) - 2)
    first = _surface.FNCoordinates(graph, lengths)
    second = first.with_length(1, ell2_pair[1])
    backend = Backend("fem", params or _surface.MeshParams(), seed=seed)
    ells = [float(v) for v in ell1_list]
    if ell2_pair[0] == ell2_pair[1]:
        pairs = [(lam, lam) for lam in _map(lambda e: backend(_with_ell1(first, e, 0)), ells, 1)]
    else:
        pairs = _map(_PairJob(first, second, backend, 0), ells, workers)
    rows = [[e, a, b, abs(a - b), abs(a - b) / e**2] for e, (a, b) in zip(ells, pairs)]
    rep = ExperimentReport("sharpness", ["ell1", "lam_a", "lam_b", "D", "D_over_ell2"], rows)
    rep.fits["D"] = loglog_slope(rep.column("ell1"), rep.column("D"))
    return rep
