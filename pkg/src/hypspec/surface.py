"""Closed hyperbolic surfaces from Fenchel-Nielsen data, and their meshes.

A surface is described by a pants graph (which boundary slots of which
pairs of pants are glued along which curve) plus a length and a twist per
curve.  Slot ``k`` of a pants is its boundary circle swept by the hexagon
side ``gamma_{a,b,c}[k]``.

The mesh is a disjoint union of charts glued by vertex identifications:

* a collar chart per curve, a structured ``(s, theta)`` grid on
  ``|s| <= X_cut`` with ``X_cut = thin_cut(ell, delta_cut)``, conformal
  factor ``rho(s)``;
* two hexagon charts per pants (the hexagon and its mirror, sharing chart
  coordinates), each an unstructured triangulation of the hexagon minus
  the half-collar strips already covered by the collar charts, conformal
  factor ``1/y``.

Degrees of freedom are the classes of vertices under the identifications.
Since the Dirichlet energy is conformally invariant, each triangle is
treated as a flat triangle of its chart; only the mass sees the factor.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import triangle as _triangle

from . import collar as _collar
from .errors import DomainError, MeshError, SnappingError
from .hexagon import HexagonSpec, distance, embed_hexagon

MESH_HEADER = "hypspec-mesh v1"
MIN_ANGLE = 28.0
# seam node spacing relative to h; leaves room for interior refinement next to unsplittable segments
SEAM_SPACING = 0.7
THICK_PROXY = float(np.arcsinh(1.0))


# ---------------------------------------------------------------------------
# pants graphs and coordinates


@dataclass(frozen=True)
class PantsGraph:
    """Gluing pattern of ``n_pants`` pairs of pants.

    ``curves[j]`` is a pair of slots ``((p, k), (q, m))``.  The first slot
    is the "plus" side of the collar around curve ``j``.
    """

    n_pants: int
    curves: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "curves", tuple(tuple(tuple(int(v) for v in slot) for slot in c) for c in self.curves)
        )

    @property
    def genus(self):
        return self.n_pants // 2 + 1

    def slot_map(self):
        """``{(p, k): (curve, side)}`` with side 0 for plus, 1 for minus."""
        out = {}
        for j, pair in enumerate(self.curves):
            for side, slot in enumerate(pair):
                out.setdefault(slot, []).append((j, side))
        return out

    def problems(self):
        msgs = []
        if self.n_pants < 2 or self.n_pants % 2:
            msgs.append(f"number of pants must be 2(genus-1) >= 2, got {self.n_pants}")
        for j, pair in enumerate(self.curves):
            if len(pair) != 2:
                msgs.append(f"curve {j} must join exactly two slots")
                continue
            if pair[0] == pair[1]:
                msgs.append(f"curve {j} joins a slot to itself")
            for p, k in pair:
                if not (0 <= p < self.n_pants and 0 <= k < 3):
                    msgs.append(f"curve {j} references a nonexistent slot ({p}, {k})")
        used = self.slot_map()
        for p in range(self.n_pants):
            for k in range(3):
                n = len(used.get((p, k), ()))
                if n == 0:
                    msgs.append(f"unpaired slot ({p}, {k})")
                elif n > 1:
                    msgs.append(f"slot ({p}, {k}) used {n} times")
        if len(self.curves) != 3 * self.n_pants // 2:
            msgs.append(f"expected {3 * self.n_pants // 2} curves for {self.n_pants} pants, got {len(self.curves)}")
        if self.n_pants and not self._connected(range(len(self.curves))):
            msgs.append("pants graph is not connected")
        return msgs

    def _connected(self, curve_ids, start=0):
        parent = list(range(self.n_pants))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for j in curve_ids:
            (p, _), (q, _) = self.curves[j][:2]
            if 0 <= p < self.n_pants and 0 <= q < self.n_pants:
                parent[find(p)] = find(q)
        return len({find(p) for p in range(self.n_pants)}) == 1

    def components_without(self, curve):
        """Pants sets on the plus and minus side of ``curve``, or None if it does not disconnect."""
        keep = [j for j in range(len(self.curves)) if j != curve]
        adj = {p: set() for p in range(self.n_pants)}
        for j in keep:
            (p, _), (q, _) = self.curves[j]
            adj[p].add(q)
            adj[q].add(p)
        start = self.curves[curve][0][0]
        seen, stack = {start}, [start]
        while stack:
            for q in adj[stack.pop()]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        if self.curves[curve][1][0] in seen:
            return None
        return sorted(seen), sorted(set(range(self.n_pants)) - seen)


def disconnecting_genera(graph, curve=0):
    """Genera ``(g_plus, g_minus)`` of the two sides of a disconnecting curve.

    A side made of ``P`` pants with one boundary circle has Euler
    characteristic ``-P`` and hence genus ``(P + 1) / 2``.
    """
    parts = graph.components_without(curve)
    if parts is None:
        raise DomainError(f"curve {curve} does not disconnect the surface")
    return tuple((len(part) + 1) // 2 for part in parts)


def genus2_graph():
    """Two one-holed tori joined along curve 0 (curve 0 disconnects)."""
    return PantsGraph(2, (((0, 0), (1, 0)), ((0, 1), (0, 2)), ((1, 1), (1, 2))))


def genus2_theta_graph():
    """Two pants glued slot-to-slot along three non-disconnecting curves."""
    return PantsGraph(2, (((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))))


def genus3_graph():
    """Genus 3 with two disconnecting curves.

    Curve 0 cuts off the torus pants 0, curve 1 the torus pants 3;
    pants 1 carries both and meets pants 2 (a torus leg) along curve 3.
    """
    return PantsGraph(
        4,
        (
            ((0, 0), (1, 0)),
            ((3, 0), (1, 1)),
            ((0, 1), (0, 2)),
            ((1, 2), (2, 0)),
            ((3, 1), (3, 2)),
            ((2, 1), (2, 2)),
        ),
    )


@dataclass(frozen=True)
class FNCoordinates:
    """Lengths and twists (radians) for every curve of a pants graph."""

    graph: PantsGraph
    lengths: tuple
    twists: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        tw = self.twists if self.twists is not None else (0.0,) * len(self.lengths)
        object.__setattr__(self, "twists", tuple(float(v) for v in tw))

    @property
    def genus(self):
        return self.graph.genus

    def with_length(self, j, value):
        lengths = list(self.lengths)
        lengths[j] = value
        return FNCoordinates(self.graph, lengths, self.twists)

    def with_twist(self, j, value):
        twists = list(self.twists)
        twists[j] = value
        return FNCoordinates(self.graph, self.lengths, twists)

    def pants_lengths(self, p):
        out = [None, None, None]
        for j, pair in enumerate(self.graph.curves):
            for slot in pair:
                if slot[0] == p:
                    out[slot[1]] = self.lengths[j]
        return tuple(out)


@dataclass
class Diagnostics:
    ok: bool
    messages: list
    genus: int = None

    def __bool__(self):
        return self.ok


def validate(fn, length_bound=None):
    """Structural checks on a set of Fenchel-Nielsen coordinates."""
    msgs = list(fn.graph.problems())
    n = len(fn.graph.curves)
    if len(fn.lengths) != n:
        msgs.append(f"expected {n} lengths, got {len(fn.lengths)}")
    if len(fn.twists) != n:
        msgs.append(f"expected {n} twists, got {len(fn.twists)}")
    for j, ell in enumerate(fn.lengths):
        if not np.isfinite(ell) or ell <= 0:
            msgs.append(f"length of curve {j} must be positive, got {ell}")
        elif length_bound is not None and ell > length_bound:
            msgs.append(f"length of curve {j} exceeds bound {length_bound}")
    for j, psi in enumerate(fn.twists):
        if not np.isfinite(psi):
            msgs.append(f"twist of curve {j} is not finite")
    return Diagnostics(not msgs, msgs, fn.graph.genus if not msgs else None)


# ---------------------------------------------------------------------------
# mesh container


@dataclass(frozen=True)
class Chart:
    """One coordinate patch.  ``kind`` is ``collar``, ``hexagon`` or ``flat``."""

    kind: str
    index: int
    ell: float = None
    s_min: float = None
    s_max: float = None
    half: int = None

    def factor(self, x, y):
        """Conformal factor at chart points ``(x, y)``."""
        if self.kind == "collar":
            return self.ell / (2.0 * np.pi * np.cos(self.ell * np.asarray(x) / (2.0 * np.pi)))
        if self.kind == "hexagon":
            return 1.0 / np.asarray(y)
        return np.ones_like(np.asarray(x, dtype=float))

    @property
    def sign(self):
        """Orientation of the chart relative to the surface."""
        return -1 if self.kind == "hexagon" and self.half == 1 else 1


@dataclass
class CollarGrid:
    """Structured view of a collar chart."""

    curve: int
    ell: float
    s: np.ndarray
    theta: np.ndarray
    vertices: np.ndarray  # (n_s, n_theta + 1) chart vertex ids; last column duplicates the first
    nodes: np.ndarray  # (n_s, n_theta) degrees of freedom


@dataclass
class SurfaceMesh:
    charts: list
    chart: np.ndarray
    coords: np.ndarray
    rho: np.ndarray
    triangles: np.ndarray
    pairs: np.ndarray
    genus: int = None
    collars: dict = field(default_factory=dict)
    fn: FNCoordinates = None
    params: dict = None

    def __post_init__(self):
        self.chart = np.asarray(self.chart, dtype=np.int64)
        self.coords = np.asarray(self.coords, dtype=float).reshape(-1, 2)
        self.rho = np.asarray(self.rho, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        self.dof, self.n_dof = _classes(len(self.chart), self.pairs)
        for arr in (self.chart, self.coords, self.rho, self.triangles, self.pairs, self.dof):
            arr.setflags(write=False)

    @property
    def n_vertices(self):
        return len(self.chart)

    @property
    def triangle_chart(self):
        return self.chart[self.triangles[:, 0]]

    @property
    def dof_triangles(self):
        return self.dof[self.triangles]

    def edges(self):
        """Unique edges of the quotient surface as sorted dof pairs."""
        t = self.dof_triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def euler_characteristic(self):
        return self.n_dof - len(self.edges()) + len(self.triangles)

    def factor_at(self, chart_ids, xy):
        """Evaluate conformal factors at points given in their charts."""
        out = np.empty(len(chart_ids))
        for cid in np.unique(chart_ids):
            sel = chart_ids == cid
            out[sel] = self.charts[cid].factor(xy[sel, 0], xy[sel, 1])
        return out

    def area(self):
        """Area by the edge-midpoint rule on the squared conformal factor."""
        from .spectrum import triangle_geometry

        area, mids, cids = triangle_geometry(self)
        f2 = self.factor_at(np.repeat(cids, 3), mids.reshape(-1, 2)).reshape(-1, 3) ** 2
        return float(np.sum(area * f2.mean(axis=1)))

    def physical_edge_lengths(self):
        """Hyperbolic-metric lengths of triangle edges (midpoint factor times chart length)."""
        p = self.coords[self.triangles]
        e = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        m = 0.5 * np.stack([p[:, 1] + p[:, 0], p[:, 2] + p[:, 1], p[:, 0] + p[:, 2]], axis=1)
        cids = np.repeat(self.triangle_chart, 3)
        f = self.factor_at(cids, m.reshape(-1, 2)).reshape(-1, 3)
        return np.linalg.norm(e, axis=2) * f

    def injectivity_proxy(self):
        """Per-vertex injectivity radius estimate.

        Exact on collar charts.  Other charts get ``arsinh(1)``, the upper end
        of the admissible thin/thick thresholds, so they count as thick for
        every valid ``delta``.
        """
        out = np.full(self.n_vertices, THICK_PROXY)
        for ch in self.charts:
            if ch.kind != "collar":
                continue
            sel = self.chart == ch.index
            out[sel] = _collar.injectivity_radius(ch.ell, self.coords[sel, 0])
        return out

    def check(self):
        """Return a list of violated mesh invariants (empty when valid)."""
        msgs = []
        if np.any(self.rho <= 0):
            msgs.append("nonpositive conformal factor")
        tc = self.chart[self.triangles]
        if np.any(tc != tc[:, :1]):
            msgs.append("triangle spans several charts")
        if self.genus is not None and self.euler_characteristic() != 2 - 2 * self.genus:
            msgs.append(f"Euler characteristic {self.euler_characteristic()} != {2 - 2 * self.genus}")
        msgs.extend(self._edge_problems())
        return msgs

    def _edge_problems(self):
        """Closed oriented surface: every edge in two triangles with opposite directions."""
        t = self.dof_triangles.copy()
        signs = np.array([self.charts[c].sign for c in self.triangle_chart])
        p = self.coords[self.triangles]
        cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (
            p[:, 2, 0] - p[:, 0, 0]
        )
        flip = (np.sign(cross) * signs) < 0
        t[flip] = t[flip][:, ::-1]
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        key = np.sort(directed, axis=1)
        uniq, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        msgs = []
        if self.genus is None:
            return msgs
        if np.any(counts != 2):
            msgs.append(f"{int(np.sum(counts != 2))} edges not shared by exactly two triangles (hanging nodes)")
            return msgs
        forward = directed[:, 0] < directed[:, 1]
        fwd_count = np.bincount(inv.ravel(), weights=forward.astype(float), minlength=len(uniq))
        if np.any(fwd_count != 1):
            msgs.append("inconsistent orientation across interfaces")
        return msgs

    def collar_restriction(self, curve):
        if curve not in self.collars:
            raise KeyError(f"no collar chart for curve {curve!r}")
        return self.collars[curve]


def _classes(n, pairs):
    parent = np.arange(n)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    _, dof = np.unique(roots, return_inverse=True)
    return dof.astype(np.int64), int(dof.max() + 1) if n else 0


def collar_restriction(mesh, curve):
    """Structured ``(s, theta)`` grid of the collar chart of ``curve``."""
    return mesh.collar_restriction(curve)


# ---------------------------------------------------------------------------
# mesh construction


@dataclass(frozen=True)
class MeshParams:
    h: float = 0.1
    n_theta: int = 64
    delta_cut: float = 0.3

    def __post_init__(self):
        if self.h <= 0:
            raise DomainError("h must be positive")
        if self.n_theta < 16 or self.n_theta % 2:
            raise DomainError("n_theta must be even and at least 16")
        if not 0.0 < self.delta_cut < np.arcsinh(1.0):
            raise DomainError("delta_cut must lie in (0, arsinh(1))")

    def as_dict(self):
        return {"h": self.h, "n_theta": self.n_theta, "delta_cut": self.delta_cut}


class _Builder:
    def __init__(self):
        self.charts = []
        self.chart = []
        self.coords = []
        self.rho = []
        self.triangles = []
        self.pairs = []
        self.n = 0

    def add_chart(self, chart):
        self.charts.append(chart)
        return chart.index

    def add_vertices(self, cid, xy):
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        ch = self.charts[cid]
        start = self.n
        self.coords.append(xy)
        self.chart.append(np.full(len(xy), cid))
        self.rho.append(ch.factor(xy[:, 0], xy[:, 1]))
        self.n += len(xy)
        return np.arange(start, self.n)

    def add_triangles(self, tri):
        self.triangles.append(np.asarray(tri, dtype=np.int64).reshape(-1, 3))

    def identify(self, a, b):
        self.pairs.append(np.column_stack([np.atleast_1d(a), np.atleast_1d(b)]))

    def finish(self, **kw):
        cat = lambda xs, shape: np.concatenate(xs) if xs else np.zeros(shape)  # noqa: E731
        return SurfaceMesh(
            charts=self.charts,
            chart=cat(self.chart, (0,)),
            coords=cat(self.coords, (0, 2)),
            rho=cat(self.rho, (0,)),
            triangles=cat(self.triangles, (0, 3)),
            pairs=cat(self.pairs, (0, 2)),
            **kw,
        )


def twist_steps(psi, n_theta):
    """Integer rotation realizing the twist ``psi`` on an ``n_theta`` ring."""
    q = 2.0 * np.pi / n_theta
    k = psi / q
    r = round(k)
    if abs(k - r) > 1e-9 * max(1.0, abs(k)):
        raise SnappingError(f"twist {psi} is not a multiple of 2 pi / {n_theta}")
    return int(r) % n_theta


def _structured_triangles(index, n_rows, n_cols):
    """Split each grid cell ``(i, j)`` of an index array along the same diagonal."""
    a = index[:-1, :-1].ravel()
    b = index[1:, :-1].ravel()
    c = index[1:, 1:].ravel()
    d = index[:-1, 1:].ravel()
    return np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])


def _add_collar(b, curve, ell, x_cut, n_theta, h, s_max_override=None):
    """Collar chart on ``[-x_cut, x_cut]``; a single ring at ``s = 0`` when ``x_cut == 0``."""
    x = x_cut if s_max_override is None else s_max_override
    if x > 0:
        ds_max = h / _collar.conformal_factor(ell, x)
        n_s = max(1, int(np.ceil(2.0 * x / ds_max)))
        s = np.linspace(-x, x, n_s + 1)
    else:
        s = np.zeros(1)
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta + 1)
    cid = b.add_chart(Chart("collar", len(b.charts), ell=ell, s_min=float(s[0]), s_max=float(s[-1])))
    S, T = np.meshgrid(s, theta, indexing="ij")
    ids = b.add_vertices(cid, np.column_stack([S.ravel(), T.ravel()])).reshape(len(s), n_theta + 1)
    b.identify(ids[:, -1], ids[:, 0])
    if len(s) > 1:
        b.add_triangles(_structured_triangles(ids, len(s), n_theta + 1))
    return ids, s, theta[:-1]


def _size_positions(t0, t1, s0, s1, h, growth=0.25):
    """Interior positions on ``[t0, t1]`` with spacing growing linearly from ``s0``/``s1`` to ``h``."""
    length = t1 - t0
    if length <= 0:
        return np.zeros(0)
    u = np.linspace(0.0, length, 4001)
    size = np.minimum(h, np.minimum(s0 + growth * u, s1 + growth * (length - u)))
    dens = 1.0 / size
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(u))])
    n = max(1, int(np.ceil(cum[-1])))
    levels = np.linspace(0.0, cum[-1], n + 1)[1:-1]
    return t0 + np.interp(levels, cum, u)


def _truncated_hexagon(hexagon, cuts, n_theta, h):
    """Boundary polygon of the hexagon minus the half-collar strips.

    The polygon runs ring a, seam Gamma_c, ring b, seam Gamma_a, ring c,
    seam Gamma_b.  Each ring holds ``n_theta/2 + 1`` points including both
    corners; seams store only their interior points, graded from the ring
    spacing at the corners up to ``h``.  Returns the chart points (complex),
    the ring index lists and the seam index lists (corners included).
    """
    half = n_theta // 2
    ring_step = [hexagon.lengths[2 * j] / half * np.cosh(cuts[j]) for j in range(3)]
    points, rings, seams = [], [], []
    for j in range(3):
        k = 2 * j
        t = np.linspace(0.0, hexagon.lengths[k], half + 1)
        start = len(points)
        points.extend(hexagon.point_inside(k, t, np.full(half + 1, cuts[j])).tolist())
        rings.append(list(range(start, start + half + 1)))
        nxt = (j + 1) % 3
        t0, t1 = cuts[j], hexagon.lengths[k + 1] - cuts[nxt]
        if t1 <= t0:
            raise MeshError("truncated hexagon is degenerate (collar strips overlap)")
        hs = SEAM_SPACING * h
        inner = _size_positions(t0, t1, min(ring_step[j], hs), min(ring_step[nxt], hs), hs)
        s_start = len(points)
        if len(inner):
            points.extend(np.atleast_1d(hexagon.point_on_side(k + 1, inner)).tolist())
        seams.append([start + half, *range(s_start, s_start + len(inner))])
    for j in range(3):
        seams[j].append(rings[(j + 1) % 3][0])
    return np.array(points), rings, seams


def _mesh_polygon(pts, h, max_rounds=40):
    """Constrained triangulation of a closed polygon with physical edge length <= h."""
    xy = np.column_stack([pts.real, pts.imag])
    n = len(xy)
    seg = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    base = {"vertices": xy, "segments": seg}
    out = _triangle.triangulate(base, f"pq{MIN_ANGLE}Y")
    for _ in range(max_rounds):
        v, t = out["vertices"], out["triangles"]
        z = v[:, 0] + 1j * v[:, 1]
        tri_z = z[t]
        area = 0.5 * np.abs(
            (v[t[:, 1], 0] - v[t[:, 0], 0]) * (v[t[:, 2], 1] - v[t[:, 0], 1])
            - (v[t[:, 1], 1] - v[t[:, 0], 1]) * (v[t[:, 2], 0] - v[t[:, 0], 0])
        )
        lens = np.stack(
            [distance(tri_z[:, 0], tri_z[:, 1]), distance(tri_z[:, 1], tri_z[:, 2]), distance(tri_z[:, 2], tri_z[:, 0])],
            axis=1,
        )
        on_boundary = np.zeros_like(lens, dtype=bool)
        for e, (i, j) in enumerate([(0, 1), (1, 2), (2, 0)]):
            a, c = t[:, i], t[:, j]
            on_boundary[:, e] = (a < n) & (c < n) & ((np.abs(a - c) == 1) | (np.abs(a - c) == n - 1))
        bad = np.any((lens > h) & ~on_boundary, axis=1)
        if not np.any(bad):
            break
        target = np.full(len(t), -1.0)
        target[bad] = 0.5 * area[bad]
        out = _triangle.triangulate(
            {"vertices": v, "triangles": t, "segments": out["segments"], "triangle_max_area": target},
            f"rpq{MIN_ANGLE}Ya",
        )
    else:
        raise MeshError("hexagon refinement did not reach the target edge length")
    if not np.allclose(out["vertices"][:n], xy, rtol=0, atol=0):
        raise MeshError("triangulator moved boundary vertices")
    return out["vertices"], out["triangles"]


def build_mesh(fn, params=None):
    """Triangulate the surface given by Fenchel-Nielsen coordinates ``fn``."""
    params = params or MeshParams()
    diag = validate(fn)
    if not diag:
        raise DomainError("; ".join(diag.messages))
    graph, n = fn.graph, params.n_theta
    shifts = [twist_steps(psi, n) for psi in fn.twists]
    b = _Builder()
    collars, rings, x_cuts, cut_dist = {}, {}, [], []
    for j, ell in enumerate(fn.lengths):
        x_cut = _collar.thin_cut(ell, params.delta_cut) if ell < 2 * np.arcsinh(1.0) else 0.0
        x_cuts.append(x_cut)
        cut_dist.append(_collar.distance_from_core(ell, x_cut) if x_cut > 0 else 0.0)
        ids, s, theta = _add_collar(b, j, ell, x_cut, n, params.h)
        rings[j] = ids
        collars[j] = (ids, s, theta)

    slot_curve = {slot: (j, side) for j, pair in enumerate(graph.curves) for side, slot in enumerate(pair)}
    for p in range(graph.n_pants):
        lengths = fn.pants_lengths(p)
        hexagon = embed_hexagon(HexagonSpec(*(0.5 * np.array(lengths))))
        cuts = [cut_dist[slot_curve[(p, k)][0]] for k in range(3)]
        pts, ring_idx, seam_idx = _truncated_hexagon(hexagon, cuts, n, params.h)
        verts, tris = _mesh_polygon(pts, params.h)
        halves = []
        for half in (0, 1):
            cid = b.add_chart(Chart("hexagon", len(b.charts), half=half))
            ids = b.add_vertices(cid, verts)
            b.add_triangles(ids[tris])
            halves.append(ids)
        h0, h1 = halves
        seam_pos = np.unique(np.concatenate(seam_idx))
        b.identify(h0[seam_pos], h1[seam_pos])
        half_n = n // 2
        for k in range(3):
            j, side = slot_curve[(p, k)]
            cring = rings[j][-1 if side == 0 else 0, :n]
            ring_pos = np.array(ring_idx[k])
            m = np.arange(half_n + 1)
            theta_h0 = m % n
            theta_h1 = (n - m) % n
            for hv, th in ((h0, theta_h0), (h1, theta_h1)):
                if side == 0:
                    target = cring[(-th) % n]
                else:
                    target = cring[(th - shifts[j]) % n]
                b.identify(hv[ring_pos], target)

    mesh = b.finish(genus=graph.genus, fn=fn, params=params.as_dict())
    for j, (ids, s, theta) in collars.items():
        mesh.collars[j] = CollarGrid(j, fn.lengths[j], s, theta, ids, mesh.dof[ids[:, :n]])
    problems = mesh.check()
    if problems:
        raise MeshError("; ".join(problems))
    return mesh


def cylinder_mesh(ell, s_max, h, n_theta):
    """Standalone truncated collar ``[-s_max, s_max] x S^1``.

    Returns the mesh and the dofs on the two end circles (for Dirichlet
    conditions).
    """
    if not 0 < s_max < _collar.half_length(ell):
        raise DomainError("need 0 < s_max < X(ell)")
    b = _Builder()
    ids, s, theta = _add_collar(b, 0, ell, s_max, n_theta, h)
    mesh = b.finish(genus=None)
    mesh.collars[0] = CollarGrid(0, ell, s, theta, ids, mesh.dof[ids[:, :n_theta]])
    ends = np.unique(mesh.dof[np.concatenate([ids[0], ids[-1]])])
    return mesh, ends


def flat_square_mesh(n):
    """Unit square ``[0, 1]^2`` with factor 1 on an ``n x n`` grid; returns mesh and boundary dofs."""
    b = _Builder()
    cid = b.add_chart(Chart("flat", 0))
    x = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(x, x, indexing="ij")
    ids = b.add_vertices(cid, np.column_stack([X.ravel(), Y.ravel()])).reshape(n + 1, n + 1)
    b.add_triangles(_structured_triangles(ids, n + 1, n + 1))
    mesh = b.finish(genus=None)
    edge = np.zeros((n + 1, n + 1), dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    return mesh, mesh.dof[ids[edge]]


# ---------------------------------------------------------------------------
# serialization


def _fmt(x):
    return repr(float(x))


def dump_mesh(mesh, path_or_file):
    """Write the ASCII mesh format (header ``hypspec-mesh v1``)."""
    lines = [MESH_HEADER, f"genus {mesh.genus if mesh.genus is not None else '-'}"]
    lines.append(f"charts {len(mesh.charts)}")
    for ch in mesh.charts:
        if ch.kind == "collar":
            lines.append(f"{ch.index} collar {_fmt(ch.ell)} {_fmt(ch.s_min)} {_fmt(ch.s_max)}")
        elif ch.kind == "hexagon":
            lines.append(f"{ch.index} hexagon {ch.half}")
        else:
            lines.append(f"{ch.index} flat")
    lines.append(f"vertices {mesh.n_vertices}")
    for c, (x, y), r in zip(mesh.chart, mesh.coords, mesh.rho):
        lines.append(f"{c} {_fmt(x)} {_fmt(y)} {_fmt(r)}")
    lines.append(f"triangles {len(mesh.triangles)}")
    lines.extend(f"{i} {j} {k}" for i, j, k in mesh.triangles)
    lines.append(f"identifications {len(mesh.pairs)}")
    lines.extend(f"{a} {c}" for a, c in mesh.pairs)
    lines.append(f"collars {len(mesh.collars)}")
    for j, g in sorted(mesh.collars.items()):
        lines.append(f"{j} {_fmt(g.ell)} {g.vertices.shape[0]} {g.vertices.shape[1]} {int(g.vertices[0, 0])}")
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as f:
            f.write(text)


def load_mesh(path_or_file):
    """Read a mesh written by :func:`dump_mesh`."""
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as f:
            text = f.read()
    lines = iter(text.splitlines())
    if next(lines).strip() != MESH_HEADER:
        raise MeshError("not a hypspec-mesh v1 file")

    def section(name):
        key, count = next(lines).split()
        if key != name:
            raise MeshError(f"expected section {name!r}, found {key!r}")
        return int(count)

    g = next(lines).split()[1]
    genus = None if g == "-" else int(g)
    charts = []
    for _ in range(section("charts")):
        parts = next(lines).split()
        idx, kind = int(parts[0]), parts[1]
        if kind == "collar":
            charts.append(Chart("collar", idx, ell=float(parts[2]), s_min=float(parts[3]), s_max=float(parts[4])))
        elif kind == "hexagon":
            charts.append(Chart("hexagon", idx, half=int(parts[2])))
        else:
            charts.append(Chart("flat", idx))
    nv = section("vertices")
    rows = [next(lines).split() for _ in range(nv)]
    chart = np.array([int(r[0]) for r in rows], dtype=np.int64)
    coords = np.array([[float(r[1]), float(r[2])] for r in rows]).reshape(-1, 2)
    rho = np.array([float(r[3]) for r in rows])
    nt = section("triangles")
    tris = np.array([[int(v) for v in next(lines).split()] for _ in range(nt)], dtype=np.int64).reshape(-1, 3)
    npairs = section("identifications")
    pairs = np.array([[int(v) for v in next(lines).split()] for _ in range(npairs)], dtype=np.int64).reshape(-1, 2)
    mesh = SurfaceMesh(charts, chart, coords, rho, tris, pairs, genus=genus)
    for _ in range(section("collars")):
        j, ell, rows_, cols, first = next(lines).split()
        ids = int(first) + np.arange(int(rows_) * int(cols)).reshape(int(rows_), int(cols))
        s = coords[ids[:, 0], 0]
        theta = coords[ids[0, :-1], 1]
        mesh.collars[int(j)] = CollarGrid(int(j), float(ell), s, theta, ids, mesh.dof[ids[:, :-1]])
    return mesh


def load_config(path_or_dict):
    """Parse the JSON surface config into ``(FNCoordinates, MeshParams)``.

    Schema: ``{genus, pants: [...], curves: [{slots: [[p, k], [q, m]],
    length, twist}], mesh: {h, n_theta, delta_cut}}``.
    """
    if isinstance(path_or_dict, dict):
        cfg = path_or_dict
    else:
        with open(path_or_dict) as f:
            cfg = json.load(f)
    try:
        n_pants = len(cfg["pants"])
        curves = [tuple(tuple(slot) for slot in c["slots"]) for c in cfg["curves"]]
        lengths = [float(c["length"]) for c in cfg["curves"]]
        twists = [float(c.get("twist", 0.0)) for c in cfg["curves"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed surface config: {exc}") from exc
    graph = PantsGraph(n_pants, tuple(curves))
    if "genus" in cfg and int(cfg["genus"]) != graph.genus:
        raise ValueError(f"config genus {cfg['genus']} disagrees with {n_pants} pants")
    params = MeshParams(**cfg.get("mesh", {}))
    return FNCoordinates(graph, lengths, twists), params


def config_dict(fn, params=None):
    out = {
        "genus": fn.genus,
        "pants": list(range(fn.graph.n_pants)),
        "curves": [
            {"slots": [list(s) for s in pair], "length": ell, "twist": psi}
            for pair, ell, psi in zip(fn.graph.curves, fn.lengths, fn.twists)
        ],
    }
    if params is not None:
        out["mesh"] = params.as_dict()
    return out


def config_hash(obj):
    """Stable short hash of a JSON-serializable configuration."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
