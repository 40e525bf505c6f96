"""Finite-element Laplace-Beltrami eigenproblem on a chart mesh.

Piecewise-linear elements.  In every chart the metric is conformal,
``f^2 (dx^2 + dy^2)``, so the element stiffness is the Euclidean one of the
chart triangle and the mass carries the weight ``f^2``, integrated with the
three-point edge-midpoint rule.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, MeshError, SolverError

DEFAULT_TOL = 1e-9


@dataclass
class EigenResult:
    """Ascending eigenvalues, M-orthonormal eigenvectors (columns), residuals."""

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    shift: float = None
    iterations: int = 0


@dataclass
class AngularEnergyProfile:
    """``theta_energy[i] = int |u_theta|^2 dtheta`` on the circle ``s[i]``."""

    s: np.ndarray
    theta_energy: np.ndarray


def triangle_geometry(mesh):
    """Chart areas, edge midpoints ``(T, 3, 2)`` and chart ids of all triangles."""
    p = mesh.coords[mesh.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    mids = 0.5 * np.stack([p[:, 0] + p[:, 1], p[:, 1] + p[:, 2], p[:, 2] + p[:, 0]], axis=1)
    return area, mids, mesh.triangle_chart


def element_stiffness(mesh):
    """Euclidean P1 stiffness blocks ``(T, 3, 3)`` in chart coordinates."""
    p = mesh.coords[mesh.triangles]
    # edge opposite vertex i
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    area = 0.5 * np.abs(e[:, 1, 0] * e[:, 2, 1] - e[:, 1, 1] * e[:, 2, 0])
    if np.any(area <= 1e-300):
        raise MeshError(f"{int(np.sum(area <= 1e-300))} degenerate triangles")
    return np.einsum("tik,tjk->tij", e, e) / (4.0 * area)[:, None, None]


def element_mass(mesh):
    """Mass blocks with weight ``f^2`` by the edge-midpoint rule."""
    area, mids, cids = triangle_geometry(mesh)
    f2 = mesh.factor_at(np.repeat(cids, 3), mids.reshape(-1, 2)).reshape(-1, 3) ** 2
    # basis values at midpoints m01, m12, m20
    phi = np.array([[0.5, 0.0, 0.5], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])  # phi[i, q]
    return (area / 3.0)[:, None, None] * np.einsum("iq,jq,tq->tij", phi, phi, f2)


def _scatter(mesh, blocks):
    t = mesh.dof_triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    a = sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(mesh.n_dof, mesh.n_dof)).tocsr()
    a.sum_duplicates()
    return a


def assemble(mesh):
    """Global stiffness ``K`` and mass ``M`` (CSR) on the mesh degrees of freedom."""
    K = _scatter(mesh, element_stiffness(mesh))
    M = _scatter(mesh, element_mass(mesh))
    # exact structural symmetry of the sums
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    return K.tocsr(), M.tocsr()


def restrict(A, keep):
    """Principal submatrix on the index set ``keep``."""
    keep = np.asarray(keep)
    return A[keep][:, keep]


def interior_dofs(n, boundary):
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(boundary)] = False
    return np.flatnonzero(mask)


def dump_matrix(A, path_or_file, name="matrix"):
    """Coordinate-triplet text dump: header ``# <name> <n> <nnz>``, then ``i j value`` lines."""
    coo = sp.coo_matrix(A)
    lines = [f"# {name} {coo.shape[0]} {coo.nnz}"]
    lines.extend(f"{i} {j} {v!r}" for i, j, v in zip(coo.row, coo.col, coo.data.tolist()))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as f:
            f.write(text)


def _residuals(K, M, values, X):
    R = K @ X - (M @ X) * values
    mnorm = np.sqrt(np.einsum("ij,ij->j", X, M @ X))
    return np.linalg.norm(R, axis=0) / mnorm


def solve_lowest(K, M, k=2, tol=DEFAULT_TOL, seed=0, shift=None, max_iter=50):
    """The ``k`` smallest eigenpairs of ``K x = lambda M x``.

    Shift-invert with a sparse LU factorization of ``K + shift M``; the
    default shift is the reciprocal of the total mass.  A block
    of ``k + 4`` vectors drawn from ``seed`` goes through ARPACK with the
    factorization as inverse operator, then through Rayleigh-Ritz polished
    inverse iteration until every residual is below ``tol``.
    """
    n = K.shape[0]
    if k < 1 or k >= n - 1:
        raise ValueError("need 1 <= k < n - 1")
    total = M.sum()
    if not total > 0:
        raise SolverError("mass matrix has nonpositive total mass")
    if shift is None:
        # 1 / area sits at the bottom of the spectrum for any conformal scale
        shift = 1.0 / total
    A = (K + shift * M).tocsc()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SolverError(f"factorization of K + {shift:g} M failed: {exc}") from exc
    rng = np.random.default_rng(seed)
    op = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
    v0 = rng.standard_normal(n)
    ncv = min(n - 1, max(2 * k + 1, 20))
    try:
        mu, X = spla.eigsh(K, k=k, M=M, sigma=-shift, OPinv=op, which="LM", v0=v0, ncv=ncv, tol=0.0)
    except spla.ArpackNoConvergence as exc:
        mu, X = exc.eigenvalues, exc.eigenvectors
        if len(mu) < k:
            raise SolverError("ARPACK did not converge") from exc
    X = np.asarray(X)
    it = 0
    for it in range(max_iter + 1):
        # Rayleigh-Ritz on the current block
        G = X.T @ (M @ X)
        H = X.T @ (K @ X)
        w, C = la.eigh(0.5 * (H + H.T), 0.5 * (G + G.T))
        X = X @ C
        res = _residuals(K, M, w, X)
        if np.all(res <= tol) or it == max_iter:
            break
        X = lu.solve(M @ X)
    order = np.argsort(w)
    w, X, res = w[order], X[:, order], res[order]
    if np.any(res > tol):
        raise SolverError(f"eigen-iteration stalled at residuals {res}", residuals=res)
    # deterministic sign: largest-magnitude entry positive
    idx = np.argmax(np.abs(X), axis=0)
    X = X * np.sign(X[idx, np.arange(X.shape[1])])
    return EigenResult(w, X, res, shift=shift, iterations=it)


def solve_surface(mesh, k=3, tol=DEFAULT_TOL, seed=0, shift=None):
    K, M = assemble(mesh)
    return solve_lowest(K, M, k=k, tol=tol, seed=seed, shift=shift)


def eigenvector_on_vertices(result, mesh, which):
    return result.vectors[mesh.dof, which]


def angular_energy(result, mesh, curve, which=1, field=None):
    """Per-circle angular energy of an eigenfunction on a collar chart.

    Trapezoidal rule in ``theta`` of the squared forward difference, which is
    the ``theta``-component of the P1 gradient on the ring edges.  Pass
    ``field`` (values on the mesh dofs) to analyse an arbitrary function.
    """
    grid = mesh.collar_restriction(curve)
    u = result.vectors[:, which] if field is None else np.asarray(field)
    vals = u[grid.nodes]
    dtheta = 2.0 * np.pi / vals.shape[1]
    du = (np.roll(vals, -1, axis=1) - vals) / dtheta
    return AngularEnergyProfile(grid.s.copy(), np.sum(du**2, axis=1) * dtheta)


def thick_energy(result, mesh, delta, which=1):
    """Dirichlet energy of eigenfunction ``which`` on the delta-thick triangles.

    A triangle is thick when every vertex has injectivity radius at least
    ``delta`` (exact on collar charts, hexagon charts counted as thick).
    """
    inj = mesh.injectivity_proxy()
    thick = np.all(inj[mesh.triangles] >= delta, axis=1)
    if not np.any(thick):
        return 0.0
    u = result.vectors[:, which][mesh.dof_triangles[thick]]
    ke = element_stiffness(mesh)[thick]
    return float(np.einsum("ti,tij,tj->", u, ke, u))


def roundoff_floor(result, mesh, which=1):
    """Level at which ``angular_energy`` is limited by double-precision storage.

    An absolute error ``eps * max|u|`` per node gives a difference-quotient
    energy of about ``4 pi (eps max|u| / dtheta)^2`` on every circle.
    """
    u = result.vectors[:, which]
    grids = list(mesh.collars.values())
    n = grids[0].nodes.shape[1] if grids else 1
    dtheta = 2.0 * np.pi / n
    return 4.0 * np.pi * (np.finfo(float).eps * np.max(np.abs(u)) / dtheta) ** 2


def oracle_cylinder(ell, s_max, modes, grid, rho_const=None, per_mode=8):
    """Separated Dirichlet spectrum of the truncated collar ``[-s_max, s_max] x S^1``.

    For each Fourier mode ``0 <= n <= modes`` solves ``-v'' + n^2 v = lambda rho^2 v``
    with ``v(+-s_max) = 0`` by second differences on ``grid`` interior points.
    Modes ``n >= 1`` enter twice (``+-n``).  Returns the merged ascending values.
    ``rho_const`` replaces the collar factor by a constant.
    """
    from . import collar as _collar

    if not 0 < s_max < _collar.half_length(ell):
        raise DomainError("need 0 < s_max < X(ell)")
    if grid < 3 or modes < 0:
        raise DomainError("need grid >= 3 and modes >= 0")
    ds = 2.0 * s_max / (grid + 1)
    s = -s_max + ds * np.arange(1, grid + 1)
    rho = np.full(grid, float(rho_const)) if rho_const is not None else _collar.conformal_factor(ell, s)
    r = 1.0 / rho
    off = np.full(grid - 1, -1.0 / ds**2) * r[:-1] * r[1:]
    count = min(per_mode, grid)
    out = []
    for n in range(modes + 1):
        main = (2.0 / ds**2 + n * n) * r * r
        vals = la.eigh_tridiagonal(main, off, eigvals_only=True, select="i", select_range=(0, count - 1))
        out.extend(vals.tolist() * (1 if n == 0 else 2))
    return np.sort(np.array(out))


def decay_slope(profile, floor=0.0, window=(0.25, 0.75), margin=1e3):
    """Fitted slope of ``log theta_energy`` per unit step toward the collar center.

    Uses the samples with ``window[0] <= |s| / max|s| <= window[1]`` whose
    value exceeds ``margin * floor``; both halves of the collar are pooled.
    Negative slopes mean the angular energy decays toward the core.
    """
    s = np.abs(profile.s)
    e = profile.theta_energy
    top = s.max()
    keep = (s >= window[0] * top) & (s <= window[1] * top) & (e > margin * floor) & (e > 0)
    if np.count_nonzero(keep) < 3:
        raise ValueError("too few samples above the roundoff floor in the fit window")
    # step toward the center decreases |s|
    return float(-np.polyfit(s[keep], np.log(e[keep]), 1)[0])
