"""Command-line experiment runner.

Every command writes ``<out>/<command>.csv`` and, for sweeps, an SVG plot.
Exit status: 0 success, 1 a built-in assertion failed, 2 bad input,
3 mesh or solver failure.  Errors are reported as one JSON object on stderr.
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from . import collar, fncalculus, hexagon, qdiff, reduced, spectrum, surface
from .errors import DomainError, MeshError, SolverError

EXIT_OK, EXIT_ASSERT, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, command, cfg_hash, columns, rows):
    buf = io.StringIO()
    buf.write(f"# hypspec v1 {command} {cfg_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["config_hash"] + list(columns))
    for r in rows:
        w.writerow([cfg_hash] + [fmt(v) for v in r])
    with open(path, "w", newline="") as f:
        f.write(buf.getvalue())


def write_svg(path, x, series, xlabel, title, logx=True, logy=True):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "hypspec"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, y in series.items():
        y = np.abs(np.asarray(y, float)) if logy else np.asarray(y, float)
        ax.plot(x, y, marker="o", label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _mesh_params(args, base):
    return surface.MeshParams(
        h=args.h if args.h is not None else base.h,
        n_theta=args.ntheta if args.ntheta is not None else base.n_theta,
        delta_cut=args.delta_cut if args.delta_cut is not None else base.delta_cut,
    )


def _load(path):
    if path is None:
        raise InputError("--config is required")
    if not os.path.exists(path):
        raise InputError(f"config file {path!r} does not exist")
    try:
        return surface.load_config(path)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot parse {path!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# commands; each returns (columns, rows, failures, plot or None)


def identity_checks():
    """Closed-form identities: list of ``(name, value, target, tol)`` with relative tolerances."""
    out = []
    l0 = collar.SELF_DUAL_LENGTH
    out.append(("width(2 arsinh 1) = ell", collar.width(l0), l0, 1e-12))
    out.append(("X(2 arsinh 1) = pi^2/(2 ell)", collar.half_length(l0), np.pi**2 / (2 * l0), 1e-12))
    for ell in (0.05, 0.1, 0.5, 1.0):
        w = collar.width(ell)
        out.append((f"Z(w/2) = 0 at ell={ell}", collar.truncation_level(ell, 0.5 * w), 0.0, 1e-10))
        out.append((f"int rho = width at ell={ell}", _integral_rho(ell), w, 1e-10))
        out.append((f"int 2 pi rho^2 = area at ell={ell}", _integral_area(ell), collar.full_area(ell), 1e-10))
        norms = qdiff.dz2_norms(ell, check=False)
        out.append((f"dz2 L2^2 quadrature at ell={ell}", qdiff.l2_squared_quadrature(ell), norms.L2_squared, 1e-10))
    spec = hexagon.HexagonSpec(1.0, 1.0, 1.0)
    hx = hexagon.embed_hexagon(spec)
    out.append(("hexagon right angles", float(np.max(np.abs(hx.interior_angles() - 0.5 * np.pi))), 0.0, 1e-9))
    for gp, gm in ((1, 1), (1, 2), (2, 3)):
        top = reduced.SplitTopology(gp, gm)
        out.append((f"graph_lambda = c_top ell ({gp},{gm})", reduced.graph_lambda(top, 0.1), reduced.c_top(top) * 0.1, 1e-12))
    return out


def _integral_rho(ell):
    from scipy import integrate

    x = collar.half_length(ell)
    k = ell / (2 * np.pi)
    v, _ = integrate.quad(lambda s: k / np.cos(k * s), -x, x, epsabs=0.0, epsrel=1e-13, limit=200)
    return v


def _integral_area(ell):
    from scipy import integrate

    x = collar.half_length(ell)
    k = ell / (2 * np.pi)
    v, _ = integrate.quad(lambda s: 2 * np.pi * (k / np.cos(k * s)) ** 2, -x, x, epsabs=0.0, epsrel=1e-13, limit=200)
    return v


def _passes(value, target, tol):
    return abs(value - target) <= tol * max(1.0, abs(target))


def cmd_validate(args):
    rows, failures = [], []
    for name, value, target, tol in identity_checks():
        ok = _passes(value, target, tol)
        rows.append([name, value, target, abs(value - target), tol, ok])
        if not ok:
            failures.append(name)
    if args.config:
        fn, params = _load(args.config)
        diag = surface.validate(fn)
        rows.append(["surface config valid", float(bool(diag)), 1.0, 0.0 if diag else 1.0, 0.0, bool(diag)])
        if not diag:
            failures.extend(diag.messages)
        else:
            mesh = surface.build_mesh(fn, _mesh_params(args, params))
            chi = mesh.euler_characteristic()
            rows.append(["mesh Euler characteristic", chi, 2 - 2 * fn.genus, abs(chi - (2 - 2 * fn.genus)), 0, chi == 2 - 2 * fn.genus])
    return ["check", "value", "target", "abs_error", "tol", "pass"], rows, failures, None


def cmd_ctop(args):
    top = reduced.SplitTopology(args.gp, args.gm)
    c = reduced.c_top(top)
    rows, failures = [], []
    errs = []
    for ell, lam, ratio, gratio in reduced.f_of_ell(top, args.ells, args.grid):
        e = abs(ratio - c) / c
        errs.append(e)
        rows.append([ell, lam, ratio, gratio, c, e, abs(ratio - c) / (ell * abs(np.log(ell)))])
    descending = all(b < a for a, b in zip(args.ells, args.ells[1:]))
    if descending and any(b >= a for a, b in zip(errs, errs[1:])):
        failures.append("relative error not monotonically improving")
    if args.ells[-1] <= 0.0125 and errs[-1] > 0.05:
        failures.append(f"final relative error {errs[-1]:.3g} exceeds 5%")
    plot = (args.ells, {"|sl/ell - c_top| / c_top": errs}, "ell", "reduced-model convergence")
    cols = ["ell", "sl_lambda", "sl_over_ell", "graph_over_ell", "c_top", "rel_error", "e_over_ell_log"]
    return cols, rows, failures, plot


def cmd_solve(args):
    fn, params = _load(args.config)
    params = _mesh_params(args, params)
    mesh = surface.build_mesh(fn, params)
    res = spectrum.solve_surface(mesh, k=args.k, seed=args.seed)
    area = mesh.area()
    target = 4 * np.pi * (fn.genus - 1)
    row = [fn.genus, mesh.n_dof, len(mesh.triangles), area, abs(area - target) / target]
    row += list(res.values) + [float(np.max(res.residuals))]
    failures = []
    if abs(res.values[0]) > 1e-8 * res.values[1]:
        failures.append("lambda_0 not negligible against lambda_1")
    if res.values[1] <= 0:
        failures.append("lambda_1 not positive")
    if abs(area - target) > 0.01 * target:
        failures.append("mesh area off by more than 1%")
    cols = ["genus", "n_dof", "n_triangles", "area", "area_rel_error"]
    cols += [f"lambda_{i}" for i in range(args.k)] + ["max_residual"]
    return cols, [row], failures, None


def cmd_deriv(args):
    fn, params = _load(args.config)
    backend = fncalculus.Backend(args.backend, _mesh_params(args, params), curve=args.curve, seed=args.seed)
    rep = fncalculus.rate_experiment_fn(
        fn, args.ells, backend, curve=args.curve, other=args.other, twist_curve=args.curve,
        scheme=args.scheme, workers=args.workers,
    )
    failures = []
    if np.any(rep.column("dlam_dell1") <= 0):
        failures.append("dlam/dell1 not positive")
    series = {"r1": rep.column("r1")}
    if backend.kind == "fem":
        series["|dlam/dell_j|"] = rep.column("dlam_dellj")
    return rep.columns, rep.rows, failures, (args.ells, series, "ell1", "derivative rates")


def cmd_c0(args):
    first, params = _load(args.config)
    second, _ = _load(args.config2)
    backend = fncalculus.Backend("fem", _mesh_params(args, params), seed=args.seed)
    rep = fncalculus.c0_comparison(first, second, args.ells, backend, curve=args.curve, workers=args.workers)
    diff = rep.column("diff")
    failures = []
    if any(b >= a for a, b in zip(diff, diff[1:])):
        failures.append("surface difference not decreasing with ell1")
    return rep.columns, rep.rows, failures, (args.ells, {"|lam - lam~|": diff}, "ell1", "C0 comparison")


def cmd_sharpness(args):
    params = _mesh_params(args, surface.MeshParams())
    rep = fncalculus.sharpness_experiment(args.ells, tuple(args.ell2), params, workers=args.workers, seed=args.seed)
    d = rep.column("D")
    failures = []
    if len(set(args.ell2)) > 1 and any(b >= a for a, b in zip(d, d[1:])):
        failures.append("D(ell1) not decreasing")
    return rep.columns, rep.rows, failures, (args.ells, {"D": d, "D / ell1^2": rep.column("D_over_ell2")}, "ell1", "sharpness")


def cmd_cylinder(args):
    s_max = args.smax_frac * collar.half_length(args.ell)
    ora = spectrum.oracle_cylinder(args.ell, s_max, args.modes, args.grid)[: args.k]
    cols = ["index", "oracle"]
    rows = [[i, v] for i, v in enumerate(ora)]
    failures = []
    if args.h:
        vals = []
        for h in args.h:
            mesh, ends = surface.cylinder_mesh(args.ell, s_max, h, args.ntheta or 64)
            K, M = spectrum.assemble(mesh)
            keep = spectrum.interior_dofs(mesh.n_dof, ends)
            res = spectrum.solve_lowest(spectrum.restrict(K, keep), spectrum.restrict(M, keep), k=args.k, seed=args.seed)
            vals.append(res.values)
        cols += [f"fem_h{h:g}" for h in args.h]
        for r, i in zip(rows, range(args.k)):
            r.extend(v[i] for v in vals)
        if len(args.h) >= 2:
            h1, h2 = args.h[-2], args.h[-1]
            p = 2.0
            ext = (vals[-1] * (h1 / h2) ** p - vals[-2]) / ((h1 / h2) ** p - 1)
            rel = np.abs(ext - ora) / ora
            cols += ["extrapolated", "rel_error"]
            for r, e, q in zip(rows, ext, rel):
                r.extend([e, q])
            if np.any(rel > 0.01):
                failures.append("extrapolated FEM eigenvalues differ from the oracle by more than 1%")
    return cols, rows, failures, None


COMMANDS = {
    "validate": cmd_validate,
    "ctop": cmd_ctop,
    "solve": cmd_solve,
    "deriv": cmd_deriv,
    "c0": cmd_c0,
    "sharpness": cmd_sharpness,
    "cylinder-oracle": cmd_cylinder,
}


def build_parser():
    p = _Parser(prog="hypspec", description="Small eigenvalues of pinched hyperbolic surfaces.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def mesh_flags(sp):
        sp.add_argument("--h", type=float)
        sp.add_argument("--ntheta", type=int)
        sp.add_argument("--delta-cut", type=float)

    sp = sub.add_parser("validate")
    sp.add_argument("--config")
    mesh_flags(sp)

    sp = sub.add_parser("ctop")
    sp.add_argument("--gp", type=int, default=1)
    sp.add_argument("--gm", type=int, default=1)
    sp.add_argument("--ells", type=_floats, default=[0.4, 0.2, 0.1, 0.05, 0.025, 0.0125])
    sp.add_argument("--grid", type=int, default=8192)

    sp = sub.add_parser("solve")
    sp.add_argument("--config")
    sp.add_argument("--k", type=int, default=3)
    mesh_flags(sp)

    sp = sub.add_parser("deriv")
    sp.add_argument("--config")
    sp.add_argument("--backend", choices=["fem", "sl", "graph"], default="sl")
    sp.add_argument("--ells", type=_floats, default=[0.2, 0.1, 0.05, 0.025])
    sp.add_argument("--curve", type=int, default=0)
    sp.add_argument("--other", type=int, default=1)
    sp.add_argument("--scheme", choices=list(fncalculus.SCHEMES), default="central")
    mesh_flags(sp)

    sp = sub.add_parser("c0")
    sp.add_argument("--config")
    sp.add_argument("--config2")
    sp.add_argument("--ells", type=_floats, default=[0.2, 0.1])
    sp.add_argument("--curve", type=int, default=0)
    mesh_flags(sp)

    sp = sub.add_parser("sharpness")
    sp.add_argument("--ells", type=_floats, default=[0.2, 0.1, 0.05])
    sp.add_argument("--ell2", type=_floats, default=[0.5, 1.0])
    mesh_flags(sp)

    sp = sub.add_parser("cylinder-oracle")
    sp.add_argument("--ell", type=float, default=0.5)
    sp.add_argument("--smax-frac", type=float, default=0.8)
    sp.add_argument("--modes", type=int, default=8)
    sp.add_argument("--grid", type=int, default=4000)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--h", type=_floats)
    sp.add_argument("--ntheta", type=int)
    return p


def _run_config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "workers")}
    for key in ("config", "config2"):
        path = cfg.get(key)
        if path and os.path.exists(path):
            with open(path) as f:
                cfg[key] = json.load(f)
    return cfg


def _fail(code, kind, message, **extra):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit": code, **extra}, sort_keys=True) + "\n")
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.workers < 1:
            raise InputError("--workers must be >= 1")
        os.makedirs(args.out, exist_ok=True)
        cfg_hash = surface.config_hash(_run_config(args))
        cols, rows, failures, plot = COMMANDS[args.command](args)
    except (InputError, DomainError, json.JSONDecodeError, argparse.ArgumentTypeError) as exc:
        return _fail(EXIT_INPUT, "input", str(exc))
    except SolverError as exc:
        return _fail(EXIT_SOLVER, "solver", str(exc), config=getattr(exc, "config", None))
    except MeshError as exc:
        return _fail(EXIT_SOLVER, "mesh", str(exc))
    name = args.command
    write_csv(os.path.join(args.out, f"{name}.csv"), name, cfg_hash, cols, rows)
    if plot is not None:
        x, series, xlabel, title = plot
        write_svg(os.path.join(args.out, f"{name}.svg"), x, series, xlabel, title)
    if failures:
        return _fail(EXIT_ASSERT, "assertion", "; ".join(failures), failures=failures)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
