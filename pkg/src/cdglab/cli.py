"""Command-line driver for the CDG/LDG/BR2 experiments.

Every command writes a report whose CSV columns are fixed by
:data:`cdglab.analysis.CSV_FIELDS`.  Independent cells run on a thread pool
whose size is read from ``CDGLAB_THREADS`` (unset or 0 runs serially);
rows are always sorted before they are written.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

from . import __version__
from .analysis import (ConvergenceReport, ReportRow, h1_seminorm_error, l2_error,
                       memory_counts, sparsity_census, vector_l2_error)
from .basis import reference_element
from .forms import (SCHEMES, DGField, DGSpace, ProblemSpec, SchemeConfig, assemble,
                    pattern_to_dense, reconstruct_flux, structural_pattern)
from .linalg import (FactorizationError, PowerIterationError, nullspace_dim, solve_spd,
                     spectral_radius_generalized, write_pbm)
from .manufactured import ManufacturedSolution
from .mesh import Mesh, assign_switches, build_four_triangle_mesh, build_structured_mesh


@dataclass
class RunConfig:
    command: str
    schemes: list = field(default_factory=lambda: ["CDG"])
    ps: list = field(default_factory=lambda: [1])
    ns: list = field(default_factory=lambda: [2])
    switches: list = field(default_factory=lambda: ["consistent"])
    c11_interior: list = field(default_factory=lambda: [0.0])
    c11_boundary: list | None = field(default_factory=lambda: [1.0])  # None: same as interior
    eta: float = 3.0
    periodic: bool = False
    out: str | None = None
    fmt: str = "csv"
    seed: int = 0
    poly_exact: bool = False
    mesh: str | None = None
    ds: list = field(default_factory=lambda: [1, 2, 3])
    alphas: list = field(default_factory=lambda: [0, 1, 2])
    pbm_dir: str | None = None
    export_matrix: str | None = None

    def __post_init__(self):
        if any(p < 1 for p in self.ps):
            raise ValueError("every p must be at least 1")
        if any(n < 1 for n in self.ns):
            raise ValueError("every n must be at least 1")
        self.schemes = [s.upper() for s in self.schemes]
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")


# ---------------------------------------------------------------- helpers

def _threads() -> int:
    try:
        return max(0, int(os.environ.get("CDGLAB_THREADS", "0") or 0))
    except ValueError:
        return 0


def _map(fn, items):
    """Run ``fn`` over ``items``; results keep the input order."""
    workers = _threads()
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt_num(v) -> str:
    return f"{v:g}"


def _c11_label(scheme, ci, cb) -> str:
    if scheme == "BR2":
        return ""
    return _fmt_num(ci) if ci == cb else f"{_fmt_num(ci)}/{_fmt_num(cb)}"


def _c11_pairs(cfg: RunConfig):
    if cfg.c11_boundary is None:
        return [(c, c) for c in cfg.c11_interior]
    return [(ci, cb) for ci in cfg.c11_interior for cb in cfg.c11_boundary]


def load_mesh(spec: str | None, n: int, periodic: bool) -> Mesh:
    """``None`` gives the structured square, ``"four"`` the small
    four-triangle mesh, anything else is read as a mesh JSON file."""
    if spec is None:
        return build_structured_mesh(n, periodic=periodic)
    if spec == "four":
        return build_four_triangle_mesh()
    return Mesh.from_json(Path(spec).read_text())


def polynomial_problem(p: int, seed: int):
    """Random degree-``p`` polynomial solution with its exact source."""
    rng = np.random.default_rng(seed)
    c = np.zeros((p + 1, p + 1))
    for i in range(p + 1):
        for j in range(p + 1 - i):
            c[i, j] = rng.uniform(-1, 1)
    lap = np.zeros_like(c)
    dxx = P.polyder(c, 2, axis=0)
    dyy = P.polyder(c, 2, axis=1)
    lap[:dxx.shape[0], :] += dxx
    lap[:, :dyy.shape[1]] += dyy
    cx = P.polyder(c, 1, axis=0)
    cy = P.polyder(c, 1, axis=1)

    def u(x, y):
        return P.polyval2d(x, y, c)

    def grad(x, y):
        return np.stack([P.polyval2d(x, y, cx), P.polyval2d(x, y, cy)], axis=-1)

    def f(x, y):
        return -P.polyval2d(x, y, lap)

    return u, grad, ProblemSpec(f=f, g_D=u)


# ---------------------------------------------------------------- solve

@dataclass
class SolveResult:
    l2: float
    h1: float
    flux: float
    residual: float
    seconds: float
    notes: list


def run_solve(mesh: Mesh, p: int, scheme: str, switch: str, c11i: float, c11b: float,
              eta: float, poly_exact: bool = False, seed: int = 0,
              export_matrix: str | None = None) -> SolveResult:
    t0 = time.perf_counter()
    basis = reference_element(p)
    if poly_exact:
        u_ex, g_ex, problem = polynomial_problem(p, seed)
    else:
        ms = ManufacturedSolution()
        u_ex, g_ex, problem = ms.eval_u, ms.eval_grad_u, ms.problem()
    sw = assign_switches(mesh, switch) if mesh.interior_faces else None
    space = DGSpace(mesh, basis, problem.kappa)
    A, b = assemble(mesh, basis, sw, problem,
                    SchemeConfig(scheme, c11i, c11b, eta, switch), space=space)
    if export_matrix:
        A.write_coordinate(export_matrix)
    x = solve_spd(A, b)
    res = np.linalg.norm(A.matvec(x) - b) / (A.norm_inf() * np.linalg.norm(x) + np.linalg.norm(b))
    u = DGField(x.reshape(space.T, space.S))
    sigma = reconstruct_flux(u, space, sw, problem, scheme)
    return SolveResult(l2_error(space, u, u_ex), h1_seminorm_error(space, u, g_ex),
                       vector_l2_error(space, sigma, g_ex), float(res),
                       time.perf_counter() - t0, list(A.notes))


def _cells(cfg: RunConfig):
    cells = []
    for scheme in cfg.schemes:
        pairs = [(0.0, 0.0)] if scheme == "BR2" else _c11_pairs(cfg)
        switches = ["consistent"] if scheme == "BR2" else cfg.switches
        for switch in switches:
            for ci, cb in pairs:
                for p in cfg.ps:
                    for n in cfg.ns:
                        cells.append((scheme, switch if scheme != "BR2" else "", p, n, ci, cb))
    return cells


def _solve_rows(cfg: RunConfig, metrics):
    def work(cell):
        scheme, switch, p, n, ci, cb = cell
        base = dict(scheme=scheme, switch=switch, p=p, n=n, c11=_c11_label(scheme, ci, cb),
                    eta=_fmt_num(cfg.eta) if scheme == "BR2" else "")
        try:
            mesh = load_mesh(cfg.mesh, n, cfg.periodic)
            r = run_solve(mesh, p, scheme, switch or "consistent", ci, cb, cfg.eta,
                          cfg.poly_exact, cfg.seed, cfg.export_matrix)
        except (FactorizationError, ValueError) as exc:
            return [ReportRow(**base, metric=m, status=f"failed: {exc}") for m in metrics], None
        vals = {"l2_error": r.l2, "h1_error": r.h1, "flux_error": r.flux, "residual": r.residual}
        return [ReportRow(**base, metric=m, value=vals[m]) for m in metrics], r

    out = _map(work, _cells(cfg))
    rows = [row for rs, _ in out for row in rs]
    notes = sorted({nt for _, r in out if r is not None for nt in r.notes})
    seconds = sum(r.seconds for _, r in out if r is not None)
    return rows, notes, seconds


def cmd_solve(cfg: RunConfig) -> ConvergenceReport:
    rows, notes, seconds = _solve_rows(cfg, ("l2_error", "h1_error", "flux_error", "residual"))
    if cfg.poly_exact:
        for r in rows:
            if r.metric == "l2_error" and r.status == "ok" and not r.value <= 1e-9:
                r.status = "failed: polynomial not reproduced"
    # wall time goes to metadata only so the CSV stays byte-reproducible
    return ConvergenceReport(rows, {"command": "solve", "notes": notes,
                                    "wall_time_s": round(seconds, 3)})


def cmd_convergence(cfg: RunConfig) -> ConvergenceReport:
    rows, notes, _ = _solve_rows(cfg, ("l2_error", "h1_error"))
    rep = ConvergenceReport(rows, {"command": "convergence", "notes": notes})
    rep.fill_rates()
    return rep


def cmd_nullspace(cfg: RunConfig) -> ConvergenceReport:
    """Null-space dimension on a periodic mesh (default: n=2) with C11=0."""
    def work(cell):
        scheme, switch, p, n = cell
        mesh = build_structured_mesh(n, periodic=True)
        basis = reference_element(p)
        sw = assign_switches(mesh, switch)
        A, _ = assemble(mesh, basis, sw, ProblemSpec(), SchemeConfig(scheme, 0.0, 0.0))
        k, s = nullspace_dim(A, return_singular_values=True)
        gap = s[-k - 1] / max(s[-k], np.finfo(float).tiny) if k < len(s) and k else np.inf
        base = dict(scheme=scheme, switch=switch, p=p, n=n, c11="0")
        return [ReportRow(**base, metric="nullity", value=k),
                ReportRow(**base, metric="spectral_gap", value=float(gap))]

    schemes = [s for s in cfg.schemes if s != "BR2"]
    cells = [(s, sw, p, n) for s in schemes for sw in cfg.switches for p in cfg.ps for n in cfg.ns]
    rows = [r for rs in _map(work, cells) for r in rs]
    return ConvergenceReport(rows, {"command": "nullspace", "rel_tol": 1e-8})


def cmd_spectrum(cfg: RunConfig) -> ConvergenceReport:
    """``(h/p)^2 |lambda_max|`` of ``M^-1 A`` on the Dirichlet problem."""
    def work(cell):
        scheme, switch, p, n, ci, cb = cell
        base = dict(scheme=scheme, switch=switch, p=p, n=n, c11=_c11_label(scheme, ci, cb),
                    eta=_fmt_num(cfg.eta) if scheme == "BR2" else "")
        mesh = build_structured_mesh(n)
        basis = reference_element(p)
        space = DGSpace(mesh, basis)
        sw = assign_switches(mesh, switch or "consistent")
        A, _ = assemble(mesh, basis, sw, ProblemSpec(), SchemeConfig(scheme, ci, cb, cfg.eta),
                        space=space)
        try:
            lam = spectral_radius_generalized(A, space.mass, seed=cfg.seed)
        except PowerIterationError as exc:
            return ReportRow(**base, metric="scaled_spectral_radius",
                             value=exc.estimate * (1.0 / (n * p)) ** 2, status=f"failed: {exc}")
        return ReportRow(**base, metric="scaled_spectral_radius", value=lam / (n * p) ** 2)

    rows = _map(work, _cells(cfg))
    return ConvergenceReport(rows, {"command": "spectrum", "tol": 1e-8})


def cmd_memory(cfg: RunConfig) -> ConvergenceReport:
    rows = []
    for d in cfg.ds:
        for p in cfg.ps:
            for a in cfg.alphas:
                m = memory_counts(d, p, a)
                for scheme, v in (("CDG", m.M_CDG), ("LDG", m.M_LDG), ("BR2", m.M_BR2)):
                    rows.append(ReportRow(scheme=scheme, p=p, metric=f"memory[d={d},alpha={a}]",
                                          value=v))
    return ConvergenceReport(rows, {"command": "memory"})


def cmd_sparsity(cfg: RunConfig) -> ConvergenceReport:
    """Structural census, plus PBM bitmaps of the full pattern if requested."""
    rows = []
    for scheme in cfg.schemes:
        for switch in (["consistent"] if scheme == "BR2" else cfg.switches):
            for p in cfg.ps:
                for n in cfg.ns:
                    mesh = load_mesh(cfg.mesh, n, cfg.periodic)
                    basis = reference_element(p)
                    sw = assign_switches(mesh, switch) if mesh.interior_faces else None
                    pat = structural_pattern(mesh, basis, sw, scheme)
                    cen = sparsity_census(pat, mesh)
                    nn = "" if mesh.n is None else n
                    base = dict(scheme=scheme, switch=switch if scheme != "BR2" else "",
                                p=p, n=nn)
                    interior = cen.interior_counts
                    rows += [ReportRow(**base, metric="dofs", value=mesh.num_elements * basis.S),
                             ReportRow(**base, metric="nonzeros", value=cen.total),
                             ReportRow(**base, metric="alpha_mean", value=cen.alpha_mean)]
                    if interior.size:
                        rows += [ReportRow(**base, metric="interior_nnz_min", value=int(interior.min())),
                                 ReportRow(**base, metric="interior_nnz_max", value=int(interior.max()))]
                    for i in range(mesh.num_elements):
                        for j in range(mesh.num_elements):
                            if i < j and (i, j) in pat and j not in mesh.neighbors(i):
                                rows.append(ReportRow(**base, metric=f"nonlocal_pair[{i},{j}]",
                                                      value=1))
                    if cfg.pbm_dir:
                        Path(cfg.pbm_dir).mkdir(parents=True, exist_ok=True)
                        name = f"{scheme}_{switch}_p{p}_n{nn or 'mesh'}.pbm"
                        write_pbm(pattern_to_dense(pat, mesh.num_elements, basis.S),
                                  Path(cfg.pbm_dir) / name)
    return ConvergenceReport(rows, {"command": "sparsity"})


def cmd_mesh(cfg: RunConfig) -> str:
    return load_mesh(cfg.mesh, cfg.ns[0], cfg.periodic).to_json()


COMMANDS = {
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "nullspace": cmd_nullspace,
    "spectrum": cmd_spectrum,
    "memory": cmd_memory,
    "sparsity": cmd_sparsity,
}


# ---------------------------------------------------------------- argparse

def _ints(text):
    return [int(t) for t in text.split(",") if t]


def _floats(text):
    return [float(t) for t in text.split(",") if t]


def _strs(text):
    return [t for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdglab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scheme", type=_strs, default=["CDG"],
                        help="comma-separated subset of CDG,LDG,BR2")
    common.add_argument("--switch", type=_strs, default=["consistent"],
                        help="consistent, natural, or both")
    common.add_argument("--p", type=_ints, default=[1], help="polynomial degrees")
    common.add_argument("--n", type=_ints, default=[2], help="mesh resolutions")
    common.add_argument("--c11-interior", type=_floats, default=[0.0])
    common.add_argument("--c11-boundary", default="1",
                        help="values on Dirichlet faces, or 'same' to follow --c11-interior")
    common.add_argument("--eta", type=float, default=3.0, help="BR2 lifting factor")
    common.add_argument("--periodic", action="store_true")
    common.add_argument("--mesh", help="mesh JSON file, or 'four' for the four-triangle mesh")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("solve", parents=[common], help="solve and report errors")
    s.add_argument("--poly-exact", action="store_true",
                   help="use a random degree-p polynomial solution instead")
    s.add_argument("--export-matrix", help="write A in coordinate format")
    sub.add_parser("convergence", parents=[common], help="error and rate grid")
    sub.add_parser("nullspace", parents=[common], help="null-space dimensions (periodic mesh)")
    sub.add_parser("spectrum", parents=[common], help="scaled spectral radii")
    m = sub.add_parser("memory", parents=[common], help="nonzeros per interior element")
    m.add_argument("--d", type=_ints, default=[1, 2, 3])
    m.add_argument("--alpha", type=_ints, default=[0, 1, 2])
    sp = sub.add_parser("sparsity", parents=[common], help="structural census and PBM export")
    sp.add_argument("--pbm-dir")
    sub.add_parser("mesh", parents=[common], help="export a mesh as JSON")
    return parser


def config_from_args(args) -> RunConfig:
    cb = None if args.c11_boundary == "same" else _floats(args.c11_boundary)
    ps = args.p
    if args.command == "memory" and ps == [1]:
        ps = [1, 2, 3, 4, 5]
    return RunConfig(
        command=args.command, schemes=args.scheme, ps=ps, ns=args.n, switches=args.switch,
        c11_interior=args.c11_interior, c11_boundary=cb, eta=args.eta, periodic=args.periodic,
        out=args.out, fmt=args.format, seed=args.seed,
        poly_exact=getattr(args, "poly_exact", False), mesh=args.mesh,
        ds=getattr(args, "d", [1, 2, 3]), alphas=getattr(args, "alpha", [0, 1, 2]),
        pbm_dir=getattr(args, "pbm_dir", None),
        export_matrix=getattr(args, "export_matrix", None))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.command == "mesh":
            text = cmd_mesh(cfg)
        else:
            report = COMMANDS[cfg.command](cfg)
            text = report.to_csv() if cfg.fmt == "csv" else report.to_json()
    except (ValueError, OSError) as exc:
        print(f"cdglab: error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.command != "mesh":
        failed = [r for r in report.rows if r.status != "ok"]
        for r in failed:
            print(f"cdglab: {r.scheme} p={r.p} n={r.n} {r.metric}: {r.status}", file=sys.stderr)
        return 1 if failed else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
