"""Configuration files, output writers and the ``femhd`` command line."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
import typing
from pathlib import Path

import numpy as np

from . import __version__
from . import operators as ops
from .cases import CASES, SQ4PI, alfven_errors, get_case, init_case
from .driver import DIAG_COLUMNS, DiagnosticsRecord, SolverConfig, run_simulation
from .mesh import ConfigurationError
from .physics import MhdState, Params

OUTPUT_ROOT_ENV = "FEMHD_OUTPUT_ROOT"
FLOAT_FMT = "{:.17g}"
LOG_FLOOR = 1e-32

# keys that are not SolverConfig fields
RUN_KEYS: dict[str, type] = {
    "case": str,
    "nx": int,
    "ny": int,
    "nz": int,
    "out": str,
    "cadence": int,
    "deterministic": bool,
    "closure": str,
    "reference": str,
}
PARAM_KEYS: dict[str, type] = {"gamma": float, "c_v": float, "mu": float, "kappa": float, "eta": float}


def _solver_types() -> dict[str, tuple[type, bool]]:
    hints = typing.get_type_hints(SolverConfig)
    out = {}
    for name, tp in hints.items():
        args = typing.get_args(tp)
        optional = type(None) in args
        base = next((a for a in args if a is not type(None)), tp) if args else tp
        out[name] = (base, optional)
    return out


SOLVER_TYPES = _solver_types()


def all_keys() -> list[str]:
    return list(RUN_KEYS) + list(PARAM_KEYS) + list(SOLVER_TYPES)


def _key_type(key: str) -> tuple[type, bool]:
    if key in RUN_KEYS:
        return RUN_KEYS[key], key in ("out", "reference")
    if key in PARAM_KEYS:
        return PARAM_KEYS[key], False
    if key in SOLVER_TYPES:
        return SOLVER_TYPES[key]
    raise ConfigurationError(f"unknown configuration key {key!r}")


def parse_value(key: str, text: str):
    """Convert a textual value to the type expected for ``key``."""
    tp, optional = _key_type(key)
    t = text.strip()
    if optional and t.lower() in ("none", "null", ""):
        return None
    try:
        if tp is bool:
            low = t.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(t)
        if tp is int:
            return int(t)
        if tp is float:
            return float(t)
        return t
    except ValueError as exc:
        raise ConfigurationError(f"malformed value {text!r} for key {key!r}") from exc


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return FLOAT_FMT.format(v)
    return str(v)


def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(key, val)
    return out


def write_config_file(cfg: dict, path: str | Path, header: str = "") -> None:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines += [f"{k} = {format_value(v)}" for k, v in cfg.items()]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclasses.dataclass
class RunConfig:
    case: str
    nx: int
    ny: int
    nz: int
    solver: SolverConfig
    params: Params
    out: str | None = None
    cadence: int = 0
    deterministic: bool = True
    closure: str = "total"
    reference: str | None = None

    def flat(self) -> dict:
        d = {"case": self.case, "nx": self.nx, "ny": self.ny, "nz": self.nz, "out": self.out,
             "cadence": self.cadence, "deterministic": self.deterministic,
             "closure": self.closure, "reference": self.reference}
        d.update(dataclasses.asdict(self.params))
        d.update(self.solver.as_dict())
        return d


def resolve_config(file_values: dict | None = None, cli_values: dict | None = None) -> RunConfig:
    """Case defaults, overridden by file values, overridden by command-line values."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (cli_values or {}).items() if v is not None})
    for k in merged:
        _key_type(k)
    if "case" not in merged:
        raise ConfigurationError("missing case")
    spec = get_case(merged["case"])
    solver = dict(spec.overrides)
    solver["t_end"] = spec.t_end
    solver.update({k: v for k, v in merged.items() if k in SOLVER_TYPES})
    params = dataclasses.asdict(spec.params)
    params.update({k: v for k, v in merged.items() if k in PARAM_KEYS})
    if merged.get("closure", "total") not in ("total", "hydro"):
        raise ConfigurationError("closure must be 'total' or 'hydro'")
    return RunConfig(
        case=spec.name,
        nx=merged.get("nx", spec.resolution[0]),
        ny=merged.get("ny", spec.resolution[1]),
        nz=merged.get("nz", spec.resolution[2]),
        solver=SolverConfig(**solver),
        params=Params(**params),
        out=merged.get("out"),
        cadence=merged.get("cadence", 0),
        deterministic=merged.get("deterministic", True),
        closure=merged.get("closure", "total"),
        reference=merged.get("reference"),
    )


def output_dir(rc: RunConfig) -> Path:
    if rc.out:
        base = Path(rc.out)
    else:
        root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
        base = root / f"{rc.case}_{rc.nx}x{rc.ny}x{rc.nz}"
    base.mkdir(parents=True, exist_ok=True)
    return base


# ------------------------------------------------------------------ fields
def cell_quantities(state: MhdState) -> dict[str, np.ndarray]:
    """Derived fields on the primal cells (the VTK cells)."""
    g = state.grid
    rho_c = g.to_pos(state.rho, "NNN", "CCC")
    p_c = g.to_pos(state.p, "NNN", "CCC")
    u_c = ops.edge_to_cell(g, state.u)
    b_c = ops.face_to_cell(g, state.B)
    div = ops.apply_div(g, state.B)
    return {
        "rho": rho_c,
        "p": p_c,
        "umag": np.sqrt(np.sum(u_c * u_c, axis=0)),
        "Bmag": np.sqrt(np.sum(b_c * b_c, axis=0)),
        "divB": div,
        "log10_divB": np.log10(np.maximum(np.abs(div), LOG_FLOOR)),
    }


def raw_dofs(state: MhdState) -> dict[str, np.ndarray]:
    """Native degrees of freedom, index-aligned with the VTK cells."""
    out = {"rho_node": state.rho, "p_node": state.p, "energy_node": state.energy}
    for c, name in enumerate("xyz"):
        out[f"mom_{name}_edge"] = state.mom[c]
        out[f"B_{name}_face"] = state.B[c]
    return out


def _vtk_scalars(fh, name: str, arr: np.ndarray) -> None:
    fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
    flat = np.asarray(arr, dtype=float).transpose(2, 1, 0).ravel()  # x fastest
    for i in range(0, flat.size, 6):
        fh.write(" ".join(FLOAT_FMT.format(v) for v in flat[i:i + 6]) + "\n")


def write_vtk(state: MhdState, path: str | Path) -> Path:
    """Legacy ASCII STRUCTURED_POINTS file; the cells are the primal cells."""
    g = state.grid
    path = Path(path)
    nx, ny, nz = g.shape
    with path.open("w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"femhd {__version__} t={FLOAT_FMT.format(state.t)}\nASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx + 1} {ny + 1} {nz + 1}\n")
        fh.write("ORIGIN " + " ".join(FLOAT_FMT.format(o) for o in g.origin) + "\n")
        fh.write("SPACING " + " ".join(FLOAT_FMT.format(h) for h in g.spacing) + "\n")
        fh.write(f"CELL_DATA {nx * ny * nz}\n")
        for name, arr in {**cell_quantities(state), **raw_dofs(state)}.items():
            _vtk_scalars(fh, name, arr)
    return path


def node_profiles(state: MhdState) -> dict[str, np.ndarray]:
    un = state.node_velocity()
    bn = state.node_field()
    return {"rho": state.rho, "ux": un[0], "uy": un[1], "uz": un[2], "p": state.p,
            "Bx": bn[0], "By": bn[1], "Bz": bn[2]}


def axis_cut(state: MhdState, axis: int = 0, at: tuple[int, int] | None = None):
    """Node values along a grid line parallel to ``axis``.

    ``at`` gives the indices on the two other axes (default: middle).
    """
    g = state.grid
    others = [a for a in range(3) if a != axis]
    if at is None:
        at = tuple(g.shape[a] // 2 for a in others)
    index: list = [0, 0, 0]
    index[axis] = slice(None)
    for a, i in zip(others, at):
        index[a] = i
    coords = g.axis_coords(axis, "N")
    prof = {k: v[tuple(index)] for k, v in node_profiles(state).items()}
    return coords, prof


def _bilinear(g, arr2d: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of node data in the x-y plane (clamped or periodic)."""
    hx, hy = g.spacing[0], g.spacing[1]
    fx = (x - g.origin[0]) / hx
    fy = (y - g.origin[1]) / hy
    i0 = np.floor(fx).astype(int)
    j0 = np.floor(fy).astype(int)
    tx = fx - i0
    ty = fy - j0
    nx, ny = arr2d.shape

    def wrap(i, n, periodic):
        return np.mod(i, n) if periodic else np.clip(i, 0, n - 1)

    px, py = g.is_periodic(0), g.is_periodic(1)
    i1, j1 = wrap(i0 + 1, nx, px), wrap(j0 + 1, ny, py)
    i0, j0 = wrap(i0, nx, px), wrap(j0, ny, py)
    return ((1 - tx) * (1 - ty) * arr2d[i0, j0] + tx * (1 - ty) * arr2d[i1, j0]
            + (1 - tx) * ty * arr2d[i0, j1] + tx * ty * arr2d[i1, j1])


def angle_cut(state: MhdState, alpha: float, center=(0.0, 0.0), samples: int | None = None):
    """Samples along the line through ``center`` with y/x = tan(alpha), clipped to the domain."""
    g = state.grid
    lo = np.array(g.origin[:2])
    hi = lo + np.array(g.lengths[:2]) - np.array(g.spacing[:2])
    d = np.array([np.cos(alpha), np.sin(alpha)])
    c = np.asarray(center, dtype=float)
    tmin, tmax = -np.inf, np.inf
    for k in range(2):
        if abs(d[k]) > 1e-15:
            t1, t2 = (lo[k] - c[k]) / d[k], (hi[k] - c[k]) / d[k]
            tmin, tmax = max(tmin, min(t1, t2)), min(tmax, max(t1, t2))
    n = samples or max(g.shape[0], g.shape[1])
    s = np.linspace(tmin, tmax, n)
    x = c[0] + s * d[0]
    y = c[1] + s * d[1]
    prof = {k: _bilinear(g, v[:, :, 0], x, y) for k, v in node_profiles(state).items()}
    return s, x, y, prof


def write_csv_cut(path: str | Path, columns: dict[str, np.ndarray]) -> Path:
    path = Path(path)
    keys = list(columns)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for row in zip(*(np.asarray(columns[k]).ravel() for k in keys)):
            w.writerow([FLOAT_FMT.format(float(v)) for v in row])
    return path


def write_fields(state: MhdState, path: str | Path, fmt: str = "vtk_structured", **kw) -> list[Path]:
    """Write the state either as a VTK file or as line cuts.

    For ``csv_cut`` pass ``axis`` for a grid-line cut or ``alpha`` (radians)
    for a cut along y/x = tan(alpha).
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path.parent}: {exc}") from exc
    if fmt == "vtk_structured":
        return [write_vtk(state, path)]
    if fmt == "csv_cut":
        if "alpha" in kw:
            s, x, y, prof = angle_cut(state, kw["alpha"], kw.get("center", (0.0, 0.0)))
            return [write_csv_cut(path, {"s": s, "x": x, "y": y, **prof})]
        axis = kw.get("axis", 0)
        coords, prof = axis_cut(state, axis, kw.get("at"))
        name = "xyz"[axis]
        if kw.get("compact", False) or state.grid.shape[1] == 1:
            cols = {name: coords, **{k: prof[k] for k in ("rho", "ux", "uy", "p", "By")}}
        else:
            cols = {name: coords, **prof}
        return [write_csv_cut(path, cols)]
    raise ValueError(f"unknown field format {fmt!r}")


def write_diagnostics(series: list[DiagnosticsRecord], path: str | Path) -> Path:
    if not series:
        raise ValueError("empty diagnostics series")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIAG_COLUMNS)
        for rec in series:
            row = []
            for col in DIAG_COLUMNS:
                v = getattr(rec, col)
                if v is None:
                    row.append("")
                elif isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                    row.append(str(int(v)))
                else:
                    row.append(FLOAT_FMT.format(float(v)))
            w.writerow(row)
    return path


def read_diagnostics(path: str | Path) -> dict[str, np.ndarray]:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) if r[k] != "" else np.nan for r in rows]) for k in rows[0]}


# -------------------------------------------------------------------- verbs
def execute_run(rc: RunConfig) -> dict:
    spec = get_case(rc.case)
    spec.params = rc.params
    g = spec.grid(rc.nx, rc.ny, rc.nz)
    state = init_case(spec, g, closure=rc.closure)
    out = output_dir(rc)
    write_config_file(rc.flat(), out / "config.txt", header=f"femhd {__version__}\nresolved configuration")
    (out / "VERSION").write_text(__version__ + "\n")
    counter = {"n": 0}

    def on_step(s, rec):
        counter["n"] += 1
        if rc.cadence > 0 and counter["n"] % rc.cadence == 0:
            write_fields(s, out / f"fields_{counter['n']:06d}.vtk")

    write_fields(state, out / "fields_initial.vtk")
    res = run_simulation(state, rc.solver, on_step=on_step)
    write_diagnostics(res.records, out / "diagnostics.csv")
    final = res.state
    write_fields(final, out / "fields_final.vtk")
    if g.shape[1] == 1 and g.shape[2] == 1:
        write_fields(final, out / "cut_x.csv", "csv_cut", axis=0)
    elif g.shape[2] == 1:
        write_fields(final, out / "cut_x.csv", "csv_cut", axis=0)
        write_fields(final, out / "cut_y.csv", "csv_cut", axis=1)
        if rc.case == "rotor":
            write_fields(final, out / "cut_alpha_pi_4.csv", "csv_cut", alpha=np.pi / 4)
            write_fields(final, out / "cut_alpha_m_pi_16.csv", "csv_cut", alpha=-np.pi / 16)
    else:
        write_fields(final, out / "cut_x.csv", "csv_cut", axis=0)
    summary = {"steps": res.steps, "t": final.t, "wall": res.wall, "out": str(out)}
    if rc.case.startswith("alfven"):
        bg = spec.extra.get("background", True)
        errs = alfven_errors(final, spec.extra.get("alpha", 1.0), bg)
        rows = {k: v["L2"] for k, v in errs.items()}
        summary["alfven_L2"] = rows
    return summary


def convergence_report(levels, case: str = "alfven", op_cross: bool | None = None,
                       gaussian_b: bool = True, overrides: dict | None = None) -> list[dict]:
    """Alfven-wave error sweep; B errors optionally in Gaussian units (x sqrt(4 pi))."""
    spec = get_case(case)
    rows = []
    prev = None
    for n in levels:
        cfg = dict(spec.overrides)
        cfg["t_end"] = spec.t_end
        if op_cross is not None:
            cfg["op_cross"] = op_cross
        cfg.update(overrides or {})
        g = spec.grid(n, n)
        res = run_simulation(init_case(spec, g), SolverConfig(**cfg))
        errs = alfven_errors(res.state, spec.extra.get("alpha", 1.0), spec.extra.get("background", True))
        if gaussian_b:
            for k in ("B_x", "B_y"):
                errs[k] = {nm: v * SQ4PI for nm, v in errs[k].items()}
        row = {"n": n, "errors": errs, "orders": None}
        if prev is not None:
            ratio = n / prev["n"]
            row["orders"] = {k: {nm: float(np.log(prev["errors"][k][nm] / errs[k][nm]) / np.log(ratio))
                                 for nm in errs[k]} for k in errs}
        rows.append(row)
        prev = row
    return rows


def format_convergence(rows: list[dict]) -> str:
    lines = [f"{'var':<5} {'N':>6} {'L1':>11} {'L2':>11} {'Linf':>11} {'oL1':>6} {'oL2':>6} {'oLinf':>6}"]
    for var in rows[0]["errors"]:
        for row in rows:
            e = row["errors"][var]
            o = row["orders"][var] if row["orders"] else None
            ords = " ".join(f"{o[k]:6.2f}" for k in ("L1", "L2", "Linf")) if o else "   ---    ---    ---"
            lines.append(f"{var:<5} {row['n']:>4}^2 {e['L1']:11.3e} {e['L2']:11.3e} {e['Linf']:11.3e} {ords}")
    return "\n".join(lines)


def selftest(verbose: bool = True) -> bool:
    """Fast structural checks of the discrete complex and one conservative step."""
    from .mesh import build_grid
    from .physics import make_state
    from .driver import advance_step

    rng = np.random.default_rng(1)
    results = []
    g = build_grid(5, 4, 3, lengths=(1.0, 1.3, 0.7))
    p = rng.standard_normal(g.shape)
    u = rng.standard_normal((3,) + g.shape)
    b = rng.standard_normal((3,) + g.shape)
    results.append(("curl grad = 0", np.abs(ops.apply_curl(g, ops.apply_grad(g, p))).max() < 1e-10))
    results.append(("div curl = 0", np.abs(ops.apply_div(g, ops.apply_curl(g, u))).max() < 1e-10))
    lhs = np.sum(ops.apply_curl(g, u) * b)
    rhs = np.sum(u * ops.curl_t(g, b))
    results.append(("curl transpose", abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))))
    cr = ops.CrossOperator(g, b, True)
    results.append(("cross orthogonality", abs(np.sum(cr.apply(u) * ops.p1_face(g, b))) < 1e-10))
    g2 = build_grid(16, 16, lengths=(1.0, 1.0, 1.0))
    rho = 1.0 + 0.1 * rng.random(g2.shape)
    st = make_state(g2, Params(), rho, 0.1 * rng.standard_normal((3,) + g2.shape), 1.0,
                    ops.apply_curl(g2, 0.1 * rng.standard_normal((3,) + g2.shape)) + 0.5)
    t0 = st.totals()
    s1, _ = advance_step(st, SolverConfig(theta_b=0.5, theta_p=0.5), 1e-3)
    t1 = s1.totals()
    ok = all(abs(t1[k] - t0[k]) <= 1e-12 * max(1.0, abs(t0[k])) for k in ("mass", "mom_x", "mom_y", "E_total"))
    results.append(("one-step conservation", ok))
    results.append(("div B preserved", np.abs(ops.apply_div(g2, s1.B)).max() < 1e-10))
    if verbose:
        for name, passed in results:
            print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return all(p for _, p in results)


# ---------------------------------------------------------------------- CLI
def _add_config_flags(p: argparse.ArgumentParser) -> None:
    for key in all_keys():
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="VALUE")


def _cli_values(ns: argparse.Namespace) -> dict:
    out = {}
    for key in all_keys():
        v = getattr(ns, key, None)
        if v is not None:
            out[key] = parse_value(key, v)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="femhd", description="Semi-implicit hybrid FV/FE MHD solver")
    parser.add_argument("--version", action="version", version=f"femhd {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="run one case")
    run.add_argument("--config", help="flat key = value configuration file")
    _add_config_flags(run)
    conv = sub.add_parser("convergence", help="Alfven-wave refinement study")
    conv.add_argument("--levels", type=int, nargs="+", default=[20, 40, 80])
    conv.add_argument("--case", default="alfven")
    conv.add_argument("--default-cross", action="store_true", help="use the plain face-to-node cross product")
    conv.add_argument("--internal-b", action="store_true", help="report B errors in internal units")
    sub.add_parser("selftest", help="quick structural checks")
    sub.add_parser("cases", help="list available cases")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            file_vals = read_config_file(args.config) if args.config else {}
            rc = resolve_config(file_vals, _cli_values(args))
            summary = execute_run(rc)
            for k, v in summary.items():
                print(f"{k}: {v}")
            return 0
        if args.verb == "convergence":
            rows = convergence_report(args.levels, args.case, op_cross=not args.default_cross,
                                      gaussian_b=not args.internal_b)
            print(format_convergence(rows))
            return 0
        if args.verb == "selftest":
            return 0 if selftest() else 1
        if args.verb == "cases":
            for name, spec in CASES.items():
                print(f"{name:<12} t_end={spec.t_end:g} grid={spec.resolution}")
            return 0
    except (ConfigurationError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
