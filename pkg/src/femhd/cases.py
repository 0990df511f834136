"""Initial conditions and analytic references for the benchmark battery."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import operators as ops
from .mesh import EDGE, FACE, NODE, PERIODIC, TRANSMISSIVE, Grid, build_grid
from .physics import MhdState, Params, make_state

SQ4PI = np.sqrt(4.0 * np.pi)
GAMMA = 5.0 / 3.0


@dataclass
class CaseSpec:
    name: str
    lengths: tuple
    origin: tuple
    bc: tuple
    resolution: tuple  # default cell counts
    params: Params
    t_end: float
    overrides: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    init: Callable | None = None

    def grid(self, nx=None, ny=None, nz=None) -> Grid:
        n = list(self.resolution)
        for i, v in enumerate((nx, ny, nz)):
            if v is not None:
                n[i] = int(v)
        origin = self.origin
        if self.name.startswith("rp"):
            # put the interface midway between two nodes (on a dual face)
            h = self.lengths[0] / n[0]
            origin = (origin[0] + 0.5 * h,) + tuple(origin[1:])
        return build_grid(n[0], n[1], n[2], self.lengths, self.bc, origin)


# ------------------------------------------------------------- Riemann data
# Columns: rho, ux, uy, uz, p, Bx, By, Bz; field entries are Gaussian-unit
# values and are divided by sqrt(4 pi) to obtain the internal field.
RIEMANN = {
    "rp0": dict(L=(1.0, 0, 0, 0, 1e3, 100.0, 0.0, 100.0),
                R=(0.125, 0, 0, 0, 1e3, 100.0, 0.0, 100.0), t_end=1e3, x_d=0.0),
    "rp1": dict(L=(1.0, 0, 0, 0, 1.0, 0.75 * SQ4PI, SQ4PI, 0.0),
                R=(0.125, 0, 0, 0, 0.1, 0.75 * SQ4PI, -SQ4PI, 0.0), t_end=0.1, x_d=0.0),
    "rp2": dict(L=(1.08, 1.2, 0.01, 0.5, 0.95, 2.0, 3.6, 2.0),
                R=(0.9891, -0.0131, 0.0269, 0.010037, 0.97159, 2.0, 4.0244, 2.0026),
                t_end=0.2, x_d=-0.1),
    "rp3": dict(L=(1.7, 0, 0, 0, 1.7, 3.899398, 3.544908, 0.0),
                R=(0.2, 0, 0, -1.496891, 0.2, 3.899398, 2.785898, 2.192064), t_end=0.04, x_d=0.0),
    "rp4": dict(L=(1.0, 0, 0, 0, 1.0, 1.3 * SQ4PI, SQ4PI, 0.0),
                R=(0.4, 0, 0, 0, 0.4, 1.3 * SQ4PI, -SQ4PI, 0.0), t_end=0.16, x_d=0.0),
    "rp5": dict(L=(1.0, 0, 0, 0, SQ4PI, SQ4PI, SQ4PI, 0.0),
                R=(0.2, 0, 0, 0, 0.2, SQ4PI, SQ4PI * np.cos(3.0), SQ4PI * np.sin(3.0)),
                t_end=0.03, x_d=0.0),
}


def riemann_state(name: str):
    d = RIEMANN[name]
    L = np.array(d["L"], dtype=float)
    R = np.array(d["R"], dtype=float)
    L[5:] /= SQ4PI
    R[5:] /= SQ4PI
    return L, R, d["x_d"]


def _init_riemann(spec: CaseSpec, g: Grid, closure: str) -> MhdState:
    L, R, x_d = riemann_state(spec.name)

    def pick(ptype, col):
        x = g.mesh(ptype)[0]
        return np.where(x <= x_d, L[col], R[col])

    rho = pick(NODE, 0)
    p = pick(NODE, 4)
    u = np.stack([pick(EDGE[c], 1 + c) for c in range(3)])
    B = np.stack([pick(FACE[c], 5 + c) for c in range(3)])
    return make_state(g, spec.params, rho, u, p, B, closure)


# ----------------------------------------------------------- potential helper
def field_from_potential(g: Grid, a_fn, uniform=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Face field ``C A + B0`` with ``A`` sampled at edge midpoints."""
    A = np.stack([a_fn(c, *g.coords(EDGE[c])) * np.ones(g.shape) for c in range(3)])
    B = ops.apply_curl(g, A)
    for c in range(3):
        B[c] += uniform[c]
    return B


def sample_edges(g: Grid, fn) -> np.ndarray:
    """Edge field whose component ``c`` is ``fn(c, x, y, z)`` at the edge midpoints."""
    return np.stack([fn(c, *g.coords(EDGE[c])) * np.ones(g.shape) for c in range(3)])


# --------------------------------------------------------------- Alfven wave
ALFVEN_N = np.array([1.0, 2.0, 0.0]) / np.sqrt(5.0)


def alfven_phase(x, y, t):
    nx, ny, _ = ALFVEN_N
    return 2.0 * np.pi / ny * (nx * (x - nx * t) + ny * (y - ny * t))


def analytic_alfven(x, y, t, alpha: float = 1.0, background: bool = True):
    """Exact primitives of the circularly polarized Alfven wave."""
    nx, ny, _ = ALFVEN_N
    phi = alfven_phase(x, y, t)
    c, s = np.cos(phi), np.sin(phi)
    v = (-alpha * ny * c, alpha * nx * c, alpha * s)
    bg = 1.0 if background else 0.0
    B = (bg * nx + ny * alpha * c, bg * ny - nx * alpha * c, -alpha * s)
    return {"rho": 1.0 + 0 * phi, "v": v, "p": 100.0 + 0 * phi, "B": B}


def _alfven_potential(alpha):
    """A with curl A equal to the wave's transverse field, A = alpha/k (-cos e1 + sin z)."""
    nx, ny, _ = ALFVEN_N
    kap = 2.0 * np.pi / ny
    e1 = (ny, -nx, 0.0)

    def a_fn(c, x, y, z):
        phi = alfven_phase(x, y, 0.0)
        if c == 2:
            return alpha / kap * np.sin(phi)
        return -alpha / kap * np.cos(phi) * e1[c]
    return a_fn


def _init_alfven(spec: CaseSpec, g: Grid, closure: str) -> MhdState:
    alpha = spec.extra.get("alpha", 1.0)
    background = spec.extra.get("background", True)
    B = field_from_potential(g, _alfven_potential(alpha),
                             tuple(ALFVEN_N) if background else (0.0, 0.0, 0.0))

    def vel(c, x, y, z):
        return analytic_alfven(x, y, 0.0, alpha, background)["v"][c]
    u = sample_edges(g, vel)
    return make_state(g, spec.params, 1.0, u, 100.0, B, closure)


# --------------------------------------------------------------- vortex
def _init_vortex(spec: CaseSpec, g: Grid, closure: str) -> MhdState:
    v0 = spec.extra.get("v0", 1.0)
    a0 = spec.extra.get("A0", 1.0)
    p0 = spec.extra.get("p0", 1.0)
    av = v0 / (2.0 * np.pi)
    ab = a0 / (2.0 * np.pi) / SQ4PI  # Gaussian amplitude -> internal

    def a_fn(c, x, y, z):
        if c != 2:
            return 0.0 * x
        return ab * np.exp(0.5 * (1.0 - x * x - y * y))

    B = field_from_potential(g, a_fn)

    def vel(c, x, y, z):
        f = av * np.exp(0.5 * (1.0 - x * x - y * y))
        return (-y * f, x * f, 0.0 * x * y)[c]

    u = sample_edges(g, vel)
    x, y, _ = g.mesh(NODE)
    r2 = x * x + y * y
    e = np.exp(1.0 - r2)
    p = p0 + 0.5 * ab * ab * (1.0 - r2) * e - 0.5 * av * av * e
    return make_state(g, spec.params, 1.0, u, p, B, closure)


# ------------------------------------------------------------ Orszag-Tang
def _init_ot_ideal(spec: CaseSpec, g: Grid, closure: str) -> MhdState:
    gam = spec.params.gamma
    B = field_from_potential(
        g, lambda c, x, y, z: (np.cos(y) + 0.5 * np.cos(2 * x)) if c == 2 else 0.0 * x)
    u = sample_edges(g, lambda c, x, y, z: (-np.sin(y), np.sin(x), 0.0 * x)[c])
    return make_state(g, spec.params, gam * gam, u, gam, B, closure)


def _init_ot_vr(spec: CaseSpec, g: Grid, closure: str) -> MhdState:
    B = field_from_potential(
        g, lambda c, x, y, z: ((np.cos(y) + 0.5 * np.cos(2 * x)) / SQ4PI) if c == 2 else 0.0 * x)
    u = sample_edges(g, lambda c, x, y, z: (-np.sin(y), np.sin(x), 0.0 * x)[c])
    x, y, _ = g.mesh(NODE)
    p = (15.0 / 4.0 + 0.25 * np.cos(4 * x) + 0.8 * np.cos(2 * x) * np.cos(y)
         - np.cos(x) * np.cos(y) + 0.25 * np.cos(2 * y))
    return make_state(g, spec.params, 1.0, u, p, B, closure)


def _init_ot3d(spec: CaseSpec, g: Grid, closure: str) -> MhdState:
    tp = 2.0 * np.pi

    def a_fn(c, x, y, z):
        if c == 0:
            return np.cos(2 * tp * y) / (2 * tp)
        if c == 1:
            return -np.cos(tp * z) / tp
        return np.cos(2 * tp * x) / (2 * tp)

    B = field_from_potential(g, a_fn)
    u = sample_edges(g, lambda c, x, y, z: (-np.sin(tp * z), np.sin(tp * x), np.sin(tp * y))[c])
    return make_state(g, spec.params, 25.0 / (36.0 * np.pi), u, 5.0 / (12.0 * np.pi), B, closure)


# -------------------------------------------------------------------- rotor
def _rotor_profile(r, R, taper=0.05):
    """1 inside, 0 outside, linear in r over [R, (1+taper) R]."""
    return np.clip(((1.0 + taper) * R - r) / (taper * R), 0.0, 1.0)


def _init_rotor(spec: CaseSpec, g: Grid, closure: str) -> MhdState:
    R = spec.extra.get("R", 0.1)
    omega = spec.extra.get("omega", 10.0)
    x, y, _ = g.mesh(NODE)
    f = _rotor_profile(np.hypot(x, y), R)
    rho = 1.0 + 9.0 * f

    def vel(c, x, y, z):
        w = _rotor_profile(np.hypot(x, y), R)
        return (-omega * y * w, omega * x * w, 0.0 * x * y)[c]

    u = sample_edges(g, vel)
    B = np.zeros((3,) + g.shape)
    B[0] = 2.5
    return make_state(g, spec.params, rho, u, 1.0, B, closure)


# ----------------------------------------------------------- registry
def _rp_spec(name):
    d = RIEMANN[name]
    overrides = {"cfl": 0.9, "dt_kind": "v"}
    if name == "rp4":
        overrides["c_eta"] = 0.01
    return CaseSpec(name, (1.0, 1.0, 1.0), (-0.5, 0.0, 0.0),
                    (TRANSMISSIVE, PERIODIC, PERIODIC), (1000, 1, 1), Params(gamma=GAMMA),
                    d["t_end"], overrides, {}, _init_riemann)


def _build_registry():
    reg = {name: _rp_spec(name) for name in RIEMANN}
    reg["rp0"].resolution = (100, 1, 1)
    alf_over = {"cfl": 0.5, "dt_kind": "b", "reconstruction": "muscl_central",
                "theta_p": 0.5, "theta_b": 0.5}
    reg["alfven"] = CaseSpec("alfven", (2.0, 1.0, 1.0), (0.0, 0.0, 0.0), (PERIODIC,) * 3,
                             (40, 40, 1), Params(gamma=GAMMA), np.sqrt(5.0) / 2.0,
                             alf_over, {"alpha": 1.0, "background": True}, _init_alfven)
    reg["alfven_nobg"] = CaseSpec("alfven_nobg", (2.0, 1.0, 1.0), (0.0, 0.0, 0.0),
                                  (PERIODIC,) * 3, (40, 40, 1), Params(gamma=GAMMA),
                                  np.sqrt(5.0) / 2.0,
                                  dict(alf_over, picard_tol=1e-14, op_cross=True),
                                  {"alpha": 1.0, "background": False}, _init_alfven)
    reg["iso_vortex"] = CaseSpec("iso_vortex", (10.0, 10.0, 1.0), (-5.0, -5.0, 0.0),
                                 (PERIODIC,) * 3, (64, 64, 1), Params(gamma=GAMMA), 10.0,
                                 {"cfl": 0.9, "dt_kind": "v", "theta_p": 0.5, "theta_b": 0.5},
                                 {"v0": 1.0, "A0": 1.0, "p0": 1.0}, _init_vortex)
    reg["ot_ideal"] = CaseSpec("ot_ideal", (2 * np.pi, 2 * np.pi, 1.0), (0.0, 0.0, 0.0),
                               (PERIODIC,) * 3, (128, 128, 1), Params(gamma=GAMMA), 2.0,
                               {"cfl": 0.9, "dt_kind": "v"}, {}, _init_ot_ideal)
    reg["ot_vr"] = CaseSpec("ot_vr", (2 * np.pi, 2 * np.pi, 1.0), (0.0, 0.0, 0.0),
                            (PERIODIC,) * 3, (128, 128, 1),
                            Params.from_prandtl(GAMMA, 1.0, 1e-2, 1.0, eta=1e-2), 2.0,
                            {"cfl": 0.9, "dt_kind": "v", "theta_p": 0.55, "theta_b": 0.55,
                             "theta_r": 0.55}, {}, _init_ot_vr)
    reg["ot3d_vr"] = CaseSpec("ot3d_vr", (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), (PERIODIC,) * 3,
                              (32, 32, 32), Params.from_prandtl(GAMMA, 1.0, 6e-6, 0.72, eta=1e-3),
                              0.5, {"cfl": 0.9, "dt_kind": "v", "theta_p": 0.65,
                                    "theta_b": 0.65, "theta_r": 0.65}, {}, _init_ot3d)
    reg["rotor"] = CaseSpec("rotor", (1.0, 1.0, 1.0), (-0.5, -0.5, 0.0),
                            (TRANSMISSIVE, TRANSMISSIVE, PERIODIC), (200, 200, 1),
                            Params(gamma=1.4), 0.25,
                            {"cfl": 0.25, "dt_kind": "v", "theta_p": 0.6, "theta_b": 0.5,
                             "picard_tol": 1e-14},
                            {"R": 0.1, "omega": 10.0}, _init_rotor)
    return reg


CASES = _build_registry()


def get_case(name: str) -> CaseSpec:
    if name not in CASES:
        raise KeyError(f"unknown case {name!r}; available: {', '.join(sorted(CASES))}")
    spec = CASES[name]
    return CaseSpec(spec.name, spec.lengths, spec.origin, spec.bc, spec.resolution, spec.params,
                    spec.t_end, dict(spec.overrides), dict(spec.extra), spec.init)


def init_case(spec: CaseSpec | str, grid: Grid | None = None, closure: str = "total") -> MhdState:
    if isinstance(spec, str):
        spec = get_case(spec)
    g = spec.grid() if grid is None else grid
    return spec.init(spec, g, closure)


# --------------------------------------------------------------- error norms
def error_norms(g: Grid, numeric: np.ndarray, reference: np.ndarray) -> dict:
    e = np.abs(np.asarray(numeric) - np.asarray(reference))
    return {
        "L1": float(np.sum(e) * g.vol),
        "L2": float(np.sqrt(np.sum(e * e) * g.vol)),
        "Linf": float(np.max(e)) if e.size else 0.0,
    }


def alfven_errors(state: MhdState, alpha: float = 1.0, background: bool = True) -> dict:
    """Norms of v_x, v_y (edge values) and B_x, B_y (face values) against the exact wave."""
    g = state.grid
    u = state.u
    out = {}
    for name, arr, ptype, key, c in (
        ("v_x", u[0], EDGE[0], "v", 0), ("v_y", u[1], EDGE[1], "v", 1),
        ("B_x", state.B[0], FACE[0], "B", 0), ("B_y", state.B[1], FACE[1], "B", 1),
    ):
        x, y, _ = g.mesh(ptype)
        ref = analytic_alfven(x, y, state.t, alpha, background)[key][c]
        out[name] = error_norms(g, arr, ref)
    return out
