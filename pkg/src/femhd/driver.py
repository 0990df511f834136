"""Time integration: CFL control, Strang resistive wrap and the split recursion."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from . import operators as ops
from .acoustic import solve_acoustic_step
from .alfven import PicardPolicy, solve_alfven_step
from .fv import FLUXES, RECONSTRUCTIONS, fv_step
from .linsolve import CgOptions
from .mesh import ConfigurationError
from .physics import LAMBDA_KINDS, MhdState, lambda_set
from .resistive import resistive_half_step


@dataclass
class SolverConfig:
    theta_p: float = 1.0
    theta_b: float = 1.0
    theta_r: float = 1.0
    cfl: float = 0.9
    dt_kind: str = "v"
    R: int = 1
    S_p: int = 1
    S_b: int = 0
    picard_tol: float | None = None
    picard_max: int = 50
    flux: str = "rusanov"
    reconstruction: str = "muscl"
    s_kind: str = "v"
    c_h: float = 0.0
    c_eta: float = 0.0
    eta_kind: str = "v"
    op_cross: bool = True
    t_end: float = 1.0
    dt_fixed: float | None = None
    dt_growth: float | None = 1.1
    first_step_kind: str | None = "MHD"
    cg_rel_tol: float = 1e-12
    cg_max_iter: int = 10_000
    helicity_every: int = 0
    max_steps: int | None = None

    def __post_init__(self):
        for name in ("theta_p", "theta_b", "theta_r"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigurationError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dt_kind not in LAMBDA_KINDS or self.s_kind not in LAMBDA_KINDS:
            raise ConfigurationError("dt_kind and s_kind must be one of v, p, b, MHD")
        if self.first_step_kind is not None and self.first_step_kind not in LAMBDA_KINDS:
            raise ConfigurationError(f"unknown first_step_kind {self.first_step_kind!r}")
        if self.R < 1 or self.S_p < 1 or self.S_b < 0:
            raise ConfigurationError("need R >= 1, S_p >= 1, S_b >= 0")
        if self.flux not in FLUXES:
            raise ConfigurationError(f"unknown flux {self.flux!r}")
        if self.reconstruction not in RECONSTRUCTIONS:
            raise ConfigurationError(f"unknown reconstruction {self.reconstruction!r}")
        if self.c_h < 0 or self.c_eta < 0:
            raise ConfigurationError("stabilization coefficients must be non-negative")
        if self.t_end < 0:
            raise ConfigurationError("t_end must be non-negative")

    @property
    def cg_options(self) -> CgOptions:
        return CgOptions(rel_tol=self.cg_rel_tol, max_iter=self.cg_max_iter)

    @property
    def picard(self) -> PicardPolicy:
        return PicardPolicy(S_b=self.S_b, tol=self.picard_tol, max_iter=self.picard_max)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class DiagnosticsRecord:
    t: float
    dt: float
    eff_courant: float
    mass: float
    mom_x: float
    mom_y: float
    mom_z: float
    E_hydro: float
    E_mag: float
    E_total: float
    helicity: float | None
    divB_L2: float
    divB_Linf: float
    cg_iters_b: int
    cg_iters_p: int
    cg_iters_eta: int
    picard_r: int


DIAG_COLUMNS = [f.name for f in fields(DiagnosticsRecord)]


# ---------------------------------------------------------------- time step
def cfl_denominator(state: MhdState, kind: str) -> float:
    g = state.grid
    par = state.params
    un = state.node_velocity()
    bn = state.node_field() if kind in ("b", "MHD") else None
    den = 0.0
    for a in g.active_axes:
        lam = lambda_set(kind, state.rho, un[a], state.p, bn, a, par.gamma)
        den += float(np.max(lam)) / g.spacing[a]
    if par.mu > 0.0 or par.kappa > 0.0:
        lam_p = float(np.max(4.0 / 3.0 * par.mu / state.rho + par.kappa / (par.c_v * state.rho)))
        den += 2.0 * lam_p * sum(1.0 / g.spacing[a] ** 2 for a in g.active_axes)
    return den


def compute_dt(state: MhdState, cfg: SolverConfig, prev_dt: float | None = None) -> float:
    remaining = cfg.t_end - state.t
    if remaining <= 0.0:
        return 0.0
    if cfg.dt_fixed is not None:
        return min(cfg.dt_fixed, remaining)
    den = cfl_denominator(state, cfg.dt_kind)
    if den == 0.0 and prev_dt is None and cfg.first_step_kind is not None:
        den = cfl_denominator(state, cfg.first_step_kind)
        if den > 0.0:
            return min(cfg.cfl / den, remaining)
    if den == 0.0:
        return remaining
    dt = cfg.cfl / den
    if prev_dt is not None and cfg.dt_growth is not None:
        dt = min(dt, cfg.dt_growth * prev_dt)
    return min(dt, remaining)


def effective_courant(state: MhdState, dt: float, cfl: float) -> float:
    return dt * cfl_denominator(state, "MHD") / cfl


# ----------------------------------------------------------------- stepping
def _phase(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # annotate with the phase, keep the type
        try:
            err = type(exc)(f"[{name}] {exc}")
        except Exception:
            raise exc
        if hasattr(exc, "history"):
            err.history = exc.history
        raise err from exc


@dataclass
class StepInfo:
    cg_iters_b: int = 0
    cg_iters_p: int = 0
    cg_iters_eta: int = 0
    picard_r: int = 0
    per_solve_b: list = field(default_factory=list)
    per_solve_p: list = field(default_factory=list)


def advance_step(state: MhdState, cfg: SolverConfig, dt: float) -> tuple[MhdState, StepInfo]:
    info = StepInfo()
    opts = cfg.cg_options
    s = state
    resist = s.params.eta != 0.0 or cfg.c_eta != 0.0
    if resist:
        r = _phase("resistive", resistive_half_step, s, 0.5 * dt, cfg.theta_r, cfg.c_eta,
                   cfg.eta_kind, opts)
        s = r.state
        info.cg_iters_eta += r.iterations
    s_star = _phase("convection", fv_step, s, dt, cfg.flux, cfg.reconstruction, cfg.s_kind)
    # outer recursion: every pass restarts from the convected state; the
    # Alfvenic solve sees the pressure of the previous pass (the convected
    # pressure on the first one)
    p_lag = s_star.p
    for _ in range(cfg.R):
        a = _phase("alfven", solve_alfven_step, s_star, dt, cfg.theta_b, cfg.picard, cfg.op_cross,
                   opts, p_lag)
        info.cg_iters_b += sum(a.iterations)
        info.per_solve_b.extend(a.iterations)
        info.picard_r += a.picard
        ac = _phase("acoustic", solve_acoustic_step, a.state, dt, cfg.theta_p, cfg.S_p, cfg.c_h, opts)
        s = ac.state
        info.cg_iters_p += sum(ac.iterations)
        info.per_solve_p.extend(ac.iterations)
        p_lag = cfg.theta_p * ac.p_solved + (1.0 - cfg.theta_p) * a.state.p
    if resist:
        r = _phase("resistive", resistive_half_step, s, 0.5 * dt, cfg.theta_r, cfg.c_eta,
                   cfg.eta_kind, opts)
        s = r.state
        info.cg_iters_eta += r.iterations
    s.t = state.t + dt
    return s, info


def div_norms(state: MhdState) -> tuple[float, float]:
    db = ops.apply_div(state.grid, state.B)
    return float(np.sqrt(np.sum(db * db) * state.grid.vol)), float(np.max(np.abs(db)))


def make_record(state: MhdState, dt: float, cfg: SolverConfig, info: StepInfo | None,
                helicity: float | None) -> DiagnosticsRecord:
    tot = state.totals()
    l2, linf = div_norms(state)
    info = info or StepInfo()
    return DiagnosticsRecord(
        t=state.t, dt=dt, eff_courant=effective_courant(state, dt, cfg.cfl) if dt > 0 else 0.0,
        mass=tot["mass"], mom_x=tot["mom_x"], mom_y=tot["mom_y"], mom_z=tot["mom_z"],
        E_hydro=tot["E_hydro"], E_mag=tot["E_mag"], E_total=tot["E_total"], helicity=helicity,
        divB_L2=l2, divB_Linf=linf, cg_iters_b=info.cg_iters_b, cg_iters_p=info.cg_iters_p,
        cg_iters_eta=info.cg_iters_eta, picard_r=info.picard_r,
    )


@dataclass
class RunResult:
    state: MhdState
    records: list
    steps: int
    wall: float
    infos: list


def run_simulation(state: MhdState, cfg: SolverConfig,
                   on_step: Callable[[MhdState, DiagnosticsRecord], None] | None = None) -> RunResult:
    """Advance to ``cfg.t_end``; diagnostics are recorded after every step."""
    from .vecpot import helicity_of

    t0 = time.perf_counter()
    want_h = cfg.helicity_every > 0
    records = [make_record(state, 0.0, cfg, None, helicity_of(state.grid, state.B) if want_h else None)]
    infos = []
    prev = None
    steps = 0
    s = state
    while s.t < cfg.t_end * (1.0 - 1e-14) and (cfg.max_steps is None or steps < cfg.max_steps):
        dt = compute_dt(s, cfg, prev)
        if dt <= 0.0:
            break
        s, info = advance_step(s, cfg, dt)
        if cfg.t_end - s.t < 1e-14 * max(1.0, cfg.t_end):
            s.t = cfg.t_end
        steps += 1
        prev = dt
        h = None
        if want_h and steps % cfg.helicity_every == 0:
            h = helicity_of(s.grid, s.B)
        rec = make_record(s, dt, cfg, info, h)
        records.append(rec)
        infos.append(info)
        if on_step is not None:
            on_step(s, rec)
    return RunResult(s, records, steps, time.perf_counter() - t0, infos)
