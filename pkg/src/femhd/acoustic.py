"""Implicit pressure sub-system.

The pressure equation is obtained by inserting the theta-weighted momentum
update ``m^{n+1} = m^n - dt G p^{n+theta}`` into the flux-form energy
balance, giving the symmetric positive definite system

    (M0 + theta^2 dt^2 G^T M1^w G) p^{n+1} = rhs,   w = (gamma-1) h_tilde.

The conserved energy is then advanced with the very same edge flux
``h_tilde m^{n+theta}``, so the pressure recovered from the energy matches the
solved one up to the Picard lag in the kinetic term.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .fv import conservative_corrector
from .linsolve import CgOptions, cg
from .mesh import Grid
from .physics import MhdState


def effective_enthalpy_weights(state: MhdState, theta: float, dt: float, c_h: float = 0.0,
                               p=None) -> np.ndarray:
    """Clamped, stabilized enthalpy on every edge."""
    g = state.grid
    gam = state.params.gamma
    p = state.p if p is None else p
    pe = ops.node_to_edges(g, p)
    re = state.rho_edges()
    h = gam / (gam - 1.0) * pe / re
    ht = np.maximum(h, 0.0)
    if c_h > 0.0 and theta > 0.0:
        ue = state.mom / re
        c2 = gam * np.maximum(pe, 0.0) / re
        s_p = 0.5 * (np.abs(ue) + np.sqrt(ue * ue + 4.0 * c2))
        eps = np.array([c_h * hh / 2.0 for hh in g.spacing]).reshape(3, 1, 1, 1)
        ht = ht + s_p * eps / (theta * dt)
    return ht


@dataclass
class AcousticOperator:
    grid: Grid
    theta: float
    dt: float
    weight: np.ndarray  # (gamma-1) * h_tilde on edges (without the volume)

    def apply(self, x: np.ndarray) -> np.ndarray:
        g = self.grid
        y = g.vol * x
        if self.theta != 0.0:
            y = y + (self.theta * self.dt) ** 2 * g.vol * ops.grad_t(g, self.weight * ops.apply_grad(g, x))
        return y


def acoustic_rhs(state: MhdState, h_tilde: np.ndarray, theta: float, dt: float,
                 ke_iter: np.ndarray) -> np.ndarray:
    g = state.grid
    gm1 = state.params.gamma - 1.0
    w = gm1 * h_tilde
    p = state.p
    rhs = g.vol * (p - gm1 * (ke_iter - state.kinetic_nodes()))
    rhs = rhs - gm1 * dt * g.vol * ops.flux_div(g, h_tilde * state.mom)
    if theta not in (0.0, 1.0):
        rhs = rhs - theta * (1.0 - theta) * dt * dt * g.vol * ops.grad_t(g, w * ops.apply_grad(g, p))
    return rhs


@dataclass
class AcousticResult:
    state: MhdState
    iterations: list
    p_solved: np.ndarray


def solve_acoustic_step(state: MhdState, dt: float, theta: float = 1.0, S_p: int = 1,
                        c_h: float = 0.0, cg_opts: CgOptions = CgOptions()) -> AcousticResult:
    g = state.grid
    gm1 = state.params.gamma - 1.0
    pn = state.p
    mn = state.mom
    p_new = pn.copy()
    m_new = mn.copy()
    iters = []
    for _ in range(S_p + 1):
        p_theta = theta * p_new + (1.0 - theta) * pn
        ht = effective_enthalpy_weights(state, theta, dt, c_h, p=p_theta)
        ke_iter = state.kinetic_nodes(m_new)
        op = AcousticOperator(g, theta, dt, gm1 * ht)
        rhs = acoustic_rhs(state, ht, theta, dt, ke_iter)
        res = cg(op.apply, rhs, x0=p_new, opts=cg_opts)
        iters.append(res.iterations)
        p_new = res.x
        m_new = mn - dt * ops.apply_grad(g, theta * p_new + (1.0 - theta) * pn)
    # energy flux h m^{n+theta} = h m^n - theta dt h G p^{n+theta}; the implicit
    # part is integrated with the same transpose as the pressure matrix
    p_theta = theta * p_new + (1.0 - theta) * pn
    implicit = -theta * dt * dt * ops.grad_t(g, ht * ops.apply_grad(g, p_theta))
    new = conservative_corrector(state, dt, energy_flux=ht * mn, energy_increment=implicit)
    new.mom = m_new
    new.refresh_pressure()
    return AcousticResult(new, iters, p_new)
