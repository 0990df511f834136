"""Implicit Alfvenic sub-system.

Velocity is solved from the SPD system

    (M1^rho + theta^2 dt^2 P^T C^T M2 C P) u^{n+1}
        = M1^rho u^n - dt P^T C^T M2 B^n - theta (1-theta) dt^2 P^T C^T M2 C P u^n
          - dt M1 G p^{lag}

where ``P`` is the cross-product map for the frozen field
``(1-theta) B^n + theta B^{n+1,s}``.  The face field is then advanced in strong
form, ``B^{n+1} = B^n + dt C P u^{n+theta}``, which keeps ``D B`` unchanged.
Momentum and energy are finally advanced in flux form (Maxwell stress and
Poynting flux), replacing the non-conservative finite-element momentum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .fv import conservative_corrector, poynting_flux
from .linsolve import CgOptions, ConvergenceError, cg
from .mesh import Grid
from .physics import MhdState


@dataclass(frozen=True)
class PicardPolicy:
    """Either a fixed number ``S_b`` of extra iterations or iterate to ``tol``."""
    S_b: int = 0
    tol: float | None = None
    max_iter: int = 50

    @property
    def tolerance_mode(self) -> bool:
        return self.tol is not None


class AlfvenOperator:
    def __init__(self, grid: Grid, rho_e: np.ndarray, b_frozen: np.ndarray, theta: float,
                 dt: float, op_cross: bool = True):
        self.grid = grid
        self.rho_e = rho_e
        self.theta = theta
        self.dt = dt
        self.cross = ops.CrossOperator(grid, b_frozen, op_cross)

    def curl_part(self, x: np.ndarray) -> np.ndarray:
        """P^T C^T M2 C P x."""
        g = self.grid
        return self.cross.apply_t(ops.curl_t(g, g.vol * ops.apply_curl(g, self.cross.apply(x))))

    def apply(self, x: np.ndarray) -> np.ndarray:
        y = self.grid.vol * self.rho_e * x
        if self.theta != 0.0:
            y = y + (self.theta * self.dt) ** 2 * self.curl_part(x)
        return y


def alfven_rhs(op: AlfvenOperator, u_n: np.ndarray, b_n: np.ndarray,
               p_lag: np.ndarray | None = None) -> np.ndarray:
    """Right-hand side; ``p_lag`` adds the lagged pressure force of the outer recursion."""
    g = op.grid
    rhs = g.vol * op.rho_e * u_n - op.dt * op.cross.apply_t(g.vol * ops.curl_strong(g, b_n))
    if p_lag is not None:
        rhs = rhs - op.dt * g.vol * ops.apply_grad(g, p_lag)
    th = op.theta
    if th not in (0.0, 1.0):
        rhs = rhs - th * (1.0 - th) * op.dt ** 2 * op.curl_part(u_n)
    return rhs


@dataclass
class AlfvenResult:
    state: MhdState
    iterations: list = field(default_factory=list)
    picard: int = 0
    u_fe: np.ndarray | None = None


def solve_alfven_step(state: MhdState, dt: float, theta: float = 1.0,
                      picard: PicardPolicy = PicardPolicy(), op_cross: bool = True,
                      cg_opts: CgOptions = CgOptions(), p_lag: np.ndarray | None = None) -> AlfvenResult:
    """One Alfvenic solve and its conservative completion.

    With ``p_lag`` the velocity feels the pressure gradient of the previous
    outer iterate while B is advanced.  That force is *not* kept in the
    returned momentum and energy: the acoustic step that follows adds the
    implicit pressure contribution in its place.
    """
    g = state.grid
    rho_e = state.rho_edges()
    u_n = state.mom / rho_e
    b_n = state.B
    b_it = b_n
    u_it = u_n
    iters = []
    n_max = picard.max_iter if picard.tolerance_mode else picard.S_b + 1
    converged = False
    for s in range(n_max):
        b_frozen = (1.0 - theta) * b_n + theta * b_it
        op = AlfvenOperator(g, rho_e, b_frozen, theta, dt, op_cross)
        res = cg(op.apply, alfven_rhs(op, u_n, b_n, p_lag), x0=u_it, opts=cg_opts)
        iters.append(res.iterations)
        u_new = res.x
        u_theta = theta * u_new + (1.0 - theta) * u_n
        b_new = b_n + dt * ops.apply_curl(g, op.cross.apply(u_theta))
        if picard.tolerance_mode:
            change = np.linalg.norm(b_new - b_it)
            scale = np.linalg.norm(b_new)
            b_it, u_it = b_new, u_new
            if change <= picard.tol * scale:
                converged = True
                break
        else:
            b_it, u_it = b_new, u_new
    if picard.tolerance_mode and not converged:
        raise ConvergenceError(
            f"Picard iteration did not reach relative B change {picard.tol:g} "
            f"in {picard.max_iter} iterations")
    b_theta = theta * b_it + (1.0 - theta) * b_n
    u_theta = theta * u_it + (1.0 - theta) * u_n
    # the electric field is the very edge field whose curl advanced B, so the
    # energy flux balances the magnetic energy change node by node to first order
    e_field = -op.cross.apply(u_theta)
    flux = poynting_flux(g, ops.interp_edge_to_edge(g, e_field), b_theta)
    new = conservative_corrector(state, dt, energy_flux=flux, stress_field=b_theta)
    new.B = b_it
    new.refresh_pressure()
    return AlfvenResult(new, iters, len(iters), u_it)
