"""Implicit resistive sub-step on the dual complex.

With lumped masses the Hodge star between primal faces and dual edges is the
identity, the dual curl is ``C^T`` and its transpose is ``C``.  The dual field
is solved from

    (I + theta dt C diag(eta_eff) C^T) (Bt^{n+1} - B^n) = - dt C diag(eta_eff) C^T B^n

and the primal field is updated in strong form with the resulting electric
field, so the discrete divergence is untouched.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .fv import conservative_corrector, poynting_flux
from .linsolve import CgOptions, cg
from .mesh import Grid
from .physics import MhdState, lambda_set


def artificial_resistivity(state: MhdState, c_eta: float, kind: str = "v") -> np.ndarray:
    """Per-component artificial resistivity on the edges.

    ``eta^i = c_eta * max(lam^j dx_j, lam^k dx_k) / 2`` over the axes j, k
    transverse to i; collapsed axes do not contribute.
    """
    g = state.grid
    out = np.zeros((3,) + g.shape)
    if c_eta == 0.0:
        return out
    un = state.node_velocity()
    bn = state.node_field()
    lam_h = {}
    for a in g.active_axes:
        lam = lambda_set(kind, state.rho, un[a], state.p, bn, a, state.params.gamma)
        lam_h[a] = lam * g.spacing[a]
    for i in range(3):
        cand = [lam_h[a] for a in ((i + 1) % 3, (i + 2) % 3) if a in lam_h]
        if not cand:
            continue
        node_val = 0.5 * c_eta * (np.maximum(*cand) if len(cand) == 2 else cand[0])
        # maximum of the two nodes bounding the edge
        out[i] = np.maximum(node_val, g.sp(node_val, i)) if g.shape[i] > 1 else node_val
    return out


@dataclass
class ResistiveOperator:
    grid: Grid
    theta: float
    dt: float
    eta_eff: np.ndarray  # per-component weights on edges

    def curl_part(self, x):
        g = self.grid
        return ops.apply_curl(g, self.eta_eff * ops.curl_t(g, x))

    def apply(self, x):
        return self.grid.vol * (x + self.theta * self.dt * self.curl_part(x))


@dataclass
class ResistiveResult:
    state: MhdState
    iterations: int


def resistive_half_step(state: MhdState, dt: float, theta: float = 1.0, c_eta: float = 0.0,
                        kind: str = "v", cg_opts: CgOptions = CgOptions()) -> ResistiveResult:
    """Advance the resistive sub-system by ``dt`` (the caller passes half a step)."""
    eta = state.params.eta
    if eta == 0.0 and c_eta == 0.0:
        return ResistiveResult(state, 0)
    g = state.grid
    eta_eff = eta + artificial_resistivity(state, c_eta, kind)
    op = ResistiveOperator(g, theta, dt, eta_eff)
    b_n = state.B
    # solve for the increment so that the explicit part uses the dual curl,
    # which vanishes for a uniform field also next to transmissive boundaries
    rhs = -dt * g.vol * ops.apply_curl(g, eta_eff * ops.curl_strong(g, b_n))
    res = cg(op.apply, rhs, opts=cg_opts)
    b_theta = b_n + theta * res.x
    e_field = eta_eff * ops.curl_strong(g, b_theta)  # E = eta J on the edges
    b_new = b_n - dt * ops.apply_curl(g, e_field)
    b_theta = theta * b_new + (1.0 - theta) * b_n
    e_edges = ops.interp_edge_to_edge(g, e_field)
    flux = poynting_flux(g, e_edges, b_theta)
    new = conservative_corrector(state, dt, energy_flux=flux)
    new.B = b_new
    new.refresh_pressure()
    return ResistiveResult(new, res.iterations)
