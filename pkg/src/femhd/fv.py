"""Explicit finite-volume machinery on the dual (node-centred) grid.

Conserved dual-cell variables are packed as ``Q[0] = rho``, ``Q[1:4] = m``
(nodal momentum), ``Q[4] = rhoE`` (hydrodynamic energy).  The dual face
between nodes ``i`` and ``i+1`` along an axis sits at the edge location of
that axis and shares its index ``i``.
"""
from __future__ import annotations

import numpy as np

from . import operators as ops
from .mesh import EDGE, FACE, NODE, Grid
from .operators import StateError
from .physics import MhdState, lambda_set

RECONSTRUCTIONS = ("muscl", "muscl_central", "feec", "none")
FLUXES = ("rusanov", "upwind")
EPS_OMEGA = 1e-14


# ----------------------------------------------------------------- helpers
def pack(state: MhdState) -> np.ndarray:
    g = state.grid
    mn = ops.edge_to_node(g, state.mom)
    return np.concatenate([state.rho[None], mn, state.hydro_energy()[None]])


def minmod(a, b):
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def physical_flux(q: np.ndarray, axis: int) -> np.ndarray:
    """Convective flux: (m_d, m_d u, u_d |m|^2 / (2 rho))."""
    rho = q[0]
    m = q[1:4]
    ud = m[axis] / rho
    out = np.empty_like(q)
    out[0] = m[axis]
    out[1:4] = ud * m
    out[4] = ud * 0.5 * np.sum(m * m, axis=0) / rho
    return out


def _check_positive(rho, where: str):
    if np.any(~(rho > 0)):
        i = np.unravel_index(np.argmin(np.where(np.isnan(rho), -np.inf, rho)), rho.shape)
        raise StateError(
            f"non-positive density {rho[i]:.6g} at node {tuple(int(v) for v in i)} ({where})")


# ------------------------------------------------------------ reconstruction
def muscl_reconstruct(g: Grid, Q: np.ndarray, dt: float, limited: bool = True):
    """Face states of every node for each active axis.

    Returns a dict ``axis -> (qL, qR)`` where ``qR`` is the node's value at its
    right dual face and ``qL`` at its left dual face, both advanced by half a
    step with the Hancock predictor.
    """
    slopes = {}
    for d in g.active_axes:
        fwd = g.sp(Q, d) - Q
        bwd = Q - g.sm(Q, d)
        slopes[d] = minmod(bwd, fwd) if limited else 0.5 * (fwd + bwd)
    pred = Q.copy()
    for d in g.active_axes:
        fp = physical_flux(Q + 0.5 * slopes[d], d)
        fm = physical_flux(Q - 0.5 * slopes[d], d)
        pred -= 0.5 * dt / g.spacing[d] * (fp - fm)
    return {d: (pred - 0.5 * slopes[d], pred + 0.5 * slopes[d]) for d in g.active_axes}


def feec_reconstruct(g: Grid, Q: np.ndarray):
    """Unlimited one-sided extrapolation with the slope of the element behind the face."""
    out = {}
    for d in g.active_axes:
        qR = Q + 0.5 * (Q - g.sm(Q, d))
        qL = Q - 0.5 * (g.sp(Q, d) - Q)
        out[d] = (qL, qR)
    return out


def constant_reconstruct(g: Grid, Q: np.ndarray):
    return {d: (Q, Q) for d in g.active_axes}


def reconstruct(g: Grid, Q: np.ndarray, dt: float, kind: str):
    if kind == "muscl":
        return muscl_reconstruct(g, Q, dt, limited=True)
    if kind == "muscl_central":
        return muscl_reconstruct(g, Q, dt, limited=False)
    if kind == "feec":
        return feec_reconstruct(g, Q)
    if kind == "none":
        return constant_reconstruct(g, Q)
    raise ValueError(f"unknown reconstruction {kind!r}")


# ------------------------------------------------------------------- fluxes
def flux_rusanov(wm: np.ndarray, wp: np.ndarray, axis: int, s) -> np.ndarray:
    return 0.5 * (physical_flux(wm, axis) + physical_flux(wp, axis)) - 0.5 * s * (wp - wm)


def flux_upwind(wm: np.ndarray, wp: np.ndarray, axis: int) -> np.ndarray:
    fm = physical_flux(wm, axis)
    fp = physical_flux(wp, axis)
    un = 0.5 * (wm[1 + axis] / wm[0] + wp[1 + axis] / wp[0])
    omega = un / np.sqrt(EPS_OMEGA + un * un)
    return 0.5 * (fm + fp) - 0.5 * omega * (fp - fm)


def _face_flux(wm, wp, axis, flux_kind, s_kind, s_nodes_pair):
    _check_positive(wm[0], "reconstruction")
    _check_positive(wp[0], "reconstruction")
    if flux_kind == "upwind":
        return flux_upwind(wm, wp, axis)
    if flux_kind != "rusanov":
        raise ValueError(f"unknown flux {flux_kind!r}")
    if s_kind == "v":
        s = np.maximum(np.abs(wm[1 + axis] / wm[0]), np.abs(wp[1 + axis] / wp[0]))
    else:
        s = np.maximum(*s_nodes_pair)
    return flux_rusanov(wm, wp, axis, s)


def diffusive_flux(g: Grid, u: np.ndarray, T: np.ndarray, mu: float, kappa: float, axis: int):
    """Viscous and heat flux through the right dual face of every node.

    Returned with the sign of a flux (it is *added* to the convective flux),
    i.e. ``(0, -tau_d, -(u . tau_d) - kappa dT/dd)``.
    """
    out = np.zeros((5,) + g.shape)
    if mu == 0.0 and kappa == 0.0:
        return out
    d = axis
    h = g.spacing

    def grad_at_face(f, e):
        if g.shape[e] == 1:
            return np.zeros_like(f)
        if e == d:
            return (g.sp(f, d) - f) / h[d]
        cd = (g.sp(f, e) - g.sm(f, e)) / (2.0 * h[e])
        return 0.5 * (cd + g.sp(cd, d))

    if mu != 0.0:
        du = [[grad_at_face(u[c], e) for e in range(3)] for c in range(3)]  # du[c][e] = d u_c / d x_e
        divu = du[0][0] + du[1][1] + du[2][2]
        uf = 0.5 * (u + g.sp(u, d))
        tau = []
        for c in range(3):
            t = mu * (du[c][d] + du[d][c])
            if c == d:
                t = t - 2.0 / 3.0 * mu * divu
            tau.append(t)
        for c in range(3):
            out[1 + c] = -tau[c]
        out[4] = -sum(uf[c] * tau[c] for c in range(3))
    if kappa != 0.0:
        out[4] -= kappa * grad_at_face(T, d)
    return out


def compute_fluxes(state: MhdState, Q: np.ndarray, dt: float, flux_kind="rusanov",
                   rec_kind="muscl", s_kind="v"):
    """Right- and left-face fluxes for every node and active axis."""
    g = state.grid
    par = state.params
    faces = reconstruct(g, Q, dt, rec_kind)
    s_nodes = None
    if s_kind != "v":
        un = Q[1:4] / Q[0]
        bn = state.node_field()
        s_nodes = {d: lambda_set(s_kind, Q[0], un[d], state.p, bn, d, par.gamma) for d in g.active_axes}
    viscous = par.mu != 0.0 or par.kappa != 0.0
    if viscous:
        u_n = Q[1:4] / Q[0]
        T = state.p / (Q[0] * par.c_v * (par.gamma - 1.0))
    out = {}
    for d in g.active_axes:
        qL, qR = faces[d]
        sp_pair = None if s_nodes is None else (s_nodes[d], g.sp(s_nodes[d], d))
        Fr = _face_flux(qR, g.sp(qL, d), d, flux_kind, s_kind, sp_pair)
        if g.is_periodic(d):
            Fl = g.sm(Fr, d)
        else:
            sm_pair = None if s_nodes is None else (g.sm(s_nodes[d], d), s_nodes[d])
            Fl = _face_flux(g.sm(qR, d), qL, d, flux_kind, s_kind, sm_pair)
        if viscous:
            Fd = diffusive_flux(g, u_n, T, par.mu, par.kappa, d)
            Fr = Fr + Fd
            Fl = Fl + g.sm(Fd, d)
        out[d] = (Fl, Fr)
    return out


def fv_step(state: MhdState, dt: float, flux_kind="rusanov", rec_kind="muscl", s_kind="v") -> MhdState:
    """Explicit convection-diffusion step; B is untouched.

    Nodal increments of density and energy are applied directly; the nodal
    momentum increment is carried to the edges by the two-node mean along
    each component's direction, which preserves the momentum sum.
    """
    g = state.grid
    Q = pack(state)
    dQ = np.zeros_like(Q)
    for d, (Fl, Fr) in compute_fluxes(state, Q, dt, flux_kind, rec_kind, s_kind).items():
        dQ -= dt / g.spacing[d] * (Fr - Fl)
    new = state.copy()
    new.rho = state.rho + dQ[0]
    _check_positive(new.rho, "finite-volume update")
    new.mom = state.mom + np.stack([g.to_pos(dQ[1 + c], NODE, EDGE[c]) for c in range(3)])
    new.energy = state.energy + dQ[4]
    new.refresh_pressure()
    return new


# ------------------------------------------------------------- correctors
def edge_flux_divergence(g: Grid, F: np.ndarray) -> np.ndarray:
    """Nodal divergence of a flux living on the dual faces (edge locations)."""
    return ops.flux_div(g, F)


def poynting_flux(g: Grid, E_edges: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Energy flux ``E x B`` at every dual face.

    ``E_edges[e, c]`` holds component ``c`` of the electric field at edges of
    direction ``e`` (see :func:`operators.interp_edge_to_edge`).
    """
    Be = ops.interp_face_to_edge(g, b)
    S = np.empty((3,) + g.shape)
    for d in range(3):
        j, k = (d + 1) % 3, (d + 2) % 3
        S[d] = E_edges[d, j] * Be[d, k] - E_edges[d, k] * Be[d, j]
    return S


def ideal_electric_field(g: Grid, u: np.ndarray, b: np.ndarray) -> np.ndarray:
    """E = -u x B with every component collocated at every edge family."""
    Ue = ops.interp_edge_to_edge(g, u)
    Be = ops.interp_face_to_edge(g, b)
    return -np.cross(Ue, Be, axis=1)


def maxwell_stress_divergence(g: Grid, b: np.ndarray) -> np.ndarray:
    """Divergence of T = |B|^2/2 I - B B on the edge control volumes.

    Diagonal entries live at nodes, the (x,y) entry at z-face positions, (y,z)
    at x-face positions and (z,x) at y-face positions, so each edge momentum
    is balanced by fluxes through its own control-volume faces.
    """
    bn = ops.face_to_node(g, b)
    pm = 0.5 * np.sum(bn * bn, axis=0)
    diag = [pm - bn[c] ** 2 for c in range(3)]
    # off-diagonal entry (c1, c2) lives at FACE[k] with k the remaining axis
    off = {}
    for c1, c2 in ((0, 1), (1, 2), (2, 0)):
        k = 3 - c1 - c2
        pos = FACE[k]
        off[(c1, c2)] = off[(c2, c1)] = -(g.to_pos(b[c1], FACE[c1], pos) * g.to_pos(b[c2], FACE[c2], pos))
    out = np.empty((3,) + g.shape)
    for c in range(3):
        acc = g.dp(diag[c], c)
        for e in range(3):
            if e != c:
                acc = acc + g.dm(off[(c, e)], e)
        out[c] = acc
    return out


def conservative_corrector(state: MhdState, dt: float, *, energy_flux=None, stress_field=None,
                           replace_momentum=None, energy_increment=None) -> MhdState:
    """Flux-form update of the conserved energy and, optionally, momentum.

    ``energy_flux`` is an edge-located flux added to the conserved energy as
    ``-dt div F``; ``energy_increment`` is an already integrated nodal
    contribution (used for implicit flux parts).  ``stress_field`` is a face field whose Maxwell stress
    divergence updates ``replace_momentum`` (the start-of-step edge momentum).
    """
    new = state.copy()
    g = state.grid
    if energy_flux is not None:
        new.energy = state.energy - dt * edge_flux_divergence(g, energy_flux)
    if energy_increment is not None:
        new.energy = new.energy + energy_increment
    if stress_field is not None:
        base = state.mom if replace_momentum is None else replace_momentum
        new.mom = base - dt * maxwell_stress_divergence(g, stress_field)
    return new
