"""Discrete de Rham complex on the staggered grid.

Strong operators carry the 1/h factors, lumped masses carry the cell volume,
and every weak (dual) operator is implemented as the exact transpose of a
strong stencil.  Nothing is assembled; all maps are matrix-free.
"""
from __future__ import annotations

import numpy as np

from .mesh import CELL, EDGE, FACE, NODE, Grid


class StateError(RuntimeError):
    """Physically inadmissible state (e.g. non-positive density)."""


# ----------------------------------------------------------------- strong ops
def apply_grad(g: Grid, p: np.ndarray) -> np.ndarray:
    return np.stack([g.dp(p, 0), g.dp(p, 1), g.dp(p, 2)])


def apply_curl(g: Grid, u: np.ndarray) -> np.ndarray:
    ux, uy, uz = u
    return np.stack([
        g.dp(uz, 1) - g.dp(uy, 2),
        g.dp(ux, 2) - g.dp(uz, 0),
        g.dp(uy, 0) - g.dp(ux, 1),
    ])


def apply_div(g: Grid, b: np.ndarray) -> np.ndarray:
    return g.dp(b[0], 0) + g.dp(b[1], 1) + g.dp(b[2], 2)


# ------------------------------------------------------------- transposes
def grad_t(g: Grid, f: np.ndarray) -> np.ndarray:
    """G^T: edges -> nodes."""
    return g.dp_t(f[0], 0) + g.dp_t(f[1], 1) + g.dp_t(f[2], 2)


def curl_t(g: Grid, b: np.ndarray) -> np.ndarray:
    """C^T: faces -> edges."""
    bx, by, bz = b
    return np.stack([
        g.dp_t(by, 2) - g.dp_t(bz, 1),
        g.dp_t(bz, 0) - g.dp_t(bx, 2),
        g.dp_t(bx, 1) - g.dp_t(by, 0),
    ])


def div_t(g: Grid, q: np.ndarray) -> np.ndarray:
    """D^T: cells -> faces."""
    return np.stack([g.dp_t(q, 0), g.dp_t(q, 1), g.dp_t(q, 2)])


# ------------------------------------------------ strong dual differences
# On periodic axes these coincide bitwise with the negated transposes.  On
# transmissive axes they use replicated ghost values, so a uniform flux or a
# uniform field passes through the boundary without generating sources.
def flux_div(g: Grid, f: np.ndarray) -> np.ndarray:
    """Nodal divergence of a flux located on the dual faces (edges)."""
    return g.dm(f[0], 0) + g.dm(f[1], 1) + g.dm(f[2], 2)


def curl_strong(g: Grid, b: np.ndarray) -> np.ndarray:
    """Curl of a face field evaluated on the edges (dual curl)."""
    bx, by, bz = b
    return np.stack([
        g.dm(bz, 1) - g.dm(by, 2),
        g.dm(bx, 2) - g.dm(bz, 0),
        g.dm(by, 0) - g.dm(bx, 1),
    ])


def apply_weak(g: Grid, kind: str, f: np.ndarray) -> np.ndarray:
    """Weak derivatives with unit lumped masses (the volume factors cancel)."""
    if kind == "grad_w":
        if f.ndim != 3:
            raise ValueError("grad_w expects a cell field")
        return -div_t(g, f)
    if kind == "curl_w":
        if f.ndim != 4:
            raise ValueError("curl_w expects a face field")
        return curl_t(g, f)
    if kind == "div_w":
        if f.ndim != 4:
            raise ValueError("div_w expects an edge field")
        return -grad_t(g, f)
    raise ValueError(f"unknown weak operator {kind!r}")


# ----------------------------------------------------------------- masses
def diagonal_mass(g: Grid, space: str, weight=1.0) -> np.ndarray:
    """Lumped mass diagonal: weight at the DOF times the cell volume."""
    w = np.broadcast_to(np.asarray(weight, dtype=float), g.zeros(space).shape)
    if not np.all(np.isfinite(w)):
        raise ValueError("non-finite mass weight")
    return w * g.vol


def average_rho_to_edges(g: Grid, rho: np.ndarray) -> np.ndarray:
    """Two-node mean of the nodal density on every edge."""
    if np.any(rho <= 0):
        i = np.unravel_index(np.argmin(rho), rho.shape)
        raise StateError(f"non-positive density {rho[i]:.6g} at node {tuple(int(v) for v in i)}")
    return np.stack([g.ap(rho, 0), g.ap(rho, 1), g.ap(rho, 2)])


def node_to_edges(g: Grid, a: np.ndarray) -> np.ndarray:
    return np.stack([g.ap(a, 0), g.ap(a, 1), g.ap(a, 2)])


# ---------------------------------------------------------- interpolations
def edge_to_node(g: Grid, u: np.ndarray) -> np.ndarray:
    """I_n: each component averaged from its two edges onto the node."""
    return np.stack([g.to_pos(u[d], EDGE[d], NODE) for d in range(3)])


def edge_to_node_t(g: Grid, v: np.ndarray) -> np.ndarray:
    return np.stack([g.to_pos_t(v[d], EDGE[d], NODE) for d in range(3)])


def face_to_node(g: Grid, b: np.ndarray) -> np.ndarray:
    """J_n: each component averaged from its four faces onto the node."""
    return np.stack([g.to_pos(b[d], FACE[d], NODE) for d in range(3)])


def face_to_node_t(g: Grid, v: np.ndarray) -> np.ndarray:
    return np.stack([g.to_pos_t(v[d], FACE[d], NODE) for d in range(3)])


def face_to_cell(g: Grid, b: np.ndarray) -> np.ndarray:
    return np.stack([g.to_pos(b[d], FACE[d], CELL) for d in range(3)])


def edge_to_cell(g: Grid, u: np.ndarray) -> np.ndarray:
    return np.stack([g.to_pos(u[d], EDGE[d], CELL) for d in range(3)])


def interp_face_to_edge(g: Grid, b: np.ndarray) -> np.ndarray:
    """All three Cartesian components of a face field at every edge midpoint.

    Returns an array ``out[e, c]`` holding component ``c`` at the edges of
    direction ``e``.  The parallel component (``c == e``) is an 8-point mean,
    transverse components are two-point means of the faces sharing the edge.
    """
    out = np.empty((3, 3) + g.shape)
    for e in range(3):
        for c in range(3):
            out[e, c] = g.to_pos(b[c], FACE[c], EDGE[e])
    return out


def interp_edge_to_edge(g: Grid, u: np.ndarray) -> np.ndarray:
    """All three components of an edge field at every edge midpoint (``out[e, c]``)."""
    out = np.empty((3, 3) + g.shape)
    for e in range(3):
        for c in range(3):
            out[e, c] = u[c] if c == e else g.to_pos(u[c], EDGE[c], EDGE[e])
    return out


def p1_face(g: Grid, b: np.ndarray) -> np.ndarray:
    """P1 of a face field: its edge-midpoint collocation (parallel components)."""
    return np.stack([g.to_pos(b[d], FACE[d], EDGE[d]) for d in range(3)])


# ----------------------------------------------------------- cross product
class CrossOperator:
    """The linear map u -> P1(u x P1(B)) for a frozen face field B.

    Nodal trapezoidal quadrature is used: edge vectors are averaged to the
    nodes, crossed pointwise, and scattered back with the exact transpose of
    the averaging.  With ``op_cross`` the magnetic field is first routed
    through P1 (edge collocation), which makes the result exactly orthogonal
    to P1(B) in the lumped scalar product.  Without it the face field is
    averaged straight to the nodes.
    """

    def __init__(self, g: Grid, b: np.ndarray, op_cross: bool = True):
        self.g = g
        self.op_cross = op_cross
        if op_cross:
            self.bn = edge_to_node(g, p1_face(g, b))
        else:
            self.bn = face_to_node(g, b)

    def apply(self, u: np.ndarray) -> np.ndarray:
        un = edge_to_node(self.g, u)
        return edge_to_node_t(self.g, np.cross(un, self.bn, axis=0))

    def apply_t(self, y: np.ndarray) -> np.ndarray:
        yn = edge_to_node(self.g, y)
        return edge_to_node_t(self.g, np.cross(self.bn, yn, axis=0))


def cross_at_edges(g: Grid, u: np.ndarray, b: np.ndarray, op_cross: bool = True) -> np.ndarray:
    return CrossOperator(g, b, op_cross).apply(u)


def cross_adjoint(g: Grid, b: np.ndarray, y: np.ndarray, op_cross: bool = True) -> np.ndarray:
    return CrossOperator(g, b, op_cross).apply_t(y)


def magnetic_helicity(g: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """Lumped pairing of an edge potential with P1(B)."""
    return float(g.vol * np.sum(a * p1_face(g, b)))
