"""Ideal-gas thermodynamics, conversions and characteristic speeds.

Magnetic fields are stored in rationalized units (the factor sqrt(4 pi) is
absorbed), so the magnetic pressure is |B|^2/2 and the Alfven speed is
|B_axis|/sqrt(rho).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import operators as ops
from .mesh import EDGE, NODE, Grid
from .operators import StateError


@dataclass(frozen=True)
class Params:
    gamma: float = 5.0 / 3.0
    c_v: float = 1.0
    mu: float = 0.0
    kappa: float = 0.0
    eta: float = 0.0

    @classmethod
    def from_prandtl(cls, gamma, c_v, mu, prandtl, eta=0.0) -> "Params":
        """kappa = mu * c_p / Pr with c_p = gamma * c_v."""
        kappa = mu * gamma * c_v / prandtl if prandtl else 0.0
        return cls(gamma=gamma, c_v=c_v, mu=mu, kappa=kappa, eta=eta)


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise StateError(f"non-positive density (min {np.min(rho):.6g})")
    return rho


def eos(p, rho, gamma: float, c_v: float = 1.0) -> dict:
    """Specific internal energy, enthalpy, temperature and sound speed."""
    rho = _check_rho(rho)
    p = np.asarray(p, dtype=float)
    e = p / ((gamma - 1.0) * rho)
    h = gamma / (gamma - 1.0) * p / rho
    T = p / (rho * c_v * (gamma - 1.0))
    c = np.sqrt(np.maximum(gamma * p / rho, 0.0))
    return {"e": e, "h": h, "T": T, "c": c}


def sound_speed_sq(p, rho, gamma):
    return gamma * np.maximum(p, 0.0) / rho


def wavespeeds(rho, p, b, axis: int, gamma: float) -> dict:
    """Alfven, slow, fast and sound speeds along ``axis``.

    ``b`` is a sequence of the three field components (scalars or arrays).
    """
    rho = _check_rho(rho)
    c2 = sound_speed_sq(p, rho, gamma)
    b2 = (b[0] ** 2 + b[1] ** 2 + b[2] ** 2) / rho
    ca2 = b[axis] ** 2 / rho
    s = b2 + c2
    disc = np.sqrt(np.maximum(s * s - 4.0 * ca2 * c2, 0.0))
    cf2 = 0.5 * (s + disc)
    cs2 = np.maximum(0.5 * (s - disc), 0.0)
    return {"c_a": np.sqrt(ca2), "c_s": np.sqrt(cs2), "c_f": np.sqrt(cf2), "c": np.sqrt(c2)}


LAMBDA_KINDS = ("v", "p", "b", "MHD")


def lambda_set(kind: str, rho, u_axis, p, b, axis: int, gamma: float):
    """Spectral radius of the chosen eigenvalue subset along ``axis``."""
    av = np.abs(u_axis)
    if kind == "v":
        return av + 0.0 * np.asarray(rho)
    rho = _check_rho(rho)
    if kind == "p":
        return 0.5 * (av + np.sqrt(u_axis ** 2 + 4.0 * sound_speed_sq(p, rho, gamma)))
    if kind == "b":
        b2 = b[0] ** 2 + b[1] ** 2 + b[2] ** 2
        return 0.5 * (av + np.sqrt(u_axis ** 2 + 4.0 * b2 / rho))
    if kind == "MHD":
        return av + wavespeeds(rho, p, b, axis, gamma)["c_f"]
    raise ValueError(f"unknown eigenvalue set {kind!r}")


def prim_to_cons(rho, u, p, gamma):
    """Pointwise (rho, u, p) -> (rho, m, rhoE) with hydrodynamic energy only."""
    rho = _check_rho(rho)
    u = np.asarray(u, dtype=float)
    m = rho * u
    rhoE = np.asarray(p) / (gamma - 1.0) + 0.5 * rho * np.sum(u * u, axis=0)
    return rho, m, rhoE


def cons_to_prim(rho, m, rhoE, gamma):
    rho = _check_rho(rho)
    m = np.asarray(m, dtype=float)
    u = m / rho
    p = (gamma - 1.0) * (np.asarray(rhoE) - 0.5 * np.sum(m * u, axis=0))
    return rho, u, p


# ----------------------------------------------------------------- state
ENERGY_CLOSURES = ("total", "hydro")


@dataclass
class MhdState:
    """Staggered MHD state.

    ``rho`` and ``energy`` are nodal dual-cell averages, ``mom`` holds the
    edge momenta (the conserved momentum DOFs), ``B`` the face fluxes and
    ``p`` the nodal pressure, always derived from the conserved variables.
    With the ``total`` closure ``energy`` is the total energy density
    including the nodal magnetic energy; with ``hydro`` it excludes it.
    """

    grid: Grid
    params: Params
    rho: np.ndarray
    mom: np.ndarray
    B: np.ndarray
    energy: np.ndarray
    p: np.ndarray = field(default=None)
    closure: str = "total"
    t: float = 0.0

    def __post_init__(self):
        if self.closure not in ENERGY_CLOSURES:
            raise ValueError(f"unknown energy closure {self.closure!r}")
        if self.p is None:
            self.refresh_pressure()

    # -- derived quantities ------------------------------------------------
    def rho_edges(self) -> np.ndarray:
        return ops.average_rho_to_edges(self.grid, self.rho)

    @property
    def u(self) -> np.ndarray:
        return self.mom / self.rho_edges()

    def kinetic_nodes(self, mom=None) -> np.ndarray:
        """Nodal kinetic energy 1/2 * mean over incident edges of u.m."""
        mom = self.mom if mom is None else mom
        um = mom * mom / self.rho_edges()
        return 0.5 * sum(self.grid.to_pos(um[d], EDGE[d], NODE) for d in range(3))

    def magnetic_nodes(self, B=None) -> np.ndarray:
        B = self.B if B is None else B
        return 0.5 * np.sum(ops.face_to_node(self.grid, B * B), axis=0)

    def hydro_energy(self) -> np.ndarray:
        if self.closure == "total":
            return self.energy - self.magnetic_nodes()
        return self.energy

    def pressure_from_energy(self) -> np.ndarray:
        return (self.params.gamma - 1.0) * (self.hydro_energy() - self.kinetic_nodes())

    def refresh_pressure(self) -> None:
        self.p = self.pressure_from_energy()

    def node_velocity(self) -> np.ndarray:
        return ops.edge_to_node(self.grid, self.mom) / self.rho

    def node_field(self) -> np.ndarray:
        return ops.face_to_node(self.grid, self.B)

    def copy(self) -> "MhdState":
        return replace(
            self, rho=self.rho.copy(), mom=self.mom.copy(), B=self.B.copy(),
            energy=self.energy.copy(), p=self.p.copy(),
        )

    # -- totals ----------------------------------------------------------------
    def totals(self) -> dict:
        v = self.grid.vol
        ek = self.kinetic_nodes()
        eh = self.hydro_energy()
        em = 0.5 * np.sum(self.B * self.B) * v
        return {
            "mass": float(np.sum(self.rho) * v),
            "mom_x": float(np.sum(self.mom[0]) * v),
            "mom_y": float(np.sum(self.mom[1]) * v),
            "mom_z": float(np.sum(self.mom[2]) * v),
            "E_hydro": float(np.sum(eh) * v),
            "E_mag": float(em),
            "E_total": float(np.sum(eh) * v + em),
            "E_kin": float(np.sum(ek) * v),
        }


def make_state(grid: Grid, params: Params, rho, u, p, B, closure: str = "total", t=0.0) -> MhdState:
    """Build a state from nodal rho, p, edge velocity and face field."""
    rho = np.array(np.broadcast_to(rho, grid.shape), dtype=float)
    p = np.array(np.broadcast_to(p, grid.shape), dtype=float)
    if np.any(rho <= 0):
        raise StateError("initial density must be positive")
    u = np.array(np.broadcast_to(u, (3,) + grid.shape), dtype=float)
    B = np.array(np.broadcast_to(B, (3,) + grid.shape), dtype=float)
    mom = ops.average_rho_to_edges(grid, rho) * u
    st = MhdState(grid, params, rho, mom, B, np.zeros(grid.shape), p=p.copy(), closure=closure, t=t)
    energy = p / (params.gamma - 1.0) + st.kinetic_nodes()
    if closure == "total":
        energy = energy + st.magnetic_nodes()
    st.energy = energy
    st.refresh_pressure()
    return st
