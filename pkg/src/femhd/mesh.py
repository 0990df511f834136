"""Uniform Cartesian grid, its barycentric dual, and the staggered DOF layout.

Every DOF family is identified by a *position type*: a triple of ``"N"`` (the
coordinate sits on a primal node line, ``x_{i-1/2}``) or ``"C"`` (it sits at a
primal cell center, ``x_i``).  Array index ``i`` of any field is the index of
the primal cell that owns the DOF, so a value of type ``N`` along ``x`` with
index ``i`` lives at ``origin + i*dx`` and one of type ``C`` at
``origin + (i + 1/2)*dx``.

All fields are stored as arrays of shape ``(nx, ny, nz)`` (scalars) or
``(3, nx, ny, nz)`` (three component blocks).  Stencils are built from four
one-dimensional shift primitives whose exact transposes are also provided, so
every weak operator is the literal transpose of its strong counterpart, for
periodic and transmissive axes alike.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PERIODIC = "periodic"
TRANSMISSIVE = "transmissive"

NODE = ("N", "N", "N")
CELL = ("C", "C", "C")
EDGE = (("C", "N", "N"), ("N", "C", "N"), ("N", "N", "C"))
FACE = (("N", "C", "C"), ("C", "N", "C"), ("C", "C", "N"))

SPACES = ("nodes", "edges", "faces", "cells")


class ConfigurationError(ValueError):
    """Invalid user-supplied configuration."""


def position_types(space: str) -> tuple[tuple[str, str, str], ...]:
    """Position types of every component of a DOF space."""
    if space == "nodes":
        return (NODE,)
    if space == "cells":
        return (CELL,)
    if space == "edges":
        return EDGE
    if space == "faces":
        return FACE
    raise ConfigurationError(f"unknown DOF space {space!r}")


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    nz: int
    dx: float
    dy: float
    dz: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    bc: tuple[str, str, str] = (PERIODIC, PERIODIC, PERIODIC)
    _periodic: tuple[bool, bool, bool] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_periodic", tuple(b == PERIODIC for b in self.bc))

    # ------------------------------------------------------------------ basics
    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def spacing(self) -> tuple[float, float, float]:
        return (self.dx, self.dy, self.dz)

    @property
    def lengths(self) -> tuple[float, float, float]:
        return (self.nx * self.dx, self.ny * self.dy, self.nz * self.dz)

    @property
    def ncells(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def vol(self) -> float:
        return self.dx * self.dy * self.dz

    @property
    def active_axes(self) -> tuple[int, ...]:
        """Axes that are not collapsed to a single cell."""
        return tuple(a for a in range(3) if self.shape[a] > 1)

    @property
    def fully_periodic(self) -> bool:
        return all(self._periodic)

    def is_periodic(self, axis: int) -> bool:
        return self._periodic[axis]

    def dof_count(self, space: str) -> int:
        return len(position_types(space)) * self.ncells

    def zeros(self, space: str) -> np.ndarray:
        if space in ("nodes", "cells"):
            return np.zeros(self.shape)
        if space in ("edges", "faces"):
            return np.zeros((3,) + self.shape)
        raise ConfigurationError(f"unknown DOF space {space!r}")

    # ------------------------------------------------------------ coordinates
    def axis_coords(self, axis: int, kind: str) -> np.ndarray:
        h = self.spacing[axis]
        n = self.shape[axis]
        off = 0.0 if kind == "N" else 0.5
        return self.origin[axis] + (np.arange(n) + off) * h

    def coords(self, ptype: Sequence[str]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcast-ready coordinate arrays for a position type."""
        x = self.axis_coords(0, ptype[0])[:, None, None]
        y = self.axis_coords(1, ptype[1])[None, :, None]
        z = self.axis_coords(2, ptype[2])[None, None, :]
        return x, y, z

    def mesh(self, ptype: Sequence[str]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x, y, z = self.coords(ptype)
        return tuple(np.broadcast_to(c, self.shape).copy() for c in (x, y, z))

    def dof_location(self, space: str, component: int | None, i: int, j: int, k: int):
        types = position_types(space)
        comp = 0 if component is None else component
        if not 0 <= comp < len(types):
            raise IndexError(f"component {component} out of range for {space}")
        for idx, n in zip((i, j, k), self.shape):
            if not 0 <= idx < n:
                raise IndexError(f"index {(i, j, k)} out of range for grid {self.shape}")
        ptype = types[comp]
        return tuple(
            float(self.axis_coords(a, ptype[a])[idx]) for a, idx in enumerate((i, j, k))
        )

    def linear_index(self, space: str, component: int | None, i: int, j: int, k: int) -> int:
        comp = 0 if component is None else component
        return int(np.ravel_multi_index((comp, i, j, k), (len(position_types(space)),) + self.shape))

    def multi_index(self, space: str, index: int) -> tuple[int, int, int, int]:
        comp, i, j, k = np.unravel_index(index, (len(position_types(space)),) + self.shape)
        return int(comp), int(i), int(j), int(k)

    # ------------------------------------------------------ shift primitives
    # sp(a)[i] = a[i+1], sm(a)[i] = a[i-1]; transmissive axes replicate the
    # nearest interior value.  The *_t functions are the exact transposes.
    # ``axis`` is a grid axis; leading array dimensions (stacked components)
    # are left alone, so the shift always acts on one of the last three.
    @staticmethod
    def _array_axis(a: np.ndarray, axis: int) -> int:
        return a.ndim - 3 + axis

    def sp(self, a: np.ndarray, axis: int) -> np.ndarray:
        periodic = self._periodic[axis]
        axis = self._array_axis(a, axis)
        if periodic:
            return np.roll(a, -1, axis)
        n = a.shape[axis]
        idx = np.minimum(np.arange(1, n + 1), n - 1)
        return np.take(a, idx, axis=axis)

    def sm(self, a: np.ndarray, axis: int) -> np.ndarray:
        periodic = self._periodic[axis]
        axis = self._array_axis(a, axis)
        if periodic:
            return np.roll(a, 1, axis)
        n = a.shape[axis]
        idx = np.maximum(np.arange(-1, n - 1), 0)
        return np.take(a, idx, axis=axis)

    def sp_t(self, b: np.ndarray, axis: int) -> np.ndarray:
        periodic = self._periodic[axis]
        axis = self._array_axis(b, axis)
        if periodic:
            return np.roll(b, 1, axis)
        out = np.zeros_like(b)
        src = np.moveaxis(b, axis, 0)
        dst = np.moveaxis(out, axis, 0)
        dst[1:] = src[:-1]
        dst[-1] += src[-1]
        return out

    def sm_t(self, b: np.ndarray, axis: int) -> np.ndarray:
        periodic = self._periodic[axis]
        axis = self._array_axis(b, axis)
        if periodic:
            return np.roll(b, -1, axis)
        out = np.zeros_like(b)
        src = np.moveaxis(b, axis, 0)
        dst = np.moveaxis(out, axis, 0)
        dst[:-1] = src[1:]
        dst[0] += src[0]
        return out

    # Differences and two-point means between N and C positions.
    def dp(self, a, axis):
        """Forward difference, N -> C."""
        return (self.sp(a, axis) - a) / self.spacing[axis]

    def dp_t(self, b, axis):
        return (self.sp_t(b, axis) - b) / self.spacing[axis]

    def dm(self, a, axis):
        """Backward difference, C -> N."""
        return (a - self.sm(a, axis)) / self.spacing[axis]

    def dm_t(self, b, axis):
        return (b - self.sm_t(b, axis)) / self.spacing[axis]

    def ap(self, a, axis):
        """Forward two-point mean, N -> C."""
        return 0.5 * (a + self.sp(a, axis))

    def ap_t(self, b, axis):
        return 0.5 * (b + self.sp_t(b, axis))

    def am(self, a, axis):
        """Backward two-point mean, C -> N."""
        return 0.5 * (a + self.sm(a, axis))

    def am_t(self, b, axis):
        return 0.5 * (b + self.sm_t(b, axis))

    def to_pos(self, a: np.ndarray, src: Sequence[str], dst: Sequence[str]) -> np.ndarray:
        """Interpolate a scalar array between position types by two-point means."""
        for axis in range(3):
            if src[axis] == dst[axis] or self.shape[axis] == 1:
                continue
            a = self.ap(a, axis) if src[axis] == "N" else self.am(a, axis)
        return a

    def to_pos_t(self, b: np.ndarray, src: Sequence[str], dst: Sequence[str]) -> np.ndarray:
        """Exact transpose of :meth:`to_pos` (maps ``dst`` arrays back to ``src``)."""
        for axis in range(3):
            if src[axis] == dst[axis] or self.shape[axis] == 1:
                continue
            b = self.ap_t(b, axis) if src[axis] == "N" else self.am_t(b, axis)
        return b


def build_grid(
    nx: int,
    ny: int = 1,
    nz: int = 1,
    lengths: Sequence[float] = (1.0, 1.0, 1.0),
    bc: str | Sequence[str] = PERIODIC,
    origin: Sequence[float] = (0.0, 0.0, 0.0),
) -> Grid:
    counts = (nx, ny, nz)
    if any(int(n) != n or n < 1 for n in counts):
        raise ConfigurationError(f"cell counts must be positive integers, got {counts}")
    if len(lengths) != 3 or any(not np.isfinite(L) or L <= 0 for L in lengths):
        raise ConfigurationError(f"lengths must be three positive numbers, got {lengths}")
    if isinstance(bc, str):
        bc = (bc, bc, bc)
    bc = tuple(bc)
    for b in bc:
        if b not in (PERIODIC, TRANSMISSIVE):
            raise ConfigurationError(f"unknown boundary kind {b!r}")
    # collapsed axes are always periodic
    bc = tuple(PERIODIC if n == 1 else b for n, b in zip(counts, bc))
    return Grid(
        int(nx), int(ny), int(nz),
        float(lengths[0]) / nx, float(lengths[1]) / ny, float(lengths[2]) / nz,
        tuple(float(o) for o in origin), bc,
    )
