"""Discrete vector potential and magnetic helicity.

The edge potential ``A`` is relaxed in pseudo-time towards ``C A = B`` with a
weakly divergence-free gauge ``G^T A = 0``.  Each pseudo-step is implicit in
both the curl-curl term and the div-grad gauge coupling,

    (I/tau + C^T C + G G^T) A^{m+1} = A^m / tau + C^T B,

and is solved with the same matrix-free CG as the flow solver.  The stopping
rule is the relative change of ``A`` between pseudo-steps.
"""
from __future__ import annotations

import warnings

import numpy as np

from . import operators as ops
from .linsolve import CgOptions, ConvergenceError, cg
from .mesh import Grid

TAU_FACTOR = 1e6


def _check_field(g: Grid, b: np.ndarray, strict: bool) -> np.ndarray:
    if not g.fully_periodic:
        raise ValueError("vector potential recovery requires a periodic grid")
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    if scale == 0.0:
        return b
    hmin = min(g.spacing[a] for a in g.active_axes) if g.active_axes else 1.0
    if np.max(np.abs(ops.apply_div(g, b))) > 1e-10 * scale / hmin:
        raise ValueError("face field is not discretely divergence free")
    mean = b.reshape(3, -1).mean(axis=1)
    if np.max(np.abs(mean)) > 1e-12 * scale:
        if strict:
            raise ValueError(
                "face field has a uniform (harmonic) part that no periodic potential can represent")
        warnings.warn("uniform field component removed before potential recovery", stacklevel=3)
        b = b - mean.reshape(3, 1, 1, 1)
    return b


def solve_vector_potential(g: Grid, b: np.ndarray, tol: float = 1e-12, max_iter: int = 200,
                           strict: bool = True, a0=None) -> np.ndarray:
    b = _check_field(g, b, strict)
    if not np.any(b):
        return np.zeros_like(b)
    act = g.active_axes
    tau = TAU_FACTOR / (2.0 * sum(1.0 / g.spacing[a] ** 2 for a in act))
    rhs_src = ops.curl_t(g, b)

    def apply(x):
        return x / tau + ops.curl_t(g, ops.apply_curl(g, x)) + ops.apply_grad(g, ops.grad_t(g, x))

    inner = CgOptions(rel_tol=1e-14, max_iter=20_000)
    a = np.zeros_like(b) if a0 is None else a0.copy()
    for _ in range(max_iter):
        res = cg(apply, a / tau + rhs_src, x0=a, opts=inner)
        change = np.linalg.norm(res.x - a)
        a = res.x
        if change <= tol * np.linalg.norm(a):
            return a
    raise ConvergenceError(f"vector potential relaxation stalled after {max_iter} pseudo-steps")


def magnetic_helicity(g: Grid, a: np.ndarray, b: np.ndarray) -> float:
    return ops.magnetic_helicity(g, a, b)


def helicity_of(g: Grid, b: np.ndarray) -> float:
    """Helicity of the zero-mean part of a face field."""
    if not g.fully_periodic:
        return float("nan")
    b0 = _check_field(g, b, strict=False) if np.any(b) else b
    a = solve_vector_potential(g, b0, strict=False)
    return magnetic_helicity(g, a, b0)
