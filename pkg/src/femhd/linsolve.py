"""Matrix-free conjugate gradients."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ConvergenceError(RuntimeError):
    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = list(history or [])


@dataclass(frozen=True)
class CgOptions:
    rel_tol: float = 1e-12
    abs_tol: float = 0.0
    max_iter: int = 10_000
    record_history: bool = False

    def __post_init__(self):
        if self.rel_tol < 0 or self.abs_tol < 0 or self.max_iter < 1:
            raise ValueError("invalid CG options")


@dataclass
class CgResult:
    x: np.ndarray
    iterations: int
    residual: float
    history: list = field(default_factory=list)


def _dot(a, b) -> float:
    return float(np.dot(a.ravel(), b.ravel()))


def cg(apply: Callable[[np.ndarray], np.ndarray], b: np.ndarray, x0=None,
       opts: CgOptions = CgOptions(), diag=None) -> CgResult:
    """Solve ``apply(x) = b`` for a symmetric positive definite operator.

    Convergence: ``||b - A x|| <= max(rel_tol*||b||, abs_tol)``.  ``diag`` is an
    optional Jacobi scaling hook (unused by the solvers, off by default).
    """
    bnorm = np.sqrt(_dot(b, b))
    if not np.isfinite(bnorm):
        raise FloatingPointError("non-finite right-hand side")
    if bnorm == 0.0:
        return CgResult(np.zeros_like(b), 0, 0.0, [0.0])
    tol = max(opts.rel_tol * bnorm, opts.abs_tol)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float, copy=True)
    r = b - apply(x) if x0 is not None else b.copy()
    z = r / diag if diag is not None else r
    rz = _dot(r, z)
    rnorm = np.sqrt(_dot(r, r))
    history = [rnorm]
    if rnorm <= tol:
        return CgResult(x, 0, rnorm, history)
    d = z.copy()
    for it in range(1, opts.max_iter + 1):
        q = apply(d)
        dq = _dot(d, q)
        if not np.isfinite(dq) or dq <= 0.0:
            raise ConvergenceError(f"operator not positive definite (d.Ad = {dq:.3e})", history)
        alpha = rz / dq
        x += alpha * d
        r -= alpha * q
        rnorm = np.sqrt(_dot(r, r))
        history.append(rnorm)
        if not np.isfinite(rnorm):
            raise FloatingPointError("non-finite residual in CG")
        if rnorm <= tol:
            return CgResult(x, it, rnorm, history if opts.record_history else history[-1:])
        z = r / diag if diag is not None else r
        rz_new = _dot(r, z)
        d *= rz_new / rz
        d += z
        rz = rz_new
    raise ConvergenceError(
        f"CG did not converge in {opts.max_iter} iterations "
        f"(residual {rnorm:.3e}, target {tol:.3e})", history)
