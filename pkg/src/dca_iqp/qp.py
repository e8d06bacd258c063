"""Strictly convex QP subsolver and Euclidean projection.

``solve_qp`` runs a primal active-set iteration with equality subproblems
reduced to the null space of the working rows; its exact termination keeps
the fixed-point residual checks downstream tight.  ``project`` is the same
machinery with an identity Hessian.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import ASQP_ITER_CAP, ASQP_NUMERIC, kernels
from .linalg import NotPositiveDefiniteError, SymMatrix
from .model import ACT_TOL, FEAS_TOL, Polyhedron, is_feasible

DEFAULT_TOL = 1e-9
_PIVOT_TOL = 1e-10
_PHASE1_PASSES = 500
_ITER_CAP_FACTOR = 50

__all__ = [
    "ConvexQp",
    "QpSolution",
    "QpInfeasibleError",
    "QpNumericalError",
    "solve_qp",
    "project",
    "DEFAULT_TOL",
]


class QpInfeasibleError(RuntimeError):
    """Raised when no feasible point can be found."""


class QpNumericalError(RuntimeError):
    """Raised when the active-set iteration fails to terminate cleanly."""


@dataclass(frozen=True)
class ConvexQp:
    """``min 0.5 x'Hx + c'x`` over a polyhedron, with H positive definite."""

    H: SymMatrix
    c: np.ndarray
    C: Polyhedron

    def __post_init__(self):
        if not isinstance(self.H, SymMatrix):
            object.__setattr__(self, "H", SymMatrix(self.H))
        cv = np.array(self.c, dtype=np.float64)
        if cv.shape != (self.H.n,):
            raise ValueError(f"c has shape {cv.shape}, expected ({self.H.n},)")
        if not np.isfinite(cv).all():
            raise ValueError("c has non-finite entries")
        cv.setflags(write=False)
        object.__setattr__(self, "c", cv)
        if self.C.n != self.H.n:
            raise ValueError(
                f"polyhedron dimension {self.C.n} does not match H ({self.H.n})"
            )
        _, ok = kernels.chol_solve(
            np.ascontiguousarray(self.H.a), np.zeros(self.H.n)
        )
        if not ok:
            raise NotPositiveDefiniteError("H is not positive definite")


@dataclass(frozen=True)
class QpSolution:
    """Minimizer with multipliers, certifying working set and residual."""

    x: np.ndarray
    lam: np.ndarray
    active: np.ndarray
    kkt_residual: float
    iterations: int


def _phase1(C, start):
    """Feasible point by cyclic projection onto violated rows."""
    A, b = C.A, C.b
    x = np.array(start, dtype=np.float64, copy=True)
    if not np.isfinite(x).all():
        x = np.zeros(C.n)
    rn2 = (A * A).sum(axis=1)
    if bool(((rn2 == 0.0) & (b > FEAS_TOL)).any()):
        raise QpInfeasibleError("a zero row demands a positive bound")
    for _ in range(_PHASE1_PASSES):
        if (A @ x - b).min() >= -FEAS_TOL:
            return x
        for i in range(C.m):
            viol = b[i] - float(A[i] @ x)
            if viol > 0.0 and rn2[i] > 0.0:
                x += (viol / rn2[i]) * A[i]
    raise QpInfeasibleError(
        f"no feasible point after {_PHASE1_PASSES} projection passes; "
        "the constraint system may be empty"
    )


def _initial_point(C, warm_start):
    if warm_start is not None:
        w = np.asarray(warm_start, dtype=np.float64)
        if w.shape == (C.n,) and np.isfinite(w).all() and is_feasible(C, w):
            return w
    if C.witness is not None and is_feasible(C, C.witness):
        return C.witness
    start = warm_start if warm_start is not None else (
        C.witness if C.witness is not None else np.zeros(C.n)
    )
    return _phase1(C, start)


def _solve_raw(h_arr, c, C, warm_start, tol):
    n = h_arr.shape[0]
    m = C.m
    if m == 0:
        y, ok = kernels.chol_solve(
            np.ascontiguousarray(h_arr), np.ascontiguousarray(-c)
        )
        if not ok:
            raise NotPositiveDefiniteError("H is not positive definite")
        resid = float(np.linalg.norm(h_arr @ y + c))
        return QpSolution(y, np.zeros(0), np.zeros(0, dtype=np.int64), resid, 0)
    x0 = _initial_point(C, warm_start)
    max_iter = _ITER_CAP_FACTOR * (m + n)
    x, lam, in_w, status, niter = kernels.asqp(
        np.ascontiguousarray(h_arr),
        np.ascontiguousarray(np.asarray(c, dtype=np.float64)),
        np.ascontiguousarray(C.A),
        np.ascontiguousarray(C.b),
        np.ascontiguousarray(x0),
        ACT_TOL,
        _PIVOT_TOL,
        float(tol),
        max_iter,
    )
    if status == ASQP_NUMERIC:
        raise QpNumericalError("linear algebra failure in the active-set iteration")
    if status == ASQP_ITER_CAP:
        raise QpNumericalError(
            f"active-set iteration cap {max_iter} reached without termination"
        )
    lam = np.maximum(lam, 0.0)
    resid = float(np.linalg.norm(h_arr @ x + c - C.A.T @ lam))
    active = np.flatnonzero(in_w).astype(np.int64)
    return QpSolution(x, lam, active, resid, int(niter))


def solve_qp(qp, warm_start=None, tol=DEFAULT_TOL):
    """Minimize the strictly convex QP; returns a QpSolution.

    The start point is the warm start when feasible, else the polyhedron's
    witness, else a phase-1 sequential projection search.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    return _solve_raw(qp.H.a, qp.c, qp.C, warm_start, tol)


def project(C, u, tol=DEFAULT_TOL, warm_start=None):
    """Euclidean projection of ``u`` onto the polyhedron.

    Feasible input is returned unchanged; otherwise this solves the QP with
    identity Hessian and linear term ``-u``.
    """
    uv = np.asarray(u, dtype=np.float64)
    if uv.shape != (C.n,):
        raise ValueError(f"u has shape {uv.shape}, expected ({C.n},)")
    if not np.isfinite(uv).all():
        raise ValueError("u has non-finite entries")
    if is_feasible(C, uv):
        return uv.copy()
    ws = warm_start if warm_start is not None else uv
    sol = _solve_raw(np.eye(C.n), -uv, C, ws, tol)
    return sol.x
