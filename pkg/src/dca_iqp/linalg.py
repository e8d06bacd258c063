"""Dense symmetric linear algebra for the solver stack.

Contents:

* ``SymMatrix``: a symmetric matrix validated at construction
* ``extreme_eigenvalues``: smallest and largest eigenvalue via cyclic Jacobi
  sweeps (any dense symmetric eigensolver of comparable accuracy would be
  interchangeable here)
* ``spectral_norm``: largest absolute eigenvalue
* ``pd_solve``: Cholesky solve that refuses non positive definite input
"""

import numpy as np

from ._backend import kernels

DEFAULT_EIG_TOL = 1e-12
_MAX_SWEEPS = 60

__all__ = [
    "SymMatrix",
    "NotPositiveDefiniteError",
    "extreme_eigenvalues",
    "spectral_norm",
    "pd_solve",
]


class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky factorization meets a non-positive pivot."""


class SymMatrix:
    """Dense symmetric matrix with symmetry checked at construction.

    Entries must match their transpose exactly; use ``symmetrized`` for
    numerically almost-symmetric input.  The stored array is read-only.
    """

    __slots__ = ("a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("matrix must be at least 1x1")
        if not np.isfinite(a).all():
            raise ValueError("matrix has non-finite entries")
        if not np.array_equal(a, a.T):
            raise ValueError("matrix is not symmetric")
        a.setflags(write=False)
        self.a = a

    @classmethod
    def symmetrized(cls, entries):
        """Build from nearly symmetric input by averaging with the transpose."""
        a = np.asarray(entries, dtype=np.float64)
        return cls(0.5 * (a + a.T))

    @property
    def n(self):
        return self.a.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return np.array_equal(self.a, other.a)

    def __repr__(self):
        return f"SymMatrix(n={self.n})"


def _as_sym_array(s):
    if isinstance(s, SymMatrix):
        return s.a
    return SymMatrix(s).a


def extreme_eigenvalues(s, tol=DEFAULT_EIG_TOL):
    """Return ``(lmin, lmax)``, the extreme eigenvalues of symmetric ``s``.

    Cyclic Jacobi sweeps run until the off-diagonal Frobenius mass drops
    below ``tol`` times the Frobenius norm of ``s``.
    """
    a = _as_sym_array(s)
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    lmin, lmax, sweeps = kernels.jacobi_extreme(
        np.ascontiguousarray(a), float(tol), _MAX_SWEEPS
    )
    if sweeps < 0:
        raise ArithmeticError(
            f"Jacobi iteration did not reach the threshold in {_MAX_SWEEPS} sweeps"
        )
    return float(lmin), float(lmax)


def spectral_norm(s, tol=DEFAULT_EIG_TOL):
    """Largest absolute eigenvalue of symmetric ``s``."""
    lmin, lmax = extreme_eigenvalues(s, tol)
    return max(abs(lmin), abs(lmax))


def pd_solve(h, rhs):
    """Solve ``h y = rhs`` with ``h`` symmetric positive definite.

    Raises NotPositiveDefiniteError when the Cholesky factorization fails.
    """
    a = _as_sym_array(h)
    r = np.ascontiguousarray(np.asarray(rhs, dtype=np.float64))
    if r.ndim != 1 or r.shape[0] != a.shape[0]:
        raise ValueError(
            f"rhs has shape {r.shape}, expected ({a.shape[0]},)"
        )
    if not np.isfinite(r).all():
        raise ValueError("rhs has non-finite entries")
    y, ok = kernels.chol_solve(np.ascontiguousarray(a), r)
    if not ok:
        raise NotPositiveDefiniteError("matrix is not positive definite")
    return y
