"""Pure numpy implementations of the hot kernels.

Fallback twin of ``_kernels_nb``.  Three entry points:

* ``jacobi_extreme``: extreme eigenvalues of a symmetric matrix by cyclic
  Jacobi sweeps
* ``chol_solve``: solve a symmetric positive definite system by Cholesky
* ``asqp``: primal active-set iteration for a strictly convex QP over
  ``{x : A x >= b}``

Return conventions are flag-based rather than exception-based so the numba
twin can mirror them exactly.
"""

import numpy as np
import scipy.linalg


def jacobi_extreme(a, rel_tol, max_sweeps):
    """Smallest and largest eigenvalue of symmetric ``a`` by cyclic Jacobi.

    Sweeps run until the off-diagonal Frobenius mass falls below
    ``rel_tol * ||a||_F``.  Returns ``(lmin, lmax, sweeps)``; ``sweeps`` is
    -1 when the threshold was not reached within ``max_sweeps``.
    """
    s = np.array(a, dtype=np.float64, copy=True)
    n = s.shape[0]
    if n == 1:
        return s[0, 0], s[0, 0], 0
    fro_sq = float((s * s).sum())
    thr = rel_tol * np.sqrt(fro_sq)
    thr_sq = thr * thr
    skip = thr / (2.0 * n)
    sweeps = -1
    for sweep in range(max_sweeps + 1):
        # summed directly: total minus diagonal would cancel catastrophically
        off_sq = 0.0
        for p in range(n - 1):
            row = s[p, p + 1 :]
            off_sq += 2.0 * float(row @ row)
        if off_sq <= thr_sq:
            sweeps = sweep
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = s[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (s[q, q] - s[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = t * c
                col_p = s[:, p].copy()
                col_q = s[:, q].copy()
                s[:, p] = c * col_p - sn * col_q
                s[:, q] = sn * col_p + c * col_q
                row_p = s[p, :].copy()
                row_q = s[q, :].copy()
                s[p, :] = c * row_p - sn * row_q
                s[q, :] = sn * row_p + c * row_q
                s[p, q] = 0.0
                s[q, p] = 0.0
    if sweeps < 0:
        return 0.0, 0.0, -1
    d = np.diag(s)
    return float(d.min()), float(d.max()), sweeps


def chol_solve(h, rhs):
    """Solve ``h y = rhs`` for symmetric positive definite ``h``.

    Returns ``(y, ok)``; ``ok`` is False when the factorization hits a
    non-positive pivot.
    """
    try:
        factor = scipy.linalg.cho_factor(h, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError:
        return np.zeros(rhs.shape[0]), False
    y = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    return y, True


def _ratio_step(A, b, x, p, in_w, rown, pn):
    """Largest feasible step along p; returns (alpha, blocking_index).

    Ties between blocking rows resolve to the smallest index because the
    scan is ascending and only strict improvement replaces the incumbent.
    """
    m = A.shape[0]
    alpha = 1.0
    blk = -1
    for i in range(m):
        if in_w[i]:
            continue
        d = float(A[i] @ p)
        if d < -1e-12 * (1.0 + rown[i] * pn):
            slack = float(A[i] @ x) - b[i]
            if slack < 0.0:
                slack = 0.0
            r = slack / (-d)
            if r < alpha:
                alpha = r
                blk = i
    return alpha, blk


def asqp(H, c, A, b, x0, act_tol, pivot_tol, tol, max_iter):
    """Primal active-set iteration for ``min 0.5 x'Hx + c'x`` over ``Ax >= b``.

    ``x0`` must be feasible.  Equality-constrained subproblems are solved by
    a null-space reduction (orthonormal basis from a full QR of the working
    rows) followed by a Cholesky solve of the reduced Hessian.

    Returns ``(x, lam, in_w, status, niter)`` with status 0 = optimal,
    1 = iteration cap reached, 2 = linear algebra failure.
    """
    n = H.shape[0]
    m = A.shape[0]
    x = np.array(x0, dtype=np.float64, copy=True)
    lam = np.zeros(m)
    in_w = np.zeros(m, dtype=np.bool_)
    rown = np.sqrt((A * A).sum(axis=1))

    # start from the independent subset of rows active at x0
    basis = np.zeros((n, n))
    nb = 0
    for i in range(m):
        slack = float(A[i] @ x) - b[i]
        if abs(slack) <= act_tol * (1.0 + abs(b[i])) and nb < n:
            v = A[i].copy()
            for _ in range(2):
                for t in range(nb):
                    v -= (v @ basis[t]) * basis[t]
            nv = float(np.sqrt(v @ v))
            if nv > pivot_tol * (1.0 + rown[i]):
                basis[nb] = v / nv
                nb += 1
                in_w[i] = True

    status = 1
    niter = 0
    for _it in range(max_iter):
        niter = _it + 1
        g = H @ x + c
        widx = np.flatnonzero(in_w)
        k = widx.size
        if k == 0:
            p, ok = chol_solve(H, -g)
            if not ok:
                status = 2
                break
            pn = float(np.sqrt(p @ p))
            if pn <= tol * (1.0 + np.sqrt(x @ x)):
                lam[:] = 0.0
                status = 0
                break
        else:
            wt = A[widx].T
            qf, r_full = np.linalg.qr(wt, mode="complete")
            r_hat = r_full[:k, :k]
            if np.min(np.abs(np.diag(r_hat))) <= pivot_tol * (1.0 + rown[widx].max()):
                status = 2
                break
            if k < n:
                z = qf[:, k:]
                hz = z.T @ H @ z
                gz = z.T @ g
                y, ok = chol_solve(hz, gz)
                if not ok:
                    status = 2
                    break
                p = -(z @ y)
                pn = float(np.sqrt(p @ p))
            else:
                p = np.zeros(n)
                pn = 0.0
            if pn <= tol * (1.0 + np.sqrt(x @ x)):
                q1g = qf[:, :k].T @ g
                lamw = scipy.linalg.solve_triangular(
                    r_hat, q1g, lower=False, check_finite=False
                )
                gn = float(np.sqrt(g @ g))
                jmin = -1
                lmin = -tol * (1.0 + gn)
                for j in range(k):
                    if lamw[j] < lmin:
                        lmin = lamw[j]
                        jmin = j
                if jmin < 0:
                    lam[:] = 0.0
                    lam[widx] = lamw
                    status = 0
                    break
                in_w[widx[jmin]] = False
                continue
        alpha, blk = _ratio_step(A, b, x, p, in_w, rown, pn)
        x = x + alpha * p
        if blk >= 0 and alpha < 1.0:
            in_w[blk] = True
    return x, lam, in_w, status, niter
