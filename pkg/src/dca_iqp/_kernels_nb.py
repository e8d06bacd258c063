"""Numba-compiled implementations of the hot kernels.

JIT twin of ``_kernels_np``; same entry points, signatures and return
conventions.  Everything is written with explicit loops and dense float64
arrays so the whole active-set iteration compiles into one native function.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def jacobi_extreme(a, rel_tol, max_sweeps):
    s = a.copy()
    n = s.shape[0]
    if n == 1:
        return s[0, 0], s[0, 0], 0
    fro_sq = 0.0
    for i in range(n):
        for j in range(n):
            fro_sq += s[i, j] * s[i, j]
    thr = rel_tol * np.sqrt(fro_sq)
    thr_sq = thr * thr
    skip = thr / (2.0 * n)
    sweeps = -1
    for sweep in range(max_sweeps + 1):
        off_sq = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off_sq += s[i, j] * s[i, j]
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
                co = 1.0 / np.sqrt(1.0 + t * t)
                sn = t * co
                for kk in range(n):
                    skp = s[kk, p]
                    skq = s[kk, q]
                    s[kk, p] = co * skp - sn * skq
                    s[kk, q] = sn * skp + co * skq
                for kk in range(n):
                    spk = s[p, kk]
                    sqk = s[q, kk]
                    s[p, kk] = co * spk - sn * sqk
                    s[q, kk] = sn * spk + co * sqk
                s[p, q] = 0.0
                s[q, p] = 0.0
    if sweeps < 0:
        return 0.0, 0.0, -1
    lmin = s[0, 0]
    lmax = s[0, 0]
    for i in range(1, n):
        d = s[i, i]
        if d < lmin:
            lmin = d
        if d > lmax:
            lmax = d
    return lmin, lmax, sweeps


@njit(cache=True)
def chol_solve(h, rhs):
    n = h.shape[0]
    low = np.zeros((n, n))
    for j in range(n):
        d = h[j, j]
        for t in range(j):
            d -= low[j, t] * low[j, t]
        if d <= 0.0 or not np.isfinite(d):
            return np.zeros(n), False
        low[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            v = h[i, j]
            for t in range(j):
                v -= low[i, t] * low[j, t]
            low[i, j] = v / low[j, j]
    y = rhs.copy()
    for i in range(n):
        for t in range(i):
            y[i] -= low[i, t] * y[t]
        y[i] /= low[i, i]
    for i in range(n - 1, -1, -1):
        for t in range(i + 1, n):
            y[i] -= low[t, i] * y[t]
        y[i] /= low[i, i]
    return y, True


@njit(cache=True)
def _qr_full(bmat, pivot_floor):
    """Householder QR of an (n, k) matrix with k <= n.

    Returns (q, r, ok): q is (n, n) orthogonal, r is the (k, k) upper
    triangle, ok is False when a pivot falls below pivot_floor (rank
    deficient working set).
    """
    n, k = bmat.shape
    r = np.zeros((n, k))
    for i in range(n):
        for j in range(k):
            r[i, j] = bmat[i, j]
    q = np.eye(n)
    v = np.zeros(n)
    for j in range(k):
        nx = 0.0
        for i in range(j, n):
            nx += r[i, j] * r[i, j]
        nx = np.sqrt(nx)
        if nx <= pivot_floor:
            return q, r[:k, :k].copy(), False
        alpha = -nx if r[j, j] >= 0.0 else nx
        v[j] = r[j, j] - alpha
        vnorm2 = v[j] * v[j]
        for i in range(j + 1, n):
            v[i] = r[i, j]
            vnorm2 += v[i] * v[i]
        if vnorm2 > 1e-300:
            for col in range(j, k):
                dv = 0.0
                for i in range(j, n):
                    dv += v[i] * r[i, col]
                f = 2.0 * dv / vnorm2
                for i in range(j, n):
                    r[i, col] -= f * v[i]
            for row in range(n):
                dv = 0.0
                for i in range(j, n):
                    dv += q[row, i] * v[i]
                f = 2.0 * dv / vnorm2
                for i in range(j, n):
                    q[row, i] -= f * v[i]
        r[j, j] = alpha
        for i in range(j + 1, n):
            r[i, j] = 0.0
    return q, r[:k, :k].copy(), True


@njit(cache=True)
def _upper_solve(r, rhs):
    k = r.shape[0]
    y = rhs.copy()
    for i in range(k - 1, -1, -1):
        for t in range(i + 1, k):
            y[i] -= r[i, t] * y[t]
        y[i] /= r[i, i]
    return y


@njit(cache=True)
def asqp(H, c, A, b, x0, act_tol, pivot_tol, tol, max_iter):
    n = H.shape[0]
    m = A.shape[0]
    x = x0.copy()
    lam = np.zeros(m)
    in_w = np.zeros(m, np.bool_)
    rown = np.empty(m)
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += A[i, j] * A[i, j]
        rown[i] = np.sqrt(acc)

    basis = np.zeros((n, n))
    nb = 0
    for i in range(m):
        slack = np.dot(A[i], x) - b[i]
        if abs(slack) <= act_tol * (1.0 + abs(b[i])) and nb < n:
            v = A[i].copy()
            for _rep in range(2):
                for t in range(nb):
                    f = np.dot(v, basis[t])
                    for j in range(n):
                        v[j] -= f * basis[t, j]
            nv = np.sqrt(np.dot(v, v))
            if nv > pivot_tol * (1.0 + rown[i]):
                for j in range(n):
                    basis[nb, j] = v[j] / nv
                nb += 1
                in_w[i] = True

    status = 1
    niter = 0
    widx = np.empty(m, np.int64)
    p = np.zeros(n)
    for _it in range(max_iter):
        niter = _it + 1
        g = np.dot(H, x) + c
        k = 0
        for i in range(m):
            if in_w[i]:
                widx[k] = i
                k += 1
        if k == 0:
            sol, ok = chol_solve(H, -g)
            if not ok:
                status = 2
                break
            p = sol
            pn = np.sqrt(np.dot(p, p))
            if pn <= tol * (1.0 + np.sqrt(np.dot(x, x))):
                for i in range(m):
                    lam[i] = 0.0
                status = 0
                break
        else:
            wt = np.empty((n, k))
            for jj in range(k):
                row = widx[jj]
                for ii in range(n):
                    wt[ii, jj] = A[row, ii]
            max_rn = 0.0
            for jj in range(k):
                if rown[widx[jj]] > max_rn:
                    max_rn = rown[widx[jj]]
            qf, r_hat, qok = _qr_full(wt, pivot_tol * (1.0 + max_rn))
            if not qok:
                status = 2
                break
            if k < n:
                nz = n - k
                z = np.empty((n, nz))
                for ii in range(n):
                    for jj in range(nz):
                        z[ii, jj] = qf[ii, k + jj]
                hz_full = np.dot(H, z)
                hz = np.dot(z.T.copy(), hz_full)
                gz = np.dot(z.T.copy(), g)
                y, ok = chol_solve(hz, gz)
                if not ok:
                    status = 2
                    break
                p = -np.dot(z, y)
                pn = np.sqrt(np.dot(p, p))
            else:
                p = np.zeros(n)
                pn = 0.0
            if pn <= tol * (1.0 + np.sqrt(np.dot(x, x))):
                q1g = np.empty(k)
                for jj in range(k):
                    acc = 0.0
                    for ii in range(n):
                        acc += qf[ii, jj] * g[ii]
                    q1g[jj] = acc
                lamw = _upper_solve(r_hat, q1g)
                gn = np.sqrt(np.dot(g, g))
                jmin = -1
                lmin = -tol * (1.0 + gn)
                for j in range(k):
                    if lamw[j] < lmin:
                        lmin = lamw[j]
                        jmin = j
                if jmin < 0:
                    for i in range(m):
                        lam[i] = 0.0
                    for j in range(k):
                        lam[widx[j]] = lamw[j]
                    status = 0
                    break
                in_w[widx[jmin]] = False
                continue
        alpha = 1.0
        blk = -1
        for i in range(m):
            if in_w[i]:
                continue
            d = np.dot(A[i], p)
            if d < -1e-12 * (1.0 + rown[i] * pn):
                slack = np.dot(A[i], x) - b[i]
                if slack < 0.0:
                    slack = 0.0
                r = slack / (-d)
                if r < alpha:
                    alpha = r
                    blk = i
        for j in range(n):
            x[j] = x[j] + alpha * p[j]
        if blk >= 0 and alpha < 1.0:
            in_w[blk] = True
    return x, lam, in_w, status, niter
