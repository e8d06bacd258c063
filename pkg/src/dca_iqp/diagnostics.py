"""Stationarity certification and convergence probes.

* ``kkt_residual``: projected-gradient fixed-point residual; zero exactly at
  the KKT points of the indefinite program, for any positive reference rho
* ``enumerate_kkt``: exhaustive KKT enumeration over active-set candidates,
  guarded to small instances
* ``rate_estimate``: tail estimate of the root-convergence factor of a run
* ``error_bound_probe``: empirical constant for the local error bound
  ``dist(x, KKT set) <= ell * residual(x)``
* ``distinct_kkt_values``: clustered objective values over KKT points
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import dca
from .model import ACT_TOL, IqProblem, active_set, objective
from .qp import project

_SCALE_N = 6
_SCALE_M = 12
_DEDUP_TOL = 1e-7
_VALUE_GAP = 1e-7
_RESIDUAL_FLOOR = 1e-12
_TINY_DIST = 1e-14

__all__ = [
    "KktPoint",
    "RateEstimate",
    "ErrorBoundEstimate",
    "ScaleGuardError",
    "kkt_residual",
    "enumerate_kkt",
    "rate_estimate",
    "error_bound_probe",
    "distinct_kkt_values",
]


class ScaleGuardError(ValueError):
    """Raised when an enumeration is asked for an instance beyond its scale."""


@dataclass(frozen=True)
class KktPoint:
    """Stationary point with multipliers and certification data."""

    x: np.ndarray
    lam: np.ndarray
    f_value: float
    residual: float
    rho_ref: float
    active: np.ndarray


@dataclass(frozen=True)
class RateEstimate:
    """Tail contraction data; ``mu_hat`` is None for an empty window.

    ``per_k`` holds the quotients of successive distances to the limit over
    the tail window, so a strict geometric decay shows up as a constant.
    """

    mu_hat: float | None
    tail_start: int
    per_k: np.ndarray


@dataclass(frozen=True)
class ErrorBoundEstimate:
    """Empirical error-bound ratio max over accepted samples.

    ``distance_exact`` is False when the enumeration met a continuum of
    stationary points, in which case distances to the sampled
    representatives overestimate the true distance.
    """

    ell_hat: float | None
    eps_probe: float
    samples_used: int
    distance_exact: bool


def kkt_residual(p, x, rho_ref=1.0):
    """``||x - P_C(x - (Q x + q)/rho_ref)||``; zero exactly at KKT points."""
    if not rho_ref > 0.0:
        raise ValueError("rho_ref must be positive")
    xv = np.asarray(x, dtype=np.float64)
    grad = p.Q.a @ xv + p.q
    back = project(p.C, xv - grad / rho_ref, warm_start=xv)
    return float(np.linalg.norm(xv - back))


def _kkt_candidates(p, tol):
    """Yield (x, lam_alpha, alpha, from_continuum) over all active subsets."""
    n = p.n
    m = p.C.m
    Qa, qv = p.Q.a, p.q
    A, b = p.C.A, p.C.b
    for size in range(m + 1):
        for alpha in itertools.combinations(range(m), size):
            rows = A[list(alpha)] if size else np.zeros((0, n))
            k = np.zeros((n + size, n + size))
            k[:n, :n] = Qa
            if size:
                k[:n, n:] = -rows.T
                k[n:, :n] = rows
            rhs = np.concatenate([-qv, b[list(alpha)]])
            sol, _, rank, _ = np.linalg.lstsq(k, rhs, rcond=None)
            if np.linalg.norm(k @ sol - rhs) > 1e-8 * (1.0 + np.linalg.norm(rhs)):
                continue
            if rank == n + size:
                yield sol[:n], sol[n:], alpha, False
            else:
                _, _, vt = np.linalg.svd(k)
                null = vt[rank:]
                yield sol[:n], sol[n:], alpha, True
                for direction in null:
                    for step in (1.0, -1.0):
                        z = sol + step * direction
                        yield z[:n], z[n:], alpha, True


def _enumerate_kkt_impl(p, tol):
    n = p.n
    m = p.C.m
    if n > _SCALE_N or m > _SCALE_M:
        raise ScaleGuardError(
            f"enumeration is limited to n <= {_SCALE_N} and m <= {_SCALE_M}; "
            f"got n={n}, m={m}"
        )
    A, b = p.C.A, p.C.b
    kept_x = []
    kept_lam = []
    isolated = True
    for x, lam_alpha, alpha, from_continuum in _kkt_candidates(p, tol):
        if lam_alpha.size and lam_alpha.min() < -tol:
            continue
        if m and (A @ x - b).min() < -tol:
            continue
        if any(np.linalg.norm(x - prev) <= _DEDUP_TOL for prev in kept_x):
            continue
        lam = np.zeros(m)
        for j, idx in enumerate(alpha):
            lam[idx] = max(lam_alpha[j], 0.0)
        kept_x.append(x)
        kept_lam.append(lam)
        if from_continuum:
            isolated = False
    points = []
    for x, lam in zip(kept_x, kept_lam):
        points.append(
            KktPoint(
                x=x,
                lam=lam,
                f_value=objective(p, x),
                residual=kkt_residual(p, x, 1.0),
                rho_ref=1.0,
                active=active_set(p.C, x, max(ACT_TOL, tol)),
            )
        )
    points.sort(key=lambda pt: (pt.f_value, tuple(pt.x)))
    return points, isolated


def enumerate_kkt(p, tol=1e-8):
    """All KKT points of a small instance, deduplicated and sorted by value.

    Every subset of constraints is tried as an active set; consistent
    stationarity systems contribute their solutions (rank-deficient systems
    contribute representative points along their null directions, so a
    continuum shows up through samples).  Guarded to n <= 6, m <= 12.
    """
    points, _ = _enumerate_kkt_impl(p, tol)
    return points


def rate_estimate(run, x_star=None):
    """Contraction factors over the tail of a converged run.

    For consecutive iterate indices k-1, k in the tail window (the last
    half of the run) the factor is the quotient
    ``||x_k - x_star|| / ||x_{k-1} - x_star||``; pairs with either distance
    below 1e-14 are skipped, so a run that lands exactly on its limit and
    stays reports None.  ``mu_hat`` is the window maximum, or None when no
    usable pair remains.  Quotients, unlike bare k-th roots of distances,
    are invariant to the scale of the leading constant, which keeps the
    estimate below one for runs that converge in a handful of steps.
    """
    if run.status != dca.STATUS_CONVERGED:
        raise ValueError("rate_estimate needs a converged run")
    xs = run.iterates
    total = xs.shape[0] - 1
    ref = xs[-1] if x_star is None else np.asarray(x_star, dtype=np.float64)
    tail_start = max(1, total // 2)
    dists = [
        float(np.linalg.norm(xs[k] - ref)) for k in range(tail_start, total + 1)
    ]
    per_k = []
    for prev, cur in zip(dists, dists[1:]):
        if prev >= _TINY_DIST and cur >= _TINY_DIST:
            per_k.append(cur / prev)
    mu_hat = max(per_k) if per_k else None
    return RateEstimate(mu_hat=mu_hat, tail_start=tail_start, per_k=np.array(per_k))


def error_bound_probe(p, rho, samples=200, seed=0, eps_probe=0.5, probe_radius=0.5):
    """Empirical error-bound constant near the enumerated KKT set.

    Feasible points are sampled around the enumerated stationary points; a
    sample contributes ``dist(x, KKT set) / kkt_residual(x, rho)`` when its
    residual lies in (1e-12, eps_probe].  The probe window ``eps_probe`` is a
    heuristic knob and is reported back with the estimate.
    """
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    points, isolated = _enumerate_kkt_impl(p, 1e-8)
    if not points:
        return ErrorBoundEstimate(None, eps_probe, 0, isolated)
    xs = np.array([pt.x for pt in points])
    rng = np.random.default_rng(seed)
    ratios = []
    for j in range(samples):
        base = xs[j % len(xs)]
        d = rng.standard_normal(p.n)
        nd = float(np.linalg.norm(d))
        if nd == 0.0:
            continue
        t = rng.uniform(0.0, probe_radius)
        y = project(p.C, base + (t / nd) * d)
        r = kkt_residual(p, y, rho)
        if _RESIDUAL_FLOOR < r <= eps_probe:
            dist = float(np.min(np.linalg.norm(xs - y, axis=1)))
            ratios.append(dist / r)
    ell_hat = max(ratios) if ratios else None
    return ErrorBoundEstimate(ell_hat, eps_probe, len(ratios), isolated)


def distinct_kkt_values(points):
    """Representatives of the clustered objective values of KKT points.

    Values within 1e-7 of their neighbor chain into one cluster.  The count
    is checked against the hard bound 2**m on distinct stationary values.
    """
    if not points:
        return []
    values = sorted(pt.f_value for pt in points)
    reps = [values[0]]
    prev = values[0]
    for v in values[1:]:
        if v - prev > _VALUE_GAP:
            reps.append(v)
        prev = v
    m = points[0].lam.shape[0]
    if len(reps) > 2 ** m:
        raise AssertionError(
            f"{len(reps)} distinct stationary values exceed the 2**m bound "
            f"({2 ** m})"
        )
    return reps
