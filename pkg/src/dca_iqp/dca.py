"""DC decomposition drivers for the indefinite QP.

The objective splits as a difference of convex quadratics in two ways, each
giving one iteration map:

* algorithm "A": gradient step of length 1/rho followed by projection onto
  the feasible set; admissible when rho > 0 and rho >= lmax(Q) whenever
  lmax(Q) > 0
* algorithm "B": proximal subproblem ``min f(x) + rho/2 ||x - x_k||^2`` over
  the feasible set; admissible when rho > -lmin(Q) and rho > 0

Both drivers assert the surrogate descent inequality

    f(x_{k+1}) <= f(x_k) - gamma/2 * ||x_{k+1} - x_k||^2

with gamma the sum of the smallest eigenvalues of the two split matrices
(2*rho - lmax(Q) for "A", lmin(Q) + 2*rho for "B").  For "B" every iterate
is additionally checked against its projected fixed-point identity.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import extreme_eigenvalues
from .model import FEAS_TOL, IqProblem, is_feasible, objective
from .qp import DEFAULT_TOL, _solve_raw, project

ALG_PROJECTION = "A"
ALG_PROXIMAL = "B"
STATUS_CONVERGED = "converged"
STATUS_STEP_CAP = "step_cap"
STATUS_DIVERGED = "diverged"

_DESCENT_SLACK = 1e-8
_IMPROVE_MARGIN = 1e-9

__all__ = [
    "DcaConfig",
    "DcaRun",
    "ConfigError",
    "DescentError",
    "FixedPointError",
    "smallest_parameter",
    "projection_step",
    "proximal_step",
    "run",
    "restart",
    "ALG_PROJECTION",
    "ALG_PROXIMAL",
    "STATUS_CONVERGED",
    "STATUS_STEP_CAP",
    "STATUS_DIVERGED",
]


class ConfigError(ValueError):
    """Raised when a configuration is inadmissible for the given Q."""


class DescentError(RuntimeError):
    """Raised when an iterate violates the surrogate descent inequality."""


class FixedPointError(RuntimeError):
    """Raised when a proximal iterate fails its fixed-point identity."""


@dataclass
class DcaConfig:
    """Driver settings; admissibility against Q is checked by ``run``."""

    algorithm: str
    rho: float
    stop_tol: float = 1e-6
    max_steps: int = 1000
    enforce_asymptotic_condition: bool = False
    divergence_radius: float = 1e8

    def __post_init__(self):
        if self.algorithm not in (ALG_PROJECTION, ALG_PROXIMAL):
            raise ConfigError(
                f"algorithm must be 'A' or 'B', got {self.algorithm!r}"
            )
        if not (np.isfinite(self.rho) and self.rho > 0.0):
            raise ConfigError("rho must be a positive real")
        if not (np.isfinite(self.stop_tol) and self.stop_tol > 0.0):
            raise ConfigError("stop_tol must be positive")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        if not self.divergence_radius > 0.0:
            raise ConfigError("divergence_radius must be positive")

    def validate(self, lmin, lmax):
        """Check admissibility of rho for the chosen split."""
        if self.algorithm == ALG_PROJECTION:
            if lmax > 0.0 and self.rho < lmax:
                raise ConfigError(
                    f"algorithm A needs rho >= {lmax} (largest eigenvalue), "
                    f"got {self.rho}"
                )
        else:
            if self.rho <= -lmin:
                raise ConfigError(
                    f"algorithm B needs rho > {-lmin} (negated smallest "
                    f"eigenvalue), got {self.rho}"
                )
        if self.enforce_asymptotic_condition:
            norm_q = max(abs(lmin), abs(lmax))
            if self.rho <= norm_q:
                raise ConfigError(
                    f"asymptotic stability condition needs rho > {norm_q} "
                    f"(spectral norm), got {self.rho}"
                )


@dataclass
class DcaRun:
    """Trace of one driver run."""

    algorithm: str
    rho: float
    iterates: np.ndarray
    objective_values: np.ndarray
    step_norms: np.ndarray
    status: str
    gamma: float
    wall_time: float
    fixed_point_residuals: np.ndarray | None = None
    best: bool = field(default=False, compare=False)

    @property
    def steps(self):
        return self.iterates.shape[0] - 1

    @property
    def x_final(self):
        return self.iterates[-1]

    @property
    def f_final(self):
        return float(self.objective_values[-1])


def _smallest_from_extremes(lmin, lmax, algorithm):
    if algorithm == ALG_PROJECTION:
        return float(lmax) if lmax > 0.0 else 0.1
    return float(-lmin) + 0.1 if lmin < 0.0 else 0.1


def smallest_parameter(Q, algorithm):
    """Smallest admissible rho used as the ladder start.

    For "A" this is lmax(Q) when positive, else 0.1; for "B" it is
    -lmin(Q) + 0.1 when lmin(Q) < 0, else 0.1.
    """
    if algorithm not in (ALG_PROJECTION, ALG_PROXIMAL):
        raise ConfigError(f"algorithm must be 'A' or 'B', got {algorithm!r}")
    lmin, lmax = extreme_eigenvalues(Q)
    return _smallest_from_extremes(lmin, lmax, algorithm)


def _gamma(lmin, lmax, algorithm, rho):
    if algorithm == ALG_PROJECTION:
        return 2.0 * rho - lmax
    return lmin + 2.0 * rho


def projection_step(p, x_k, rho, tol=DEFAULT_TOL):
    """One gradient-projection update ``P_C(x_k - (Q x_k + q)/rho)``."""
    xv = np.asarray(x_k, dtype=np.float64)
    grad = p.Q.a @ xv + p.q
    return project(p.C, xv - grad / rho, tol=tol, warm_start=xv)


def _proximal_step_raw(p, h_arr, x_k, rho, tol):
    """Proximal update plus its fixed-point residual.

    The subproblem minimizer must satisfy
    ``x = P_C(x - (M x + q_k)/rho)`` with ``M = Q + rho I`` and
    ``q_k = q - rho x_k``; the residual of that identity is returned and
    checked against ``10 * tol``.
    """
    c_k = p.q - rho * x_k
    sol = _solve_raw(h_arr, c_k, p.C, x_k, tol)
    x_next = sol.x
    grad = h_arr @ x_next + c_k
    back = project(p.C, x_next - grad / rho, tol=tol, warm_start=x_next)
    residual = float(np.linalg.norm(x_next - back))
    if residual > 10.0 * tol:
        raise FixedPointError(
            f"proximal iterate misses its fixed-point identity: "
            f"residual {residual:.3e} > {10.0 * tol:.3e}"
        )
    return x_next, residual


def proximal_step(p, x_k, rho, tol=DEFAULT_TOL):
    """One proximal update; verifies the fixed-point identity internally."""
    xv = np.asarray(x_k, dtype=np.float64)
    h_arr = p.Q.a + rho * np.eye(p.n)
    x_next, _ = _proximal_step_raw(p, h_arr, xv, rho, tol)
    return x_next


def run(p, x0, cfg, *, extremes=None):
    """Iterate the configured driver from ``x0`` until a stop condition.

    Stops when the step norm falls to ``cfg.stop_tol`` (converged), after
    ``cfg.max_steps`` steps (step_cap), or when an iterate leaves the ball
    of radius ``cfg.divergence_radius`` (diverged).  Descent and, for "B",
    the fixed-point identity are asserted along the way.  ``extremes`` can
    pass precomputed extreme eigenvalues of Q to skip recomputation.
    """
    x = np.array(x0, dtype=np.float64, copy=True)
    if x.shape != (p.n,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({p.n},)")
    if not np.isfinite(x).all():
        raise ValueError("x0 has non-finite entries")
    lmin, lmax = extremes if extremes is not None else extreme_eigenvalues(p.Q)
    cfg.validate(lmin, lmax)
    gamma = _gamma(lmin, lmax, cfg.algorithm, cfg.rho)
    proximal = cfg.algorithm == ALG_PROXIMAL
    inner_tol = (
        cfg.stop_tol / 100.0 if proximal
        else min(DEFAULT_TOL, cfg.stop_tol / 100.0)
    )
    h_arr = p.Q.a + cfg.rho * np.eye(p.n) if proximal else None

    t0 = time.perf_counter()
    iterates = [x]
    values = [objective(p, x)]
    step_norms = []
    fp_residuals = [] if proximal else None
    descent_from_start = is_feasible(p.C, x, FEAS_TOL)

    status = STATUS_STEP_CAP
    if float(np.linalg.norm(x)) > cfg.divergence_radius:
        status = STATUS_DIVERGED
    else:
        for k in range(cfg.max_steps):
            if proximal:
                x_next, resid = _proximal_step_raw(p, h_arr, x, cfg.rho, inner_tol)
                fp_residuals.append(resid)
            else:
                x_next = projection_step(p, x, cfg.rho, tol=inner_tol)
            f_prev = values[-1]
            f_next = objective(p, x_next)
            delta = float(np.linalg.norm(x_next - x))
            if k >= 1 or descent_from_start:
                bound = f_prev - 0.5 * gamma * delta * delta
                if f_next > bound + _DESCENT_SLACK * (1.0 + abs(f_prev)):
                    raise DescentError(
                        f"step {k}: objective {f_next} exceeds the descent "
                        f"bound {bound}"
                    )
            iterates.append(x_next)
            values.append(f_next)
            step_norms.append(delta)
            x = x_next
            if delta <= cfg.stop_tol:
                status = STATUS_CONVERGED
                break
            if float(np.linalg.norm(x)) > cfg.divergence_radius:
                status = STATUS_DIVERGED
                break
    wall = time.perf_counter() - t0
    return DcaRun(
        algorithm=cfg.algorithm,
        rho=float(cfg.rho),
        iterates=np.array(iterates),
        objective_values=np.array(values),
        step_norms=np.array(step_norms),
        status=status,
        gamma=float(gamma),
        wall_time=wall,
        fixed_point_residuals=(
            np.array(fp_residuals) if fp_residuals is not None else None
        ),
    )


def _sample_improving_point(p, anchor, x_star, f_bar, samples, rng):
    """Best feasible point with objective below ``f_bar``, or None.

    Candidates are drawn uniformly on segments from the anchor toward
    projections of random ray points, so every candidate stays feasible.
    """
    best = None
    best_f = f_bar
    scale = 10.0 * (1.0 + float(np.linalg.norm(x_star - anchor))
                    + float(np.linalg.norm(anchor)))
    for _ in range(samples):
        d = rng.standard_normal(p.n)
        nd = float(np.linalg.norm(d))
        if nd == 0.0:
            continue
        t = rng.uniform(0.0, scale)
        y = project(p.C, anchor + (t / nd) * d)
        s = rng.uniform(0.0, 1.0)
        cand = anchor + s * (y - anchor)
        fc = objective(p, cand)
        if fc < best_f:
            best_f = fc
            best = cand
    return best


def restart(p, first_run, cfg, sampler_budget=8, samples=64, seed=0):
    """Rerun from sampled improving points until none is found.

    Starting from a converged run, each attempt draws ``samples`` feasible
    candidates and relaunches the driver from the best one that improves the
    incumbent objective by more than 1e-9.  Attempts stop when the budget is
    spent, no improving point turns up, or the number of restarts reaches
    2**m (the feasible set has at most that many stationary values).
    Returns all runs, oldest first, with the best one flagged.
    """
    if first_run.status != STATUS_CONVERGED:
        raise ValueError("restart needs a converged first run")
    if sampler_budget < 0:
        raise ValueError("sampler_budget must be nonnegative")
    extremes = extreme_eigenvalues(p.Q)
    rng = np.random.default_rng(seed)
    runs = [first_run]
    anchor = p.C.witness if p.C.witness is not None else first_run.x_final
    cap = 2 ** p.C.m
    restarts = 0
    attempts = 0
    while attempts < sampler_budget and restarts < cap:
        attempts += 1
        converged = [r for r in runs if r.status == STATUS_CONVERGED]
        incumbent = min(converged, key=lambda r: r.f_final)
        u = _sample_improving_point(
            p, anchor, incumbent.x_final,
            incumbent.f_final - _IMPROVE_MARGIN, samples, rng,
        )
        if u is None:
            break
        runs.append(run(p, u, cfg, extremes=extremes))
        restarts += 1
    converged = [r for r in runs if r.status == STATUS_CONVERGED]
    best = min(converged, key=lambda r: r.f_final)
    for r in runs:
        r.best = False
    best.best = True
    return runs
