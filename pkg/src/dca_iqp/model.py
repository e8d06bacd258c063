"""Problem data, feasibility queries, random instance families and file I/O.

An instance is ``min 0.5 x'Qx + q'x`` over the polyhedron ``{x : A x >= b}``
with ``Q`` symmetric and typically indefinite.  Constraint indices are
0-based everywhere.
"""

import json
from dataclasses import dataclass

import numpy as np

from .linalg import SymMatrix

FEAS_TOL = 1e-9
ACT_TOL = 1e-8
_FAMILY1_BUDGET = 5000.0
_RESAMPLE_LIMIT = 100

__all__ = [
    "Polyhedron",
    "IqProblem",
    "GenerationError",
    "objective",
    "is_feasible",
    "active_set",
    "generate_family1",
    "generate_family2",
    "save_problem",
    "load_problem",
    "FEAS_TOL",
    "ACT_TOL",
]


class GenerationError(RuntimeError):
    """Raised when a random instance family cannot produce a feasible set."""


def _frozen_array(values, dtype=np.float64):
    a = np.array(values, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Polyhedron:
    """Feasible set ``{x : A x >= b}`` with an optional stored witness point.

    Generated instances carry a witness that certifies nonemptiness; hand
    built or loaded instances may leave it None.
    """

    A: np.ndarray
    b: np.ndarray
    witness: np.ndarray | None = None

    def __post_init__(self):
        a = np.array(self.A, dtype=np.float64)
        bb = np.array(self.b, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError(f"A must be 2-D, got shape {a.shape}")
        if bb.ndim != 1 or bb.shape[0] != a.shape[0]:
            raise ValueError(
                f"b has shape {bb.shape}, expected ({a.shape[0]},)"
            )
        if a.shape[1] < 1:
            raise ValueError("A must have at least one column")
        if not (np.isfinite(a).all() and np.isfinite(bb).all()):
            raise ValueError("constraint data has non-finite entries")
        a.setflags(write=False)
        bb.setflags(write=False)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", bb)
        if self.witness is not None:
            w = np.array(self.witness, dtype=np.float64)
            if w.shape != (a.shape[1],):
                raise ValueError(
                    f"witness has shape {w.shape}, expected ({a.shape[1]},)"
                )
            w.setflags(write=False)
            object.__setattr__(self, "witness", w)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]


@dataclass(frozen=True)
class IqProblem:
    """Quadratic objective ``0.5 x'Qx + q'x`` over a polyhedron."""

    Q: SymMatrix
    q: np.ndarray
    C: Polyhedron

    def __post_init__(self):
        if not isinstance(self.Q, SymMatrix):
            object.__setattr__(self, "Q", SymMatrix(self.Q))
        qv = np.array(self.q, dtype=np.float64)
        if qv.shape != (self.Q.n,):
            raise ValueError(f"q has shape {qv.shape}, expected ({self.Q.n},)")
        if not np.isfinite(qv).all():
            raise ValueError("q has non-finite entries")
        qv.setflags(write=False)
        object.__setattr__(self, "q", qv)
        if self.C.n != self.Q.n:
            raise ValueError(
                f"polyhedron dimension {self.C.n} does not match Q ({self.Q.n})"
            )

    @property
    def n(self):
        return self.Q.n


def objective(p, x):
    """Objective value ``0.5 x'Qx + q'x``."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.shape != (p.n,):
        raise ValueError(f"x has shape {xv.shape}, expected ({p.n},)")
    return float(0.5 * (xv @ p.Q.a @ xv) + p.q @ xv)


def is_feasible(C, x, feas_tol=FEAS_TOL):
    """True when every constraint holds within ``feas_tol``."""
    if feas_tol < 0.0:
        raise ValueError("feas_tol must be nonnegative")
    xv = np.asarray(x, dtype=np.float64)
    if xv.shape != (C.n,):
        raise ValueError(f"x has shape {xv.shape}, expected ({C.n},)")
    if C.m == 0:
        return True
    return bool((C.A @ xv - C.b).min() >= -feas_tol)


def active_set(C, x, act_tol=ACT_TOL):
    """Sorted indices of the constraints tight at ``x`` within ``act_tol``.

    ``x`` must be feasible within ``act_tol``.
    """
    xv = np.asarray(x, dtype=np.float64)
    slack = C.A @ xv - C.b
    if C.m and slack.min() < -act_tol:
        raise ValueError("x is infeasible beyond act_tol")
    return np.flatnonzero(np.abs(slack) <= act_tol)


def _mirrored_uniform_square(rng, n, low, high):
    # draw the upper triangle (diagonal included) and mirror it
    out = np.zeros((n, n))
    iu = np.triu_indices(n)
    vals = rng.uniform(low, high, iu[0].size)
    out[iu] = vals
    out[(iu[1], iu[0])] = vals
    return out


def generate_family1(n, seed):
    """Random instance on ``{x >= 0, i*x_i >= beta_i, sum_i i*x_i <= 5000}``.

    Rows are ordered sign block, lower-bound block, budget row, so
    ``m = 2n + 1``.  Entries of beta, Q and q are uniform on [0, 10] (Q is
    drawn on the upper triangle and mirrored), the start point x0 is uniform
    on [0, 5].  Draw order is beta, Q, q, x0, so equal seeds give equal
    instances.  Returns ``(problem, x0)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    beta = rng.uniform(0.0, 10.0, n)
    qmat = _mirrored_uniform_square(rng, n, 0.0, 10.0)
    qvec = rng.uniform(0.0, 10.0, n)
    x0 = rng.uniform(0.0, 5.0, n)

    idx = np.arange(1, n + 1, dtype=np.float64)
    rows = np.vstack([np.eye(n), np.diag(idx), -idx[None, :]])
    rhs = np.concatenate([np.zeros(n), beta, [-_FAMILY1_BUDGET]])
    witness = np.maximum(beta, 0.01) / idx

    cone = Polyhedron(rows, rhs, witness=witness)
    if not is_feasible(cone, witness):
        raise GenerationError(
            f"family 1 witness infeasible for n={n}, seed={seed}"
        )
    return IqProblem(SymMatrix(qmat), qvec, cone), x0


def generate_family2(n, seed):
    """Random instance on ``{x >= 0, i*x_i >= beta_i,
    10 <= x_1 + sum_{i>=2} 0.1*i*x_i <= 100}``.

    Rows are ordered sign block, lower-bound block, band lower row, band
    upper row, so ``m = 2n + 2``.  Draw ranges and order match family 1.
    Instances whose feasible set comes up empty are rejected and the seed
    advanced by one, up to 100 attempts.  Returns ``(problem, x0)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    idx = np.arange(1, n + 1, dtype=np.float64)
    band = 0.1 * idx
    band[0] = 1.0
    for attempt in range(_RESAMPLE_LIMIT):
        rng = np.random.default_rng(seed + attempt)
        beta = rng.uniform(0.0, 10.0, n)
        qmat = _mirrored_uniform_square(rng, n, 0.0, 10.0)
        qvec = rng.uniform(0.0, 10.0, n)
        x0 = rng.uniform(0.0, 5.0, n)

        # witness without an LP: componentwise minimum of the lower bounds,
        # then raise x_1 to reach the band if needed
        witness = beta / idx
        value = float(band @ witness)
        if value < 10.0:
            witness = witness.copy()
            witness[0] += 10.0 + 1e-6 - value
            value = float(band @ witness)
        if value > 100.0:
            continue

        rows = np.vstack([np.eye(n), np.diag(idx), band[None, :], -band[None, :]])
        rhs = np.concatenate([np.zeros(n), beta, [10.0], [-100.0]])
        cone = Polyhedron(rows, rhs, witness=witness)
        if not is_feasible(cone, witness):
            continue
        return IqProblem(SymMatrix(qmat), qvec, cone), x0
    raise GenerationError(
        f"family 2 produced no feasible set for n={n} after "
        f"{_RESAMPLE_LIMIT} attempts from seed={seed}"
    )


def save_problem(path, problem, x0):
    """Write an instance and its start point as JSON.

    Numbers round-trip exactly: floats are serialized as their shortest
    representation that parses back to the same double.
    """
    x0v = np.asarray(x0, dtype=np.float64)
    if x0v.shape != (problem.n,):
        raise ValueError(f"x0 has shape {x0v.shape}, expected ({problem.n},)")
    payload = {
        "n": problem.n,
        "m": problem.C.m,
        "Q": problem.Q.a.tolist(),
        "q": problem.q.tolist(),
        "A": problem.C.A.tolist(),
        "b": problem.C.b.tolist(),
        "x0": x0v.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, allow_nan=False)
        fh.write("\n")


def _field_matrix(data, key, shape, path):
    try:
        arr = np.array(data[key], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: field {key!r} is not numeric") from exc
    if arr.shape != shape:
        raise ValueError(
            f"{path}: field {key!r} has shape {arr.shape}, expected {shape}"
        )
    if not np.isfinite(arr).all():
        raise ValueError(f"{path}: field {key!r} has non-finite entries")
    return arr


def load_problem(path):
    """Read an instance written by ``save_problem``; returns (problem, x0).

    Malformed files raise ValueError with the offending line or field named.
    Loaded polyhedra carry no witness.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(
                f"{path}: parse error at line {exc.lineno} column {exc.colno}: "
                f"{exc.msg}"
            ) from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    for key in ("n", "m", "Q", "q", "A", "b", "x0"):
        if key not in data:
            raise ValueError(f"{path}: missing field {key!r}")
    n = data["n"]
    m = data["m"]
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"{path}: field 'n' must be a positive integer")
    if not isinstance(m, int) or m < 0:
        raise ValueError(f"{path}: field 'm' must be a nonnegative integer")
    qmat = _field_matrix(data, "Q", (n, n), path)
    qvec = _field_matrix(data, "q", (n,), path)
    amat = _field_matrix(data, "A", (m, n), path)
    bvec = _field_matrix(data, "b", (m,), path)
    x0 = _field_matrix(data, "x0", (n,), path)
    try:
        sym = SymMatrix(qmat)
    except ValueError as exc:
        raise ValueError(f"{path}: field 'Q': {exc}") from exc
    return IqProblem(sym, qvec, Polyhedron(amat, bvec)), x0
