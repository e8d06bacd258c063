"""Parameter-sweep and comparison harness with CSV emission.

A sweep starts at the smallest admissible decomposition parameter, multiplies
it by 1.5 per rung, and records one row per rung until a run fails to
converge.  Results land in ``{out}/{family}/{n}/{algorithm}/{seed}.csv`` plus
a whitespace companion ``.dat`` holding ordinal, steps and rho.
"""

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from .dca import (
    STATUS_CONVERGED,
    STATUS_STEP_CAP,
    DcaConfig,
    _smallest_from_extremes,
    run,
)
from .diagnostics import kkt_residual
from .linalg import extreme_eigenvalues
from .model import generate_family1, generate_family2

LADDER_FACTOR = 1.5
DEFAULT_LADDER_CAP = 25
STATUS_ERROR = "error"

CSV_HEADER = ("no", "steps", "time_s", "rho", "f_final", "kkt_residual", "status")

__all__ = [
    "SweepRecord",
    "SweepReport",
    "CompareRow",
    "CompareReport",
    "rho_ladder",
    "sweep",
    "compare_ab",
    "emit_table",
    "default_output_path",
    "LADDER_FACTOR",
    "DEFAULT_LADDER_CAP",
]


@dataclass(frozen=True)
class SweepRecord:
    """One ladder rung: 1-based ordinal, run outcome and certification."""

    ordinal: int
    steps: int
    time: float
    rho: float
    f_final: float
    kkt_residual: float
    status: str


@dataclass(frozen=True)
class SweepReport:
    """All rungs recorded for one (instance, algorithm) sweep."""

    algorithm: str
    family: int
    n: int
    seed: int
    records: tuple
    truncated_at_cap: bool


@dataclass(frozen=True)
class CompareRow:
    """Head-to-head of both algorithms at their smallest parameters."""

    seed: int
    steps_a: int
    steps_b: int
    time_a: float
    time_b: float
    f_a: float
    f_b: float
    status_a: str
    status_b: str


@dataclass(frozen=True)
class CompareReport:
    family: int
    n: int
    rows: tuple
    b_win_rate: float
    monotone_fraction: float
    sweeps_total: int


def rho_ladder(rho0, count):
    """First ``count`` rungs from ``rho0``, growing by exact 1.5 multiplies."""
    if count < 1:
        raise ValueError("count must be at least 1")
    out = [float(rho0)]
    for _ in range(count - 1):
        out.append(out[-1] * LADDER_FACTOR)
    return out


def _generate(family, n, seed):
    if family == 1:
        return generate_family1(n, seed)
    if family == 2:
        return generate_family2(n, seed)
    raise ValueError(f"family must be 1 or 2, got {family}")


def sweep(problem, x0, algorithm, ladder_cap=DEFAULT_LADDER_CAP, *,
          family=0, seed=0, stop_tol=1e-6, max_steps=1000):
    """Run the rho ladder for one instance and algorithm.

    The ladder starts at the smallest admissible parameter for ``problem``
    and stops after the first rung whose run does not converge (that rung is
    still recorded) or after ``ladder_cap`` rungs.  Solver errors on a rung
    are recorded with status "error" and end the sweep.
    """
    if ladder_cap < 1:
        raise ValueError("ladder_cap must be at least 1")
    extremes = extreme_eigenvalues(problem.Q)
    rho = _smallest_from_extremes(extremes[0], extremes[1], algorithm)
    records = []
    for ordinal in range(1, ladder_cap + 1):
        cfg = DcaConfig(
            algorithm=algorithm, rho=rho, stop_tol=stop_tol, max_steps=max_steps
        )
        t0 = time.perf_counter()
        try:
            result = run(problem, x0, cfg, extremes=extremes)
            elapsed = time.perf_counter() - t0
            record = SweepRecord(
                ordinal=ordinal,
                steps=result.steps,
                time=elapsed,
                rho=rho,
                f_final=result.f_final,
                kkt_residual=kkt_residual(problem, result.x_final, rho),
                status=result.status,
            )
        except Exception:
            elapsed = time.perf_counter() - t0
            record = SweepRecord(
                ordinal=ordinal,
                steps=0,
                time=elapsed,
                rho=rho,
                f_final=float("nan"),
                kkt_residual=float("nan"),
                status=STATUS_ERROR,
            )
        records.append(record)
        if record.status != STATUS_CONVERGED:
            break
        rho = rho * LADDER_FACTOR
    truncated = bool(records) and records[-1].status == STATUS_STEP_CAP
    return SweepReport(
        algorithm=algorithm,
        family=family,
        n=problem.n,
        seed=seed,
        records=tuple(records),
        truncated_at_cap=truncated,
    )


def _non_decreasing(steps):
    return all(b >= a for a, b in zip(steps, steps[1:]))


def compare_ab(family, n, seeds, *, ladder_cap=DEFAULT_LADDER_CAP,
               stop_tol=1e-6, max_steps=1000):
    """Sweep both algorithms per seed and aggregate the head-to-head.

    The same instance and start point back both algorithms for each seed.
    ``b_win_rate`` is the fraction of seeds where "B" needs no more steps
    than "A" at the smallest parameters (the first rung of each sweep);
    ``monotone_fraction`` is the fraction of all recorded sweeps whose step
    counts never decrease along the ladder.
    """
    rows = []
    wins = 0
    monotone = 0
    sweeps_total = 0
    for seed in seeds:
        problem, x0 = _generate(family, n, seed)
        reports = {}
        for algorithm in ("A", "B"):
            rep = sweep(
                problem, x0, algorithm, ladder_cap,
                family=family, seed=seed, stop_tol=stop_tol, max_steps=max_steps,
            )
            reports[algorithm] = rep
            counted = [r.steps for r in rep.records if r.status != STATUS_ERROR]
            if counted:
                sweeps_total += 1
                if _non_decreasing(counted):
                    monotone += 1
        first_a = reports["A"].records[0]
        first_b = reports["B"].records[0]
        rows.append(
            CompareRow(
                seed=seed,
                steps_a=first_a.steps,
                steps_b=first_b.steps,
                time_a=first_a.time,
                time_b=first_b.time,
                f_a=first_a.f_final,
                f_b=first_b.f_final,
                status_a=first_a.status,
                status_b=first_b.status,
            )
        )
        if first_b.steps <= first_a.steps:
            wins += 1
    if not rows:
        raise ValueError("seeds must be non-empty")
    return CompareReport(
        family=family,
        n=n,
        rows=tuple(rows),
        b_win_rate=wins / len(rows),
        monotone_fraction=(monotone / sweeps_total) if sweeps_total else 0.0,
        sweeps_total=sweeps_total,
    )


def default_output_path(base_dir, family, n, algorithm, seed):
    """Canonical CSV location ``{base}/{family}/{n}/{algorithm}/{seed}.csv``."""
    return os.path.join(
        base_dir, str(family), str(n), str(algorithm), f"{seed}.csv"
    )


def emit_table(report, path):
    """Write the report as CSV plus a ``.dat`` companion.

    The CSV carries one row per rung under the fixed header; floats are
    written in shortest round-trip form.  The companion holds ordinal,
    steps and rho separated by spaces.  Rerunning the same sweep reproduces
    both files byte for byte except for the time_s column.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in report.records:
            writer.writerow(
                [
                    rec.ordinal,
                    rec.steps,
                    repr(rec.time),
                    repr(rec.rho),
                    repr(rec.f_final),
                    repr(rec.kkt_residual),
                    rec.status,
                ]
            )
    dat_path = os.path.splitext(path)[0] + ".dat"
    with open(dat_path, "w", encoding="utf-8") as fh:
        for rec in report.records:
            fh.write(f"{rec.ordinal} {rec.steps} {repr(rec.rho)}\n")
    return path
