"""Command line interface.

Subcommands: solve, sweep, compare, enumerate, gen.  All output is
line-oriented ``key=value`` text.  ``solve`` exits 0 when the run converged,
2 on the step cap, 3 on divergence and 1 on any parse or configuration
error; the other subcommands exit 0 on success and 1 on error.
"""

import argparse
import json
import os
import sys

import numpy as np

from .bench import compare_ab, default_output_path, emit_table, sweep
from .dca import (
    STATUS_CONVERGED,
    STATUS_DIVERGED,
    STATUS_STEP_CAP,
    ConfigError,
    DcaConfig,
    restart,
    run,
    smallest_parameter,
)
from .diagnostics import (
    ScaleGuardError,
    distinct_kkt_values,
    enumerate_kkt,
    kkt_residual,
)
from .model import (
    GenerationError,
    generate_family1,
    generate_family2,
    load_problem,
    save_problem,
)
from .qp import QpInfeasibleError, QpNumericalError

_RESULTS_ENV = "DCA_IQP_RESULTS_DIR"
_EXIT_BY_STATUS = {STATUS_CONVERGED: 0, STATUS_STEP_CAP: 2, STATUS_DIVERGED: 3}


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit(2); route everything through exit code 1 instead
    def error(self, message):
        raise _CliError(message)


def _fail(message):
    print(f"error: {message}", file=sys.stderr)
    return 1


def _vector_text(x):
    return " ".join(repr(float(v)) for v in x)


def _run_payload(result, with_trace):
    payload = {
        "algorithm": result.algorithm,
        "rho": result.rho,
        "status": result.status,
        "steps": result.steps,
        "gamma": result.gamma,
        "wall_time": result.wall_time,
        "f_final": result.f_final,
        "x_final": result.x_final.tolist(),
        "objective_values": result.objective_values.tolist(),
        "step_norms": result.step_norms.tolist(),
    }
    if result.fixed_point_residuals is not None:
        payload["fixed_point_residuals"] = result.fixed_point_residuals.tolist()
    if with_trace:
        payload["iterates"] = result.iterates.tolist()
    return payload


def _cmd_solve(args):
    problem, x0 = load_problem(args.problem)
    if args.rho == "auto":
        rho = smallest_parameter(problem.Q, args.alg)
    else:
        try:
            rho = float(args.rho)
        except ValueError:
            raise _CliError(f"--rho must be a real number or 'auto', got {args.rho!r}")
    cfg = DcaConfig(
        algorithm=args.alg, rho=rho, stop_tol=args.tol, max_steps=args.max_steps
    )
    result = run(problem, x0, cfg)
    runs = [result]
    if args.restart_budget > 0 and result.status == STATUS_CONVERGED:
        runs = restart(problem, result, cfg, sampler_budget=args.restart_budget)
    best = next((r for r in runs if r.best), runs[-1])
    print(f"status={best.status}")
    print(f"algorithm={best.algorithm}")
    print(f"rho={repr(best.rho)}")
    print(f"steps={best.steps}")
    print(f"restarts={len(runs) - 1}")
    print(f"f={repr(best.f_final)}")
    print(f"kkt_residual={repr(kkt_residual(problem, best.x_final, rho))}")
    print(f"x={_vector_text(best.x_final)}")
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(_run_payload(best, args.trace), fh)
            fh.write("\n")
        print(f"json_out={args.json_out}")
    return _EXIT_BY_STATUS[best.status]


def _cmd_sweep(args):
    if args.family == 1:
        problem, x0 = generate_family1(args.n, args.seed)
    else:
        problem, x0 = generate_family2(args.n, args.seed)
    report = sweep(problem, x0, args.alg, family=args.family, seed=args.seed)
    out_dir = args.out
    path = default_output_path(out_dir, args.family, args.n, args.alg, args.seed)
    emit_table(report, path)
    print(f"family={args.family}")
    print(f"n={args.n}")
    print(f"seed={args.seed}")
    print(f"algorithm={args.alg}")
    print(f"records={len(report.records)}")
    print(f"truncated_at_cap={str(report.truncated_at_cap).lower()}")
    print(f"out={path}")
    return 0


def _cmd_compare(args):
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    except ValueError:
        raise _CliError(f"--seeds must be comma-separated integers, got {args.seeds!r}")
    if not seeds:
        raise _CliError("--seeds must name at least one seed")
    report = compare_ab(args.family, args.n, seeds)
    for row in report.rows:
        print(
            f"seed={row.seed} steps_a={row.steps_a} steps_b={row.steps_b} "
            f"f_a={repr(row.f_a)} f_b={repr(row.f_b)} "
            f"status_a={row.status_a} status_b={row.status_b}"
        )
    print(f"b_win_rate={repr(report.b_win_rate)}")
    print(f"monotone_fraction={repr(report.monotone_fraction)}")
    print(f"sweeps_total={report.sweeps_total}")
    return 0


def _cmd_enumerate(args):
    problem, _ = load_problem(args.problem)
    points = enumerate_kkt(problem)
    for pt in points:
        print(
            f"kkt f={repr(pt.f_value)} residual={repr(pt.residual)} "
            f"x={_vector_text(pt.x)} lambda={_vector_text(pt.lam)}"
        )
    values = distinct_kkt_values(points)
    print(f"kkt_count={len(points)}")
    print(f"distinct_f_count={len(values)}")
    print(f"distinct_f_values={' '.join(repr(v) for v in values)}")
    return 0


def _cmd_gen(args):
    if args.family == 1:
        problem, x0 = generate_family1(args.n, args.seed)
    else:
        problem, x0 = generate_family2(args.n, args.seed)
    directory = os.path.dirname(args.out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    save_problem(args.out, problem, x0)
    print(f"out={args.out}")
    print(f"family={args.family}")
    print(f"n={args.n}")
    print(f"m={problem.C.m}")
    print(f"seed={args.seed}")
    return 0


def _build_parser():
    parser = _Parser(prog="dca-iqp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configured solve on a problem file")
    p_solve.add_argument("problem")
    p_solve.add_argument("--alg", choices=("A", "B"), required=True)
    p_solve.add_argument("--rho", default="auto")
    p_solve.add_argument("--tol", type=float, default=1e-6)
    p_solve.add_argument("--max-steps", type=int, default=1000)
    p_solve.add_argument("--restart-budget", type=int, default=0)
    p_solve.add_argument("--json-out", default=None)
    p_solve.add_argument("--trace", action="store_true")

    p_sweep = sub.add_parser("sweep", help="run the rho ladder on a generated instance")
    p_sweep.add_argument("--family", type=int, choices=(1, 2), required=True)
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--seed", type=int, required=True)
    p_sweep.add_argument("--alg", choices=("A", "B"), required=True)
    p_sweep.add_argument(
        "--out", default=os.environ.get(_RESULTS_ENV, "results")
    )

    p_cmp = sub.add_parser("compare", help="sweep both algorithms over seeds")
    p_cmp.add_argument("--family", type=int, choices=(1, 2), required=True)
    p_cmp.add_argument("--n", type=int, required=True)
    p_cmp.add_argument("--seeds", required=True)

    p_enum = sub.add_parser("enumerate", help="list all KKT points of a small instance")
    p_enum.add_argument("problem")

    p_gen = sub.add_parser("gen", help="write a generated instance to a file")
    p_gen.add_argument("--family", type=int, choices=(1, 2), required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True)

    return parser


_HANDLERS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "enumerate": _cmd_enumerate,
    "gen": _cmd_gen,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except _CliError as exc:
        return _fail(str(exc))
    except (ConfigError, GenerationError, ScaleGuardError, ValueError) as exc:
        return _fail(str(exc))
    except (QpInfeasibleError, QpNumericalError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
