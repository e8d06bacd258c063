import csv
import json
from pathlib import Path

import numpy as np

from dca_iqp import IqProblem, Polyhedron, SymMatrix, load_problem, save_problem
from dca_iqp.cli import main

_DATA = Path(__file__).parent / "data"


def _lines(capsys):
    return capsys.readouterr().out.strip().splitlines()


def _kv(lines):
    out = {}
    for line in lines:
        if "=" in line:
            key, _, val = line.partition("=")
            out[key] = val
    return out


class TestSolve:
    def test_toy_converges(self, capsys):
        code = main(["solve", str(_DATA / "toy1d.json"), "--alg", "A", "--rho", "2"])
        assert code == 0
        kv = _kv(_lines(capsys))
        assert kv["status"] == "converged"
        assert kv["algorithm"] == "A"
        assert float(kv["x"]) == 2.0
        assert float(kv["f"]) == -4.0
        assert float(kv["kkt_residual"]) <= 1e-9

    def test_rho_auto(self, capsys):
        code = main(["solve", str(_DATA / "toy1d.json"), "--alg", "B", "--rho", "auto"])
        assert code == 0
        kv = _kv(_lines(capsys))
        assert kv["status"] == "converged"
        assert float(kv["rho"]) == 0.1

    def test_divergence_exit_code(self, capsys, tmp_path):
        Q = SymMatrix(np.array([[-2.0]]))
        C = Polyhedron(np.array([[1.0]]), np.zeros(1))
        path = tmp_path / "unbounded.json"
        save_problem(path, IqProblem(Q, np.zeros(1), C), np.ones(1))
        code = main(["solve", str(path), "--alg", "B", "--rho", "2.5"])
        assert code == 3
        assert _kv(_lines(capsys))["status"] == "diverged"

    def test_step_cap_exit_code(self, capsys):
        code = main(
            ["solve", str(_DATA / "toy1d.json"), "--alg", "B", "--rho", "2",
             "--max-steps", "2"]
        )
        assert code == 2

    def test_inadmissible_rho_exits_one(self, capsys):
        code = main(
            ["solve", str(_DATA / "three_kkt.json"), "--alg", "B", "--rho", "1"]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_rho_text_rejected(self, capsys):
        code = main(["solve", str(_DATA / "toy1d.json"), "--alg", "A", "--rho", "tiny"])
        assert code == 1

    def test_missing_file(self, capsys):
        code = main(["solve", "no-such-file.json", "--alg", "A"])
        assert code == 1

    def test_unknown_flag(self, capsys):
        code = main(["solve", str(_DATA / "toy1d.json"), "--alg", "A", "--zap"])
        assert code == 1

    def test_json_out(self, capsys, tmp_path):
        out = tmp_path / "run.json"
        code = main(
            ["solve", str(_DATA / "toy1d.json"), "--alg", "B", "--rho", "2",
             "--json-out", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["status"] == "converged"
        assert payload["algorithm"] == "B"
        assert abs(payload["x_final"][0] - 2.0) <= 1e-5
        assert len(payload["step_norms"]) == payload["steps"]
        assert "fixed_point_residuals" in payload
        assert "iterates" not in payload

    def test_trace_adds_iterates(self, capsys, tmp_path):
        out = tmp_path / "run.json"
        code = main(
            ["solve", str(_DATA / "toy1d.json"), "--alg", "A", "--rho", "2",
             "--json-out", str(out), "--trace"]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload["iterates"]) == payload["steps"] + 1

    def test_restart_reaches_global(self, capsys):
        code = main(
            ["solve", str(_DATA / "three_kkt.json"), "--alg", "A", "--rho", "0.5",
             "--restart-budget", "4"]
        )
        assert code == 0
        kv = _kv(_lines(capsys))
        assert abs(float(kv["f"]) - (-3.0)) <= 1e-8
        assert int(kv["restarts"]) >= 1


class TestSweep:
    def test_writes_csv(self, capsys, tmp_path):
        code = main(
            ["sweep", "--family", "1", "--n", "5", "--seed", "7", "--alg", "B",
             "--out", str(tmp_path)]
        )
        assert code == 0
        kv = _kv(_lines(capsys))
        path = Path(kv["out"])
        assert path == tmp_path / "1" / "5" / "B" / "7.csv"
        rows = list(csv.reader(open(path, newline="")))
        assert len(rows) >= 2

    def test_repeat_identical_modulo_time(self, capsys, tmp_path):
        argv = ["sweep", "--family", "1", "--n", "5", "--seed", "3", "--alg", "A"]
        snaps = []
        for sub in ("first", "second"):
            out = tmp_path / sub
            assert main(argv + ["--out", str(out)]) == 0
            rows = list(csv.reader(open(out / "1" / "5" / "A" / "3.csv", newline="")))
            snaps.append([row[:2] + row[3:] for row in rows])
        assert snaps[0] == snaps[1]

    def test_env_var_sets_default_out(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("DCA_IQP_RESULTS_DIR", str(tmp_path / "envout"))
        code = main(["sweep", "--family", "2", "--n", "4", "--seed", "1",
                     "--alg", "B"])
        assert code == 0
        kv = _kv(_lines(capsys))
        assert kv["out"].startswith(str(tmp_path / "envout"))
        assert Path(kv["out"]).exists()

    def test_n_zero_exits_one(self, capsys, tmp_path):
        code = main(
            ["sweep", "--family", "1", "--n", "0", "--seed", "0", "--alg", "A",
             "--out", str(tmp_path)]
        )
        assert code == 1


class TestCompare:
    def test_two_seeds(self, capsys):
        code = main(["compare", "--family", "1", "--n", "4", "--seeds", "0,1"])
        assert code == 0
        lines = _lines(capsys)
        seed_lines = [ln for ln in lines if ln.startswith("seed=")]
        assert len(seed_lines) == 2
        kv = _kv(lines)
        assert 0.0 <= float(kv["b_win_rate"]) <= 1.0
        assert 0.0 <= float(kv["monotone_fraction"]) <= 1.0

    def test_bad_seed_list(self, capsys):
        assert main(["compare", "--family", "1", "--n", "4", "--seeds", "a,b"]) == 1
        assert main(["compare", "--family", "1", "--n", "4", "--seeds", ","]) == 1


class TestEnumerate:
    def test_three_kkt(self, capsys):
        code = main(["enumerate", str(_DATA / "three_kkt.json")])
        assert code == 0
        lines = _lines(capsys)
        kv = _kv(lines)
        assert kv["kkt_count"] == "3"
        assert kv["distinct_f_count"] == "3"
        values = [float(v) for v in kv["distinct_f_values"].split()]
        np.testing.assert_allclose(values, [-3.0, 0.0, 1.0], atol=1e-9)
        assert sum(ln.startswith("kkt ") for ln in lines) == 3

    def test_scale_guard_exits_one(self, capsys, tmp_path):
        path = tmp_path / "big.json"
        assert main(["gen", "--family", "1", "--n", "10", "--seed", "0",
                     "--out", str(path)]) == 0
        capsys.readouterr()
        assert main(["enumerate", str(path)]) == 1
        assert "error:" in capsys.readouterr().err


class TestGen:
    def test_round_trip(self, capsys, tmp_path):
        path = tmp_path / "gen" / "prob.json"
        code = main(["gen", "--family", "2", "--n", "5", "--seed", "1",
                     "--out", str(path)])
        assert code == 0
        kv = _kv(_lines(capsys))
        assert kv["m"] == "12"
        problem, x0 = load_problem(path)
        assert problem.n == 5
        assert x0.shape == (5,)

    def test_generated_file_solvable(self, capsys, tmp_path):
        path = tmp_path / "prob.json"
        assert main(["gen", "--family", "1", "--n", "6", "--seed", "4",
                     "--out", str(path)]) == 0
        capsys.readouterr()
        assert main(["solve", str(path), "--alg", "B"]) == 0
