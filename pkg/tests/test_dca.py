import numpy as np
import pytest

from dca_iqp import (
    ALG_PROJECTION,
    ALG_PROXIMAL,
    ConfigError,
    DcaConfig,
    DescentError,
    IqProblem,
    Polyhedron,
    STATUS_CONVERGED,
    STATUS_DIVERGED,
    STATUS_STEP_CAP,
    SymMatrix,
    projection_step,
    proximal_step,
    restart,
    run,
    smallest_parameter,
)
from dca_iqp import dca


@pytest.fixture
def unbounded():
    """min -x^2 over x >= 0: every positive start escapes to infinity."""
    Q = SymMatrix(np.array([[-2.0]]))
    C = Polyhedron(np.array([[1.0]]), np.array([0.0]))
    return IqProblem(Q, np.zeros(1), C)


class TestSmallestParameter:
    def test_proximal_rule(self):
        Q = SymMatrix(np.diag([-9.28, 1.0]))
        assert smallest_parameter(Q, ALG_PROXIMAL) == pytest.approx(9.38)

    def test_proximal_on_psd(self):
        assert smallest_parameter(SymMatrix(np.eye(2)), ALG_PROXIMAL) == 0.1

    def test_projection_rule(self):
        Q = SymMatrix(np.diag([-1.0, 7.25]))
        assert smallest_parameter(Q, ALG_PROJECTION) == pytest.approx(7.25)

    def test_projection_on_nsd(self):
        assert smallest_parameter(SymMatrix(-np.eye(2)), ALG_PROJECTION) == 0.1

    def test_bad_algorithm(self):
        with pytest.raises(ConfigError):
            smallest_parameter(SymMatrix(np.eye(2)), "C")


class TestSteps:
    def test_projection_step_toy(self, toy1d):
        out = projection_step(toy1d, np.zeros(1), rho=2.0)
        np.testing.assert_allclose(out, [2.0], atol=1e-12)

    def test_projection_step_clamps(self, toy1d):
        # from x=3 the gradient step lands at -1; projection lifts it to 0
        out = projection_step(toy1d, np.array([3.0]), rho=0.5)
        np.testing.assert_allclose(out, [0.0], atol=1e-12)

    def test_proximal_step_toy(self, toy1d):
        out = proximal_step(toy1d, np.zeros(1), rho=2.0)
        np.testing.assert_allclose(out, [1.0], atol=1e-9)


class TestConfig:
    def test_rejects_bad_algorithm(self):
        with pytest.raises(ConfigError):
            DcaConfig("X", 1.0)

    @pytest.mark.parametrize("rho", [0.0, -1.0, np.nan, np.inf])
    def test_rejects_bad_rho(self, rho):
        with pytest.raises(ConfigError):
            DcaConfig(ALG_PROJECTION, rho)

    def test_rejects_bad_stop_tol(self):
        with pytest.raises(ConfigError):
            DcaConfig(ALG_PROJECTION, 1.0, stop_tol=0.0)

    def test_rejects_bad_max_steps(self):
        with pytest.raises(ConfigError):
            DcaConfig(ALG_PROJECTION, 1.0, max_steps=0)

    def test_projection_needs_rho_at_least_lmax(self, toy1d):
        cfg = DcaConfig(ALG_PROJECTION, 1.0)  # lmax(Q) = 2
        with pytest.raises(ConfigError, match="largest eigenvalue"):
            run(toy1d, np.zeros(1), cfg)

    def test_proximal_needs_rho_above_neg_lmin(self, three_kkt):
        cfg = DcaConfig(ALG_PROXIMAL, 2.0)  # lmin(Q) = -2, needs > 2
        with pytest.raises(ConfigError, match="smallest"):
            run(three_kkt, np.zeros(1), cfg)

    def test_asymptotic_condition_flag(self):
        # lmin = -1 admits any B-rho above 1, but the strict flag demands
        # rho beyond the spectral norm 3
        Q = SymMatrix(np.diag([-1.0, 3.0]))
        C = Polyhedron(np.eye(2), -10.0 * np.ones(2))
        p = IqProblem(Q, np.zeros(2), C)
        loose = DcaConfig(ALG_PROXIMAL, 2.0, max_steps=5)
        assert run(p, np.zeros(2), loose).status == STATUS_CONVERGED
        with pytest.raises(ConfigError, match="spectral"):
            run(
                p,
                np.zeros(2),
                DcaConfig(ALG_PROXIMAL, 2.0, enforce_asymptotic_condition=True),
            )
        relaxed = DcaConfig(
            ALG_PROXIMAL, 3.5, enforce_asymptotic_condition=True, max_steps=5
        )
        assert run(p, np.zeros(2), relaxed).status == STATUS_CONVERGED


class TestRun:
    def test_toy_converges_projection(self, toy1d):
        res = run(toy1d, np.zeros(1), DcaConfig(ALG_PROJECTION, 2.0))
        assert res.status == STATUS_CONVERGED
        np.testing.assert_allclose(res.x_final, [2.0], atol=1e-6)
        assert res.f_final == pytest.approx(-4.0, abs=1e-9)
        assert res.fixed_point_residuals is None

    def test_toy_converges_proximal(self, toy1d):
        res = run(toy1d, np.zeros(1), DcaConfig(ALG_PROXIMAL, 2.0))
        assert res.status == STATUS_CONVERGED
        np.testing.assert_allclose(res.x_final, [2.0], atol=1e-5)
        assert res.fixed_point_residuals.shape == (res.steps,)
        assert res.fixed_point_residuals.max() <= 1e-7

    def test_trace_shapes(self, toy1d):
        res = run(toy1d, np.zeros(1), DcaConfig(ALG_PROXIMAL, 2.0))
        k = res.steps
        assert res.iterates.shape == (k + 1, 1)
        assert res.objective_values.shape == (k + 1,)
        assert res.step_norms.shape == (k,)
        assert res.gamma == pytest.approx(2.0 + 4.0)

    def test_step_cap(self, toy1d):
        res = run(toy1d, np.zeros(1), DcaConfig(ALG_PROXIMAL, 2.0, max_steps=3))
        assert res.status == STATUS_STEP_CAP
        assert res.steps == 3

    def test_divergence_projection(self, unbounded):
        res = run(unbounded, np.ones(1), DcaConfig(ALG_PROJECTION, 1.0))
        assert res.status == STATUS_DIVERGED
        assert abs(res.x_final[0]) > 1e8

    def test_divergence_proximal(self, unbounded):
        res = run(unbounded, np.ones(1), DcaConfig(ALG_PROXIMAL, 2.5))
        assert res.status == STATUS_DIVERGED

    def test_divergent_start_detected_immediately(self, unbounded):
        res = run(unbounded, np.array([1e9]), DcaConfig(ALG_PROJECTION, 1.0))
        assert res.status == STATUS_DIVERGED
        assert res.steps == 0

    def test_objective_monotone_from_feasible_start(self):
        rng = np.random.default_rng(4)
        from dca_iqp import generate_family1, project

        p, x0 = generate_family1(8, 4)
        start = project(p.C, x0)
        for alg in (ALG_PROJECTION, ALG_PROXIMAL):
            res = run(p, start, DcaConfig(alg, smallest_parameter(p.Q, alg)))
            assert res.status == STATUS_CONVERGED
            assert (np.diff(res.objective_values) <= 1e-9).all()

    def test_infeasible_start_allowed(self, toy1d):
        res = run(toy1d, np.array([-5.0]), DcaConfig(ALG_PROJECTION, 2.0))
        assert res.status == STATUS_CONVERGED
        np.testing.assert_allclose(res.x_final, [2.0], atol=1e-6)

    def test_descent_violation_raises(self, toy1d, monkeypatch):
        calls = {"k": 0}

        def bad_step(p, x_k, rho, tol=1e-9):
            calls["k"] += 1
            return np.array([10.0 + calls["k"]])  # walks uphill, stays feasible

        monkeypatch.setattr(dca, "projection_step", bad_step)
        with pytest.raises(DescentError):
            run(toy1d, np.zeros(1), DcaConfig(ALG_PROJECTION, 2.0))

    def test_precomputed_extremes_match(self, toy1d):
        cfg = DcaConfig(ALG_PROXIMAL, 2.0)
        a = run(toy1d, np.zeros(1), cfg)
        b = run(toy1d, np.zeros(1), cfg, extremes=(2.0, 2.0))
        np.testing.assert_array_equal(a.iterates, b.iterates)

    def test_x0_validation(self, toy1d):
        cfg = DcaConfig(ALG_PROJECTION, 2.0)
        with pytest.raises(ValueError, match="shape"):
            run(toy1d, np.zeros(2), cfg)
        with pytest.raises(ValueError, match="non-finite"):
            run(toy1d, np.array([np.nan]), cfg)


class TestRestart:
    def test_three_kkt_reaches_global(self, three_kkt):
        cfg = DcaConfig(ALG_PROJECTION, 0.1)
        first = run(three_kkt, np.array([0.1]), cfg)
        assert first.status == STATUS_CONVERGED
        assert first.f_final == pytest.approx(0.0, abs=1e-9)
        runs = restart(three_kkt, first, cfg, seed=0)
        best = next(r for r in runs if r.best)
        assert best.f_final == pytest.approx(-3.0, abs=1e-8)
        np.testing.assert_allclose(best.x_final, [3.0], atol=1e-6)
        assert len(runs) - 1 <= 2 ** three_kkt.C.m

    def test_no_restart_when_already_global(self, three_kkt):
        cfg = DcaConfig(ALG_PROJECTION, 0.1)
        first = run(three_kkt, np.array([2.9]), cfg)
        assert first.f_final == pytest.approx(-3.0, abs=1e-9)
        runs = restart(three_kkt, first, cfg, seed=1)
        assert runs[0].best
        assert len(runs) == 1

    def test_requires_converged_first_run(self, toy1d):
        cfg = DcaConfig(ALG_PROXIMAL, 2.0, max_steps=1)
        first = run(toy1d, np.zeros(1), cfg)
        assert first.status == STATUS_STEP_CAP
        with pytest.raises(ValueError, match="converged"):
            restart(toy1d, first, cfg)

    def test_zero_budget_returns_first(self, three_kkt):
        cfg = DcaConfig(ALG_PROJECTION, 0.1)
        first = run(three_kkt, np.array([0.1]), cfg)
        runs = restart(three_kkt, first, cfg, sampler_budget=0)
        assert len(runs) == 1 and runs[0].best
