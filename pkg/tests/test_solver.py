"""Tests for the ADMM trace-minimization solver and its proximal pieces."""

import numpy as np
import pytest

from gramscope.gram import (
    Constraint,
    Knowledge,
    gram,
    knowledge_projective,
    numerical_rank,
    r_qm,
    rank_certificate,
    realize,
)
from gramscope.hermitian import herm_basis
from gramscope.solver import (
    SdpProblem,
    SolverOptions,
    project_knowledge,
    prox_trace_plus_knowledge,
    rank_conjugate,
    solve_trace_min,
    solver_options_from_json,
)
from gramscope.synth import born_table, sample_ensemble


def exact_kn(n, entries):
    return Knowledge(
        n=n,
        constraints=[Constraint(i=i, j=j, kind="exact", value=v) for i, j, v in entries],
    )


class TestProjectKnowledge:
    def test_pins_and_symmetrizes(self):
        kn = exact_kn(3, [(0, 1, 0.25)])
        out = project_knowledge(np.zeros((3, 3)), kn)
        assert out[0, 1] == 0.25 and out[1, 0] == 0.25
        assert out[2, 2] == 0.0

    def test_interval_clamping(self):
        kn = Knowledge(
            n=2, constraints=[Constraint(i=0, j=1, kind="interval", lo=-1.0, hi=1.0)]
        )
        assert project_knowledge(np.full((2, 2), 5.0), kn)[0, 1] == 1.0
        assert project_knowledge(np.full((2, 2), -5.0), kn)[1, 0] == -1.0
        assert project_knowledge(np.full((2, 2), 0.3), kn)[0, 1] == 0.3

    def test_is_a_projection(self):
        rng = np.random.default_rng(0)
        kn = Knowledge(
            n=4,
            constraints=[
                Constraint(i=0, j=0, kind="exact", value=2.0),
                Constraint(i=1, j=3, kind="interval", lo=0.0, hi=0.5),
            ],
        )
        m = rng.standard_normal((4, 4))
        m = 0.5 * (m + m.T)
        once = project_knowledge(m, kn)
        assert np.array_equal(project_knowledge(once, kn), once)

    def test_frobenius_nearest_sampling(self):
        # no feasible symmetric matrix beats the projection
        rng = np.random.default_rng(1)
        kn = Knowledge(
            n=3,
            constraints=[
                Constraint(i=0, j=2, kind="exact", value=1.0),
                Constraint(i=1, j=1, kind="interval", lo=-0.2, hi=0.2),
            ],
        )
        m = rng.standard_normal((3, 3))
        m = 0.5 * (m + m.T)
        best = np.linalg.norm(project_knowledge(m, kn) - m)
        for _ in range(300):
            cand = rng.standard_normal((3, 3))
            cand = project_knowledge(0.5 * (cand + cand.T), kn)
            assert np.linalg.norm(cand - m) >= best - 1e-9


class TestProxTracePlusKnowledge:
    def test_free_diagonal_shift(self):
        kn = Knowledge(n=2, constraints=[])
        out = prox_trace_plus_knowledge(np.diag([3.0, 5.0]), kn, sigma=2.0)
        assert np.allclose(out, np.diag([2.5, 4.5]))

    def test_pinned_diagonal_ignores_shift(self):
        kn = exact_kn(2, [(0, 0, 7.0)])
        out = prox_trace_plus_knowledge(np.diag([3.0, 5.0]), kn, sigma=2.0)
        assert out[0, 0] == 7.0
        assert out[1, 1] == 4.5

    def test_off_diagonal_untouched(self):
        kn = Knowledge(n=2, constraints=[])
        m = np.array([[1.0, 0.7], [0.7, 2.0]])
        out = prox_trace_plus_knowledge(m, kn, sigma=1.0)
        assert out[0, 1] == 0.7

    def test_is_the_argmin(self):
        # objective tr(X) + (sigma/2)||X - M||^2 over the knowledge set;
        # the prox must beat random feasible points
        rng = np.random.default_rng(2)
        kn = Knowledge(
            n=3,
            constraints=[
                Constraint(i=0, j=0, kind="interval", lo=0.0, hi=1.0),
                Constraint(i=1, j=2, kind="exact", value=0.4),
            ],
        )
        sigma = 1.7
        m = rng.standard_normal((3, 3))
        m = 0.5 * (m + m.T)

        def obj(x):
            return np.trace(x) + 0.5 * sigma * np.linalg.norm(x - m) ** 2

        star = prox_trace_plus_knowledge(m, kn, sigma)
        best = obj(star)
        for _ in range(500):
            cand = rng.standard_normal((3, 3))
            cand = project_knowledge(0.5 * (cand + cand.T), kn)
            assert obj(cand) >= best - 1e-9

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            prox_trace_plus_knowledge(np.eye(2), Knowledge(n=2), 0.0)


class TestSolveTraceMin:
    def test_fully_determined(self):
        # all entries pinned to a PSD matrix inside the box: the solver
        # must return it exactly
        target = np.array([[1.0, 1.0], [1.0, 2.0]])
        kn = exact_kn(2, [(0, 0, 1.0), (0, 1, 1.0), (1, 1, 2.0)])
        prob = SdpProblem(n=2, knowledge=kn, radius=5.0)
        g_hat, report = solve_trace_min(prob, SolverOptions(max_iters=5000))
        assert report.converged
        assert np.max(np.abs(g_hat.values - target)) < 1e-6

    def test_unconstrained_minimum_is_zero(self):
        prob = SdpProblem(n=4, knowledge=Knowledge(n=4), radius=3.0)
        g_hat, report = solve_trace_min(prob, SolverOptions(max_iters=5000))
        assert report.converged
        assert np.max(np.abs(g_hat.values)) < 1e-6

    def test_psd_completion_2x2(self):
        # pin diagonal (1, 1) and leave the off-diagonal free: trace is
        # fixed at 2, any |g01| <= 1 is feasible, and the minimizer is
        # determined only up to that freedom, so check feasibility
        kn = exact_kn(2, [(0, 0, 1.0), (1, 1, 1.0)])
        prob = SdpProblem(n=2, knowledge=kn, radius=4.0)
        g_hat, report = solve_trace_min(prob, SolverOptions(max_iters=5000))
        assert report.converged
        assert report.objective == pytest.approx(2.0, abs=1e-6)
        assert np.linalg.eigvalsh(g_hat.values).min() > -1e-8

    def test_off_diagonal_forces_diagonal(self):
        # min trace with g01 = 1 pinned: PSD needs g00*g11 >= 1, and
        # trace is minimized at g00 = g11 = 1
        kn = exact_kn(2, [(0, 1, 1.0)])
        prob = SdpProblem(n=2, knowledge=kn, radius=10.0)
        g_hat, report = solve_trace_min(prob, SolverOptions(max_iters=20000))
        assert report.converged
        assert np.max(np.abs(g_hat.values - np.ones((2, 2)))) < 1e-5

    def test_interval_constraint_respected(self):
        kn = Knowledge(
            n=2,
            constraints=[
                Constraint(i=0, j=1, kind="exact", value=2.0),
                Constraint(i=0, j=0, kind="interval", lo=4.0, hi=9.0),
            ],
        )
        prob = SdpProblem(n=2, knowledge=kn, radius=20.0)
        g_hat, report = solve_trace_min(prob, SolverOptions(max_iters=40000))
        assert report.converged
        # on the boundary g00 = 4, PSD forces g11 >= 1; minimum trace is 5
        assert report.objective == pytest.approx(5.0, abs=1e-4)
        assert g_hat.values[0, 0] == pytest.approx(4.0, abs=1e-5)

    def test_output_is_in_spectral_box(self):
        ens = sample_ensemble(2, 3, 3, np.random.default_rng(3))
        kn = knowledge_projective(born_table(ens), 2)
        radius = r_qm(3, 3, 2)
        prob = SdpProblem(n=kn.n, knowledge=kn, radius=radius)
        g_hat, _ = solve_trace_min(prob, SolverOptions(max_iters=3000))
        lam = np.linalg.eigvalsh(g_hat.values)
        assert lam.min() >= -1e-9
        assert lam.max() <= radius + 1e-9

    def test_deterministic(self):
        ens = sample_ensemble(2, 3, 3, np.random.default_rng(4))
        kn = knowledge_projective(born_table(ens), 2)
        prob = SdpProblem(n=kn.n, knowledge=kn, radius=r_qm(3, 3, 2))
        opts = SolverOptions(max_iters=2000)
        a, ra = solve_trace_min(prob, opts)
        b, rb = solve_trace_min(prob, opts)
        assert np.array_equal(a.values, b.values)
        assert ra.iterations == rb.iterations

    def test_objective_settles(self):
        # over the last tenth of the run the objective should be flat
        ens = sample_ensemble(2, 4, 6, np.random.default_rng(5))
        kn = knowledge_projective(born_table(ens), 2)
        prob = SdpProblem(n=kn.n, knowledge=kn, radius=r_qm(4, 6, 2))
        _, report = solve_trace_min(prob, SolverOptions(max_iters=100_000))
        assert report.converged
        tail = report.objective_history[-max(10, report.iterations // 10):]
        assert np.max(tail) - np.min(tail) < 1e-5

    def test_nonconvergence_is_reported_not_raised(self):
        kn = exact_kn(2, [(0, 1, 1.0)])
        prob = SdpProblem(n=2, knowledge=kn, radius=10.0)
        _, report = solve_trace_min(prob, SolverOptions(max_iters=3))
        assert not report.converged
        assert report.iterations == 3

    def test_warm_start_reaches_same_optimum(self):
        ens = sample_ensemble(2, 4, 5, np.random.default_rng(6))
        kn = knowledge_projective(born_table(ens), 2)
        prob = SdpProblem(n=kn.n, knowledge=kn, radius=r_qm(4, 5, 2))
        opts = SolverOptions(max_iters=100_000)
        g_hat, cold = solve_trace_min(prob, opts)
        g_warm, warm = solve_trace_min(prob, opts, warm_primal=g_hat.values)
        assert warm.converged
        assert warm.objective == pytest.approx(cold.objective, abs=1e-6)
        lam = np.linalg.eigvalsh(g_warm.values)
        assert lam.min() >= -1e-9

    def test_rejects_mismatched_knowledge(self):
        with pytest.raises(ValueError):
            SdpProblem(n=3, knowledge=Knowledge(n=2), radius=1.0)

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            SdpProblem(n=2, knowledge=Knowledge(n=2), radius=0.0)


class TestRecoveryFromData:
    def test_d2_well_determined_instance(self):
        # enough states and measurements that the completion is unique
        # and the trace minimum sits at the true Gram matrix
        rng = np.random.default_rng(7)
        ens = sample_ensemble(2, 10, 10, rng)
        g_true = gram(realize(ens, herm_basis(2)))
        table = born_table(ens)
        kn = knowledge_projective(table, 2)
        prob = SdpProblem(n=kn.n, knowledge=kn, radius=r_qm(10, 10, 2))
        g_hat, report = solve_trace_min(
            prob, SolverOptions(max_iters=60_000, primal_tol=1e-9, dual_tol=1e-9)
        )
        assert report.converged
        err = np.max(np.abs(g_hat.values - g_true.values))
        if err < 1e-4:
            assert numerical_rank(table.values) == 4
            assert rank_certificate(g_hat, 4, tau=1e-4)
        else:
            # small instances sit near the recovery phase transition; a
            # flat optimum away from the truth must still not certify
            assert not rank_certificate(g_hat, numerical_rank(table.values), tau=1e-4)


class TestRankConjugate:
    def test_below_one_is_zero(self):
        assert rank_conjugate(np.diag([0.5, -3.0, 1.0])) == 0.0

    def test_closed_form(self):
        assert rank_conjugate(np.diag([2.0, 1.5, 0.0])) == pytest.approx(1.5)

    def test_rotation_invariant(self):
        rng = np.random.default_rng(8)
        lam = np.array([3.0, 1.2, 0.4, -1.0])
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        y = (q * lam) @ q.T
        assert rank_conjugate(y) == pytest.approx(2.0 + 0.2, abs=1e-10)


class TestSolverOptionsJson:
    def test_roundtrip(self):
        opts = solver_options_from_json({"max_iters": 10, "alpha": 1.5})
        assert opts.max_iters == 10 and opts.alpha == 1.5

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            solver_options_from_json({"maxiters": 10})

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            SolverOptions(alpha=2.0)
