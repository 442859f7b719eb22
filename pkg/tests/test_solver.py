"""Tests for the conic solver layer (LP, matrix SDP, LMI programs)."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from basket_bounds.solver import (LMI, LinearProgram, SemidefiniteProgram, Status,
                                  farkas_violation, lmi_farkas_violation,
                                  matrix_farkas_violation, solve_lp, solve_sdp)
from basket_bounds.solver.cones import Cone, smat, svec
from basket_bounds.solver.ipm import solve_conic
from basket_bounds.solver.sdpa import read_sdpa, write_sdpa

TOL = 1e-8


def _random_sym(rng, n):
    a = rng.normal(size=(n, n))
    return a + a.T


def _feasible_lp(seed, n=None, m=None):
    """Standard-form LP with a strictly feasible point and a bounded objective."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(3, 15))
    m = m or int(rng.integers(1, n))
    A = rng.normal(size=(m, n))
    b = A @ rng.uniform(0.1, 1.0, n)
    # c = A'y + s with s > 0 keeps the dual strictly feasible too
    c = A.T @ rng.normal(size=m) + rng.uniform(0.1, 1.0, n)
    return c, A, b


class TestLinearExamples:
    def test_single_bound(self):
        r = solve_lp(LinearProgram([1.0], A_ub=[[-1.0]], b_ub=[-1.0], lower=[-np.inf]))
        assert r.status is Status.OPTIMAL
        assert r.objective == pytest.approx(1.0, abs=1e-7)

    def test_empty_feasible_set(self):
        lp = LinearProgram([0.0], A_ub=[[1.0], [-1.0]], b_ub=[0.0, -1.0], lower=[-np.inf])
        r = solve_lp(lp)
        assert r.status is Status.INFEASIBLE
        assert r.certificate is not None and r.certificate.kind == "farkas"
        assert farkas_violation(lp, r.certificate.vector) >= TOL
        assert r.certificate.violation == pytest.approx(1.0, rel=1e-6)

    def test_simplex_face(self):
        r = solve_lp(LinearProgram([1.0, 1.0], A_ub=[[1.0, 1.0]], b_ub=[1.0], sense="maximize"))
        assert r.status is Status.OPTIMAL
        assert r.objective == pytest.approx(1.0, abs=1e-7)

    def test_unbounded_ray(self):
        r = solve_lp(LinearProgram([1.0, 0.0], A_eq=[[1.0, -1.0]], b_eq=[0.0], sense="maximize"))
        assert r.status is Status.UNBOUNDED
        ray = r.certificate.vector
        assert ray[0] > 0 and ray[0] == pytest.approx(ray[1], rel=1e-6)

    def test_free_and_boxed_variables(self):
        # min x - y with -2 <= x <= 3, y <= 5 free below
        r = solve_lp(LinearProgram([1.0, -1.0], lower=[-2.0, -np.inf], upper=[3.0, 5.0]))
        assert r.objective == pytest.approx(-7.0, abs=1e-7)
        np.testing.assert_allclose(r.primal, [-2.0, 5.0], atol=1e-6)

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_highs(self, seed):
        c, A, b = _feasible_lp(seed)
        ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        r = solve_lp(LinearProgram(c, A_eq=A, b_eq=b))
        assert ref.status == 0 and r.optimal
        assert r.objective == pytest.approx(ref.fun, abs=1e-6 * (1 + abs(ref.fun)))

    def test_infeasible_random_certificate(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(4, 6))
        # second block of rows forces sum(x) = -1 with x >= 0
        A = np.vstack([A, np.ones(6)])
        b = np.append(A[:4] @ rng.uniform(size=6), -1.0)
        lp = LinearProgram(np.zeros(6), A_eq=A, b_eq=b)
        r = solve_lp(lp)
        assert r.status is Status.INFEASIBLE
        assert farkas_violation(lp, r.certificate.vector) >= TOL


class TestInputValidation:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            LinearProgram([1.0, 2.0], A_eq=[[1.0, 2.0, 3.0]], b_eq=[1.0])

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            LinearProgram([1.0], lower=[2.0], upper=[1.0])

    def test_nonpositive_tolerance(self):
        with pytest.raises(ValueError):
            solve_lp(LinearProgram([1.0]), tolerance=0.0)

    def test_asymmetric_sdp_data(self):
        with pytest.raises(ValueError):
            SemidefiniteProgram(dim=2, objective=[[1.0, 2.0], [0.0, 1.0]])

    def test_sdp_needs_a_variable(self):
        with pytest.raises(ValueError):
            SemidefiniteProgram()


class TestSemidefiniteExamples:
    @pytest.mark.parametrize("n", [2, 3, 6, 10])
    def test_min_eigenvalue(self, n):
        C = _random_sym(np.random.default_rng(n), n)
        r = solve_sdp(SemidefiniteProgram(dim=n, objective=C, equalities=[(np.eye(n), 1.0)]))
        assert r.status is Status.OPTIMAL
        assert r.objective == pytest.approx(np.linalg.eigvalsh(C)[0], abs=1e-7)
        assert np.linalg.eigvalsh(r.primal)[0] >= -TOL

    def test_scalar_cone(self):
        # minimize 3x subject to 2x = 8, x >= 0
        r = solve_sdp(SemidefiniteProgram(dim=1, objective=[[3.0]], equalities=[([[2.0]], 8.0)]))
        assert r.objective == pytest.approx(12.0, abs=1e-7)
        assert r.primal[0, 0] == pytest.approx(4.0, abs=1e-7)

    def test_unbounded_without_equalities(self):
        w = np.array([0.12, 0.12, 0.2, 0.28, 0.28])
        r = solve_sdp(SemidefiniteProgram(dim=5, objective=np.outer(w, w), sense="maximize"))
        assert r.status is Status.UNBOUNDED
        ray = r.certificate.vector
        assert np.linalg.eigvalsh(ray)[0] >= -1e-9
        assert np.sum(np.outer(w, w) * ray) > 0

    def test_infeasible_equalities(self):
        # Tr(X) = -1 has no PSD solution
        prob = SemidefiniteProgram(dim=2, objective=np.eye(2), equalities=[(np.eye(2), -1.0)])
        r = solve_sdp(prob)
        assert r.status is Status.INFEASIBLE
        assert matrix_farkas_violation(prob, r.certificate.vector) >= TOL

    def test_lmi_max_eigenvalue(self):
        # minimize t subject to t I - C >= 0
        C = _random_sym(np.random.default_rng(7), 4)
        prob = SemidefiniteProgram(lmis=[LMI(-C, [np.eye(4)])], scalar_objective=[1.0])
        r = solve_sdp(prob)
        assert r.status is Status.OPTIMAL
        assert r.objective == pytest.approx(np.linalg.eigvalsh(C)[-1], abs=1e-7)

    def test_lmi_with_equalities(self):
        # y1 + y2 = 1 and diag(y1, y2) >= 0, minimize y1 - y2
        lmi = LMI(np.zeros((2, 2)), [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
        prob = SemidefiniteProgram(lmis=[lmi], scalar_objective=[1.0, -1.0],
                                   scalar_equalities=([[1.0, 1.0]], [1.0]))
        r = solve_sdp(prob)
        assert r.objective == pytest.approx(-1.0, abs=1e-7)

    def test_lmi_infeasible(self):
        # y >= 1 and -y >= 0 cannot hold together
        prob = SemidefiniteProgram(lmis=[LMI([[-1.0]], [[[1.0]]]), LMI([[0.0]], [[[-1.0]]])],
                                   scalar_objective=[0.0])
        r = solve_sdp(prob)
        assert r.status is Status.INFEASIBLE
        assert lmi_farkas_violation(prob, r.certificate.blocks) >= TOL

    def test_iteration_cap_reports_failure(self):
        C = _random_sym(np.random.default_rng(1), 5)
        r = solve_sdp(SemidefiniteProgram(dim=5, objective=C, equalities=[(np.eye(5), 1.0)]),
                      max_iter=2)
        assert r.status is Status.NUMERICAL_FAILURE
        assert "iteration" in r.diagnostics()

    def test_deterministic(self):
        C = _random_sym(np.random.default_rng(2), 6)
        prob = SemidefiniteProgram(dim=6, objective=C, equalities=[(np.eye(6), 1.0)])
        a, b = solve_sdp(prob), solve_sdp(prob)
        assert a.objective == b.objective
        np.testing.assert_array_equal(a.primal, b.primal)


class TestInvariants:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_weak_duality(self, seed):
        c, A, b = _feasible_lp(seed)
        r = solve_lp(LinearProgram(c, A_eq=A, b_eq=b))
        assert r.optimal
        dual_objective = b @ r.dual[:A.shape[0]]
        assert abs(r.objective - dual_objective) <= TOL * (1 + abs(r.objective))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.01, 100.0))
    def test_scaling_equivariance(self, seed, scale):
        c, A, b = _feasible_lp(seed)
        r1 = solve_lp(LinearProgram(c, A_eq=A, b_eq=b))
        r2 = solve_lp(LinearProgram(scale * c, A_eq=A, b_eq=b))
        assert r2.objective == pytest.approx(scale * r1.objective,
                                             abs=10 * TOL * (1 + abs(scale * r1.objective)))

    def test_scaling_equivariance_sdp(self):
        C = _random_sym(np.random.default_rng(5), 5)
        eq = [(np.eye(5), 1.0)]
        r1 = solve_sdp(SemidefiniteProgram(dim=5, objective=C, equalities=eq))
        r2 = solve_sdp(SemidefiniteProgram(dim=5, objective=3.5 * C, equalities=eq))
        assert r2.objective == pytest.approx(3.5 * r1.objective, abs=1e-7)
        np.testing.assert_allclose(r1.primal, r2.primal, atol=1e-5)

    @pytest.mark.parametrize("seed", range(10))
    def test_lp_as_diagonal_sdp(self, seed):
        c, A, b = _feasible_lp(seed, n=6, m=3)
        lp = solve_lp(LinearProgram(c, A_eq=A, b_eq=b))
        sdp = solve_sdp(SemidefiniteProgram(dim=6, objective=np.diag(c),
                                            equalities=[(np.diag(a), bi) for a, bi in zip(A, b)]))
        assert lp.optimal and sdp.optimal
        assert abs(lp.objective - sdp.objective) <= 10 * TOL * (1 + abs(lp.objective))

    def test_psd_primal(self):
        rng = np.random.default_rng(11)
        n = 8
        eqs = [(np.eye(n), 1.0)] + [(_random_sym(rng, n), 0.0) for _ in range(3)]
        r = solve_sdp(SemidefiniteProgram(dim=n, objective=_random_sym(rng, n), equalities=eqs))
        assert r.optimal
        assert np.linalg.eigvalsh(r.primal)[0] >= -TOL
        for A, bi in eqs:
            assert abs(np.sum(A * r.primal) - bi) <= 1e-7


def test_svec_roundtrip():
    M = _random_sym(np.random.default_rng(0), 4)
    np.testing.assert_allclose(smat(svec(M), 4), M)
    # svec preserves the trace inner product
    N = _random_sym(np.random.default_rng(1), 4)
    assert svec(M) @ svec(N) == pytest.approx(np.sum(M * N))


def test_sdpa_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    cone = Cone(nonneg=2, psd=(3, 2))
    c = rng.normal(size=cone.size)
    A = rng.normal(size=(3, cone.size))
    b = rng.normal(size=3)
    path = tmp_path / "problem.dat-s"
    write_sdpa(path, c, A, b, cone)
    c2, A2, b2, cone2 = read_sdpa(path)
    assert cone2 == cone
    np.testing.assert_allclose(c2, c, rtol=1e-15)
    np.testing.assert_allclose(A2, A, rtol=1e-15)
    np.testing.assert_allclose(b2, b, rtol=1e-15)


def test_dump_writes_sdpa(tmp_path):
    path = tmp_path / "lp.dat-s"
    solve_lp(LinearProgram([1.0, 1.0], A_eq=[[1.0, 2.0]], b_eq=[2.0]), dump=str(path))
    c, A, b, cone = read_sdpa(path)
    r = solve_conic(c, A, b, cone)
    assert r.primal_objective == pytest.approx(1.0, abs=1e-7)
