import io
import math

import numpy as np
import pytest

from vlcsec import (
    TildeData,
    build_subproblem,
    solve_subproblem,
)
from vlcsec.subproblem import (
    STATUS_OPTIMAL,
    SubproblemError,
)

cp = pytest.importorskip("cvxpy")


def synthetic_tilde(rng, n, nc=1):
    return TildeData(
        h_eff_b=rng.uniform(0.2, 2.0, n),
        h_eff_e=rng.uniform(0.2, 2.0, n),
        c_b=float(rng.uniform(0.5, 2.0)),
        c_e=float(rng.uniform(0.5, 2.0)),
        r_factors=np.ones(n),
        clip_noise_std=np.zeros(n),
        noise_norm_b=1.0,
        noise_norm_e=1.0,
        n_chips=nc,
    )


def feasible_instance(rng, n, fix_w):
    """Random instance whose linearization point satisfies its own
    constraints (as every CCP iterate does)."""
    tilde = synthetic_tilde(rng, n)
    budgets = rng.uniform(0.5, 2.0, n)
    lam = float(rng.uniform(0.3, 3.0))
    v_prev = rng.normal(0.0, 0.3, n)
    w_prev = None if fix_w else rng.normal(0.0, 0.3, n)
    for _ in range(50):
        sp = build_subproblem((v_prev, w_prev), tilde, lam, budgets)
        if all(c.value(sp.prev_point()) <= 0 for c in sp.constraints):
            return sp
        v_prev = 0.7 * v_prev
        if w_prev is not None:
            w_prev = 0.7 * w_prev
    raise AssertionError("could not build a feasible instance")


def cvxpy_oracle(sp):
    """Independent interior-point solve of the identical constraint data."""
    u = cp.Variable(sp.n_vars)
    cons = [cp.sum_squares(c.factors @ u) + c.linear @ u <= c.bound
            for c in sp.constraints]
    prob = cp.Problem(cp.Maximize(sp.objective_gradient @ u), cons)
    prob.solve(solver=cp.CLARABEL)
    assert prob.status in ("optimal", "optimal_inaccurate")
    return np.asarray(u.value)


class TestBuildSubproblem:
    def test_zero_iterate_gives_zero_gradient(self, rng):
        tilde = synthetic_tilde(rng, 3)
        sp = build_subproblem((np.zeros(3), np.zeros(3)), tilde, 1.0, np.ones(3))
        assert np.all(sp.objective_gradient == 0.0)
        sol = solve_subproblem(sp)
        assert sol.status == STATUS_OPTIMAL
        assert np.all(sol.u == 0.0)

    def test_single_luminaire_hand_expansion(self):
        # n = 1: every coefficient of the scaled subproblem is computable by
        # hand from the defining quantities
        tilde = TildeData(h_eff_b=np.array([2.0]), h_eff_e=np.array([3.0]),
                          c_b=4.0, c_e=9.0, r_factors=np.ones(1),
                          clip_noise_std=np.zeros(1), noise_norm_b=1.0,
                          noise_norm_e=1.0, n_chips=1)
        lam = 2.0
        budgets = np.array([1.5])
        v_prev = np.array([0.5])
        w_prev = np.array([0.25])
        sp = build_subproblem((v_prev, w_prev), tilde, lam, budgets)

        # objective gradient 2 nc^2 (hB . v_prev) hB / cB on the v block
        assert sp.objective_gradient[0] == pytest.approx(2 * 2.0 * 0.5 * 2.0 / 4.0)
        assert sp.objective_gradient[1] == 0.0

        eve = sp.constraints[0]
        jam_prev = 3.0 / 3.0 * 0.25  # (nc hE / sqrt(cE)) . w_prev
        # factor rows: hE/sqrt(lam cE) on v, hB/sqrt(cB) on w
        assert eve.factors[0, 0] == pytest.approx(3.0 / math.sqrt(2.0 * 9.0))
        assert eve.factors[1, 1] == pytest.approx(2.0 / math.sqrt(4.0))
        assert eve.linear[1] == pytest.approx(-2.0 * jam_prev * 1.0)
        assert eve.bound == pytest.approx(1.0 - jam_prev**2)

        power = sp.constraints[1]
        assert power.factors[0, 0] == pytest.approx(1.0 / math.sqrt(1.5))
        assert power.factors[1, 1] == pytest.approx(1.0 / math.sqrt(1.5))
        assert power.factors[2, 1] == pytest.approx(2.0 / math.sqrt(4.0))
        assert power.bound == 1.0

    def test_eve_quadratic_form_is_psd(self, rng):
        for _ in range(5):
            sp = feasible_instance(rng, 4, fix_w=False)
            eve = sp.constraints[0]
            q = eve.factors.T @ eve.factors
            eigs = np.linalg.eigvalsh(q)
            assert eigs.min() >= -1e-12

    def test_rejects_nonpositive_lambda(self, rng):
        tilde = synthetic_tilde(rng, 2)
        with pytest.raises(SubproblemError):
            build_subproblem((np.zeros(2), np.zeros(2)), tilde, 0.0, np.ones(2))

    def test_rejects_non_finite_iterate(self, rng):
        tilde = synthetic_tilde(rng, 2)
        with pytest.raises(SubproblemError):
            build_subproblem((np.array([np.nan, 0.0]), np.zeros(2)), tilde, 1.0,
                             np.ones(2))

    def test_dump_roundtrip_smoke(self, rng):
        sp = feasible_instance(rng, 2, fix_w=False)
        buf = io.StringIO()
        sp.dump(buf)
        text = buf.getvalue()
        assert "n_vars 4" in text
        assert text.count("constraint ") == len(sp.constraints)


class TestSolveSubproblem:
    def test_single_luminaire_closed_form(self):
        # maximize g v s.t. v^2 + w^2 + kappa w^2 <= rho with Eve slack:
        # optimum v = sqrt(rho) sign(g), w = 0
        tilde = TildeData(h_eff_b=np.array([1.0]), h_eff_e=np.array([0.01]),
                          c_b=1.0, c_e=1.0, r_factors=np.ones(1),
                          clip_noise_std=np.zeros(1), noise_norm_b=1.0,
                          noise_norm_e=1.0, n_chips=1)
        budgets = np.array([2.0])
        sp = build_subproblem((np.array([0.5]), np.array([0.0])), tilde,
                              1e6, budgets)
        sol = solve_subproblem(sp)
        assert sol.status == STATUS_OPTIMAL
        assert sol.v[0] == pytest.approx(math.sqrt(2.0), rel=1e-7)
        assert abs(sol.w[0]) < 1e-6

    @pytest.mark.parametrize("fix_w", [False, True])
    @pytest.mark.parametrize("trial", range(25))
    def test_matches_cvxpy_oracle(self, trial, fix_w):
        rng = np.random.default_rng(1000 + trial + 5000 * fix_w)
        n = int(rng.integers(1, 5))
        sp = feasible_instance(rng, n, fix_w)
        sol = solve_subproblem(sp)
        assert sol.status == STATUS_OPTIMAL
        u_ref = cvxpy_oracle(sp)
        g = sp.objective_gradient
        obj_ref = float(g @ u_ref)
        obj_mine = float(g @ sol.u)
        assert obj_mine == pytest.approx(obj_ref, rel=1e-6, abs=1e-9)

    @pytest.mark.parametrize("trial", range(10))
    def test_kkt_residuals(self, trial):
        rng = np.random.default_rng(2000 + trial)
        sp = feasible_instance(rng, int(rng.integers(1, 5)), fix_w=False)
        sol = solve_subproblem(sp)
        assert sol.status == STATUS_OPTIMAL
        assert sol.kkt_stationarity <= 1e-8
        assert sol.kkt_complementarity <= 1e-8
        assert sol.max_violation <= 1e-8

    def test_feasibility_on_raw_quadratic_forms(self, rng):
        # check the quadratic constraints directly, not the solver's view
        sp = feasible_instance(rng, 4, fix_w=False)
        sol = solve_subproblem(sp)
        for c in sp.constraints:
            fu = c.factors @ sol.u
            assert float(fu @ fu + c.linear @ sol.u) <= c.bound + 1e-8

    def test_deterministic(self, rng):
        sp = feasible_instance(rng, 3, fix_w=False)
        s1 = solve_subproblem(sp)
        s2 = solve_subproblem(sp)
        assert np.array_equal(s1.u, s2.u)
        assert s1.iterations == s2.iterations

    def test_stationarity_certificate(self, rng):
        # the returned duals certify first-order optimality of the
        # normalized problem: gradient of the Lagrangian nearly vanishes
        sp = feasible_instance(rng, 4, fix_w=False)
        sol = solve_subproblem(sp)
        g = sp.objective_gradient
        lagr = -g / np.linalg.norm(g) + sum(
            mu * c.gradient(sol.u) for mu, c in zip(sol.duals, sp.constraints))
        assert float(np.linalg.norm(lagr)) <= 1e-8
        assert np.all(sol.duals >= 0)
