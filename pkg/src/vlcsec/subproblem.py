"""Per-iteration convex subproblem of the jamming-precoder design.

One outer iteration maximizes the linearized information objective over the
scaled variables u = (v, w) subject to the eavesdropper-SINR constraint
(its jamming benefit linearized about the previous iterate) and one
quadratic power constraint per luminaire. After rearrangement every
constraint is a positive-semidefinite quadratic

    || F_j u ||^2  +  a_j' u  <=  b_j

so the problem is solved directly with a primal-dual interior-point
method on the smooth formulation; KKT residuals are driven below the
requested tolerances.

Scaling: the working variables are sqrt(c_B)-multiples of the transformed
precoders, which makes every constraint O(1) regardless of the (tiny)
channel-gain magnitudes. Feasibility and KKT residuals are reported in
this normalized space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITERS = "max-iters"
STATUS_INFEASIBLE = "infeasible-detected"

DEFAULT_FEAS_TOL = 1e-8
DEFAULT_OPT_TOL = 1e-8

_MU_FACTOR = 10.0
_LS_ALPHA = 0.01
_LS_BETA = 0.5
_MAX_IPM_ITERS = 200


class SubproblemError(ValueError):
    """Raised for malformed subproblem data."""


class InfeasibleRecoveryError(RuntimeError):
    """Raised when the scaling variable of the fractional transform cannot
    be recovered; indicates a solver contract violation."""


@dataclass(frozen=True)
class TildeData:
    """Design-time quantities evaluated at the per-luminaire power caps.

    h_eff_b / h_eff_e: attenuation-weighted channels h * R_cap.
    c_b / c_e: clipping-plus-receiver noise power at each receiver,
        (n_c h . s_clip)^2 + noise_norm.
    """

    h_eff_b: np.ndarray
    h_eff_e: np.ndarray
    c_b: float
    c_e: float
    r_factors: np.ndarray
    clip_noise_std: np.ndarray
    noise_norm_b: float
    noise_norm_e: float
    n_chips: int

    def __post_init__(self):
        if self.c_b <= 0 or self.c_e <= 0:
            raise SubproblemError("noise constants c_b, c_e must be > 0")


@dataclass(frozen=True)
class QuadConstraint:
    """Convex quadratic constraint ||factors @ u||^2 + linear . u <= bound."""

    factors: np.ndarray
    linear: np.ndarray
    bound: float
    label: str = ""

    def value(self, u: np.ndarray) -> float:
        fu = self.factors @ u
        return float(fu @ fu + self.linear @ u - self.bound)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        return 2.0 * (self.factors.T @ (self.factors @ u)) + self.linear

    def hessian(self) -> np.ndarray:
        return 2.0 * (self.factors.T @ self.factors)


@dataclass
class CcpSubproblem:
    """One linearized design subproblem in scaled coordinates.

    Variables are u = (v, w) with v = sqrt(c_b) * v_transformed (same for
    w); ``w_prev is None`` pins the jamming precoder to zero and the
    variable space shrinks to v alone.
    """

    tilde: TildeData
    lambda_linear: float
    budgets: np.ndarray
    v_prev: np.ndarray
    w_prev: np.ndarray | None
    objective_gradient: np.ndarray = field(init=False)
    constraints: list[QuadConstraint] = field(init=False)

    @property
    def n_lum(self) -> int:
        return len(self.budgets)

    @property
    def n_vars(self) -> int:
        return self.n_lum if self.w_prev is None else 2 * self.n_lum

    @property
    def fix_w(self) -> bool:
        return self.w_prev is None

    def objective_value(self, u: np.ndarray) -> float:
        """Linearized transformed objective at u (same units as the true
        objective (n_c h_eff_b . v_transformed)^2)."""
        td = self.tilde
        nc = td.n_chips
        prev = float(td.h_eff_b @ self.v_prev)
        v = u[: self.n_lum]
        lin = 2.0 * nc * nc * prev * float(td.h_eff_b @ (v - self.v_prev))
        return ((nc * prev) ** 2 + lin) / td.c_b

    def true_objective(self, u: np.ndarray) -> float:
        """Quadratic transformed objective (n_c h_eff_b . v_transformed)^2."""
        td = self.tilde
        v = u[: self.n_lum]
        return (td.n_chips * float(td.h_eff_b @ v)) ** 2 / td.c_b

    def prev_point(self) -> np.ndarray:
        if self.fix_w:
            return self.v_prev.copy()
        return np.concatenate([self.v_prev, self.w_prev])

    def dump(self, stream) -> None:
        """Plain-text dump of the scaled problem data for external checks."""
        stream.write(f"n_vars {self.n_vars}\nn_constraints {len(self.constraints)}\n")
        stream.write("objective_gradient " + " ".join(repr(x) for x in self.objective_gradient) + "\n")
        for c in self.constraints:
            stream.write(f"constraint {c.label} bound {c.bound!r}\n")
            stream.write("  linear " + " ".join(repr(x) for x in c.linear) + "\n")
            for row in c.factors:
                stream.write("  factor " + " ".join(repr(x) for x in row) + "\n")


@dataclass
class SubproblemSolution:
    """Solver output in the scaled coordinates of the subproblem."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    objective: float
    status: str
    iterations: int
    max_violation: float
    duals: np.ndarray
    kkt_stationarity: float
    kkt_complementarity: float


def build_subproblem(
    iterate: tuple[np.ndarray, np.ndarray | None],
    tilde: TildeData,
    lambda_linear: float,
    budgets: np.ndarray,
) -> CcpSubproblem:
    """Assemble the linearized subproblem about the given scaled iterate."""
    v_prev, w_prev = iterate
    v_prev = np.asarray(v_prev, dtype=float)
    budgets = np.asarray(budgets, dtype=float)
    if lambda_linear <= 0:
        raise SubproblemError("lambda must be > 0 in linear scale")
    if np.any(budgets <= 0):
        raise SubproblemError("per-luminaire budgets must be > 0")
    if not np.all(np.isfinite(v_prev)):
        raise SubproblemError("non-finite iterate")
    if w_prev is not None:
        w_prev = np.asarray(w_prev, dtype=float)
        if w_prev.shape != v_prev.shape or not np.all(np.isfinite(w_prev)):
            raise SubproblemError("non-finite or mismatched jamming iterate")
    n = len(budgets)
    if v_prev.shape != (n,):
        raise SubproblemError("iterate length does not match budgets")

    sp = CcpSubproblem(tilde=tilde, lambda_linear=lambda_linear, budgets=budgets,
                       v_prev=v_prev, w_prev=w_prev)

    td = tilde
    nc = td.n_chips
    nv = sp.n_vars
    fix_w = sp.fix_w

    # objective gradient of the linearized information term
    g = np.zeros(nv)
    g[:n] = 2.0 * nc * nc * float(td.h_eff_b @ v_prev) * td.h_eff_b / td.c_b
    sp.objective_gradient = g

    # eavesdropper constraint: v-signal and w-leakage quadratics on the
    # left, linearized jamming benefit on the right
    f_ev = nc * td.h_eff_e / math.sqrt(lambda_linear * td.c_e)   # acts on v
    f_bw = nc * td.h_eff_b / math.sqrt(td.c_b)                   # acts on w
    f_ew = nc * td.h_eff_e / math.sqrt(td.c_e)                   # jamming level
    constraints: list[QuadConstraint] = []
    if fix_w:
        factors = f_ev.reshape(1, n)
        linear = np.zeros(n)
        bound = 1.0
    else:
        jam_prev = float(f_ew @ w_prev)
        factors = np.zeros((2, nv))
        factors[0, :n] = f_ev
        factors[1, n:] = f_bw
        linear = np.zeros(nv)
        linear[n:] = -2.0 * jam_prev * f_ew
        bound = 1.0 - jam_prev ** 2
    constraints.append(QuadConstraint(factors, linear, bound, label="eve"))

    # per-luminaire power constraints
    for k in range(n):
        inv_sp = 1.0 / math.sqrt(budgets[k])
        if fix_w:
            fac = np.zeros((1, nv))
            fac[0, k] = inv_sp
        else:
            fac = np.zeros((3, nv))
            fac[0, k] = inv_sp
            fac[1, n + k] = inv_sp
            fac[2, n:] = f_bw
        constraints.append(QuadConstraint(fac, np.zeros(nv), 1.0, label=f"power{k}"))
    sp.constraints = constraints
    return sp


def _residual_norm(c, cons, u, mu, inv_t):
    r_dual = c + sum(m * q.gradient(u) for m, q in zip(mu, cons))
    r_cent = np.array([-m * q.value(u) - inv_t for m, q in zip(mu, cons)])
    return r_dual, r_cent, math.sqrt(float(r_dual @ r_dual + r_cent @ r_cent))


def _ipm(c, cons, u0, feas_tol, opt_tol, max_iters=_MAX_IPM_ITERS):
    """Primal-dual interior-point method for min c.u s.t. quadratic
    constraints <= 0, from a strictly feasible u0."""
    n = len(u0)
    m = len(cons)
    u = u0.copy()
    f = np.array([q.value(u) for q in cons])
    mu = -1.0 / f
    hess = [q.hessian() for q in cons]

    for it in range(1, max_iters + 1):
        f = np.array([q.value(u) for q in cons])
        eta = float(-f @ mu)
        t = _MU_FACTOR * m / max(eta, 1e-300)
        grads = np.array([q.gradient(u) for q in cons])
        r_dual = c + grads.T @ mu
        r_cent = -mu * f - 1.0 / t

        if float(np.linalg.norm(r_dual)) <= opt_tol and eta <= opt_tol:
            return u, mu, STATUS_OPTIMAL, it

        kkt = np.zeros((n + m, n + m))
        kkt[:n, :n] = sum(m_j * h for m_j, h in zip(mu, hess))
        kkt[:n, n:] = grads.T
        kkt[n:, :n] = -mu[:, None] * grads
        kkt[n:, n:] = -np.diag(f)
        rhs = -np.concatenate([r_dual, r_cent])
        try:
            step = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            kkt[:n, :n] += 1e-12 * np.eye(n)
            step = np.linalg.solve(kkt, rhs)
        du, dmu = step[:n], step[n:]

        # keep duals positive, then primal strictly feasible, then descend
        s = 1.0
        neg = dmu < 0
        if np.any(neg):
            s = min(1.0, 0.99 * float(np.min(-mu[neg] / dmu[neg])))
        res0 = math.sqrt(float(r_dual @ r_dual + r_cent @ r_cent))
        for _ in range(60):
            u_new = u + s * du
            if all(q.value(u_new) < 0 for q in cons):
                _, _, res = _residual_norm(c, cons, u_new, mu + s * dmu, 1.0 / t)
                if res <= (1.0 - _LS_ALPHA * s) * res0 or res < opt_tol:
                    break
            s *= _LS_BETA
        else:
            return u, mu, STATUS_MAX_ITERS, it
        u = u + s * du
        mu = mu + s * dmu
    return u, mu, STATUS_MAX_ITERS, max_iters


def _strictly_feasible_start(sp: CcpSubproblem):
    """A strictly interior point: the origin when every bound is positive,
    otherwise a shrunk previous iterate, otherwise a phase-I solve."""
    n = sp.n_vars
    cons = sp.constraints
    zero = np.zeros(n)
    if all(q.value(zero) < -1e-12 for q in cons):
        return zero, STATUS_OPTIMAL
    prev = sp.prev_point()
    for theta in (0.999, 0.99, 0.9, 0.5):
        cand = theta * prev
        if all(q.value(cand) < -1e-10 for q in cons):
            return cand, STATUS_OPTIMAL

    # phase-I: minimize s subject to f_j(u) <= s
    aug_cons = []
    for q in cons:
        fac = np.hstack([q.factors, np.zeros((q.factors.shape[0], 1))])
        lin = np.append(q.linear, -1.0)
        aug_cons.append(QuadConstraint(fac, lin, q.bound, label=q.label))
    s0 = max(q.value(zero) for q in cons) + 1.0
    u_aug = np.append(zero, s0)
    c_aug = np.zeros(n + 1)
    c_aug[n] = 1.0
    u_aug, _, status, _ = _ipm(c_aug, aug_cons, u_aug, 1e-10, 1e-10)
    u_cand = u_aug[:n]
    if status == STATUS_OPTIMAL and all(q.value(u_cand) < -1e-12 for q in cons):
        return u_cand, STATUS_OPTIMAL
    return zero, STATUS_INFEASIBLE


def solve_subproblem(
    sp: CcpSubproblem,
    feas_tol: float = DEFAULT_FEAS_TOL,
    opt_tol: float = DEFAULT_OPT_TOL,
) -> SubproblemSolution:
    """Solve one subproblem to the requested KKT residuals.

    A zero objective gradient is a degenerate iterate: any feasible point
    is optimal and the origin is returned so the outer loop can detect
    stagnation deterministically.
    """
    n = sp.n_vars
    n_lum = sp.n_lum
    cons = sp.constraints
    g = sp.objective_gradient
    gnorm = float(np.linalg.norm(g))

    def package(u, mu, status, iters):
        v = u[:n_lum]
        w = np.zeros(n_lum) if sp.fix_w else u[n_lum:]
        grads = np.array([q.gradient(u) for q in cons])
        fvals = np.array([q.value(u) for q in cons])
        if gnorm > 0:
            stat = float(np.linalg.norm(-g / gnorm + grads.T @ mu))
        else:
            stat = 0.0
        comp = float(np.max(np.abs(mu * fvals))) if len(fvals) else 0.0
        return SubproblemSolution(
            u=u, v=v, w=w,
            objective=sp.objective_value(u),
            status=status,
            iterations=iters,
            max_violation=float(np.max(fvals)),
            duals=mu,
            kkt_stationarity=stat,
            kkt_complementarity=comp,
        )

    if gnorm == 0.0:
        return package(np.zeros(n), np.zeros(len(cons)), STATUS_OPTIMAL, 0)

    u0, start_status = _strictly_feasible_start(sp)
    if start_status == STATUS_INFEASIBLE:
        return package(u0, np.zeros(len(cons)), STATUS_INFEASIBLE, 0)

    c = -g / gnorm
    u, mu, status, iters = _ipm(c, cons, u0, feas_tol, opt_tol)
    sol = package(u, mu, status, iters)
    if sol.max_violation > feas_tol:
        sol.status = STATUS_MAX_ITERS
    return sol
