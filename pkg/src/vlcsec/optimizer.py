"""Outer loop of the jamming-precoder design.

The fractional SINR-maximization design is transformed to a non-fractional
program by scaling the precoders with a positive variable t, then solved by
iterating convex subproblems whose concave pieces are linearized about the
previous iterate. The scaling variable is recovered at the end from the
equality constraint of the transform.

The whole loop runs in scaled coordinates (sqrt(c_B) times the transformed
precoders); physical precoders in amperes are recovered once at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clipping import stats_vector
from .metrics import (
    PrecoderPair,
    SecrecyReport,
    exact_sinr_pair,
    normalized_noise_variance,
    secrecy_rate,
    tilde_sinr_pair,
)
from .scene import RoomScene
from .subproblem import (
    DEFAULT_FEAS_TOL,
    DEFAULT_OPT_TOL,
    STATUS_INFEASIBLE,
    InfeasibleRecoveryError,
    SubproblemError,
    TildeData,
    build_subproblem,
    solve_subproblem,
)

EVE_FEAS_TOL = 1e-6
MIN_LAMBDA_LINEAR = 1e-6

# power-budget share given to the data / jamming parts of the initial point
_INIT_MARGIN_TOTAL = 0.9
_INIT_MARGIN_SPLIT = 0.45
_DEGENERATE_REL = 1e-10


class DesignError(ValueError):
    """Raised for invalid design configuration."""


@dataclass(frozen=True)
class CcpConfig:
    """Outer-loop configuration.

    lambda_db: eavesdropper SINR cap in dB (converted once to linear).
    rel_tol: relative step-norm tolerance of the stopping test.
    max_iters: iteration cap of the outer loop.
    """

    lambda_db: float = 0.0
    max_iters: int = 10
    rel_tol: float = 1e-2
    feas_tol: float = DEFAULT_FEAS_TOL
    opt_tol: float = DEFAULT_OPT_TOL

    def __post_init__(self):
        if self.max_iters < 1:
            raise DesignError("max_iters must be >= 1")
        if self.rel_tol <= 0:
            raise DesignError("rel_tol must be > 0")

    @property
    def lambda_linear(self) -> float:
        lam = 10.0 ** (self.lambda_db / 10.0)
        if lam < MIN_LAMBDA_LINEAR:
            raise DesignError(
                f"lambda {self.lambda_db} dB is below the minimum accepted "
                f"linear value {MIN_LAMBDA_LINEAR}"
            )
        return lam


@dataclass
class CcpTrace:
    """Per-iteration progress of the outer loop."""

    objectives: list[float] = field(default_factory=list)
    rel_step_v: list[float] = field(default_factory=list)
    rel_step_w: list[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0


def compute_tilde(scene: RoomScene, h_b: np.ndarray, h_e: np.ndarray,
                  budgets: np.ndarray, i_dc: float) -> TildeData:
    """Design-time clipping and noise quantities at the power caps."""
    h_b = np.asarray(h_b, dtype=float)
    h_e = np.asarray(h_e, dtype=float)
    budgets = np.asarray(budgets, dtype=float)
    r, s_clip = stats_vector(scene, budgets, i_dc)
    nc = scene.n_chips
    noise_b = normalized_noise_variance(scene, h_b, i_dc)
    noise_e = normalized_noise_variance(scene, h_e, i_dc)
    c_b = (nc * float(h_b @ s_clip)) ** 2 + noise_b
    c_e = (nc * float(h_e @ s_clip)) ** 2 + noise_e
    return TildeData(
        h_eff_b=h_b * r, h_eff_e=h_e * r, c_b=c_b, c_e=c_e,
        r_factors=r, clip_noise_std=s_clip,
        noise_norm_b=noise_b, noise_norm_e=noise_e, n_chips=nc,
    )


def _zf_direction(target: np.ndarray, interferer: np.ndarray) -> np.ndarray:
    """Project ``target`` onto the orthogonal complement of ``interferer``."""
    denom = float(interferer @ interferer)
    if denom == 0.0:
        return target.copy()
    return target - (float(target @ interferer) / denom) * interferer


def _scale_to_budget(direction: np.ndarray, budgets: np.ndarray, margin: float) -> np.ndarray:
    """Largest multiple of ``direction`` whose per-luminaire power stays
    below ``margin`` times the budget (scaled coordinates)."""
    mask = direction != 0.0
    if not np.any(mask):
        return np.zeros_like(direction)
    tau = float(np.min(np.sqrt(margin * budgets[mask]) / np.abs(direction[mask])))
    return tau * direction


def initial_point(tilde: TildeData, lambda_linear: float, budgets: np.ndarray,
                  fix_w: bool) -> tuple[np.ndarray, np.ndarray | None, bool]:
    """Feasible starting iterate in scaled coordinates.

    The data part points along the Bob channel whenever full-power
    beamforming already respects the eavesdropper cap (covers wide caps
    and the single-luminaire case); otherwise it is projected off the Eve
    channel so the cap starts with strict slack. The jamming part (when
    enabled) points along the Eve channel projected off the Bob channel:
    it leaks nothing to Bob, and it gives the linearized jamming benefit a
    nonzero gradient at the first iteration, without which the jamming
    precoder could never leave zero.

    Returns (v0, w0, degenerate); degenerate geometry (parallel channels
    with a binding cap) yields the all-zero point and a no-transmission
    result downstream.
    """
    budgets = np.asarray(budgets, dtype=float)
    h_b = tilde.h_eff_b
    h_e = tilde.h_eff_e
    nc = tilde.n_chips
    hb_norm = float(np.linalg.norm(h_b))
    margin_v = _INIT_MARGIN_TOTAL if fix_w else _INIT_MARGIN_SPLIT

    direction = None
    if hb_norm > 0.0:
        mrt = _scale_to_budget(h_b, budgets, margin_v)
        if (nc * float(h_e @ mrt)) ** 2 <= 0.995 * lambda_linear * tilde.c_e:
            direction = h_b
        else:
            p = _zf_direction(h_b, h_e)
            if float(np.linalg.norm(p)) > _DEGENERATE_REL * hb_norm:
                direction = p
    if direction is None:
        w0 = None if fix_w else np.zeros_like(budgets)
        return np.zeros_like(budgets), w0, True

    v0 = _scale_to_budget(direction, budgets, margin_v)
    if fix_w:
        return v0, None, False

    q = _zf_direction(h_e, h_b)
    if float(np.linalg.norm(q)) <= _DEGENERATE_REL * float(np.linalg.norm(h_e)):
        # Eve indistinguishable from Bob: jamming cannot help, start at zero
        return v0, np.zeros_like(budgets), False
    w0 = _scale_to_budget(q, budgets, _INIT_MARGIN_SPLIT)
    return v0, w0, False


def _rel_step(new: np.ndarray, old: np.ndarray, scale: float) -> float:
    """Relative step norm with a floor tied to the overall iterate scale.

    A vanishing block (e.g. the jammer when the eavesdropper cap is slack)
    would otherwise divide a rounding-level step by a rounding-level norm
    and never register as converged.
    """
    step = float(np.linalg.norm(new - old))
    denom = max(float(np.linalg.norm(new)), 1e-9 * scale)
    if denom == 0.0:
        return 0.0 if step == 0.0 else math.inf
    return step / denom


def _solve(scene, h_b, h_e, cfg, budgets, i_dc, fix_w):
    h_b = np.asarray(h_b, dtype=float)
    h_e = np.asarray(h_e, dtype=float)
    budgets = np.asarray(budgets, dtype=float)
    if np.any(budgets <= 0):
        raise DesignError("per-luminaire budgets must be > 0")
    lam = cfg.lambda_linear

    tilde = compute_tilde(scene, h_b, h_e, budgets, i_dc)
    v_cur, w_cur, degenerate = initial_point(tilde, lam, budgets, fix_w)

    trace = CcpTrace()
    for _ in range(cfg.max_iters):
        sp = build_subproblem((v_cur, w_cur), tilde, lam, budgets)
        sol = solve_subproblem(sp, feas_tol=cfg.feas_tol, opt_tol=cfg.opt_tol)
        if sol.status == STATUS_INFEASIBLE:
            raise SubproblemError(
                "subproblem reported infeasible; the origin should always be "
                "feasible, this indicates a solver defect"
            )
        v_new = sol.v
        w_new = None if fix_w else sol.w
        scale = float(np.linalg.norm(sol.u))
        rel_v = _rel_step(v_new, v_cur, scale)
        rel_w = 0.0 if fix_w else _rel_step(w_new, w_cur, scale)
        v_cur, w_cur = v_new, w_new

        trace.iterations += 1
        trace.objectives.append(sp.true_objective(sol.u))
        trace.rel_step_v.append(rel_v)
        trace.rel_step_w.append(rel_w)
        if rel_v <= cfg.rel_tol and rel_w <= cfg.rel_tol:
            trace.converged = True
            break

    # recover the fractional-transform scaling from its equality constraint
    w_vec = np.zeros_like(v_cur) if fix_w else w_cur
    jam_level = tilde.n_chips * float(tilde.h_eff_b @ w_vec) / math.sqrt(tilde.c_b)
    numerator = 1.0 - jam_level ** 2
    if numerator <= 0.0:
        raise InfeasibleRecoveryError(
            f"scaling-variable recovery failed (1 - jam^2 = {numerator:.3e})"
        )
    scale = math.sqrt(numerator)
    pc = PrecoderPair(v=v_cur / scale, w=w_vec / scale, budgets=budgets)

    sinr_b, sinr_e = exact_sinr_pair(scene, h_b, h_e, pc, i_dc)
    t_sinr_b, t_sinr_e = tilde_sinr_pair(scene, h_b, h_e, pc, i_dc)
    report = SecrecyReport(
        sinr_bob=sinr_b,
        sinr_eve=sinr_e,
        tilde_sinr_bob=t_sinr_b,
        tilde_sinr_eve=t_sinr_e,
        secrecy_rate=secrecy_rate(sinr_b, sinr_e),
        tilde_secrecy_rate=secrecy_rate(t_sinr_b, t_sinr_e),
        no_an=fix_w,
        power_feasible=pc.is_power_feasible(),
        eve_constraint_feasible=bool(t_sinr_e <= lam + EVE_FEAS_TOL),
        degenerate=degenerate,
        trace=trace,
    )
    return pc, report, trace


def ccp_solve(scene: RoomScene, h_b: np.ndarray, h_e: np.ndarray,
              cfg: CcpConfig, budgets: np.ndarray, i_dc: float):
    """Design data and jamming precoders for one Bob/Eve placement.

    Returns (PrecoderPair, SecrecyReport, CcpTrace).
    """
    return _solve(scene, h_b, h_e, cfg, budgets, i_dc, fix_w=False)


def no_an_solve(scene: RoomScene, h_b: np.ndarray, h_e: np.ndarray,
                cfg: CcpConfig, budgets: np.ndarray, i_dc: float):
    """Baseline design with the jamming precoder pinned to zero."""
    return _solve(scene, h_b, h_e, cfg, budgets, i_dc, fix_w=True)
