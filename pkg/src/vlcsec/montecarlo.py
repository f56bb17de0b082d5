"""Time-domain link simulation and randomized-placement experiments.

``simulate_link`` validates the clipped-link SINR model end to end: it
drives the luminaires with Gaussian data/jamming samples, hard-clips,
propagates through the LoS channel, adds receiver noise and estimates the
SINR by regressing the received signal on the data stream.

``placement_sweep`` reproduces the secrecy-versus-power experiments:
random Bob/Eve placements, one design per placement for both the jamming
and the no-jamming scheme, averaged per power point.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .clipping import stats_vector
from .metrics import PrecoderPair, normalized_noise_variance, secrecy_rate
from .optimizer import CcpConfig, ccp_solve, no_an_solve
from .scene import ReceiverPosition, RoomScene, channel_vector

BIAS_FACTOR = 2.0  # I_DC = 2 sigma_P, the 7 dB bias rule


@dataclass
class LinkSimulation:
    """Empirical link statistics from one time-domain run."""

    sinr_bob: float
    sinr_eve: float
    signal_gain_bob: float
    signal_gain_eve: float
    clip_noise_mean: np.ndarray
    n_samples: int
    seed: int


def simulate_link(scene: RoomScene, h_b: np.ndarray, h_e: np.ndarray,
                  pc: PrecoderPair, i_dc: float, n_samples: int = 1_000_000,
                  seed: int = 0) -> LinkSimulation:
    """Monte-Carlo estimate of both receivers' SINR for a fixed precoder.

    The empirical SINR is the squared regression coefficient of the
    received signal on the unit-variance data stream divided by the
    residual variance. The per-luminaire mean of the clipping distortion
    is reported as a model-error diagnostic (the analytic model treats it
    as zero).
    """
    v = np.asarray(pc.v, dtype=float)
    w = np.asarray(pc.w, dtype=float)
    if v.size == 0:
        raise ValueError("empty precoders")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(n_samples)
    z = rng.standard_normal(n_samples)
    x = v[:, None] * d + w[:, None] * z
    y = np.clip(x, scene.i_min_a - i_dc, scene.i_max_a - i_dc)

    # analytic attenuation at the actual drive powers, for the distortion
    # diagnostic only
    r_act, _ = stats_vector(scene, v ** 2 + w ** 2, i_dc)
    clip_mean = np.mean(y - r_act[:, None] * x, axis=1)

    nc = scene.n_chips
    d_power = float(d @ d)
    out = {}
    for tag, h in (("bob", h_b), ("eve", h_e)):
        h = np.asarray(h, dtype=float)
        noise_std = math.sqrt(normalized_noise_variance(scene, h, i_dc))
        r = nc * (h @ y) + noise_std * rng.standard_normal(n_samples)
        gain = float(r @ d) / d_power
        resid = r - gain * d
        out[tag] = (gain * gain / float(np.var(resid)), gain)

    return LinkSimulation(
        sinr_bob=out["bob"][0], sinr_eve=out["eve"][0],
        signal_gain_bob=out["bob"][1], signal_gain_eve=out["eve"][1],
        clip_noise_mean=clip_mean, n_samples=n_samples, seed=seed,
    )


def solve_placement(scene: RoomScene, cfg: CcpConfig, sigma_p: float,
                    bob_xy: tuple[float, float], eve_xy: tuple[float, float]) -> dict:
    """Run both schemes for one placement at one power point.

    Per-luminaire budget sigma_p^2 and DC bias from the 7 dB rule.
    Returns a flat record of exact/cap SINRs, rates and status flags.
    """
    budgets = np.full(scene.n_luminaires, sigma_p ** 2)
    i_dc = BIAS_FACTOR * sigma_p
    h_b = channel_vector(scene, ReceiverPosition(*bob_xy))
    h_e = channel_vector(scene, ReceiverPosition(*eve_xy))
    rec = {"sigma_p_a": sigma_p, "bob_x_m": bob_xy[0], "bob_y_m": bob_xy[1],
           "eve_x_m": eve_xy[0], "eve_y_m": eve_xy[1]}
    for scheme, solver in (("an", ccp_solve), ("no_an", no_an_solve)):
        pc, report, trace = solver(scene, h_b, h_e, cfg, budgets, i_dc)
        rec[scheme] = {
            "sinr_bob": report.sinr_bob,
            "sinr_eve": report.sinr_eve,
            "tilde_sinr_bob": report.tilde_sinr_bob,
            "tilde_sinr_eve": report.tilde_sinr_eve,
            "secrecy_rate": report.secrecy_rate,
            "tilde_secrecy_rate": report.tilde_secrecy_rate,
            "secrecy_rate_clamped": report.secrecy_rate_clamped,
            "degenerate": report.degenerate,
            "power_feasible": report.power_feasible,
            "eve_feasible": report.eve_constraint_feasible,
            "iterations": trace.iterations,
            "converged": trace.converged,
            "pc": pc,
        }
    return rec


def _sweep_task(args):
    scene, cfg, sigma_p, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    bob = tuple(rng.uniform([-scene.length_m / 2, -scene.width_m / 2],
                            [scene.length_m / 2, scene.width_m / 2]))
    eve = tuple(rng.uniform([-scene.length_m / 2, -scene.width_m / 2],
                            [scene.length_m / 2, scene.width_m / 2]))
    return solve_placement(scene, cfg, sigma_p, bob, eve)


def _db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def placement_sweep(scene: RoomScene, cfg: CcpConfig, sigma_p_grid,
                    n_placements: int, seed: int, workers: int = 1) -> list[dict]:
    """Average secrecy metrics over random placements per power point.

    Bob and Eve are drawn i.i.d. uniformly over the receiver plane, freshly
    per power point, from per-placement seed-sequence children so the table
    is reproducible bit for bit and independent of the worker count.
    Averaging convention: linear SINRs are averaged then converted to dB;
    secrecy rates are averaged raw (a clamped average is also reported).
    Emits one row per (sigma_p, scheme).
    """
    if n_placements < 1:
        raise ValueError("n_placements must be >= 1")
    sigma_p_grid = list(sigma_p_grid)
    master = np.random.SeedSequence(seed)
    children = master.spawn(len(sigma_p_grid) * n_placements)

    rows = []
    for si, sigma_p in enumerate(sigma_p_grid):
        tasks = [
            (scene, cfg, float(sigma_p), children[si * n_placements + j])
            for j in range(n_placements)
        ]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(_sweep_task, tasks, chunksize=8))
        else:
            records = [_sweep_task(t) for t in tasks]

        for scheme in ("an", "no_an"):
            recs = [r[scheme] for r in records]
            row = {
                "sigma_p_a": float(sigma_p),
                "i_dc_a": BIAS_FACTOR * float(sigma_p),
                "lambda_db": cfg.lambda_db,
                "scheme": scheme,
                "n_placements": n_placements,
                "degenerate_count": sum(r["degenerate"] for r in recs),
                "unconverged_count": sum(not r["converged"] for r in recs),
            }
            for key in ("sinr_bob", "sinr_eve", "tilde_sinr_bob", "tilde_sinr_eve"):
                row[f"{key}_db"] = _db(float(np.mean([r[key] for r in recs])))
            for key in ("secrecy_rate", "tilde_secrecy_rate", "secrecy_rate_clamped"):
                row[f"{key}_bits"] = float(np.mean([r[key] for r in recs]))
            rows.append(row)
    return rows
