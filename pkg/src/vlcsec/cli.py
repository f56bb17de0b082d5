"""Command-line experiment runner.

Subcommands:

* ``convergence``: per-iteration objective trace of the design loop.
* ``sweep``: secrecy metrics versus the per-luminaire power level.
* ``single``: full report for one placement.
* ``validate``: Monte-Carlo diagnostics of the clipping statistics.

Each run writes ``<out>/<command>.csv`` plus a ``<command>_meta.txt``
sidecar carrying the seed, config hash and tool version. Exit codes:
0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import __version__
from .clipping import ClipWindow, bussgang_stats, clip_mean
from .config import ConfigError, ExperimentConfig, config_hash, load_config
from .metrics import MetricsError
from .montecarlo import BIAS_FACTOR, placement_sweep, solve_placement
from .optimizer import CcpConfig, DesignError, ccp_solve, no_an_solve
from .scene import ReceiverPosition, SceneError, channel_vector
from .subproblem import InfeasibleRecoveryError, SubproblemError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, fieldnames, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in fieldnames])


def _write_meta(path, command, args, cfg, partial, extra=None):
    lines = {
        "tool": "vlcsec",
        "version": __version__,
        "command": command,
        "seed": args.seed,
        "config_hash": config_hash(cfg),
        "partial": "true" if partial else "false",
        "sinr_averaging": "mean of linear SINRs, then dB",
        "rate_averaging": "mean of raw (unclamped) secrecy rates; clamped mean also emitted",
    }
    if extra:
        lines.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in lines.items():
            fh.write(f"{key}={val}\n")


def _parse_float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _cfg_with_lambda(cfg: ExperimentConfig, lambda_db: float) -> CcpConfig:
    opt = cfg.optimizer
    return CcpConfig(lambda_db=lambda_db, max_iters=opt.max_iters, rel_tol=opt.rel_tol,
                     feas_tol=opt.feas_tol, opt_tol=opt.opt_tol)


def _draw_positions(scene, rng):
    lo = [-scene.length_m / 2, -scene.width_m / 2]
    hi = [scene.length_m / 2, scene.width_m / 2]
    return tuple(rng.uniform(lo, hi)), tuple(rng.uniform(lo, hi))


def _cmd_convergence(args, cfg: ExperimentConfig):
    lambdas = args.lambda_db or list(cfg.sweep.lambda_db_list)
    n_placements = args.placements or 1
    sigma_p = (args.sigma_p or [cfg.single.sigma_p_a])[0]
    budgets = np.full(cfg.scene.n_luminaires, sigma_p ** 2)
    i_dc = BIAS_FACTOR * sigma_p
    rows = []
    for lam_db in lambdas:
        ccp_cfg = _cfg_with_lambda(cfg, lam_db)
        children = np.random.SeedSequence(args.seed).spawn(n_placements)
        for j in range(n_placements):
            rng = np.random.default_rng(children[j])
            bob, eve = _draw_positions(cfg.scene, rng)
            h_b = channel_vector(cfg.scene, ReceiverPosition(*bob))
            h_e = channel_vector(cfg.scene, ReceiverPosition(*eve))
            _, _, trace = ccp_solve(cfg.scene, h_b, h_e, ccp_cfg, budgets, i_dc)
            for it, (obj, rv, rw) in enumerate(
                    zip(trace.objectives, trace.rel_step_v, trace.rel_step_w), start=1):
                rows.append({
                    "lambda_db": lam_db, "placement": j, "iteration": it,
                    "sigma_p_a": sigma_p, "objective": obj,
                    "rel_step_v": rv, "rel_step_w": rw,
                    "converged": trace.converged,
                })
    fields = ["lambda_db", "placement", "iteration", "sigma_p_a", "objective",
              "rel_step_v", "rel_step_w", "converged"]
    return rows, fields, {"sigma_p_a": sigma_p, "n_placements": n_placements}


def _cmd_sweep(args, cfg: ExperimentConfig):
    lambdas = args.lambda_db or list(cfg.sweep.lambda_db_list)
    grid = args.sigma_p or list(cfg.sweep.sigma_p_grid_a)
    n_placements = args.placements or cfg.sweep.n_placements
    rows = []
    for lam_db in lambdas:
        ccp_cfg = _cfg_with_lambda(cfg, lam_db)
        rows.extend(placement_sweep(cfg.scene, ccp_cfg, grid, n_placements,
                                    seed=args.seed, workers=args.workers))
    fields = ["sigma_p_a", "i_dc_a", "lambda_db", "scheme", "n_placements",
              "degenerate_count", "unconverged_count",
              "sinr_bob_db", "sinr_eve_db", "tilde_sinr_bob_db", "tilde_sinr_eve_db",
              "secrecy_rate_bits", "tilde_secrecy_rate_bits", "secrecy_rate_clamped_bits"]
    return rows, fields, {"n_placements": n_placements}


def _cmd_single(args, cfg: ExperimentConfig):
    lambdas = args.lambda_db or [cfg.optimizer.lambda_db]
    sigma_p = (args.sigma_p or [cfg.single.sigma_p_a])[0]
    rng = np.random.default_rng(args.seed)
    drawn_bob, drawn_eve = _draw_positions(cfg.scene, rng)
    bob = cfg.single.bob_xy_m or drawn_bob
    eve = cfg.single.eve_xy_m or drawn_eve
    rows = []
    for lam_db in lambdas:
        ccp_cfg = _cfg_with_lambda(cfg, lam_db)
        rec = solve_placement(cfg.scene, ccp_cfg, sigma_p, bob, eve)
        for scheme in ("an", "no_an"):
            r = rec[scheme]
            rows.append({
                "scheme": scheme, "lambda_db": lam_db, "sigma_p_a": sigma_p,
                "bob_x_m": bob[0], "bob_y_m": bob[1],
                "eve_x_m": eve[0], "eve_y_m": eve[1],
                "sinr_bob": r["sinr_bob"], "sinr_eve": r["sinr_eve"],
                "tilde_sinr_bob": r["tilde_sinr_bob"],
                "tilde_sinr_eve": r["tilde_sinr_eve"],
                "secrecy_rate_bits": r["secrecy_rate"],
                "tilde_secrecy_rate_bits": r["tilde_secrecy_rate"],
                "secrecy_rate_clamped_bits": r["secrecy_rate_clamped"],
                "degenerate": r["degenerate"],
                "power_feasible": r["power_feasible"],
                "eve_feasible": r["eve_feasible"],
                "iterations": r["iterations"], "converged": r["converged"],
            })
    fields = ["scheme", "lambda_db", "sigma_p_a", "bob_x_m", "bob_y_m", "eve_x_m",
              "eve_y_m", "sinr_bob", "sinr_eve", "tilde_sinr_bob", "tilde_sinr_eve",
              "secrecy_rate_bits", "tilde_secrecy_rate_bits",
              "secrecy_rate_clamped_bits", "degenerate", "power_feasible",
              "eve_feasible", "iterations", "converged"]
    return rows, fields, {"sigma_p_a": sigma_p}


def _cmd_validate(args, cfg: ExperimentConfig):
    scene = cfg.scene
    vs = cfg.validate
    grid = args.sigma_p or list(vs.sigma_p_grid_a)
    n = vs.n_samples
    children = np.random.SeedSequence(args.seed).spawn(len(grid) * len(vs.sigma_fractions))
    rows = []
    idx = 0
    for sigma_p in grid:
        i_dc = BIAS_FACTOR * sigma_p
        window = ClipWindow.from_bias(scene.i_min_a, scene.i_max_a, i_dc)
        for frac in vs.sigma_fractions:
            sigma = frac * sigma_p
            stats = bussgang_stats(window, sigma)
            rng = np.random.default_rng(children[idx])
            idx += 1
            x = rng.standard_normal(n) * sigma
            y = np.clip(x, window.lower, window.upper)
            r_hat = float(y @ x) / (n * sigma ** 2)
            resid = y - r_hat * x
            se_r = float(np.std(y * x)) / (sigma ** 2 * math.sqrt(n))
            var = resid - resid.mean()
            clip_var_hat = float(var @ var) / n
            m4 = float(np.mean(var ** 4))
            se_var = math.sqrt(max(m4 - clip_var_hat ** 2, 0.0) / n)
            corr = float(np.corrcoef(resid, x)[0, 1])
            rows.append({
                "sigma_p_a": sigma_p, "i_dc_a": i_dc, "sigma_a": sigma,
                "window_lower_a": window.lower, "window_upper_a": window.upper,
                "attenuation": stats.attenuation, "attenuation_mc": r_hat,
                "attenuation_se": se_r,
                "clip_noise_std_a": stats.clip_noise_std,
                "clip_noise_std_mc_a": math.sqrt(clip_var_hat),
                "clip_noise_var_se": se_var,
                "clip_mean_a": clip_mean(window, sigma),
                "clip_mean_mc_a": float(resid.mean() + r_hat * x.mean()),
                "residual_corr": corr,
                "n_samples": n,
            })
    fields = ["sigma_p_a", "i_dc_a", "sigma_a", "window_lower_a", "window_upper_a",
              "attenuation", "attenuation_mc", "attenuation_se",
              "clip_noise_std_a", "clip_noise_std_mc_a", "clip_noise_var_se",
              "clip_mean_a", "clip_mean_mc_a", "residual_corr", "n_samples"]
    return rows, fields, {"n_samples": n}


_COMMANDS = {
    "convergence": _cmd_convergence,
    "sweep": _cmd_sweep,
    "single": _cmd_single,
    "validate": _cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML configuration file")
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--placements", type=int, default=None,
                        help="number of random placements")
    common.add_argument("--lambda-db", dest="lambda_db", type=_parse_float_list,
                        default=None, help="comma-separated Eve SINR caps in dB")
    common.add_argument("--sigma-p", dest="sigma_p", type=_parse_float_list,
                        default=None, help="comma-separated sigma_P grid in A")
    common.add_argument("--workers", type=int, default=1,
                        help="worker processes for placement sweeps")

    parser = argparse.ArgumentParser(
        prog="vlcsec",
        description="Artificial-noise precoder design and secrecy evaluation "
                    "for clipped visible-light links",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("convergence", parents=[common],
                   help="per-iteration design objective trace")
    sub.add_parser("sweep", parents=[common],
                   help="secrecy metrics versus per-luminaire power")
    sub.add_parser("single", parents=[common],
                   help="full report for one placement")
    sub.add_parser("validate", parents=[common],
                   help="Monte-Carlo clipping-statistics diagnostics")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{args.command}.csv")
    meta_path = os.path.join(args.out, f"{args.command}_meta.txt")

    try:
        rows, fields, extra = _COMMANDS[args.command](args, cfg)
    except (ConfigError, SceneError, DesignError, MetricsError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _write_meta(meta_path, args.command, args, cfg, partial=True)
        return EXIT_CONFIG
    except (SubproblemError, InfeasibleRecoveryError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        _write_meta(meta_path, args.command, args, cfg, partial=True)
        return EXIT_SOLVER

    _write_csv(csv_path, fields, rows)
    _write_meta(meta_path, args.command, args, cfg, partial=False, extra=extra)
    print(f"wrote {csv_path} ({len(rows)} rows)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
