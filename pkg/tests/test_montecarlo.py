import math

import numpy as np
import pytest

from vlcsec import (
    CcpConfig,
    PrecoderPair,
    ReceiverPosition,
    SinrInputs,
    ccp_solve,
    channel_vector,
    exact_sinr_pair,
    no_an_solve,
    normalized_noise_variance,
    placement_sweep,
    simulate_link,
    sinr,
    solve_placement,
)

BUDGETS = np.full(4, 0.0625)
I_DC = 0.5


class TestSimulateLink:
    def test_zero_precoders_zero_sinr(self, scene, center_channels):
        h_b, h_e = center_channels
        pc = PrecoderPair(np.zeros(4), np.zeros(4), BUDGETS)
        sim = simulate_link(scene, h_b, h_e, pc, I_DC, n_samples=200_000, seed=3)
        assert sim.sinr_bob < 1e-3
        assert sim.sinr_eve < 1e-3

    def test_negligible_clipping_matches_unclipped_model(self, scene, center_channels):
        # drive std one tenth of the bias: the window sits at +-10 sigma
        h_b, h_e = center_channels
        sigma = I_DC / 10.0
        budgets = np.full(4, sigma**2)
        rng = np.random.default_rng(11)
        angles = rng.uniform(0, 2 * np.pi, 4)
        pc = PrecoderPair(sigma * np.cos(angles), sigma * np.sin(angles), budgets)
        sim = simulate_link(scene, h_b, h_e, pc, I_DC, n_samples=2_000_000, seed=12)
        unclipped = sinr(
            SinrInputs(h_eff=h_b, h_raw=h_b, clip_noise_std=np.zeros(4),
                       noise_norm=normalized_noise_variance(scene, h_b, I_DC),
                       n_chips=scene.n_chips),
            pc,
        )
        assert sim.sinr_bob == pytest.approx(unclipped, rel=0.03)

    def test_agreement_no_an_solution_at_bias_point(self, scene, ccp_cfg,
                                                    center_channels):
        h_b, h_e = center_channels
        pc, report, _ = no_an_solve(scene, h_b, h_e, ccp_cfg, BUDGETS, I_DC)
        sim = simulate_link(scene, h_b, h_e, pc, I_DC, n_samples=1_000_000, seed=21)
        assert sim.sinr_bob == pytest.approx(report.sinr_bob, rel=0.05)

    def test_agreement_proportional_mix_at_bias_point(self, scene, center_channels):
        # every luminaire mixes data and jamming with one common angle, the
        # regime in which the fully-correlated distortion model is exact
        h_b, h_e = center_channels
        theta = 0.6
        pc = PrecoderPair(np.sqrt(BUDGETS) * math.cos(theta),
                          np.sqrt(BUDGETS) * math.sin(theta), BUDGETS)
        exact_b, exact_e = exact_sinr_pair(scene, h_b, h_e, pc, I_DC)
        sim = simulate_link(scene, h_b, h_e, pc, I_DC, n_samples=1_000_000, seed=22)
        assert sim.sinr_bob == pytest.approx(exact_b, rel=0.05)
        assert sim.sinr_eve == pytest.approx(exact_e, rel=0.05)

    def test_analytic_model_is_conservative_for_bob(self, scene, ccp_cfg, rng):
        # heterogeneous per-luminaire mixing decorrelates the distortion,
        # so the fully-correlated model over-counts Bob's interference and
        # the analytic SINR is a lower bound up to sampling noise
        from tests.conftest import random_positions

        for bob, eve in random_positions(rng, scene, 4):
            h_b = channel_vector(scene, ReceiverPosition(*bob))
            h_e = channel_vector(scene, ReceiverPosition(*eve))
            pc, report, _ = ccp_solve(scene, h_b, h_e, ccp_cfg, BUDGETS, I_DC)
            sim = simulate_link(scene, h_b, h_e, pc, I_DC, n_samples=400_000,
                                seed=31)
            assert sim.sinr_bob >= report.sinr_bob * 0.95

    def test_reports_clipping_mean_diagnostic(self, scene, center_channels):
        # asymmetric window: the distortion mean is visibly nonzero
        h_b, h_e = center_channels
        sigma = 0.3
        i_dc = 0.6
        budgets = np.full(4, sigma**2)
        pc = PrecoderPair(np.full(4, sigma), np.zeros(4), budgets)
        sim = simulate_link(scene, h_b, h_e, pc, i_dc, n_samples=1_000_000, seed=41)
        from vlcsec import ClipWindow, clip_mean

        expected = clip_mean(ClipWindow.from_bias(0.0, 1.0, i_dc), sigma)
        assert sim.clip_noise_mean == pytest.approx(np.full(4, expected), abs=2e-3)

    def test_seed_reproducibility(self, scene, center_channels):
        h_b, h_e = center_channels
        pc = PrecoderPair(np.full(4, 0.1), np.full(4, 0.1), BUDGETS)
        s1 = simulate_link(scene, h_b, h_e, pc, I_DC, n_samples=100_000, seed=5)
        s2 = simulate_link(scene, h_b, h_e, pc, I_DC, n_samples=100_000, seed=5)
        assert s1.sinr_bob == s2.sinr_bob
        assert s1.sinr_eve == s2.sinr_eve

    def test_rejects_empty_precoders(self, scene):
        pc = PrecoderPair(np.zeros(0), np.zeros(0), np.zeros(0))
        with pytest.raises(ValueError):
            simulate_link(scene, np.zeros(0), np.zeros(0), pc, I_DC)


class TestPlacementSweep:
    def test_single_placement_matches_direct_pipeline(self, scene, ccp_cfg):
        rows = placement_sweep(scene, ccp_cfg, [0.25], n_placements=1, seed=99)
        # reconstruct the drawn placement exactly as the sweep does
        child = np.random.SeedSequence(99).spawn(1)[0]
        rng = np.random.default_rng(child)
        bob = tuple(rng.uniform([-2.5, -2.5], [2.5, 2.5]))
        eve = tuple(rng.uniform([-2.5, -2.5], [2.5, 2.5]))
        rec = solve_placement(scene, ccp_cfg, 0.25, bob, eve)
        an_row = next(r for r in rows if r["scheme"] == "an")
        assert an_row["sinr_bob_db"] == pytest.approx(
            10 * math.log10(rec["an"]["sinr_bob"]), abs=1e-12)
        assert an_row["secrecy_rate_bits"] == pytest.approx(
            rec["an"]["secrecy_rate"], abs=1e-12)
        assert an_row["degenerate_count"] == 0

    def test_bitwise_reproducibility(self, scene, ccp_cfg):
        r1 = placement_sweep(scene, ccp_cfg, [0.2, 0.25], n_placements=3, seed=7)
        r2 = placement_sweep(scene, ccp_cfg, [0.2, 0.25], n_placements=3, seed=7)
        assert r1 == r2

    def test_worker_count_invariance(self, scene, ccp_cfg):
        serial = placement_sweep(scene, ccp_cfg, [0.25], n_placements=4, seed=13,
                                 workers=1)
        parallel = placement_sweep(scene, ccp_cfg, [0.25], n_placements=4, seed=13,
                                   workers=2)
        assert serial == parallel

    def test_feasibility_and_schema(self, scene, ccp_cfg):
        rows = placement_sweep(scene, ccp_cfg, [0.25], n_placements=5, seed=17)
        assert {r["scheme"] for r in rows} == {"an", "no_an"}
        for row in rows:
            assert row["n_placements"] == 5
            assert row["degenerate_count"] == 0
            assert math.isfinite(row["secrecy_rate_bits"])

    def test_degenerate_placement_reported(self, scene, ccp_cfg):
        rec = solve_placement(scene, ccp_cfg, 0.25, (0.7, -0.4), (0.7, -0.4))
        assert rec["an"]["degenerate"]
        assert rec["no_an"]["degenerate"]
        assert rec["an"]["sinr_bob"] == 0.0

    def test_rejects_zero_placements(self, scene, ccp_cfg):
        with pytest.raises(ValueError):
            placement_sweep(scene, ccp_cfg, [0.25], n_placements=0, seed=1)
