import csv
from pathlib import Path

import numpy as np
import pytest

from vlcsec.cli import main

GOLDEN_DIR = Path(__file__).parent / "golden"


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def read_meta(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        key, _, val = line.partition("=")
        out[key] = val
    return out


class TestCliContract:
    def test_single_is_byte_deterministic(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        args = ["--seed", "42", "--sigma-p", "0.25", "--lambda-db", "0"]
        assert main(["single", "--out", str(out1)] + args) == 0
        assert main(["single", "--out", str(out2)] + args) == 0
        assert (out1 / "single.csv").read_bytes() == (out2 / "single.csv").read_bytes()

    def test_single_schema_and_meta(self, tmp_path):
        out = tmp_path / "run"
        assert main(["single", "--out", str(out), "--seed", "1"]) == 0
        rows = read_csv(out / "single.csv")
        assert {r["scheme"] for r in rows} == {"an", "no_an"}
        meta = read_meta(out / "single_meta.txt")
        assert meta["partial"] == "false"
        assert meta["seed"] == "1"
        assert len(meta["config_hash"]) == 16

    def test_convergence_trace_shape(self, tmp_path):
        out = tmp_path / "conv"
        assert main(["convergence", "--out", str(out), "--seed", "3",
                     "--lambda-db", "0"]) == 0
        rows = read_csv(out / "convergence.csv")
        objs = [float(r["objective"]) for r in rows]
        # non-decreasing within solver slack and plateaued by row 3
        assert all(b >= a - 1e-7 * max(1.0, abs(a)) for a, b in zip(objs, objs[1:]))
        third = objs[min(2, len(objs) - 1)]
        assert third >= 0.99 * objs[-1]

    def test_sweep_rows(self, tmp_path):
        out = tmp_path / "sweep"
        assert main(["sweep", "--out", str(out), "--seed", "5", "--placements", "3",
                     "--sigma-p", "0.2,0.25", "--lambda-db", "0"]) == 0
        rows = read_csv(out / "sweep.csv")
        assert len(rows) == 4  # 2 sigma x 2 schemes
        for row in rows:
            assert row["scheme"] in ("an", "no_an")
            assert float(row["secrecy_rate_bits"]) == pytest.approx(
                float(row["secrecy_rate_bits"]))

    def test_validate_diagnostics(self, tmp_path):
        out = tmp_path / "val"
        assert main(["validate", "--out", str(out), "--seed", "9",
                     "--sigma-p", "0.25"]) == 0
        rows = read_csv(out / "validate.csv")
        assert len(rows) == 3  # one sigma_p, three drive fractions
        for row in rows:
            assert abs(float(row["attenuation"]) - float(row["attenuation_mc"])) \
                <= 3 * float(row["attenuation_se"]) + 1e-12

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("scene:\n  pd:\n    fov_deg: -10\n")
        assert main(["single", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2

    def test_missing_config_exit_code(self, tmp_path):
        assert main(["single", "--config", str(tmp_path / "none.yaml"),
                     "--out", str(tmp_path / "x")]) == 2

    def test_custom_scene_config(self, tmp_path):
        cfgfile = tmp_path / "one.yaml"
        cfgfile.write_text(
            "scene:\n  luminaires:\n    - {x_m: 0.0, y_m: 0.0}\n"
            "single:\n  bob_xy_m: [0.5, 0.0]\n  eve_xy_m: [2.0, 2.0]\n"
        )
        out = tmp_path / "run"
        assert main(["single", "--config", str(cfgfile), "--out", str(out),
                     "--lambda-db", "60"]) == 0
        rows = read_csv(out / "single.csv")
        an = next(r for r in rows if r["scheme"] == "an")
        assert float(an["sinr_bob"]) > 0


class TestGoldenFile:
    """Schema lock plus loose numeric agreement on a pinned seed."""

    def test_sweep_golden(self, tmp_path):
        out = tmp_path / "golden_run"
        assert main(["sweep", "--out", str(out), "--seed", "20240817",
                     "--placements", "4", "--sigma-p", "0.25",
                     "--lambda-db", "0"]) == 0
        got = read_csv(out / "sweep.csv")
        expected = read_csv(GOLDEN_DIR / "sweep_seed20240817.csv")
        assert [tuple(r.keys()) for r in got] == [tuple(r.keys()) for r in expected]
        for g, e in zip(got, expected):
            assert g["scheme"] == e["scheme"]
            for key in g:
                try:
                    ge, ee = float(g[key]), float(e[key])
                except ValueError:
                    assert g[key] == e[key]
                    continue
                assert ge == pytest.approx(ee, rel=1e-6, abs=1e-9), key
