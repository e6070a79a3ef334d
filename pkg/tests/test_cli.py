import math

import numpy as np
import pytest

from risbeam.cli import (
    EXIT_OK,
    EXIT_OPTIMIZER,
    EXIT_SCENARIO,
    EXIT_USAGE,
    main,
)
from risbeam.io import serialize_scenario
from risbeam.optimizer import unpack_states

from helpers import make_scenario

from risbeam.geometry import Vec3


@pytest.fixture()
def tiny_scenario_path(tmp_path):
    scenario = make_scenario(
        cells=3, count_u=5, count_v=5,
        rx=Vec3(0.0, 1.9, 1.0), grid_origin=Vec3(-0.2, 1.7, 1.0),
    )
    path = tmp_path / "tiny.yaml"
    path.write_text(serialize_scenario(scenario))
    return path


def run_cli(*args):
    return main([str(a) for a in args])


class TestTargetSweep:
    def test_emits_all_artifacts(self, tiny_scenario_path, tmp_path, capsys):
        out = tmp_path / "out"
        code = run_cli("--scenario", tiny_scenario_path, "--mode", "target-sweep", "--out", out)
        assert code == EXIT_OK
        for name in ("target_sweep.csv", "target_sweep.pgm", "target_sweep.png", "selectivity.txt"):
            assert (out / name).is_file(), name
        # data stays off stdout; progress goes to stderr
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "cells" in captured.err

    def test_repeat_runs_are_byte_identical(self, tiny_scenario_path, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert run_cli("--scenario", tiny_scenario_path, "--out", out_a) == EXIT_OK
        assert run_cli("--scenario", tiny_scenario_path, "--out", out_b) == EXIT_OK
        for name in ("target_sweep.csv", "target_sweep.pgm", "target_sweep.png", "selectivity.txt"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_pgm_range_flag(self, tiny_scenario_path, tmp_path):
        out = tmp_path / "out"
        code = run_cli(
            "--scenario", tiny_scenario_path, "--out", out, "--pgm-range=-80,-20"
        )
        assert code == EXIT_OK

    def test_bad_pgm_range_is_usage_error(self, tiny_scenario_path, tmp_path):
        code = run_cli(
            "--scenario", tiny_scenario_path, "--out", tmp_path, "--pgm-range", "1,2,3"
        )
        assert code == EXIT_USAGE


class TestOptimizeSingleAndRxSweep:
    def test_pipeline(self, tiny_scenario_path, tmp_path):
        out = tmp_path / "out"
        code = run_cli("--scenario", tiny_scenario_path, "--mode", "optimize-single", "--out", out)
        assert code == EXIT_OK
        bits = out / "config.bits"
        assert bits.stat().st_size == (9 + 7) // 8  # 3x3-cell panel
        summary = (out / "config.txt").read_text()
        assert "predicted_gain_db:" in summary
        assert "hypothesis_index:" in summary
        states = unpack_states(bits.read_bytes(), 9)
        assert set(np.unique(states)) <= {0.0, math.pi}

        code = run_cli(
            "--scenario", tiny_scenario_path, "--mode", "rx-sweep",
            "--config", bits, "--out", out,
        )
        assert code == EXIT_OK
        assert (out / "rx_sweep.csv").is_file()
        assert (out / "rx_sweep.png").is_file()

    def test_rx_sweep_without_config_is_usage_error(self, tiny_scenario_path, tmp_path, capsys):
        code = run_cli("--scenario", tiny_scenario_path, "--mode", "rx-sweep", "--out", tmp_path)
        assert code == EXIT_USAGE
        assert "--config" in capsys.readouterr().err


class TestCompareNearFar:
    def test_emits_verdict(self, tmp_path):
        near = make_scenario(count_u=5, count_v=7, rx=Vec3(0.0, 1.9, 1.0),
                             grid_origin=Vec3(-0.2, 1.7, 1.0))
        far = make_scenario(count_u=5, count_v=7, rx=Vec3(0.0, 2.2, 1.0),
                            grid_origin=Vec3(-0.2, 1.7, 1.0))
        near_path = tmp_path / "near.yaml"
        far_path = tmp_path / "far.yaml"
        near_path.write_text(serialize_scenario(near))
        far_path.write_text(serialize_scenario(far))
        out = tmp_path / "out"
        code = run_cli(
            "--scenario", near_path, "--mode", "compare-near-far",
            "--scenario2", far_path, "--out", out,
        )
        assert code == EXIT_OK
        verdict = (out / "broadening.txt").read_text()
        assert "depth_ratio:" in verdict
        assert (out / "near_selectivity.txt").is_file()
        assert (out / "far_selectivity.txt").is_file()

    def test_requires_second_scenario(self, tiny_scenario_path, tmp_path):
        code = run_cli(
            "--scenario", tiny_scenario_path, "--mode", "compare-near-far", "--out", tmp_path
        )
        assert code == EXIT_USAGE


class TestBruteCheck:
    def test_small_panel_gap_report(self, tiny_scenario_path, tmp_path):
        out = tmp_path / "out"
        code = run_cli("--scenario", tiny_scenario_path, "--mode", "brute-check", "--out", out)
        assert code == EXIT_OK
        text = (out / "brute_check.txt").read_text()
        assert "amplitude_ratio:" in text
        ratio = float(text.split("amplitude_ratio:")[1].splitlines()[0])
        assert 0.0 < ratio <= 1.0 + 1e-12

    def test_seeded_trials_are_deterministic(self, tiny_scenario_path, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            code = run_cli(
                "--scenario", tiny_scenario_path, "--mode", "brute-check",
                "--seed", 7, "--out", out,
            )
            assert code == EXIT_OK
        assert (out_a / "brute_check.txt").read_bytes() == (out_b / "brute_check.txt").read_bytes()
        assert "trials:" in (out_a / "brute_check.txt").read_text()

    def test_large_panel_rejected_naming_limit(self, tmp_path, capsys):
        code = run_cli("--scenario", "area1_near", "--mode", "brute-check", "--out", tmp_path)
        assert code == EXIT_OPTIMIZER
        err = capsys.readouterr().err
        assert "20" in err
        assert err.startswith("error: optimizer:")


class TestErrorPaths:
    def test_unknown_scenario_exits_3(self, tmp_path, capsys):
        code = run_cli("--scenario", "nope_not_here", "--out", tmp_path)
        assert code == EXIT_SCENARIO
        assert capsys.readouterr().err.startswith("error: scenario:")

    def test_broken_scenario_file_exits_3(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("rf: {}\n")
        assert run_cli("--scenario", bad, "--out", tmp_path) == EXIT_SCENARIO

    def test_workers_validated(self, tiny_scenario_path, tmp_path):
        code = run_cli("--scenario", tiny_scenario_path, "--workers", 0, "--out", tmp_path)
        assert code == EXIT_USAGE

    def test_mode_defaults_to_scenario_run_mode(self, tiny_scenario_path, tmp_path):
        out = tmp_path / "out"
        code = run_cli("--scenario", tiny_scenario_path, "--out", out)
        assert code == EXIT_OK
        assert (out / "target_sweep.csv").is_file()
