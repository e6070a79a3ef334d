"""Command-line entry point: parse scenario, run the requested mode, write artifacts.

Progress goes to stderr; data artifacts go only to files under --out, so stdout
stays clean for scripting. Every failure category maps to a distinct exit code
(see --help).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io as rio
from .channel import ChannelError
from .fieldmap import FieldmapError, sweep_receivers, sweep_targets
from .geometry import GeometryError, project_to_grid_plane
from .metrics import MetricsError, analyze, compare_near_far
from .optimizer import BRUTE_FORCE_LIMIT, OptimizerError, brute_force_config, optimize_config
from .plots import render_powermap
from .scenario import RUN_MODES, Scenario, ScenarioValidationError, random_scene

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCENARIO = 3
EXIT_GEOMETRY = 4
EXIT_CHANNEL = 5
EXIT_OPTIMIZER = 6
EXIT_FIELDMAP = 7
EXIT_METRICS = 8
EXIT_OUTPUT = 9

_EXIT_DOC = """\
exit codes:
  0  success
  2  usage error (bad flags or missing mode-specific options)
  3  scenario file error
  4  geometry error
  5  channel error
  6  optimizer error (e.g. element count over the brute-force limit)
  7  field-map sweep error
  8  metrics error
  9  artifact read/write error
"""

BRUTE_CHECK_TRIALS = 25


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risbeam",
        description="Deterministic field-map simulator and configuration engine for a "
        "binary-phase reconfigurable intelligent surface.",
        epilog=_EXIT_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--scenario", required=True, metavar="PATH",
        help="scenario file path or bundled preset name",
    )
    parser.add_argument(
        "--mode", choices=RUN_MODES, default=None,
        help="run mode (default: the scenario file's run.mode)",
    )
    parser.add_argument(
        "--out", default=None, metavar="DIR",
        help="output directory (default: the scenario file's run.out_dir)",
    )
    parser.add_argument(
        "--workers", type=int, default=None, metavar="N",
        help="worker processes for sweeps (default: scenario run.workers)",
    )
    parser.add_argument(
        "--config", default=None, metavar="PATH",
        help="switch-state bitmap file (required for rx-sweep)",
    )
    parser.add_argument(
        "--scenario2", default=None, metavar="PATH",
        help="far-receiver scenario (required for compare-near-far)",
    )
    parser.add_argument(
        "--pgm-range", default=None, metavar="MIN,MAX",
        help="dBm range mapped onto the PGM gray scale, e.g. --pgm-range=-80,-20 (default: map min/max)",
    )
    parser.add_argument(
        "--seed", type=int, default=None, metavar="N",
        help="run seeded random-scene trials in brute-check mode",
    )
    return parser


def _usage_error(parser: argparse.ArgumentParser, message: str) -> int:
    print(f"error: usage: {message}", file=sys.stderr)
    print(parser.format_usage(), end="", file=sys.stderr)
    return EXIT_USAGE


def _parse_pgm_range(raw: Optional[str]) -> Optional[tuple[float, float]]:
    if raw is None:
        return None
    parts = raw.split(",")
    if len(parts) != 2:
        raise ValueError(f"--pgm-range needs MIN,MAX, got {raw!r}")
    return float(parts[0]), float(parts[1])


def _auto_range(values: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    usable = values[~mask]
    if usable.size == 0:
        return (-1.0, 0.0)
    lo = float(np.min(usable))
    hi = float(np.max(usable))
    if lo == hi:
        return (lo - 0.5, hi + 0.5)
    return (lo, hi)


def _progress(label: str):
    def report(done: int, total: int) -> None:
        print(f"{label}: {done}/{total} cells", file=sys.stderr)

    return report


def _emit_map(pmap, scenario: Scenario, out: Path, stem: str, pgm_range) -> None:
    rio.write_powermap_csv(pmap, out / f"{stem}.csv")
    vrange = pgm_range if pgm_range is not None else _auto_range(pmap.values, pmap.sentinel_mask)
    rio.write_powermap_pgm(pmap, out / f"{stem}.pgm", vrange)
    render_powermap(
        pmap,
        out / f"{stem}.png",
        value_range=vrange,
        rx_marker=scenario.rx_position,
        title=f"{scenario.name}: {pmap.mode} (dBm)",
    )


def _run_target_sweep(scenario: Scenario, out: Path, workers: int, pgm_range) -> int:
    pmap = sweep_targets(scenario, workers=workers, progress=_progress("target-sweep"))
    _emit_map(pmap, scenario, out, "target_sweep", pgm_range)
    report = analyze(pmap, project_to_grid_plane(scenario.grid, scenario.rx_position))
    rio.write_selectivity_report(report, out / "selectivity.txt")
    return EXIT_OK


def _run_rx_sweep(scenario: Scenario, out: Path, workers: int, pgm_range, config_path: str) -> int:
    config = rio.read_config_bitmap(config_path, scenario.num_elements)
    pmap = sweep_receivers(scenario, config, workers=workers, progress=_progress("rx-sweep"))
    _emit_map(pmap, scenario, out, "rx_sweep", pgm_range)
    report = analyze(pmap, project_to_grid_plane(scenario.grid, scenario.rx_position))
    rio.write_selectivity_report(report, out / "selectivity.txt")
    return EXIT_OK


def _run_optimize_single(scenario: Scenario, out: Path) -> int:
    config = optimize_config(scenario.rx_position, scenario)
    rio.write_config_bitmap(config, out / "config.bits")
    summary = rio.format_config_summary(config, scenario, "config.bits")
    rio.write_text(out / "config.txt", summary)
    print(summary, end="", file=sys.stderr)
    return EXIT_OK


def _run_compare_near_far(
    near: Scenario, far: Scenario, out: Path, workers: int, pgm_range
) -> int:
    near_map = sweep_targets(near, workers=workers, progress=_progress("near sweep"))
    far_map = sweep_targets(far, workers=workers, progress=_progress("far sweep"))
    _emit_map(near_map, near, out, "near", pgm_range)
    _emit_map(far_map, far, out, "far", pgm_range)
    near_report = analyze(near_map, project_to_grid_plane(near.grid, near.rx_position))
    far_report = analyze(far_map, project_to_grid_plane(far.grid, far.rx_position))
    rio.write_selectivity_report(near_report, out / "near_selectivity.txt")
    rio.write_selectivity_report(far_report, out / "far_selectivity.txt")
    verdict = compare_near_far(near_report, far_report)
    rio.write_broadening_verdict(verdict, out / "broadening.txt")
    return EXIT_OK


def _run_brute_check(scenario: Scenario, out: Path, seed: Optional[int]) -> int:
    nm = scenario.num_elements
    if nm > BRUTE_FORCE_LIMIT:
        raise OptimizerError(
            f"brute-check needs NM <= {BRUTE_FORCE_LIMIT} elements, scenario has {nm}"
        )
    lines = ["report: brute-check", f"scenario: {scenario.digest()}", f"elements: {nm}"]

    analytic = optimize_config(scenario.rx_position, scenario)
    exhaustive = brute_force_config(scenario.rx_position, scenario)
    ratio = 10.0 ** ((analytic.predicted_gain_db - exhaustive.predicted_gain_db) / 20.0)
    lines += [
        f"analytic_gain_db: {analytic.predicted_gain_db:.4f}",
        f"exhaustive_gain_db: {exhaustive.predicted_gain_db:.4f}",
        f"amplitude_ratio: {ratio:.6f}",
        f"gap_db: {exhaustive.predicted_gain_db - analytic.predicted_gain_db:.4f}",
    ]

    if seed is not None:
        rng = np.random.default_rng(seed)
        ratios = []
        for _ in range(BRUTE_CHECK_TRIALS):
            scene = random_scene(rng, nm)
            opt = optimize_config(scene.rx_position, scene)
            exact = brute_force_config(scene.rx_position, scene)
            ratios.append(10.0 ** ((opt.predicted_gain_db - exact.predicted_gain_db) / 20.0))
        lines += [
            f"trials: {BRUTE_CHECK_TRIALS}",
            f"trial_seed: {seed}",
            f"trial_min_ratio: {min(ratios):.6f}",
            f"trial_mean_ratio: {float(np.mean(ratios)):.6f}",
        ]

    text = "\n".join(lines) + "\n"
    rio.write_text(out / "brute_check.txt", text)
    print(text, end="", file=sys.stderr)
    return EXIT_OK


def run(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    scenario = rio.resolve_scenario(args.scenario)
    mode = args.mode if args.mode is not None else scenario.run.mode
    workers = args.workers if args.workers is not None else scenario.run.workers
    out_dir = args.out if args.out is not None else scenario.run.out_dir

    if mode == "rx-sweep" and args.config is None:
        return _usage_error(parser, "--mode rx-sweep requires --config PATH")
    if mode == "compare-near-far" and args.scenario2 is None:
        return _usage_error(parser, "--mode compare-near-far requires --scenario2 PATH")
    if workers < 1:
        return _usage_error(parser, "--workers must be >= 1")
    try:
        pgm_range = _parse_pgm_range(args.pgm_range)
    except ValueError as exc:
        return _usage_error(parser, str(exc))

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise rio.OutputError(f"{out}: cannot create output directory: {exc}") from exc

    if mode == "target-sweep":
        return _run_target_sweep(scenario, out, workers, pgm_range)
    if mode == "rx-sweep":
        return _run_rx_sweep(scenario, out, workers, pgm_range, args.config)
    if mode == "optimize-single":
        return _run_optimize_single(scenario, out)
    if mode == "compare-near-far":
        far = rio.resolve_scenario(args.scenario2)
        return _run_compare_near_far(scenario, far, out, workers, pgm_range)
    if mode == "brute-check":
        return _run_brute_check(scenario, out, args.seed)
    return _usage_error(parser, f"unknown mode {mode!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args, parser)
    except rio.ScenarioError as exc:
        print(f"error: scenario: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except ScenarioValidationError as exc:
        print(f"error: scenario: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except GeometryError as exc:
        print(f"error: geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except ChannelError as exc:
        print(f"error: channel: {exc}", file=sys.stderr)
        return EXIT_CHANNEL
    except OptimizerError as exc:
        print(f"error: optimizer: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER
    except FieldmapError as exc:
        print(f"error: fieldmap: {exc}", file=sys.stderr)
        return EXIT_FIELDMAP
    except MetricsError as exc:
        print(f"error: metrics: {exc}", file=sys.stderr)
        return EXIT_METRICS
    except rio.OutputError as exc:
        print(f"error: output: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except OSError as exc:
        print(f"error: output: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
