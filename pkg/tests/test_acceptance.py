"""Acceptance suite: every criterion runs at its stated tolerance and prints
one PASS/FAIL line (visible with `pytest tests/test_acceptance.py -v -s`).

Frozen constants below come from the 2026-08-10 calibration run recorded in
the README; they are regression bounds, not tuning knobs.
"""

import dataclasses
import math
import time

import numpy as np

from risbeam.channel import cascaded_phase, evaluate_states, freespace_coeff
from risbeam.cli import main
from risbeam.fieldmap import sweep_targets
from risbeam.geometry import (
    GridSpec,
    Pose,
    Vec3,
    distances_to_point,
    project_to_grid_plane,
)
from risbeam.io import load_preset
from risbeam.metrics import analyze, compare_near_far
from risbeam.optimizer import brute_force_config, continuous_phase, optimize_config, quantize
from risbeam.scenario import random_scene

# --- frozen calibration values ---------------------------------------------
# 5th percentile of analytic/exhaustive amplitude ratio, 500 scenes, seed below
BRUTE_RATIO_P5_FLOOR = 0.9250
BRUTE_SEED = 20260810
# mean power deficit (dB below peak) of cells >= 1.5 m from the receiver on
# area1_near; calibrated 30.93 dB. Measured deployments of this class report
# 20-30 dB drops in multipath-rich halls, where scattering floors the
# measurable deficit; the free-space model keeps falling, so landing at or
# above that band is the expected outcome.
DROPOFF_FLOOR_DB = 30.0
# free-space magnitude at d = 1 m, f = 5.375 GHz: wavelength / (4 pi), frozen
# from the independent hand evaluation (5 significant figures: 4.4385e-3)
FREESPACE_MAG_1M = 4.438460613243668e-3


def report(number: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, f"criterion {number}: {detail}"


def rd_reference(tau: float) -> float:
    tau = tau % (2.0 * math.pi)
    return math.pi if math.pi / 2.0 <= tau < 3.0 * math.pi / 2.0 else 0.0


def scene_channel(scene):
    elements = scene.element_array()
    d_h = distances_to_point(elements, scene.tx_position)
    d_g = distances_to_point(elements, scene.rx_position)
    casc = freespace_coeff(d_h, scene.rf) * freespace_coeff(d_g, scene.rf)
    return casc, cascaded_phase(d_h, d_g, scene.rf.wavelength_m)


def test_criterion_1_quantizer_truth_table():
    start = time.time()
    taus = np.concatenate(
        [
            np.linspace(0.0, 2.0 * math.pi, 10000, endpoint=False),
            [math.pi / 2.0, 3.0 * math.pi / 2.0],  # both boundaries exactly
        ]
    )
    got = quantize(taus)
    want = np.array([rd_reference(float(t)) for t in taus])
    elapsed = time.time() - start
    ok = bool(np.array_equal(got, want)) and elapsed < 1.0
    report(1, ok, f"rd(.) matches the piecewise rule on {taus.size} points ({elapsed:.2f}s)")


def test_criterion_2_continuous_alignment_identity():
    start = time.time()
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        scene = random_scene(rng, int(rng.integers(4, 257)))
        casc, phases = scene_channel(scene)
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        aligned = scene.rf.gain_amplitude * np.sum(
            casc * np.exp(1j * continuous_phase(phases, theta))
        )
        bound = scene.rf.gain_amplitude * float(np.sum(np.abs(casc)))
        worst = max(worst, abs(abs(aligned) - bound) / bound)
    elapsed = time.time() - start
    ok = worst < 1e-9 and elapsed < 5.0
    report(2, ok, f"unquantized configs reach the coherent bound, worst rel err {worst:.2e} ({elapsed:.2f}s)")


def test_criterion_3_hypothesis_selection():
    start = time.time()
    rng = np.random.default_rng(7)
    exact = 0
    scenes = 1000
    for _ in range(scenes):
        scene = random_scene(rng, int(rng.integers(4, 65)))
        casc, phases = scene_channel(scene)
        amp = scene.pi_state_amplitude
        candidates = [
            abs(evaluate_states(casc, quantize(continuous_phase(phases, theta)), scene.rf, amp))
            for theta in scene.hypotheses.values
        ]
        config = optimize_config(scene.rx_position, scene)
        achieved = abs(evaluate_states(casc, config.states, scene.rf, amp))
        if achieved == max(candidates) and config.hypothesis_index == candidates.index(max(candidates)):
            exact += 1
    elapsed = time.time() - start
    ok = exact == scenes and elapsed < 10.0
    report(3, ok, f"selected config equals the max over the 4 candidates in {exact}/{scenes} scenes ({elapsed:.2f}s)")


def test_criterion_4_brute_force_dominance():
    start = time.time()
    rng = np.random.default_rng(BRUTE_SEED)
    ratios = []
    violations = 0
    for _ in range(500):
        scene = random_scene(rng, int(rng.integers(2, 13)))
        casc, _ = scene_channel(scene)
        amp = scene.pi_state_amplitude
        opt = abs(
            evaluate_states(casc, optimize_config(scene.rx_position, scene).states, scene.rf, amp)
        )
        exact = abs(
            evaluate_states(casc, brute_force_config(scene.rx_position, scene).states, scene.rf, amp)
        )
        if exact < opt:
            violations += 1
        ratios.append(opt / exact)
    p5 = float(np.percentile(ratios, 5))
    elapsed = time.time() - start
    ok = violations == 0 and p5 >= BRUTE_RATIO_P5_FLOOR and elapsed < 120.0
    report(
        4,
        ok,
        f"exhaustive >= analytic in 500/500 scenes; ratio p5 {p5:.4f} >= frozen {BRUTE_RATIO_P5_FLOOR} ({elapsed:.2f}s)",
    )


def test_criterion_5_peak_localization():
    start = time.time()
    scenario = load_preset("area1_near")
    assert scenario.num_elements == 1536
    assert scenario.grid.count_u >= 20 and scenario.grid.count_v >= 20
    assert scenario.grid.spacing_m == 0.1
    pmap = sweep_targets(scenario)
    rep = analyze(pmap, project_to_grid_plane(scenario.grid, scenario.rx_position))
    elapsed = time.time() - start
    ok = rep.peak_offset_from_rx_m <= scenario.grid.spacing_m + 1e-9 and elapsed < 30.0
    report(
        5,
        ok,
        f"target-sweep argmax at cell {rep.peak_cell}, {rep.peak_offset_from_rx_m:.3f} m from the receiver ({elapsed:.2f}s)",
    )


def test_criterion_6_rapid_dropoff():
    start = time.time()
    scenario = load_preset("area1_near")
    pmap = sweep_targets(scenario)
    rep = analyze(
        pmap,
        project_to_grid_plane(scenario.grid, scenario.rx_position),
        radii_m=(1.5,),
    )
    mean_drop = rep.drop_at_radii[0].mean_drop_db
    elapsed = time.time() - start
    ok = mean_drop >= DROPOFF_FLOOR_DB and elapsed < 30.0
    report(
        6,
        ok,
        f"mean power beyond 1.5 m sits {mean_drop:.1f} dB below peak "
        f"(frozen floor {DROPOFF_FLOOR_DB} dB; measured deployments report 20-30 dB "
        f"with a multipath floor) ({elapsed:.2f}s)",
    )


def test_criterion_7_elevation_broadening():
    start = time.time()
    near = load_preset("area1_near")
    far = load_preset("area1_far")
    near_rep = analyze(sweep_targets(near), project_to_grid_plane(near.grid, near.rx_position))
    far_rep = analyze(sweep_targets(far), project_to_grid_plane(far.grid, far.rx_position))
    verdict = compare_near_far(near_rep, far_rep)
    elapsed = time.time() - start
    ok = verdict.depth_ratio > 1.0 and verdict.lateral_ratio < verdict.depth_ratio and elapsed < 60.0
    report(
        7,
        ok,
        f"depth-axis extent ratio {verdict.depth_ratio:.2f} > 1 and > lateral ratio "
        f"{verdict.lateral_ratio:.2f} ({elapsed:.2f}s)",
    )


def test_criterion_8_determinism_and_worker_invariance(tmp_path):
    start = time.time()
    artifacts = ("target_sweep.csv", "target_sweep.pgm", "target_sweep.png", "selectivity.txt")
    outputs = {}
    for label, workers in (("w1a", 1), ("w1b", 1), ("w8a", 8), ("w8b", 8)):
        out = tmp_path / label
        code = main(
            ["--scenario", "area1_near", "--mode", "target-sweep",
             "--workers", str(workers), "--out", str(out), "--pgm-range=-80,-10"]
        )
        assert code == 0
        outputs[label] = {name: (out / name).read_bytes() for name in artifacts}
    reference = outputs["w1a"]
    identical = all(outputs[label] == reference for label in ("w1b", "w8a", "w8b"))
    elapsed = time.time() - start
    ok = identical and elapsed < 120.0
    report(8, ok, f"4 runs x {len(artifacts)} artifacts byte-identical across worker counts ({elapsed:.2f}s)")


def test_criterion_9_channel_closed_form():
    start = time.time()
    from risbeam.channel import RfParams

    rf = RfParams(carrier_freq_hz=5.375e9)
    mag = abs(freespace_coeff(1.0, rf))
    rel = abs(mag - FREESPACE_MAG_1M) / FREESPACE_MAG_1M
    elapsed = time.time() - start
    ok = rel < 1e-7 and f"{mag:.5g}" == "0.0044385" and elapsed < 1.0
    report(9, ok, f"|h| at 1 m = {mag:.6e} (4.4385e-3 to 5 figures), rel err {rel:.1e} ({elapsed:.2f}s)")


def mirror_vec(v: Vec3) -> Vec3:
    return Vec3(-v.x, v.y, v.z)


def mirror_axis_keep_handedness(v: Vec3) -> Vec3:
    # -M * v for M = diag(-1, 1, 1): restores right-handedness of the triad
    return Vec3(v.x, -v.y, -v.z)


def test_criterion_10_mirror_symmetry():
    start = time.time()
    base = load_preset("area1_near")
    # tilt the panel so the mirror is non-trivial, and crop to a 10x10 grid
    tilt = math.radians(10.0)

    def rot_z(v: Vec3) -> Vec3:
        return Vec3(
            v.x * math.cos(tilt) - v.y * math.sin(tilt),
            v.x * math.sin(tilt) + v.y * math.cos(tilt),
            v.z,
        )

    pose = Pose(
        origin=Vec3(0.2, 0.0, 3.6),
        right=rot_z(base.pose.right),
        up=base.pose.up,
        normal=rot_z(base.pose.normal),
    )
    grid = GridSpec(
        origin=Vec3(-0.35, 3.0, 1.1),
        axis_u=base.grid.axis_u,
        axis_v=base.grid.axis_v,
        count_u=10,
        count_v=10,
        spacing_m=0.1,
    )
    scenario = dataclasses.replace(
        base,
        pose=pose,
        tx_position=pose.origin + pose.normal.scaled(0.587),
        rx_position=Vec3(0.15, 3.5, 1.1),
        grid=grid,
    )
    mirrored = dataclasses.replace(
        scenario,
        pose=Pose(
            origin=mirror_vec(pose.origin),
            right=mirror_axis_keep_handedness(pose.right),
            up=mirror_vec(pose.up),
            normal=mirror_vec(pose.normal),
        ),
        tx_position=mirror_vec(scenario.tx_position),
        rx_position=mirror_vec(scenario.rx_position),
        grid=GridSpec(
            origin=mirror_vec(grid.origin),
            axis_u=mirror_vec(grid.axis_u),
            axis_v=mirror_vec(grid.axis_v),
            count_u=grid.count_u,
            count_v=grid.count_v,
            spacing_m=grid.spacing_m,
        ),
    )
    original = sweep_targets(scenario)
    reflected = sweep_targets(mirrored)
    worst = float(np.max(np.abs(original.values - reflected.values)))
    elapsed = time.time() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    report(10, ok, f"mirrored 10x10 map matches cell-for-cell, worst diff {worst:.2e} dB ({elapsed:.2f}s)")
