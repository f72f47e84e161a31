"""End-to-end acceptance gate: twelve criteria, one pass/fail line each.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines
are printed at the end of the session (and inline with ``-s``).
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from groovegait import formats
from groovegait.cli import main
from groovegait.fit import FitProblem, ObservationSeries, fit_golden, fit_nelder_mead
from groovegait.gait import GaitParams
from groovegait.mesh import is_watertight, ridge_volume, slab_volume, stl_bytes, substrate_mesh
from groovegait.plan import closest_approach, plan_greedy, refine, resimulate
from groovegait.sim import Scenario, groove_offsets, run, summarize, sweep
from groovegait.substrate import GrooveSpec, SubstrateTile, WorldMap

RESULTS = {}


def report(n, title, ok, detail):
    line = f"AC-{n:02d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def uniform(angle, cycles, heading=0.0, rear=(0.0, 0.0), **gait):
    return Scenario(WorldMap.uniform(angle), GaitParams(**gait), rear, heading, cycles)


def test_ac01_baseline_straightness():
    sc = uniform(0.0, 500)
    t0 = time.perf_counter()
    traj = run(sc)
    elapsed = time.perf_counter() - t0
    worst = float(np.max(np.abs(traj.heading_deg)))
    report(1, "baseline straightness", worst < 1e-12 and elapsed < 0.1,
           f"max |heading| = {worst:.3g} deg, {elapsed * 1e3:.2f} ms")


def test_ac02_alignment_ordering():
    rows = sweep(uniform(0.0, 100), [0.0, 5.0, 15.0, 30.0])
    change = [abs(r.final_heading_deg) for r in rows]
    ok = change[0] == 0.0 and all(b > a for a, b in zip(change, change[1:]))
    report(2, "alignment ordering", ok,
           "|final heading| = " + ", ".join(f"{c:.4f}" for c in change))


def test_ac03_fixed_point():
    traj = run(uniform(30.0, 2000, k_front=0.5))
    final = float(traj.heading_deg[-1])
    delta = np.abs(groove_offsets(traj))
    monotone = bool(np.all(np.diff(delta) <= 0))
    report(3, "fixed point", abs(final - 30.0) < 0.01 and monotone,
           f"final heading {final:.12f} deg, |delta| monotone: {monotone}")


def test_ac04_sign_convention():
    a = run(formats.load_scenario("fig8a")).heading_deg[-1]
    b = run(formats.load_scenario("fig8b")).heading_deg[-1]
    report(4, "sign convention", a > 0 and b < 0, f"fig8a {a:+.4f} deg, fig8b {b:+.4f} deg")


def test_ac05_history_dependence():
    sc = formats.load_scenario("fig9a")
    final = float(run(sc).heading_deg[-1])
    only = replace(sc, world=sc.world.with_angle(-35.0))
    alone = float(run(only).heading_deg[-1])
    ok = -20.0 <= final <= -10.0 and abs(final - alone) >= 5.0
    report(5, "history-dependence anchor", ok,
           f"fig9a {final:+.4f} deg (k_front {sc.params.k_front}), "
           f"-35 only {alone:+.4f} deg, gap {abs(final - alone):.3f} deg")


def _rotate(p, phi):
    c, s = math.cos(phi), math.sin(phi)
    return np.stack([c * p[:, 0] - s * p[:, 1], s * p[:, 0] + c * p[:, 1]], axis=1)


def _fold_groove(a):
    return (a + 90.0) % 180.0 - 90.0


def test_ac06_exact_invariants():
    params = dict(k_front=0.5, k_rear=0.2)
    # mirror: tiles reflected across the x axis, angles and heading negated
    world = WorldMap((SubstrateTile(0, -50, 100, -150, 200, GrooveSpec(12.0)),
                      SubstrateTile(1, 100, 400, -120, 90, GrooveSpec(-27.0))),
                     GrooveSpec(40.0))
    mirror = WorldMap(tuple(SubstrateTile(t.id, t.x_min_mm, t.x_max_mm, -t.y_max_mm,
                                          -t.y_min_mm, t.groove.mirrored())
                            for t in world.tiles), world.background.mirrored())
    sc = Scenario(world, GaitParams(**params), (0.0, 3.0), 4.0, 300)
    t1 = run(sc)
    t2 = run(replace(sc, world=mirror, initial_rear_mm=(0.0, -3.0), initial_heading_deg=-4.0))
    mirror_err = max(np.max(np.abs(t1.front - t2.front * (1, -1))),
                     np.max(np.abs(t1.rear - t2.rear * (1, -1))))

    # rotation by phi (counter-clockwise) on a uniform tile
    phi_deg = 37.0
    phi = math.radians(phi_deg)
    base = uniform(20.0, 1000, heading=5.0, rear=(3.0, -4.0), **params)
    rear0 = _rotate(np.array([base.initial_rear_mm]), phi)[0]
    rotated = Scenario(WorldMap.uniform(_fold_groove(20.0 - phi_deg)), base.params,
                       tuple(rear0), 5.0 - phi_deg, 1000)
    r1, r2 = run(base), run(rotated)
    rot_err = float(np.max(np.abs(_rotate(r1.front, phi) - r2.front)))

    # translation of the whole tiled world
    dx, dy = 123.456, -78.9
    moved = WorldMap(tuple(SubstrateTile(t.id, t.x_min_mm + dx, t.x_max_mm + dx,
                                         t.y_min_mm + dy, t.y_max_mm + dy, t.groove)
                           for t in world.tiles), world.background)
    long = replace(sc, cycles=1000)
    m1 = run(long)
    m2 = run(replace(long, world=moved, initial_rear_mm=(dx, 3.0 + dy)))
    trans_err = float(np.max(np.abs(m2.front - m1.front - (dx, dy))))

    # body length per phase and stroke accounting
    lengths = np.hypot(*(t1.front - t1.rear).T)
    want = np.where(np.arange(len(t1)) % 2 == 0, 25.0, 27.0)
    length_err = float(np.max(np.abs(lengths - want)))
    beta_run = run(uniform(15.0, 1000, beta=0.7, **params))
    path = summarize(beta_run).path_length_mm
    path_rel = abs(path - 0.7 * 2.0 * 1000) / (0.7 * 2.0 * 1000)

    ok = (mirror_err <= 1e-12 and rot_err <= 1e-9 and trans_err <= 1e-9
          and length_err <= 1e-12 and path_rel <= 1e-9)
    report(6, "exact invariants", ok,
           f"mirror {mirror_err:.2g} mm, rotation {rot_err:.2g} mm, translation "
           f"{trans_err:.2g} mm, |F-R| {length_err:.2g} mm, path {path_rel:.2g} rel")


def test_ac07_linearization():
    # a -1 deg groove puts the normal 1 deg counter-clockwise of a 0 deg heading
    traj = run(uniform(-1.0, 1, k_front=0.5, k_rear=0.0))
    measured = math.degrees(traj.axis_rad[2] - traj.axis_rad[0])
    predicted = 0.5 * 2.0 / 27.0 * 1.0
    rel = abs(measured - predicted) / predicted
    report(7, "linearization oracle", rel < 0.01,
           f"measured {measured:.6f} deg/cycle, predicted {predicted:.6f}, rel err {rel:.2e}")


def test_ac08_calibration_oracle():
    truth = uniform(30.0, 60, k_front=0.35)
    traj = run(truth)
    pts = tuple((float(traj.times[i]), float(traj.heading_deg[i]))
                for i in range(0, len(traj), 6))
    series = ObservationSeries(replace(truth, params=GaitParams()), pts)
    problem = FitProblem((series,), ("k_front",))
    g1, g2 = fit_golden(problem), fit_golden(problem)
    n1, n2 = fit_nelder_mead(problem), fit_nelder_mead(problem)
    kg, kn = g1.params["k_front"], n1.params["k_front"]
    ok = abs(kg - 0.35) < 1e-3 and abs(kn - 0.35) < 1e-3 and g1 == g2 and n1 == n2
    report(8, "calibration oracle", ok,
           f"golden {kg:.7f}, nelder-mead {kn:.7f}, reruns identical: {g1 == g2 and n1 == n2}")


def test_ac09_planner_closure():
    target, params, rear, heading = formats.load_target("turn30_target")
    palette = formats.load_palette("palette_5deg")
    greedy = plan_greedy(target, palette, params, rear, heading)
    plan = refine(greedy, target, params)
    miss = plan.metrics["final_miss_mm"]
    again = closest_approach(resimulate(plan).front, target.waypoints[-1])
    rel = abs(again - miss) / max(miss, 1e-300)
    course = plan.metrics["total_course_length_mm"]
    ok = miss < 2.0 and rel <= 1e-9 and course == 300.0
    report(9, "planner closure", ok,
           f"greedy miss {greedy.metrics['final_miss_mm']:.4f} mm, refined {miss:.6f} mm, "
           f"resimulated rel diff {rel:.2g}, course {course:g} mm")


def test_ac10_mesh_and_format():
    tiles = [t for name in ("fig8a", "fig8b", "fig9a", "fig9b")
             for t in formats.load_scenario(name).world.tiles]
    tiles += [SubstrateTile(100 + i, 0, 25, -30, 30, GrooveSpec(a))
              for i, a in enumerate((-30.0, -5.0, 5.0, 12.5, 30.0, 90.0))]
    worst, bad = 0.0, []
    for t in tiles:
        mesh = substrate_mesh(t)
        data = stl_bytes(mesh)
        expected = slab_volume(t) + ridge_volume(t)
        rel = abs(mesh.signed_volume() - expected) / expected
        worst = max(worst, rel)
        if not is_watertight(mesh) or len(data) != 84 + 50 * len(mesh) or rel > 1e-6:
            bad.append(t.id)
    report(10, "mesh/format", not bad,
           f"{len(tiles)} tiles, failures {bad}, worst volume rel err {worst:.2g}")


def test_ac11_performance():
    sc = uniform(10.0, 500_000)
    t0 = time.perf_counter()
    traj = run(sc)
    single = time.perf_counter() - t0
    assert len(traj) == 1_000_001
    base = uniform(0.0, 200)
    t0 = time.perf_counter()
    rows = sweep(base, list(np.linspace(-90.0, 90.0, 1000)))
    many = time.perf_counter() - t0
    assert len(rows) == 1000
    report(11, "performance", single < 1.0 and many < 5.0,
           f"1e6 half-cycles {single:.3f} s, 1000 x 200-cycle sweep {many:.3f} s "
           "(kernels compiled beforehand)")


def test_ac12_reproducibility(tmp_path):
    def outputs(d):
        d.mkdir()
        assert main(["simulate", "fig9a", "-o", str(d / "t.csv")]) == 0
        assert main(["sweep", "fig8a", "-o", str(d / "s.csv")]) == 0
        assert main(["plot", str(d / "t.csv"), "--tile-markers", "-o", str(d / "p.svg")]) == 0
        assert main(["plan", "turn30_target", "palette_5deg", "-o", str(d / "plan.txt")]) == 0
        assert main(["mesh", str(d / "plan.txt"), "-o", str(d / "stl"),
                     "--plate-width", "30"]) == 0
        return {p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}

    a, b = outputs(tmp_path / "a"), outputs(tmp_path / "b")
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    kinds = sorted({k.suffix for k in a})
    report(12, "reproducibility", same, f"{len(a)} files ({', '.join(kinds)}) byte-identical")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
