"""Acceptance criteria 1-11.

Each test records one PASS/FAIL line; the lines are collected in the
"acceptance criteria" section at the end of the pytest run.
"""

import time

import numpy as np
import pytest

from qrw2d import asymptotics, checks, genfun, oracles, simulate, variety
from qrw2d.model import builtin_models, make_A, make_B, make_grover, make_S

BUILTINS = builtin_models()


def exact_profile(model, n):
    return simulate.probability_profile(simulate.evolve(model, simulate.basis(1), n))


def test_criterion_1_unitarity(criterion):
    worst, slowest = 0.0, 0.0
    for model in BUILTINS.values():
        t0 = time.perf_counter()
        total = float(exact_profile(model, 400).sum())
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, abs(total - 1.0))
    ok = worst <= 1e-10 and slowest < 10.0
    criterion(1, ok, f"max |P - 1| = {worst:.2e} after 400 steps, slowest {slowest:.2f} s")
    assert ok


def test_criterion_2_series_oracle(criterion):
    worst = 0.0
    for model in BUILTINS.values():
        for n in range(9):
            for j in range(1, 5):
                sim = simulate.evolve(model, simulate.basis(j), n).amps
                ref = oracles.matrix_power_field(model, simulate.basis(j), n)
                worst = max(worst, float(np.max(np.abs(sim - ref))))
    ok = worst <= 1e-12
    criterion(2, ok, f"max |sim - (MU)^n coefficient| = {worst:.2e} for n <= 8")
    assert ok


def test_criterion_3_torality(criterion):
    worst = max(genfun.check_torality(m, 10_000)["max_deviation"] for m in BUILTINS.values())
    ok = worst < 1e-8
    criterion(3, ok, f"max ||z| - 1| = {worst:.2e} over 1e4 torus points per model")
    assert ok


def test_criterion_4_smoothness(criterion):
    models = [make_S(1 / 8), make_S(1 / 2), make_S(7 / 8), make_A(0.15), make_A(0.45)]
    grads = {m.label: variety.min_grad_norm(m, 128) for m in models}
    worst = min(grads.values())
    ok = worst > 1e-3
    criterion(4, ok, f"min |grad H| on 128x128x4 = {worst:.3e} ({min(grads, key=grads.get)})")
    assert ok


def test_criterion_5_B_singular_set(criterion):
    lines, ok = [], True
    for t in (1 / 3, 1 / 2, 2 / 3):
        model = make_B(t)
        found = variety.singular_points(model)
        expected = [np.array([a, b, np.angle(z)]) for a, b, z in
                    [(0, 0, np.sqrt(t / 2) + 1j * np.sqrt(1 - t / 2)),
                     (0, 0, np.sqrt(t / 2) - 1j * np.sqrt(1 - t / 2)),
                     (np.pi, np.pi, -np.sqrt(t / 2) - 1j * np.sqrt(1 - t / 2)),
                     (np.pi, np.pi, -np.sqrt(t / 2) + 1j * np.sqrt(1 - t / 2))]]
        worst = max(min(np.max(variety.circ_dist(f.point.as_array(), e)) for f in found)
                    for e in expected) if found else np.inf
        ok &= len(found) == 4 and worst < 1e-6
        lines.append(f"t={t:.3f}: {len(found)} points, max dist {worst:.1e}")
    criterion(5, ok, "; ".join(lines))
    assert ok


def test_criterion_6_curvature(criterion):
    lines, ok = [], True
    for model in (make_S(1 / 8), make_B(2 / 3)):
        e = checks.curvature_errors(model, 100, seed=0)
        ok &= e["graph_vs_implicit"] <= 1e-6
        ok &= e["graph_vs_area"] <= 1e-3 and e["implicit_vs_area"] <= 1e-3
        lines.append(f"{model.label}: graph/implicit {e['graph_vs_implicit']:.1e}, "
                     f"vs Jacobian {max(e['graph_vs_area'], e['implicit_vs_area']):.1e}")
    criterion(6, ok, "; ".join(lines))
    assert ok


def interior_directions(model, count=24, seed=0):
    """Parity-correct (r, s) at n = 100 whose velocity is an Inside direction."""
    rng = np.random.default_rng(seed)
    picked = []
    seen = set()
    while len(picked) < count:
        r, s = (int(x) for x in rng.integers(-70, 71, 2))
        if (r + s) % 2 or (r, s) in seen:
            continue
        seen.add((r, s))
        if asymptotics.analyze(model, r, s, 100).status == asymptotics.INSIDE:
            picked.append((r, s))
    return picked


def median_errors(model, dirs, ns=(100, 200, 400)):
    out = {}
    for n in ns:
        prob = exact_profile(model, n)
        k = n // 100
        errs = []
        for r, s in dirs:
            rep = asymptotics.analyze(model, k * r, k * s, n)
            exact = prob[k * r + n, k * s + n]
            errs.append(abs(rep.predicted_probability - exact) / exact)
        out[n] = float(np.median(errs))
    return out


def test_criterion_7_interior_law(criterion):
    t0 = time.perf_counter()
    lines, ok = [], True
    for model in (make_B(1 / 2), make_S(1 / 8)):
        dirs = interior_directions(model)
        med = median_errors(model, dirs)
        ns = np.array(sorted(med))
        slope = float(np.polyfit(np.log(ns), np.log([med[n] for n in ns]), 1)[0])
        ok &= len(dirs) >= 20 and med[200] <= 0.2 and slope <= -0.3
        lines.append(f"{model.label}: median {med[100]:.3f}/{med[200]:.3f}/{med[400]:.3f} "
                     f"at n=100/200/400, slope {slope:.2f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    criterion(7, ok, "; ".join(lines) + f"; {elapsed:.1f} s")
    assert ok


def test_criterion_8_outside_decay(criterion):
    n, margin = 200, 0.05
    lines, ok = [], True
    for model in (make_B(1 / 2), make_S(1 / 8)):
        prob = exact_profile(model, n)
        r = np.arange(-n, n + 1)
        R, S = np.meshgrid(r, r, indexing="ij")
        v = np.stack([R / n, S / n], -1)
        d = asymptotics.gauss_image_for(model).distance(v.reshape(-1, 2)).reshape(R.shape)
        cand = (d > margin) & ((R + S) % 2 == 0) & (np.abs(R) + np.abs(S) <= n)
        ii, jj = np.nonzero(cand)
        pick = np.random.default_rng(0).choice(len(ii), 10, replace=False)
        worst = float(prob[ii[pick], jj[pick]].max())
        census = float(np.mean(prob[cand] < 1e-12))
        ok &= worst < 1e-12
        lines.append(f"{model.label}: max P over 10 = {worst:.1e} "
                     f"(all {cand.sum()} outside sites: {census:.1%} below 1e-12, "
                     f"max {prob[cand].max():.1e})")
    criterion(8, ok, "; ".join(lines))
    assert ok


def test_criterion_9_containment(criterion):
    n, dilation = 200, 0.05
    lines, ok = [], True
    for model in (make_B(1 / 2), make_S(1 / 8), make_grover()):
        prob = exact_profile(model, n)
        r = np.arange(-n, n + 1) / n
        v = np.stack(np.meshgrid(r, r, indexing="ij"), -1).reshape(-1, 2)
        d = asymptotics.gauss_image_for(model).distance(v).reshape(prob.shape)
        mass = float(prob[d <= dilation].sum())
        ok &= mass >= 0.999
        lines.append(f"{model.label}: {mass:.6f}")
    criterion(9, ok, "mass inside dilated region " + ", ".join(lines))
    assert ok


def test_criterion_10_S_symmetries(criterion):
    lines, ok = [], True
    for t in (1 / 8, 1 / 2, 7 / 8):
        model = make_S(t)
        rep = variety.symmetry_check(model, 1000)
        pts = variety.gamma_level_points(model, np.pi / 4)
        target = np.array([[np.pi, np.pi / 2], [0.0, 3 * np.pi / 2]])
        match = len(pts) == 2 and all(
            min(np.max(variety.circ_dist(p[:2], q)) for p in pts) < 1e-6 for q in target)
        ok &= rep["max_residual"] <= 1e-10 and rep["max_velocity_error"] <= 1e-8 and match
        lines.append(f"t={t:.3f}: residual {rep['max_residual']:.1e}, velocity "
                     f"{rep['max_velocity_error']:.1e}, pi/4 locus {len(pts)} points")
    criterion(10, ok, "; ".join(lines))
    assert ok


def test_criterion_11_parity(criterion):
    rng = np.random.default_rng(11)
    n_max = 40
    fields = {}
    bad = 0
    models = list(BUILTINS.values())
    for k in range(1000):
        model = models[k % len(models)]
        n = int(rng.integers(1, n_max + 1))
        r, s = (int(x) for x in rng.integers(-n, n + 1, 2))
        if (r + s - n) % 2 == 0:
            s = s + 1 if s < n else s - 1
        key = (model.label, n)
        if key not in fields:
            fields[key] = simulate.evolve(model, simulate.basis(1), n)
        exact_zero = not np.any(fields[key].amps[r + n, s + n, :])
        pred = asymptotics.analyze(model, r, s, n)
        pred_zero = pred.predicted_probability == 0.0 and not np.any(pred.amplitudes)
        bad += not (exact_zero and pred_zero)
    ok = bad == 0
    criterion(11, ok, f"{1000 - bad}/1000 parity-violating triples give exact 0 and predicted 0")
    assert ok
