"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict; the lines are printed at the
end of the pytest run (see ``conftest.pytest_terminal_summary``) and when this
file is executed directly with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from flashlab.cli import main as cli_main
from flashlab.costs import build_nonrobust_counterexample, c_bar, epsilon_star
from flashlab.detector import detect_predictable_jumps, find_martingale_measure, verify_equivalence
from flashlab.laws import Exponential, PointMass, RandomSign, TwoPoint, Uniform
from flashlab.market_models import (
    Constant,
    Deterministic,
    GaussianWalk,
    JumpSpec,
    ModelSpec,
    PathGenerator,
    Predictability,
    RightJump,
    TimeGrid,
    binomial_tree,
    enumerate_trees,
    random_tree,
    sample_paths,
)
from flashlab.strategies import (
    evaluate_flash,
    make_bounded_loss_strategy,
    make_constant_profit_strategy,
    make_right_jump_strategy,
    make_sure_profit_strategy,
)

VERDICTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    VERDICTS[n] = f"[acceptance {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, VERDICTS[n]


def jump_model(law, predictability, base=Constant(), x0=10.0, t=0.5):
    return ModelSpec(x0, base, (JumpSpec(Deterministic(t), law, predictability, "J"),))


def test_01_constant_profit_exact():
    t0 = time.perf_counter()
    g = TimeGrid(64, 1.0)
    spec = jump_model(PointMass(0.5), Predictability.FULL)
    batch = sample_paths(PathGenerator(spec, g), 50, seed=1)
    rep = evaluate_flash(make_constant_profit_strategy(spec, g, 2), batch, 10)
    err = float(np.abs(rep.terminal - 1.0).max())
    dt = time.perf_counter() - t0
    record(1, err <= 1e-12 and dt < 1.0, f"max |gains_T - 1| over n=1..10 = {err:.1e}, runtime {dt:.2f}s")


def test_02_diffusive_rate():
    t0 = time.perf_counter()
    g = TimeGrid(2 ** 12, 1.0)
    spec = jump_model(PointMass(0.5), Predictability.FULL, base=GaussianWalk(0.2), x0=0.0)
    batch = sample_paths(PathGenerator(spec, g), 10_000, seed=2)
    rep = evaluate_flash(make_constant_profit_strategy(spec, g, 2), batch, 12)
    offsets_dyadic = np.allclose(rep.offsets[3:10], 2.0 ** -np.arange(4, 11))
    rate = rep.gap_rate(4, 10)
    dt = time.perf_counter() - t0
    ok = offsets_dyadic and abs(rate + 0.5) <= 0.15 and dt < 30
    record(2, ok, f"slope of log2 g_n vs n over n=4..10 = {rate:.3f} (target -0.5 ± 0.15), runtime {dt:.1f}s")


def test_03_negative_control():
    g = TimeGrid(64, 1.0)
    spec = jump_model(TwoPoint(0.3, -0.3), Predictability.NONE)
    batch = sample_paths(PathGenerator(spec, g), 1000, seed=3)
    fs = make_sure_profit_strategy(spec, g)
    rep = evaluate_flash(fs, batch, 8)
    ok = np.all(rep.positions == 0) and np.all(rep.zeta == 0) and np.all(rep.terminal == 0)
    record(3, bool(ok), f"max |xi^n| = {np.abs(rep.positions).max()}, max |zeta| = {np.abs(rep.zeta).max()}")


def test_04_sure_profit_magnitude():
    g = TimeGrid(64, 1.0)
    spec = jump_model(RandomSign(Uniform(0.1, 0.3)), Predictability.DIRECTION_ONLY)
    batch = sample_paths(PathGenerator(spec, g), 2000, seed=4)
    rep = evaluate_flash(make_sure_profit_strategy(spec, g), batch, 8, keep_trajectories=True)
    T = g.index_of(0.5)
    target = np.abs(batch.jump_sizes("J"))[:, None] * (np.arange(len(g)) >= T)[None, :]
    err = float(np.abs(rep.trajectories[-1] - target).max())
    record(4, err <= 1e-9, f"max |gains - |dX_T| 1(T<=t)| = {err:.1e}")


def test_05_bounded_loss():
    g = TimeGrid(2 ** 12, 1.0)
    spec = jump_model(TwoPoint(0.5, -0.5), Predictability.DIRECTION_ONLY, base=GaussianWalk(0.2), x0=0.0)
    batch = sample_paths(PathGenerator(spec, g), 10_000, seed=5)
    C, N = 10.0, 1.0
    rep = evaluate_flash(make_bounded_loss_strategy(spec, g, N=N, C=C), batch, 12)
    floor = rep.loss_floor(n_from=int(N))
    ok = rep.finite.any() and floor >= -2 * C
    record(5, bool(ok), f"min gains on {{tau<inf}} over n=1..12 = {floor:.4f} (bound {-2 * C:g}), "
                        f"{int(rep.finite.sum())} paths with finite tau")


def test_06_right_jump():
    g = TimeGrid(64, 1.0)
    spec = ModelSpec(1.0, Constant(), (), ladlag=RightJump(0.5, PointMass(1.0)))
    batch = sample_paths(PathGenerator(spec, g), 20, seed=6)
    rep = evaluate_flash(make_right_jump_strategy(spec, g, 1), batch, 8, keep_trajectories=True)
    expected = (g.times > 0.5).astype(float)
    at_half = rep.trajectories[-1][:, g.index_of(0.5)]
    ok = np.array_equal(rep.trajectories[-1], np.broadcast_to(expected, rep.trajectories[-1].shape))
    record(6, bool(ok and np.all(at_half == 0)), f"limit gains equal 1(0.5 < t) exactly on {len(batch)} paths")


def test_07_cost_robustness():
    g = TimeGrid(64, 1.0)
    spec = jump_model(PointMass(0.5), Predictability.FULL, x0=10.0)
    batch = sample_paths(PathGenerator(spec, g), 200, seed=7)
    fs = make_constant_profit_strategy(spec, g, 2)
    margins = []
    for eps in (0.001, 0.005, 0.01):
        rep = evaluate_flash(fs, batch, 8, transaction_eps=eps)
        margins.append(float(rep.terminal_net[-1].min() - c_bar(1, eps, 2, 10)))
    star = epsilon_star(1, 2, 10)
    root = abs(c_bar(1, star, 2, 10))
    ok = min(margins) >= 0 and root < 1e-9
    record(7, ok, f"min(gains_net - c_bar) = {min(margins):.2e}, eps* = {star:.7f}, |c_bar(eps*)| = {root:.1e}")


def test_08_nonrobust_counterexample():
    eps, n = 0.1, 100_000
    _, Xt = build_nonrobust_counterexample(eps, Exponential(1.0))
    frac = float(np.mean(sample_paths(Xt, n, seed=8).jump_sizes("eta") <= 0))
    p = 1 - math.exp(-eps)
    se = math.sqrt(p * (1 - p) / n)
    z = (frac - p) / se
    record(8, abs(z) <= 3, f"P(dX~_1 <= 0) = {frac:.5f} vs {p:.5f}, z = {z:+.2f}")


def test_09_discrete_equivalence():
    t0 = time.perf_counter()
    rep = verify_equivalence(enumerate_trees(2, 2, (-1, 0, 1)))
    dt = time.perf_counter() - t0
    ok = rep.n_trees == 729 and rep.ok and dt < 10
    record(9, ok, f"{rep.n_trees} trees, {len(rep.mismatches)} mismatches, runtime {dt:.2f}s")


def test_10_martingale_measure_implication():
    family = list(enumerate_trees(2, 2, (-1, 0, 1))) + [random_tree(3, seed) for seed in range(1000)]
    violations = feasible = 0
    for tree in family:
        res = find_martingale_measure(tree)
        if res.feasible:
            feasible += 1
            violations += bool(detect_predictable_jumps(tree))
    q = find_martingale_measure(binomial_tree(1, 2, Fraction(1, 2)), method="lp").measure.q[0][0]
    ok = violations == 0 and abs(q - 1 / 3) <= 1e-9
    record(10, ok, f"{feasible}/{len(family)} trees with a measure, {violations} violations, q_up = {q:.12f}")


def test_11_reproducibility(tmp_path):
    runs = {
        "simulate": ["simulate", "--n-paths", "20"],
        "run-strategy": ["run-strategy", "--n-paths", "20", "--eps", "0.01"],
        "sweep-costs": ["sweep-costs"],
        "verify-equivalence": ["verify-equivalence", "--random", "50", "--depth", "3"],
    }
    same = True
    for name, args in runs.items():
        outs = []
        for rep in range(2):
            out = tmp_path / f"{name}-{rep}"
            assert cli_main(args + ["--seed", "11", "--out", str(out), "--quiet"]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.suffix in (".csv", ".json")})
        same &= outs[0] == outs[1] and bool(outs[0])
    record(11, same, f"byte-identical CSV/JSON across two runs of {', '.join(runs)}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
