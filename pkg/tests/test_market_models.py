import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from flashlab.laws import Exponential, PointMass, RandomSign, TwoPoint, Uniform
from flashlab.market_models import (
    Constant,
    Deterministic,
    Dividend,
    ExponentialClock,
    FirstHitting,
    GaussianWalk,
    JumpSpec,
    LinearDrift,
    ModelError,
    ModelSpec,
    OffGridError,
    PathGenerator,
    Predictability,
    RightJump,
    ScenarioTree,
    TimeGrid,
    TreeNode,
    binomial_tree,
    build_ladlag_model,
    build_tree,
    enumerate_trees,
    random_tree,
    sample_paths,
    tree_paths,
)

from conftest import flat_jump_model


# ---------------------------------------------------------------- grid

@given(st.integers(1, 500), st.floats(0.1, 10))
def test_grid_endpoints_and_monotone(n, horizon):
    g = TimeGrid(n, horizon)
    assert g.times[0] == 0.0 and g.times[-1] == horizon
    assert np.all(np.diff(g.times) > 0)


def test_off_grid_time_is_rejected_not_rounded():
    g = TimeGrid(10, 1.0)
    assert g.index_of(0.3) == 3
    with pytest.raises(OffGridError):
        g.index_of(0.35)
    with pytest.raises(OffGridError):
        PathGenerator(flat_jump_model(t=0.35), g)


# ---------------------------------------------------------------- paths

def test_flat_full_point_mass_path(grid16):
    spec = flat_jump_model(size=0.3, x0=1.0)
    p = PathGenerator(spec, grid16).sample(seed=1)
    before = grid16.times < 0.5
    assert np.all(p.values[before] == 1.0)
    assert np.allclose(p.values[~before], 1.3, rtol=0, atol=1e-15)
    assert p.view(0).tag("J.size") == 0.3


def test_escrowed_dividend_gains_jump():
    g = TimeGrid(10, 1.0)
    spec = ModelSpec(10.0, Constant(), (), dividend=Dividend(1.0, 0.4, 0.5))
    batch = sample_paths(PathGenerator(spec, g), 20, seed=3)
    i = g.index_of(0.5)
    for p in batch:
        assert p.dX[i] == pytest.approx(0.6, abs=1e-15)
        assert p.extras["ex_dividend"][i] - p.extras["ex_dividend"][i - 1] == pytest.approx(-0.4)
        assert p.view(0).tag("dividend.size") == pytest.approx(0.6)


def test_dividend_fraction_must_lie_in_unit_interval():
    with pytest.raises(ModelError):
        Dividend(1.0, 1.0, 0.5)


def test_none_two_point_hides_sign_before_jump(grid16):
    spec = flat_jump_model(predictability=Predictability.NONE, law=TwoPoint(0.2, -0.2))
    batch = sample_paths(PathGenerator(spec, grid16), 200, seed=11)
    signs = {np.sign(p.jump_at("J").dX) for p in batch}
    assert signs == {1.0, -1.0}
    i = grid16.index_of(0.5)
    for p in batch[:20]:
        assert not p.view(i, strict=True).knows("J.sign")
        assert not p.view(i - 1).knows("J.size")
        assert p.view(i).knows("J.sign")


def test_full_pre_jump_view_regenerates_jump(grid16):
    spec = flat_jump_model(law=Uniform(0.1, 0.9))
    i = grid16.index_of(0.5)
    for p in sample_paths(PathGenerator(spec, grid16), 50, seed=2):
        assert p.view(i, strict=True).tag("J.size") == pytest.approx(p.values[i] - p.left_limits[i], abs=1e-12)


def test_none_pre_jump_view_independent_of_sign():
    # chi-square test of independence between the last pre-jump increment sign and sign(ΔX_T)
    g = TimeGrid(8, 1.0)
    spec = ModelSpec(0.0, GaussianWalk(0.3), (JumpSpec(Deterministic(0.5), TwoPoint(0.2, -0.2), Predictability.NONE, "J"),))
    batch = sample_paths(PathGenerator(spec, g), 10_000, seed=5)
    i = g.index_of(0.5)
    pre = np.sign(batch.values[:, i - 1] - batch.values[:, i - 2]) > 0
    jump = batch.jump_sizes("J") > 0
    table = np.array([[np.sum(pre & jump), np.sum(pre & ~jump)], [np.sum(~pre & jump), np.sum(~pre & ~jump)]])
    assert stats.chi2_contingency(table).pvalue > 0.01


def test_direction_only_reveals_sign_early_size_late(grid16):
    spec = flat_jump_model(predictability=Predictability.DIRECTION_ONLY, law=RandomSign(Uniform(0.1, 0.3)))
    p = PathGenerator(spec, grid16).sample(seed=9)
    i = grid16.index_of(0.5)
    v = p.view(i, strict=True)
    assert v.tag("J.sign") == np.sign(p.dX[i])
    assert not v.knows("J.size")


@given(st.integers(0, 2**31 - 1))
def test_ledger_consistency(seed):
    g = TimeGrid(12, 1.0)
    spec = ModelSpec(1.0, GaussianWalk(0.2), (
        JumpSpec(Deterministic(0.25), TwoPoint(0.4, -0.1), Predictability.FULL, "a"),
        JumpSpec(Deterministic(0.75), Uniform(0.1, 0.2), Predictability.NONE, "b"),
    ), ladlag=RightJump(0.5, PointMass(1.0)))
    p = PathGenerator(spec, g).sample(seed)
    ledger = np.zeros(len(g))
    for r in p.jumps:
        ledger[r.index] = r.dX
    assert np.allclose(p.values - p.left_limits, ledger, rtol=0, atol=1e-12)
    assert p.dX[0] == 0.0
    for i in range(len(g)):
        has = any(r.index == i for r in p.jumps)
        assert has == (p.values[i] != p.left_limits[i] or p.right_values[i] != p.values[i])


def test_ladlag_right_jump_step_path():
    g = TimeGrid(10, 1.0)
    spec = ModelSpec(1.0, Constant(), (), ladlag=RightJump(0.5, PointMass(1.0)))
    p = build_ladlag_model(spec, g).sample(0)
    t = g.times
    assert np.all(p.values[t <= 0.5] == 1.0) and np.all(p.values[t > 0.5] == 2.0)
    assert p.right_values[g.index_of(0.5)] == 2.0
    assert np.array_equal(p.dX, np.zeros(len(g)))


def test_ladlag_size_revealed_at_jump_time():
    g = TimeGrid(10, 1.0)
    spec = ModelSpec(1.0, Constant(), (), ladlag=RightJump(0.5, TwoPoint(0.5, 2.0)))
    p = PathGenerator(spec, g).sample(4)
    i = g.index_of(0.5)
    assert p.view(i).tag("right.size") in (0.5, 2.0)
    assert not p.view(i - 1).knows("right.size")


def test_ladlag_rejects_zero_jump_and_missing_spec():
    with pytest.raises(ModelError):
        RightJump(0.5, PointMass(0.0))
    with pytest.raises(ModelError):
        build_ladlag_model(flat_jump_model(), TimeGrid(10))


def test_jump_collision_and_time_zero_rejected():
    g = TimeGrid(10, 1.0)
    two = ModelSpec(1.0, Constant(), (JumpSpec(Deterministic(0.5), PointMass(1.0)),
                                      JumpSpec(Deterministic(0.5), PointMass(2.0))))
    with pytest.raises(ModelError):
        PathGenerator(two, g)
    with pytest.raises(ModelError):
        PathGenerator(flat_jump_model(t=0.0), g)


def test_exponential_clock_requires_none():
    with pytest.raises(ModelError):
        JumpSpec(ExponentialClock(2.0), PointMass(1.0), Predictability.FULL)
    js = JumpSpec(ExponentialClock(2.0), PointMass(1.0), Predictability.NONE, "E")
    g = TimeGrid(50, 1.0)
    batch = sample_paths(PathGenerator(ModelSpec(1.0, Constant(), (js,)), g), 4000, seed=8)
    occurred = np.isfinite(batch.jump_sizes("E")).mean()
    assert occurred == pytest.approx(1 - math.exp(-2.0), abs=3 * math.sqrt(0.25 / 4000))


def test_first_hitting_jump_lands_at_hit():
    g = TimeGrid(100, 1.0)
    spec = ModelSpec(0.0, LinearDrift(1.0), (JumpSpec(FirstHitting(0.5), PointMass(1.0), Predictability.FULL, "H"),))
    p = PathGenerator(spec, g).sample(0)
    assert p.jump_at("H").index == 50


def test_flat_no_jump_paths_constant():
    batch = sample_paths(PathGenerator(ModelSpec(3.0), TimeGrid(20)), 10, seed=1)
    assert np.all(batch.values == 3.0)


def test_gaussian_walk_terminal_variance():
    g = TimeGrid(4, 1.0)
    batch = sample_paths(PathGenerator(ModelSpec(0.0, GaussianWalk(0.2)), g), 100_000, seed=12)
    d = batch.values[:, -1] - batch.values[:, 0]
    var = d.var(ddof=1)
    se = 0.04 * math.sqrt(2 / (len(d) - 1))
    assert abs(var - 0.04) < 3 * se


def test_sampling_is_reproducible_and_substream_stable(grid16):
    spec = ModelSpec(1.0, GaussianWalk(0.2), (JumpSpec(Deterministic(0.5), Exponential(1.0), Predictability.NONE, "J"),))
    gen = PathGenerator(spec, grid16)
    a, b = gen.sample(7), gen.sample(7)
    assert a.csv_text() == b.csv_text()
    big = sample_paths(gen, 10, seed=3)
    small = sample_paths(gen, 3, seed=3)
    assert np.array_equal(big.values[:3], small.values)
    assert not np.array_equal(big.values[0], big.values[1])


def test_path_csv_columns(flat_full):
    _, gen = flat_full
    lines = gen.sample(0).csv_text().splitlines()
    assert lines[0] == "t,X,X_left,X_right,dX,dXplus"
    assert len(lines) == 18


def test_model_json_round_trip_and_hash():
    spec = ModelSpec(2.0, GaussianWalk(0.1, 0.05), (
        JumpSpec(Deterministic(0.5), RandomSign(Uniform(0.1, 0.3), 0.7), Predictability.DIRECTION_ONLY, "J"),
        JumpSpec(ExponentialClock(1.5), Exponential(2.0, 0.1), Predictability.NONE, "E"),
    ), dividend=Dividend(1.0, 0.3, 0.25), ladlag=RightJump(0.75, TwoPoint(1.0, 0.5)))
    again = ModelSpec.from_json(spec.to_json())
    assert again == spec
    assert again.spec_hash() == spec.spec_hash()
    assert '"schema_version": 1' in spec.to_json()
    with pytest.raises(ModelError):
        ModelSpec.from_dict({**spec.to_dict(), "schema_version": 99})


# ---------------------------------------------------------------- trees

def test_binomial_tree_one_period():
    t = binomial_tree(1, 2, Fraction(1, 2))
    assert [t.price(c) for c in t.children(0)] == [2, Fraction(1, 2)]
    assert sum(t.nodes[c].prob for c in t.children(0)) == 1


def test_enumeration_count_matches_combinatorics():
    trees = list(enumerate_trees(2, 2, (-1, 0, 1)))
    assert len(trees) == 3 ** (2 + 4)
    assert len({tuple(n.price for n in t.nodes) for t in trees}) == len(trees)


def test_zero_probability_branch_rejected():
    with pytest.raises(ModelError):
        build_tree(1, 2, lambda n, c, r: c, lambda n, b, r: [1, 0])
    with pytest.raises(ModelError):
        build_tree(1, 2, lambda n, c, r: c, lambda n, b, r: [Fraction(1, 3), Fraction(1, 3)])


def test_depth_and_branching_limits():
    with pytest.raises(ModelError):
        build_tree(6, 2, lambda n, c, r: 0, lambda n, b, r: [Fraction(1, b)] * b)
    with pytest.raises(ModelError):
        build_tree(1, 5, lambda n, c, r: 0, lambda n, b, r: [Fraction(1, b)] * b)


def test_leaves_must_share_terminal_time():
    nodes = [TreeNode(0, 0, 0, None, 1), TreeNode(1, 1, 1, 0, Fraction(1, 2)),
             TreeNode(2, 1, -1, 0, Fraction(1, 2)), TreeNode(3, 2, 0, 1, 1)]
    with pytest.raises(ModelError):
        ScenarioTree(nodes)


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_random_trees_valid_and_reproducible(seed, depth):
    a, b = random_tree(depth, seed), random_tree(depth, seed)
    assert a.to_dict() == b.to_dict()
    for n in a.internal_nodes():
        assert sum(a.nodes[c].prob for c in a.children(n)) == 1
    assert ScenarioTree.from_dict(a.to_dict()).to_dict() == a.to_dict()


def test_tree_paths_probabilities_sum_to_one():
    t = random_tree(3, 42)
    paths = tree_paths(t)
    assert sum(p for _, p in paths) == 1
    for path, _ in paths:
        assert np.allclose(path.values - path.left_limits, path.dX, rtol=0, atol=1e-12)
