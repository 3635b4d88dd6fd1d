"""Information views, announcing sequences and exact conditional statistics.

The information at grid index ``i`` is the path history up to ``i`` together
with every tag revealed at or before ``i``. The strict-past view at ``i``
(the discrete stand-in for F_{T-}) drops the value and tags of index ``i``
itself but keeps the left limit there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from . import laws
from .market_models import (
    RIGHT,
    Constant,
    Deterministic,
    GaussianWalk,
    LinearDrift,
    ModelError,
    ModelSpec,
    PathSample,
    ScenarioTree,
    TimeGrid,
)

__all__ = [
    "LookaheadError",
    "NoClosedFormError",
    "InformationView",
    "AnnouncingSequence",
    "cond_prob_tree",
    "cond_exp_tree",
    "cond_stats_path",
]


class LookaheadError(LookupError):
    """Something asked for information outside the view."""


class NoClosedFormError(NotImplementedError):
    """The model has no closed form for the requested conditional statistic; use the tree backend."""


class InformationView:
    def __init__(self, path: PathSample, index: int, strict: bool = False):
        if not 0 <= index <= path.grid.n_steps:
            raise ValueError(f"index {index} outside the grid")
        if strict and index == 0:
            raise ValueError("the strict past of t=0 is empty")
        self.path = path
        self.index = int(index)
        self.strict = strict

    @property
    def time(self) -> float:
        return self.path.grid.time(self.index)

    @property
    def last_index(self) -> int:
        """Last grid index whose value is in the view."""
        return self.index - 1 if self.strict else self.index

    def before(self) -> "InformationView":
        return InformationView(self.path, self.index, strict=True)

    def value(self, i: int) -> float:
        if i > self.last_index or i < 0:
            raise LookaheadError(f"X at index {i} is not in the view at index {self.index}")
        return float(self.path.values[i])

    def left_limit(self, i: int) -> float:
        if i > self.index or i < 0:
            raise LookaheadError(f"X_- at index {i} is not in the view at index {self.index}")
        return float(self.path.left_limits[i])

    @property
    def current(self) -> float:
        """X at the view time, or its left limit for a strict view."""
        return self.left_limit(self.index) if self.strict else self.value(self.index)

    def history(self) -> np.ndarray:
        return self.path.values[: self.last_index + 1].copy()

    def _visible(self, reveal: int) -> bool:
        return reveal < self.index if self.strict else reveal <= self.index

    @property
    def tags(self) -> dict[str, float]:
        return {k: v for k, (r, v) in self.path.tags.items() if self._visible(r)}

    def knows(self, name: str) -> bool:
        entry = self.path.tags.get(name)
        return entry is not None and self._visible(entry[0])

    def tag(self, name: str) -> float:
        if not self.knows(name):
            raise LookaheadError(f"tag {name!r} is not revealed at index {self.index}")
        return self.path.tags[name][1]

    def includes(self, other: "InformationView") -> bool:
        """True when everything in ``other`` is also in this view."""
        if other.path is not self.path:
            return False
        if other.last_index > self.last_index or other.index > self.index:
            return False
        return set(other.tags) <= set(self.tags)

    def __repr__(self) -> str:
        kind = "strict " if self.strict else ""
        return f"<{kind}view at t={self.time:g} of path {self.path.path_id}>"


@dataclass(frozen=True)
class AnnouncingSequence:
    """Grid realization of rho_n ↑ T with rho_n < T.

    The offset ``base_offset / 2**n`` is snapped down to the grid and never
    drops below one step.
    """

    grid: TimeGrid
    target: int
    base_offset: float | None = None

    def __post_init__(self):
        if not 1 <= self.target <= self.grid.n_steps:
            raise ValueError(f"announced index must lie in [1, {self.grid.n_steps}], got {self.target}")

    def offset_steps(self, n: int) -> int:
        base = self.grid.horizon if self.base_offset is None else self.base_offset
        steps = math.floor(base / 2 ** n / self.grid.dt + 1e-9)
        return max(steps, 1)

    def offset(self, n: int) -> float:
        return (self.target - self.rho(n)) * self.grid.dt

    def rho(self, n: int) -> int:
        return max(self.target - self.offset_steps(n), 0)

    def _cap(self, n: int) -> int:
        return self.grid.snap_down(float(n))

    def sigma(self, n: int) -> int:
        return min(self.rho(n), self._cap(n))

    def tau(self, n: int) -> int:
        return min(self.target, self._cap(n))


# ---------------------------------------------------------------------------
# tree backend


def _subtree_weights(tree: ScenarioTree, node: int):
    """(leaf, path ids, P(leaf | node)) for every leaf below ``node``."""
    stack = [(node, 1)]
    while stack:
        n, w = stack.pop()
        kids = tree.children(n)
        if not kids:
            yield n, tree.path(n), w
            continue
        for c in kids:
            stack.append((c, w * tree.nodes[c].prob))


def cond_exp_tree(tree: ScenarioTree, node: int, payoff: Callable[[list[int]], object]):
    """E[payoff | node], exact when prices and probabilities are rational.

    ``payoff`` receives the root-to-leaf list of node ids.
    """
    if not 0 <= node < len(tree.nodes):
        raise ValueError(f"node {node} not in tree")
    total = 0
    for leaf, ids, w in _subtree_weights(tree, node):
        v = payoff(ids)
        if v is None:
            raise ValueError(f"payoff undefined on leaf {leaf}")
        total = total + w * v
    return total


def cond_prob_tree(tree: ScenarioTree, node: int, event: Callable[[list[int]], object]):
    def indicator(ids):
        v = event(ids)
        if v is None:
            raise ValueError(f"event undefined on leaf {ids[-1]}")
        return 1 if v else 0

    return cond_exp_tree(tree, node, indicator)


# ---------------------------------------------------------------------------
# path-model backend

TARGETS = ("sign", "size", "clipped_size", "occurs", "right_size")


def cond_stats_path(
    model: ModelSpec,
    view: InformationView,
    target: str,
    *,
    jump: int | str = 0,
    k: float | None = None,
    N: float | None = None,
    C: float | None = None,
) -> float:
    """Exact conditional statistic of one jump of ``model`` given ``view``.

    ``target`` is one of

    * ``"sign"``          P(ΔX_T > 0 | view)
    * ``"size"``          E[ΔX_T | view]
    * ``"clipped_size"``  E[ΔX_T 1{|ΔX_T| in [1/k, k]} | view]
    * ``"occurs"``        P(T <= N, |X_{T-}| <= C, ΔX_T > 0 | view)
    * ``"right_size"``    E[Δ⁺X 1{|Δ⁺X| in [1/k, k]} | view] for the right jump
    """
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    if target == "right_size":
        if model.ladlag is None:
            raise ModelError("model has no right jump")
        _need(k, "k")
        if view.knows(f"{RIGHT}.size"):
            return _clip(view.tag(f"{RIGHT}.size"), k)
        return laws.clipped_mean(model.ladlag.size, 1.0 / k, k)

    name, js = model.jump(jump)
    law = js.size
    size_known = view.knows(f"{name}.size")
    sign_known = view.knows(f"{name}.sign")

    if target == "sign":
        if sign_known:
            return 1.0 if view.tag(f"{name}.sign") > 0 else 0.0
        return laws.prob_positive(law)
    if target == "size":
        if size_known:
            return view.tag(f"{name}.size")
        if sign_known:
            return laws.cond_mean_given_sign(law, int(view.tag(f"{name}.sign")))
        return laws.mean(law)
    if target == "clipped_size":
        _need(k, "k")
        if size_known:
            return _clip(view.tag(f"{name}.size"), k)
        sign = int(view.tag(f"{name}.sign")) if sign_known else None
        return laws.clipped_mean(law, 1.0 / k, k, sign)

    # target == "occurs"
    _need(N, "N")
    _need(C, "C")
    if not view.knows(f"{name}.time"):
        raise NoClosedFormError(f"jump time of {name!r} is not known in the view")
    t_jump = view.tag(f"{name}.time")
    if t_jump > N:
        return 0.0
    p_sign = cond_stats_path(model, view, "sign", jump=jump)
    if p_sign == 0.0:
        return 0.0
    return p_sign * _prob_left_limit_within(model, view, name, t_jump, C)


def _need(x, label):
    if x is None:
        raise ValueError(f"{label} is required for this target")


def _clip(x: float, k: float) -> float:
    return x if 1.0 / k <= abs(x) <= k else 0.0


def _prob_left_limit_within(model: ModelSpec, view: InformationView, name: str, t_jump: float,
                            C: float) -> float:
    """P(|X_{T-}| <= C | view) under the model's continuous part."""
    if math.isinf(C):
        return 1.0
    grid = view.path.grid
    j = grid.index_of(t_jump)
    if view.index >= j:
        return 1.0 if abs(view.left_limit(j)) <= C else 0.0
    i = view.last_index
    x = view.value(i)
    if view.path.ladlag and view.path.right_values is not None:
        if model.ladlag is not None and grid.index_of(model.ladlag.time) == i:
            if not view.knows(f"{RIGHT}.size"):
                raise NoClosedFormError("right jump at the view time is not revealed")
            x += view.tag(f"{RIGHT}.size")
    # scheduled jumps strictly between the view and T shift the left limit
    for other, js in model.named_jumps():
        if other == name or not isinstance(js.time, Deterministic):
            continue
        jo = grid.index_of(js.time.time)
        if i < jo < j:
            if not view.knows(f"{other}.size"):
                raise NoClosedFormError(f"jump {other!r} before T has an unrevealed size")
            x += view.tag(f"{other}.size")
    if model.ladlag is not None:
        r = grid.index_of(model.ladlag.time)
        if i < r < j:
            raise NoClosedFormError("right jump between the view and T")
    horizon = (j - i) * grid.dt
    base = model.base
    if isinstance(base, Constant):
        return 1.0 if abs(x) <= C else 0.0
    if isinstance(base, LinearDrift):
        return 1.0 if abs(x + base.slope * horizon) <= C else 0.0
    if isinstance(base, GaussianWalk):
        mu = x + base.drift * horizon
        sd = base.vol * math.sqrt(horizon)
        if sd == 0:
            return 1.0 if abs(mu) <= C else 0.0
        return float(ndtr((C - mu) / sd) - ndtr((-C - mu) / sd))
    raise NoClosedFormError(f"no closed form for base {base}")
