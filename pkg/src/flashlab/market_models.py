"""Sampled price paths and finite scenario trees with controlled jump structure.

Continuous time lives on a uniform :class:`TimeGrid`. A :class:`ModelSpec`
describes a continuous part plus scheduled jumps, each with a predictability
class that fixes *when* its sign and size enter the information tags:

* ``FULL``            sign and size tagged at t = 0
* ``DIRECTION_ONLY``  sign tagged at t = 0, size at the jump time
* ``NONE``            sign and size tagged at the jump time

An escrowed dividend contributes a fully predictable jump of ``(1 - fraction) * amount``
to the gains process. A right jump (làdlàg model) is tagged at its own time.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Any, Callable, Iterator, Mapping, Sequence, Union

import numpy as np

from .laws import Law, PointMass, law_from_dict

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "ModelError",
    "OffGridError",
    "TimeGrid",
    "Predictability",
    "Deterministic",
    "FirstHitting",
    "ExponentialClock",
    "JumpSpec",
    "Constant",
    "LinearDrift",
    "GaussianWalk",
    "Dividend",
    "RightJump",
    "ModelSpec",
    "JumpRecord",
    "PathSample",
    "PathBatch",
    "PathGenerator",
    "build_scheduled_jump_model",
    "build_ladlag_model",
    "sample_paths",
    "TreeNode",
    "ScenarioTree",
    "build_tree",
    "binomial_tree",
    "enumerate_trees",
    "random_tree",
    "tree_paths",
]


class ModelError(ValueError):
    """Invalid model configuration."""


class OffGridError(ModelError):
    """A configured time does not sit on the grid."""


# ---------------------------------------------------------------------------
# time grid


@dataclass(frozen=True)
class TimeGrid:
    n_steps: int
    horizon: float = 1.0

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ModelError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not self.horizon > 0:
            raise ModelError(f"horizon must be positive, got {self.horizon}")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @cached_property
    def times(self) -> np.ndarray:
        t = np.arange(self.n_steps + 1) * self.horizon / self.n_steps
        t[-1] = self.horizon
        return t

    def __len__(self) -> int:
        return self.n_steps + 1

    def time(self, i: int) -> float:
        return float(self.times[i])

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        """Grid index of time ``t``; raises :class:`OffGridError` instead of rounding."""
        x = t * self.n_steps / self.horizon
        i = round(x)
        if abs(x - i) > tol or not 0 <= i <= self.n_steps:
            raise OffGridError(f"time {t} is not a point of {self}")
        return int(i)

    def snap_down(self, t: float) -> int:
        return int(min(self.n_steps, math.floor(t * self.n_steps / self.horizon + 1e-9)))

    def snap_up(self, t: float) -> int:
        return int(math.ceil(t * self.n_steps / self.horizon - 1e-9))


# ---------------------------------------------------------------------------
# declarative model description


class Predictability(str, enum.Enum):
    FULL = "full"
    DIRECTION_ONLY = "direction_only"
    NONE = "none"


@dataclass(frozen=True)
class Deterministic:
    time: float

    def to_dict(self):
        return {"kind": "deterministic", "time": self.time}


@dataclass(frozen=True)
class FirstHitting:
    """First grid time at which the continuous part reaches ``level``."""

    level: float

    def to_dict(self):
        return {"kind": "first_hitting", "level": self.level}


@dataclass(frozen=True)
class ExponentialClock:
    """Rings at the first grid point after an Exp(rate) time; never announceable."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ModelError(f"clock rate must be positive, got {self.rate}")

    def to_dict(self):
        return {"kind": "exponential_clock", "rate": self.rate}


JumpTime = Union[Deterministic, FirstHitting, ExponentialClock]


def _clock_from_dict(d: dict) -> JumpTime:
    kind = d.get("kind")
    if kind == "deterministic":
        return Deterministic(float(d["time"]))
    if kind == "first_hitting":
        return FirstHitting(float(d["level"]))
    if kind == "exponential_clock":
        return ExponentialClock(float(d["rate"]))
    raise ModelError(f"unknown jump time kind {kind!r}")


@dataclass(frozen=True)
class JumpSpec:
    time: JumpTime
    size: Law
    predictability: Predictability = Predictability.FULL
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "predictability", Predictability(self.predictability))
        if self.size.has_atom_at_zero():
            raise ModelError(f"jump size law {self.size} puts mass on 0; a jump must be nonzero")
        if isinstance(self.time, ExponentialClock) and self.predictability != Predictability.NONE:
            raise ModelError("an exponential clock is not announceable; use predictability NONE")

    def to_dict(self) -> dict:
        d = {
            "time": self.time.to_dict(),
            "size": self.size.to_dict(),
            "predictability": self.predictability.value,
        }
        if self.name is not None:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "JumpSpec":
        return cls(
            _clock_from_dict(d["time"]),
            law_from_dict(d["size"]),
            Predictability(d.get("predictability", "full")),
            d.get("name"),
        )


@dataclass(frozen=True)
class Constant:
    def to_dict(self):
        return {"kind": "constant"}


@dataclass(frozen=True)
class LinearDrift:
    slope: float

    def to_dict(self):
        return {"kind": "linear", "slope": self.slope}


@dataclass(frozen=True)
class GaussianWalk:
    vol: float
    drift: float = 0.0

    def __post_init__(self):
        if self.vol < 0:
            raise ModelError(f"vol must be nonnegative, got {self.vol}")

    def to_dict(self):
        return {"kind": "gaussian", "vol": self.vol, "drift": self.drift}


Base = Union[Constant, LinearDrift, GaussianWalk]


def _base_from_dict(d: dict) -> Base:
    kind = d.get("kind")
    if kind == "constant":
        return Constant()
    if kind == "linear":
        return LinearDrift(float(d["slope"]))
    if kind == "gaussian":
        return GaussianWalk(float(d["vol"]), float(d.get("drift", 0.0)))
    raise ModelError(f"unknown base kind {kind!r}")


@dataclass(frozen=True)
class Dividend:
    """Escrowed dividend: the ex-dividend price drops by ``fraction * amount``."""

    amount: float
    fraction: float
    time: float

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ModelError(f"dividend fraction must lie in (0, 1), got {self.fraction}")
        if self.amount <= 0:
            raise ModelError(f"dividend amount must be positive, got {self.amount}")

    @property
    def gains_jump(self) -> float:
        return self.amount - self.fraction * self.amount

    def to_dict(self):
        return {"amount": self.amount, "fraction": self.fraction, "time": self.time}


@dataclass(frozen=True)
class RightJump:
    time: float
    size: Law

    def __post_init__(self):
        if self.size.has_atom_at_zero():
            raise ModelError("right-jump size must be nonzero")

    def to_dict(self):
        return {"time": self.time, "size": self.size.to_dict()}


DIVIDEND = "dividend"
RIGHT = "right"


@dataclass(frozen=True)
class ModelSpec:
    initial_price: float = 1.0
    base: Base = field(default_factory=Constant)
    jumps: tuple[JumpSpec, ...] = ()
    dividend: Dividend | None = None
    ladlag: RightJump | None = None

    def __post_init__(self):
        object.__setattr__(self, "jumps", tuple(self.jumps))
        names = [n for n, _ in self.named_jumps()]
        if len(set(names)) != len(names):
            raise ModelError(f"duplicate jump names {names}")

    def named_jumps(self) -> list[tuple[str, JumpSpec]]:
        out = [(js.name or f"jump{j}", js) for j, js in enumerate(self.jumps)]
        if self.dividend is not None:
            out.append(
                (
                    DIVIDEND,
                    JumpSpec(
                        Deterministic(self.dividend.time),
                        PointMass(self.dividend.gains_jump),
                        Predictability.FULL,
                        DIVIDEND,
                    ),
                )
            )
        return out

    def jump(self, which: int | str = 0) -> tuple[str, JumpSpec]:
        named = self.named_jumps()
        if isinstance(which, str):
            for n, js in named:
                if n == which:
                    return n, js
            raise ModelError(f"model has no jump named {which!r}")
        try:
            return named[which]
        except IndexError:
            raise ModelError(f"model has no jump #{which}") from None

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "initial_price": self.initial_price,
            "base": self.base.to_dict(),
            "jumps": [js.to_dict() for js in self.jumps],
            "dividend": None if self.dividend is None else self.dividend.to_dict(),
            "ladlag": None if self.ladlag is None else self.ladlag.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ModelSpec":
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ModelError(f"unsupported schema_version {version}")
        div = d.get("dividend")
        lad = d.get("ladlag")
        return cls(
            initial_price=float(d.get("initial_price", 1.0)),
            base=_base_from_dict(d.get("base", {"kind": "constant"})),
            jumps=tuple(JumpSpec.from_dict(j) for j in d.get("jumps", [])),
            dividend=None if div is None else Dividend(float(div["amount"]), float(div["fraction"]), float(div["time"])),
            ladlag=None if lad is None else RightJump(float(lad["time"]), law_from_dict(lad["size"])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))

    def spec_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# sampled paths


@dataclass(frozen=True)
class JumpRecord:
    index: int
    dX: float
    dX_plus: float
    source: str


@dataclass(frozen=True, eq=False)
class PathSample:
    """One trajectory on a grid.

    ``tags`` maps a name to ``(reveal_index, value)``; a tag belongs to the
    information available at every grid time at or after its reveal index.
    """

    grid: TimeGrid
    values: np.ndarray
    jumps: tuple[JumpRecord, ...] = ()
    tags: Mapping[str, tuple[int, float]] = field(default_factory=dict)
    ladlag: bool = False
    extras: Mapping[str, np.ndarray] = field(default_factory=dict)
    path_id: int = 0

    @cached_property
    def dX(self) -> np.ndarray:
        out = np.zeros(len(self.grid))
        for r in self.jumps:
            out[r.index] = r.dX
        return out

    @cached_property
    def dX_plus(self) -> np.ndarray:
        out = np.zeros(len(self.grid))
        for r in self.jumps:
            out[r.index] = r.dX_plus
        return out

    @cached_property
    def left_limits(self) -> np.ndarray:
        return self.values - self.dX

    @cached_property
    def right_values(self) -> np.ndarray | None:
        if not self.ladlag:
            return None
        return self.values + self.dX_plus

    def jump_at(self, source: str) -> JumpRecord | None:
        for r in self.jumps:
            if r.source == source:
                return r
        return None

    def view(self, index: int, strict: bool = False):
        from .filtration import InformationView

        return InformationView(self, index, strict)

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "X", "X_left", "X_right", "dX", "dXplus"])
        right = self.values if self.right_values is None else self.right_values
        for i, t in enumerate(self.grid.times):
            w.writerow(
                [_fmt(t), _fmt(self.values[i]), _fmt(self.left_limits[i]), _fmt(right[i]),
                 _fmt(self.dX[i]), _fmt(self.dX_plus[i])]
            )

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


class PathBatch(Sequence[PathSample]):
    """Paths sharing a grid, stored row-wise in one array."""

    def __init__(self, grid: TimeGrid, values: np.ndarray, jumps, tags, ladlag: bool,
                 extras: Mapping[str, np.ndarray] | None = None, seed: int | None = None,
                 spec_hash: str | None = None):
        self.grid = grid
        self.values = values
        self.jumps = list(jumps)
        self.tags = list(tags)
        self.ladlag = ladlag
        self.extras = dict(extras or {})
        self.seed = seed
        self.spec_hash = spec_hash

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        return PathSample(
            self.grid, self.values[i], self.jumps[i], self.tags[i], self.ladlag,
            {k: v[i] for k, v in self.extras.items()}, path_id=i,
        )

    def jump_sizes(self, source: str) -> np.ndarray:
        """Per-path ΔX of ``source`` (NaN where it did not occur)."""
        out = np.full(len(self), np.nan)
        for p, recs in enumerate(self.jumps):
            for r in recs:
                if r.source == source:
                    out[p] = r.dX if source != RIGHT else r.dX_plus
        return out

    def jump_indices(self, source: str) -> np.ndarray:
        out = np.full(len(self), -1, dtype=np.int64)
        for p, recs in enumerate(self.jumps):
            for r in recs:
                if r.source == source:
                    out[p] = r.index
        return out


class PathGenerator:
    """Deterministic-seeded path sampler for one :class:`ModelSpec`.

    Path ``i`` under seed ``s`` draws from its own substream
    ``SeedSequence(s, spawn_key=(i,))`` and so does not depend on how many
    other paths are sampled alongside it.
    """

    def __init__(self, spec: ModelSpec, grid: TimeGrid):
        self.spec = spec
        self.grid = grid
        self._named = spec.named_jumps()
        self._det_index: dict[str, int] = {}
        for name, js in self._named:
            if isinstance(js.time, Deterministic):
                i = grid.index_of(js.time.time)
                if i == 0:
                    raise ModelError(f"jump {name!r} at t=0; ΔX_0 = 0 by convention")
                if i in self._det_index.values():
                    raise ModelError(f"two scheduled jumps share grid time {js.time.time}")
                self._det_index[name] = i
            elif isinstance(js.time, FirstHitting) and js.time.level == spec.initial_price:
                raise ModelError("hitting level equals the initial price")
        self._right_index: int | None = None
        if spec.ladlag is not None:
            i = grid.index_of(spec.ladlag.time)
            if i >= grid.n_steps:
                raise ModelError("right jump must occur strictly before the horizon")
            if i in self._det_index.values():
                raise ModelError("a right jump cannot share a grid time with a jump")
            self._right_index = i

    @property
    def spec_hash(self) -> str:
        return self.spec.spec_hash()

    def scheduled_index(self, name: str) -> int | None:
        return self._det_index.get(name)

    @property
    def right_index(self) -> int | None:
        return self._right_index

    @staticmethod
    def rng(seed: int, path_index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(path_index,)))

    def sample(self, seed: int, path_index: int = 0) -> PathSample:
        values, jumps, tags, extras = self._simulate(self.rng(seed, path_index))
        return PathSample(self.grid, values, jumps, tags, self.spec.ladlag is not None,
                          extras, path_id=path_index)

    def _continuous_increments(self, rng: np.random.Generator) -> np.ndarray:
        g, base = self.grid, self.spec.base
        inc = np.zeros(g.n_steps + 1)
        if isinstance(base, LinearDrift):
            inc[1:] = base.slope * g.dt
        elif isinstance(base, GaussianWalk):
            z = rng.standard_normal(g.n_steps)
            inc[1:] = base.drift * g.dt + base.vol * math.sqrt(g.dt) * z
        return inc

    def _simulate(self, rng: np.random.Generator):
        g, spec = self.grid, self.spec
        m = g.n_steps + 1
        # draw order is fixed (jump uniforms, right-jump uniforms, base noise)
        # so that models differing only in base level stay coupled
        u = rng.random((len(self._named), 3))
        ur = rng.random(2) if spec.ladlag is not None else None
        inc = self._continuous_increments(rng)
        cont = spec.initial_price + np.cumsum(inc)

        dX = np.zeros(m)
        dXp = np.zeros(m)
        source_at: dict[int, str] = {}
        tags: dict[str, tuple[int, float]] = {}
        for (name, js), (ut, us, um) in zip(self._named, u):
            idx = self._jump_index(name, js, cont, ut)
            size = js.size.draw(us, um)
            sign = 1.0 if size > 0 else -1.0
            if isinstance(js.time, Deterministic):
                tags[f"{name}.time"] = (0, g.time(idx))
            elif idx is not None:
                tags[f"{name}.time"] = (idx, g.time(idx))
            if js.predictability == Predictability.FULL:
                tags[f"{name}.sign"] = (0, sign)
                tags[f"{name}.size"] = (0, size)
            elif js.predictability == Predictability.DIRECTION_ONLY:
                tags[f"{name}.sign"] = (0, sign)
                if idx is not None:
                    tags[f"{name}.size"] = (idx, size)
            elif idx is not None:
                tags[f"{name}.sign"] = (idx, sign)
                tags[f"{name}.size"] = (idx, size)
            if idx is None:
                continue
            if idx in source_at:
                raise ModelError(f"jumps {source_at[idx]!r} and {name!r} collide at grid index {idx}")
            source_at[idx] = name
            dX[idx] = size
        if ur is not None:
            idx = self._right_index
            if idx in source_at:
                raise ModelError(f"right jump collides with {source_at[idx]!r}")
            eta = spec.ladlag.size.draw(ur[0], ur[1])
            dXp[idx] = eta
            source_at[idx] = RIGHT
            tags[f"{RIGHT}.size"] = (idx, eta)
            tags[f"{RIGHT}.sign"] = (idx, 1.0 if eta > 0 else -1.0)

        total = inc + dX
        total[1:] += dXp[:-1]
        values = spec.initial_price + np.cumsum(total)
        jumps = tuple(
            JumpRecord(i, float(dX[i]), float(dXp[i]), source_at[i]) for i in sorted(source_at)
        )
        extras = {}
        if spec.dividend is not None:
            cum = np.zeros(m)
            rec = next((r for r in jumps if r.source == DIVIDEND), None)
            if rec is not None:
                cum[rec.index:] = spec.dividend.amount
            extras = {"cum_dividend": cum, "ex_dividend": values - cum}
        return values, jumps, tags, extras

    def _jump_index(self, name: str, js: JumpSpec, cont: np.ndarray, ut: float) -> int | None:
        clock = js.time
        if isinstance(clock, Deterministic):
            return self._det_index[name]
        if isinstance(clock, FirstHitting):
            if clock.level > self.spec.initial_price:
                hit = cont[1:] >= clock.level
            else:
                hit = cont[1:] <= clock.level
            if not hit.any():
                return None
            return int(np.argmax(hit)) + 1
        ring = -math.log1p(-ut) / clock.rate
        k = max(1, math.ceil(ring / self.grid.dt))
        return k if k <= self.grid.n_steps else None


def build_scheduled_jump_model(spec: ModelSpec, grid: TimeGrid) -> PathGenerator:
    """Path generator for a continuous part plus scheduled jumps (and dividend)."""
    return PathGenerator(spec, grid)


def build_ladlag_model(spec: ModelSpec, grid: TimeGrid) -> PathGenerator:
    """Path generator whose paths also jump from the right at ``spec.ladlag.time``."""
    if spec.ladlag is None:
        raise ModelError("build_ladlag_model needs a right-jump (ladlag) spec")
    return PathGenerator(spec, grid)


def sample_paths(gen: PathGenerator, n_paths: int, seed: int) -> PathBatch:
    if n_paths < 1:
        raise ModelError(f"n_paths must be >= 1, got {n_paths}")
    values = np.empty((n_paths, len(gen.grid)))
    jumps, tags = [], []
    extras: dict[str, np.ndarray] = {}
    for i in range(n_paths):
        v, j, t, ex = gen._simulate(gen.rng(seed, i))
        values[i] = v
        jumps.append(j)
        tags.append(t)
        for k, arr in ex.items():
            extras.setdefault(k, np.empty_like(values))[i] = arr
    return PathBatch(gen.grid, values, jumps, tags, gen.spec.ladlag is not None, extras,
                     seed=seed, spec_hash=gen.spec_hash)


# ---------------------------------------------------------------------------
# scenario trees

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class TreeNode:
    id: int
    time: int
    price: Number
    parent: int | None
    prob: Number
    labels: Mapping[str, Any] = field(default_factory=dict)


class ScenarioTree:
    """Finite filtered probability space: node ``i`` at time ``t`` carries a price
    and the branch probability of reaching it from its parent."""

    def __init__(self, nodes: Sequence[TreeNode], tol: float = 1e-12):
        self.nodes = tuple(nodes)
        for k, n in enumerate(self.nodes):
            if n.id != k:
                raise ModelError("node ids must equal their position")
        self._children: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            if n.parent is not None:
                self._children[n.parent].append(n.id)
        self._validate(tol)

    def _validate(self, tol: float) -> None:
        if not self.nodes or self.nodes[0].parent is not None or self.nodes[0].time != 0:
            raise ModelError("node 0 must be the root at time 0")
        leaf_times = set()
        for n in self.nodes:
            kids = self._children[n.id]
            if n.parent is not None and self.nodes[n.parent].time + 1 != n.time:
                raise ModelError(f"node {n.id} is not one step after its parent")
            if not kids:
                leaf_times.add(n.time)
                continue
            probs = [self.nodes[c].prob for c in kids]
            if any(p <= 0 for p in probs):
                raise ModelError(f"nonpositive branch probability below node {n.id}")
            total = sum(probs)
            exact = all(isinstance(p, (int, Fraction)) for p in probs)
            if (exact and total != 1) or (not exact and abs(total - 1) > tol):
                raise ModelError(f"branch probabilities below node {n.id} sum to {total}")
        if len(leaf_times) != 1:
            raise ModelError(f"leaves at different times {sorted(leaf_times)}")

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    @property
    def depth(self) -> int:
        return max(n.time for n in self.nodes)

    def children(self, node: int) -> tuple[int, ...]:
        return tuple(self._children[node])

    def is_leaf(self, node: int) -> bool:
        return not self._children[node]

    def leaves(self, below: int = 0) -> list[int]:
        out, stack = [], [below]
        while stack:
            n = stack.pop()
            kids = self._children[n]
            if kids:
                stack.extend(reversed(kids))
            else:
                out.append(n)
        return out

    def internal_nodes(self) -> list[int]:
        return [n.id for n in self.nodes if self._children[n.id]]

    def path(self, node: int) -> list[int]:
        out = [node]
        while self.nodes[out[-1]].parent is not None:
            out.append(self.nodes[out[-1]].parent)
        return out[::-1]

    def price(self, node: int) -> Number:
        return self.nodes[node].price

    def to_dict(self) -> dict:
        def enc(x):
            return str(x) if isinstance(x, Fraction) else x

        return {
            "schema_version": SCHEMA_VERSION,
            "nodes": [
                {"id": n.id, "time": n.time, "price": enc(n.price), "parent": n.parent,
                 "prob": enc(n.prob), "labels": dict(n.labels)}
                for n in self.nodes
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ScenarioTree":
        def dec(x):
            return Fraction(x) if isinstance(x, str) else x

        return cls([
            TreeNode(n["id"], n["time"], dec(n["price"]), n["parent"], dec(n["prob"]), n.get("labels", {}))
            for n in d["nodes"]
        ])

    def __repr__(self) -> str:
        return f"ScenarioTree(depth={self.depth}, nodes={len(self.nodes)})"


def build_tree(
    depth: int,
    branching: int | Callable[[TreeNode, np.random.Generator], int],
    price_rule: Callable[[TreeNode, int, np.random.Generator], Number],
    prob_rule: Callable[[TreeNode, int, np.random.Generator], Sequence[Number]],
    seed: int | None = None,
    max_depth: int = 5,
    max_branching: int = 4,
    root_price: Number = 1,
) -> ScenarioTree:
    """Grow a tree breadth-first from ``root_price``.

    ``price_rule(parent, child_index, rng)`` gives a child's price and
    ``prob_rule(parent, n_children, rng)`` its siblings' branch probabilities.
    """
    if not 1 <= depth <= max_depth:
        raise ModelError(f"depth must lie in [1, {max_depth}], got {depth}")
    rng = np.random.default_rng(seed)
    nodes = [TreeNode(0, 0, root_price, None, 1)]
    frontier = [nodes[0]]
    for _ in range(depth):
        nxt = []
        for parent in frontier:
            b = branching(parent, rng) if callable(branching) else branching
            if not 1 <= b <= max_branching:
                raise ModelError(f"branching must lie in [1, {max_branching}], got {b}")
            probs = list(prob_rule(parent, b, rng))
            if len(probs) != b:
                raise ModelError("prob_rule returned the wrong number of probabilities")
            for c in range(b):
                node = TreeNode(len(nodes), parent.time + 1, price_rule(parent, c, rng),
                                parent.id, probs[c])
                nodes.append(node)
                nxt.append(node)
        frontier = nxt
    return ScenarioTree(nodes)


def binomial_tree(depth: int, up: Number, down: Number, p_up: Number = Fraction(1, 2),
                  root_price: Number = 1) -> ScenarioTree:
    """Multiplicative binomial tree: children at ``price * up`` and ``price * down``."""
    return build_tree(
        depth, 2,
        lambda node, c, rng: node.price * (up if c == 0 else down),
        lambda node, b, rng: (p_up, 1 - p_up),
        root_price=root_price,
    )


def _edge_count(depth: int, branching: int) -> int:
    return sum(branching ** d for d in range(1, depth + 1))


def enumerate_trees(depth: int, branching: int = 2, increments: Sequence[Number] = (-1, 0, 1),
                    root_price: Number = 0) -> Iterator[ScenarioTree]:
    """Every tree of the given shape whose edges carry a price increment from ``increments``.

    Branches are equally likely (exact :class:`Fraction` probabilities).
    """
    n_edges = _edge_count(depth, branching)
    p = Fraction(1, branching)
    for assignment in product(increments, repeat=n_edges):
        it = iter(assignment)
        yield build_tree(
            depth, branching,
            lambda node, c, rng: node.price + next(it),
            lambda node, b, rng: [p] * b,
            max_depth=max(depth, 5), root_price=root_price,
        )


def random_tree(depth: int, seed: int, max_branching: int = 3,
                increments: Sequence[int] = (-2, -1, 0, 1, 2), straddle_prob: float = 0.8,
                root_price: int = 0) -> ScenarioTree:
    """Random integer-increment tree with exact rational branch probabilities.

    With probability ``straddle_prob`` a node's children are forced to include
    one up and one down move, so a useful share of trees admits a martingale measure.
    """
    ups = [x for x in increments if x > 0]
    downs = [x for x in increments if x < 0]
    plan: dict[int, list[int]] = {}

    def branching(node, rng):
        b = int(rng.integers(1, max_branching + 1))
        if rng.random() < straddle_prob and ups and downs:
            b = max(b, 2)
            incs = [int(rng.choice(ups)), int(rng.choice(downs))]
            incs += [int(rng.choice(increments)) for _ in range(b - 2)]
            rng.shuffle(incs)
        else:
            incs = [int(rng.choice(increments)) for _ in range(b)]
        plan[node.id] = incs
        return b

    def prob_rule(node, b, rng):
        w = [int(x) for x in rng.integers(1, 6, size=b)]
        s = sum(w)
        return [Fraction(x, s) for x in w]

    return build_tree(
        depth, branching,
        lambda node, c, rng: node.price + plan[node.id][c],
        prob_rule, seed=seed, max_depth=max(depth, 5), max_branching=max_branching,
        root_price=root_price,
    )


def tree_paths(tree: ScenarioTree) -> list[tuple[PathSample, Fraction | float]]:
    """Root-to-leaf trajectories as grid paths (unit steps) with their probabilities.

    Every price change is a jump; the node visited at step ``i`` is tagged
    ``node.<i>`` and revealed at ``i``.
    """
    depth = tree.depth
    grid = TimeGrid(depth, float(depth))
    out = []
    for leaf in tree.leaves():
        ids = tree.path(leaf)
        vals = np.array([float(tree.price(i)) for i in ids])
        jumps = tuple(
            JumpRecord(i, float(vals[i] - vals[i - 1]), 0.0, "tree")
            for i in range(1, depth + 1) if vals[i] != vals[i - 1]
        )
        tags = {f"node.{i}": (i, float(nid)) for i, nid in enumerate(ids)}
        prob = 1
        for nid in ids[1:]:
            prob = prob * tree.nodes[nid].prob
        out.append((PathSample(grid, vals, jumps, tags, path_id=leaf), prob))
    return out


def warn_degenerate(law: Law, what: str) -> None:
    if law.degenerate:
        warnings.warn(f"{what}: degenerate law {law} makes the jump fully predictable",
                      stacklevel=3)
