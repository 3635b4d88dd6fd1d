"""Buy-and-hold gains, flash-strategy constructors and their high-frequency limits.

A buy-and-hold strategy holds ``xi`` over ``(sigma, tau]`` and earns
``xi * (X[tau ∧ t] - X[sigma ∧ t])``. A flash strategy is a sequence of them
indexed by ``n`` whose entry and exit times close in on one stopping time.
All times here are grid indices.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import laws
from .filtration import AnnouncingSequence, InformationView, cond_stats_path
from .market_models import (
    RIGHT,
    SCHEMA_VERSION,
    Constant,
    Deterministic,
    ExponentialClock,
    ModelError,
    ModelSpec,
    PathBatch,
    PathSample,
    Predictability,
    TimeGrid,
)

__all__ = [
    "BuyAndHold",
    "InstantaneousStrategy",
    "FlashStrategy",
    "GainsReport",
    "gains",
    "gains_path",
    "batch_gains",
    "make_sure_profit_strategy",
    "make_constant_profit_strategy",
    "make_bounded_loss_strategy",
    "make_right_jump_strategy",
    "make_instantaneous_strategy",
    "make_long_only_variant",
    "evaluate_flash",
]


@dataclass(frozen=True)
class BuyAndHold:
    sigma: int
    tau: int
    xi: float
    bound: float = math.inf

    def __post_init__(self):
        if self.sigma > self.tau:
            raise ValueError(f"need sigma <= tau, got {self.sigma} > {self.tau}")
        if abs(self.xi) > self.bound * (1 + 1e-12):
            raise ValueError(f"|xi| = {abs(self.xi)} exceeds the declared bound {self.bound}")


def gains_path(h: BuyAndHold, path: PathSample) -> np.ndarray:
    """(h·X)_t at every grid point."""
    n = path.grid.n_steps
    if not 0 <= h.sigma <= h.tau <= n:
        raise ValueError(f"strategy times ({h.sigma}, {h.tau}) outside the grid")
    return batch_gains(path.values[None, :], np.array([h.sigma]), np.array([h.tau]),
                       np.array([h.xi]))[0]


def gains(h: BuyAndHold, path: PathSample, t: float) -> float:
    j = path.grid.index_of(t)
    return float(gains_path(h, path)[j])


def batch_gains(values: np.ndarray, sigma: np.ndarray, tau: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Row-wise buy-and-hold gains for a stack of paths.

    ``X[clip(j, sigma, tau)] - X[sigma]`` is ``X[tau ∧ j] - X[sigma ∧ j]`` for
    ``j >= sigma`` and zero before.
    """
    j = np.arange(values.shape[1])[None, :]
    idx = np.clip(j, sigma[:, None], tau[:, None])
    start = values[np.arange(values.shape[0]), sigma][:, None]
    return xi[:, None] * (np.take_along_axis(values, idx, axis=1) - start)


@dataclass(frozen=True)
class InstantaneousStrategy:
    """Position ``xi`` held on the graph of ``tau``: gains ``xi ΔX_tau 1{tau <= t}``."""

    tau: int | None
    xi: float

    def gains_path(self, path: PathSample) -> np.ndarray:
        out = np.zeros(len(path.grid))
        if self.tau is not None:
            out[self.tau:] = self.xi * path.dX[self.tau]
        return out


def make_instantaneous_strategy(path: PathSample, tau: int | None,
                                xi_rule: Callable[[InformationView], float]) -> InstantaneousStrategy:
    """Instantaneous strategy whose size is read from the strict past at ``tau``.

    The rule only sees a strict-past view; any attempt to read information at
    or after ``tau`` raises :class:`~flashlab.filtration.LookaheadError`.
    """
    if tau is None:
        return InstantaneousStrategy(None, 0.0)
    return InstantaneousStrategy(tau, float(xi_rule(path.view(tau, strict=True))))


# ---------------------------------------------------------------------------
# flash strategies


@dataclass(frozen=True)
class FlashStrategy:
    """A sequence of buy-and-hold legs built around one jump of ``model``.

    ``position_rule(n, view)`` sizes leg ``n`` from the view at its entry time.
    ``in_limit(path)`` says whether the limiting stopping time is finite on a path.
    When ``exit_after`` is set the legs enter at the jump and exit ``1/n`` later
    (right-jump construction); otherwise they enter on the announcing sequence
    and exit at the jump.
    """

    name: str
    model: ModelSpec
    grid: TimeGrid
    jump: str
    position_rule: Callable[[int, InformationView], float]
    uniform_bound: float
    in_limit: Callable[[PathSample], bool]
    qualifying: bool = True
    exit_after: bool = False
    base_offset: float | None = None
    params: dict = field(default_factory=dict)

    def target(self, path: PathSample) -> int | None:
        rec = path.jump_at(self.jump)
        if rec is None:
            return None
        return rec.index

    def announcing(self, path: PathSample) -> AnnouncingSequence | None:
        t = self.target(path)
        if t is None:
            return None
        return AnnouncingSequence(self.grid, t, self.base_offset)

    def times(self, n: int, target: int) -> tuple[int, int]:
        g = self.grid
        cap = g.snap_down(float(n))
        if self.exit_after:
            exit_ = max(g.snap_up(g.time(target) + 1.0 / n), target + 1)
            return min(target, cap), min(exit_, g.n_steps, cap)
        seq = AnnouncingSequence(g, target, self.base_offset)
        return seq.sigma(n), seq.tau(n)

    def leg(self, n: int, path: PathSample) -> BuyAndHold | None:
        target = self.target(path)
        if target is None:
            return None
        s, e = self.times(n, target)
        xi = float(self.position_rule(n, path.view(s)))
        return BuyAndHold(s, e, xi, self.uniform_bound)

    def limit_time(self, path: PathSample) -> float:
        t = self.target(path)
        if t is None or not self.in_limit(path):
            return math.inf
        return self.grid.time(t)

    def offset(self, n: int, target: int) -> float:
        s, e = self.times(n, target)
        return (e - s) * self.grid.dt

    def scaled(self, factor: float) -> "FlashStrategy":
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        rule = self.position_rule
        return replace(self, name=f"{self.name}*{factor:g}",
                       position_rule=lambda n, view: factor * rule(n, view),
                       uniform_bound=self.uniform_bound * factor)


def _clipped_inverse(e: float, k: float) -> float:
    # k (|e| ∧ 1/k) / e with 0/0 = 0
    if e == 0:
        return 0.0
    return k * min(abs(e), 1.0 / k) / e


def _announceable(js, name):
    if isinstance(js.time, ExponentialClock):
        raise ModelError(f"jump {name!r} runs on an exponential clock and cannot be announced")


def make_sure_profit_strategy(model: ModelSpec, grid: TimeGrid, jump: int | str = 0,
                              base_offset: float | None = None) -> FlashStrategy:
    """Legs sized ``2 P(ΔX_T > 0 | view) - 1`` entering on the announcing sequence of T.

    Under NONE predictability the strategy is still built (a negative
    control) but marked non-qualifying.
    """
    name, js = model.jump(jump)
    _announceable(js, name)

    def rule(n, view):
        return 2.0 * cond_stats_path(model, view, "sign", jump=name) - 1.0

    return FlashStrategy(
        "sure_profit", model, grid, name, rule, 1.0,
        in_limit=lambda path: path.jump_at(name) is not None,
        qualifying=js.predictability != Predictability.NONE,
        base_offset=base_offset,
    )


def make_constant_profit_strategy(model: ModelSpec, grid: TimeGrid, k: float, jump: int | str = 0,
                                  base_offset: float | None = None) -> FlashStrategy:
    """Legs sized ``k (|E[ΔX_τ|view]| ∧ 1/k) / E[ΔX_τ|view]`` where τ keeps only
    jumps with ``|ΔX_T|`` in ``[1/k, k]``; the limit profit is 1 on ``{τ <= t}``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    name, js = model.jump(jump)
    _announceable(js, name)
    if js.predictability != Predictability.FULL:
        raise ModelError(f"jump {name!r} is not fully predictable")
    if laws.prob_abs_between(js.size, 1.0 / k, k) <= 0:
        raise ModelError(f"P(|ΔX_T| in [1/{k}, {k}]) = 0; pick another k")

    def rule(n, view):
        return _clipped_inverse(cond_stats_path(model, view, "clipped_size", jump=name, k=k), k)

    def in_limit(path):
        rec = path.jump_at(name)
        return rec is not None and 1.0 / k <= abs(rec.dX) <= k

    return FlashStrategy("constant_profit", model, grid, name, rule, float(k), in_limit,
                         base_offset=base_offset, params={"k": k})


def make_bounded_loss_strategy(model: ModelSpec, grid: TimeGrid, N: float, C: float,
                               jump: int | str = 0, base_offset: float | None = None) -> FlashStrategy:
    """Long-only legs sized ``P(τ < ∞ | view) / (1 + (|X_σ| - C)⁺)`` with
    τ = T on ``{T <= N, |X_{T-}| <= C, ΔX_T > 0}``.

    Legs always announce T itself; on paths outside that event the position
    tends to zero instead of the entry being pushed to infinity.
    """
    if C < 1:
        raise ValueError(f"C must be >= 1, got {C}")
    name, js = model.jump(jump)
    _announceable(js, name)
    if laws.prob_positive(js.size) <= 0:
        raise ModelError(f"jump {name!r} is a.s. negative, so A(N, C) is empty")
    if isinstance(js.time, Deterministic):
        if js.time.time > N:
            raise ModelError(f"jump {name!r} at {js.time.time} is after N = {N}; A(N, C) is empty")
        others_before = any(
            isinstance(o.time, Deterministic) and o.time.time <= js.time.time
            for other, o in model.named_jumps() if other != name
        )
        if isinstance(model.base, Constant) and not others_before and abs(model.initial_price) > C:
            raise ModelError(f"|X_T-| = {abs(model.initial_price)} > C = {C}; A(N, C) is empty")

    def rule(n, view):
        p = cond_stats_path(model, view, "occurs", jump=name, N=N, C=C)
        if p == 0.0:
            return 0.0
        excess = 0.0 if math.isinf(C) else max(abs(view.current) - C, 0.0)
        return p / (1.0 + excess)

    def in_limit(path):
        rec = path.jump_at(name)
        if rec is None or rec.dX <= 0 or grid.time(rec.index) > N:
            return False
        return abs(path.left_limits[rec.index]) <= C

    return FlashStrategy("bounded_loss", model, grid, name, rule, 1.0, in_limit,
                         qualifying=js.predictability != Predictability.NONE,
                         base_offset=base_offset, params={"N": N, "C": C})


def make_right_jump_strategy(model: ModelSpec, grid: TimeGrid, k: float) -> FlashStrategy:
    """Enter at the right-jump time τ, exit at ``τ + 1/n``; limit gains ``1{τ < t}``."""
    if model.ladlag is None:
        raise ModelError("model is right-continuous: there is no right jump to exploit")
    if laws.prob_abs_between(model.ladlag.size, 1.0 / k, k) <= 0:
        raise ModelError(f"P(|Δ⁺X| in [1/{k}, {k}]) = 0; pick another k")

    def rule(n, view):
        return _clipped_inverse(cond_stats_path(model, view, "right_size", k=k), k)

    def in_limit(path):
        rec = path.jump_at(RIGHT)
        return rec is not None and 1.0 / k <= abs(rec.dX_plus) <= k

    return FlashStrategy("right_jump", model, grid, RIGHT, rule, float(k), in_limit,
                         exit_after=True, params={"k": k})


def make_long_only_variant(fs: FlashStrategy, C: float = math.inf) -> FlashStrategy:
    """Long-only version of ``fs``: the bounded-loss construction on the positive-jump event."""
    _, js = fs.model.jump(fs.jump)
    if laws.prob_positive(js.size) <= 0:
        raise ModelError("the predictable jumps are a.s. negative; no long-only sure profit")
    out = make_bounded_loss_strategy(fs.model, fs.grid, N=fs.grid.horizon, C=C, jump=fs.jump,
                                     base_offset=fs.base_offset)
    return replace(out, name=f"{fs.name}_long_only", params={**out.params, "long_only": True})


# ---------------------------------------------------------------------------
# evaluation


def _as_arrays(paths) -> tuple[np.ndarray, list[PathSample]]:
    if isinstance(paths, PathBatch):
        return paths.values, [paths[i] for i in range(len(paths))]
    paths = list(paths)
    return np.stack([p.values for p in paths]), paths


@dataclass
class GainsReport:
    strategy: str
    qualifying: bool
    ns: np.ndarray
    times: np.ndarray
    offsets: np.ndarray
    zeta: np.ndarray
    limit_time: np.ndarray
    positions: np.ndarray
    terminal: np.ndarray
    worst: np.ndarray
    gaps: np.ndarray
    epsilon: float | None = None
    terminal_net: np.ndarray | None = None
    worst_net: np.ndarray | None = None
    trajectories: np.ndarray | None = None
    trajectories_net: np.ndarray | None = None
    seed: int | None = None
    spec_hash: str | None = None
    params: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.zeta.shape[0]

    @property
    def finite(self) -> np.ndarray:
        """Paths whose limiting stopping time falls inside the horizon."""
        return np.isfinite(self.limit_time)

    def mean_gaps(self) -> np.ndarray:
        return self.gaps.mean(axis=1)

    def gap_slope(self, n_lo: int, n_hi: int) -> float:
        """Least-squares slope of log2(mean g_n) against log2(δ_n) over n in [n_lo, n_hi]."""
        sel = (self.ns >= n_lo) & (self.ns <= n_hi)
        x = np.log2(self.offsets[sel])
        y = np.log2(self.mean_gaps()[sel])
        return float(np.polyfit(x, y, 1)[0])

    def gap_rate(self, n_lo: int, n_hi: int) -> float:
        """Least-squares slope of log2(mean g_n) against n over n in [n_lo, n_hi].

        With dyadic offsets ``δ_n = horizon / 2**n`` this is minus ``gap_slope``.
        """
        sel = (self.ns >= n_lo) & (self.ns <= n_hi)
        return float(np.polyfit(self.ns[sel].astype(float), np.log2(self.mean_gaps()[sel]), 1)[0])

    @property
    def gaps_nonincreasing(self) -> bool:
        g = self.mean_gaps()
        return bool(np.all(np.diff(g) <= 1e-12 * (1 + np.abs(g[:-1]))))

    def loss_floor(self, n_from: int = 1, net: bool = False) -> float:
        """min over n >= n_from, t and paths in {τ < ∞} of the (net) gains."""
        w = self.worst_net if net else self.worst
        rows = self.ns >= n_from
        if not self.finite.any() or not rows.any():
            return math.nan
        return float(w[np.ix_(rows, self.finite)].min())

    def summary(self) -> dict:
        fin = self.finite
        z = self.zeta[fin]
        out = {
            "schema_version": SCHEMA_VERSION,
            "strategy": self.strategy,
            "qualifying": self.qualifying,
            "params": self.params,
            "seed": self.seed,
            "spec_hash": self.spec_hash,
            "n_paths": self.n_paths,
            "paths_with_finite_tau": int(fin.sum()),
            "zeta": {
                "min": float(z.min()) if z.size else None,
                "mean": float(z.mean()) if z.size else None,
                "max": float(z.max()) if z.size else None,
                "zero_off_tau": bool(np.all(self.zeta[~fin] == 0)),
            },
            "gaps": [
                {"n": int(n), "offset": float(d), "mean_gap": float(g), "max_gap": float(m),
                 "loss_floor": float(self.worst[i][fin].min()) if fin.any() else None}
                for i, (n, d, g, m) in enumerate(zip(self.ns, self.offsets, self.mean_gaps(),
                                                      self.gaps.max(axis=1)))
            ],
            "gaps_nonincreasing": self.gaps_nonincreasing,
            "epsilon": self.epsilon,
        }
        if self.terminal_net is not None:
            out["terminal_net_min"] = float(self.terminal_net[-1][fin].min()) if fin.any() else None
        return out

    def write_json(self, fh) -> None:
        json.dump(self.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    def write_csv(self, fh, header: str | None = None) -> None:
        if self.trajectories is None:
            raise ValueError("report was built without trajectories")
        net = self.trajectories if self.trajectories_net is None else self.trajectories_net
        if header:
            fh.write(f"# {header}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "t", "path_id", "gains", "gains_net_costs"])
        for a, n in enumerate(self.ns):
            for p in range(self.n_paths):
                for j, t in enumerate(self.times):
                    w.writerow([int(n), repr(float(t)), p, repr(float(self.trajectories[a, p, j])),
                                repr(float(net[a, p, j]))])


def evaluate_flash(
    fs: FlashStrategy,
    paths: PathBatch | Sequence[PathSample],
    n_max: int,
    transaction_eps: float | None = None,
    *,
    n_min: int = 1,
    keep_trajectories: bool | None = None,
    fixed_fee: float = 0.0,
    chunk: int = 1024,
) -> GainsReport:
    """Gains of legs ``n_min..n_max`` on every path.

    The limit profit ζ of a path is the horizon gains of leg ``n_max`` on
    ``{τ <= horizon}`` (zero elsewhere); ``gaps[i, p]`` is
    ``sup_t |(hⁿ·X)_t - ζ 1{τ <= t}|`` (``1{τ < t}`` for right-jump strategies).
    Non-convergence shows up in the gaps, it is never raised.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    from .costs import batch_gains_with_costs

    values, plist = _as_arrays(paths)
    n_paths, m = values.shape
    grid = fs.grid
    if m != len(grid):
        raise ValueError("paths and strategy use different grids")
    ns = np.arange(n_min, n_max + 1)
    if keep_trajectories is None:
        keep_trajectories = len(ns) * n_paths * m <= 2_000_000

    targets = [fs.target(p) for p in plist]
    trading = np.array([t is not None for t in targets])
    limit_time = np.array([fs.limit_time(p) for p in plist])
    sig = np.zeros((len(ns), n_paths), dtype=np.int64)
    tau = np.zeros((len(ns), n_paths), dtype=np.int64)
    xi = np.zeros((len(ns), n_paths))
    for a, n in enumerate(ns):
        for p, path in enumerate(plist):
            if targets[p] is None:
                continue
            h = fs.leg(int(n), path)
            sig[a, p], tau[a, p], xi[a, p] = h.sigma, h.tau, h.xi
    first = next((t for t in targets if t is not None), None)
    offsets = np.array([fs.offset(int(n), first) if first is not None else math.nan for n in ns])

    rows = np.arange(n_paths)
    last = m - 1
    term_max = xi[-1] * (values[rows, np.minimum(tau[-1], last)] - values[rows, sig[-1]])
    zeta = np.where(np.isfinite(limit_time) & trading, term_max, 0.0)
    times = grid.times
    if fs.exit_after:
        hit = times[None, :] > limit_time[:, None]
    else:
        hit = times[None, :] >= limit_time[:, None]

    shape = (len(ns), n_paths)
    terminal, worst, gaps = np.empty(shape), np.empty(shape), np.empty(shape)
    costs = transaction_eps is not None
    terminal_net = np.empty(shape) if costs else None
    worst_net = np.empty(shape) if costs else None
    traj = np.empty((len(ns), n_paths, m)) if keep_trajectories else None
    traj_net = np.empty((len(ns), n_paths, m)) if keep_trajectories and costs else None

    for a in range(len(ns)):
        for lo in range(0, n_paths, chunk):
            sl = slice(lo, min(lo + chunk, n_paths))
            G = batch_gains(values[sl], sig[a, sl], tau[a, sl], xi[a, sl])
            terminal[a, sl] = G[:, -1]
            worst[a, sl] = G.min(axis=1)
            gaps[a, sl] = np.abs(G - zeta[sl, None] * hit[sl]).max(axis=1)
            if traj is not None:
                traj[a, sl] = G
            if costs:
                Gn = batch_gains_with_costs(values[sl], sig[a, sl], tau[a, sl], xi[a, sl],
                                            transaction_eps, fixed_fee)
                terminal_net[a, sl] = Gn[:, -1]
                worst_net[a, sl] = Gn.min(axis=1)
                if traj_net is not None:
                    traj_net[a, sl] = Gn

    return GainsReport(
        strategy=fs.name, qualifying=fs.qualifying, ns=ns, times=times, offsets=offsets,
        zeta=zeta, limit_time=limit_time, positions=xi, terminal=terminal, worst=worst,
        gaps=gaps, epsilon=transaction_eps, terminal_net=terminal_net,
        worst_net=worst_net, trajectories=traj, trajectories_net=traj_net,
        seed=getattr(paths, "seed", None), spec_hash=getattr(paths, "spec_hash", None),
        params=dict(fs.params),
    )
