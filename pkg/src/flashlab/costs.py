"""Proportional transaction costs through ε-close prices.

A long position is bought at ``(1+ε) X`` and marked/sold at ``X / (1+ε)``;
a short position is sold at ``X / (1+ε)`` and bought back at ``(1+ε) X``.
This is the worst price process that stays ε-close to ``X``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .laws import Exponential, Law, PointMass, TwoPoint, Uniform
from .market_models import (
    Constant,
    Deterministic,
    JumpSpec,
    ModelError,
    ModelSpec,
    PathGenerator,
    PathSample,
    Predictability,
    TimeGrid,
)
from .strategies import BuyAndHold

__all__ = [
    "CostSpec",
    "RobustBound",
    "eps_close_check",
    "gains_with_costs",
    "batch_gains_with_costs",
    "c_bar",
    "epsilon_star",
    "robust_bound",
    "build_nonrobust_counterexample",
    "SweepRow",
    "write_sweep_csv",
]


@dataclass(frozen=True)
class CostSpec:
    epsilon: float
    position_bound: float
    pre_jump_price_bound: float

    def __post_init__(self):
        if not (self.epsilon > 0 and self.position_bound > 0 and self.pre_jump_price_bound > 0):
            raise ValueError("epsilon, position bound and price bound must all be positive")


def _positive(x: np.ndarray, what: str) -> None:
    if np.any(x <= 0):
        raise ValueError(f"{what} must be strictly positive")


def eps_close_check(X: PathSample, Xt: PathSample, eps: float, rtol: float = 1e-12) -> bool:
    """True iff ``1/(1+ε) <= Xt/X <= 1+ε`` at every grid point (right limits included)."""
    if X.grid != Xt.grid:
        raise ValueError("paths live on different grids")
    a, b = X.values, Xt.values
    if X.right_values is not None or Xt.right_values is not None:
        ra = X.values if X.right_values is None else X.right_values
        rb = Xt.values if Xt.right_values is None else Xt.right_values
        a, b = np.concatenate([a, ra]), np.concatenate([b, rb])
    _positive(a, "X")
    _positive(b, "X~")
    r = b / a
    return bool(np.all(r <= (1 + eps) * (1 + rtol)) and np.all(r >= (1 - rtol) / (1 + eps)))


def batch_gains_with_costs(values: np.ndarray, sigma: np.ndarray, tau: np.ndarray, xi: np.ndarray,
                           eps: float, fixed_fee: float = 0.0) -> np.ndarray:
    """Row-wise worst-case ε-close gains; zero up to and including the entry time."""
    _positive(values, "prices")
    j = np.arange(values.shape[1])[None, :]
    rows = np.arange(values.shape[0])
    x_exit = np.take_along_axis(values, np.clip(j, sigma[:, None], tau[:, None]), axis=1)
    x_entry = values[rows, sigma][:, None]
    up, dn = 1.0 + eps, 1.0 / (1.0 + eps)
    x = xi[:, None]
    long_ = x * (x_exit * dn - up * x_entry)
    short = x * (x_exit * up - dn * x_entry)
    g = np.where(x >= 0, long_, short)
    if fixed_fee:
        g = g - 2.0 * fixed_fee * (x != 0)
    return np.where(j > sigma[:, None], g, 0.0)


def gains_with_costs(h: BuyAndHold, path: PathSample, eps: float, t: float,
                     fixed_fee: float = 0.0) -> float:
    j = path.grid.index_of(t)
    g = batch_gains_with_costs(path.values[None, :], np.array([h.sigma]), np.array([h.tau]),
                               np.array([h.xi]), eps, fixed_fee)
    return float(g[0, j])


def c_bar(c: float, eps: float, k: float, N: float) -> float:
    """Guaranteed limit profit ``c/(1+ε) - 2 ε k N`` under ε-close prices."""
    return c / (1.0 + eps) - 2.0 * eps * k * N


def epsilon_star(c: float, k: float, N: float, tol: float = 1e-10) -> float:
    """Root of ``c_bar`` in ε by bisection (c_bar is strictly decreasing in ε)."""
    lo, hi = 0.0, 1.0
    while c_bar(c, hi, k, N) > 0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if c_bar(c, mid, k, N) > 0:
            lo = mid
        else:
            hi = mid
    # keep halving past tol until floating point stalls
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if c_bar(c, mid, k, N) > 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(c_bar(c, lo, k, N)) <= abs(c_bar(c, hi, k, N)) else hi


@dataclass(frozen=True)
class RobustBound:
    c_bar: float
    max_epsilon: float


def robust_bound(c: float, eps: float, k: float, N: float) -> RobustBound:
    if not (c > 0 and k > 0 and N > 0):
        raise ValueError("c, k and N must be positive")
    return RobustBound(c_bar(c, eps, k, N), epsilon_star(c, k, N))


def build_nonrobust_counterexample(eps: float, eta_law: Law = Exponential(1.0),
                                   grid: TimeGrid | None = None) -> tuple[PathGenerator, PathGenerator]:
    """Generators for ``X = 1 + η 1{t >= 1}`` and ``X~ = 1 + ε + (η - ε) 1{t >= 1}``.

    Both draw η from the same uniforms, so path ``i`` of one matches path ``i``
    of the other. ``X`` has a jump of known (positive) direction at 1; the
    direction of the jump of ``X~`` is unknown before 1.
    """
    grid = grid or TimeGrid(4, 2.0)
    if grid.horizon <= 1:
        raise ModelError("the counterexample needs a horizon beyond t = 1")
    grid.index_of(1.0)
    if eta_law.prob_between(-math.inf, 0.0) > 0:
        raise ModelError("η must be nonnegative")
    if eta_law.degenerate:
        warnings.warn(f"η law {eta_law} is degenerate: the X~ jump is fully predictable again",
                      stacklevel=2)
    shifted = _shift(eta_law, -eps)
    X = ModelSpec(1.0, Constant(), (JumpSpec(Deterministic(1.0), eta_law,
                                             Predictability.DIRECTION_ONLY, "eta"),))
    Xt = ModelSpec(1.0 + eps, Constant(), (JumpSpec(Deterministic(1.0), shifted,
                                                    _shifted_class(shifted), "eta"),))
    return PathGenerator(X, grid), PathGenerator(Xt, grid)


def _shift(law: Law, by: float) -> Law:
    if isinstance(law, Exponential):
        return Exponential(law.rate, law.shift + by)
    if isinstance(law, PointMass):
        return PointMass(law.value + by)
    if isinstance(law, Uniform):
        return Uniform(law.low + by, law.high + by)
    if isinstance(law, TwoPoint):
        return TwoPoint(law.up + by, law.down + by, law.p_up)
    raise ModelError(f"cannot shift law {law}")


def _shifted_class(law: Law) -> Predictability:
    if law.degenerate:
        return Predictability.FULL
    return Predictability.NONE


@dataclass(frozen=True)
class SweepRow:
    """One ε of a cost sweep; ``realized_min_gain`` is None when nothing was simulated."""

    epsilon: float
    c_bar: float
    realized_min_gain: float | None = None

    @property
    def passed(self) -> bool | None:
        if self.realized_min_gain is None:
            return None
        return self.realized_min_gain >= self.c_bar


def write_sweep_csv(rows: Iterable[SweepRow], fh, header: str | None = None) -> None:
    if header:
        fh.write(f"# {header}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["epsilon", "c_bar", "realized_min_gain", "pass"])
    for r in rows:
        realized = "" if r.realized_min_gain is None else repr(float(r.realized_min_gain))
        passed = "" if r.passed is None else str(r.passed).lower()
        w.writerow([repr(float(r.epsilon)), repr(float(r.c_bar)), realized, passed])
