"""Jump-size distributions with the closed forms the strategies need.

Every law draws through its inverse CDF from two uniforms ``(u_sign, u_mag)``
so that two models fed the same uniforms produce coupled jump sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

__all__ = [
    "PointMass",
    "TwoPoint",
    "Uniform",
    "Exponential",
    "RandomSign",
    "Law",
    "law_from_dict",
    "mean",
    "prob_positive",
    "prob_negative",
    "prob_abs_between",
    "cond_mean_given_sign",
    "clipped_mean",
]

_INF = math.inf


def _overlap(a: float, b: float, lo: float, hi: float) -> tuple[float, float] | None:
    lo2, hi2 = max(a, lo), min(b, hi)
    if lo2 > hi2:
        return None
    return lo2, hi2


@dataclass(frozen=True)
class PointMass:
    value: float

    def draw(self, u_sign: float, u_mag: float) -> float:
        return self.value

    def prob_between(self, a: float, b: float) -> float:
        return 1.0 if a <= self.value <= b else 0.0

    def partial_mean(self, a: float, b: float) -> float:
        return self.value if a <= self.value <= b else 0.0

    def has_atom_at_zero(self) -> bool:
        return self.value == 0

    @property
    def degenerate(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": "point", "value": self.value}


@dataclass(frozen=True)
class TwoPoint:
    up: float
    down: float
    p_up: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p_up <= 1.0:
            raise ValueError(f"p_up must lie in [0, 1], got {self.p_up}")

    def draw(self, u_sign: float, u_mag: float) -> float:
        return self.up if u_sign < self.p_up else self.down

    def prob_between(self, a: float, b: float) -> float:
        p = 0.0
        if a <= self.up <= b:
            p += self.p_up
        if a <= self.down <= b:
            p += 1.0 - self.p_up
        return p

    def partial_mean(self, a: float, b: float) -> float:
        m = 0.0
        if a <= self.up <= b:
            m += self.p_up * self.up
        if a <= self.down <= b:
            m += (1.0 - self.p_up) * self.down
        return m

    def has_atom_at_zero(self) -> bool:
        return (self.up == 0 and self.p_up > 0) or (self.down == 0 and self.p_up < 1)

    @property
    def degenerate(self) -> bool:
        return self.up == self.down or self.p_up in (0.0, 1.0)

    def to_dict(self) -> dict:
        return {"kind": "two_point", "up": self.up, "down": self.down, "p_up": self.p_up}


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"need low < high, got [{self.low}, {self.high}]")

    def draw(self, u_sign: float, u_mag: float) -> float:
        return self.low + (self.high - self.low) * u_mag

    def prob_between(self, a: float, b: float) -> float:
        ov = _overlap(a, b, self.low, self.high)
        if ov is None:
            return 0.0
        return (ov[1] - ov[0]) / (self.high - self.low)

    def partial_mean(self, a: float, b: float) -> float:
        ov = _overlap(a, b, self.low, self.high)
        if ov is None:
            return 0.0
        return (ov[1] ** 2 - ov[0] ** 2) / (2.0 * (self.high - self.low))

    def has_atom_at_zero(self) -> bool:
        return False

    @property
    def degenerate(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"kind": "uniform", "low": self.low, "high": self.high}


@dataclass(frozen=True)
class Exponential:
    """``shift + E`` with ``E ~ Exp(rate)``."""

    rate: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def draw(self, u_sign: float, u_mag: float) -> float:
        return self.shift - math.log1p(-u_mag) / self.rate

    def _cdf(self, x: float) -> float:
        if x <= self.shift:
            return 0.0
        if x == _INF:
            return 1.0
        return -math.expm1(-self.rate * (x - self.shift))

    def prob_between(self, a: float, b: float) -> float:
        if b < a:
            return 0.0
        return self._cdf(b) - self._cdf(a)

    def partial_mean(self, a: float, b: float) -> float:
        ov = _overlap(a, b, self.shift, _INF)
        if ov is None:
            return 0.0
        r, s = self.rate, self.shift

        # antiderivative of x * r * exp(-r (x - s))
        def anti(x: float) -> float:
            if x == _INF:
                return 0.0
            return -(x + 1.0 / r) * math.exp(-r * (x - s))

        return anti(ov[1]) - anti(ov[0])

    def has_atom_at_zero(self) -> bool:
        return False

    @property
    def degenerate(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"kind": "exponential", "rate": self.rate, "shift": self.shift}


@dataclass(frozen=True)
class RandomSign:
    """``S * M`` with ``P(S = +1) = p_up`` and ``M`` a nonnegative magnitude law."""

    magnitude: Union[PointMass, TwoPoint, Uniform, Exponential]
    p_up: float = 0.5

    def __post_init__(self):
        if isinstance(self.magnitude, RandomSign):
            raise ValueError("nested RandomSign is not supported")
        if self.magnitude.prob_between(-_INF, 0.0) - self.magnitude.prob_between(0.0, 0.0) > 0:
            raise ValueError("magnitude law must be supported on [0, inf)")
        if not 0.0 <= self.p_up <= 1.0:
            raise ValueError(f"p_up must lie in [0, 1], got {self.p_up}")

    def draw(self, u_sign: float, u_mag: float) -> float:
        m = self.magnitude.draw(0.0, u_mag)
        return m if u_sign < self.p_up else -m

    def prob_between(self, a: float, b: float) -> float:
        return self.p_up * self.magnitude.prob_between(a, b) + (
            1.0 - self.p_up
        ) * self.magnitude.prob_between(-b, -a)

    def partial_mean(self, a: float, b: float) -> float:
        return self.p_up * self.magnitude.partial_mean(a, b) - (
            1.0 - self.p_up
        ) * self.magnitude.partial_mean(-b, -a)

    def has_atom_at_zero(self) -> bool:
        return self.magnitude.has_atom_at_zero()

    @property
    def degenerate(self) -> bool:
        return self.magnitude.degenerate and self.p_up in (0.0, 1.0)

    def to_dict(self) -> dict:
        return {"kind": "random_sign", "magnitude": self.magnitude.to_dict(), "p_up": self.p_up}


Law = Union[PointMass, TwoPoint, Uniform, Exponential, RandomSign]


def mean(law: Law) -> float:
    return law.partial_mean(-_INF, _INF)


def prob_positive(law: Law) -> float:
    return law.prob_between(0.0, _INF) - law.prob_between(0.0, 0.0)


def prob_negative(law: Law) -> float:
    return law.prob_between(-_INF, 0.0) - law.prob_between(0.0, 0.0)


def prob_abs_between(law: Law, lo: float, hi: float) -> float:
    """P(|X| in [lo, hi]) for 0 < lo <= hi."""
    return law.prob_between(lo, hi) + law.prob_between(-hi, -lo)


def cond_mean_given_sign(law: Law, sign: int) -> float:
    """E[X | sign(X) = sign]."""
    if sign > 0:
        p, m = prob_positive(law), law.partial_mean(0.0, _INF)
    else:
        p, m = prob_negative(law), law.partial_mean(-_INF, 0.0)
    if p <= 0:
        raise ValueError(f"sign {sign:+d} has probability zero under {law}")
    return m / p


def clipped_mean(law: Law, lo: float, hi: float, sign: int | None = None) -> float:
    """E[X 1{|X| in [lo, hi]} | sign(X) = sign], unconditional when sign is None."""
    if sign is None:
        return law.partial_mean(lo, hi) + law.partial_mean(-hi, -lo)
    if sign > 0:
        p, m = prob_positive(law), law.partial_mean(lo, hi)
    else:
        p, m = prob_negative(law), law.partial_mean(-hi, -lo)
    if p <= 0:
        raise ValueError(f"sign {sign:+d} has probability zero under {law}")
    return m / p


def law_from_dict(d: dict) -> Law:
    kind = d.get("kind")
    if kind == "point":
        return PointMass(float(d["value"]))
    if kind == "two_point":
        return TwoPoint(float(d["up"]), float(d["down"]), float(d.get("p_up", 0.5)))
    if kind == "uniform":
        return Uniform(float(d["low"]), float(d["high"]))
    if kind == "exponential":
        return Exponential(float(d.get("rate", 1.0)), float(d.get("shift", 0.0)))
    if kind == "random_sign":
        return RandomSign(law_from_dict(d["magnitude"]), float(d.get("p_up", 0.5)))
    raise ValueError(f"unknown law kind {kind!r}")
