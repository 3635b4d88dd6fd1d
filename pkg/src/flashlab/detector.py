"""Exact no-arbitrage oracles on scenario trees.

On a finite tree every stopping time is predictable and the strict past of a
step is its parent node, so a predictable jump is a node whose children all
move in the same direction (fully predictable: by the same amount). The
sure-profit search scans one-period strategies directly; the two must agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Literal

import numpy as np
from scipy.optimize import linprog

from .market_models import SCHEMA_VERSION, ScenarioTree

__all__ = [
    "JumpFinding",
    "SureProfit",
    "Mismatch",
    "EquivalenceReport",
    "MartingaleMeasure",
    "EMMResult",
    "detect_predictable_jumps",
    "search_sure_profit",
    "search_all_profits",
    "verify_equivalence",
    "find_martingale_measure",
]

DIRECTION = "DIRECTION_PREDICTABLE"
FULLY = "FULLY_PREDICTABLE"


@dataclass(frozen=True)
class JumpFinding:
    node: int
    kind: Literal["DIRECTION_PREDICTABLE", "FULLY_PREDICTABLE"]
    changes: tuple


def _changes(tree: ScenarioTree, node: int) -> tuple:
    x = tree.price(node)
    return tuple(tree.price(c) - x for c in tree.children(node))


def detect_predictable_jumps(tree: ScenarioTree) -> list[JumpFinding]:
    out = []
    for node in tree.internal_nodes():
        d = _changes(tree, node)
        if all(v > 0 for v in d) or all(v < 0 for v in d):
            kind = FULLY if len(set(d)) == 1 else DIRECTION
            out.append(JumpFinding(node, kind, d))
    return out


@dataclass(frozen=True)
class SureProfit:
    node: int
    position: object
    kind: Literal["sure", "constant"]
    profits: tuple


def _scan_node(tree: ScenarioTree, node: int) -> SureProfit | None:
    d = _changes(tree, node)
    for sign in (1, -1):
        profits = tuple(sign * v for v in d)
        if not all(p > 0 for p in profits):
            continue
        # a constant profit needs one scale λ with λ ξ ΔX = 1 on every branch
        p0 = profits[0]
        scale = Fraction(1, p0) if isinstance(p0, int) else 1 / p0
        if all(scale * p == 1 for p in profits):
            return SureProfit(node, sign * scale, "constant", tuple(scale * p for p in profits))
        return SureProfit(node, sign, "sure", profits)
    return None


def search_all_profits(tree: ScenarioTree) -> list[SureProfit]:
    return [p for n in tree.internal_nodes() if (p := _scan_node(tree, n)) is not None]


def search_sure_profit(tree: ScenarioTree) -> SureProfit | None:
    """One one-period strategy earning a sure profit, preferring a constant one."""
    found = search_all_profits(tree)
    if not found:
        return None
    constant = [p for p in found if p.kind == "constant"]
    return (constant or found)[0]


@dataclass(frozen=True)
class Mismatch:
    tree_index: int
    detector: list
    search: list
    tree: dict


@dataclass
class EquivalenceReport:
    n_trees: int = 0
    n_with_jumps: int = 0
    n_with_full_jumps: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)
    verdicts: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self, include_verdicts: bool = True) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "n_trees": self.n_trees,
            "n_with_predictable_jumps": self.n_with_jumps,
            "n_with_fully_predictable_jumps": self.n_with_full_jumps,
            "n_mismatches": len(self.mismatches),
            "mismatches": [
                {"tree_index": m.tree_index, "detector": m.detector, "search": m.search, "tree": m.tree}
                for m in self.mismatches
            ],
        }
        if include_verdicts:
            d["verdicts"] = self.verdicts
        return d

    def write_json(self, fh, include_verdicts: bool = True) -> None:
        json.dump(self.to_dict(include_verdicts), fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")


def verify_equivalence(trees: Iterable[ScenarioTree]) -> EquivalenceReport:
    """Check jumps ⟺ sure profit and fully predictable jumps ⟺ constant profit, per tree."""
    rep = EquivalenceReport()
    for i, tree in enumerate(trees):
        findings = detect_predictable_jumps(tree)
        profits = search_all_profits(tree)
        has_jump = bool(findings)
        has_full = any(f.kind == FULLY for f in findings)
        has_profit = bool(profits)
        has_const = any(p.kind == "constant" for p in profits)
        # node-level agreement is stronger than the tree-level statement
        same_nodes = {f.node for f in findings} == {p.node for p in profits}
        same_kinds = {f.node for f in findings if f.kind == FULLY} == {
            p.node for p in profits if p.kind == "constant"
        }
        rep.n_trees += 1
        rep.n_with_jumps += has_jump
        rep.n_with_full_jumps += has_full
        rep.verdicts.append({"tree_index": i, "predictable_jump": has_jump, "sure_profit": has_profit,
                             "fully_predictable_jump": has_full, "constant_profit": has_const})
        if has_jump != has_profit or has_full != has_const or not same_nodes or not same_kinds:
            rep.mismatches.append(Mismatch(
                i,
                [(f.node, f.kind) for f in findings],
                [(p.node, p.kind) for p in profits],
                tree.to_dict(),
            ))
    return rep


# ---------------------------------------------------------------------------
# martingale measures


@dataclass(frozen=True)
class MartingaleMeasure:
    """Branch probabilities per internal node, in the order of ``tree.children(node)``."""

    q: dict[int, tuple]

    def check(self, tree: ScenarioTree, tol: float = 1e-9) -> bool:
        for node, qs in self.q.items():
            kids = tree.children(node)
            mean = sum(qi * tree.price(c) for qi, c in zip(qs, kids))
            if any(qi <= 0 for qi in qs) or abs(sum(qs) - 1) > tol or abs(mean - tree.price(node)) > tol:
                return False
        return True


@dataclass(frozen=True)
class EMMResult:
    measure: MartingaleMeasure | None
    certificate_node: int | None = None
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return self.measure is not None


def _exact_node_measure(x, children: list) -> tuple | None:
    """Strictly positive q with Σq = 1 and Σ q c = x, or None when impossible."""
    b = len(children)
    if all(c == x for c in children):
        return tuple(Fraction(1, b) for _ in children)
    lo, hi = min(children), max(children)
    if not lo < x < hi:
        return None
    m = Fraction(sum(Fraction(c) for c in children), b)
    if m == x:
        return tuple(Fraction(1, b) for _ in children)
    # mix uniform weights with a point mass on an extreme child on the other side of x
    j = children.index(lo if m > x else hi)
    cj = Fraction(children[j])
    alpha = (Fraction(x) - cj) / (m - cj)
    q = [alpha / b] * b
    q[j] += 1 - alpha
    return tuple(q)


def _lp_node_measure(x: float, children: list, q_min: float, tol: float) -> tuple | None:
    b = len(children)
    a_eq = np.vstack([np.ones(b), np.asarray(children, dtype=float)])
    b_eq = np.array([1.0, float(x)])
    res = linprog(np.zeros(b), A_eq=a_eq, b_eq=b_eq, bounds=[(q_min, 1.0)] * b, method="highs")
    if res.status != 0:
        return None
    q = res.x
    if abs(q.sum() - 1) > tol or abs(q @ a_eq[1] - x) > tol:
        return None
    return tuple(float(v) for v in q)


def find_martingale_measure(tree: ScenarioTree, method: str = "exact", q_min: float = 1e-6,
                            tol: float = 1e-9) -> EMMResult:
    """Strictly positive branch probabilities making prices a martingale.

    ``method="exact"`` works in rational arithmetic; ``method="lp"`` solves
    each node's feasibility problem with HiGHS under ``q >= q_min``.
    """
    if method not in ("exact", "lp"):
        raise ValueError(f"unknown method {method!r}")
    q = {}
    for node in tree.internal_nodes():
        kids = [tree.price(c) for c in tree.children(node)]
        x = tree.price(node)
        if method == "exact":
            qs = _exact_node_measure(x, kids)
        else:
            qs = _lp_node_measure(x, kids, q_min, tol)
        if qs is None:
            return EMMResult(None, node, f"price {x} of node {node} is not a strict mixture of {kids}")
        q[node] = qs
    return EMMResult(MartingaleMeasure(q))
