"""Batch front end.

Every subcommand reads an optional JSON :class:`ExperimentConfig`, applies
``--set key.path=value`` overrides and then the explicit flags, and writes its
artifacts under ``--out``. Each artifact starts with (CSV: a ``#`` comment line,
JSON: top-level fields) the schema version and the hash of the resolved
config, so the same config and seed always reproduce the same bytes.

Exit codes: 0 ok, 2 configuration error, 3 semantic error (model and
strategy do not fit together, or an invariant check failed).
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .costs import SweepRow, c_bar, epsilon_star, write_sweep_csv
from .detector import detect_predictable_jumps, find_martingale_measure, verify_equivalence
from .market_models import (
    SCHEMA_VERSION,
    ModelError,
    ModelSpec,
    PathGenerator,
    ScenarioTree,
    TimeGrid,
    binomial_tree,
    enumerate_trees,
    random_tree,
    sample_paths,
)
from .strategies import (
    FlashStrategy,
    evaluate_flash,
    make_bounded_loss_strategy,
    make_constant_profit_strategy,
    make_long_only_variant,
    make_right_jump_strategy,
    make_sure_profit_strategy,
)

EXIT_OK, EXIT_CONFIG, EXIT_SEMANTIC = 0, 2, 3

STRATEGY_KINDS = ("sure_profit", "constant_profit", "bounded_loss", "right_jump")

DEFAULT_MODEL = {
    "schema_version": SCHEMA_VERSION,
    "initial_price": 10.0,
    "base": {"kind": "constant"},
    "jumps": [{"time": {"kind": "deterministic", "time": 0.5},
               "size": {"kind": "point", "value": 0.5},
               "predictability": "full", "name": "J"}],
}

DEFAULTS: dict[str, Any] = {
    "schema_version": SCHEMA_VERSION,
    "model": DEFAULT_MODEL,
    "grid": {"n_steps": 64, "horizon": 1.0},
    "strategy": {"kind": "constant_profit", "jump": 0, "k": 2.0, "N": 1.0, "C": 10.0,
                 "long_only": False, "base_offset": None},
    "n_min": 1,
    "n_max": 8,
    "n_paths": 100,
    "seed": None,
    "csv_paths": 5,
    "costs": {"c": 1.0, "k": 2.0, "N": 10.0, "epsilons": [0.001, 0.005, 0.01], "search_star": True},
    "output_dir": "out",
}


class ConfigError(ValueError):
    """Malformed or incomplete configuration (exit 2)."""


class SemanticError(ValueError):
    """Well-formed configuration that makes no sense for the model (exit 3)."""


@dataclass(frozen=True)
class StrategyConfig:
    kind: str = "constant_profit"
    jump: int | str = 0
    k: float = 2.0
    N: float = 1.0
    C: float = 10.0
    long_only: bool = False
    base_offset: float | None = None


@dataclass(frozen=True)
class CostSweepConfig:
    c: float = 1.0
    k: float = 2.0
    N: float = 10.0
    epsilons: tuple[float, ...] = (0.001, 0.005, 0.01)
    search_star: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    grid: TimeGrid
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    n_min: int = 1
    n_max: int = 8
    n_paths: int = 100
    seed: int | None = None
    csv_paths: int = 5
    costs: CostSweepConfig = field(default_factory=CostSweepConfig)
    output_dir: str = "out"
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        d = _merge(copy.deepcopy(DEFAULTS), d)
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema_version {version!r}")
        unknown = set(d) - set(DEFAULTS) - {"model_file"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            if d.get("model_file"):
                mf = Path(d["model_file"])
                if base_dir is not None and not mf.is_absolute():
                    mf = base_dir / mf
                if not mf.is_file():
                    raise ConfigError(f"model file {mf} does not exist")
                d["model"] = json.loads(mf.read_text())
                d.pop("model_file")
            model = ModelSpec.from_dict(d["model"])
            grid = TimeGrid(_int(d["grid"]["n_steps"], "grid.n_steps"), float(d["grid"]["horizon"]))
            s = d["strategy"]
            unknown = set(s) - set(DEFAULTS["strategy"])
            if unknown:
                raise ConfigError(f"unknown strategy keys {sorted(unknown)}")
            strategy = StrategyConfig(
                kind=str(s["kind"]), jump=s["jump"], k=float(s["k"]), N=float(s["N"]),
                C=float(s["C"]), long_only=bool(s["long_only"]),
                base_offset=None if s["base_offset"] is None else float(s["base_offset"]),
            )
            c = d["costs"]
            costs = CostSweepConfig(float(c["c"]), float(c["k"]), float(c["N"]),
                                    tuple(float(e) for e in c["epsilons"]), bool(c["search_star"]))
            cfg = cls(
                model=model, grid=grid, strategy=strategy,
                n_min=_int(d["n_min"], "n_min"), n_max=_int(d["n_max"], "n_max"),
                n_paths=_int(d["n_paths"], "n_paths"),
                seed=None if d["seed"] is None else _int(d["seed"], "seed"),
                csv_paths=_int(d["csv_paths"], "csv_paths"),
                costs=costs, output_dir=str(d["output_dir"]), raw=d,
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad config: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.strategy.kind not in STRATEGY_KINDS:
            raise ConfigError(f"strategy.kind must be one of {STRATEGY_KINDS}")
        if self.n_max < 2:
            raise ConfigError("n_max must be >= 2")
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError("need 1 <= n_min <= n_max")
        if self.n_paths < 1 or self.csv_paths < 0:
            raise ConfigError("n_paths must be positive and csv_paths nonnegative")
        if any(not e > 0 for e in self.costs.epsilons):
            raise ConfigError("cost epsilons must be positive")
        if not (self.costs.c > 0 and self.costs.k > 0 and self.costs.N > 0):
            raise ConfigError("costs.c, costs.k and costs.N must be positive")

    def to_dict(self) -> dict:
        d = copy.deepcopy(self.raw) if self.raw else {}
        d.update({
            "schema_version": SCHEMA_VERSION,
            "model": self.model.to_dict(),
            "grid": {"n_steps": self.grid.n_steps, "horizon": self.grid.horizon},
            "strategy": {"kind": self.strategy.kind, "jump": self.strategy.jump, "k": self.strategy.k,
                         "N": self.strategy.N, "C": self.strategy.C,
                         "long_only": self.strategy.long_only, "base_offset": self.strategy.base_offset},
            "n_min": self.n_min, "n_max": self.n_max, "n_paths": self.n_paths, "seed": self.seed,
            "csv_paths": self.csv_paths,
            "costs": {"c": self.costs.c, "k": self.costs.k, "N": self.costs.N,
                      "epsilons": list(self.costs.epsilons), "search_star": self.costs.search_star},
            "output_dir": self.output_dir,
        })
        return d

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir", None)
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _int(x, label) -> int:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or int(x) != x:
        raise ConfigError(f"{label} must be an integer, got {x!r}")
    return int(x)


def _merge(base: dict, over: dict) -> dict:
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict) and k != "model":
            base[k] = _merge(base[k], v)
        else:
            base[k] = v
    return base


def _set_dotted(d: dict, key: str, value: Any) -> None:
    parts = key.split(".")
    cur = d
    for p in parts[:-1]:
        nxt = cur.get(p)
        if not isinstance(nxt, dict):
            nxt = {}
            cur[p] = nxt
        cur = nxt
    cur[parts[-1]] = value


def _parse_override(item: str) -> tuple[str, Any]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, text = item.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key.strip(), value


# ---------------------------------------------------------------------------
# config assembly


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    raw: dict = {}
    base_dir = None
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        base_dir = path.parent
    if getattr(args, "model", None):
        raw.pop("model", None)
        raw["model_file"] = str(Path(args.model).resolve())
    for item in getattr(args, "set", None) or []:
        key, value = _parse_override(item)
        _set_dotted(raw, key, value)
    flags = {
        "seed": "seed", "n_paths": "n_paths", "n_max": "n_max", "n_min": "n_min",
        "n_steps": "grid.n_steps", "horizon": "grid.horizon", "strategy": "strategy.kind",
        "k": "strategy.k", "C": "strategy.C", "csv_paths": "csv_paths",
    }
    for attr, key in flags.items():
        v = getattr(args, attr, None)
        if v is not None:
            _set_dotted(raw, key, v)
    if getattr(args, "long_only", False):
        _set_dotted(raw, "strategy.long_only", True)
    if getattr(args, "strategy_N", None) is not None:
        _set_dotted(raw, "strategy.N", args.strategy_N)
    try:
        return ExperimentConfig.from_dict(raw, base_dir)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc


def _require_seed(cfg: ExperimentConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("--seed is required for sampling subcommands")
    return cfg.seed


def _header(cfg_hash: str, command: str, **extra) -> str:
    bits = [f"flashlab {command}", f"schema_version={SCHEMA_VERSION}", f"config_hash={cfg_hash}"]
    bits += [f"{k}={v}" for k, v in extra.items()]
    return " ".join(bits)


def _outdir(args, cfg: ExperimentConfig | None = None) -> Path:
    out = Path(args.out if args.out is not None else (cfg.output_dir if cfg else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")


def build_strategy(cfg: ExperimentConfig) -> FlashStrategy:
    s, m, g = cfg.strategy, cfg.model, cfg.grid
    try:
        if s.kind == "sure_profit":
            fs = make_sure_profit_strategy(m, g, s.jump, s.base_offset)
        elif s.kind == "constant_profit":
            fs = make_constant_profit_strategy(m, g, s.k, s.jump, s.base_offset)
        elif s.kind == "bounded_loss":
            fs = make_bounded_loss_strategy(m, g, s.N, s.C, s.jump, s.base_offset)
        else:
            fs = make_right_jump_strategy(m, g, s.k)
        if s.long_only:
            fs = make_long_only_variant(fs, s.C)
    except (ModelError, ValueError) as exc:
        raise SemanticError(str(exc)) from exc
    return fs


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    seed = _require_seed(cfg)
    h = cfg.config_hash()
    try:
        gen = PathGenerator(cfg.model, cfg.grid)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc
    batch = sample_paths(gen, cfg.n_paths, seed)
    if not 0 <= args.path_index < len(batch):
        raise ConfigError(f"--path-index must lie in [0, {len(batch) - 1}]")
    out = _outdir(args, cfg)
    head = _header(h, "simulate", seed=seed, spec_hash=cfg.model.spec_hash())
    with open(out / "path.csv", "w", newline="") as fh:
        fh.write(f"# {head} path_id={args.path_index}\n")
        batch[args.path_index].write_csv(fh)
    with open(out / "ledger.csv", "w", newline="") as fh:
        fh.write(f"# {head}\n")
        fh.write("path_id,source,index,t,dX,dXplus\n")
        for p, recs in enumerate(batch.jumps):
            for r in recs:
                fh.write(f"{p},{r.source},{r.index},{cfg.grid.time(r.index)!r},"
                         f"{float(r.dX)!r},{float(r.dX_plus)!r}\n")
    _write_json(out / "config.json", {**cfg.to_dict(), "config_hash": h})
    lines = [head, f"paths sampled: {len(batch)}", f"grid: {cfg.grid.n_steps} steps on [0, {cfg.grid.horizon:g}]"]
    for name, _ in cfg.model.named_jumps():
        sizes = batch.jump_sizes(name)
        hit = np.isfinite(sizes)
        if hit.any():
            lines.append(f"jump {name}: occurred on {int(hit.sum())} paths, mean size {np.mean(sizes[hit]):.6g}")
        else:
            lines.append(f"jump {name}: did not occur")
    _finish(out, lines, args)
    return EXIT_OK


def cmd_run_strategy(args) -> int:
    cfg = load_config(args)
    seed = _require_seed(cfg)
    h = cfg.config_hash()
    fs = build_strategy(cfg)
    try:
        gen = PathGenerator(cfg.model, cfg.grid)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc
    batch = sample_paths(gen, cfg.n_paths, seed)
    eps = args.eps
    try:
        report = evaluate_flash(fs, batch, cfg.n_max, eps, n_min=cfg.n_min, keep_trajectories=False)
        n_csv = min(cfg.csv_paths, len(batch))
        small = evaluate_flash(fs, batch[:n_csv], cfg.n_max, eps, n_min=cfg.n_min,
                               keep_trajectories=True) if n_csv else None
    except (ModelError, ValueError) as exc:
        raise SemanticError(str(exc)) from exc
    out = _outdir(args, cfg)
    head = _header(h, "run-strategy", seed=seed, strategy=fs.name)
    if small is not None:
        with open(out / "gains.csv", "w", newline="") as fh:
            small.write_csv(fh, header=head)
    summary = report.summary()
    summary.update({"config_hash": h, "command": "run-strategy"})
    _write_json(out / "report.json", summary)
    lines = [head] + _report_lines(summary)
    _finish(out, lines, args)
    return EXIT_OK


def _report_lines(summary: dict) -> list[str]:
    z = summary["zeta"]
    lines = [
        f"strategy {summary['strategy']} (qualifying: {summary['qualifying']}) params {summary['params']}",
        f"paths: {summary['n_paths']}, with finite limit time: {summary['paths_with_finite_tau']}",
        f"limit profit: min {z['min']}, mean {z['mean']}, max {z['max']}; zero off the limit time: {z['zero_off_tau']}",
        "   n      offset      mean gap       max gap    loss floor",
    ]
    for row in summary["gaps"]:
        lf = "-" if row["loss_floor"] is None else f"{row['loss_floor']:.6g}"
        lines.append(f"{row['n']:4d} {row['offset']:11.6g} {row['mean_gap']:13.6g} {row['max_gap']:13.6g} {lf:>13}")
    lines.append(f"mean gaps nonincreasing: {summary['gaps_nonincreasing']}")
    if summary.get("epsilon") is not None:
        lines.append(f"cost epsilon {summary['epsilon']}: min net terminal gains {summary.get('terminal_net_min')}")
    return lines


def cmd_sweep_costs(args) -> int:
    cfg = load_config(args)
    c = args.c if args.c is not None else cfg.costs.c
    k = args.k_cost if args.k_cost is not None else cfg.costs.k
    N = args.N if args.N is not None else cfg.costs.N
    epsilons = tuple(args.eps) if args.eps else cfg.costs.epsilons
    if not (c > 0 and k > 0 and N > 0) or any(not e > 0 for e in epsilons):
        raise ConfigError("c, k, N and every epsilon must be positive")
    h = hashlib.sha256(json.dumps([cfg.config_hash(), c, k, N, list(epsilons)]).encode()).hexdigest()[:16]
    star = epsilon_star(c, k, N)
    realized = None
    if cfg.seed is not None:
        realized = _realized_cost_gains(cfg, c, k, N, epsilons)
    rows = [SweepRow(e, c_bar(c, e, k, N), None if realized is None else realized[e]) for e in epsilons]
    if cfg.costs.search_star:
        rows.append(SweepRow(star, c_bar(c, star, k, N)))
    out = _outdir(args, cfg)
    head = _header(h, "sweep-costs", c=c, k=k, N=N, epsilon_star=repr(star), seed=cfg.seed)
    with open(out / "sweep.csv", "w", newline="") as fh:
        write_sweep_csv(rows, fh, header=head)
    lines = [head, f"epsilon* = {star!r} (c_bar there = {c_bar(c, star, k, N):.3g})"]
    for r in rows:
        lines.append(f"eps {r.epsilon:.6g}: c_bar {r.c_bar:.6g}, realized min {r.realized_min_gain}, pass {r.passed}")
    failed = any(r.passed is False for r in rows)
    _finish(out, lines, args)
    return EXIT_SEMANTIC if failed else EXIT_OK


def _realized_cost_gains(cfg: ExperimentConfig, c: float, k: float, N: float,
                         epsilons: Sequence[float]) -> dict[float, float]:
    """Min over paths of the cost-adjusted horizon gains of a constant-profit-``c`` strategy
    with position bound ``k``, for each ε."""
    if k / c < 1:
        raise SemanticError("need k >= c for a constant profit c with positions bounded by k")
    try:
        fs = make_constant_profit_strategy(cfg.model, cfg.grid, k / c, cfg.strategy.jump).scaled(c)
        gen = PathGenerator(cfg.model, cfg.grid)
    except (ModelError, ValueError) as exc:
        raise SemanticError(str(exc)) from exc
    batch = sample_paths(gen, cfg.n_paths, cfg.seed)
    out = {}
    for e in epsilons:
        rep = evaluate_flash(fs, batch, cfg.n_max, e, n_min=cfg.n_max, keep_trajectories=False)
        fin = rep.finite
        if not fin.any():
            raise SemanticError("the clipped jump never occurs on the sampled paths")
        left = np.array([batch[p].left_limits[i] for p, i in enumerate(batch.jump_indices(fs.jump)) if i >= 0])
        if np.any(np.abs(left) > N):
            raise SemanticError(f"pre-jump prices exceed N = {N}; the guaranteed bound does not apply")
        out[e] = float(rep.terminal_net[-1][fin].min())
    return out


def _iter_trees(args) -> tuple[list[ScenarioTree], dict]:
    if args.tree:
        p = Path(args.tree)
        if not p.is_file():
            raise ConfigError(f"tree file {p} does not exist")
        try:
            return [ScenarioTree.from_dict(json.loads(p.read_text()))], {"tree": str(p)}
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad tree file: {exc}") from exc
    if args.binomial:
        u, d = (Fraction(str(x)) for x in args.binomial)
        return [binomial_tree(args.depth, u, d, root_price=1)], {"binomial": [str(u), str(d)], "depth": args.depth}
    trees: list[ScenarioTree] = []
    meta: dict = {"depth": args.depth}
    if args.enumerate:
        if args.depth > 3:
            raise ConfigError("exhaustive enumeration is limited to depth <= 3")
        trees += list(enumerate_trees(args.depth, args.branching, tuple(args.increments)))
        meta.update(enumerate=True, branching=args.branching, increments=list(args.increments))
    if args.random:
        if args.seed is None:
            raise ConfigError("--seed is required for random tree families")
        depth = args.random_depth or args.depth
        trees += [random_tree(depth, args.seed + i) for i in range(args.random)]
        meta.update(random=args.random, random_depth=depth, seed=args.seed)
    if not trees:
        raise ConfigError("choose a tree family: --enumerate, --random N, --binomial U D or --tree FILE")
    return trees, meta


def _meta_hash(meta: dict) -> str:
    return hashlib.sha256(json.dumps(meta, sort_keys=True).encode()).hexdigest()[:16]


def cmd_verify_equivalence(args) -> int:
    trees, meta = _iter_trees(args)
    h = _meta_hash({"command": "verify-equivalence", **meta})
    rep = verify_equivalence(trees)
    out = _outdir(args)
    d = rep.to_dict(include_verdicts=not args.no_verdicts)
    d.update({"config_hash": h, "family": meta, "command": "verify-equivalence"})
    _write_json(out / "equivalence.json", d)
    lines = [_header(h, "verify-equivalence"), f"trees: {rep.n_trees}",
             f"with predictable jumps: {rep.n_with_jumps} (fully predictable: {rep.n_with_full_jumps})",
             f"mismatches: {len(rep.mismatches)}"]
    _finish(out, lines, args)
    return EXIT_OK if rep.ok else EXIT_SEMANTIC


def cmd_find_emm(args) -> int:
    trees, meta = _iter_trees(args)
    meta["method"] = args.method
    h = _meta_hash({"command": "find-emm", **meta})
    results = []
    violations = 0
    for i, tree in enumerate(trees):
        res = find_martingale_measure(tree, args.method, q_min=args.q_min)
        jumps = detect_predictable_jumps(tree)
        bad = res.feasible and bool(jumps)
        violations += bad
        entry = {"tree_index": i, "feasible": res.feasible, "predictable_jumps": len(jumps)}
        if res.feasible:
            entry["measure"] = {str(n): [str(q) for q in qs] for n, qs in res.measure.q.items()}
        else:
            entry["certificate_node"] = res.certificate_node
            entry["reason"] = res.reason
        if bad or len(trees) <= args.full_below:
            entry["tree"] = tree.to_dict()
        results.append(entry)
    out = _outdir(args)
    _write_json(out / "emm.json", {
        "schema_version": SCHEMA_VERSION, "config_hash": h, "command": "find-emm", "family": meta,
        "n_trees": len(trees), "n_feasible": sum(r["feasible"] for r in results),
        "n_violations": violations, "results": results,
    })
    lines = [_header(h, "find-emm"), f"trees: {len(trees)}",
             f"feasible martingale measure: {sum(r['feasible'] for r in results)}",
             f"feasible yet with predictable jumps: {violations}"]
    if len(trees) == 1 and results[0]["feasible"]:
        lines.append(f"measure: {results[0]['measure']}")
    _finish(out, lines, args)
    return EXIT_OK if violations == 0 else EXIT_SEMANTIC


def cmd_report(args) -> int:
    src = Path(args.input)
    if not src.is_dir():
        raise ConfigError(f"{src} is not a directory")
    lines = []
    if (src / "report.json").is_file():
        lines += _report_lines(json.loads((src / "report.json").read_text()))
    if (src / "sweep.csv").is_file():
        lines += ["cost sweep:"] + [f"  {line}" for line in (src / "sweep.csv").read_text().splitlines()]
    for name in ("equivalence.json", "emm.json"):
        if (src / name).is_file():
            d = json.loads((src / name).read_text())
            keys = [k for k in sorted(d) if isinstance(d[k], (int, float, str, bool)) and k != "command"]
            lines.append(f"{name}: " + ", ".join(f"{k}={d[k]}" for k in keys))
    if not lines:
        raise ConfigError(f"no artifacts found in {src}")
    text = "\n".join(lines) + "\n"
    (src / "report.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _finish(out: Path, lines: list[str], args) -> None:
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    if not getattr(args, "quiet", False):
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flashlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--model", help="JSON model spec (replaces the config's model)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry, e.g. --set strategy.k=3 (repeatable)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--quiet", action="store_true")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--n-paths", type=int)
    sampling.add_argument("--n-steps", type=int)
    sampling.add_argument("--horizon", type=float)

    s = sub.add_parser("simulate", parents=[common, sampling], help="sample paths, write one path and the jump ledger")
    s.add_argument("--path-index", type=int, default=0)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("run-strategy", parents=[common, sampling], help="evaluate a flash strategy")
    s.add_argument("--strategy", choices=STRATEGY_KINDS)
    s.add_argument("--k", type=float)
    s.add_argument("--strategy-N", type=float, dest="strategy_N")
    s.add_argument("--C", type=float)
    s.add_argument("--long-only", action="store_true")
    s.add_argument("--n-max", type=int)
    s.add_argument("--n-min", type=int)
    s.add_argument("--csv-paths", type=int)
    s.add_argument("--eps", type=float, help="proportional cost level for net gains")
    s.set_defaults(func=cmd_run_strategy)

    s = sub.add_parser("sweep-costs", parents=[common, sampling], help="guaranteed profit under ε-close prices")
    s.add_argument("--c", type=float)
    s.add_argument("--k", type=float, dest="k_cost")
    s.add_argument("--N", type=float)
    s.add_argument("--eps", type=_floats, help="comma-separated ε values")
    s.add_argument("--n-max", type=int)
    s.set_defaults(func=cmd_sweep_costs)

    tree_args = argparse.ArgumentParser(add_help=False)
    tree_args.add_argument("--depth", type=int, default=2)
    tree_args.add_argument("--branching", type=int, default=2)
    tree_args.add_argument("--increments", type=_floats_or_ints, default=[-1, 0, 1])
    tree_args.add_argument("--enumerate", action="store_true")
    tree_args.add_argument("--random", type=int, default=0, metavar="COUNT")
    tree_args.add_argument("--random-depth", type=int)
    tree_args.add_argument("--binomial", type=str, nargs=2, metavar=("UP", "DOWN"))
    tree_args.add_argument("--tree", help="JSON scenario tree")
    tree_args.add_argument("--seed", type=int)
    tree_args.add_argument("--out", default="out")
    tree_args.add_argument("--quiet", action="store_true")

    s = sub.add_parser("verify-equivalence", parents=[tree_args], help="predictable jumps vs sure profits on trees")
    s.add_argument("--no-verdicts", action="store_true", help="omit per-tree verdicts from the JSON")
    s.set_defaults(func=cmd_verify_equivalence)

    s = sub.add_parser("find-emm", parents=[tree_args], help="strictly positive martingale measures on trees")
    s.add_argument("--method", choices=("exact", "lp"), default="exact")
    s.add_argument("--q-min", type=float, default=1e-6)
    s.add_argument("--full-below", type=int, default=10, help="embed trees in full when the family is this small")
    s.set_defaults(func=cmd_find_emm)

    s = sub.add_parser("report", help="summarize the artifacts of an output directory")
    s.add_argument("input")
    s.set_defaults(func=cmd_report)
    return p


def _floats_or_ints(text: str) -> list:
    out = []
    for x in text.split(","):
        v = float(x)
        out.append(int(v) if v == int(v) else v)
    return out


def _set_flag_aliases(args: argparse.Namespace) -> None:
    # map parser spellings onto config keys used by load_config
    for attr in ("n_paths", "n_steps", "horizon", "n_max", "n_min", "csv_paths", "strategy", "k", "C"):
        if not hasattr(args, attr):
            setattr(args, attr, None)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    _set_flag_aliases(args)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SemanticError as exc:
        print(f"semantic error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
