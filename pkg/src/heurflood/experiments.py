"""Parameter sweeps: simulate rules over a grid of model parameters and put
the pooled measurements next to the analytical predictions."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from heurflood.analytics import digraph_analysis, predict_pn
from heurflood.degree_model import DegreeModel, above_phase_transition, build_model
from heurflood.graph_gen import child_seed, generate, largest_component
from heurflood.rules import FloodRule, parse_rule, probabilistic
from heurflood.simulation import BatchStats, run_batches

log = logging.getLogger(__name__)

CSV_COLUMNS = ("family", "param", "rule", "rule_param", "pn_sim", "pn_se", "pm_sim", "pm_se",
               "pt_sim", "pt_se", "pn_pred", "pm_pred", "pt_pred", "graphs", "instances", "n", "seed")

# spawn-key namespaces, so graph and instance seeds never collide
_GRAPH_STREAM = 0
_INSTANCE_STREAM = 1


class CalibrationError(ValueError):
    pass


def rule_from_spec(spec) -> FloodRule:
    """``"heuristic:0.99"``, ``"uninformed"``, ``["probabilistic", 0.6]`` or a FloodRule."""
    if isinstance(spec, FloodRule):
        return spec
    if isinstance(spec, str):
        kind, _, param = spec.partition(":")
        return parse_rule(kind.strip(), float(param) if param else None)
    if isinstance(spec, dict):
        return parse_rule(spec["rule"], spec.get("param"))
    kind, *rest = spec
    return parse_rule(kind, rest[0] if rest else None)


def rule_to_spec(rule: FloodRule) -> str:
    return rule.kind if rule.param is None else f"{rule.kind}:{rule.param!r}"


@dataclass
class SweepConfig:
    family: str = "poisson"
    grid: list = field(default_factory=lambda: [6.0])
    n: int = 2000
    rules: list = field(default_factory=lambda: ["uninformed"])
    graphs: int = 5
    instances: int = 200
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    max_degree: int | None = None
    allow_subcritical: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.family not in ("poisson", "power_law"):
            raise ValueError(f"unknown model family {self.family!r}")
        if not self.grid:
            raise ValueError("parameter grid is empty")
        if self.graphs < 1 or self.instances < 1:
            raise ValueError("graphs and instances must be >= 1")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.format!r}")
        self.grid = [float(x) for x in self.grid]
        self.rules = [rule_to_spec(rule_from_spec(r)) for r in self.rules]

    @property
    def rule_objects(self) -> list[FloodRule]:
        return [rule_from_spec(r) for r in self.rules]

    def model(self, param: float) -> DegreeModel:
        D = self.max_degree if self.max_degree is not None else self.n - 1
        key = "z" if self.family == "poisson" else "tau"
        return build_model(self.family, D, **{key: param})

    def full_scale(self) -> "SweepConfig":
        graphs = 15 if self.family == "poisson" else 300
        return replace(self, n=10000, graphs=graphs, instances=1000)

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass
class SweepRow:
    family: str
    param: float
    rule: str
    rule_param: float | None
    pn_sim: float | None = None
    pn_se: float | None = None
    pm_sim: float | None = None
    pm_se: float | None = None
    pt_sim: float | None = None
    pt_se: float | None = None
    pn_pred: float | None = None
    pm_pred: float | None = None
    pt_pred: float | None = None
    graphs: int = 0
    instances: int = 0
    n: int = 0
    seed: int = 0
    error: str | None = None


def _finite(x):
    if isinstance(x, float):
        return None if math.isnan(x) else float(x)
    return x


def _predict(model: DegreeModel, rule: FloodRule, n: int) -> tuple:
    result = digraph_analysis(model, rule, n)
    return result.p_n, result.p_m, result.p_t


def _simulate_graph(job) -> list[BatchStats]:
    model, n, rules, instances, seed, point, g = job
    graph = generate(model, n, child_seed(seed, _GRAPH_STREAM, point, g))
    component = largest_component(graph)
    return run_batches(graph, rules, instances, seed, (_INSTANCE_STREAM, point, g), component)


def _simulate_point(model, config: SweepConfig, rules, point: int, pool=None) -> list[BatchStats]:
    jobs = [(model, config.n, rules, config.instances, config.seed, point, g)
            for g in range(config.graphs)]
    per_graph = list(pool.map(_simulate_graph, jobs)) if pool else [_simulate_graph(j) for j in jobs]
    # pooled over every graph x instance sample
    return [BatchStats.merge(batch[r] for batch in per_graph) for r in range(len(rules))]


def _row(config: SweepConfig, param: float, rule: FloodRule, stats: BatchStats | None,
         pred: tuple | None, error: str | None = None) -> SweepRow:
    row = SweepRow(config.family, param, rule.kind, rule.param, graphs=config.graphs,
                   instances=config.instances, n=config.n, seed=config.seed, error=error)
    if stats is not None:
        row.pn_sim, row.pn_se = stats.pn
        row.pm_sim, row.pm_se = stats.pm
        pt, pt_se = stats.pt
        row.pt_sim, row.pt_se = _finite(pt), _finite(pt_se)
    if pred is not None:
        row.pn_pred, row.pm_pred, row.pt_pred = pred
    return row


def _check_point(model: DegreeModel, config: SweepConfig) -> None:
    above, ratio = above_phase_transition(model)
    if not above and not config.allow_subcritical:
        raise ValueError(f"{model.label()} is below the phase transition (<K^2>/Z = {ratio:.4g})")


def _pool(config: SweepConfig):
    return ProcessPoolExecutor(config.workers) if config.workers > 1 else None


def run_sweep(config: SweepConfig) -> list[SweepRow]:
    """One row per grid point and rule, in grid order.

    A point that fails (below the transition, generation error, ...) yields
    rows carrying the error message instead of aborting the sweep.
    """
    rules = config.rule_objects
    rows = []
    pool = _pool(config)
    try:
        for point, param in enumerate(config.grid):
            try:
                model = config.model(param)
                _check_point(model, config)
                preds = [_predict(model, rule, config.n) for rule in rules]
                stats = _simulate_point(model, config, rules, point, pool)
            except Exception as exc:  # recorded per point, sweep continues
                log.error("%s point %g failed: %s", config.family, param, exc)
                rows.extend(_row(config, param, rule, None, None, str(exc)) for rule in rules)
                continue
            rows.extend(_row(config, param, rule, s, p) for rule, s, p in zip(rules, stats, preds))
    finally:
        if pool:
            pool.shutdown()
    return rows


def calibrate_p(model: DegreeModel, target_pn: float, tolerance: float = 1e-7,
                max_iter: int = 200) -> float:
    """Forwarding probability ``p`` whose predicted reach equals ``target_pn``.

    Bisection on ``p`` in ``[0, 1]``; predicted reach is nondecreasing in ``p``.
    """
    if not target_pn > 0:
        raise CalibrationError(f"target reach must be positive, got {target_pn}")
    ceiling = predict_pn(model, probabilistic(1.0))
    if target_pn >= ceiling:
        raise CalibrationError(f"target reach {target_pn} is unreachable (p = 1 gives {ceiling})")
    lo, hi = 0.0, 1.0
    mid = 0.5
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        value = predict_pn(model, probabilistic(mid))
        if abs(value - target_pn) < tolerance:
            return mid
        if value < target_pn:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return mid


def run_comparison(config: SweepConfig, alpha: float = 0.99) -> list[tuple[SweepRow, SweepRow]]:
    """Heuristic flooding against probabilistic flooding tuned to the same reach.

    Per grid point: simulate ``heuristic(alpha)``, calibrate ``p`` so the
    predicted probabilistic reach equals the simulated heuristic reach, then
    simulate ``probabilistic(p)`` on the same graphs and originators.
    """
    heur = parse_rule("heuristic", alpha)
    pairs = []
    pool = _pool(config)
    try:
        for point, param in enumerate(config.grid):
            try:
                model = config.model(param)
                _check_point(model, config)
                h_stats = _simulate_point(model, config, [heur], point, pool)[0]
                h_row = _row(config, param, heur, h_stats, _predict(model, heur, config.n))
                p = calibrate_p(model, h_stats.pn[0])
                prob = probabilistic(p)
                p_stats = _simulate_point(model, config, [prob], point, pool)[0]
                p_row = _row(config, param, prob, p_stats, _predict(model, prob, config.n))
            except Exception as exc:
                log.error("%s point %g failed: %s", config.family, param, exc)
                pairs.append((_row(config, param, heur, None, None, str(exc)),
                              SweepRow(config.family, param, "probabilistic", None, graphs=config.graphs,
                                       instances=config.instances, n=config.n, seed=config.seed,
                                       error=str(exc))))
                continue
            pairs.append((h_row, p_row))
    finally:
        if pool:
            pool.shutdown()
    return pairs


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(float(value))
    return str(value)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_csv_value(getattr(row, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    payload = [{k: _finite(v) for k, v in asdict(row).items()} for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def write_rows(rows, path, fmt: str = "csv") -> None:
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    Path(path).write_text(text)


def read_csv_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


__all__ = [
    "CSV_COLUMNS", "CalibrationError", "SweepConfig", "SweepRow",
    "calibrate_p", "read_csv_rows", "rows_to_csv", "rows_to_json", "run_comparison",
    "run_sweep", "write_rows",
]
