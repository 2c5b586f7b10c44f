"""Command-line entry point: ``heurflood {analyze,simulate,sweep,compare}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict

import numpy as np

from heurflood.analytics import digraph_analysis
from heurflood.experiments import (
    _GRAPH_STREAM,
    _INSTANCE_STREAM,
    SweepConfig,
    rows_to_csv,
    rows_to_json,
    rule_to_spec,
    run_comparison,
    run_sweep,
)
from heurflood.graph_gen import child_seed, generate, largest_component
from heurflood.rules import parse_rule
from heurflood.simulation import BatchStats, run_batches


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, np.ndarray):
        return [_clean(float(v)) for v in value]
    return value


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with SweepConfig fields; flags override it")
    p.add_argument("--model", choices=("poisson", "power_law"))
    p.add_argument("--z", type=_floats, help="Poisson mean degree(s), comma separated")
    p.add_argument("--tau", type=_floats, help="power-law exponent(s), comma separated")
    p.add_argument("--n", type=int)
    p.add_argument("--max-degree", type=int)
    p.add_argument("--rule", choices=("uninformed", "probabilistic", "heuristic"))
    p.add_argument("--p", type=float, help="forwarding probability for --rule probabilistic")
    p.add_argument("--alpha", type=float, help="target reach for --rule heuristic")
    p.add_argument("--rules", help="comma-separated rule list, e.g. probabilistic:0.6,heuristic:0.99")
    p.add_argument("--graphs", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--full-scale", action="store_true",
                   help="n=10000, 15 (Poisson) or 300 (power-law) graphs, 1000 instances")
    p.add_argument("--allow-subcritical", action="store_true")
    p.add_argument("--strict", action="store_true",
                   help="exit nonzero with a JSON error record if any point fails")


def _single_rule(args):
    kind = args.rule or ("heuristic" if args.alpha is not None else
                         "probabilistic" if args.p is not None else "uninformed")
    param = {"probabilistic": args.p, "heuristic": args.alpha}.get(kind)
    return parse_rule(kind, param)


def _config(args, command: str) -> SweepConfig:
    base = SweepConfig.from_json(args.config) if args.config else SweepConfig()
    data = asdict(base)
    family = args.model or data["family"]
    data["family"] = family
    grid = args.z if family == "poisson" else args.tau
    if grid:
        data["grid"] = grid
    elif args.model and not args.config:
        raise SystemExit(f"--model {family} needs --{'z' if family == 'poisson' else 'tau'}")
    if args.rules:
        data["rules"] = [s.strip() for s in args.rules.split(",") if s.strip()]
    elif args.rule or (command == "sweep" and (args.p is not None or args.alpha is not None)):
        data["rules"] = [rule_to_spec(_single_rule(args))]
    for key in ("n", "graphs", "instances", "seed", "workers", "out", "format", "max_degree"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.allow_subcritical:
        data["allow_subcritical"] = True
    config = SweepConfig(**data)
    if args.full_scale:
        config = config.full_scale()
    return config


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail_strict(rows) -> int:
    failed = [{"family": r.family, "param": r.param, "rule": r.rule, "error": r.error}
              for r in rows if r.error]
    if failed:
        sys.stderr.write(json.dumps({"status": "error", "failed_points": failed}) + "\n")
        return 1
    return 0


def cmd_analyze(args) -> int:
    config = _config(args, "analyze")
    rules = config.rule_objects if args.rules else [_single_rule(args)]
    out = []
    for param in config.grid:
        model = config.model(param)
        for rule in rules:
            res = digraph_analysis(model, rule, config.n)
            gcc = res.gcc
            out.append({
                "model": model.label(), "rule": rule.ident, "n": config.n,
                "q": gcc.q, "theta_g": gcc.theta_g, "z_gcc": _clean(gcc.z_gcc),
                "z2_gcc": _clean(gcc.z2_gcc), "l_g": _clean(gcc.l_g), "l_gcc": _clean(gcc.l_gcc),
                "theta_in": res.theta_in, "theta_out": res.theta_out, "z_gout": res.z_gout,
                "z2_gout": res.z2_gout, "rho": res.rho, "l_gout": res.l_gout,
                "p_n": res.p_n, "p_m": res.p_m, "p_t": res.p_t, "note": res.pt_note,
            })
    _emit(json.dumps(out, indent=2) + "\n", config.out)
    return 0


def cmd_simulate(args) -> int:
    config = _config(args, "simulate")
    rule = _single_rule(args) if (args.rule or args.p is not None or args.alpha is not None) \
        else config.rule_objects[0]
    graphs = args.graphs or 1
    results = []
    for point, param in enumerate(config.grid):
        model = config.model(param)
        batches = []
        for g in range(graphs):
            graph = generate(model, config.n, child_seed(config.seed, _GRAPH_STREAM, point, g))
            comp = largest_component(graph)
            batches.append(run_batches(graph, [rule], config.instances, config.seed,
                                       (_INSTANCE_STREAM, point, g), comp)[0])
        stats = BatchStats.merge(batches)
        results.append({
            "model": model.label(), "rule": rule.ident, "n": config.n, "graphs": graphs,
            "instances": config.instances, "component_size": stats.component_size,
            "pn": _clean(stats.pn[0]), "pn_se": _clean(stats.pn[1]),
            "pm": _clean(stats.pm[0]), "pm_se": _clean(stats.pm[1]),
            "pt": _clean(stats.pt[0]), "pt_se": _clean(stats.pt[1]),
        })
    _emit(json.dumps(results, indent=2) + "\n", config.out)
    return 0


def _write_rows(rows, config: SweepConfig) -> None:
    text = rows_to_csv(rows) if config.format == "csv" else rows_to_json(rows)
    _emit(text, config.out)


def cmd_sweep(args) -> int:
    config = _config(args, "sweep")
    rows = run_sweep(config)
    _write_rows(rows, config)
    return _fail_strict(rows) if args.strict else 0


def cmd_compare(args) -> int:
    config = _config(args, "compare")
    alpha = args.alpha if args.alpha is not None else 0.99
    pairs = run_comparison(config, alpha)
    rows = [row for pair in pairs for row in pair]
    _write_rows(rows, config)
    return _fail_strict(rows) if args.strict else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="heurflood", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in (
        ("analyze", cmd_analyze, "analytical predictions only"),
        ("simulate", cmd_simulate, "simulate one rule"),
        ("sweep", cmd_sweep, "simulation + predictions over a parameter grid"),
        ("compare", cmd_compare, "heuristic vs reach-calibrated probabilistic flooding"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_shared(p)
        p.set_defaults(func=func)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        sys.stderr.write(json.dumps({"status": "error", "error": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
