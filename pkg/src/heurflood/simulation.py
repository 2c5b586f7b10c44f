"""Synchronous-round flooding on a graph's largest component.

A node that first receives the item in round ``t`` decides once, per incident
edge, whether to send a copy; copies arrive in round ``t + 1``. Every node
decides about every incident edge, including the one the item came in on,
so uninformed flooding sends exactly one message per arc.

Each instance draws one uniform per arc up front. The arc ``u -> v`` fires
iff its uniform is below ``f(deg u, deg v)``, so reach is the set of nodes
reachable from the originator over firing arcs. Sharing the uniforms across
rules couples runs: raising ``p`` can only add arcs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from heurflood.graph_gen import ComponentLabeling, Graph, child_seed, largest_component, make_rng
from heurflood.rules import FloodRule


@dataclass(frozen=True)
class FloodOutcome:
    reached: int
    messages: int
    waiting_sum: int
    rounds: int


@numba.njit(cache=True)
def _bfs(indptr, arc_dst, fire, source):
    """Round of first receipt per node (-1 if never), plus messages and rounds."""
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    messages = 0
    rounds = 0
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for k in range(indptr[u], indptr[u + 1]):
            if not fire[k]:
                continue
            messages += 1
            if du + 1 > rounds:
                rounds = du + 1
            v = arc_dst[k]
            if dist[v] < 0:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
    return dist, messages, rounds


def _distances(graph: Graph, source: int, fire: np.ndarray | None = None) -> np.ndarray:
    if fire is None:
        fire = np.ones(len(graph.arc_dst), dtype=np.bool_)
    return _bfs(graph.indptr, graph.arc_dst, fire, source)[0]


def arc_probabilities(graph: Graph, rule: FloodRule) -> np.ndarray:
    deg = graph.degree
    if graph.arc_dst.size == 0:
        return np.zeros(0)
    return np.asarray(rule.prob(deg[graph.arc_src], deg[graph.arc_dst]), dtype=float)


def _flood(graph: Graph, originator: int, fire: np.ndarray):
    dist, messages, rounds = _bfs(graph.indptr, graph.arc_dst, fire, originator)
    reached = dist >= 0
    outcome = FloodOutcome(
        reached=int(reached.sum()),
        messages=int(messages),
        waiting_sum=int(dist[reached].sum()),
        rounds=int(rounds),
    )
    return outcome, dist


def run_flood(graph: Graph, component: ComponentLabeling, originator: int,
              rule: FloodRule, rng, arc_probs: np.ndarray | None = None) -> FloodOutcome:
    """Flood once from ``originator``; ``arc_probs`` may be precomputed with
    :func:`arc_probabilities` when the same rule is run many times."""
    if originator not in component:
        raise ValueError(f"originator {originator} is outside the given component")
    rng = make_rng(rng)
    if arc_probs is None:
        arc_probs = arc_probabilities(graph, rule)
    fire = rng.random(len(graph.arc_dst)) < arc_probs
    return _flood(graph, originator, fire)[0]


@dataclass
class BatchStats:
    """Per-instance ratios for one (graph set, rule); pool with :meth:`merge`."""

    pn_samples: np.ndarray = field(repr=False)
    pm_samples: np.ndarray = field(repr=False)
    pt_samples: np.ndarray = field(repr=False)  # NaN where nothing beyond the originator was reached
    component_size: int

    # A flood that never leaves its originator enters ``pt`` as 0: the
    # prediction weights an originator outside the giant in-component by
    # zero, and excluding such runs biases the mean upward near threshold.
    # ``pt_conditional`` is the mean over runs that reached someone.

    @property
    def instances(self) -> int:
        return len(self.pn_samples)

    @staticmethod
    def _mean_se(x: np.ndarray) -> tuple[float, float]:
        x = x[~np.isnan(x)]
        if len(x) == 0:
            return float("nan"), float("nan")
        se = float(np.std(x, ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0
        return float(np.mean(x)), se

    @property
    def pn(self) -> tuple[float, float]:
        return self._mean_se(self.pn_samples)

    @property
    def pm(self) -> tuple[float, float]:
        return self._mean_se(self.pm_samples)

    @property
    def pt(self) -> tuple[float, float]:
        return self._mean_se(np.nan_to_num(self.pt_samples, nan=0.0))

    @property
    def pt_conditional(self) -> tuple[float, float]:
        return self._mean_se(self.pt_samples)

    @classmethod
    def merge(cls, batches) -> "BatchStats":
        batches = list(batches)
        return cls(
            np.concatenate([b.pn_samples for b in batches]),
            np.concatenate([b.pm_samples for b in batches]),
            np.concatenate([b.pt_samples for b in batches]),
            int(np.mean([b.component_size for b in batches])),
        )


def run_batch(graph: Graph, rule: FloodRule, instances: int, seed: int = 0,
              graph_key: tuple = (), component: ComponentLabeling | None = None) -> BatchStats:
    """Flood ``instances`` times from uniformly drawn originators in the
    largest component.

    Instance ``i`` uses the seed derived from ``(seed, *graph_key, i)``, so
    results do not depend on which other instances ran, and different rules
    see the same originators and the same arc uniforms.

    The message ratio divides by the component's total degree (the message
    count of uninformed flooding); the waiting-time ratio divides the mean
    first-receipt round by the mean BFS distance from the same originator.
    """
    return run_batches(graph, [rule], instances, seed, graph_key, component)[0]


def run_batches(graph: Graph, rules, instances: int, seed: int = 0,
                graph_key: tuple = (), component: ComponentLabeling | None = None) -> list[BatchStats]:
    """:func:`run_batch` for several rules at once, sharing per-instance draws."""
    if instances < 1:
        raise ValueError("need at least one instance")
    if component is None:
        component = largest_component(graph)
    if component.size == 0:
        raise ValueError("graph has no nodes")
    rules = list(rules)
    probs = [arc_probabilities(graph, rule) for rule in rules]
    total_degree = int(graph.degree[component.nodes].sum())
    size = component.size
    n_arcs = len(graph.arc_dst)

    pn = np.empty((len(rules), instances))
    pm = np.empty((len(rules), instances))
    pt = np.full((len(rules), instances), np.nan)
    for i in range(instances):
        rng = np.random.default_rng(child_seed(seed, *graph_key, i))
        origin = int(component.nodes[rng.integers(size)])
        uniforms = rng.random(n_arcs)
        mean_bfs = None
        for r, arc_probs in enumerate(probs):
            outcome, _ = _flood(graph, origin, uniforms < arc_probs)
            pn[r, i] = outcome.reached / size
            pm[r, i] = outcome.messages / total_degree if total_degree else 0.0
            if outcome.reached > 1:
                if mean_bfs is None:
                    bfs = _distances(graph, origin)
                    mean_bfs = bfs[bfs > 0].sum() / (size - 1)
                pt[r, i] = (outcome.waiting_sum / (outcome.reached - 1)) / mean_bfs
    return [BatchStats(pn[r], pm[r], pt[r], size) for r in range(len(rules))]
