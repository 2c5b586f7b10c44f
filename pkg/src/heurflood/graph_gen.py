"""Random multigraph generators and component labeling.

A :class:`Graph` stores its edge multiset plus a CSR view of "arcs": every
non-loop edge ``(u, v)`` yields the arcs ``u -> v`` and ``v -> u``, while a
self-loop yields a single arc. A node's degree is its number of arcs, i.e.
the length of its incidence list, and is the degree the flooding rules see.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from heurflood.degree_model import DegreeModel

ODD_SUM_RETRIES = 1000


def child_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    """Seed for one unit of work, derived only from the master seed and key."""
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: np.ndarray = field(repr=False)
    # derived, filled in __post_init__
    indptr: np.ndarray = field(init=False, repr=False)
    arc_src: np.ndarray = field(init=False, repr=False)
    arc_dst: np.ndarray = field(init=False, repr=False)
    arc_edge: np.ndarray = field(init=False, repr=False)
    degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= self.n):
            raise ValueError("edge endpoint out of range")
        eid = np.arange(len(edges))
        loop = edges[:, 0] == edges[:, 1]
        src = np.concatenate([edges[:, 0], edges[~loop, 1]])
        dst = np.concatenate([edges[:, 1], edges[~loop, 0]])
        aid = np.concatenate([eid, eid[~loop]])
        order = np.argsort(src, kind="stable")
        degree = np.bincount(src, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(degree, out=indptr[1:])
        for name, arr in (("edges", edges), ("indptr", indptr),
                          ("arc_src", src[order]), ("arc_dst", dst[order]),
                          ("arc_edge", aid[order]), ("degree", degree)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def self_loops(self) -> int:
        return int(np.count_nonzero(self.edges[:, 0] == self.edges[:, 1]))

    def incidence(self, v: int) -> np.ndarray:
        """Identifiers of the edges incident to ``v`` (a self-loop appears once)."""
        return self.arc_edge[self.indptr[v]:self.indptr[v + 1]]

    def neighbors(self, v: int) -> np.ndarray:
        return self.arc_dst[self.indptr[v]:self.indptr[v + 1]]

    def adjacency(self, mask: np.ndarray | None = None) -> csr_matrix:
        """Directed arc matrix, optionally keeping only arcs where ``mask``."""
        if mask is None:
            indptr, indices = self.indptr, self.arc_dst
        else:
            kept = np.bincount(self.arc_src[mask], minlength=self.n)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(kept, out=indptr[1:])
            indices = self.arc_dst[mask]
        data = np.ones(len(indices))
        return csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def write_edgelist(self, path) -> None:
        lines = [f"# n={self.n}"] + [f"{u} {v}" for u, v in self.edges.tolist()]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def read_edgelist(cls, path) -> "Graph":
        n = None
        edges = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line[1:].strip().startswith("n="):
                    n = int(line[1:].strip()[2:])
                continue
            u, v = line.split()
            edges.append((int(u), int(v)))
        if n is None:
            raise ValueError(f"{path}: missing '# n=<n>' header")
        return cls(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


@dataclass(frozen=True)
class ComponentLabeling:
    labels: np.ndarray = field(repr=False)
    largest: int
    nodes: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def count(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def __contains__(self, v) -> bool:
        return 0 <= v < len(self.labels) and self.labels[v] == self.largest


def _decode_pairs(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # pair index k enumerates (u, v), u < v, row by row
    row_start = lambda u: u * (2 * n - u - 1) // 2  # noqa: E731
    u = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * k)) / 2).astype(np.int64)
    u = np.clip(u, 0, n - 2)
    # repair float rounding at row boundaries
    u -= row_start(u) > k
    u += row_start(u + 1) <= k
    v = k - row_start(u) + u + 1
    return u, v


def generate_er(n: int, z: float, rng) -> Graph:
    """G(n, p) with ``p = z / (n - 1)``: each pair joined independently.

    Draws the edge count from the binomial and then a uniform subset of
    pairs, which is the same distribution without an O(n^2) pass.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 0 < z <= n - 1:
        raise ValueError(f"mean degree must satisfy 0 < z <= n - 1, got {z}")
    rng = make_rng(rng)
    pairs = n * (n - 1) // 2
    m = rng.binomial(pairs, min(z / (n - 1), 1.0))
    k = np.sort(rng.choice(pairs, size=m, replace=False))
    u, v = _decode_pairs(k.astype(np.int64), n)
    return Graph(n, np.column_stack([u, v]))


def sample_degree_sequence(n: int, model: DegreeModel, rng) -> np.ndarray:
    rng = make_rng(rng)
    for _ in range(ODD_SUM_RETRIES):
        degrees = rng.choice(model.max_degree + 1, size=n, p=model.pmf)
        if degrees.sum() % 2 == 0:
            return degrees
    raise RuntimeError(f"no even degree sum after {ODD_SUM_RETRIES} resamples for {model.label()}")


def configuration_from_degrees(degrees, rng) -> Graph:
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.sum() % 2:
        raise ValueError("degree sum must be even")
    rng = make_rng(rng)
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    stubs = rng.permutation(stubs)
    return Graph(len(degrees), stubs.reshape(-1, 2))


def generate_configuration(n: int, model: DegreeModel, rng) -> Graph:
    """Configuration-model multigraph; self-loops and parallel edges are kept."""
    if model.mean <= 0:
        raise ValueError("degree model has no edges")
    rng = make_rng(rng)
    return configuration_from_degrees(sample_degree_sequence(n, model, rng), rng)


def generate(model: DegreeModel, n: int, rng) -> Graph:
    """Poisson models go through G(n, p), everything else through stub matching."""
    if model.kind == "poisson":
        return generate_er(n, model.param, rng)
    return generate_configuration(n, model, rng)


def largest_component(graph: Graph) -> ComponentLabeling:
    """Connected components; ties for the largest go to the lowest label."""
    if graph.n == 0:
        return ComponentLabeling(np.zeros(0, dtype=np.int64), -1, np.zeros(0, dtype=np.int64))
    _, labels = connected_components(graph.adjacency(), directed=False)
    sizes = np.bincount(labels)
    big = int(np.argmax(sizes))
    nodes = np.flatnonzero(labels == big)
    labels.setflags(write=False)
    nodes.setflags(write=False)
    return ComponentLabeling(labels, big, nodes)
