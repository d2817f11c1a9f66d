"""Static interaction graphs: toroidal grids and G(n, m) random graphs."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

import numpy as np


class Neighborhood(enum.Enum):
    FOUR = 4
    EIGHT = 8


_OFFSETS_FOUR = ((-1, 0), (1, 0), (0, -1), (0, 1))
_OFFSETS_EIGHT = _OFFSETS_FOUR + ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph as per-node sorted neighbor lists."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    label: str = field(default="graph", compare=False)

    def __post_init__(self) -> None:
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency length must equal node count")
        for u, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"node {u}: neighbors must be sorted and unique")
            for v in nbrs:
                if v == u:
                    raise ValueError(f"node {u}: self-loop")
                if not 0 <= v < self.n:
                    raise ValueError(f"node {u}: neighbor {v} out of range")
                if u not in self.adjacency[v]:
                    raise ValueError(f"edge {u}-{v} not symmetric")

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=int)

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def write_edge_list(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for u, v in self.edges():
                fh.write(f"{u},{v}\n")


def _from_edge_set(n: int, edges: set[tuple[int, int]], label: str) -> Graph:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return Graph(n, tuple(tuple(sorted(a)) for a in adj), label)


def grid(rows: int, cols: int, neighborhood: Neighborhood, wrap: bool) -> Graph:
    """Rectangular lattice; node (r, c) gets index r * cols + c.

    FOUR connects the cardinal offsets, EIGHT adds the diagonals, and
    wrapping applies toroidal modular arithmetic to both axes.
    """
    if rows < 3 or cols < 3:
        raise ValueError("grid needs rows >= 3 and cols >= 3")
    offsets = _OFFSETS_FOUR if neighborhood is Neighborhood.FOUR else _OFFSETS_EIGHT
    edges: set[tuple[int, int]] = set()
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            for dr, dc in offsets:
                rr, cc = r + dr, c + dc
                if wrap:
                    rr, cc = rr % rows, cc % cols
                elif not (0 <= rr < rows and 0 <= cc < cols):
                    continue
                v = rr * cols + cc
                if u != v:
                    edges.add((min(u, v), max(u, v)))
    label = f"grid{neighborhood.value}_{'torus' if wrap else 'plane'}_{rows}x{cols}"
    return _from_edge_set(rows * cols, edges, label)


def erdos_renyi(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Uniform draw from all graphs with n nodes and exactly m edges.

    Distinct edges are sampled by rejecting duplicates, so the result is an
    exact G(n, m) sample and identical for identical generator states.
    """
    max_edges = n * (n - 1) // 2
    if not 0 <= m <= max_edges:
        raise ValueError(f"edge count {m} outside [0, {max_edges}]")
    edges: set[tuple[int, int]] = set()
    while len(edges) < m:
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u == v:
            continue
        edges.add((min(u, v), max(u, v)))
    return _from_edge_set(n, edges, f"er_{n}_{m}")


def degree_stats(g: Graph) -> tuple[int, int, float, int]:
    """(min degree, max degree, mean degree, isolated-node count)."""
    deg = g.degrees
    if g.n == 0:
        return (0, 0, 0.0, 0)
    return (int(deg.min()), int(deg.max()), float(deg.mean()), int((deg == 0).sum()))


_GRID_RE = re.compile(r"^grid(4|8)_(torus|plane)_(\d+)x(\d+)$")
_ER_RE = re.compile(r"^er\((\d+),(\d+)\)$")


@dataclass(frozen=True)
class NetworkSpec:
    """Parsed network description; ``build`` realizes it, drawing from the
    supplied generator for random families so each simulation can resample."""

    text: str

    def __post_init__(self) -> None:
        if not (_GRID_RE.match(self.text) or _ER_RE.match(self.text.replace(" ", ""))):
            raise ValueError(
                f"unknown network spec {self.text!r}; expected grid8_torus_13x13-style "
                "or er(n,m)"
            )

    @property
    def label(self) -> str:
        """File-safe name."""
        return self.text.replace("(", "_").replace(",", "_").replace(")", "").replace(" ", "")

    def build(self, rng: np.random.Generator) -> Graph:
        m = _GRID_RE.match(self.text)
        if m:
            nbhd = Neighborhood.FOUR if m.group(1) == "4" else Neighborhood.EIGHT
            return grid(int(m.group(3)), int(m.group(4)), nbhd, wrap=m.group(2) == "torus")
        m = _ER_RE.match(self.text.replace(" ", ""))
        return erdos_renyi(int(m.group(1)), int(m.group(2)), rng)


#: The three network families of the standard experiment grid: an 8-neighbor
#: torus and two G(n, m) draws whose edge counts put the average degree at
#: 5.14 and 8.48 on 169 nodes.
GRID_TORUS_13 = NetworkSpec("grid8_torus_13x13")
ER5 = NetworkSpec("er(169,434)")
ER8 = NetworkSpec("er(169,717)")
