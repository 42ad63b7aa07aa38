"""Network layering and aggregation-tree construction.

Two builders share the same skeleton: every node picks a parent among its
neighbors one layer closer to the sink. The sleep-delay builder minimizes the
minimal sleep delay to the candidate parent; the shortest-path builder just
takes the smallest node id (unit-weight shortest-path tree). Ties always break
to the smallest node id, which makes both builders fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import SINK, Network, bfs_hop_counts, min_sleep_delay


@dataclass(frozen=True)
class Layering:
    """Partition of nodes by hop distance to the sink."""

    layer_of: tuple[int, ...]
    layers: tuple[tuple[int, ...], ...]

    @property
    def depth(self) -> int:
        """Index of the deepest layer."""
        return len(self.layers) - 1


@dataclass(frozen=True)
class AggregationTree:
    """Spanning tree rooted at the sink; parent[SINK] is None."""

    parent: tuple[int | None, ...]
    children: tuple[tuple[int, ...], ...]
    root: int = SINK

    @classmethod
    def from_parents(cls, parents: Sequence[int | None]) -> "AggregationTree":
        n = len(parents)
        if parents[SINK] is not None:
            raise ValueError("sink must not have a parent")
        child_lists: list[list[int]] = [[] for _ in range(n)]
        for u, p in enumerate(parents):
            if u == SINK:
                continue
            if p is None or not 0 <= p < n or p == u:
                raise ValueError(f"invalid parent {p} for node {u}")
            child_lists[p].append(u)
        tree = cls(
            parent=tuple(parents),
            children=tuple(tuple(sorted(c)) for c in child_lists),
        )
        tree.depths()  # rejects parent cycles
        return tree

    def depths(self) -> tuple[int, ...]:
        """Hop count to the root along parent pointers, for every node."""
        n = len(self.parent)
        depth = [-1] * n
        depth[self.root] = 0
        for u in range(n):
            if depth[u] >= 0:
                continue
            chain = []
            v = u
            while depth[v] < 0:
                chain.append(v)
                p = self.parent[v]
                if p is None or len(chain) > n:
                    raise ValueError(f"parent chain from node {u} never reaches the root")
                v = p
            base = depth[v]
            for k, w in enumerate(reversed(chain), start=1):
                depth[w] = base + k
        return tuple(depth)


def compute_layers(net: Network) -> Layering:
    """BFS hop distances from the sink; layers partition the node set."""
    hops = bfs_hop_counts(net.adjacency, SINK)
    if any(h < 0 for h in hops):
        raise ValueError("cannot layer a disconnected network")
    layers: list[list[int]] = [[] for _ in range(max(hops) + 1)]
    for u, h in enumerate(hops):
        layers[h].append(u)
    return Layering(layer_of=tuple(hops), layers=tuple(tuple(l) for l in layers))


def build_ddas_tree(net: Network, layering: Layering) -> AggregationTree:
    """Minimal-sleep-delay tree.

    Layers are processed from 1 outward, nodes within a layer in ascending
    id; each node adopts the upper-layer neighbor minimizing the minimal
    sleep delay from its own active slots to the candidate's, ties to the
    smallest id. The processing order does not affect the result (parents
    come only from the layer above) but is fixed for reproducible traces.
    """
    period = net.params.period_length
    parents: list[int | None] = [None] * net.node_count
    for i in range(1, layering.depth + 1):
        for u in layering.layers[i]:
            best = None
            best_delay = period + 1
            for v in net.adjacency[u]:
                if layering.layer_of[v] != i - 1:
                    continue
                d = min_sleep_delay(net.duty_cycles[u], net.duty_cycles[v], period)
                if d < best_delay:
                    best, best_delay = v, d
            parents[u] = best
    return AggregationTree.from_parents(parents)


def build_spt_tree(net: Network, layering: Layering) -> AggregationTree:
    """Unit-weight shortest-path tree: smallest-id neighbor in the layer above.

    Deliberately ignores duty cycles; serves as the structural baseline.
    """
    parents: list[int | None] = [None] * net.node_count
    for i in range(1, layering.depth + 1):
        for u in layering.layers[i]:
            for v in net.adjacency[u]:  # adjacency is sorted ascending
                if layering.layer_of[v] == i - 1:
                    parents[u] = v
                    break
    return AggregationTree.from_parents(parents)


def dump_tree(tree: AggregationTree, layering: Layering) -> str:
    """One line per non-sink node: ``u parent(u) layer(u)``."""
    lines = []
    for u, p in enumerate(tree.parent):
        if u == tree.root:
            continue
        lines.append(f"{u} {p} {layering.layer_of[u]}")
    return "\n".join(lines) + "\n"


def load_tree(text: str, node_count: int) -> AggregationTree:
    """Parse a tree dump; layer column is checked against parent depths."""
    parents: list[int | None] = [None] * node_count
    claimed_layer: dict[int, int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(f"tree line needs 3 fields: {line!r}")
        u, p, layer = (int(x) for x in fields)
        if u == SINK:
            raise ValueError("sink must not appear as a child in a tree dump")
        if not 0 <= u < node_count:
            raise ValueError(f"node {u} out of range")
        if parents[u] is not None:
            raise ValueError(f"duplicate parent line for node {u}")
        parents[u] = p
        claimed_layer[u] = layer
    missing = [u for u in range(node_count) if u != SINK and parents[u] is None]
    if missing:
        raise ValueError(f"tree dump is missing nodes: {missing}")
    tree = AggregationTree.from_parents(parents)
    depths = tree.depths()
    for u, layer in claimed_layer.items():
        if depths[u] != layer:
            raise ValueError(f"node {u}: dump claims layer {layer}, parents give {depths[u]}")
    return tree
