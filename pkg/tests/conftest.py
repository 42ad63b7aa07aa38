"""Shared helpers: hand-built networks and independent mini-oracles.

Oracles here deliberately avoid the library's own code paths (pure-python
distance scans, dict-based Dijkstra, closed-form delay) so tests cross-check
rather than echo the implementation.
"""

from __future__ import annotations

import heapq
import random

from aggsched.model import DutyCycle, Network, Params


def make_network(params: Params, positions, duty_cycles) -> Network:
    """Build a Network from explicit positions/duty cycles.

    Adjacency comes from a pure-python squared-distance scan, independent of
    the generator's numpy build.
    """
    n = params.node_count
    assert len(positions) == n and len(duty_cycles) == n
    limit = params.comm_range * params.comm_range
    neighbor_lists = [[] for _ in range(n)]
    for u in range(n):
        for v in range(u + 1, n):
            dx = positions[u][0] - positions[v][0]
            dy = positions[u][1] - positions[v][1]
            if dx * dx + dy * dy <= limit:
                neighbor_lists[u].append(v)
                neighbor_lists[v].append(u)
    net = Network(
        params=params,
        positions=tuple((float(x), float(y)) for x, y in positions),
        adjacency=tuple(tuple(sorted(nbrs)) for nbrs in neighbor_lists),
        duty_cycles=tuple(DutyCycle(dc) for dc in duty_cycles),
    )
    net.validate()
    return net


def line_network(duty_cycles, period: int, channel_count: int = 1, spacing: float = 10.0) -> Network:
    """Nodes on a line, each within range only of its immediate neighbors."""
    n = len(duty_cycles)
    params = Params(
        node_count=n,
        area_side=spacing * max(n, 2),
        comm_range=spacing,
        period_length=period,
        active_slot_count=len(duty_cycles[0]),
        channel_count=channel_count,
    )
    positions = [(spacing * i, 0.0) for i in range(n)]
    return make_network(params, positions, duty_cycles)


def closed_form_delay(tau_u: int, tau_v: int, period: int) -> int:
    return ((tau_v - tau_u - 1) % period) + 1


def pair_scan_min_delay(slots_u, slots_v, period: int) -> int:
    return min(closed_form_delay(a, b, period) for a in slots_u for b in slots_v)


def dijkstra_hops(adjacency, source: int) -> dict[int, int]:
    """Unit-weight Dijkstra over adjacency lists (heap-based, no BFS)."""
    dist: dict[int, int] = {source: 0}
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, 1 << 60):
            continue
        for v in adjacency[u]:
            if d + 1 < dist.get(v, 1 << 60):
                dist[v] = d + 1
                heapq.heappush(heap, (d + 1, v))
    return dist


def random_duty_cycles(rng: random.Random, n: int, period: int, alpha: int):
    return [rng.sample(range(period), alpha) for _ in range(n)]
