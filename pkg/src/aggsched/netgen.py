"""Seeded generation of connected geometric sensor networks, plus the topology
text format used for interchange between CLI subcommands.

Reproducibility contract (identical across any implementation of this tool):

* RNG: splitmix64. ``random()`` is ``next_u64() >> 11`` times 2**-53;
  ``randrange(n)`` is ``next_u64() % n``.
* Draw order per generation attempt: for each node in id order, x then y
  (uniform in [0, area_side)). If the resulting disk graph is disconnected,
  all positions are redrawn from the continuing stream (up to 200 attempts).
  Only after a connected draw, per node in id order, active slots are chosen
  by a partial Fisher-Yates shuffle of [0, period): for i in [0, alpha),
  swap position i with position i + randrange(period - i).
* Adjacency predicate: (dx*dx + dy*dy) <= comm_range**2 in IEEE doubles.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .model import SINK, DutyCycle, Network, Params, bfs_hop_counts

_MASK64 = (1 << 64) - 1

#: Consecutive position redraws allowed before generation fails.
MAX_PLACEMENT_ATTEMPTS = 200


class GenerationError(RuntimeError):
    """Raised when no connected placement is found (density too low)."""


class SplitMix64:
    """splitmix64 sequence generator over a 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n < 1:
            raise ValueError(f"randrange needs n >= 1, got {n}")
        return self.next_u64() % n


def _mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(*components: int) -> int:
    """Fold integer components into one 64-bit seed (order-sensitive)."""
    acc = 0
    for c in components:
        acc = _mix64(acc ^ _mix64(c & _MASK64))
    return acc


def field_tag(name: str) -> int:
    """Stable integer tag for a field name, for use in derive_seed."""
    return zlib.crc32(name.encode("ascii"))


def generate_network(params: Params) -> Network:
    """Generate a connected network: uniform positions in the deployment
    square, disk-graph adjacency, and a random duty cycle per node (sink
    included). Fully deterministic given ``params.rng_seed``.

    Raises GenerationError when MAX_PLACEMENT_ATTEMPTS consecutive draws all
    come out disconnected.
    """
    if params.node_count < 2:
        raise ValueError(f"need at least 2 nodes, got {params.node_count}")
    rng = SplitMix64(params.rng_seed)
    side = params.area_side
    n = params.node_count

    positions: tuple[tuple[float, float], ...] | None = None
    adjacency: tuple[tuple[int, ...], ...] | None = None
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        drawn = tuple((side * rng.random(), side * rng.random()) for _ in range(n))
        adj = disk_adjacency(drawn, params.comm_range)
        if all(h >= 0 for h in bfs_hop_counts(adj, SINK)):
            positions, adjacency = drawn, adj
            break
    if positions is None or adjacency is None:
        raise GenerationError(
            f"no connected placement in {MAX_PLACEMENT_ATTEMPTS} attempts for {params}"
        )

    duty_cycles = tuple(
        _draw_duty_cycle(rng, params.period_length, params.active_slot_count)
        for _ in range(n)
    )
    return Network(params=params, positions=positions, adjacency=adjacency, duty_cycles=duty_cycles)


def disk_adjacency(
    positions: tuple[tuple[float, float], ...], comm_range: float
) -> tuple[tuple[int, ...], ...]:
    """Sorted neighbor lists under squared-distance <= comm_range**2."""
    pts = np.asarray(positions, dtype=float)
    deltas = pts[:, None, :] - pts[None, :, :]
    sq = (deltas * deltas).sum(axis=2)
    within = sq <= comm_range * comm_range
    np.fill_diagonal(within, False)
    return tuple(tuple(np.flatnonzero(row).tolist()) for row in within)


def _draw_duty_cycle(rng: SplitMix64, period: int, alpha: int) -> DutyCycle:
    slots = list(range(period))
    for i in range(alpha):
        j = i + rng.randrange(period - i)
        slots[i], slots[j] = slots[j], slots[i]
    return DutyCycle(slots[:alpha])


@dataclass(frozen=True)
class NetworkStats:
    node_count: int
    edge_count: int
    max_degree: int
    sink_eccentricity: int


def network_stats(net: Network) -> NetworkStats:
    """Exact combinatorial counts of a network."""
    degrees = [len(nbrs) for nbrs in net.adjacency]
    hops = bfs_hop_counts(net.adjacency, SINK)
    return NetworkStats(
        node_count=net.node_count,
        edge_count=sum(degrees) // 2,
        max_degree=max(degrees),
        sink_eccentricity=max(hops),
    )


def dump_topology(net: Network) -> str:
    """Serialize to the line-oriented interchange format.

    Header ``N T alpha m d dI area seed``, then one line per node
    ``id x y slot1,slot2,...``, then one line per undirected edge ``u v``
    (u < v). Floats are written with repr so they round-trip exactly.
    """
    p = net.params
    lines = [
        f"{p.node_count} {p.period_length} {p.active_slot_count} {p.channel_count} "
        f"{p.comm_range!r} {p.interference_range!r} {p.area_side!r} {p.rng_seed}"
    ]
    for u in range(p.node_count):
        x, y = net.positions[u]
        slots = ",".join(str(s) for s in net.duty_cycles[u].sorted_slots())
        lines.append(f"{u} {x!r} {y!r} {slots}")
    for u in range(p.node_count):
        for v in net.adjacency[u]:
            if u < v:
                lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def load_topology(text: str) -> Network:
    """Parse the interchange format back into a validated Network."""
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise ValueError("empty topology file")
    header = lines[0].split()
    if len(header) != 8:
        raise ValueError(f"topology header needs 8 fields, got {len(header)}")
    n, period, alpha, channels = (int(x) for x in header[:4])
    comm_range, interference_range, area = (float(x) for x in header[4:7])
    seed = int(header[7])
    params = Params(
        node_count=n,
        area_side=area,
        comm_range=comm_range,
        interference_range=interference_range,
        period_length=period,
        active_slot_count=alpha,
        channel_count=channels,
        rng_seed=seed,
    )
    if len(lines) < 1 + n:
        raise ValueError(f"expected {n} node lines, found {len(lines) - 1}")

    positions: list[tuple[float, float]] = []
    duty_cycles: list[DutyCycle] = []
    for idx, line in enumerate(lines[1 : 1 + n]):
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"node line {idx} needs 4 fields: {line!r}")
        if int(fields[0]) != idx:
            raise ValueError(f"node lines must be in id order; got id {fields[0]} at row {idx}")
        positions.append((float(fields[1]), float(fields[2])))
        duty_cycles.append(DutyCycle(int(s) for s in fields[3].split(",")))

    neighbor_lists: list[list[int]] = [[] for _ in range(n)]
    for line in lines[1 + n :]:
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"edge line needs 2 fields: {line!r}")
        u, v = int(fields[0]), int(fields[1])
        neighbor_lists[u].append(v)
        neighbor_lists[v].append(u)
    adjacency = tuple(tuple(sorted(nbrs)) for nbrs in neighbor_lists)

    net = Network(
        params=params,
        positions=tuple(positions),
        adjacency=adjacency,
        duty_cycles=tuple(duty_cycles),
    )
    net.validate()
    return net
