"""Core domain types for duty-cycled sensor networks and the sleep-delay metrics.

Everything here is immutable after construction and safe to share across
workers; the two metric operations are pure functions.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

#: Node index reserved for the sink.
SINK = 0


@dataclass(frozen=True)
class Params:
    """Parameters describing one network instance.

    ``interference_range`` defaults to ``comm_range`` when omitted; it must
    never be smaller than ``comm_range``. A node is awake to receive during
    ``active_slot_count`` of the ``period_length`` slots of each working
    period (duty cycle = active_slot_count / period_length).
    """

    node_count: int
    area_side: float = 100.0
    comm_range: float = 20.0
    interference_range: float | None = None
    period_length: int = 20
    active_slot_count: int = 2
    channel_count: int = 3
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.interference_range is None:
            object.__setattr__(self, "interference_range", float(self.comm_range))
        # lengths are stored as floats so serialized params are canonical
        object.__setattr__(self, "area_side", float(self.area_side))
        object.__setattr__(self, "comm_range", float(self.comm_range))
        object.__setattr__(self, "interference_range", float(self.interference_range))
        if self.node_count < 1:
            raise ValueError(f"node_count must be positive, got {self.node_count}")
        if self.area_side <= 0:
            raise ValueError(f"area_side must be positive, got {self.area_side}")
        if self.comm_range <= 0:
            raise ValueError(f"comm_range must be positive, got {self.comm_range}")
        if self.interference_range < self.comm_range:
            raise ValueError(
                f"interference_range {self.interference_range} must be >= "
                f"comm_range {self.comm_range}"
            )
        if self.period_length < 1:
            raise ValueError(f"period_length must be positive, got {self.period_length}")
        if not 1 <= self.active_slot_count <= self.period_length:
            raise ValueError(
                f"active_slot_count {self.active_slot_count} must be in "
                f"[1, {self.period_length}]"
            )
        if self.channel_count < 1:
            raise ValueError(f"channel_count must be >= 1, got {self.channel_count}")


@dataclass(frozen=True)
class DutyCycle:
    """Periodic wake pattern: slot indices (within one period) where a node listens.

    Senders wake on demand, so only receivers are constrained by this set.
    """

    active_slots: frozenset[int]

    def __init__(self, active_slots: Iterable[int]) -> None:
        object.__setattr__(self, "active_slots", frozenset(active_slots))
        if not self.active_slots:
            raise ValueError("duty cycle must contain at least one active slot")
        if any(s < 0 for s in self.active_slots):
            raise ValueError(f"negative slot index in {sorted(self.active_slots)}")

    def sorted_slots(self) -> tuple[int, ...]:
        return tuple(sorted(self.active_slots))


@dataclass(frozen=True)
class Network:
    """Connected geometric sensor network with per-node duty cycles.

    ``adjacency[u]`` is the sorted tuple of neighbors of ``u`` (nodes within
    communication range). Node 0 is the sink.
    """

    params: Params
    positions: tuple[tuple[float, float], ...]
    adjacency: tuple[tuple[int, ...], ...]
    duty_cycles: tuple[DutyCycle, ...]

    @property
    def node_count(self) -> int:
        return self.params.node_count

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency[u]

    def distance(self, u: int, v: int) -> float:
        return math.dist(self.positions[u], self.positions[v])

    def validate(self) -> None:
        """Check structural invariants, raising ValueError on the first failure."""
        n = self.params.node_count
        if not (len(self.positions) == len(self.adjacency) == len(self.duty_cycles) == n):
            raise ValueError("positions/adjacency/duty_cycles lengths must equal node_count")
        neighbor_sets = [set(nbrs) for nbrs in self.adjacency]
        for u, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"adjacency of node {u} is not strictly sorted")
            if u in neighbor_sets[u]:
                raise ValueError(f"self-loop at node {u}")
            for v in nbrs:
                if not 0 <= v < n:
                    raise ValueError(f"neighbor {v} of node {u} out of range")
                if u not in neighbor_sets[v]:
                    raise ValueError(f"asymmetric edge ({u}, {v})")
        hops = bfs_hop_counts(self.adjacency, SINK)
        if any(h < 0 for h in hops):
            unreachable = [u for u, h in enumerate(hops) if h < 0]
            raise ValueError(f"network is disconnected; unreachable from sink: {unreachable}")
        t = self.params.period_length
        alpha = self.params.active_slot_count
        for u, dc in enumerate(self.duty_cycles):
            if len(dc.active_slots) != alpha:
                raise ValueError(
                    f"node {u} has {len(dc.active_slots)} active slots, expected {alpha}"
                )
            if any(s >= t for s in dc.active_slots):
                raise ValueError(f"node {u} has active slot >= period_length {t}")


def sleep_delay(tau_u: int, tau_v: int, period: int) -> int:
    """Slots a sender waking at ``tau_u`` waits until its receiver wakes at ``tau_v``.

    Returns ``tau_v - tau_u`` when the receiver wakes later in the same
    period, otherwise ``tau_v + period - tau_u`` (wrap into the next
    period; equal slots wrap to a full period). The result is always in
    [1, period].
    """
    if period < 1:
        raise ValueError(f"period must be positive, got {period}")
    if not 0 <= tau_u < period:
        raise ValueError(f"tau_u {tau_u} outside [0, {period})")
    if not 0 <= tau_v < period:
        raise ValueError(f"tau_v {tau_v} outside [0, {period})")
    if tau_v > tau_u:
        return tau_v - tau_u
    return tau_v + period - tau_u


def min_sleep_delay(sender: DutyCycle, receiver: DutyCycle, period: int) -> int:
    """Smallest sleep delay over all pairs of sender/receiver active slots."""
    if not sender.active_slots or not receiver.active_slots:
        raise ValueError("duty cycles must be non-empty")
    return min(
        sleep_delay(a, b, period)
        for a in sender.active_slots
        for b in receiver.active_slots
    )


def bfs_hop_counts(adjacency: Sequence[Sequence[int]], source: int) -> list[int]:
    """Hop distance from ``source`` to every node; -1 for unreachable nodes."""
    hops = [-1] * len(adjacency)
    hops[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if hops[v] < 0:
                hops[v] = hops[u] + 1
                queue.append(v)
    return hops
