"""Round-based, interference-free, duty-cycle-respecting multichannel slot
assignment over an aggregation tree, plus an independent schedule verifier and
a small-instance exhaustive optimum for cross-checking the greedy.

Transmission rules enforced throughout (the verifier re-checks all of them
from scratch, sharing no code with the scheduler):

* every non-sink node transmits exactly once, to its tree parent;
* the receiver must be awake: slot mod period is one of its active slots
  (senders wake on demand and are unconstrained);
* a node transmits only after all of its children have transmitted;
* half-duplex: no node both sends and receives in one slot;
* single radio: a node receives at most one transmission per slot, on any
  channel;
* protocol interference: two same-slot same-channel transmissions u->v and
  w->x are only allowed when dist(w, v) and dist(u, x) both exceed the
  interference range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .model import SINK, Network
from .tree import AggregationTree


class CandidatePolicy(Enum):
    """Which childless nodes a scheduling round may pick from."""

    ALL_LEAVES = "all-leaves"
    DEEPEST_LAYER_ONLY = "layered"


@dataclass(frozen=True)
class Transmission:
    sender: int
    receiver: int
    slot: int
    channel: int


@dataclass(frozen=True)
class Schedule:
    """One transmission per non-sink node; no invariants are enforced here so
    that the verifier can be fed arbitrary (possibly malformed) schedules."""

    transmissions: tuple[Transmission, ...]
    round_sizes: tuple[int, ...] | None = None

    @property
    def delay(self) -> int:
        return aggregation_delay(self)


@dataclass(frozen=True)
class Violation:
    rule: str
    slot: int | None
    nodes: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        at = f" slot {self.slot}" if self.slot is not None else ""
        return f"{self.rule}{at} nodes {','.join(str(n) for n in self.nodes)}: {self.detail}"


def aggregation_delay(sched: Schedule) -> int:
    """1 + the last occupied slot (slots are counted from 0)."""
    if not sched.transmissions:
        raise ValueError("empty schedule has no delay")
    return 1 + max(tx.slot for tx in sched.transmissions)


def schedule(net: Network, tree: AggregationTree, policy: CandidatePolicy) -> Schedule:
    """Greedy round-based schedule of the whole tree.

    Rounds: while unscheduled non-sink nodes remain, take the childless ones
    (restricted to the deepest remaining layer under DEEPEST_LAYER_ONLY),
    assign a slot and channel to every one of them, prune them from the tree,
    and start the next round strictly after the last slot used, so rounds
    occupy disjoint slot ranges and a parent never transmits in the round it
    receives.

    Within a round, slots are swept upward from the round's start. At slot t
    the candidates whose parent is awake at t mod period are tried in
    (depth descending, id ascending) order; each takes the first channel that
    keeps slot t conflict-free, or waits for a later slot.

    Termination: a candidate whose parent is awake at an otherwise empty slot
    is always accepted, and each candidate's parent is awake at least once
    per period, so every sweep assigns at least one candidate per period;
    a round therefore finishes within len(candidates) * period slots.
    """
    n = net.node_count
    if len(tree.parent) != n:
        raise ValueError("tree size does not match network")
    period = net.params.period_length
    channels = net.params.channel_count
    reach = net.params.interference_range
    positions = net.positions
    depths = tree.depths()

    pending_children = [len(c) for c in tree.children]
    unscheduled = [True] * n
    unscheduled[SINK] = False
    remaining = n - 1
    assigned: dict[int, Transmission] = {}
    round_sizes: list[int] = []
    t_start = 0

    while remaining:
        leaves = [u for u in range(1, n) if unscheduled[u] and pending_children[u] == 0]
        if policy is CandidatePolicy.DEEPEST_LAYER_ONLY:
            deepest = max(depths[u] for u in range(1, n) if unscheduled[u])
            leaves = [u for u in leaves if depths[u] == deepest]
        leaves.sort(key=lambda u: (-depths[u], u))

        # per wake-residue candidate lists, preserving the candidate order
        buckets: dict[int, list[int]] = {}
        for u in leaves:
            for r in net.duty_cycles[tree.parent[u]].active_slots:
                buckets.setdefault(r, []).append(u)

        pending = set(leaves)
        t = t_start
        last_assigned = t_start - 1
        while pending:
            bucket = buckets.get(t % period)
            if bucket:
                slot_txs: list[tuple[int, int, int]] = []  # (sender, receiver, channel)
                senders_here: set[int] = set()
                receivers_here: set[int] = set()
                for u in bucket:
                    if u not in pending:
                        continue
                    parent = tree.parent[u]
                    if parent in receivers_here:  # single radio at the receiver
                        continue
                    if parent in senders_here or u in receivers_here:  # half-duplex
                        continue
                    chosen = None
                    for ch in range(channels):
                        ok = True
                        for w, x, ch2 in slot_txs:
                            if ch2 != ch:
                                continue
                            if (
                                math.dist(positions[w], positions[parent]) <= reach
                                or math.dist(positions[u], positions[x]) <= reach
                            ):
                                ok = False
                                break
                        if ok:
                            chosen = ch
                            break
                    if chosen is None:
                        continue
                    assigned[u] = Transmission(sender=u, receiver=parent, slot=t, channel=chosen)
                    slot_txs.append((u, parent, chosen))
                    senders_here.add(u)
                    receivers_here.add(parent)
                    pending.discard(u)
                    last_assigned = t
            t += 1

        for u in leaves:
            unscheduled[u] = False
            pending_children[tree.parent[u]] -= 1
        remaining -= len(leaves)
        round_sizes.append(len(leaves))
        t_start = last_assigned + 1

    txs = tuple(sorted(assigned.values(), key=lambda tx: (tx.slot, tx.channel, tx.sender)))
    return Schedule(transmissions=txs, round_sizes=tuple(round_sizes))


def verify_schedule(net: Network, tree: AggregationTree, sched: Schedule) -> list[Violation]:
    """Check a schedule against every transmission rule, from scratch.

    Accepts arbitrary schedules; malformed input produces violations, never
    exceptions. An empty list means the schedule is valid.
    """
    violations: list[Violation] = []
    n = net.node_count
    period = net.params.period_length
    channels = net.params.channel_count
    reach = net.params.interference_range
    positions = net.positions

    sane: list[Transmission] = []
    for tx in sched.transmissions:
        if not (0 <= tx.sender < n and 0 <= tx.receiver < n):
            violations.append(
                Violation("malformed", None, (tx.sender, tx.receiver), "node id out of range")
            )
            continue
        if tx.slot < 0:
            violations.append(Violation("malformed", tx.slot, (tx.sender,), "negative slot"))
            continue
        if not 0 <= tx.channel < channels:
            violations.append(
                Violation(
                    "malformed", tx.slot, (tx.sender,), f"channel {tx.channel} outside [0, {channels})"
                )
            )
            continue
        sane.append(tx)

    # exactly one transmission per non-sink node, none for the sink
    tx_count = [0] * n
    for tx in sane:
        tx_count[tx.sender] += 1
    for u in range(n):
        if u == SINK:
            if tx_count[u]:
                violations.append(
                    Violation("sink-transmits", None, (u,), "the sink must not transmit")
                )
        elif tx_count[u] == 0:
            violations.append(
                Violation("missing-transmission", None, (u,), "node never transmits")
            )
        elif tx_count[u] > 1:
            violations.append(
                Violation(
                    "duplicate-transmission", None, (u,), f"node transmits {tx_count[u]} times"
                )
            )

    slot_of: dict[int, int] = {}
    for tx in sane:
        if tx.sender == SINK:
            continue
        if tx.receiver != tree.parent[tx.sender]:
            violations.append(
                Violation(
                    "wrong-receiver",
                    tx.slot,
                    (tx.sender, tx.receiver),
                    f"receiver must be tree parent {tree.parent[tx.sender]}",
                )
            )
        if tx.slot % period not in net.duty_cycles[tx.receiver].active_slots:
            violations.append(
                Violation(
                    "receiver-asleep",
                    tx.slot,
                    (tx.sender, tx.receiver),
                    f"receiver {tx.receiver} is not active at slot {tx.slot} "
                    f"(residue {tx.slot % period})",
                )
            )
        if tx_count[tx.sender] == 1:
            slot_of[tx.sender] = tx.slot

    # a node sends strictly after all of its children sent
    for u, s_u in slot_of.items():
        for c in tree.children[u]:
            s_c = slot_of.get(c)
            if s_c is not None and s_u <= s_c:
                violations.append(
                    Violation(
                        "precedence",
                        s_u,
                        (u, c),
                        f"node {u} sends at {s_u} but its child {c} sends at {s_c}",
                    )
                )

    by_slot: dict[int, list[Transmission]] = {}
    for tx in sane:
        by_slot.setdefault(tx.slot, []).append(tx)
    for slot, txs in sorted(by_slot.items()):
        senders = {tx.sender for tx in txs}
        recv_count: dict[int, int] = {}
        for tx in txs:
            recv_count[tx.receiver] = recv_count.get(tx.receiver, 0) + 1
        for node in sorted(senders & set(recv_count)):
            violations.append(
                Violation(
                    "half-duplex", slot, (node,), "node both sends and receives in this slot"
                )
            )
        for node, k in sorted(recv_count.items()):
            if k > 1:
                violations.append(
                    Violation(
                        "receiver-collision",
                        slot,
                        (node,),
                        f"node receives {k} transmissions in one slot",
                    )
                )
        for i in range(len(txs)):
            for j in range(i + 1, len(txs)):
                a, b = txs[i], txs[j]
                if a.channel != b.channel:
                    continue
                if math.dist(positions[b.sender], positions[a.receiver]) <= reach:
                    violations.append(
                        Violation(
                            "interference",
                            slot,
                            (b.sender, a.receiver),
                            f"sender {b.sender} is within interference range of "
                            f"receiver {a.receiver} on channel {a.channel}",
                        )
                    )
                if math.dist(positions[a.sender], positions[b.receiver]) <= reach:
                    violations.append(
                        Violation(
                            "interference",
                            slot,
                            (a.sender, b.receiver),
                            f"sender {a.sender} is within interference range of "
                            f"receiver {b.receiver} on channel {a.channel}",
                        )
                    )
    return violations


#: Tractability bounds for the exhaustive search.
ORACLE_MAX_NODES = 8
ORACLE_MAX_PERIOD = 6
ORACLE_MAX_CHANNELS = 2


def brute_force_optimal(
    net: Network, tree: AggregationTree, horizon: int
) -> Schedule | None:
    """Minimum-delay schedule by branch-and-bound over slot/channel choices,
    or None when no complete schedule fits in slots [0, horizon).

    Only meant for tiny instances; bounds are enforced (node_count <= 8,
    period <= 6, channels <= 2, horizon <= 3 * period). Channel relabeling
    symmetry is broken by never letting a transmission open channel k + 1
    before some earlier-ordered transmission uses channel k.
    """
    params = net.params
    if net.node_count > ORACLE_MAX_NODES:
        raise ValueError(f"oracle supports at most {ORACLE_MAX_NODES} nodes")
    if params.period_length > ORACLE_MAX_PERIOD:
        raise ValueError(f"oracle supports period <= {ORACLE_MAX_PERIOD}")
    if params.channel_count > ORACLE_MAX_CHANNELS:
        raise ValueError(f"oracle supports at most {ORACLE_MAX_CHANNELS} channels")
    if not 1 <= horizon <= 3 * params.period_length:
        raise ValueError(f"horizon must be in [1, {3 * params.period_length}]")

    n = net.node_count
    period = params.period_length
    channels = params.channel_count
    reach = params.interference_range
    positions = net.positions
    depths = tree.depths()
    order = sorted(range(1, n), key=lambda u: (-depths[u], u))  # children first

    height = [0] * n
    for u in order:  # deepest first, so children are final before parents
        for c in tree.children[u]:
            height[u] = max(height[u], height[c] + 1)

    slot_options: list[list[int]] = [[] for _ in range(n)]
    for u in order:
        awake = net.duty_cycles[tree.parent[u]].active_slots
        slot_options[u] = [t for t in range(height[u], horizon) if t % period in awake]
        if not slot_options[u]:
            return None

    floor_delay = [0] * (len(order) + 1)  # best possible delay over order[i:]
    for i in range(len(order) - 1, -1, -1):
        floor_delay[i] = max(floor_delay[i + 1], 1 + slot_options[order[i]][0])

    best_txs: list[tuple[int, int, int, int]] | None = None
    best_delay = horizon + 1
    chosen: list[tuple[int, int, int, int]] = []  # (sender, receiver, slot, channel)
    slot_of: dict[int, int] = {}

    def conflict(u: int, parent: int, t: int, ch: int) -> bool:
        for w, x, s, c in chosen:
            if s != t:
                continue
            if x == parent:  # single radio at the receiver
                return True
            if c == ch and (
                math.dist(positions[w], positions[parent]) <= reach
                or math.dist(positions[u], positions[x]) <= reach
            ):
                return True
        return False

    def search(idx: int, makespan: int, channels_open: int) -> None:
        nonlocal best_txs, best_delay
        if max(makespan, floor_delay[idx]) >= best_delay:
            return
        if idx == len(order):
            best_txs = list(chosen)
            best_delay = makespan
            return
        u = order[idx]
        parent = tree.parent[u]
        min_slot = 0
        for c in tree.children[u]:
            min_slot = max(min_slot, slot_of[c] + 1)
        for t in slot_options[u]:
            if t < min_slot:
                continue
            if max(makespan, t + 1) >= best_delay:
                break  # slots ascend, nothing later can help
            for ch in range(min(channels, channels_open + 1)):
                if conflict(u, parent, t, ch):
                    continue
                chosen.append((u, parent, t, ch))
                slot_of[u] = t
                search(idx + 1, max(makespan, t + 1), max(channels_open, ch + 1))
                del slot_of[u]
                chosen.pop()
                if best_delay <= floor_delay[0]:
                    return  # provably optimal already

    search(0, 0, 0)
    if best_txs is None:
        return None
    txs = tuple(
        Transmission(sender=s, receiver=r, slot=t, channel=c)
        for s, r, t, c in sorted(best_txs, key=lambda e: (e[2], e[3], e[0]))
    )
    return Schedule(transmissions=txs)


def dump_schedule(sched: Schedule) -> str:
    """One line per transmission: ``sender receiver slot channel``."""
    lines = [
        f"{tx.sender} {tx.receiver} {tx.slot} {tx.channel}" for tx in sched.transmissions
    ]
    return "\n".join(lines) + "\n"


def load_schedule(text: str) -> Schedule:
    txs = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"schedule line needs 4 fields: {line!r}")
        sender, receiver, slot, channel = (int(x) for x in fields)
        txs.append(Transmission(sender=sender, receiver=receiver, slot=slot, channel=channel))
    return Schedule(transmissions=tuple(txs))
