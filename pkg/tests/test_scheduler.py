import random
from dataclasses import replace

import pytest

from aggsched.model import SINK, Params
from aggsched.netgen import derive_seed, generate_network
from aggsched.scheduler import (
    CandidatePolicy,
    Schedule,
    Transmission,
    aggregation_delay,
    brute_force_optimal,
    dump_schedule,
    load_schedule,
    schedule,
    verify_schedule,
)
from aggsched.tree import AggregationTree, build_ddas_tree, build_spt_tree, compute_layers

from conftest import make_network

ALL = CandidatePolicy.ALL_LEAVES
LAYERED = CandidatePolicy.DEEPEST_LAYER_ONLY


def rules(violations):
    return sorted({v.rule for v in violations})


def single_edge_net(period, sink_slots, other_slots, channels=1):
    params = Params(node_count=2, area_side=10, comm_range=10, period_length=period,
                    active_slot_count=len(sink_slots), channel_count=channels)
    return make_network(params, [(0.0, 0.0), (5.0, 0.0)], [sink_slots, other_slots])


def star_net(n_leaves, period, sink_slots, leaf_slots, channels=1):
    params = Params(node_count=1 + n_leaves, area_side=20, comm_range=10,
                    period_length=period, active_slot_count=len(sink_slots),
                    channel_count=channels)
    positions = [(10.0, 10.0)] + [(10.0 + 2.0 * (k + 1), 10.0) for k in range(n_leaves)]
    duty = [sink_slots] + [leaf_slots] * n_leaves
    return make_network(params, positions, duty)


def chain_net(duties, period, channels=1):
    params = Params(node_count=len(duties), area_side=10.0 * len(duties), comm_range=10,
                    period_length=period, active_slot_count=len(duties[0]),
                    channel_count=channels)
    positions = [(10.0 * i, 0.0) for i in range(len(duties))]
    return make_network(params, positions, duties)


def random_instance(seed, node_count=60, period=20, alpha=2, channels=3, area=70):
    p = Params(node_count=node_count, area_side=area, comm_range=20, period_length=period,
               active_slot_count=alpha, channel_count=channels,
               rng_seed=derive_seed(31337, seed))
    net = generate_network(p)
    lay = compute_layers(net)
    return net, lay


def test_single_edge_greedy_uses_first_active_slot_of_receiver():
    net = single_edge_net(10, [4], [0])
    tree = AggregationTree.from_parents([None, 0])
    sched = schedule(net, tree, ALL)
    assert sched.transmissions == (Transmission(sender=1, receiver=0, slot=4, channel=0),)
    assert aggregation_delay(sched) == 5
    assert verify_schedule(net, tree, sched) == []


def test_two_children_of_sink_must_use_distinct_wake_slots():
    # single radio at the sink: two channels do not allow two same-slot receptions
    net = star_net(2, 10, [4], [0], channels=2)
    tree = AggregationTree.from_parents([None, 0, 0])
    sched = schedule(net, tree, ALL)
    assert sorted(tx.slot for tx in sched.transmissions) == [4, 14]
    assert aggregation_delay(sched) == 15
    assert verify_schedule(net, tree, sched) == []


def test_two_children_case_matches_exhaustive_optimum():
    # same structure inside the exhaustive-search bounds
    net = star_net(2, 6, [4], [0], channels=2)
    tree = AggregationTree.from_parents([None, 0, 0])
    greedy = schedule(net, tree, ALL)
    assert sorted(tx.slot for tx in greedy.transmissions) == [4, 10]
    best = brute_force_optimal(net, tree, horizon=18)
    assert best is not None
    assert aggregation_delay(best) == aggregation_delay(greedy) == 11
    assert verify_schedule(net, tree, best) == []


def test_chain_schedules_back_to_back():
    # sink awake {1}, middle node awake {0}: leaf sends at 0, relay at 1
    net = chain_net([[1], [0], [2]], period=4)
    tree = AggregationTree.from_parents([None, 0, 1])
    sched = schedule(net, tree, ALL)
    by_sender = {tx.sender: tx for tx in sched.transmissions}
    assert by_sender[2].slot == 0 and by_sender[1].slot == 1
    assert aggregation_delay(sched) == 2
    best = brute_force_optimal(net, tree, horizon=8)
    assert best is not None and aggregation_delay(best) == 2
    assert verify_schedule(net, tree, best) == []


def test_four_node_star_exhaustive_optimum_is_one_reception_per_period():
    net = star_net(3, 4, [0], [1])
    tree = AggregationTree.from_parents([None, 0, 0, 0])
    best = brute_force_optimal(net, tree, horizon=12)
    assert best is not None
    assert aggregation_delay(best) == 9
    assert verify_schedule(net, tree, best) == []
    greedy = schedule(net, tree, ALL)
    assert aggregation_delay(greedy) >= 9
    assert aggregation_delay(greedy) == 9


def test_scheduler_output_is_verifier_clean_across_random_instances():
    rng = random.Random(5)
    for seed in range(30):
        net, lay = random_instance(
            seed,
            node_count=rng.choice([30, 60, 100]),
            period=rng.choice([10, 20, 50]),
            alpha=rng.randint(1, 5),
            channels=rng.randint(1, 5),
        )
        for build in (build_ddas_tree, build_spt_tree):
            tree = build(net, lay)
            for policy in (ALL, LAYERED):
                sched = schedule(net, tree, policy)
                assert verify_schedule(net, tree, sched) == []
                assert len(sched.transmissions) == net.node_count - 1


def test_schedule_is_deterministic():
    net, lay = random_instance(99)
    tree = build_ddas_tree(net, lay)
    assert schedule(net, tree, ALL) == schedule(net, tree, ALL)
    assert schedule(net, tree, LAYERED) == schedule(net, tree, LAYERED)


def expected_round_sizes(tree, node_count, policy):
    """Independent leaf-pruning simulation."""
    depths = tree.depths()
    alive = set(range(1, node_count))
    sizes = []
    while alive:
        child_counts = {u: 0 for u in alive}
        for u in alive:
            p = tree.parent[u]
            if p in child_counts:
                child_counts[p] += 1
        leaves = {u for u, k in child_counts.items() if k == 0}
        if policy is LAYERED:
            deepest = max(depths[u] for u in alive)
            leaves = {u for u in leaves if depths[u] == deepest}
        sizes.append(len(leaves))
        alive -= leaves
    return sizes


@pytest.mark.parametrize("policy", [ALL, LAYERED])
def test_rounds_prune_exactly_the_current_leaves(policy):
    net, lay = random_instance(17, node_count=80)
    tree = build_ddas_tree(net, lay)
    sched = schedule(net, tree, policy)
    assert list(sched.round_sizes) == expected_round_sizes(tree, net.node_count, policy)
    assert sum(sched.round_sizes) == net.node_count - 1
    height = max(tree.depths())
    if policy is ALL:
        assert len(sched.round_sizes) <= height
    else:
        assert len(sched.round_sizes) == height


def test_all_leaves_policy_dominates_layered_on_average():
    # statistical comparison on paired topologies at the reference scale
    total_all = 0
    total_layered = 0
    for seed in range(100):
        p = Params(node_count=200, area_side=100, comm_range=20, period_length=20,
                   active_slot_count=2, channel_count=3, rng_seed=derive_seed(606, seed))
        net = generate_network(p)
        lay = compute_layers(net)
        tree = build_ddas_tree(net, lay)
        total_all += aggregation_delay(schedule(net, tree, ALL))
        total_layered += aggregation_delay(schedule(net, tree, LAYERED))
    assert total_all <= total_layered


def test_extra_channels_never_hurt_for_fixed_topology_and_tree():
    rng = random.Random(23)
    for seed in range(30):
        net, lay = random_instance(
            seed + 1000,
            node_count=rng.choice([40, 80]),
            period=rng.choice([8, 20]),
            alpha=rng.randint(1, 3),
            channels=1,
        )
        tree = build_ddas_tree(net, lay)
        for policy in (ALL, LAYERED):
            prev = None
            for m in (1, 2, 3, 4):
                net_m = replace(net, params=replace(net.params, channel_count=m))
                delay = aggregation_delay(schedule(net_m, tree, policy))
                if prev is not None:
                    assert delay <= prev
                prev = delay


def test_verifier_flags_two_same_slot_receptions_even_on_distinct_channels():
    net = star_net(2, 10, [4], [0], channels=2)
    tree = AggregationTree.from_parents([None, 0, 0])
    sched = Schedule(transmissions=(
        Transmission(sender=1, receiver=0, slot=4, channel=0),
        Transmission(sender=2, receiver=0, slot=4, channel=1),
    ))
    assert rules(verify_schedule(net, tree, sched)) == ["receiver-collision"]


def test_verifier_flags_send_and_receive_in_same_slot():
    net = chain_net([[3], [3], [3]], period=4)
    tree = AggregationTree.from_parents([None, 0, 1])
    sched = Schedule(transmissions=(
        Transmission(sender=1, receiver=0, slot=3, channel=0),
        Transmission(sender=2, receiver=1, slot=3, channel=0),
    ))
    found = rules(verify_schedule(net, tree, sched))
    assert "half-duplex" in found


def test_verifier_interference_depends_on_channel():
    params = Params(node_count=5, area_side=60, comm_range=10, interference_range=25,
                    period_length=2, active_slot_count=2, channel_count=2)
    positions = [(30.0, 0.0), (20.0, 0.0), (40.0, 0.0), (20.0, 10.0), (50.0, 0.0)]
    net = make_network(params, positions, [[0, 1]] * 5)
    assert set(net.adjacency[0]) == {1, 2}
    tree = AggregationTree.from_parents([None, 0, 0, 1, 2])
    same_channel = Schedule(transmissions=(
        Transmission(sender=3, receiver=1, slot=0, channel=0),
        Transmission(sender=4, receiver=2, slot=0, channel=0),
        Transmission(sender=1, receiver=0, slot=1, channel=0),
        Transmission(sender=2, receiver=0, slot=2, channel=0),
    ))
    violations = verify_schedule(net, tree, same_channel)
    assert rules(violations) == ["interference"]
    assert violations[0].nodes == (3, 2)  # sender 3 too close to receiver 2
    split_channels = Schedule(transmissions=(
        Transmission(sender=3, receiver=1, slot=0, channel=0),
        Transmission(sender=4, receiver=2, slot=0, channel=1),
        Transmission(sender=1, receiver=0, slot=1, channel=0),
        Transmission(sender=2, receiver=0, slot=2, channel=0),
    ))
    assert verify_schedule(net, tree, split_channels) == []


def test_verifier_structural_rules():
    net = chain_net([[1], [0], [2]], period=4, channels=1)
    tree = AggregationTree.from_parents([None, 0, 1])
    good = schedule(net, tree, ALL)
    assert verify_schedule(net, tree, good) == []
    by_sender = {tx.sender: tx for tx in good.transmissions}

    missing = Schedule(transmissions=(by_sender[1],))
    assert "missing-transmission" in rules(verify_schedule(net, tree, missing))

    doubled = Schedule(transmissions=good.transmissions + (by_sender[1],))
    assert "duplicate-transmission" in rules(verify_schedule(net, tree, doubled))

    wrong_parent = Schedule(transmissions=(
        by_sender[1], replace(by_sender[2], receiver=0),
    ))
    assert "wrong-receiver" in rules(verify_schedule(net, tree, wrong_parent))

    asleep = Schedule(transmissions=(
        replace(by_sender[1], slot=2), by_sender[2],
    ))
    found = rules(verify_schedule(net, tree, asleep))
    assert "receiver-asleep" in found

    out_of_order = Schedule(transmissions=(
        replace(by_sender[1], slot=1), replace(by_sender[2], slot=1),
    ))
    assert "precedence" in rules(verify_schedule(net, tree, out_of_order))

    sink_tx = Schedule(transmissions=good.transmissions + (
        Transmission(sender=0, receiver=1, slot=9, channel=0),
    ))
    assert "sink-transmits" in rules(verify_schedule(net, tree, sink_tx))

    malformed = Schedule(transmissions=(
        replace(by_sender[1], channel=7), replace(by_sender[2], slot=-1),
    ))
    assert "malformed" in rules(verify_schedule(net, tree, malformed))


def test_aggregation_delay():
    one = Schedule(transmissions=(Transmission(1, 0, 4, 0),))
    assert aggregation_delay(one) == 5
    two = Schedule(transmissions=(Transmission(1, 0, 0, 0), Transmission(2, 0, 1, 0)))
    assert aggregation_delay(two) == 2
    with pytest.raises(ValueError):
        aggregation_delay(Schedule(transmissions=()))


def test_delay_matches_independent_recomputation_at_scale():
    p = Params(node_count=200, area_side=100, comm_range=20, period_length=20,
               active_slot_count=2, channel_count=3, rng_seed=4242)
    net = generate_network(p)
    lay = compute_layers(net)
    tree = build_ddas_tree(net, lay)
    sched = schedule(net, tree, ALL)
    assert aggregation_delay(sched) == 1 + max(tx.slot for tx in sched.transmissions)


def test_oracle_enforces_tractability_bounds():
    net = star_net(3, 4, [0], [1])
    tree = AggregationTree.from_parents([None, 0, 0, 0])
    with pytest.raises(ValueError):
        brute_force_optimal(net, tree, horizon=13)  # > 3 periods
    big = generate_network(Params(node_count=9, area_side=10, comm_range=20,
                                  period_length=4, active_slot_count=1, rng_seed=0))
    big_lay = compute_layers(big)
    with pytest.raises(ValueError):
        brute_force_optimal(big, build_ddas_tree(big, big_lay), horizon=4)
    long_period = single_edge_net(7, [0], [0])
    with pytest.raises(ValueError):
        brute_force_optimal(long_period, AggregationTree.from_parents([None, 0]), horizon=7)
    many_channels = star_net(2, 4, [0], [1], channels=3)
    with pytest.raises(ValueError):
        brute_force_optimal(many_channels, AggregationTree.from_parents([None, 0, 0]), horizon=4)


def test_oracle_returns_none_when_horizon_too_small():
    net = single_edge_net(6, [5], [0])
    tree = AggregationTree.from_parents([None, 0])
    assert brute_force_optimal(net, tree, horizon=4) is None


def test_greedy_never_beats_oracle_on_random_tiny_instances():
    rng = random.Random(77)
    compared = 0
    for seed in range(200):
        if compared >= 40:
            break
        p = Params(node_count=rng.randint(3, 7), area_side=30, comm_range=15,
                   period_length=rng.randint(3, 6),
                   active_slot_count=rng.randint(1, 2),
                   channel_count=rng.randint(1, 2),
                   rng_seed=derive_seed(888, seed))
        try:
            net = generate_network(p)
        except Exception:
            continue
        lay = compute_layers(net)
        tree = build_ddas_tree(net, lay)
        best = brute_force_optimal(net, tree, horizon=3 * p.period_length)
        if best is None:
            continue
        compared += 1
        greedy = schedule(net, tree, ALL)
        assert verify_schedule(net, tree, best) == []
        assert verify_schedule(net, tree, greedy) == []
        assert aggregation_delay(greedy) >= aggregation_delay(best)
    assert compared >= 40


def test_schedule_dump_round_trip():
    net, lay = random_instance(3)
    tree = build_ddas_tree(net, lay)
    sched = schedule(net, tree, ALL)
    again = load_schedule(dump_schedule(sched))
    assert again.transmissions == sched.transmissions
    with pytest.raises(ValueError):
        load_schedule("1 2 3\n")
