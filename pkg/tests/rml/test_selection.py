# stdlib
import math
import time
from typing import Dict, Optional

# third party
import numpy as np
import pytest
from conftest import make_vehicle

# rmlsim absolute
from rmlsim.channel.model import ChannelParams, link_latency, link_success_prob
from rmlsim.rml.policy import PolicyParams, QPolicy, delivery_reward, replay_train
from rmlsim.rml.selection import (
    BestMetricSelector,
    GreedyNearestSelector,
    LearnedSelector,
    SelectionMode,
    Selectors,
    WorldSnapshot,
    candidate_relays,
    select_relay,
)
from rmlsim.simulation.config import build_config
from rmlsim.simulation.engine import BroadcastMessage, ScenarioState, deliver_via_relay
from rmlsim.world.geometry import LinkState, distance, los_test


def _snapshot(world: Dict, **kwargs) -> WorldSnapshot:  # type: ignore
    return WorldSnapshot(
        world["terrain"],
        world["vehicles"],
        world["buildings"],
        channel=kwargs.pop("channel", world["channel"]),
        **kwargs,
    )


def test_snapshot_roles(relay_world: Dict) -> None:
    snap = _snapshot(relay_world)
    assert snap.nlos_ids() == [0]
    assert snap.bs_state(0) == LinkState.NLOS
    assert all(snap.bs_state(v) == LinkState.LOS for v in (1, 2, 3))


def test_candidates_ordered_by_distance(relay_world: Dict) -> None:
    candidates = candidate_relays(_snapshot(relay_world), 0)
    assert [c.relay_id for c in candidates] == relay_world["ranking"]
    distances = [c.d_v for c in candidates]
    assert distances == sorted(distances)
    assert distances[0] == pytest.approx(math.hypot(25, 25))


def test_candidates_truncated(relay_world: Dict) -> None:
    assert [c.relay_id for c in candidate_relays(_snapshot(relay_world), 0, max_k=2)] == [1, 2]


def test_candidates_respect_tx_radius(relay_world: Dict) -> None:
    candidates = candidate_relays(_snapshot(relay_world, tx_radius_m=40), 0)
    assert [c.relay_id for c in candidates] == [1]


def test_candidates_are_not_range_limited_by_default(relay_world: Dict) -> None:
    # 123 m from the target, clear of the building towards both ends
    relay_world["vehicles"].append(make_vehicle(4, 260.0, 40.0))
    candidates = candidate_relays(_snapshot(relay_world), 0)
    assert [c.relay_id for c in candidates] == [1, 2, 3, 4]
    assert candidates[-1].d_v == pytest.approx(math.hypot(110, 55))
    assert 0 < candidates[-1].p_relay_target < candidates[0].p_relay_target

    limited = candidate_relays(_snapshot(relay_world, tx_radius_m=100), 0)
    assert [c.relay_id for c in limited] == [1, 2, 3]


def test_single_candidate(relay_world: Dict) -> None:
    relay_world["vehicles"] = relay_world["vehicles"][:2]
    candidates = candidate_relays(_snapshot(relay_world), 0)
    assert len(candidates) == 1
    assert candidates[0].relay_id == 1


def test_candidates_drop_zero_probability_links(relay_world: Dict) -> None:
    channel = ChannelParams(shadow_sigma_los_db=0, rx_threshold_dbm=-65)
    assert candidate_relays(_snapshot(relay_world, channel=channel), 0) == []


def test_greedy_nearest_picks_first(relay_world: Dict) -> None:
    decision = select_relay(
        _snapshot(relay_world), 0, QPolicy(), np.random.default_rng(0), mode=SelectionMode.GREEDY_NEAREST
    )
    assert decision.chosen_relay_id == 1
    assert decision.action_index == 0
    assert decision.d_v == pytest.approx(math.hypot(25, 25))
    assert decision.v_d == pytest.approx(30)


def test_select_updates_reference_distance(relay_world: Dict) -> None:
    policy = QPolicy()
    decision = select_relay(
        _snapshot(relay_world), 0, policy, np.random.default_rng(0), mode=SelectionMode.GREEDY_NEAREST
    )
    assert policy.best_distance[0] == decision.d_v
    assert decision.d_r == decision.d_v


def test_best_metric_picks_best_path(relay_world: Dict) -> None:
    snap = _snapshot(relay_world)
    candidates = candidate_relays(snap, 0)
    best = max(candidates, key=lambda c: c.p_bs_relay * c.p_relay_target)
    decision = select_relay(snap, 0, QPolicy(), np.random.default_rng(0), mode=SelectionMode.BEST_METRIC)
    assert decision.chosen_relay_id == best.relay_id == 2


def test_learned_follows_q_values(relay_world: Dict) -> None:
    policy = QPolicy(PolicyParams(epsilon_explore=0.0))
    snap = _snapshot(relay_world)
    state = select_relay(snap, 0, policy, np.random.default_rng(0)).state_index
    # rank 3 does not exist with three candidates
    policy.q_table[state] = np.array([0.0, 2.0, 0.0, 5.0])
    decision = select_relay(snap, 0, policy, np.random.default_rng(0), explore=False)
    assert decision.chosen_relay_id == 2
    assert decision.action_index == 1
    assert decision.n_candidates == 3


def test_no_candidate(relay_world: Dict) -> None:
    relay_world["vehicles"] = relay_world["vehicles"][:1]
    decision = select_relay(_snapshot(relay_world), 0, QPolicy(), np.random.default_rng(0))
    assert decision.chosen_relay_id is None
    assert decision.n_candidates == 0


def test_selector_registry() -> None:
    assert Selectors.list() == ["greedy", "learned", "metric"]
    assert isinstance(Selectors.get("greedy"), GreedyNearestSelector)
    assert isinstance(Selectors.get("learned"), LearnedSelector)
    assert Selectors.get("metric").fqdn() == "relay_selector.metric"
    assert BestMetricSelector.type() == "relay_selector"
    with pytest.raises(ValueError):
        Selectors.get("random")


def _brute_force_nearest(state: ScenarioState, target: int) -> Optional[int]:
    terrain, blockages = state.terrain, state.blockages()
    by_id = {v.id: v for v in state.vehicles}
    t = by_id[target]
    best = None
    for v in state.vehicles:
        if v.id == target:
            continue
        to_bs = los_test(
            terrain,
            blockages,
            terrain.bs_position,
            terrain.bs_height,
            v.position,
            v.antenna_height,
            (-1, v.id),
        )
        if not to_bs.los:
            continue
        d = distance(v.position, t.position)
        if state.cfg.tx_radius_m is not None and d > state.cfg.tx_radius_m:
            continue
        to_target = los_test(
            terrain, blockages, v.position, v.antenna_height, t.position, t.antenna_height, (v.id, target)
        )
        if not to_target.los:
            continue
        if best is None or (d, v.id) < best:
            best = (d, v.id)
    return None if best is None else best[1]


@pytest.mark.parametrize("n_worlds", [40, pytest.param(500, marks=pytest.mark.slow)])
def test_greedy_matches_brute_force(n_worlds: int) -> None:
    rng = np.random.default_rng(2024)
    checked = 0
    for world in range(n_worlds):
        cfg = build_config(
            n_vehicles=int(rng.integers(2, 11)),
            n_blockages=int(rng.integers(0, 9)),
            seed=world,
        )
        state = ScenarioState.from_config(cfg)
        snap = state.snapshot()
        for target in snap.nlos_ids():
            brute = los_test(
                state.terrain,
                state.blockages(),
                state.terrain.bs_position,
                state.terrain.bs_height,
                snap.vehicle(target).position,
                snap.vehicle(target).antenna_height,
                (-1, target),
            )
            assert not brute.los
            decision = select_relay(
                snap, target, state.policy, np.random.default_rng(0), mode=SelectionMode.GREEDY_NEAREST
            )
            assert decision.chosen_relay_id == _brute_force_nearest(state, target)
            if decision.chosen_relay_id is not None:
                assert snap.bs_state(decision.chosen_relay_id) == LinkState.LOS
            checked += 1
    assert checked > 0


def _expected_rewards(world: Dict, policy: QPolicy) -> list:
    channel = world["channel"]
    out = []
    for c in candidate_relays(_snapshot(world), 0):
        p1, p2 = c.p_bs_relay, c.p_relay_target
        assert p1 == link_success_prob(c.d_bs, LinkState.LOS, channel)
        success = delivery_reward(True, link_latency(2, [0, 0], channel, [c.d_bs, c.d_v]), policy.params)
        fail_first = delivery_reward(False, link_latency(1, [0], channel, [c.d_bs]), policy.params)
        fail_second = delivery_reward(False, link_latency(2, [0, 0], channel, [c.d_bs, c.d_v]), policy.params)
        out.append(p1 * p2 * success + (1 - p1) * fail_first + p1 * (1 - p2) * fail_second)
    return out


def _train(world: Dict, seed: int, episodes: int = 500) -> int:
    snap = _snapshot(world)
    policy = QPolicy()
    streams = np.random.SeedSequence(seed).spawn(2)
    rng_policy, rng_channel = (np.random.default_rng(s) for s in streams)
    message = BroadcastMessage(id=0)
    for _ in range(episodes):
        decision = select_relay(snap, 0, policy, rng_policy, mode=SelectionMode.LEARNED, explore=True)
        deliver_via_relay(message, decision, world["channel"], rng_channel, policy)
        policy.end_episode()
        replay_train(policy, rng_policy)
    final = select_relay(snap, 0, policy, rng_policy, mode=SelectionMode.LEARNED, explore=False)
    return final.action_index  # type: ignore


def test_fixture_has_a_clear_best_relay(relay_world: Dict) -> None:
    rewards = _expected_rewards(relay_world, QPolicy())
    assert int(np.argmax(rewards)) == relay_world["best_rank"]
    assert sorted(rewards)[-1] - sorted(rewards)[-2] > 0.5


@pytest.mark.parametrize(
    "n_seeds, required",
    [(10, 9), pytest.param(100, 95, marks=pytest.mark.slow)],
)
def test_learned_policy_converges(relay_world: Dict, n_seeds: int, required: int) -> None:
    best = int(np.argmax(_expected_rewards(relay_world, QPolicy())))
    hits = sum(_train(relay_world, seed) == best for seed in range(n_seeds))
    assert hits >= required


def _ring_world(k: int) -> WorldSnapshot:
    target = make_vehicle(0, 150.0, 100.0)
    angles = np.linspace(0.0, 2 * math.pi, k, endpoint=False)
    ring = [
        make_vehicle(i + 1, 150.0 + 30.0 * math.cos(a), 100.0 + 30.0 * math.sin(a))
        for i, a in enumerate(angles)
    ]
    return WorldSnapshot(build_config().terrain(), [target] + ring, [])


@pytest.mark.slow
def test_decision_time_grows_at_most_linearly_in_candidates() -> None:
    selector = BestMetricSelector()
    timings = {}
    for k in (2, 4, 8, 16):
        snap = _ring_world(k)
        samples = []
        for _ in range(300):
            start = time.perf_counter()
            candidates = candidate_relays(snap, 0, max_k=k)
            selector.choose(candidates)
            samples.append(time.perf_counter() - start)
        assert len(candidates) == k
        timings[k] = float(np.median(samples))

    for k, t in timings.items():
        assert t <= 1.5 * timings[2] * k / 2, (k, timings)
