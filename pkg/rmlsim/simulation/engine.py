# stdlib
import math
import time
from collections import defaultdict
from typing import Any, DefaultDict, Dict, List, Optional

# third party
import numpy as np
from pydantic import BaseModel, validate_arguments, validator

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.channel.model import ChannelParams, attempt_link, link_latency, link_success_prob
from rmlsim.rml.blockage import BlockageMap
from rmlsim.rml.flow import FlowEstimate, FlowTracker
from rmlsim.rml.policy import QPolicy, delivery_reward, policy_summary, q_update, replay_train
from rmlsim.rml.selection import RelayDecision, WorldSnapshot, select_relay
from rmlsim.simulation.config import Mode, ScenarioConfig
from rmlsim.simulation.records import (
    DeliveryRecord,
    MetricsRecord,
    Outcome,
    compute_metrics,
)
from rmlsim.utils.reproducibility import spawn_streams
from rmlsim.world.geometry import Blockage, BlockageClass, LinkState, place_blockages
from rmlsim.world.mobility import Vehicle, VehicleKind, constant_position_step, rwp_init, rwp_step


class BroadcastMessage(BaseModel):
    id: int
    payload_bytes: int = 1024
    created_at: float = 0.0

    @validator("payload_bytes")
    def _validate_payload(cls: Any, v: int) -> int:
        if v <= 0:
            raise ValueError(f"payload must be > 0 bytes, got {v}")
        return v


class BroadcastQueue:
    """Per-broadcast pending counts of targets and relays.

    A packet leaves a queue in under a microsecond at the configured data
    rate, so nothing is carried from one broadcast to the next. The capacity
    only binds when it is below the number of targets one relay serves in a
    single broadcast; the default never drops.
    """

    def __init__(self, capacity: int) -> None:
        self.capacity = capacity
        self.pending: DefaultDict[int, int] = defaultdict(int)

    def admit(self, vehicle_id: int) -> bool:
        if self.pending[vehicle_id] + 1 > self.capacity:
            return False
        self.pending[vehicle_id] += 1
        return True

    def drain(self) -> None:
        self.pending.clear()


class ScenarioResult(BaseModel):
    config: Dict[str, Any]
    metrics: MetricsRecord
    records: List[DeliveryRecord]
    flow_trace: List[FlowEstimate] = []
    decisions: int = 0
    policy_states: int = 0
    wall_time_s: float = 0.0
    policy: Optional[Any] = None

    class Config:
        arbitrary_types_allowed = True


class ScenarioState:
    """Mutable world of one scenario run.

    Owns the buildings, the vehicles, the policy, the blockage map and the
    three random streams. Nothing here is shared between runs.
    """

    def __init__(
        self,
        cfg: ScenarioConfig,
        buildings: List[Blockage],
        vehicles: List[Vehicle],
        rngs: Dict[str, np.random.Generator],
        policy: Optional[QPolicy] = None,
    ) -> None:
        self.cfg = cfg
        self.terrain = cfg.terrain()
        self.mobility = cfg.mobility()
        self.buildings = buildings
        self.vehicles = vehicles
        self.rngs = rngs
        self.policy = policy if policy is not None else QPolicy(cfg.policy)
        self.blockage_map = BlockageMap(cfg.threshold())
        self.flow = FlowTracker(cfg.flow_m)
        self.flow_trace: List[FlowEstimate] = []
        self.queue = BroadcastQueue(cfg.channel.queue_capacity)
        self.now = 0.0
        self.training = True
        self.decisions = 0

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "ScenarioState":
        rngs = spawn_streams(cfg.seed)
        terrain = cfg.terrain()
        buildings = place_blockages(
            terrain,
            cfg.n_blockages,
            rngs["world"],
            size_x=cfg.blockage_size_x,
            size_y=cfg.blockage_size_y,
            height=cfg.blockage_height,
        )
        vehicles = rwp_init(terrain, buildings, cfg.n_vehicles, rngs["world"], cfg.mobility())
        return cls(cfg, buildings, vehicles, rngs)

    def temporary_blockages(self) -> List[Blockage]:
        offset = len(self.buildings)
        hw = self.cfg.large_vehicle_half_width_m
        return [
            Blockage(
                id=offset + v.id,
                center=v.position,
                half_width_x=hw,
                half_width_y=hw,
                height=v.body_height,
                classification=BlockageClass.TEMPORARY,
                owner_id=v.id,
            )
            for v in self.vehicles
            if v.kind == VehicleKind.LARGE_VEHICLE
        ]

    def blockages(self) -> List[Blockage]:
        return self.buildings + self.temporary_blockages()

    def snapshot(self) -> WorldSnapshot:
        return WorldSnapshot(
            self.terrain,
            self.vehicles,
            self.blockages(),
            channel=self.cfg.channel,
            tx_radius_m=self.cfg.tx_radius_m,
            blockage_map=self.blockage_map.permanent_positions(),
        )

    def refresh_map(self) -> None:
        self.blockage_map.refresh(self.terrain, self.blockages(), self.now)
        estimate = self.flow.sample(self.snapshot().nlos_ids(), self.now, self.cfg.map_refresh_s)
        if estimate is not None:
            self.flow_trace.append(estimate)
            log.debug(
                f"flow at t={self.now:.1f}s: N={estimate.n_current} "
                f"+{estimate.arrivals}/-{estimate.departures} -> N_n={estimate.n_next:.2f}"
            )

    def step(self) -> None:
        constant_position_step(self.terrain.bs_position, self.cfg.dt_s)
        for v in self.vehicles:
            rwp_step(v, self.terrain, self.buildings, self.cfg.dt_s, self.rngs["world"], self.mobility)
        self.now += self.cfg.dt_s


def deliver_direct(
    message: BroadcastMessage,
    vehicle_id: int,
    distance_m: float,
    state: LinkState,
    channel: ChannelParams,
    rng: Any,
) -> DeliveryRecord:
    """Single-hop BS -> vehicle attempt with retries."""
    p = link_success_prob(distance_m, state, channel)
    ok, retries = attempt_link(p, channel.max_retries, rng)
    return DeliveryRecord(
        message_id=message.id,
        vehicle_id=vehicle_id,
        sent_at=message.created_at,
        outcome=Outcome.DELIVERED if ok else Outcome.FAILED,
        latency_ms=link_latency(1, [retries], channel, [distance_m]) if ok else None,
        hops=1,
        retries=retries,
        was_nlos=state == LinkState.NLOS,
    )


def deliver_via_relay(
    message: BroadcastMessage,
    decision: RelayDecision,
    channel: ChannelParams,
    rng: Any,
    policy: Optional[QPolicy] = None,
) -> DeliveryRecord:
    """BS -> relay -> target, each leg with its own retries.

    When a policy is given, the outcome is fed back as a one-step episode.
    """
    candidate = decision.candidate
    if candidate is None:
        raise ValueError(f"no relay chosen for vehicle {decision.target_nlos_id}")

    ok, r1 = attempt_link(candidate.p_bs_relay, channel.max_retries, rng)
    retries, hops, distances = [r1], 1, [candidate.d_bs]
    if ok:
        ok, r2 = attempt_link(candidate.p_relay_target, channel.max_retries, rng)
        retries.append(r2)
        hops = 2
        distances.append(candidate.d_v)
    latency = link_latency(hops, retries, channel, distances)

    if policy is not None and decision.action_index is not None:
        reward = delivery_reward(ok, latency, policy.params)
        q_update(policy, decision.state_index, decision.action_index, reward, decision.state_index, True)

    return DeliveryRecord(
        message_id=message.id,
        vehicle_id=decision.target_nlos_id,
        sent_at=message.created_at,
        outcome=Outcome.DELIVERED if ok else Outcome.FAILED,
        latency_ms=latency if ok else None,
        hops=hops,
        retries=sum(retries),
        was_nlos=True,
    )


def _dropped(message: BroadcastMessage, vehicle_id: int, was_nlos: bool) -> DeliveryRecord:
    return DeliveryRecord(
        message_id=message.id,
        vehicle_id=vehicle_id,
        sent_at=message.created_at,
        outcome=Outcome.FAILED,
        hops=0,
        was_nlos=was_nlos,
    )


def broadcast_step(state: ScenarioState, message: BroadcastMessage) -> List[DeliveryRecord]:
    """Deliver one broadcast to every vehicle of the current world.

    LOS roles are recomputed from the geometry at call time. RML mode relays
    to NLOS vehicles; baseline mode sends them the message over the NLOS
    channel directly.
    """
    cfg = state.cfg
    channel = cfg.channel
    snap = state.snapshot()
    rng_channel = state.rngs["channel"]
    records = []

    for row, vid in enumerate(snap.ids):
        vid = int(vid)
        los = bool(snap.los_flags[row])
        if not state.queue.admit(vid):
            log.warning(f"message {message.id}: queue of {vid} full, dropped")
            records.append(_dropped(message, vid, not los))
            continue

        distance_m = float(snap.bs_distance[row])
        if los:
            records.append(deliver_direct(message, vid, distance_m, LinkState.LOS, channel, rng_channel))
            continue
        if cfg.mode == Mode.BASELINE:
            records.append(deliver_direct(message, vid, distance_m, LinkState.NLOS, channel, rng_channel))
            continue

        decision = select_relay(
            snap, vid, state.policy, state.rngs["policy"], mode=cfg.selector, explore=state.training
        )
        state.decisions += 1
        if decision.chosen_relay_id is None:
            if cfg.direct_fallback:
                records.append(
                    deliver_direct(message, vid, distance_m, LinkState.NLOS, channel, rng_channel)
                )
            else:
                records.append(_dropped(message, vid, True))
            continue

        if not state.queue.admit(decision.chosen_relay_id):
            log.warning(
                f"message {message.id}: queue of relay {decision.chosen_relay_id} full, dropped for {vid}"
            )
            q_update(
                state.policy,
                decision.state_index,
                decision.action_index,  # type: ignore
                delivery_reward(False, 0.0, state.policy.params),
                decision.state_index,
                True,
            )
            records.append(_dropped(message, vid, True))
            continue
        records.append(deliver_via_relay(message, decision, channel, rng_channel, state.policy))

    state.queue.drain()
    if cfg.mode == Mode.RML and state.training:
        state.policy.end_episode()
    return records


@validate_arguments(config=dict(arbitrary_types_allowed=True))
def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Run one scenario and aggregate its delivery trace.

    The BS emits a broadcast every `interpacket_ms`; the policy trains while
    the warm-up lasts and keeps learning greedily afterwards.
    """
    start = time.time()
    with log.scope(f"seed={cfg.seed} mode={cfg.mode.value}"):
        log.info(
            f"scenario start: {cfg.n_vehicles} vehicles, {cfg.n_blockages} blockages, {cfg.sim_time_s}s"
        )
        state = ScenarioState.from_config(cfg)

        interval_s = cfg.interpacket_ms / 1e3
        n_messages = int(math.floor(cfg.sim_time_s / interval_s + 1e-9))
        n_steps = int(math.ceil(cfg.sim_time_s / cfg.dt_s - 1e-9))
        warmup_end = cfg.warmup_fraction * cfg.sim_time_s

        records: List[DeliveryRecord] = []
        next_message = 0

        def emit_until(limit: float) -> None:
            nonlocal next_message
            while next_message < n_messages and next_message * interval_s < limit - 1e-9:
                message = BroadcastMessage(
                    id=next_message,
                    payload_bytes=cfg.channel.packet_bytes,
                    created_at=next_message * interval_s,
                )
                records.extend(broadcast_step(state, message))
                next_message += 1

        for k in range(n_steps):
            state.now = k * cfg.dt_s
            if state.blockage_map.due(state.now, cfg.map_refresh_s):
                state.refresh_map()
            state.training = state.now < warmup_end
            emit_until(state.now + cfg.dt_s)
            if cfg.mode == Mode.RML:
                replay_train(state.policy, state.rngs["policy"])
            state.step()
        emit_until(math.inf)

        metrics = compute_metrics(records, cfg.sim_time_s, cfg.channel.packet_bytes)
        wall = time.time() - start
        log.info(
            f"scenario done in {wall:.2f}s: pdr={metrics.pdr:.3f} "
            f"latency={metrics.mean_latency_ms:.4f}ms throughput={metrics.throughput_mbps:.4f}Mb/s"
        )
        log.debug(f"policy: {policy_summary(state.policy)}")

    return ScenarioResult(
        config=cfg.resolved(),
        metrics=metrics,
        records=records,
        flow_trace=state.flow_trace,
        decisions=state.decisions,
        policy_states=len(state.policy.q_table),
        wall_time_s=wall,
        policy=state.policy,
    )
