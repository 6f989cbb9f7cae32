"""Field simulation: placement, lockstep radio transport, adversaries.

The world owns all state. Each round it delivers every transmission from the
previous round to the entities within radio range of its transmitter, steps
the base station, every sensor, and every adversary in a fixed order, and
collects their outboxes for the next round. With the same provisioning and
seed, runs are byte-for-byte reproducible.

The envelope's ``transmitter`` field is physical-layer truth: the transport
stamps it with the emitting entity, so an adversary can forge every claimed
field but not where a copy actually came from.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

from .graph import radius_for_expected_degree, unit_disk_graph, is_connected, is_dominating, is_wcds
from .keys import Ciphertext, KeyMaterial, Rank, group_sizes_for, provision
from .protocol import (
    BS_ID,
    BSState,
    ClusterOutcome,
    Envelope,
    NodeState,
    Phase,
    bs_step,
    gd_step,
    os_step,
)
from .wire import MessageKind

PLACEMENT_MODES = ("uniform", "group_clustered")
ADVERSARY_BEHAVIORS = ("forge_join", "forge_approve", "replay")


@dataclass(frozen=True)
class PlacementModel:
    """How sensors land on the plane.

    ``uniform`` scatters every node independently. ``group_clustered`` drops
    each dominator at a uniform anchor and its members at Gaussian offsets
    around it, clamped to the plane; sigma defaults to half the radio radius.
    """

    mode: str
    width: float
    height: float
    radius: float
    sigma: float | None = None

    def __post_init__(self):
        if self.mode not in PLACEMENT_MODES:
            raise ValueError(f"unknown placement mode {self.mode!r}")
        if self.width <= 0 or self.height <= 0 or self.radius <= 0:
            raise ValueError("width, height, and radius must be positive")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive when given")

    @property
    def spread(self) -> float:
        return self.sigma if self.sigma is not None else 0.5 * self.radius


@dataclass
class Adversary:
    id: int
    position: tuple[float, float]
    behavior: str
    seq: int = 0
    captured: deque = field(default_factory=lambda: deque(maxlen=512))


@dataclass
class World:
    material: KeyMaterial
    radius: float
    width: float
    height: float
    positions: dict[int, tuple[float, float]]
    planned: dict[int, tuple[float, float]]
    states: dict[int, NodeState]
    bs: BSState
    rng: random.Random
    adversaries: list[Adversary] = field(default_factory=list)
    round: int = 0
    inflight: list[Envelope] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)
    archive: list[tuple[int, Envelope]] = field(default_factory=list)
    formation_complete: bool = False
    _neighbors: dict[int, list[int]] | None = None

    def neighbors_of(self, entity: int) -> list[int]:
        if self._neighbors is None:
            self._rebuild_neighbors()
        return self._neighbors[entity]

    def _rebuild_neighbors(self) -> None:
        ids = sorted(self.positions)
        r2 = self.radius * self.radius
        table: dict[int, list[int]] = {i: [] for i in ids}
        for a in range(len(ids)):
            xa, ya = self.positions[ids[a]]
            for b in range(a + 1, len(ids)):
                xb, yb = self.positions[ids[b]]
                dx = xa - xb
                dy = ya - yb
                if dx * dx + dy * dy <= r2:
                    table[ids[a]].append(ids[b])
                    table[ids[b]].append(ids[a])
        self._neighbors = table


def _fresh_state(material: KeyMaterial, node: int, tau: int) -> NodeState:
    return NodeState(
        id=node,
        rank=material.ranks[node],
        ring=material.rings[node],
        tau=tau,
    )


def deploy(
    material: KeyMaterial,
    placement: PlacementModel,
    seed: int = 0,
    tau: int = 1,
) -> World:
    """Scatter the provisioned nodes and stand up a world, reserves held back.

    Positions are drawn for every node including reserves, in id order within
    the drawing scheme, so a reserve sensor deployed later lands where the
    same seed would always have put it.
    """
    rng = random.Random(seed)
    w, h = placement.width, placement.height
    planned: dict[int, tuple[float, float]] = {}
    if placement.mode == "uniform":
        for node in material.all_nodes():
            planned[node] = (rng.uniform(0.0, w), rng.uniform(0.0, h))
    else:
        s = placement.spread
        for gd, members in material.groups:
            ax, ay = rng.uniform(0.0, w), rng.uniform(0.0, h)
            planned[gd] = (ax, ay)
            for m in members:
                mx = min(max(rng.gauss(ax, s), 0.0), w)
                my = min(max(rng.gauss(ay, s), 0.0), h)
                planned[m] = (mx, my)

    positions = {n: planned[n] for n in material.deployed_nodes()}
    positions[BS_ID] = (w / 2.0, h / 2.0)
    states = {n: _fresh_state(material, n, tau) for n in material.deployed_nodes()}
    return World(
        material=material,
        radius=placement.radius,
        width=w,
        height=h,
        positions=positions,
        planned=planned,
        states=states,
        bs=BSState(),
        rng=rng,
    )


def make_world(
    material: KeyMaterial,
    positions: dict[int, tuple[float, float]],
    radius: float,
    tau: int = 1,
    seed: int = 0,
) -> World:
    """World with explicit positions; ``positions`` must place the base station."""
    if BS_ID not in positions:
        raise ValueError("positions must include the base station id")
    width = max(x for x, _ in positions.values()) + radius
    height = max(y for _, y in positions.values()) + radius
    states = {
        n: _fresh_state(material, n, tau)
        for n in positions
        if n != BS_ID
    }
    return World(
        material=material,
        radius=radius,
        width=width,
        height=height,
        positions=dict(positions),
        planned=dict(positions),
        states=states,
        bs=BSState(),
        rng=random.Random(seed),
    )


def _transmit(world: World, env: Envelope, legit: bool) -> None:
    world.inflight.append(env)
    world.archive.append((world.round, env))
    name = env.kind.name if legit else "ADV_" + env.kind.name
    world.counters[name] = world.counters.get(name, 0) + 1


def _deliver(world: World) -> dict[int, list[Envelope]]:
    inboxes: dict[int, list[Envelope]] = {}
    states = world.states
    for env in world.inflight:
        for rcv in world.neighbors_of(env.transmitter):
            st = states.get(rcv)
            if st is not None and st.phase is Phase.LEFT:
                continue
            inboxes.setdefault(rcv, []).append(env)
    world.inflight = []
    return inboxes


def _adversary_step(world: World, adv: Adversary, inbox: list[Envelope]) -> list[Envelope]:
    adv.captured.extend(inbox)
    out: list[Envelope] = []
    if adv.behavior == "forge_join":
        # Alternate between claiming its own id and impersonating a real
        # sensor; either way the ciphertext is junk it cannot seal.
        legit = sorted(n for n, st in world.states.items() if st.rank is Rank.OS)
        if world.round % 2 == 0 or not legit:
            claimed = adv.id
            key_id = 10**6 - adv.id
        else:
            claimed = legit[(world.round // 2) % len(legit)]
            key_id = world.material.individual_keys[claimed].id
        adv.seq += 1
        ct = Ciphertext(key_id, world.rng.randbytes(9), world.rng.randbytes(8))
        out.append(Envelope(claimed, MessageKind.JOIN_REQ, ct, adv.seq, adv.id))
    elif adv.behavior == "forge_approve":
        # Sender equals transmitter, so the one-hop test passes; the tag
        # cannot, since no group key is held.
        gds = sorted(world.material.group_keys)
        if gds:
            key_id = world.material.group_keys[gds[world.round % len(gds)]].id
            adv.seq += 1
            ct = Ciphertext(key_id, world.rng.randbytes(17), world.rng.randbytes(8))
            out.append(Envelope(adv.id, MessageKind.JOIN_APRV, ct, adv.seq, adv.id))
    elif adv.behavior == "replay":
        for _ in range(min(4, len(adv.captured))):
            env = adv.captured.popleft()
            out.append(replace(env, transmitter=adv.id))
    return out


def step(world: World) -> None:
    """Advance the whole field by one round."""
    inboxes = _deliver(world)
    material = world.material
    events = world.events

    _, out = bs_step(world.bs, inboxes.get(BS_ID, []), world.round, material, events)
    for env in out:
        _transmit(world, env, legit=True)

    for node in sorted(world.states):
        st = world.states[node]
        if st.rank is Rank.OS:
            _, out = os_step(st, inboxes.get(node, []), world.round, events)
        else:
            _, out = gd_step(st, inboxes.get(node, []), world.round, material, events)
        for env in out:
            _transmit(world, env, legit=True)

    for adv in sorted(world.adversaries, key=lambda a: -a.id):
        for env in _adversary_step(world, adv, inboxes.get(adv.id, [])):
            _transmit(world, env, legit=False)

    world.round += 1
    if not world.formation_complete and not _legit_pending(world):
        world.formation_complete = True
        for st in world.states.values():
            st.post_formation = True


def _legit_pending(world: World) -> bool:
    for env in world.inflight:
        if env.transmitter >= BS_ID:
            return True
    for st in world.states.values():
        if st.pending_leave:
            return True
        if st.rank is Rank.OS and st.phase not in (Phase.JOINED, Phase.LEFT):
            return True
    for rec in world.bs.orphans.values():
        if not rec.decided:
            return True
    return False


def run(world: World, max_rounds: int = 64, force: bool = False) -> World:
    """Step until the legitimate side settles or the round budget runs out.

    Adversary chatter alone never keeps the run alive. ``force`` steps the
    full budget regardless, for soak tests under sustained attack.
    """
    start = world.round
    while world.round - start < max_rounds:
        if not force and not _legit_pending(world):
            break
        step(world)
    return world


def inject_adversary(
    world: World,
    count: int = 1,
    behavior: str = "forge_join",
    positions: Sequence[tuple[float, float]] | None = None,
) -> list[int]:
    """Drop hostile radios on the field; ids run -2, -3, ...

    Positions are drawn uniformly unless given explicitly.
    """
    if behavior not in ADVERSARY_BEHAVIORS:
        raise ValueError(f"unknown adversary behavior {behavior!r}")
    if positions is not None and len(positions) != count:
        raise ValueError("need one position per adversary")
    ids = []
    for i in range(count):
        aid = -2 - len(world.adversaries)
        if positions is not None:
            pos = positions[i]
        else:
            pos = (world.rng.uniform(0.0, world.width), world.rng.uniform(0.0, world.height))
        world.adversaries.append(Adversary(aid, pos, behavior))
        world.positions[aid] = pos
        ids.append(aid)
    world._neighbors = None
    return ids


def late_join(world: World, node: int, position: tuple[float, float] | None = None) -> None:
    """Deploy a reserve sensor, or power a departed one back up."""
    st = world.states.get(node)
    if st is not None:
        if st.phase is not Phase.LEFT:
            raise ValueError(f"{node} is already deployed")
        st.phase = Phase.IDLE
        st.dominator = None
        st.join_round = None
        st.was_orphan = False
        if position is not None:
            world.positions[node] = position
            world._neighbors = None
        return
    if node not in world.material.reserve:
        raise ValueError(f"{node} is neither departed nor held in reserve")
    world.states[node] = _fresh_state(world.material, node, tau=1)
    world.states[node].post_formation = world.formation_complete
    world.positions[node] = position if position is not None else world.planned[node]
    world._neighbors = None


def leave(world: World, node: int) -> None:
    """Schedule a graceful departure at the node's next step."""
    st = world.states.get(node)
    if st is None or st.rank not in (Rank.OS,):
        raise ValueError(f"{node} is not a deployed ordinary sensor")
    if st.phase is Phase.LEFT:
        raise ValueError(f"{node} already left")
    st.pending_leave = True


def assemble_outcome(world: World) -> ClusterOutcome:
    """Fold final node states and base-station records into one summary."""
    states = world.states
    dominators = sorted(n for n, st in states.items() if st.rank in (Rank.GD, Rank.GD_OS))
    membership = sorted(
        (n, st.dominator)
        for n, st in states.items()
        if st.rank is Rank.OS and st.phase is Phase.JOINED and st.dominator is not None
    )
    home = {n: st.dominator for n, st in states.items()}
    mediators = []
    for gd, st in states.items():
        if st.rank not in (Rank.GD, Rank.GD_OS):
            continue
        for os_id in st.mediators:
            if os_id < 0 or os_id not in states:
                continue
            own = home.get(os_id)
            if own is not None and own != gd:
                mediators.append((os_id, own, gd))
    orphan_log = []
    for os_id in sorted(world.bs.orphans):
        rec = world.bs.orphans[os_id]
        orphan_log.append((os_id, rec.resolution[0] if rec.resolution else "pending"))
    failures = sorted(
        n
        for n, st in states.items()
        if st.rank is Rank.OS and st.phase not in (Phase.JOINED, Phase.LEFT)
    )
    return ClusterOutcome(
        dominator_set=tuple(dominators),
        membership=tuple(membership),
        mediators=tuple(sorted(mediators)),
        orphan_log=tuple(orphan_log),
        coverage_failures=tuple(failures),
        message_count=tuple(sorted(world.counters.items())),
    )


@dataclass(frozen=True)
class VerifyReport:
    node_count: int
    dominator_count: int
    dominating: bool
    weakly_connected: bool
    graph_connected: bool
    fully_resolved: bool

    @property
    def ok(self) -> bool:
        return self.dominating and self.weakly_connected and self.fully_resolved


def verify_outcome(world: World, outcome: ClusterOutcome | None = None) -> VerifyReport:
    """Check the formed structure against the actual radio graph.

    The graph is the unit-disk graph over sensors still on the field; the
    base station and adversaries are not part of the dominating structure.
    """
    if outcome is None:
        outcome = assemble_outcome(world)
    active = sorted(n for n, st in world.states.items() if st.phase is not Phase.LEFT)
    index = {n: i for i, n in enumerate(active)}
    g = unit_disk_graph([world.positions[n] for n in active], world.radius)
    chosen = {index[d] for d in outcome.dominator_set if d in index}
    return VerifyReport(
        node_count=len(active),
        dominator_count=len(chosen),
        dominating=is_dominating(g, chosen),
        weakly_connected=is_wcds(g, chosen),
        graph_connected=is_connected(g),
        fully_resolved=not outcome.coverage_failures,
    )


@dataclass(frozen=True)
class RunConfig:
    """One simulated deployment, end to end."""

    groups: int
    eta: int
    key_bits: int = 128
    mode: str = "uniform"
    width: float = 100.0
    height: float = 100.0
    radius: float | None = None
    target_degree: float | None = None
    sigma: float | None = None
    reserve_fraction: float = 0.0
    adversary_count: int = 0
    adversary_behavior: str = "forge_join"
    tau: int = 1
    seed: int = 0
    max_rounds: int = 64

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(raw) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def node_count(self) -> int:
        return self.groups * (self.eta + 1)

    def resolve_radius(self) -> float:
        if (self.radius is None) == (self.target_degree is None):
            raise ValueError("give exactly one of radius or target_degree")
        if self.radius is not None:
            return self.radius
        return radius_for_expected_degree(
            self.node_count(), self.width, self.height, self.target_degree
        )


def form_deployment(
    n: int,
    eta: int,
    width: float,
    height: float,
    radius: float,
    seed: int = 0,
    mode: str = "group_clustered",
    sigma: float | None = None,
    tau: int = 1,
    max_rounds: int = 64,
) -> World:
    """Provision exactly n sensors into groups of up to eta members, deploy,
    and run cluster formation to quiescence."""
    material = provision(group_sizes_for(n, eta), seed=seed)
    placement = PlacementModel(mode=mode, width=width, height=height, radius=radius, sigma=sigma)
    world = deploy(material, placement, seed=seed + 1_000_000_007, tau=tau)
    run(world, max_rounds=max_rounds)
    return world


def simulate(config: RunConfig) -> tuple[World, ClusterOutcome, VerifyReport]:
    """Provision, deploy, form clusters, and audit one world."""
    material = provision(
        [config.eta] * config.groups,
        key_bits=config.key_bits,
        reserve_fraction=config.reserve_fraction,
        seed=config.seed,
    )
    placement = PlacementModel(
        mode=config.mode,
        width=config.width,
        height=config.height,
        radius=config.resolve_radius(),
        sigma=config.sigma,
    )
    world = deploy(material, placement, seed=config.seed + 1, tau=config.tau)
    if config.adversary_count:
        inject_adversary(world, config.adversary_count, config.adversary_behavior)
    run(world, max_rounds=config.max_rounds)
    outcome = assemble_outcome(world)
    return world, outcome, verify_outcome(world, outcome)
