"""Round-synchronous secure cluster formation over pre-keyed groups.

Nodes exchange local broadcasts in lockstep rounds. An ordinary sensor
announces itself under its individual key; only its own dominator can read
that and answer with a group-keyed approval. A sensor that hears no readable
approval in time declares itself orphaned and floods an error toward the base
station, which matches it against dominator reports and either hands it to an
adjacent dominator (with its individual key) or promotes it to be its own
dominator.

The step functions are pure given their inputs: each consumes one node's
inbox for the round and returns the outbox to broadcast next round. The
simulator owns all state and applies steps in a fixed node order. Inbox
processing order, tie-breaks, and sequence numbers are all deterministic, so
a seeded run is reproducible byte for byte.

Envelope sender and kind ride in the clear and are unauthenticated transport
hints; nothing is trusted for admission or resolution unless the ciphertext
opens under the expected key and its inner kind and ids agree with the
envelope.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable

from .keys import (
    AuthenticationFailure,
    Ciphertext,
    Key,
    KeyMaterial,
    KeyRing,
    MalformedCiphertext,
    Rank,
    decrypt,
    encrypt,
    rekey_group,
)
from .wire import (
    FLOOD_KINDS,
    MessageKind,
    pack_id,
    pack_id_key,
    pack_ids,
    unpack_id,
    unpack_id_key,
    unpack_ids,
)

#: Rounds an announcing sensor waits for a readable approval before
#: declaring itself orphaned.
APPROVAL_TIMEOUT = 2

#: Rounds the base station collects dominator reports for one orphan before
#: deciding between adoption and promotion.
MATCH_WINDOW = 4

#: The base station's node id on the plane.
BS_ID = -1


class Phase(str, Enum):
    IDLE = "idle"
    AWAITING = "awaiting_approval"
    JOINED = "joined"
    ORPHAN = "orphan"
    PROMOTED = "promoted"
    LEFT = "left"


@dataclass(frozen=True)
class Envelope:
    """One radio transmission.

    ``sender`` is the claimed origin and ``seq`` its per-origin sequence
    number; together they identify a flooded message across relays.
    ``transmitter`` is the entity whose radio actually emitted this copy,
    supplied by the transport; receiving a copy whose transmitter equals its
    sender is what "heard at one hop" means.
    """

    sender: int
    kind: MessageKind
    ciphertext: Ciphertext
    seq: int
    transmitter: int


@dataclass
class NodeState:
    id: int
    rank: Rank
    ring: KeyRing
    tau: int = 1
    phase: Phase = Phase.IDLE
    dominator: int | None = None
    neighbor_dominators: set[int] = field(default_factory=set)
    subordinates: set[int] = field(default_factory=set)
    mediators: set[int] = field(default_factory=set)
    join_round: int | None = None
    was_orphan: bool = False
    post_formation: bool = False
    pending_leave: bool = False
    seen_floods: set[tuple[int, int, int]] = field(default_factory=set)
    reported_orphans: set[int] = field(default_factory=set)
    report_inbox: list[tuple[int, bytes]] = field(default_factory=list)
    seq: int = 0


@dataclass
class OrphanRecord:
    os_id: int
    observed: tuple[int, ...]
    received_round: int
    reports: set[int] = field(default_factory=set)
    decided: bool = False
    resolution: tuple[str, int | None] | None = None


@dataclass
class BSState:
    id: int = BS_ID
    orphans: dict[int, OrphanRecord] = field(default_factory=dict)
    audit: list[tuple[int, int, str]] = field(default_factory=list)
    seen_floods: set[tuple[int, int, int]] = field(default_factory=set)
    seq: int = 0


@dataclass(frozen=True)
class ClusterOutcome:
    """Final shape of one formation run.

    ``message_count`` counts transmissions per kind, relays included.
    ``coverage_failures`` lists sensors whose orphan flood never produced a
    resolution, which can only happen when the field is physically split.
    """

    dominator_set: tuple[int, ...]
    membership: tuple[tuple[int, int], ...]
    mediators: tuple[tuple[int, int, int], ...]
    orphan_log: tuple[tuple[int, str], ...]
    coverage_failures: tuple[int, ...]
    message_count: tuple[tuple[str, int], ...]

    @property
    def membership_map(self) -> dict[int, int]:
        return dict(self.membership)

    @property
    def counts(self) -> dict[str, int]:
        return dict(self.message_count)

    def to_dict(self) -> dict:
        return {
            "dominator_set": list(self.dominator_set),
            "membership": [list(pair) for pair in self.membership],
            "mediators": [list(t) for t in self.mediators],
            "orphan_log": [list(pair) for pair in self.orphan_log],
            "coverage_failures": list(self.coverage_failures),
            "message_count": {k: v for k, v in self.message_count},
        }


def _note(events: list | None, round_no: int, node: int, event: str, **detail) -> None:
    if events is not None:
        events.append({"round": round_no, "node": node, "event": event, "detail": detail})


def _next_seq(state) -> int:
    state.seq += 1
    return state.seq


def _inbox_key(env: Envelope):
    return (int(env.kind), env.sender, env.seq, env.transmitter)


def _hop1(env: Envelope) -> bool:
    return env.transmitter == env.sender


def _relay(state, env: Envelope, out: list[Envelope]) -> bool:
    """Handle flood fan-out; False means this copy was already seen."""
    if env.kind not in FLOOD_KINDS:
        return True
    fkey = (env.sender, env.seq, int(env.kind))
    if fkey in state.seen_floods:
        return False
    state.seen_floods.add(fkey)
    out.append(replace(env, transmitter=state.id))
    return True


def _flood_origin(state, kind: MessageKind, ct: Ciphertext) -> Envelope:
    seq = _next_seq(state)
    state.seen_floods.add((state.id, seq, int(kind)))
    return Envelope(state.id, kind, ct, seq, state.id)


# ---------------------------------------------------------------- ordinary sensor


def os_step(
    state: NodeState,
    inbox: Iterable[Envelope],
    round_no: int,
    events: list | None = None,
) -> tuple[NodeState, list[Envelope]]:
    """Advance one ordinary sensor by one round."""
    out: list[Envelope] = []
    if state.phase is Phase.LEFT:
        return state, out

    if state.join_round is None:
        ct = encrypt(state.ring.individual, MessageKind.JOIN_REQ, b"")
        out.append(Envelope(state.id, MessageKind.JOIN_REQ, ct, _next_seq(state), state.id))
        state.join_round = round_no
        state.phase = Phase.AWAITING
        _note(events, round_no, state.id, "join_request")

    for env in sorted(inbox, key=_inbox_key):
        if not _relay(state, env, out):
            continue
        if env.kind is MessageKind.REKEY:
            _os_rekey(state, env, round_no, events)
        elif env.kind is MessageKind.JOIN_APRV:
            _os_approval(state, env, round_no, events)
        elif env.kind is MessageKind.PROMOTE_CMD:
            _os_promote(state, env, round_no, events)
        # Other kinds are relayed (when floods) or ignored by ordinary sensors.

    if state.phase is Phase.AWAITING and round_no >= state.join_round + APPROVAL_TIMEOUT:
        state.phase = Phase.ORPHAN
        state.was_orphan = True
        observed = sorted(state.neighbor_dominators)
        ct = encrypt(state.ring.individual, MessageKind.GD_ERR, pack_ids(observed))
        out.append(_flood_origin(state, MessageKind.GD_ERR, ct))
        _note(events, round_no, state.id, "orphaned", observed=observed)

    if state.pending_leave:
        if state.phase is Phase.JOINED:
            ct = encrypt(state.ring.individual, MessageKind.LEAVE, b"")
            out.append(Envelope(state.id, MessageKind.LEAVE, ct, _next_seq(state), state.id))
        state.pending_leave = False
        state.phase = Phase.LEFT
        _note(events, round_no, state.id, "left")

    return state, out


def _os_rekey(state: NodeState, env: Envelope, round_no: int, events) -> None:
    ring = state.ring
    ct = env.ciphertext
    if ring.individual is not None and ct.key_id == ring.individual.id:
        key = ring.individual
    elif ct.key_id == ring.group.id:
        key = ring.group
    else:
        return
    try:
        kind, body = decrypt(key, ct)
    except (AuthenticationFailure, MalformedCiphertext):
        return
    if kind is not MessageKind.REKEY:
        return
    gd, key_id, bits = unpack_id_key(body)
    # Fresh keys have larger ids; refusing older ones defeats replayed rekeys.
    if key_id > ring.group.id:
        ring.group = Key(key_id, bits)
        _note(events, round_no, state.id, "group_key_installed", gd=gd, key=key_id)


def _os_approval(state: NodeState, env: Envelope, round_no: int, events) -> None:
    try:
        kind, body = decrypt(state.ring.group, env.ciphertext)
    except AuthenticationFailure:
        # A dominator is talking to some group of ours in range, just not to us.
        if _hop1(env):
            state.neighbor_dominators.add(env.sender)
            _note(events, round_no, state.id, "neighbor_dominator", gd=env.sender)
        return
    except MalformedCiphertext:
        return
    if kind is not MessageKind.JOIN_APRV or not _hop1(env):
        return
    try:
        approver, _member = unpack_ids(body)
    except ValueError:
        return
    if approver != env.sender:
        return
    if state.dominator is None and state.phase in (Phase.AWAITING, Phase.ORPHAN):
        state.dominator = env.sender
        state.phase = Phase.JOINED
        event = "adopted" if state.was_orphan else "joined"
        _note(events, round_no, state.id, event, gd=env.sender)


def _os_promote(state: NodeState, env: Envelope, round_no: int, events) -> None:
    try:
        kind, _ = decrypt(state.ring.individual, env.ciphertext)
    except (AuthenticationFailure, MalformedCiphertext):
        return
    if kind is not MessageKind.PROMOTE_CMD or state.phase is not Phase.ORPHAN:
        return
    state.rank = Rank.GD_OS
    state.phase = Phase.PROMOTED
    _note(events, round_no, state.id, "promoted")


# ---------------------------------------------------------------- group dominator


def gd_step(
    state: NodeState,
    inbox: Iterable[Envelope],
    round_no: int,
    material: KeyMaterial,
    events: list | None = None,
) -> tuple[NodeState, list[Envelope]]:
    """Advance one dominator (provisioned or promoted) by one round."""
    out: list[Envelope] = []
    for env in sorted(inbox, key=_inbox_key):
        if not _relay(state, env, out):
            continue
        if env.kind is MessageKind.JOIN_REQ:
            _gd_join_req(state, env, round_no, material, out, events)
        elif env.kind is MessageKind.GD_ERR:
            _gd_orphan_heard(state, env, round_no, out, events)
        elif env.kind is MessageKind.ADOPT_CMD:
            _gd_adopt(state, env, round_no, material, out, events)
        elif env.kind is MessageKind.LEAVE:
            _gd_leave(state, env, round_no, material, out, events)
        elif env.kind is MessageKind.REPORT:
            _gd_report(state, env, events)
    return state, out


def _approve_envelope(state: NodeState, member: int) -> Envelope:
    body = pack_ids([state.id, member])
    ct = encrypt(state.ring.group, MessageKind.JOIN_APRV, body)
    return Envelope(state.id, MessageKind.JOIN_APRV, ct, _next_seq(state), state.id)


def _admit_with_rekey(state, material, member, out, round_no, events) -> None:
    new, msgs = rekey_group(material, state.id, joining=member)
    for m in msgs:
        out.append(Envelope(state.id, MessageKind.REKEY, m.ciphertext, _next_seq(state), state.id))
    out.append(_approve_envelope(state, member))
    _note(events, round_no, state.id, "rekeyed", joining=member, key=new.id)


def _gd_join_req(state, env, round_no, material, out, events) -> None:
    hop1 = _hop1(env)
    key = state.ring.subordinate_keys.get(env.sender)
    authentic = False
    if key is not None and env.ciphertext.key_id == key.id:
        try:
            kind, _ = decrypt(key, env.ciphertext)
            authentic = kind is MessageKind.JOIN_REQ
        except (AuthenticationFailure, MalformedCiphertext):
            authentic = False
    if not authentic:
        if hop1:
            # Someone else's sensor (or noise) announcing in our range.
            state.mediators.add(env.sender)
            _note(events, round_no, state.id, "foreign_announce", os=env.sender)
        return
    if not hop1 or env.sender not in state.ring.access_list:
        return
    newly = env.sender not in state.subordinates
    state.subordinates.add(env.sender)
    if newly:
        _note(events, round_no, state.id, "approved", os=env.sender)
    if newly and state.post_formation:
        _admit_with_rekey(state, material, env.sender, out, round_no, events)
    else:
        out.append(_approve_envelope(state, env.sender))


def _gd_orphan_heard(state, env, round_no, out, events) -> None:
    if not _hop1(env):
        return
    if state.rank is not Rank.GD:
        return  # promoted heads hold no spare group, so they cannot adopt
    if env.sender in state.reported_orphans or env.sender in state.subordinates:
        return
    state.reported_orphans.add(env.sender)
    ct = encrypt(state.ring.group, MessageKind.ORP_ERR, pack_id(env.sender))
    out.append(_flood_origin(state, MessageKind.ORP_ERR, ct))
    _note(events, round_no, state.id, "orphan_reported", os=env.sender)


def _gd_adopt(state, env, round_no, material, out, events) -> None:
    key = material.group_key_for(state.id, env.ciphertext.key_id)
    if key is None:
        return
    try:
        kind, body = decrypt(key, env.ciphertext)
    except (AuthenticationFailure, MalformedCiphertext):
        return
    if kind is not MessageKind.ADOPT_CMD:
        return
    orphan, key_id, bits = unpack_id_key(body)
    if orphan in state.subordinates:
        return
    state.ring.subordinate_keys[orphan] = Key(key_id, bits)
    state.ring.access_list.add(orphan)
    state.subordinates.add(orphan)
    _note(events, round_no, state.id, "adopting", os=orphan)
    _admit_with_rekey(state, material, orphan, out, round_no, events)


def _gd_leave(state, env, round_no, material, out, events) -> None:
    if not _hop1(env):
        return
    key = state.ring.subordinate_keys.get(env.sender)
    if key is None or env.ciphertext.key_id != key.id:
        return
    try:
        kind, _ = decrypt(key, env.ciphertext)
    except (AuthenticationFailure, MalformedCiphertext):
        return
    if kind is not MessageKind.LEAVE or env.sender not in state.subordinates:
        return
    state.subordinates.discard(env.sender)
    _note(events, round_no, state.id, "member_left", os=env.sender)
    _, msgs = rekey_group(material, state.id, members=sorted(state.subordinates))
    for m in msgs:
        out.append(Envelope(state.id, MessageKind.REKEY, m.ciphertext, _next_seq(state), state.id))


def _gd_report(state, env, events) -> None:
    key = state.ring.subordinate_keys.get(env.sender)
    if key is None or env.ciphertext.key_id != key.id:
        return
    try:
        kind, body = decrypt(key, env.ciphertext)
    except (AuthenticationFailure, MalformedCiphertext):
        return
    if kind is MessageKind.REPORT:
        state.report_inbox.append((env.sender, body))


def validate_report(
    state: NodeState,
    reports: Iterable[tuple[int, bytes]],
    tau: int | None = None,
) -> bool:
    """Accept iff at least tau distinct current subordinates sent byte-identical bodies.

    Reports attributed to anyone outside the current subordinate set are
    dropped before counting.
    """
    tau = state.tau if tau is None else tau
    tallies: dict[bytes, set[int]] = {}
    for os_id, body in reports:
        if os_id not in state.subordinates:
            continue
        tallies.setdefault(bytes(body), set()).add(os_id)
    return any(len(senders) >= tau for senders in tallies.values())


# ---------------------------------------------------------------- base station


def _bs_flood(bs: BSState, kind: MessageKind, ct: Ciphertext) -> Envelope:
    bs.seq += 1
    bs.seen_floods.add((bs.id, bs.seq, int(kind)))
    return Envelope(bs.id, kind, ct, bs.seq, bs.id)


def bs_step(
    bs: BSState,
    inbox: Iterable[Envelope],
    round_no: int,
    material: KeyMaterial,
    events: list | None = None,
) -> tuple[BSState, list[Envelope]]:
    """Advance the base station by one round.

    The base station consumes floods without relaying; every flow it takes
    part in either terminates at it or starts from it.
    """
    out: list[Envelope] = []
    for env in sorted(inbox, key=_inbox_key):
        if env.kind in FLOOD_KINDS:
            fkey = (env.sender, env.seq, int(env.kind))
            if fkey in bs.seen_floods:
                continue
            bs.seen_floods.add(fkey)
        if env.kind is MessageKind.GD_ERR:
            _bs_gd_err(bs, env, round_no, material, events)
        elif env.kind is MessageKind.ORP_ERR:
            _bs_orp_err(bs, env, round_no, material, events)

    for os_id in sorted(bs.orphans):
        rec = bs.orphans[os_id]
        if rec.decided or round_no < rec.received_round + MATCH_WINDOW:
            continue
        rec.decided = True
        reporters = sorted(rec.reports)
        ikey = material.individual_keys[os_id]
        if reporters:
            seen_by_orphan = [g for g in reporters if g in rec.observed]
            adopter = min(seen_by_orphan) if seen_by_orphan else min(reporters)
            body = pack_id_key(os_id, ikey.id, ikey.bits)
            gkey = material.group_keys[adopter]
            out.append(_bs_flood(bs, MessageKind.ADOPT_CMD, encrypt(gkey, MessageKind.ADOPT_CMD, body)))
            rec.resolution = ("adopted", adopter)
            _note(events, round_no, bs.id, "adopt_command", orphan=os_id, adopter=adopter)
        else:
            out.append(_bs_flood(bs, MessageKind.PROMOTE_CMD, encrypt(ikey, MessageKind.PROMOTE_CMD, b"")))
            rec.resolution = ("promoted", None)
            _note(events, round_no, bs.id, "promote_command", orphan=os_id)
    return bs, out


def _bs_gd_err(bs, env, round_no, material, events) -> None:
    ikey = material.individual_keys.get(env.sender)
    if ikey is None or ikey.id != env.ciphertext.key_id:
        bs.audit.append((round_no, env.sender, "unknown_orphan_id"))
        _note(events, round_no, bs.id, "audit_discard", sender=env.sender, reason="unknown_orphan_id")
        return
    try:
        kind, body = decrypt(ikey, env.ciphertext)
        observed = unpack_ids(body)
    except (AuthenticationFailure, MalformedCiphertext, ValueError):
        bs.audit.append((round_no, env.sender, "bad_orphan_report"))
        _note(events, round_no, bs.id, "audit_discard", sender=env.sender, reason="bad_orphan_report")
        return
    if kind is not MessageKind.GD_ERR:
        return
    existing = bs.orphans.get(env.sender)
    if existing is not None and not existing.decided:
        return
    bs.orphans[env.sender] = OrphanRecord(env.sender, observed, round_no)
    _note(events, round_no, bs.id, "orphan_recorded", os=env.sender, observed=list(observed))


def _bs_orp_err(bs, env, round_no, material, events) -> None:
    key = material.group_key_for(env.sender, env.ciphertext.key_id)
    if key is None:
        bs.audit.append((round_no, env.sender, "unknown_reporter"))
        _note(events, round_no, bs.id, "audit_discard", sender=env.sender, reason="unknown_reporter")
        return
    try:
        kind, body = decrypt(key, env.ciphertext)
        orphan = unpack_id(body)
    except (AuthenticationFailure, MalformedCiphertext, ValueError):
        bs.audit.append((round_no, env.sender, "bad_report"))
        _note(events, round_no, bs.id, "audit_discard", sender=env.sender, reason="bad_report")
        return
    if kind is not MessageKind.ORP_ERR:
        return
    rec = bs.orphans.get(orphan)
    if rec is None:
        bs.audit.append((round_no, env.sender, "stray_report"))
        _note(events, round_no, bs.id, "audit_discard", sender=env.sender, reason="stray_report")
        return
    if not rec.decided:
        rec.reports.add(env.sender)
