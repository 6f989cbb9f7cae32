"""Group-wise key pre-distribution and a modeled symmetric cipher.

Every sensor is provisioned offline before deployment: each group gets one
shared group key, each ordinary sensor an individual key, and the group
dominator carries the individual keys of its whole group. The base station
holds everything.

Encryption is modeled, not real cryptography: a keyed blake2b stream hides the
body and an 8-byte keyed tag over (key id, payload) gates decryption. That
gives the access-control semantics that matter here (right key or nothing,
tampering detected) with deterministic bytes.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .wire import MessageKind, pack_id_key

ALLOWED_KEY_BITS = (64, 128, 256)
TAG_BYTES = 8


class AuthenticationFailure(Exception):
    """Wrong key for this ciphertext, or the ciphertext was altered."""


class MalformedCiphertext(Exception):
    """Structurally invalid ciphertext, independent of any key."""


class Rank(str, Enum):
    GD = "GD"
    OS = "Os"
    GD_OS = "GD_os"
    BS = "BS"


@dataclass(frozen=True)
class Key:
    id: int
    bits: bytes


@dataclass(frozen=True)
class Ciphertext:
    key_id: int
    payload: bytes
    auth_tag: bytes


def _keystream(key: Key, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        block = hashlib.blake2b(
            counter.to_bytes(8, "big"), key=key.bits[:64], digest_size=64
        ).digest()
        out.extend(block)
        counter += 1
    return bytes(out[:length])


def _tag(key: Key, payload: bytes) -> bytes:
    mac = hashlib.blake2b(key=key.bits[:64], digest_size=TAG_BYTES)
    mac.update(key.id.to_bytes(8, "big", signed=True))
    mac.update(payload)
    return mac.digest()


def encrypt(key: Key, kind: MessageKind | int, body: bytes) -> Ciphertext:
    """Seal (kind, body) under ``key``; the kind byte travels inside the payload."""
    plain = bytes([int(kind)]) + bytes(body)
    stream = _keystream(key, len(plain))
    payload = bytes(a ^ b for a, b in zip(plain, stream))
    return Ciphertext(key.id, payload, _tag(key, payload))


def decrypt(key: Key, ct: Ciphertext) -> tuple[MessageKind, bytes]:
    """Open a ciphertext; raises AuthenticationFailure unless ``key`` sealed it."""
    if not isinstance(ct, Ciphertext):
        raise MalformedCiphertext("not a ciphertext")
    if not isinstance(ct.payload, bytes) or not isinstance(ct.auth_tag, bytes):
        raise MalformedCiphertext("payload and tag must be bytes")
    if len(ct.payload) < 1:
        raise MalformedCiphertext("payload too short for a kind byte")
    if ct.key_id != key.id:
        raise AuthenticationFailure(f"ciphertext is under key {ct.key_id}, not {key.id}")
    if _tag(key, ct.payload) != ct.auth_tag:
        raise AuthenticationFailure("tag check failed")
    stream = _keystream(key, len(ct.payload))
    plain = bytes(a ^ b for a, b in zip(ct.payload, stream))
    try:
        kind = MessageKind(plain[0])
    except ValueError as exc:
        raise MalformedCiphertext(f"unknown kind byte {plain[0]}") from exc
    return kind, plain[1:]


def can_decrypt(key: Key, ct: Ciphertext) -> bool:
    try:
        decrypt(key, ct)
    except (AuthenticationFailure, MalformedCiphertext):
        return False
    return True


class KeyFountain:
    """Deterministic stream of fresh keys with unique ascending ids.

    Ascending ids order keys by creation time, which lets receivers refuse a
    replayed older group key.
    """

    def __init__(self, seed: int, key_bits: int):
        self._rng = random.Random(seed)
        self._next = 0
        self._bytes = key_bits // 8

    def next_key(self) -> Key:
        key = Key(self._next, self._rng.randbytes(self._bytes))
        self._next += 1
        return key


@dataclass
class KeyRing:
    """What one node actually stores.

    Ordinary sensors hold their individual key plus their group key.
    Dominators hold the group key plus one individual key per authorized
    group member; they have no individual key of their own.
    """

    individual: Key | None
    group: Key
    subordinate_keys: dict[int, Key] = field(default_factory=dict)
    access_list: set[int] = field(default_factory=set)

    def keys(self) -> list[Key]:
        out = []
        if self.individual is not None:
            out.append(self.individual)
        out.append(self.group)
        out.extend(self.subordinate_keys[n] for n in sorted(self.subordinate_keys))
        return out

    def key_count(self) -> int:
        return len(self.keys())

    def bit_count(self, key_bits: int) -> int:
        return self.key_count() * key_bits


@dataclass
class KeyMaterial:
    """Full provisioning output; the base station's view of the world.

    ``group_keys`` tracks the live group key per dominator as rekeys happen.
    Individual node rings update only when the owning node processes the
    corresponding rekey message.
    """

    key_bits: int
    rings: dict[int, KeyRing]
    ranks: dict[int, Rank]
    groups: tuple[tuple[int, tuple[int, ...]], ...]
    reserve: frozenset[int]
    individual_keys: dict[int, Key]
    group_keys: dict[int, Key]
    home_gd: dict[int, int]
    fountain: KeyFountain
    group_key_history: dict[int, dict[int, Key]] = field(default_factory=dict)

    def group_key_for(self, gd: int, key_id: int) -> Key | None:
        """Look up a current or superseded group key of ``gd`` by id.

        Rotations can race messages already in flight, so both the dominator
        and the base station keep every key the group has ever used.
        """
        return self.group_key_history.get(gd, {}).get(key_id)

    @property
    def bs_table(self) -> dict[int, tuple[Key, ...]]:
        """Literal node-to-keys master table."""
        table: dict[int, tuple[Key, ...]] = {}
        for gd, members in self.groups:
            table[gd] = (self.group_keys[gd],)
            for m in members:
                table[m] = (self.individual_keys[m], self.group_keys[gd])
        return table

    def fresh_key(self) -> Key:
        return self.fountain.next_key()

    def all_nodes(self) -> tuple[int, ...]:
        out = []
        for gd, members in self.groups:
            out.append(gd)
            out.extend(members)
        return tuple(out)

    def deployed_nodes(self) -> tuple[int, ...]:
        return tuple(v for v in self.all_nodes() if v not in self.reserve)


def group_sizes_for(n: int, eta: int) -> list[int]:
    """Split n sensors into groups of one dominator plus up to ``eta`` members.

    Fills whole groups of eta + 1 nodes first; a nonzero remainder becomes one
    final short group (possibly a lone dominator).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if eta < 0:
        raise ValueError("eta must be non-negative")
    full, rem = divmod(n, eta + 1)
    sizes = [eta] * full
    if rem:
        sizes.append(rem - 1)
    return sizes


def provision(
    group_sizes: Sequence[int],
    key_bits: int = 128,
    reserve_fraction: float = 0.0,
    seed: int = 0,
) -> KeyMaterial:
    """Assign node ids, ranks, and keys for one deployment, entirely offline.

    Group i gets one dominator followed by group_sizes[i] ordinary sensors,
    ids running sequentially from zero. The last floor(size * reserve_fraction)
    members of each group are flagged as held back from initial deployment;
    they are keyed like everyone else.
    """
    if key_bits not in ALLOWED_KEY_BITS:
        raise ValueError(f"key_bits must be one of {ALLOWED_KEY_BITS}")
    if not 0.0 <= reserve_fraction < 1.0:
        raise ValueError("reserve_fraction must be in [0, 1)")
    sizes = [int(s) for s in group_sizes]
    if any(s < 0 for s in sizes):
        raise ValueError("group sizes must be non-negative")

    fountain = KeyFountain(seed, key_bits)
    rings: dict[int, KeyRing] = {}
    ranks: dict[int, Rank] = {}
    groups: list[tuple[int, tuple[int, ...]]] = []
    individual_keys: dict[int, Key] = {}
    group_keys: dict[int, Key] = {}
    history: dict[int, dict[int, Key]] = {}
    home_gd: dict[int, int] = {}
    reserve: set[int] = set()

    node = 0
    for size in sizes:
        gd = node
        node += 1
        members = tuple(range(node, node + size))
        node += size
        gkey = fountain.next_key()
        group_keys[gd] = gkey
        history[gd] = {gkey.id: gkey}
        ranks[gd] = Rank.GD
        home_gd[gd] = gd
        sub_keys: dict[int, Key] = {}
        for m in members:
            ikey = fountain.next_key()
            individual_keys[m] = ikey
            sub_keys[m] = ikey
            ranks[m] = Rank.OS
            home_gd[m] = gd
            rings[m] = KeyRing(individual=ikey, group=gkey)
        rings[gd] = KeyRing(
            individual=None,
            group=gkey,
            subordinate_keys=sub_keys,
            access_list=set(members),
        )
        groups.append((gd, members))
        held = math.floor(size * reserve_fraction)
        reserve.update(members[size - held :] if held else ())

    return KeyMaterial(
        key_bits=key_bits,
        rings=rings,
        ranks=ranks,
        groups=tuple(groups),
        reserve=frozenset(reserve),
        individual_keys=individual_keys,
        group_keys=group_keys,
        home_gd=home_gd,
        fountain=fountain,
        group_key_history=history,
    )


@dataclass(frozen=True)
class StorageReport:
    per_gd: tuple[int, ...]
    per_os: int
    total: int


def storage_bits(material: KeyMaterial) -> StorageReport:
    """Bits of key storage per dominator, per ordinary sensor, and in total."""
    k = material.key_bits
    per_gd = tuple(material.rings[gd].bit_count(k) for gd, _ in material.groups)
    total = sum(ring.bit_count(k) for ring in material.rings.values())
    return StorageReport(per_gd=per_gd, per_os=2 * k, total=total)


def uniform_storage_bits(alpha: int, beta: int, eta: int, key_bits: int) -> StorageReport:
    """Closed-form storage for ``alpha`` uniform groups of ``eta`` members.

    beta is the ordinary-sensor count and must equal alpha * eta.
    """
    if alpha < 0 or beta < 0 or eta < 0 or key_bits <= 0:
        raise ValueError("counts must be non-negative and key_bits positive")
    if beta != alpha * eta:
        raise ValueError("beta must equal alpha * eta for uniform groups")
    per_gd = (eta + 1) * key_bits
    per_os = 2 * key_bits
    total = key_bits * (alpha * (eta + 1) + 2 * beta)
    return StorageReport(per_gd=(per_gd,) * alpha, per_os=per_os, total=total)


@dataclass(frozen=True)
class RekeyMessage:
    scope: str  # "unicast" or "broadcast"
    recipient: int | None
    ciphertext: Ciphertext


def rekey_group(
    material: KeyMaterial,
    gd: int,
    joining: int | None = None,
    members: Iterable[int] = (),
) -> tuple[Key, list[RekeyMessage]]:
    """Rotate a group key and plan its distribution.

    With ``joining`` set (a node being added), the new key goes out once under
    the joiner's individual key and once under the old group key so existing
    members follow. Without a joiner (a departure), the new key goes out one
    unicast per surviving member under that member's individual key; the old
    group key is never used, so the departed node learns nothing.
    """
    if gd not in material.group_keys:
        raise ValueError(f"{gd} is not a dominator")
    old = material.group_keys[gd]
    new = material.fresh_key()
    body = pack_id_key(gd, new.id, new.bits)
    messages: list[RekeyMessage] = []
    if joining is not None:
        ikey = material.individual_keys.get(joining)
        if ikey is None:
            raise ValueError(f"{joining} has no individual key")
        messages.append(
            RekeyMessage("unicast", joining, encrypt(ikey, MessageKind.REKEY, body))
        )
        messages.append(
            RekeyMessage("broadcast", None, encrypt(old, MessageKind.REKEY, body))
        )
    else:
        for m in sorted(set(int(v) for v in members)):
            ikey = material.individual_keys.get(m)
            if ikey is None:
                raise ValueError(f"{m} has no individual key")
            messages.append(
                RekeyMessage("unicast", m, encrypt(ikey, MessageKind.REKEY, body))
            )
    material.group_keys[gd] = new
    material.rings[gd].group = new
    material.group_key_history.setdefault(gd, {})[new.id] = new
    return new, messages


def export_material(material: KeyMaterial) -> dict:
    """Public description of the provisioning: structure only, never key bytes."""
    return {
        "key_bits": material.key_bits,
        "groups": [
            {
                "gd": gd,
                "members": list(members),
                "group_key_id": material.group_keys[gd].id,
            }
            for gd, members in material.groups
        ],
        "reserve": sorted(material.reserve),
    }
