import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcds.keys import (
    AuthenticationFailure,
    Key,
    KeyFountain,
    MalformedCiphertext,
    Rank,
    can_decrypt,
    decrypt,
    encrypt,
    export_material,
    group_sizes_for,
    provision,
    rekey_group,
    storage_bits,
    uniform_storage_bits,
)
from wcds.wire import (
    FLOOD_KINDS,
    MessageKind,
    pack_id,
    pack_id_key,
    pack_ids,
    unpack_id,
    unpack_id_key,
    unpack_ids,
)


class TestWire:
    def test_id_round_trip(self):
        for v in (0, 1, -1, -2, 10**12, -(10**12)):
            assert unpack_id(pack_id(v)) == v

    def test_id_list_round_trip(self):
        for ids in ((), (5,), (3, -1, 7, 7)):
            assert unpack_ids(pack_ids(ids)) == ids

    def test_id_key_round_trip(self):
        node, key_id, bits = -1, 42, b"\x00\xffkey"
        assert unpack_id_key(pack_id_key(node, key_id, bits)) == (node, key_id, bits)

    def test_truncation_rejected(self):
        with pytest.raises(ValueError):
            unpack_id(b"\x00" * 7)
        with pytest.raises(ValueError):
            unpack_ids(pack_ids([1, 2])[:-3])
        with pytest.raises(ValueError):
            unpack_id_key(b"\x00" * 9)

    def test_kind_priorities(self):
        # key installs must sort before the approvals that depend on them
        assert MessageKind.ADOPT_CMD < MessageKind.REKEY < MessageKind.JOIN_APRV
        assert FLOOD_KINDS == {
            MessageKind.GD_ERR,
            MessageKind.ORP_ERR,
            MessageKind.ADOPT_CMD,
            MessageKind.PROMOTE_CMD,
        }


class TestCipher:
    def key(self, ident=0, seed=0):
        fountain = KeyFountain(seed, 128)
        k = fountain.next_key()
        for _ in range(ident):
            k = fountain.next_key()
        return k

    def test_round_trip(self):
        k = self.key()
        ct = encrypt(k, MessageKind.JOIN_REQ, b"hello")
        assert decrypt(k, ct) == (MessageKind.JOIN_REQ, b"hello")

    def test_deterministic_bytes(self):
        a = encrypt(self.key(), MessageKind.REPORT, b"x")
        b = encrypt(self.key(), MessageKind.REPORT, b"x")
        assert a == b

    def test_wrong_key_fails(self):
        ct = encrypt(self.key(0), MessageKind.JOIN_REQ, b"body")
        with pytest.raises(AuthenticationFailure):
            decrypt(self.key(1), ct)

    def test_same_id_different_bits_fails(self):
        # a forged key with a guessed id still fails the tag check
        ct = encrypt(self.key(0, seed=1), MessageKind.JOIN_REQ, b"body")
        with pytest.raises(AuthenticationFailure):
            decrypt(self.key(0, seed=2), ct)

    def test_tampered_payload_fails(self):
        k = self.key()
        ct = encrypt(k, MessageKind.JOIN_REQ, b"body")
        bent = type(ct)(ct.key_id, ct.payload[:-1] + b"\x00", ct.auth_tag)
        if bent.payload == ct.payload:
            bent = type(ct)(ct.key_id, ct.payload[:-1] + b"\x01", ct.auth_tag)
        with pytest.raises(AuthenticationFailure):
            decrypt(k, bent)

    def test_malformed_inputs(self):
        k = self.key()
        with pytest.raises(MalformedCiphertext):
            decrypt(k, b"junk")
        ct = encrypt(k, MessageKind.JOIN_REQ, b"")
        with pytest.raises(MalformedCiphertext):
            decrypt(k, type(ct)(ct.key_id, b"", b""))

    def test_unknown_kind_byte(self):
        k = self.key()
        ct = encrypt(k, 200, b"")
        with pytest.raises(MalformedCiphertext):
            decrypt(k, ct)

    def test_can_decrypt(self):
        k = self.key()
        ct = encrypt(k, MessageKind.LEAVE, b"")
        assert can_decrypt(k, ct)
        assert not can_decrypt(self.key(1), ct)

    @given(
        kind=st.sampled_from(list(MessageKind)),
        body=st.binary(max_size=200),
        seed=st.integers(min_value=0, max_value=10_000),
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, kind, body, seed):
        k = KeyFountain(seed, 128).next_key()
        assert decrypt(k, encrypt(k, kind, body)) == (kind, body)


class TestFountain:
    def test_ascending_ids(self):
        f = KeyFountain(3, 128)
        keys = [f.next_key() for _ in range(5)]
        assert [k.id for k in keys] == [0, 1, 2, 3, 4]
        assert all(len(k.bits) == 16 for k in keys)

    def test_deterministic_across_instances(self):
        a = [KeyFountain(9, 64).next_key() for _ in range(1)]
        b = [KeyFountain(9, 64).next_key() for _ in range(1)]
        assert a == b

    def test_distinct_bits(self):
        f = KeyFountain(0, 128)
        seen = {f.next_key().bits for _ in range(1000)}
        assert len(seen) == 1000


class TestGroupSizes:
    def test_exact_splits(self):
        assert group_sizes_for(100, 9) == [9] * 10
        assert group_sizes_for(101, 9) == [9] * 10 + [0]
        assert group_sizes_for(60, 5) == [5] * 10
        assert group_sizes_for(7, 3) == [3, 2]
        assert group_sizes_for(0, 9) == []
        assert group_sizes_for(5, 0) == [0] * 5

    def test_invalid(self):
        with pytest.raises(ValueError):
            group_sizes_for(-1, 9)
        with pytest.raises(ValueError):
            group_sizes_for(5, -1)

    @given(
        n=st.integers(min_value=0, max_value=500),
        eta=st.integers(min_value=0, max_value=30),
    )
    @settings(max_examples=300, deadline=None)
    def test_partition_identities(self, n, eta):
        sizes = group_sizes_for(n, eta)
        assert sum(sizes) + len(sizes) == n
        assert all(0 <= s <= eta for s in sizes)
        assert len(sizes) == math.ceil(n / (eta + 1))


class TestProvision:
    def test_sequential_layout(self):
        m = provision([2, 2])
        assert m.groups == ((0, (1, 2)), (3, (4, 5)))
        assert m.ranks[0] is Rank.GD
        assert m.ranks[1] is Rank.OS
        assert m.home_gd[4] == 3
        assert m.home_gd[0] == 0

    def test_ring_contents(self):
        m = provision([2, 2])
        gd = m.rings[0]
        assert gd.individual is None
        assert sorted(gd.subordinate_keys) == [1, 2]
        assert gd.access_list == {1, 2}
        assert gd.key_count() == 3
        os_ring = m.rings[1]
        assert os_ring.key_count() == 2
        assert os_ring.group == gd.group

    def test_groups_do_not_share_keys(self):
        m = provision([2, 2])
        assert m.group_keys[0] != m.group_keys[3]
        ct = encrypt(m.group_keys[0], MessageKind.REPORT, b"in group 0")
        assert not can_decrypt(m.rings[4].group, ct)
        assert can_decrypt(m.rings[1].group, ct)

    def test_bs_table_covers_everyone(self):
        m = provision([3, 1])
        assert set(m.bs_table) == set(m.all_nodes())
        assert m.bs_table[1] == (m.individual_keys[1], m.group_keys[0])
        assert m.bs_table[0] == (m.group_keys[0],)

    def test_every_key_unique_at_scale(self):
        m = provision(group_sizes_for(1000, 9))
        seen_bits = set()
        seen_ids = set()
        for ring in m.rings.values():
            for k in ring.keys():
                seen_bits.add(k.bits)
                seen_ids.add(k.id)
        assert len(seen_ids) == 1000
        assert len(seen_bits) == 1000

    def test_reserve_marks_group_tails(self):
        m = provision([4, 4], reserve_fraction=0.5)
        assert m.reserve == {3, 4, 8, 9}
        assert set(m.deployed_nodes()) == {0, 1, 2, 5, 6, 7}
        # reserves are keyed like everyone else
        assert m.rings[3].key_count() == 2

    def test_determinism(self):
        a = provision([3, 3], seed=5)
        b = provision([3, 3], seed=5)
        assert a.individual_keys == b.individual_keys
        assert a.group_keys == b.group_keys
        c = provision([3, 3], seed=6)
        assert a.group_keys[0] != c.group_keys[0]

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            provision([2], key_bits=100)
        with pytest.raises(ValueError):
            provision([2], reserve_fraction=1.0)
        with pytest.raises(ValueError):
            provision([-1])


class TestStorage:
    def test_uniform_closed_form(self):
        report = uniform_storage_bits(5, 50, 10, 128)
        assert report.per_gd == (1408,) * 5
        assert report.per_os == 256
        assert report.total == 19840

    def test_closed_form_matches_provisioned_rings(self):
        m = provision([10] * 5)
        assert storage_bits(m) == uniform_storage_bits(5, 50, 10, 128)

    def test_ragged_groups(self):
        m = provision([3, 1])
        report = storage_bits(m)
        assert report.per_gd == (4 * 128, 2 * 128)
        assert report.per_os == 256
        assert report.total == 4 * 128 + 2 * 128 + 4 * 2 * 128

    def test_uniform_validation(self):
        with pytest.raises(ValueError):
            uniform_storage_bits(5, 49, 10, 128)
        with pytest.raises(ValueError):
            uniform_storage_bits(-1, 0, 0, 128)


class TestRekey:
    def test_join_mode_reaches_old_holders_and_joiner(self):
        m = provision([2])
        old = m.group_keys[0]
        new, msgs = rekey_group(m, 0, joining=1)
        assert new.id == 3
        assert [msg.scope for msg in msgs] == ["unicast", "broadcast"]
        assert msgs[0].recipient == 1

        kind, body = decrypt(m.individual_keys[1], msgs[0].ciphertext)
        assert kind is MessageKind.REKEY
        assert unpack_id_key(body) == (0, new.id, new.bits)
        kind, body = decrypt(old, msgs[1].ciphertext)
        assert unpack_id_key(body) == (0, new.id, new.bits)

        assert m.group_keys[0] == new
        assert m.rings[0].group == new

    def test_leave_mode_excludes_departed(self):
        m = provision([3])
        old = m.group_keys[0]
        new, msgs = rekey_group(m, 0, members=[1, 3])
        assert [msg.recipient for msg in msgs] == [1, 3]
        for msg in msgs:
            assert not can_decrypt(old, msg.ciphertext)
            assert not can_decrypt(m.individual_keys[2], msg.ciphertext)
        kind, body = decrypt(m.individual_keys[3], msgs[1].ciphertext)
        assert unpack_id_key(body)[1] == new.id

    def test_history_keeps_superseded_keys(self):
        m = provision([2])
        old = m.group_keys[0]
        new, _ = rekey_group(m, 0, joining=1)
        assert m.group_key_for(0, old.id) == old
        assert m.group_key_for(0, new.id) == new
        assert m.group_key_for(0, 999) is None
        assert m.group_key_for(7, old.id) is None

    def test_ids_keep_ascending_across_rotations(self):
        m = provision([2])
        first, _ = rekey_group(m, 0, joining=1)
        second, _ = rekey_group(m, 0, joining=2)
        assert first.id < second.id

    def test_invalid_targets(self):
        m = provision([2])
        with pytest.raises(ValueError):
            rekey_group(m, 1, joining=2)
        with pytest.raises(ValueError):
            rekey_group(m, 0, joining=99)
        with pytest.raises(ValueError):
            rekey_group(m, 0, members=[99])


class TestCompromiseScope:
    def test_one_ring_opens_only_its_own_links(self):
        m = provision([2, 2])
        stolen = m.rings[1].keys()  # individual of node 1 plus group key of gd 0
        samples = {
            "own_unicast": encrypt(m.individual_keys[1], MessageKind.REPORT, b"a"),
            "own_group": encrypt(m.group_keys[0], MessageKind.REPORT, b"b"),
            "peer_unicast": encrypt(m.individual_keys[2], MessageKind.REPORT, b"c"),
            "other_group": encrypt(m.group_keys[3], MessageKind.REPORT, b"d"),
            "other_unicast": encrypt(m.individual_keys[4], MessageKind.REPORT, b"e"),
        }
        opened = {
            name
            for name, ct in samples.items()
            if any(can_decrypt(k, ct) for k in stolen)
        }
        assert opened == {"own_unicast", "own_group"}


class TestExport:
    def test_structure_without_secrets(self):
        m = provision([2, 1], reserve_fraction=0.0)
        doc = export_material(m)
        text = json.dumps(doc)
        for ring in m.rings.values():
            for k in ring.keys():
                assert k.bits.hex() not in text
        assert doc["groups"][0] == {"gd": 0, "members": [1, 2], "group_key_id": 0}
        assert doc["reserve"] == []
