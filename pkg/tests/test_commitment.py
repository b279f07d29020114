from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from liquidledger.commitment import (
    compute_stage,
    genesis_placeholder,
    inner_commitment,
    unit_id,
    verify_stage,
)
from liquidledger.crypto import derive_keypair, hash_bytes

from conftest import TEST_SEED, load_fixture


def test_inner_commitment_deterministic_and_order_sensitive():
    h_n, h_p = hash_bytes(b"n"), hash_bytes(b"p")
    assert inner_commitment(h_n, h_p) == inner_commitment(h_n, h_p)
    assert inner_commitment(h_n, h_p) != inner_commitment(h_p, h_n)


def test_inner_commitment_is_hash_of_concatenation():
    h_n, h_p = hash_bytes(b"n"), hash_bytes(b"p")
    assert inner_commitment(h_n, h_p) == hash_bytes(h_n + h_p)


def test_golden_commitment_values():
    golden = load_fixture("commitment.json")
    h_n = bytes.fromhex(golden["h_n"])
    h_p = bytes.fromhex(golden["h_p"])
    prev = bytes.fromhex(golden["prev"])
    inner = inner_commitment(h_n, h_p)
    assert inner.hex() == golden["inner"]
    assert unit_id(inner, prev).hex() == golden["unit"]
    assert genesis_placeholder().hex() == golden["placeholder"]


def test_genesis_placeholder_constant_and_composed():
    h0 = hash_bytes(b"\x00")
    assert genesis_placeholder() == hash_bytes(h0 + h0)
    assert genesis_placeholder() == genesis_placeholder()
    assert genesis_placeholder() != hash_bytes(b"")


def test_three_stage_chain_reproduces_golden():
    golden = load_fixture("commitment.json")
    prev = genesis_placeholder()
    for stage in golden["chain"]:
        nonce = bytes.fromhex(stage["nonce"])
        kp = derive_keypair(TEST_SEED, stage["key_index"])
        secrets, inner, unit = compute_stage(nonce, kp.public_key, prev)
        assert unit.hex() == stage["unit"]
        assert unit == unit_id(inner_commitment(secrets.nonce_hash, secrets.pubkey_hash), prev)
        assert verify_stage(secrets.nonce_hash, kp.public_key, prev, unit)
        prev = unit


def test_unit_id_differs_for_different_prev():
    inner = hash_bytes(b"inner")
    assert unit_id(inner, hash_bytes(b"a")) != unit_id(inner, hash_bytes(b"b"))


def test_unit_id_has_no_observed_fixed_point():
    rng = random.Random(20)
    for _ in range(1000):
        inner, prev = rng.randbytes(32), rng.randbytes(32)
        assert unit_id(inner, prev) != prev


@settings(max_examples=100)
@given(
    nonce=st.binary(min_size=1, max_size=64),
    key_index=st.integers(min_value=0, max_value=31),
    prev=st.binary(min_size=32, max_size=32),
)
def test_reconstruction_property(nonce, key_index, prev):
    pk = derive_keypair(TEST_SEED, key_index).public_key
    secrets, _, unit = compute_stage(nonce, pk, prev)
    assert verify_stage(secrets.nonce_hash, pk, prev, unit)


def test_verify_stage_rejects_any_tampered_element():
    rng = random.Random(21)
    pk = derive_keypair(TEST_SEED, 0).public_key
    false_accepts = 0
    for _ in range(10_000):
        nonce, prev = rng.randbytes(32), rng.randbytes(32)
        secrets, _, unit = compute_stage(nonce, pk, prev)
        which = rng.randrange(4)
        h_n, key, pre, claimed = secrets.nonce_hash, pk, prev, unit
        if which == 0:
            h_n = rng.randbytes(32)
        elif which == 1:
            key = rng.randbytes(32)
        elif which == 2:
            pre = rng.randbytes(32)
        else:
            claimed = rng.randbytes(32)
        false_accepts += verify_stage(h_n, key, pre, claimed)
    assert false_accepts == 0


def test_claimed_genesis_placeholder_never_verifies():
    rng = random.Random(22)
    placeholder = genesis_placeholder()
    for _ in range(2000):
        assert not verify_stage(
            rng.randbytes(32), rng.randbytes(32), rng.randbytes(32), placeholder
        )


def test_stage_injectivity_in_practice():
    # Distinct (inner, prev) pairs never collide on unit ids in a large
    # random sample.
    rng = random.Random(23)
    seen: dict[bytes, tuple[bytes, bytes]] = {}
    for _ in range(100_000):
        inner, prev = rng.randbytes(32), rng.randbytes(32)
        unit = unit_id(inner, prev)
        assert seen.setdefault(unit, (inner, prev)) == (inner, prev)
