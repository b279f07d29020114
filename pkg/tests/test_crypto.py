from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liquidledger import crypto
from liquidledger.crypto import (
    EncodingError,
    derive_keypair,
    gen_nonce,
    hash_bytes,
    mnemonic_to_seed,
    seed_to_mnemonic,
    sign,
    verify,
)
from liquidledger.profiles import LLV1, TOY8

from conftest import TEST_SEED, load_fixture

# Published SHA-256 test vectors for the reference hash profile.
SHA256_EMPTY = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
SHA256_ABC = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_hash_standard_vectors():
    assert hash_bytes(b"").hex() == SHA256_EMPTY
    assert hash_bytes(b"abc").hex() == SHA256_ABC


def test_hash_deterministic_on_random_inputs():
    rng = random.Random(1)
    for _ in range(1000):
        msg = rng.randbytes(rng.randrange(0, 200))
        assert hash_bytes(msg) == hash_bytes(msg)
        assert len(hash_bytes(msg)) == 32


def test_hash_avalanche():
    # Flipping one input bit should flip ~half the output bits; require
    # an average of at least 100/256 as a loose statistical floor.
    rng = random.Random(2)
    total = 0
    trials = 1000
    for _ in range(trials):
        msg = bytearray(rng.randbytes(32))
        base = hash_bytes(bytes(msg))
        bit = rng.randrange(256)
        msg[bit // 8] ^= 1 << (bit % 8)
        flipped = hash_bytes(bytes(msg))
        total += sum(
            bin(a ^ b).count("1") for a, b in zip(base, flipped)
        )
    assert total / trials >= 100


def test_derive_keypair_deterministic():
    a = derive_keypair(TEST_SEED, 0)
    b = derive_keypair(TEST_SEED, 0)
    assert a.public_key == b.public_key
    assert a.secret == b.secret


def test_derive_keypair_distinct_indexes():
    keys = {derive_keypair(TEST_SEED, i).public_key for i in range(64)}
    assert len(keys) == 64


def test_derive_keypair_golden():
    golden = load_fixture("keys.json")
    assert bytes.fromhex(golden["seed"]) == TEST_SEED
    for i, expected in enumerate(golden["public_keys"]):
        assert derive_keypair(TEST_SEED, i).public_key.hex() == expected


def test_derive_keypair_rejects_bad_args():
    with pytest.raises(EncodingError):
        derive_keypair(b"short", 0)
    with pytest.raises(ValueError):
        derive_keypair(TEST_SEED, -1)


def test_sign_verify_roundtrip():
    kp = derive_keypair(TEST_SEED, 3)
    payload = b"canonical payload bytes"
    sig = sign(kp.secret, payload)
    assert len(sig) == 64
    assert verify(kp.public_key, payload, sig)


def test_verify_rejects_flipped_bit_and_wrong_key():
    kp = derive_keypair(TEST_SEED, 4)
    other = derive_keypair(TEST_SEED, 5)
    payload = b"payload"
    sig = sign(kp.secret, payload)
    assert not verify(kp.public_key, b"Payload", sig)
    assert not verify(other.public_key, payload, sig)


def test_verify_rejects_malformed_lengths():
    kp = derive_keypair(TEST_SEED, 6)
    sig = sign(kp.secret, b"x")
    with pytest.raises(EncodingError):
        verify(kp.public_key[:-1], b"x", sig)
    with pytest.raises(EncodingError):
        verify(kp.public_key, b"x", sig[:-1])


def test_signature_soundness_bulk():
    # No wrong-key verification succeeds over many random pairs.
    rng = random.Random(3)
    kp = derive_keypair(TEST_SEED, 7)
    wrong = derive_keypair(TEST_SEED, 8)
    hits = 0
    for _ in range(10_000):
        payload = rng.randbytes(40)
        sig = sign(kp.secret, payload)
        hits += verify(wrong.public_key, payload, sig)
    assert hits == 0


def test_gen_nonce_seeded_is_replayable():
    a = random.Random(9)
    b = random.Random(9)
    seq_a = [gen_nonce(a) for _ in range(10)]
    seq_b = [gen_nonce(b) for _ in range(10)]
    assert seq_a == seq_b
    assert len(set(seq_a)) == 10
    assert all(len(n) == 32 for n in seq_a)


def test_gen_nonce_profile_length():
    rng = random.Random(10)
    assert len(gen_nonce(rng, LLV1)) == 32
    assert len(gen_nonce(rng, TOY8)) == 1


def test_gen_nonce_no_collisions_birthday_bound():
    rng = random.Random(11)
    draws = {gen_nonce(rng) for _ in range(100_000)}
    assert len(draws) == 100_000


def test_wordlist_is_fixed_and_unique():
    assert len(crypto.WORDLIST) == 2048
    assert len(set(crypto.WORDLIST)) == 2048


def test_mnemonic_roundtrip_fixed_seed():
    words = seed_to_mnemonic(TEST_SEED)
    assert len(words.split()) == 24
    assert mnemonic_to_seed(words) == TEST_SEED


@settings(max_examples=50)
@given(st.binary(min_size=32, max_size=32))
def test_mnemonic_bijection(seed):
    assert mnemonic_to_seed(seed_to_mnemonic(seed)) == seed


def test_mnemonic_rejects_bad_checksum_and_words():
    words = seed_to_mnemonic(TEST_SEED).split()
    swapped = " ".join([words[1], words[0], *words[2:]])
    if swapped != " ".join(words):
        with pytest.raises(EncodingError):
            mnemonic_to_seed(swapped)
    with pytest.raises(EncodingError):
        mnemonic_to_seed(" ".join(["notaword"] * 24))
    with pytest.raises(EncodingError):
        mnemonic_to_seed(" ".join(words[:23]))
