"""Deterministic cryptographic primitives shared by every other module.

Profile LLV1: hash is SHA-256, signatures are Ed25519 (32-byte public
keys, 64-byte signatures). Key derivation is flat: a 32-byte master seed
and a key index deterministically yield one keypair. All hex renderings
are lowercase without prefix.
"""

from __future__ import annotations

import hashlib
import os
import random
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .profiles import LLV1, Profile

HASH_LEN = 32
PUBKEY_LEN = 32
SIG_LEN = 64
SEED_LEN = 32

_KEY_DERIVATION_TAG = b"LLV1-KEY"


class EncodingError(ValueError):
    """Raised for malformed key, signature or hex field lengths."""


def hash_bytes(message: bytes) -> bytes:
    """SHA-256 of an arbitrary-length message; always 32 bytes."""
    return hashlib.sha256(message).digest()


def to_hex(value: bytes) -> str:
    return value.hex()


def from_hex(text: str, expected_len: int | None = None) -> bytes:
    try:
        value = bytes.fromhex(text)
    except ValueError:
        raise EncodingError(f"invalid hex string: {text!r}") from None
    if expected_len is not None and len(value) != expected_len:
        raise EncodingError(
            f"expected {expected_len} bytes, got {len(value)}: {text!r}"
        )
    return value


@dataclass(frozen=True)
class KeyPair:
    """One derived signing keypair. `secret` is the raw Ed25519 seed."""

    index: int
    public_key: bytes
    secret: bytes = field(repr=False)


def new_seed(rng: random.Random | None = None) -> bytes:
    """Fresh 32-byte master seed from `rng` (tests) or OS entropy."""
    if rng is None:
        return os.urandom(SEED_LEN)
    return rng.randbytes(SEED_LEN)


def derive_keypair(seed: bytes, index: int) -> KeyPair:
    """Deterministically derive keypair `index` from a master seed.

    Same (seed, index) always yields the same pair; distinct indexes give
    distinct keys. Derivation is flat, not hierarchical: the protocol
    only needs determinism and per-index uniqueness.
    """
    if len(seed) != SEED_LEN:
        raise EncodingError(f"seed must be {SEED_LEN} bytes, got {len(seed)}")
    if index < 0:
        raise ValueError("key index must be non-negative")
    secret = hash_bytes(_KEY_DERIVATION_TAG + seed + index.to_bytes(8, "big"))
    private = Ed25519PrivateKey.from_private_bytes(secret)
    public = private.public_key().public_bytes_raw()
    return KeyPair(index=index, public_key=public, secret=secret)


def sign(secret: bytes, payload: bytes) -> bytes:
    """Ed25519 signature (64 bytes) over a canonical payload."""
    if len(secret) != SEED_LEN:
        raise EncodingError(f"secret key must be {SEED_LEN} bytes")
    return Ed25519PrivateKey.from_private_bytes(secret).sign(payload)


def verify(public_key: bytes, payload: bytes, signature: bytes) -> bool:
    """True iff `signature` verifies over `payload` under `public_key`."""
    if len(public_key) != PUBKEY_LEN:
        raise EncodingError(f"public key must be {PUBKEY_LEN} bytes")
    if len(signature) != SIG_LEN:
        raise EncodingError(f"signature must be {SIG_LEN} bytes")
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, payload)
    except InvalidSignature:
        return False
    return True


def gen_nonce(rng: random.Random | None = None, profile: Profile = LLV1) -> bytes:
    """Random nonce of the profile's length.

    `rng` is a seeded generator in simulations (replayable draws) and OS
    entropy in production. A failing OS entropy source raises, it never
    degrades.
    """
    if rng is None:
        return os.urandom(profile.nonce_len)
    return rng.randbytes(profile.nonce_len)


# --- mnemonic encoding ----------------------------------------------------
#
# A fixed 2048-word dictionary built from unambiguous syllable parts
# (1-char onset + all-vowel nucleus + consonant-initial coda), so word
# boundaries and indexes are stable. A seed maps to 24 words: 256 entropy
# bits plus an 8-bit checksum, 11 bits per word. The encoding is a
# bijection on valid word sequences; the protocol itself only ever needs
# the raw 32-byte seed.

_ONSETS = "bdfghklmnprstvwz"
_NUCLEI = ("a", "e", "i", "o", "u", "ai", "ee", "ou")
_CODAS = (
    "b", "ch", "d", "f", "g", "k", "l", "m",
    "n", "p", "r", "s", "sh", "t", "v", "z",
)

WORDLIST: tuple[str, ...] = tuple(
    onset + nucleus + coda
    for onset in _ONSETS
    for nucleus in _NUCLEI
    for coda in _CODAS
)
_WORD_INDEX = {word: i for i, word in enumerate(WORDLIST)}

_MNEMONIC_WORDS = 24  # (256 + 8) / 11


def seed_to_mnemonic(seed: bytes) -> str:
    """Render a 32-byte seed as 24 checksummed dictionary words."""
    if len(seed) != SEED_LEN:
        raise EncodingError(f"seed must be {SEED_LEN} bytes, got {len(seed)}")
    acc = int.from_bytes(seed + hash_bytes(seed)[:1], "big")
    words = []
    for position in reversed(range(_MNEMONIC_WORDS)):
        words.append(WORDLIST[(acc >> (11 * position)) & 0x7FF])
    return " ".join(words)


def mnemonic_to_seed(mnemonic: str) -> bytes:
    """Inverse of `seed_to_mnemonic`; rejects bad words and bad checksums."""
    words = mnemonic.split()
    if len(words) != _MNEMONIC_WORDS:
        raise EncodingError(f"mnemonic must have {_MNEMONIC_WORDS} words")
    acc = 0
    for word in words:
        try:
            acc = (acc << 11) | _WORD_INDEX[word]
        except KeyError:
            raise EncodingError(f"unknown mnemonic word: {word!r}") from None
    raw = acc.to_bytes(SEED_LEN + 1, "big")
    seed, checksum = raw[:SEED_LEN], raw[SEED_LEN:]
    if hash_bytes(seed)[:1] != checksum:
        raise EncodingError("mnemonic checksum mismatch")
    return seed
