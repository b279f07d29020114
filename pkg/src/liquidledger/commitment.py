"""Voting-power unit identifiers.

A unit at one stage of its life is the root of a fixed three-leaf
commitment: hash(hash(nonce_hash || pubkey_hash) || previous_unit). The
nonce hides the owner; the key proves ownership when spent; the previous
unit chains the stages. Unowned units descend from a constant placeholder
root built from a single zero byte.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import HASH_LEN, hash_bytes

UNIT_HEX_LEN = 64


@dataclass(frozen=True)
class StageSecrets:
    """The two separable hashes of one stage: h_n = H(nonce), h_p = H(pk)."""

    nonce_hash: bytes
    pubkey_hash: bytes


def inner_commitment(nonce_hash: bytes, pubkey_hash: bytes) -> bytes:
    """hash(h_n || h_p), nonce side always first."""
    return hash_bytes(nonce_hash + pubkey_hash)


def unit_id(inner: bytes, prev: bytes) -> bytes:
    """One chain step: hash(inner || prev), predecessor used directly."""
    return hash_bytes(inner + prev)


def genesis_placeholder() -> bytes:
    """Constant identifier of a unit with no owner yet.

    The zero leaf is encoded as the single byte 0x00.
    """
    h0 = hash_bytes(b"\x00")
    return hash_bytes(h0 + h0)


def compute_stage(
    nonce: bytes, public_key: bytes, prev: bytes
) -> tuple[StageSecrets, bytes, bytes]:
    """Full pipeline from plaintext stage inputs to the new unit id.

    Returns (secrets, inner, unit). Receivers run this to precompute the
    unit they will own; wallets rerun it to prove their records recompute.
    """
    secrets = StageSecrets(hash_bytes(nonce), hash_bytes(public_key))
    inner = inner_commitment(secrets.nonce_hash, secrets.pubkey_hash)
    return secrets, inner, unit_id(inner, prev)


def verify_stage(
    nonce_hash: bytes, public_key: bytes, prev: bytes, claimed: bytes
) -> bool:
    """Public check that (h_n, pk, prev) reconstruct `claimed`."""
    if len(nonce_hash) != HASH_LEN or len(claimed) != HASH_LEN:
        return False
    return unit_id(inner_commitment(nonce_hash, hash_bytes(public_key)), prev) == claimed
