"""Cryptographic profiles.

LLV1 is the only profile that may touch disk. TOY8 shrinks nonces to a
single byte so that the brute-force attacks in the security games have a
feasible positive control; it exists for tests and simulations only and
every persistence path refuses it.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Profile:
    name: str
    nonce_len: int
    persistable: bool


#: Reference profile: SHA-256 hashes, Ed25519 signatures, 32-byte nonces.
LLV1 = Profile(name="LLV1", nonce_len=32, persistable=True)

#: Deliberately weak test profile: 8-bit nonces, never persisted.
TOY8 = Profile(name="TOY8", nonce_len=1, persistable=False)

_BY_NAME = {p.name: p for p in (LLV1, TOY8)}


def profile_by_name(name: str) -> Profile:
    try:
        return _BY_NAME[name.upper()]
    except KeyError:
        raise ValueError(f"unknown profile: {name!r}") from None
