"""Public ledger entries and their validation.

Two entry kinds evolve units after genesis: a Transition (covers both
transfers and delegations, indistinguishable on the ledger) and a
Reversal (a past delegation sender reveals the separable hashes to
reclaim the lineage's live descendant). Genesis registrations issue the
initial units from the unowned placeholder.

Signing payloads are domain-tagged fixed-width concatenations of every
field except the signature, in declaration order.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Collection

from .commitment import genesis_placeholder, inner_commitment, unit_id, verify_stage
from .crypto import (
    HASH_LEN,
    PUBKEY_LEN,
    SIG_LEN,
    EncodingError,
    from_hex,
    to_hex,
    verify,
)

if TYPE_CHECKING:
    from .ledger import LineageIndex, State

TRANSITION_TAG = b"LLV1-TRANSITION"
REVERSAL_TAG = b"LLV1-REVERSAL"
GENESIS_TAG = b"LLV1-GENESIS"


class BuildError(ValueError):
    """A locally held record or stub is inconsistent with itself."""


class Reject(enum.Enum):
    UNKNOWN_INPUT = "UnknownInput"
    SPENT_INPUT = "SpentInput"
    STAGE_MISMATCH = "StageMismatch"
    BAD_SIGNATURE = "BadSignature"
    DUPLICATE_OUTPUT = "DuplicateOutput"
    OPTION_KEY_SPEND = "OptionKeySpend"
    NO_LIVE_DESCENDANT = "NoLiveDescendant"
    NOT_ORIGINAL_SENDER = "NotOriginalSender"
    STATE_FROZEN = "StateFrozen"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: Reject | None = None

    @classmethod
    def ok(cls) -> Verdict:
        return cls(accepted=True)

    @classmethod
    def reject(cls, reason: Reject) -> Verdict:
        return cls(accepted=False, reason=reason)

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "reason": None if self.reason is None else self.reason.value,
        }


def _need(value: bytes, length: int, name: str) -> bytes:
    if not isinstance(value, bytes) or len(value) != length:
        raise EncodingError(f"{name} must be {length} bytes")
    return value


@dataclass(frozen=True)
class Transition:
    """Eq-(2)-shaped tuple: spend `input_unit` into `output_unit`.

    (nonce_hash, sender_pk, prev_unit) publicly reconstruct the input;
    the output reveals nothing about its receiver.
    """

    nonce_hash: bytes
    sender_pk: bytes
    prev_unit: bytes
    input_unit: bytes
    output_unit: bytes
    signature: bytes

    def __post_init__(self) -> None:
        _need(self.nonce_hash, HASH_LEN, "nonce_hash")
        _need(self.sender_pk, PUBKEY_LEN, "sender_pk")
        _need(self.prev_unit, HASH_LEN, "prev_unit")
        _need(self.input_unit, HASH_LEN, "input_unit")
        _need(self.output_unit, HASH_LEN, "output_unit")
        _need(self.signature, SIG_LEN, "signature")


@dataclass(frozen=True)
class Reversal:
    """Eq-(3)-shaped tuple: invalidate a delegated lineage.

    (nonce_hash, pubkey_hash) are the separable hashes the receiver gave
    the sender at delegation time; revealing them proves chain
    precedence. The new output chains from the invalidated lineage's
    live descendant.
    """

    nonce_hash: bytes
    pubkey_hash: bytes
    sender_pk: bytes
    delegated_input: bytes
    delegated_output: bytes
    new_output: bytes
    signature: bytes

    def __post_init__(self) -> None:
        _need(self.nonce_hash, HASH_LEN, "nonce_hash")
        _need(self.pubkey_hash, HASH_LEN, "pubkey_hash")
        _need(self.sender_pk, PUBKEY_LEN, "sender_pk")
        _need(self.delegated_input, HASH_LEN, "delegated_input")
        _need(self.delegated_output, HASH_LEN, "delegated_output")
        _need(self.new_output, HASH_LEN, "new_output")
        _need(self.signature, SIG_LEN, "signature")


@dataclass(frozen=True)
class GenesisRegistration:
    """Trusted slot-0 issuance of one unit from the placeholder.

    `output_unit` must recompute as a stage over the genesis placeholder
    from the disclosed nonce hash and key.
    """

    nonce_hash: bytes
    sender_pk: bytes
    output_unit: bytes
    signature: bytes

    def __post_init__(self) -> None:
        _need(self.nonce_hash, HASH_LEN, "nonce_hash")
        _need(self.sender_pk, PUBKEY_LEN, "sender_pk")
        _need(self.output_unit, HASH_LEN, "output_unit")
        _need(self.signature, SIG_LEN, "signature")


Entry = Transition | Reversal | GenesisRegistration


def signing_payload(entry: Entry) -> bytes:
    """Canonical byte string the entry's signature covers."""
    if isinstance(entry, Transition):
        return (
            TRANSITION_TAG
            + entry.nonce_hash
            + entry.sender_pk
            + entry.prev_unit
            + entry.input_unit
            + entry.output_unit
        )
    if isinstance(entry, Reversal):
        return (
            REVERSAL_TAG
            + entry.nonce_hash
            + entry.pubkey_hash
            + entry.sender_pk
            + entry.delegated_input
            + entry.delegated_output
            + entry.new_output
        )
    if isinstance(entry, GenesisRegistration):
        return GENESIS_TAG + entry.nonce_hash + entry.sender_pk + entry.output_unit
    raise TypeError(f"not a ledger entry: {type(entry).__name__}")


# --- construction ----------------------------------------------------------


def build_transition(record, output_unit: bytes, keypair) -> Transition:
    """Sign a spend of the unit in `record` into `output_unit`.

    `record` carries the wallet-side stage secrets (nonce, prev_unit,
    unit); `keypair` is the stage's signing key. Raises BuildError when
    the record does not recompute its own unit id.
    """
    from .commitment import compute_stage
    from .crypto import sign

    secrets, _, recomputed = compute_stage(
        record.nonce, keypair.public_key, record.prev_unit
    )
    if recomputed != record.unit:
        raise BuildError("ownership record does not recompute its unit id")
    unsigned = Transition(
        nonce_hash=secrets.nonce_hash,
        sender_pk=keypair.public_key,
        prev_unit=record.prev_unit,
        input_unit=record.unit,
        output_unit=output_unit,
        signature=b"\x00" * SIG_LEN,
    )
    sig = sign(keypair.secret, signing_payload(unsigned))
    return dataclasses.replace(unsigned, signature=sig)


def build_reversal(stub, new_output: bytes, keypair) -> Reversal:
    """Sign a reversal of the delegation recorded in `stub`.

    `keypair` must be the key that signed the original delegation.
    Raises BuildError when the stub's hashes do not recompute the
    delegated output.
    """
    from .crypto import sign

    if (
        unit_id(
            inner_commitment(stub.nonce_hash, stub.pubkey_hash), stub.delegated_input
        )
        != stub.delegated_output
    ):
        raise BuildError("delegation stub does not recompute its output unit")
    unsigned = Reversal(
        nonce_hash=stub.nonce_hash,
        pubkey_hash=stub.pubkey_hash,
        sender_pk=keypair.public_key,
        delegated_input=stub.delegated_input,
        delegated_output=stub.delegated_output,
        new_output=new_output,
        signature=b"\x00" * SIG_LEN,
    )
    sig = sign(keypair.secret, signing_payload(unsigned))
    return dataclasses.replace(unsigned, signature=sig)


# --- validation ------------------------------------------------------------
#
# Checks run in a fixed order so rejection reasons are deterministic. A
# frozen state rejects everything first; remaining checks follow the
# tuple semantics. Rejected entries never mutate state.


def validate_transition(
    entry: Transition,
    state: State,
    index: LineageIndex,
    option_keys: Collection[bytes] | None = None,
) -> Verdict:
    if state.frozen:
        return Verdict.reject(Reject.STATE_FROZEN)
    if not verify_stage(
        entry.nonce_hash, entry.sender_pk, entry.prev_unit, entry.input_unit
    ):
        return Verdict.reject(Reject.STAGE_MISMATCH)
    if entry.input_unit not in index.all_ids:
        return Verdict.reject(Reject.UNKNOWN_INPUT)
    if entry.input_unit not in state.live:
        return Verdict.reject(Reject.SPENT_INPUT)
    if entry.output_unit in index.all_ids:
        return Verdict.reject(Reject.DUPLICATE_OUTPUT)
    if not verify(entry.sender_pk, signing_payload(entry), entry.signature):
        return Verdict.reject(Reject.BAD_SIGNATURE)
    if option_keys and entry.sender_pk in option_keys:
        return Verdict.reject(Reject.OPTION_KEY_SPEND)
    return Verdict.ok()


def validate_reversal(
    entry: Reversal,
    state: State,
    index: LineageIndex,
) -> Verdict:
    if state.frozen:
        return Verdict.reject(Reject.STATE_FROZEN)
    if (
        unit_id(
            inner_commitment(entry.nonce_hash, entry.pubkey_hash),
            entry.delegated_input,
        )
        != entry.delegated_output
    ):
        return Verdict.reject(Reject.STAGE_MISMATCH)
    # The reversed edge must be a recorded Transition (not a reversal or
    # genesis issuance) initiated by this exact key.
    if (
        index.consumed_kind.get(entry.delegated_input) != "transition"
        or index.child.get(entry.delegated_input) != entry.delegated_output
        or index.consumed_by_pk.get(entry.delegated_input) != entry.sender_pk
    ):
        return Verdict.reject(Reject.NOT_ORIGINAL_SENDER)
    if index.live_descendant(state.live, entry.delegated_output) is None:
        return Verdict.reject(Reject.NO_LIVE_DESCENDANT)
    if entry.new_output in index.all_ids:
        return Verdict.reject(Reject.DUPLICATE_OUTPUT)
    if not verify(entry.sender_pk, signing_payload(entry), entry.signature):
        return Verdict.reject(Reject.BAD_SIGNATURE)
    return Verdict.ok()


def validate_genesis(entry: GenesisRegistration) -> Verdict:
    if not verify_stage(
        entry.nonce_hash, entry.sender_pk, genesis_placeholder(), entry.output_unit
    ):
        return Verdict.reject(Reject.STAGE_MISMATCH)
    if not verify(entry.sender_pk, signing_payload(entry), entry.signature):
        return Verdict.reject(Reject.BAD_SIGNATURE)
    return Verdict.ok()


# --- JSON rendering ---------------------------------------------------------

_TRANSITION_FIELDS = ("nonce_hash", "sender_pk", "prev_unit", "input_unit", "output_unit")
_REVERSAL_FIELDS = (
    "nonce_hash",
    "pubkey_hash",
    "sender_pk",
    "delegated_input",
    "delegated_output",
    "new_output",
)
_GENESIS_FIELDS = ("nonce_hash", "sender_pk", "output_unit")

_FIELD_LEN = {
    "sender_pk": PUBKEY_LEN,
    "signature": SIG_LEN,
}


def entry_to_json(entry: Entry) -> dict:
    if isinstance(entry, Transition):
        kind, fields = "transition", _TRANSITION_FIELDS
    elif isinstance(entry, Reversal):
        kind, fields = "reversal", _REVERSAL_FIELDS
    elif isinstance(entry, GenesisRegistration):
        kind, fields = "genesis", _GENESIS_FIELDS
    else:
        raise TypeError(f"not a ledger entry: {type(entry).__name__}")
    doc = {"type": kind}
    for name in fields:
        doc[name] = to_hex(getattr(entry, name))
    doc["signature"] = to_hex(entry.signature)
    return doc


def entry_from_json(doc: dict) -> Entry:
    kind = doc.get("type")
    if kind == "transition":
        cls, fields = Transition, _TRANSITION_FIELDS
    elif kind == "reversal":
        cls, fields = Reversal, _REVERSAL_FIELDS
    elif kind == "genesis":
        cls, fields = GenesisRegistration, _GENESIS_FIELDS
    else:
        raise EncodingError(f"unknown entry type: {kind!r}")
    kwargs = {}
    for name in (*fields, "signature"):
        raw = doc.get(name)
        if not isinstance(raw, str):
            raise EncodingError(f"missing field {name!r} in {kind} entry")
        kwargs[name] = from_hex(raw, _FIELD_LEN.get(name, HASH_LEN))
    return cls(**kwargs)
