"""Vote casting, grouping, reveal and publicly verifiable tally.

Options are common-knowledge public keys. Casting a vote is an ordinary
transfer to an option entity, so votes are indistinguishable from any
other transition on the ledger; validators make vote outputs terminal by
discarding spends signed by option keys. At tally time each entity
reveals the plaintext nonces behind its received units, and any observer
recomputes the per-option power from public data alone.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from . import crypto
from .commitment import compute_stage, verify_stage
from .crypto import from_hex, hash_bytes, to_hex
from .ledger import LedgerView, State
from .profiles import LLV1, Profile
from .wallet import InputAnnounce, TransferOffer


class TallyError(Exception):
    pass


@dataclass(frozen=True)
class OptionRegistry:
    """Common-knowledge map of option label to option public key."""

    options: dict[str, bytes]

    def key_of(self, label: str) -> bytes | None:
        return self.options.get(label)

    def key_set(self) -> frozenset[bytes]:
        return frozenset(self.options.values())

    def to_json(self) -> dict:
        return {"options": {label: to_hex(pk) for label, pk in sorted(self.options.items())}}

    @classmethod
    def from_json(cls, doc: dict) -> OptionRegistry:
        return cls(
            options={
                label: from_hex(pk, crypto.PUBKEY_LEN)
                for label, pk in doc["options"].items()
            }
        )


@dataclass
class VoteClaim:
    """One received vote: the unit, its plaintext nonce and predecessor."""

    unit: bytes
    nonce: bytes
    prev: bytes


@dataclass
class VoteReveal:
    """An entity's public claims over its grouped votes."""

    option: str
    claims: list[VoteClaim]

    def to_json(self) -> dict:
        return {
            "option": self.option,
            "claims": [
                {"unit": to_hex(c.unit), "nonce": to_hex(c.nonce), "prev": to_hex(c.prev)}
                for c in self.claims
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> VoteReveal:
        return cls(
            option=doc["option"],
            claims=[
                VoteClaim(
                    unit=from_hex(c["unit"], crypto.HASH_LEN),
                    nonce=from_hex(c["nonce"]),
                    prev=from_hex(c["prev"], crypto.HASH_LEN),
                )
                for c in doc["claims"]
            ],
        )


class OptionEntity:
    """The automated mechanism behind one option key.

    Answers voters' announce messages with transfer offers (same
    mechanics as a wallet transfer offer, but every stage reuses the one
    common-knowledge key) and remembers the stage secrets for reveal.
    """

    def __init__(
        self,
        label: str,
        secret: bytes,
        profile: Profile = LLV1,
        rng: random.Random | None = None,
    ) -> None:
        self.label = label
        self.keypair = _entity_keypair(secret)
        self.secret = secret
        self.profile = profile
        self.rng = rng
        self.pending: list[VoteClaim] = []
        self.received: list[VoteClaim] = []

    @classmethod
    def create(
        cls,
        label: str,
        rng: random.Random | None = None,
        profile: Profile = LLV1,
    ) -> OptionEntity:
        return cls(label, crypto.new_seed(rng), profile=profile, rng=rng)

    @property
    def public_key(self) -> bytes:
        return self.keypair.public_key

    def request_vote_offer(self, announce: InputAnnounce) -> TransferOffer:
        """Transfer data for one incoming vote: fresh nonce, fixed key."""
        nonce = crypto.gen_nonce(self.rng, self.profile)
        _, _, output = compute_stage(nonce, self.public_key, announce.input_unit)
        self.pending.append(VoteClaim(unit=output, nonce=nonce, prev=announce.input_unit))
        return TransferOffer(output_unit=output)

    def confirm(self, view: LedgerView) -> int:
        """Move pending claims whose units reached the live set into the
        received group; returns how many were confirmed."""
        confirmed = 0
        still: list[VoteClaim] = []
        for claim in self.pending:
            if claim.unit in view.live:
                self.received.append(claim)
                confirmed += 1
            else:
                still.append(claim)
        self.pending = still
        return confirmed

    def declared_units(self, view: LedgerView) -> set[bytes]:
        """The units this entity groups in public (pre-reveal)."""
        return {c.unit for c in self.received if c.unit in view.live}

    def make_reveal(self) -> VoteReveal:
        """Display the plaintext nonces behind every received vote."""
        return VoteReveal(
            option=self.label,
            claims=[VoteClaim(c.unit, c.nonce, c.prev) for c in self.received],
        )

    def to_payload(self) -> dict:
        return {
            "label": self.label,
            "secret": to_hex(self.secret),
            "received": [
                {"unit": to_hex(c.unit), "nonce": to_hex(c.nonce), "prev": to_hex(c.prev)}
                for c in self.received
            ],
            "pending": [
                {"unit": to_hex(c.unit), "nonce": to_hex(c.nonce), "prev": to_hex(c.prev)}
                for c in self.pending
            ],
        }

    @classmethod
    def from_payload(cls, doc: dict, profile: Profile = LLV1) -> OptionEntity:
        entity = cls(doc["label"], from_hex(doc["secret"], 32), profile=profile)
        for key, claims in (("received", entity.received), ("pending", entity.pending)):
            for c in doc.get(key, []):
                claims.append(
                    VoteClaim(
                        unit=from_hex(c["unit"], crypto.HASH_LEN),
                        nonce=from_hex(c["nonce"]),
                        prev=from_hex(c["prev"], crypto.HASH_LEN),
                    )
                )
        return entity


def _entity_keypair(secret: bytes) -> crypto.KeyPair:
    return crypto.derive_keypair(secret, 0)


# --- tally -------------------------------------------------------------------


@dataclass
class PreliminaryTally:
    """Unverified public grouping; overlaps show dishonesty pre-reveal."""

    counts: dict[str, int]
    overlaps: set[bytes]
    excluded: dict[str, list[bytes]]


def preliminary_tally(
    view: LedgerView, declared: dict[str, set[bytes]]
) -> PreliminaryTally:
    """Count declared live units per option.

    Declarations are unverified: a unit declared by several entities is
    counted for all of them and flagged; declarations of non-live units
    are excluded and reported.
    """
    counts: dict[str, int] = {}
    excluded: dict[str, list[bytes]] = {}
    seen: dict[bytes, int] = {}
    for label in sorted(declared):
        units = declared[label]
        live_units = sorted(u for u in units if u in view.live)
        counts[label] = len(live_units)
        excluded[label] = sorted(u for u in units if u not in view.live)
        for unit in live_units:
            seen[unit] = seen.get(unit, 0) + 1
    overlaps = {unit for unit, n in seen.items() if n > 1}
    return PreliminaryTally(counts=counts, overlaps=overlaps, excluded=excluded)


@dataclass
class InvalidClaim:
    option: str
    unit: bytes
    reason: str  # stage_mismatch | not_live | parent_mismatch | unknown_option


@dataclass
class TallyResult:
    """Verified per-option power, with conservation:
    sum(per_option) + unallocated + len(disputed) == genesis_count."""

    per_option: dict[str, int]
    unallocated: int
    disputed: set[bytes]
    invalid_claims: list[InvalidClaim]
    genesis_count: int

    def to_json(self) -> dict:
        return {
            "per_option": dict(sorted(self.per_option.items())),
            "unallocated": self.unallocated,
            "disputed": sorted(to_hex(u) for u in self.disputed),
            "invalid_claims": [
                {"option": c.option, "unit": to_hex(c.unit), "reason": c.reason}
                for c in self.invalid_claims
            ],
            "genesis_count": self.genesis_count,
        }


def verify_tally(
    view: LedgerView,
    reveals: list[VoteReveal],
    registry: OptionRegistry,
    genesis_count: int,
) -> TallyResult:
    """Recompute the tally from public data only.

    A claim counts iff its revealed nonce and the option key reconstruct
    the unit over its actual lineage parent and the unit is live. At
    most one claim per unit can verify (anything else would be a hash
    collision). Live units with only failing claims are disputed; live
    units nobody claimed are unallocated.
    """
    if not view.frozen:
        raise TallyError("tally requires a frozen state (finalize first)")
    per_option = {label: 0 for label in registry.options}
    invalid: list[InvalidClaim] = []
    verified_by_unit: dict[bytes, tuple[str, bytes]] = {}
    claimed_units: set[bytes] = set()
    seen_claims: set[tuple[str, bytes, bytes]] = set()
    for reveal in reveals:
        option_pk = registry.key_of(reveal.option)
        for claim in reveal.claims:
            dedupe_key = (reveal.option, claim.unit, claim.nonce)
            if dedupe_key in seen_claims:
                continue
            seen_claims.add(dedupe_key)
            if option_pk is None:
                invalid.append(InvalidClaim(reveal.option, claim.unit, "unknown_option"))
                continue
            claimed_units.add(claim.unit)
            if not verify_stage(
                hash_bytes(claim.nonce), option_pk, claim.prev, claim.unit
            ):
                invalid.append(InvalidClaim(reveal.option, claim.unit, "stage_mismatch"))
                continue
            if claim.unit not in view.live:
                invalid.append(InvalidClaim(reveal.option, claim.unit, "not_live"))
                continue
            if view.parent_of(claim.unit) != claim.prev:
                invalid.append(InvalidClaim(reveal.option, claim.unit, "parent_mismatch"))
                continue
            earlier = verified_by_unit.get(claim.unit)
            if earlier is not None and earlier != (reveal.option, claim.nonce):
                raise TallyError(
                    f"two distinct verifying claims for unit {to_hex(claim.unit)}: "
                    "hash collision"
                )
            if earlier is None:
                verified_by_unit[claim.unit] = (reveal.option, claim.nonce)
                per_option[reveal.option] += 1
    disputed = {
        unit
        for unit in claimed_units
        if unit in view.live and unit not in verified_by_unit
    }
    unallocated = len(view.live) - len(verified_by_unit) - len(disputed)
    return TallyResult(
        per_option=per_option,
        unallocated=unallocated,
        disputed=disputed,
        invalid_claims=invalid,
        genesis_count=genesis_count,
    )


def finalize(state: State) -> State:
    """Freeze the state: the reversal window closes, every later entry is
    rejected. One-shot."""
    if state.frozen:
        raise TallyError("state already finalized")
    state.frozen = True
    return state


# --- registry / reveal files ---------------------------------------------------


def save_registry(registry: OptionRegistry, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(registry.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_registry(path) -> OptionRegistry:
    with open(path, "r", encoding="ascii") as fh:
        return OptionRegistry.from_json(json.load(fh))


def save_reveals(reveals: list[VoteReveal], path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump([r.to_json() for r in reveals], fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_reveals(path) -> list[VoteReveal]:
    with open(path, "r", encoding="ascii") as fh:
        docs = json.load(fh)
    return [VoteReveal.from_json(doc) for doc in docs]
