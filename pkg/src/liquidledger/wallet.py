"""Participant wallets: stage secrets, offers, detection, persistence.

A wallet must keep every (nonce, key index) pair that ever went into one
of its unit stages — losing one loses the unit. Delegation stubs (the
separable hashes received from a delegate) are what make reversals
possible and are kept until tally finalization makes them moot.

Wire messages never carry plaintext nonces or unpublished public keys;
an eavesdropper sees only hashes and unit ids.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from . import crypto
from .commitment import compute_stage, genesis_placeholder, inner_commitment, unit_id
from .crypto import KeyPair, from_hex, hash_bytes, to_hex
from .entries import (
    GenesisRegistration,
    Reversal,
    Transition,
    build_reversal as _build_reversal_entry,
    build_transition as _build_transition_entry,
    signing_payload,
)
from .ledger import LedgerView
from .profiles import LLV1, Profile, profile_by_name

WALLET_MAGIC = "LLV1-WALLET"
_SCRYPT_N = 2**14
_SCRYPT_R = 8
_SCRYPT_P = 1


class WalletError(Exception):
    pass


class WalletAuthError(WalletError):
    """Wrong passphrase or tampered wallet file."""


class WalletFormatError(WalletError):
    """Structurally malformed wallet file."""


@dataclass
class OwnershipRecord:
    """Everything needed to spend one owned unit."""

    nonce: bytes
    key_index: int
    prev_unit: bytes
    unit: bytes
    spent: bool = False


@dataclass
class DelegationStub:
    """Sender-retained separable hashes of a delegation; the reversal
    capability. `used` is wallet bookkeeping, set when a reversal is
    built from the stub."""

    nonce_hash: bytes
    pubkey_hash: bytes
    delegated_input: bytes
    delegated_output: bytes
    used: bool = False


@dataclass(frozen=True)
class DelegationOffer:
    """Receiver → sender: separable hashes for a reversible handover."""

    nonce_hash: bytes
    pubkey_hash: bytes


@dataclass(frozen=True)
class TransferOffer:
    """Receiver → sender: only the precomputed output; irreversible."""

    output_unit: bytes


@dataclass(frozen=True)
class InputAnnounce:
    """Sender → receiver: the input unit a transfer will consume, so the
    receiver can precompute the output."""

    input_unit: bytes


@dataclass
class PendingClaim:
    """Receiver-side secrets awaiting their unit on the ledger.

    `expected_unit`/`prev` are known upfront for transfers, genesis
    registrations and reversal self-claims; delegation offers learn them
    at detection time by scanning the live set.
    """

    kind: str  # "delegation" | "transfer" | "genesis" | "reversal"
    nonce: bytes
    key_index: int
    prev: bytes | None = None
    expected_unit: bytes | None = None


class Wallet:
    """Single-owner secret store bound to one master seed.

    Every stage consumes a fresh nonce and a fresh key index, so no two
    stages share material and on-ledger activity stays unlinkable.
    """

    def __init__(
        self,
        seed: bytes,
        profile: Profile = LLV1,
        rng: random.Random | None = None,
    ) -> None:
        if len(seed) != crypto.SEED_LEN:
            raise WalletError(f"seed must be {crypto.SEED_LEN} bytes")
        self.seed = seed
        self.profile = profile
        self.rng = rng
        self.next_key_index = 0
        self.records: dict[bytes, OwnershipRecord] = {}
        self.stubs: list[DelegationStub] = []
        self.pending: list[PendingClaim] = []
        self.failed_offers: list[PendingClaim] = []

    @classmethod
    def create(
        cls, rng: random.Random | None = None, profile: Profile = LLV1
    ) -> Wallet:
        return cls(seed=crypto.new_seed(rng), profile=profile, rng=rng)

    # --- keys ----------------------------------------------------------------

    def keypair_at(self, index: int) -> KeyPair:
        return crypto.derive_keypair(self.seed, index)

    def _fresh_keypair(self) -> KeyPair:
        kp = self.keypair_at(self.next_key_index)
        self.next_key_index += 1
        return kp

    def _fresh_nonce(self) -> bytes:
        return crypto.gen_nonce(self.rng, self.profile)

    def derived_public_keys(self) -> list[bytes]:
        """All public keys this wallet has consumed an index for."""
        return [self.keypair_at(i).public_key for i in range(self.next_key_index)]

    def mnemonic(self) -> str:
        return crypto.seed_to_mnemonic(self.seed)

    # --- offers (receiver side) ------------------------------------------------

    def make_delegation_offer(self) -> DelegationOffer:
        """Consume a fresh (nonce, key) and hand out their hashes.

        The sender will chain them onto whichever unit it spends; the
        claim is matched against the live set at detection time.
        """
        nonce = self._fresh_nonce()
        kp = self._fresh_keypair()
        self.pending.append(
            PendingClaim(kind="delegation", nonce=nonce, key_index=kp.index)
        )
        return DelegationOffer(
            nonce_hash=hash_bytes(nonce), pubkey_hash=hash_bytes(kp.public_key)
        )

    def make_transfer_offer(self, announce: InputAnnounce) -> TransferOffer:
        """Precompute the output unit over the announced input; only the
        combined id leaves the wallet, so the handover is irreversible."""
        nonce = self._fresh_nonce()
        kp = self._fresh_keypair()
        _, _, output = compute_stage(nonce, kp.public_key, announce.input_unit)
        self.pending.append(
            PendingClaim(
                kind="transfer",
                nonce=nonce,
                key_index=kp.index,
                prev=announce.input_unit,
                expected_unit=output,
            )
        )
        return TransferOffer(output_unit=output)

    def make_genesis_registration(self) -> GenesisRegistration:
        """Self-issued stage over the genesis placeholder, for slot 0."""
        nonce = self._fresh_nonce()
        kp = self._fresh_keypair()
        prev = genesis_placeholder()
        secrets, _, output = compute_stage(nonce, kp.public_key, prev)
        unsigned = GenesisRegistration(
            nonce_hash=secrets.nonce_hash,
            sender_pk=kp.public_key,
            output_unit=output,
            signature=b"\x00" * crypto.SIG_LEN,
        )
        sig = crypto.sign(kp.secret, signing_payload(unsigned))
        self.pending.append(
            PendingClaim(
                kind="genesis",
                nonce=nonce,
                key_index=kp.index,
                prev=prev,
                expected_unit=output,
            )
        )
        return GenesisRegistration(
            nonce_hash=unsigned.nonce_hash,
            sender_pk=unsigned.sender_pk,
            output_unit=unsigned.output_unit,
            signature=sig,
        )

    # --- spends (sender side) ----------------------------------------------------

    def accept_delegation_offer(
        self, record: OwnershipRecord, offer: DelegationOffer
    ) -> tuple[Transition, DelegationStub]:
        """Chain the offered hashes onto `record`'s unit and sign the
        spend; retain the stub that makes it reversible."""
        if record.spent:
            raise WalletError("record already spent")
        output = unit_id(
            inner_commitment(offer.nonce_hash, offer.pubkey_hash), record.unit
        )
        kp = self.keypair_at(record.key_index)
        transition = _build_transition_entry(record, output, kp)
        stub = DelegationStub(
            nonce_hash=offer.nonce_hash,
            pubkey_hash=offer.pubkey_hash,
            delegated_input=record.unit,
            delegated_output=output,
        )
        self.stubs.append(stub)
        return transition, stub

    def accept_transfer_offer(
        self, record: OwnershipRecord, offer: TransferOffer
    ) -> Transition:
        """Spend `record`'s unit into the receiver-precomputed output.

        No stub exists afterwards: the wallet never saw separable
        hashes, so irreversibility is structural, not a policy.
        """
        if record.spent:
            raise WalletError("record already spent")
        kp = self.keypair_at(record.key_index)
        return _build_transition_entry(record, offer.output_unit, kp)

    def build_reversal(
        self, stub: DelegationStub, view: LedgerView, force: bool = False
    ) -> Reversal:
        """Reclaim the live descendant of a past delegation.

        The reversal is signed by the key that signed the original
        delegation, and its new output is a fresh self-owned stage over
        the descendant being invalidated.
        """
        if stub.used and not force:
            raise WalletError("stub already used for a reversal")
        original = self.records.get(stub.delegated_input)
        if original is None:
            raise WalletError("no record of the original delegation input")
        descendant = view.live_descendant(stub.delegated_output)
        if descendant is None:
            raise WalletError("delegated lineage has no live descendant")
        nonce = self._fresh_nonce()
        new_kp = self._fresh_keypair()
        _, _, new_output = compute_stage(nonce, new_kp.public_key, descendant)
        reversal = _build_reversal_entry(
            stub, new_output, self.keypair_at(original.key_index)
        )
        self.pending.append(
            PendingClaim(
                kind="reversal",
                nonce=nonce,
                key_index=new_kp.index,
                prev=descendant,
                expected_unit=new_output,
            )
        )
        stub.used = True
        return reversal

    # --- ledger-driven bookkeeping ---------------------------------------------

    def detect_incoming(self, view: LedgerView) -> list[OwnershipRecord]:
        """Claim pending offers whose units reached the live set; sweep
        records whose units left it. Idempotent."""
        claimed: list[OwnershipRecord] = []
        still_pending: list[PendingClaim] = []
        for claim in self.pending:
            record = self._try_claim(claim, view)
            if record is not None:
                self.records[record.unit] = record
                claimed.append(record)
            elif self._offer_dead(claim, view):
                self.failed_offers.append(claim)
            else:
                still_pending.append(claim)
        self.pending = still_pending
        for record in self.records.values():
            if not record.spent and record.unit not in view.live:
                record.spent = True
        return claimed

    def _try_claim(
        self, claim: PendingClaim, view: LedgerView
    ) -> OwnershipRecord | None:
        if claim.expected_unit is not None:
            if claim.expected_unit in view.live:
                return OwnershipRecord(
                    nonce=claim.nonce,
                    key_index=claim.key_index,
                    prev_unit=claim.prev,
                    unit=claim.expected_unit,
                )
            return None
        # Delegation offer: the sender chose the predecessor, so match
        # the offer's inner commitment against every live unit's parent.
        kp = self.keypair_at(claim.key_index)
        inner = inner_commitment(hash_bytes(claim.nonce), hash_bytes(kp.public_key))
        for unit in sorted(view.live):
            prev = view.parent_of(unit)
            if prev is not None and unit_id(inner, prev) == unit:
                return OwnershipRecord(
                    nonce=claim.nonce,
                    key_index=claim.key_index,
                    prev_unit=prev,
                    unit=unit,
                )
        return None

    @staticmethod
    def _offer_dead(claim: PendingClaim, view: LedgerView) -> bool:
        """A transfer offer is dead once its announced input was consumed
        into some other output (the sender took a different offer)."""
        if claim.kind not in ("transfer", "reversal") or claim.prev is None:
            return False
        consumed_into = view.index.child.get(claim.prev)
        return consumed_into is not None and consumed_into != claim.expected_unit

    def spendable_units(self, view: LedgerView) -> list[OwnershipRecord]:
        """Records whose units are currently live, sorted by unit id."""
        return [
            self.records[unit] for unit in sorted(self.records) if unit in view.live
        ]

    # --- persistence -------------------------------------------------------------

    def to_payload(self) -> dict:
        return {
            "profile": self.profile.name,
            "seed": to_hex(self.seed),
            "next_key_index": self.next_key_index,
            "records": [
                {
                    "nonce": to_hex(r.nonce),
                    "key_index": r.key_index,
                    "prev_unit": to_hex(r.prev_unit),
                    "unit": to_hex(r.unit),
                    "spent": r.spent,
                }
                for r in self.records.values()
            ],
            "stubs": [
                {
                    "h_n": to_hex(s.nonce_hash),
                    "h_p": to_hex(s.pubkey_hash),
                    "delegated_input": to_hex(s.delegated_input),
                    "delegated_output": to_hex(s.delegated_output),
                    "used": s.used,
                }
                for s in self.stubs
            ],
            "pending": [
                {
                    "kind": c.kind,
                    "nonce": to_hex(c.nonce),
                    "key_index": c.key_index,
                    "prev": None if c.prev is None else to_hex(c.prev),
                    "expected_unit": (
                        None if c.expected_unit is None else to_hex(c.expected_unit)
                    ),
                }
                for c in self.pending
            ],
        }

    @classmethod
    def from_payload(cls, payload: dict, rng: random.Random | None = None) -> Wallet:
        profile = profile_by_name(payload["profile"])
        wallet = cls(seed=from_hex(payload["seed"], crypto.SEED_LEN), profile=profile, rng=rng)
        wallet.next_key_index = int(payload["next_key_index"])
        for doc in payload["records"]:
            record = OwnershipRecord(
                nonce=from_hex(doc["nonce"]),
                key_index=int(doc["key_index"]),
                prev_unit=from_hex(doc["prev_unit"], crypto.HASH_LEN),
                unit=from_hex(doc["unit"], crypto.HASH_LEN),
                spent=bool(doc["spent"]),
            )
            kp = wallet.keypair_at(record.key_index)
            _, _, recomputed = compute_stage(record.nonce, kp.public_key, record.prev_unit)
            if recomputed != record.unit:
                raise WalletFormatError("stored record does not recompute its unit id")
            wallet.records[record.unit] = record
        for doc in payload["stubs"]:
            wallet.stubs.append(
                DelegationStub(
                    nonce_hash=from_hex(doc["h_n"], crypto.HASH_LEN),
                    pubkey_hash=from_hex(doc["h_p"], crypto.HASH_LEN),
                    delegated_input=from_hex(doc["delegated_input"], crypto.HASH_LEN),
                    delegated_output=from_hex(doc["delegated_output"], crypto.HASH_LEN),
                    used=bool(doc["used"]),
                )
            )
        for doc in payload["pending"]:
            wallet.pending.append(
                PendingClaim(
                    kind=doc["kind"],
                    nonce=from_hex(doc["nonce"]),
                    key_index=int(doc["key_index"]),
                    prev=None if doc["prev"] is None else from_hex(doc["prev"]),
                    expected_unit=(
                        None
                        if doc["expected_unit"] is None
                        else from_hex(doc["expected_unit"])
                    ),
                )
            )
        return wallet

    def persist(self, path: str | os.PathLike, passphrase: str) -> None:
        """Encrypt-then-write the whole wallet (authenticated, key from a
        memory-hard passphrase derivation)."""
        if not self.profile.persistable:
            raise WalletError(f"profile {self.profile.name} refuses persistence")
        salt = os.urandom(16)
        key = _derive_file_key(passphrase, salt)
        nonce = os.urandom(12)
        plaintext = json.dumps(self.to_payload(), sort_keys=True).encode()
        ciphertext = ChaCha20Poly1305(key).encrypt(
            nonce, plaintext, WALLET_MAGIC.encode()
        )
        envelope = {
            "version": WALLET_MAGIC,
            "kdf": {"name": "scrypt", "n": _SCRYPT_N, "r": _SCRYPT_R, "p": _SCRYPT_P},
            "salt": to_hex(salt),
            "nonce": to_hex(nonce),
            "ciphertext": to_hex(ciphertext),
        }
        with open(path, "w", encoding="ascii") as fh:
            json.dump(envelope, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def restore(
        cls,
        path: str | os.PathLike,
        passphrase: str,
        rng: random.Random | None = None,
    ) -> Wallet:
        try:
            with open(path, "r", encoding="ascii") as fh:
                envelope = json.load(fh)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise WalletFormatError(f"malformed wallet file: {exc}") from exc
        if not isinstance(envelope, dict) or envelope.get("version") != WALLET_MAGIC:
            raise WalletFormatError("not a wallet file (bad version)")
        kdf = envelope.get("kdf", {})
        if kdf.get("name") != "scrypt":
            raise WalletFormatError(f"unsupported kdf: {kdf.get('name')!r}")
        try:
            salt = from_hex(envelope["salt"], 16)
            nonce = from_hex(envelope["nonce"], 12)
            ciphertext = from_hex(envelope["ciphertext"])
        except (KeyError, crypto.EncodingError) as exc:
            raise WalletFormatError(f"malformed wallet envelope: {exc}") from exc
        key = _derive_file_key(
            passphrase, salt, n=int(kdf["n"]), r=int(kdf["r"]), p=int(kdf["p"])
        )
        try:
            plaintext = ChaCha20Poly1305(key).decrypt(
                nonce, ciphertext, WALLET_MAGIC.encode()
            )
        except InvalidTag as exc:
            raise WalletAuthError("wrong passphrase or corrupted wallet") from exc
        return cls.from_payload(json.loads(plaintext), rng=rng)


def _derive_file_key(
    passphrase: str, salt: bytes, n: int = _SCRYPT_N, r: int = _SCRYPT_R, p: int = _SCRYPT_P
) -> bytes:
    return Scrypt(salt=salt, length=32, n=n, r=r, p=p).derive(passphrase.encode())


# --- wire-message JSON -------------------------------------------------------

def message_to_json(message) -> dict:
    if isinstance(message, DelegationOffer):
        return {
            "kind": "delegation_offer",
            "h_n": to_hex(message.nonce_hash),
            "h_p": to_hex(message.pubkey_hash),
        }
    if isinstance(message, TransferOffer):
        return {"kind": "transfer_offer", "output_unit": to_hex(message.output_unit)}
    if isinstance(message, InputAnnounce):
        return {"kind": "input_announce", "input_unit": to_hex(message.input_unit)}
    raise TypeError(f"not a wire message: {type(message).__name__}")


def message_from_json(doc: dict):
    kind = doc.get("kind")
    if kind == "delegation_offer":
        return DelegationOffer(
            nonce_hash=from_hex(doc["h_n"], crypto.HASH_LEN),
            pubkey_hash=from_hex(doc["h_p"], crypto.HASH_LEN),
        )
    if kind == "transfer_offer":
        return TransferOffer(output_unit=from_hex(doc["output_unit"], crypto.HASH_LEN))
    if kind == "input_announce":
        return InputAnnounce(input_unit=from_hex(doc["input_unit"], crypto.HASH_LEN))
    raise crypto.EncodingError(f"unknown message kind: {kind!r}")
