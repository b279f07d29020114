"""Append-only public ledger and its replayable state.

The ledger is a sequence of slots; slot 0 holds the trusted genesis
registrations, later slots hold accepted transitions and reversals in
submission order. Rejected entries are reported to the submitter but
never stored, so replaying a well-formed file must re-accept every entry
or the file is corrupt.

State is the live unit set; the lineage index makes the public chain of
identifiers queryable (parents, consumers, stage depths). Conservation
holds at every slot boundary: each accepted entry removes exactly one
live unit and adds exactly one.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .commitment import genesis_placeholder
from .crypto import EncodingError, hash_bytes, to_hex
from .entries import (
    Entry,
    GenesisRegistration,
    Reversal,
    Transition,
    Verdict,
    entry_from_json,
    entry_to_json,
    validate_genesis,
    validate_reversal,
    validate_transition,
)
from .profiles import LLV1, Profile


class LedgerError(Exception):
    """Base class for ledger failures."""


class LedgerFormatError(LedgerError):
    """Structurally malformed ledger file or slot sequence."""


class ReplayError(LedgerError):
    """A stored entry fails validation on replay (tampered ledger)."""


class GenesisError(LedgerError):
    """Invalid genesis registration set."""


@dataclass
class Slot:
    index: int
    entries: list[Entry] = field(default_factory=list)


@dataclass
class State:
    """Live unit set plus the tally-finalization freeze flag."""

    live: set[bytes] = field(default_factory=set)
    frozen: bool = False

    def snapshot_hash(self) -> bytes:
        """Hash of the sorted live-set concatenation: one comparable
        fingerprint of the whole state."""
        return hash_bytes(b"".join(sorted(self.live)))


@dataclass
class LineageIndex:
    """Queryable public lineage: parent edges form chains rooted at the
    genesis placeholder (depth 0); every consumed unit has exactly one
    child, so each lineage has exactly one live leaf."""

    parent: dict[bytes, bytes] = field(default_factory=dict)
    child: dict[bytes, bytes] = field(default_factory=dict)
    consumed_by_pk: dict[bytes, bytes] = field(default_factory=dict)
    consumed_kind: dict[bytes, str] = field(default_factory=dict)
    all_ids: set[bytes] = field(default_factory=set)
    stage_depth: dict[bytes, int] = field(default_factory=dict)

    def register_genesis(self, output: bytes) -> None:
        placeholder = genesis_placeholder()
        self.all_ids.add(placeholder)
        self.stage_depth.setdefault(placeholder, 0)
        self.parent[output] = placeholder
        self.all_ids.add(output)
        self.stage_depth[output] = 1

    def apply_transition(self, entry: Transition) -> None:
        self.parent[entry.output_unit] = entry.input_unit
        self.child[entry.input_unit] = entry.output_unit
        self.consumed_by_pk[entry.input_unit] = entry.sender_pk
        self.consumed_kind[entry.input_unit] = "transition"
        self.all_ids.add(entry.output_unit)
        self.stage_depth[entry.output_unit] = self.stage_depth[entry.input_unit] + 1

    def apply_reversal(self, entry: Reversal, descendant: bytes) -> None:
        self.parent[entry.new_output] = descendant
        self.child[descendant] = entry.new_output
        self.consumed_by_pk[descendant] = entry.sender_pk
        self.consumed_kind[descendant] = "reversal"
        self.all_ids.add(entry.new_output)
        self.stage_depth[entry.new_output] = self.stage_depth[descendant] + 1

    def live_descendant(self, live: set[bytes], unit: bytes) -> bytes | None:
        """Walk child edges from `unit` to its lineage's live leaf.

        None when the walk cannot reach a live unit; unknown units raise.
        The genesis placeholder has many children hence no unique leaf.
        """
        if unit not in self.all_ids:
            raise LedgerError(f"unknown unit: {to_hex(unit)}")
        if unit == genesis_placeholder():
            return None
        while unit not in live:
            nxt = self.child.get(unit)
            if nxt is None:
                return None
            unit = nxt
        return unit


@dataclass(frozen=True)
class LedgerView:
    """Read-only bundle handed to wallets, entities and the tally."""

    state: State
    index: LineageIndex

    @property
    def live(self) -> set[bytes]:
        return self.state.live

    @property
    def frozen(self) -> bool:
        return self.state.frozen

    def parent_of(self, unit: bytes) -> bytes | None:
        return self.index.parent.get(unit)

    def live_descendant(self, unit: bytes) -> bytes | None:
        return self.index.live_descendant(self.state.live, unit)


class Ledger:
    """Single-writer append-only ledger with incrementally maintained
    state. Readers take `view()` snapshots; `replay()` recomputes state
    from the stored slots and must agree with the incremental path."""

    def __init__(self, profile: Profile = LLV1) -> None:
        self.profile = profile
        self.slots: list[Slot] = []
        self.state = State()
        self.index = LineageIndex()
        self.genesis_count = 0
        self.option_keys: frozenset[bytes] = frozenset()

    # --- construction ------------------------------------------------------

    @classmethod
    def genesis_init(
        cls,
        registrations: list[GenesisRegistration],
        profile: Profile = LLV1,
    ) -> Ledger:
        """Bootstrap a ledger whose slot 0 issues one unit per registration."""
        ledger = cls(profile=profile)
        seen: set[bytes] = set()
        for pos, reg in enumerate(registrations):
            verdict = validate_genesis(reg)
            if not verdict.accepted:
                raise GenesisError(
                    f"registration {pos} rejected: {verdict.reason.value}"
                )
            if reg.output_unit in seen:
                raise GenesisError(f"registration {pos} duplicates an output unit")
            seen.add(reg.output_unit)
        slot = Slot(index=0, entries=list(registrations))
        ledger.slots.append(slot)
        for reg in registrations:
            ledger.index.register_genesis(reg.output_unit)
            ledger.state.live.add(reg.output_unit)
        ledger.genesis_count = len(registrations)
        return ledger

    def attach_options(self, option_keys) -> None:
        """Register the common-knowledge option keys so vote outputs
        become terminal (spends by these keys are discarded)."""
        self.option_keys = frozenset(option_keys)

    def view(self) -> LedgerView:
        return LedgerView(state=self.state, index=self.index)

    def clone(self) -> Ledger:
        """Independent copy rebuilt through a full replay."""
        copy = Ledger(profile=self.profile)
        copy.slots = [Slot(index=s.index, entries=list(s.entries)) for s in self.slots]
        copy.option_keys = self.option_keys
        copy.genesis_count = self.genesis_count
        copy.state, copy.index = copy.replay()
        copy.state.frozen = self.state.frozen
        return copy

    # --- appends -------------------------------------------------------------

    def append_slot(self, entries: list[Entry]) -> list[Verdict]:
        """Validate `entries` in order against the evolving state and
        store the accepted ones as the next slot.

        Intra-slot conflicts are first-wins. Rejected entries are
        excluded from the stored slot; their verdicts are the caller's
        only record of them.
        """
        slot = Slot(index=len(self.slots))
        verdicts: list[Verdict] = []
        for entry in entries:
            verdict = self._validate(entry)
            verdicts.append(verdict)
            if verdict.accepted:
                self._apply(entry)
                slot.entries.append(entry)
        self.slots.append(slot)
        return verdicts

    def _validate(self, entry: Entry) -> Verdict:
        if isinstance(entry, Transition):
            return validate_transition(entry, self.state, self.index, self.option_keys)
        if isinstance(entry, Reversal):
            return validate_reversal(entry, self.state, self.index)
        raise LedgerError("genesis registrations are only valid in slot 0")

    def _apply(self, entry: Entry) -> None:
        if isinstance(entry, Transition):
            self.index.apply_transition(entry)
            self.state.live.discard(entry.input_unit)
            self.state.live.add(entry.output_unit)
        else:
            descendant = self.index.live_descendant(
                self.state.live, entry.delegated_output
            )
            self.index.apply_reversal(entry, descendant)
            self.state.live.discard(descendant)
            self.state.live.add(entry.new_output)

    # --- replay ---------------------------------------------------------------

    def replay(self) -> tuple[State, LineageIndex]:
        """Recompute (state, index) from the stored slots.

        Every stored entry must re-validate; anything else means the
        ledger was tampered with after acceptance.
        """
        if not self.slots or self.slots[0].index != 0:
            raise LedgerFormatError("ledger has no genesis slot")
        replayed = Ledger(profile=self.profile)
        replayed.option_keys = self.option_keys
        genesis_entries = self.slots[0].entries
        for pos, entry in enumerate(genesis_entries):
            if not isinstance(entry, GenesisRegistration):
                raise LedgerFormatError(f"slot 0 entry {pos} is not a registration")
        try:
            rebuilt = Ledger.genesis_init(genesis_entries, profile=self.profile)
        except GenesisError as exc:
            raise ReplayError(f"slot 0: {exc}") from exc
        rebuilt.option_keys = self.option_keys
        for slot in self.slots[1:]:
            for pos, entry in enumerate(slot.entries):
                if isinstance(entry, GenesisRegistration):
                    raise LedgerFormatError(
                        f"slot {slot.index} entry {pos}: registration outside slot 0"
                    )
                verdict = rebuilt._validate(entry)
                if not verdict.accepted:
                    raise ReplayError(
                        f"slot {slot.index} entry {pos} rejected on replay: "
                        f"{verdict.reason.value}"
                    )
                rebuilt._apply(entry)
            rebuilt.slots.append(Slot(index=slot.index, entries=list(slot.entries)))
        return rebuilt.state, rebuilt.index

    # --- persistence ------------------------------------------------------------

    def save(self, path: str | os.PathLike) -> None:
        """Write the ledger as JSON Lines; refuse non-persistable profiles."""
        if not self.profile.persistable:
            raise LedgerError(f"profile {self.profile.name} refuses persistence")
        with open(path, "w", encoding="ascii") as fh:
            fh.write(_dumps({"version": self.profile.name, "genesis_count": self.genesis_count}))
            fh.write("\n")
            for slot in self.slots:
                doc = {"t": slot.index, "entries": [entry_to_json(e) for e in slot.entries]}
                fh.write(_dumps(doc))
                fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> Ledger:
        """Parse and fully replay a ledger file; any inconsistency raises."""
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise LedgerFormatError("empty ledger file")
        header = _loads(lines[0], "header")
        version = header.get("version")
        if version != LLV1.name:
            raise LedgerFormatError(f"unsupported ledger version: {version!r}")
        ledger = cls(profile=LLV1)
        for lineno, line in enumerate(lines[1:]):
            doc = _loads(line, f"slot line {lineno}")
            t = doc.get("t")
            if t != lineno:
                raise LedgerFormatError(f"slot line {lineno}: bad slot index {t!r}")
            try:
                entries = [entry_from_json(e) for e in doc.get("entries", [])]
            except EncodingError as exc:
                raise LedgerFormatError(f"slot {lineno}: {exc}") from exc
            ledger.slots.append(Slot(index=t, entries=entries))
        if not ledger.slots:
            raise LedgerFormatError("ledger file has no slots")
        if header.get("genesis_count") != len(ledger.slots[0].entries):
            raise LedgerFormatError("header genesis_count does not match slot 0")
        state, index = ledger.replay()
        ledger.state = state
        ledger.index = index
        ledger.genesis_count = len(ledger.slots[0].entries)
        return ledger


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _loads(line: str, what: str):
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LedgerFormatError(f"malformed {what}: {exc}") from exc
    if not isinstance(doc, dict):
        raise LedgerFormatError(f"malformed {what}: not an object")
    return doc


def replay(ledger: Ledger) -> tuple[State, LineageIndex]:
    """Module-level alias of `Ledger.replay`."""
    return ledger.replay()


def live_descendant(index: LineageIndex, state: State, unit: bytes) -> bytes | None:
    """Walk the public lineage from `unit` to its live leaf, if any."""
    return index.live_descendant(state.live, unit)


def export_state_lines(state: State) -> str:
    """Sorted live unit ids, one lowercase-hex id per line."""
    return "\n".join(to_hex(u) for u in sorted(state.live)) + ("\n" if state.live else "")
