"""Deterministic multi-party simulation harness and adversary games.

A scenario spawns wallets and option entities, routes their wire
messages over a lossless in-process bus (with an interception tap),
executes a scripted or randomized action sequence one slot per action,
and checks conservation after every slot. The same scenario and seed
always produce a bit-identical ledger.

The games operationalize the protocol's security arguments: a linker
adversary tries to deanonymize receivers by brute force, a MITM
adversary tries to turn intercepted offers into accepted forgeries, and
the reversal-rights game checks who can and cannot reclaim a lineage.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import yaml

from . import crypto
from .commitment import compute_stage, genesis_placeholder, inner_commitment, unit_id
from .crypto import hash_bytes
from .entries import (
    GenesisRegistration,
    Reversal,
    Transition,
    build_reversal as _build_reversal_entry,
    build_transition as _build_transition_entry,
    signing_payload,
    validate_reversal,
)
from .ledger import Ledger
from .profiles import LLV1, Profile, profile_by_name
from .scan import scan_stage
from .voting import OptionEntity, OptionRegistry, finalize
from .wallet import (
    DelegationStub,
    InputAnnounce,
    OwnershipRecord,
    Wallet,
    message_to_json,
)


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class BusMessage:
    sender: str
    recipient: str
    kind: str
    payload: dict


class MessageBus:
    """Lossless in-process channel; keeps a tap of everything routed."""

    def __init__(self) -> None:
        self.log: list[BusMessage] = []

    def send(self, sender: str, recipient: str, message) -> None:
        doc = message_to_json(message)
        self.log.append(
            BusMessage(sender=sender, recipient=recipient, kind=doc.pop("kind"), payload=doc)
        )


@dataclass
class Scenario:
    seed: int
    voters: int
    options: list[str] = field(default_factory=list)
    units_per_voter: int = 1
    profile: Profile = LLV1
    actions: list[dict] = field(default_factory=list)
    games: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> Scenario:
        try:
            return cls(
                seed=int(doc["seed"]),
                voters=int(doc["voters"]),
                options=list(doc.get("options", [])),
                units_per_voter=int(doc.get("units_per_voter", 1)),
                profile=profile_by_name(doc.get("profile", "llv1")),
                actions=list(doc.get("actions", [])),
                games=dict(doc.get("games", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad scenario document: {exc}") from exc

    @classmethod
    def from_file(cls, path) -> Scenario:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict):
            raise ScenarioError("scenario file must hold a mapping")
        return cls.from_dict(doc)


@dataclass
class SimRun:
    scenario: Scenario
    ledger: Ledger
    wallets: dict[str, Wallet]
    entities: dict[str, OptionEntity]
    registry: OptionRegistry
    receiver_truth: dict[bytes, str]
    bus: MessageBus
    metrics: dict


def run(scenario: Scenario) -> SimRun:
    """Execute a scenario deterministically; one ledger slot per action."""
    harness = _Harness(scenario)
    for action in scenario.actions:
        op = action.get("op")
        if op == "random":
            for _ in range(int(action.get("count", 1))):
                harness.execute(harness.random_action())
        else:
            harness.execute(action)
    return harness.result()


class _Harness:
    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.rng = random.Random(scenario.seed)
        self.profile = scenario.profile
        self.voters = [f"v{i}" for i in range(scenario.voters)]
        self.wallets: dict[str, Wallet] = {
            name: Wallet.create(rng=random.Random(self.rng.getrandbits(64)), profile=self.profile)
            for name in self.voters
        }
        self.entities: dict[str, OptionEntity] = {
            label: OptionEntity.create(
                label, rng=random.Random(self.rng.getrandbits(64)), profile=self.profile
            )
            for label in scenario.options
        }
        if len(self.entities) != len(scenario.options):
            raise ScenarioError("duplicate option labels")
        self.registry = OptionRegistry(
            {label: e.public_key for label, e in self.entities.items()}
        )
        registrations = []
        for name in self.voters:
            for _ in range(scenario.units_per_voter):
                registrations.append(self.wallets[name].make_genesis_registration())
        self.ledger = Ledger.genesis_init(registrations, profile=self.profile)
        self.ledger.attach_options(self.registry.key_set())
        for wallet in self.wallets.values():
            wallet.detect_incoming(self.ledger.view())
        self.bus = MessageBus()
        self.receiver_truth: dict[bytes, str] = {}
        self.verdict_counts: dict[str, int] = {"accepted": 0}
        self.entry_counts = {"transition": 0, "reversal": 0}

    # -- actor/unit resolution --

    def _wallet(self, name) -> Wallet:
        try:
            return self.wallets[name]
        except KeyError:
            raise ScenarioError(f"unknown voter: {name!r}") from None

    def _entity(self, label) -> OptionEntity:
        try:
            return self.entities[label]
        except KeyError:
            raise ScenarioError(f"unknown option: {label!r}") from None

    def _pick_record(self, wallet: Wallet, action: dict) -> OwnershipRecord:
        spendable = wallet.spendable_units(self.ledger.view())
        if not spendable:
            raise ScenarioError(f"no spendable unit for {action}")
        prefix = action.get("unit")
        if prefix:
            for record in spendable:
                if record.unit.hex().startswith(prefix):
                    return record
            raise ScenarioError(f"no spendable unit matching {prefix!r}")
        return spendable[0]

    # -- execution --

    def execute(self, action: dict) -> None:
        op = action.get("op")
        if op == "delegate":
            self._delegate(action)
        elif op == "transfer":
            self._transfer(action)
        elif op == "vote":
            self._vote(action)
        elif op == "reverse":
            self._reverse(action)
        elif op == "finalize":
            finalize(self.ledger.state)
        else:
            raise ScenarioError(f"unknown action op: {op!r}")
        if len(self.ledger.state.live) != self.ledger.genesis_count:
            raise ScenarioError(f"conservation violated after {action}")

    def _submit(self, entry, action: dict) -> None:
        verdict = self.ledger.append_slot([entry])[0]
        if not verdict.accepted:
            raise ScenarioError(
                f"scripted action rejected ({verdict.reason.value}): {action}"
            )
        self.verdict_counts["accepted"] += 1
        kind = "reversal" if isinstance(entry, Reversal) else "transition"
        self.entry_counts[kind] += 1

    def _delegate(self, action: dict) -> None:
        sender = self._wallet(action.get("from"))
        receiver = self._wallet(action.get("to"))
        record = self._pick_record(sender, action)
        offer = receiver.make_delegation_offer()
        self.bus.send(action["to"], action["from"], offer)
        transition, _stub = sender.accept_delegation_offer(record, offer)
        self._submit(transition, action)
        self.receiver_truth[transition.output_unit] = action["to"]
        view = self.ledger.view()
        receiver.detect_incoming(view)
        sender.detect_incoming(view)

    def _transfer(self, action: dict) -> None:
        sender = self._wallet(action.get("from"))
        receiver = self._wallet(action.get("to"))
        record = self._pick_record(sender, action)
        announce = InputAnnounce(input_unit=record.unit)
        self.bus.send(action["from"], action["to"], announce)
        offer = receiver.make_transfer_offer(announce)
        self.bus.send(action["to"], action["from"], offer)
        transition = sender.accept_transfer_offer(record, offer)
        self._submit(transition, action)
        self.receiver_truth[transition.output_unit] = action["to"]
        view = self.ledger.view()
        receiver.detect_incoming(view)
        sender.detect_incoming(view)

    def _vote(self, action: dict) -> None:
        voter = self._wallet(action.get("voter"))
        entity = self._entity(action.get("option"))
        record = self._pick_record(voter, action)
        announce = InputAnnounce(input_unit=record.unit)
        self.bus.send(action["voter"], entity.label, announce)
        offer = entity.request_vote_offer(announce)
        self.bus.send(entity.label, action["voter"], offer)
        transition = voter.accept_transfer_offer(record, offer)
        self._submit(transition, action)
        self.receiver_truth[transition.output_unit] = entity.label
        view = self.ledger.view()
        entity.confirm(view)
        voter.detect_incoming(view)

    def _reverse(self, action: dict) -> None:
        wallet = self._wallet(action.get("by"))
        unused = [s for s in wallet.stubs if not s.used]
        if not unused:
            raise ScenarioError(f"no reversible delegation for {action}")
        which = action.get("stub", "latest")
        if which == "latest":
            stub = unused[-1]
        elif which == "oldest":
            stub = unused[0]
        else:
            try:
                stub = unused[int(which)]
            except (ValueError, IndexError):
                raise ScenarioError(f"bad stub selector: {which!r}") from None
        reversal = wallet.build_reversal(stub, self.ledger.view())
        self._submit(reversal, action)
        wallet.detect_incoming(self.ledger.view())

    # -- randomized workload --

    _WEIGHTS = (("delegate", 0.35), ("transfer", 0.30), ("vote", 0.20), ("reverse", 0.15))

    def random_action(self) -> dict:
        """One feasible action drawn from the scenario rng."""
        view = self.ledger.view()
        holders = [
            name
            for name in self.voters
            if self.wallets[name].spendable_units(view)
        ]
        reversers = [
            name
            for name in self.voters
            if any(not s.used for s in self.wallets[name].stubs)
        ]
        for _ in range(32):
            roll = self.rng.random()
            kind = "reverse"
            acc = 0.0
            for name, weight in self._WEIGHTS:
                acc += weight
                if roll < acc:
                    kind = name
                    break
            if kind in ("delegate", "transfer") and holders:
                sender = self.rng.choice(holders)
                others = [v for v in self.voters if v != sender] or [sender]
                return {"op": kind, "from": sender, "to": self.rng.choice(others)}
            if kind == "vote" and holders and self.scenario.options:
                return {
                    "op": "vote",
                    "voter": self.rng.choice(holders),
                    "option": self.rng.choice(self.scenario.options),
                }
            if kind == "reverse" and reversers:
                return {"op": "reverse", "by": self.rng.choice(reversers), "stub": "latest"}
        raise ScenarioError("no feasible random action (all power voted away?)")

    # -- result --

    def result(self) -> SimRun:
        depths = [
            self.ledger.index.stage_depth[u] for u in sorted(self.ledger.state.live)
        ]
        metrics = {
            "profile": self.profile.name,
            "slots": len(self.ledger.slots),
            "genesis_count": self.ledger.genesis_count,
            "entries": dict(self.entry_counts),
            "verdicts": dict(self.verdict_counts),
            "live": len(self.ledger.state.live),
            "lineage": {
                "max_stage_depth": max(depths) if depths else 0,
                "mean_stage_depth": (sum(depths) / len(depths)) if depths else 0.0,
            },
            "state_hash": self.ledger.state.snapshot_hash().hex(),
            "intercepted_messages": len(self.bus.log),
        }
        return SimRun(
            scenario=self.scenario,
            ledger=self.ledger,
            wallets=self.wallets,
            entities=self.entities,
            registry=self.registry,
            receiver_truth=self.receiver_truth,
            bus=self.bus,
            metrics=metrics,
        )


def fig1_scenario(seed: int = 7, profile: Profile = LLV1) -> Scenario:
    """Three owners, two delegations: one unit evolving through three
    hands, the smallest interesting chain."""
    return Scenario(
        seed=seed,
        voters=3,
        options=[],
        units_per_voter=1,
        profile=profile,
        actions=[
            {"op": "delegate", "from": "v0", "to": "v1"},
            {"op": "delegate", "from": "v1", "to": "v2"},
        ],
    )


# --- adversary view ----------------------------------------------------------


@dataclass
class AdversaryView:
    """What an eavesdropper can hold: the public ledger, every public
    key in circulation, optionally the intercepted wire traffic — and
    never a secret key or plaintext nonce (unless a leak is simulated)."""

    ledger: Ledger
    candidate_keys: list[tuple[str, bytes]]
    actors: list[str]
    nonce_len: int
    intercepted: list[BusMessage] = field(default_factory=list)
    leaked_nonces: dict[bytes, bytes] | None = None


def build_adversary_view(
    sim_run: SimRun, intercept: bool = False, leak_nonces: bool = False
) -> AdversaryView:
    candidate_keys: list[tuple[str, bytes]] = []
    for name in sorted(sim_run.wallets):
        for pk in sim_run.wallets[name].derived_public_keys():
            candidate_keys.append((name, pk))
    for label in sorted(sim_run.entities):
        candidate_keys.append((label, sim_run.entities[label].public_key))
    actors = sorted(sim_run.wallets) + sorted(sim_run.entities)
    leaked = None
    if leak_nonces:
        leaked = {}
        for wallet in sim_run.wallets.values():
            for record in wallet.records.values():
                leaked[record.unit] = record.nonce
        for entity in sim_run.entities.values():
            for claim in entity.received + entity.pending:
                leaked[claim.unit] = claim.nonce
    return AdversaryView(
        ledger=sim_run.ledger,
        candidate_keys=candidate_keys,
        actors=actors,
        nonce_len=sim_run.scenario.profile.nonce_len,
        intercepted=list(sim_run.bus.log) if intercept else [],
        leaked_nonces=leaked,
    )


@dataclass
class GameReport:
    game: str
    trials: int
    successes: int
    baseline: float
    verdict: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "game": self.game,
            "trials": self.trials,
            "successes": self.successes,
            "baseline": self.baseline,
            "verdict": self.verdict,
            "detail": self.detail,
        }


# --- linker game ---------------------------------------------------------------


def game_linker(
    view: AdversaryView,
    receiver_truth: dict[bytes, str],
    budget: int = 2**20,
    trials: int = 16,
    game_seed: int = 0,
) -> GameReport:
    """Try to identify each sampled transition's receiver.

    The adversary brute-forces up to `budget` (nonce, key) pairs per
    transition against the full key registry; when the search fails it
    falls back to a uniform guess over the actors. Success is measured
    against the ground truth the harness kept.
    """
    rng = random.Random(game_seed)
    eligible = [
        entry
        for slot in view.ledger.slots
        for entry in slot.entries
        if isinstance(entry, Transition) and entry.output_unit in receiver_truth
    ]
    if not eligible:
        raise ScenarioError("no transitions with known receivers to attack")
    trials = min(trials, len(eligible))
    sample = rng.sample(eligible, trials)
    hp_blob = b"".join(hash_bytes(pk) for _, pk in view.candidate_keys)
    successes = 0
    search_hits = 0
    for entry in sample:
        guess = None
        if view.leaked_nonces is not None:
            nonce = view.leaked_nonces.get(entry.output_unit)
            if nonce is not None:
                leaked_hn = hash_bytes(nonce)
                for actor, pk in view.candidate_keys:
                    if (
                        unit_id(
                            inner_commitment(leaked_hn, hash_bytes(pk)),
                            entry.input_unit,
                        )
                        == entry.output_unit
                    ):
                        guess = actor
                        break
        else:
            hit = scan_stage(
                entry.input_unit, entry.output_unit, hp_blob, view.nonce_len, budget
            )
            if hit is not None:
                guess = view.candidate_keys[hit[1]][0]
                search_hits += 1
        if guess is None:
            guess = rng.choice(view.actors)
        if guess == receiver_truth[entry.output_unit]:
            successes += 1
    baseline = 1.0 / len(view.actors)
    sigma = math.sqrt(trials * baseline * (1.0 - baseline))
    within = abs(successes - trials * baseline) <= 3.0 * sigma
    return GameReport(
        game="linker",
        trials=trials,
        successes=successes,
        baseline=baseline,
        verdict="no_advantage" if within else "advantage",
        detail={
            "budget": budget,
            "nonce_len": view.nonce_len,
            "search_hits": search_hits,
            "threshold_3sigma": 3.0 * sigma,
            "candidates": len(view.actors),
            "leaked": view.leaked_nonces is not None,
        },
    )


# --- MITM forgery game -----------------------------------------------------------


def game_mitm(
    view: AdversaryView, attempts: int = 10_000, game_seed: int = 0
) -> GameReport:
    """Submit forged entries built from intercepted offers and public
    data; the adversary holds no honest secret key, so zero acceptances
    are expected.

    Strategies cycle through: replaying accepted entries, tampering with
    outputs, spending a known delegated output under a forged signature,
    front-running a reversal with the adversary's own key, forging the
    original sender's signature, and pure garbage.
    """
    rng = random.Random(game_seed)
    adversary = crypto.derive_keypair(crypto.new_seed(rng), 0)
    scratch = view.ledger.clone()
    # The game probes the structural defenses, not the freeze gate.
    scratch.state.frozen = False
    transitions = [
        entry
        for slot in view.ledger.slots
        for entry in slot.entries
        if isinstance(entry, Transition)
    ]
    if not transitions:
        raise ScenarioError("nothing to forge against")
    pk_by_hash = {hash_bytes(pk): pk for _, pk in view.candidate_keys}
    matched = _match_offers(view, transitions, pk_by_hash)
    # Forged spends are strongest against still-live delegated outputs:
    # they pass every public check and die only on the signature.
    live_matched = [
        m for m in matched if m["delegated_output"] in scratch.state.live
    ] or matched

    accepted = 0
    reasons: dict[str, int] = {}
    batch: list = []

    def flush() -> None:
        nonlocal accepted
        if not batch:
            return
        for verdict in scratch.append_slot(batch):
            if verdict.accepted:
                accepted += 1
            else:
                reasons[verdict.reason.value] = reasons.get(verdict.reason.value, 0) + 1
        batch.clear()

    for i in range(attempts):
        strategy = i % 6
        entry = None
        if strategy == 0:
            entry = rng.choice(transitions)  # replay verbatim
        elif strategy == 1:
            base = rng.choice(transitions)  # tampered output, stale signature
            entry = Transition(
                nonce_hash=base.nonce_hash,
                sender_pk=base.sender_pk,
                prev_unit=base.prev_unit,
                input_unit=base.input_unit,
                output_unit=rng.randbytes(32),
                signature=base.signature,
            )
        elif strategy == 2 and live_matched:
            offer = rng.choice(live_matched)  # spend a delegated output, forged sig
            entry = Transition(
                nonce_hash=offer["h_n"],
                sender_pk=offer["receiver_pk"],
                prev_unit=offer["delegated_input"],
                input_unit=offer["delegated_output"],
                output_unit=rng.randbytes(32),
                signature=rng.randbytes(64),
            )
        elif strategy == 3 and matched:
            offer = rng.choice(matched)  # reversal front-run, own valid key
            unsigned = Reversal(
                nonce_hash=offer["h_n"],
                pubkey_hash=offer["h_p"],
                sender_pk=adversary.public_key,
                delegated_input=offer["delegated_input"],
                delegated_output=offer["delegated_output"],
                new_output=rng.randbytes(32),
                signature=b"\x00" * 64,
            )
            entry = Reversal(
                nonce_hash=unsigned.nonce_hash,
                pubkey_hash=unsigned.pubkey_hash,
                sender_pk=unsigned.sender_pk,
                delegated_input=unsigned.delegated_input,
                delegated_output=unsigned.delegated_output,
                new_output=unsigned.new_output,
                signature=crypto.sign(adversary.secret, signing_payload(unsigned)),
            )
        elif strategy == 4 and matched:
            offer = rng.choice(matched)  # true sender pk, forged signature
            entry = Reversal(
                nonce_hash=offer["h_n"],
                pubkey_hash=offer["h_p"],
                sender_pk=offer["sender_pk"],
                delegated_input=offer["delegated_input"],
                delegated_output=offer["delegated_output"],
                new_output=rng.randbytes(32),
                signature=rng.randbytes(64),
            )
        if entry is None:  # garbage fallback
            entry = Transition(
                nonce_hash=rng.randbytes(32),
                sender_pk=adversary.public_key,
                prev_unit=rng.randbytes(32),
                input_unit=rng.randbytes(32),
                output_unit=rng.randbytes(32),
                signature=rng.randbytes(64),
            )
        batch.append(entry)
        if len(batch) >= 500:
            flush()
    flush()
    return GameReport(
        game="mitm",
        trials=attempts,
        successes=accepted,
        baseline=0.0,
        verdict="forgeries_rejected" if accepted == 0 else "forgery_accepted",
        detail={
            "rejection_reasons": dict(sorted(reasons.items())),
            "intercepted_offers_matched": len(matched),
        },
    )


def _match_offers(
    view: AdversaryView,
    transitions: list[Transition],
    pk_by_hash: dict[bytes, bytes],
) -> list[dict]:
    """Correlate intercepted delegation offers with the ledger entries
    that consumed them; this is everything a MITM learns."""
    matched = []
    offers = [m for m in view.intercepted if m.kind == "delegation_offer"]
    for message in offers:
        h_n = bytes.fromhex(message.payload["h_n"])
        h_p = bytes.fromhex(message.payload["h_p"])
        inner = inner_commitment(h_n, h_p)
        for entry in transitions:
            if unit_id(inner, entry.input_unit) == entry.output_unit:
                matched.append(
                    {
                        "h_n": h_n,
                        "h_p": h_p,
                        "delegated_input": entry.input_unit,
                        "delegated_output": entry.output_unit,
                        "sender_pk": entry.sender_pk,
                        "receiver_pk": pk_by_hash.get(h_p, h_p[:32]),
                    }
                )
                break
    return matched


# --- reversal rights game ----------------------------------------------------------


def game_reversal_rights(
    cases: int = 1000, game_seed: int = 0, profile: Profile = LLV1
) -> GameReport:
    """Exercise the full rights matrix on `cases` independent lineages:
    only the delegation sender's reversal is accepted; the delegation
    receiver, the transfer sender and a third party are all rejected."""
    rng = random.Random(game_seed)
    seed_senders = crypto.new_seed(rng)
    seed_receivers = crypto.new_seed(rng)
    seed_third = crypto.new_seed(rng)
    placeholder = genesis_placeholder()

    registrations = []
    sender_records: list[OwnershipRecord] = []
    sender_keys = []
    for i in range(2 * cases):
        kp = crypto.derive_keypair(seed_senders, i)
        nonce = crypto.gen_nonce(rng, profile)
        secrets, _, unit = compute_stage(nonce, kp.public_key, placeholder)
        unsigned = GenesisRegistration(
            nonce_hash=secrets.nonce_hash,
            sender_pk=kp.public_key,
            output_unit=unit,
            signature=b"\x00" * 64,
        )
        registrations.append(
            GenesisRegistration(
                nonce_hash=unsigned.nonce_hash,
                sender_pk=unsigned.sender_pk,
                output_unit=unsigned.output_unit,
                signature=crypto.sign(kp.secret, signing_payload(unsigned)),
            )
        )
        sender_records.append(
            OwnershipRecord(nonce=nonce, key_index=i, prev_unit=placeholder, unit=unit)
        )
        sender_keys.append(kp)
    ledger = Ledger.genesis_init(registrations, profile=profile)

    # First `cases` units get delegated, the rest transferred.
    spends = []
    delegation_stubs: list[DelegationStub] = []
    receiver_keys = []
    for i in range(cases):
        rk = crypto.derive_keypair(seed_receivers, i)
        r_nonce = crypto.gen_nonce(rng, profile)
        offer_hn, offer_hp = hash_bytes(r_nonce), hash_bytes(rk.public_key)
        output = unit_id(inner_commitment(offer_hn, offer_hp), sender_records[i].unit)
        spends.append(
            _build_transition_entry(sender_records[i], output, sender_keys[i])
        )
        delegation_stubs.append(
            DelegationStub(
                nonce_hash=offer_hn,
                pubkey_hash=offer_hp,
                delegated_input=sender_records[i].unit,
                delegated_output=output,
            )
        )
        receiver_keys.append(rk)
    for i in range(cases):
        j = cases + i
        rk = crypto.derive_keypair(seed_receivers, j)
        r_nonce = crypto.gen_nonce(rng, profile)
        _, _, output = compute_stage(r_nonce, rk.public_key, sender_records[j].unit)
        spends.append(_build_transition_entry(sender_records[j], output, sender_keys[j]))
    verdicts = ledger.append_slot(spends)
    if not all(v.accepted for v in verdicts):
        raise ScenarioError("rights-game setup spends were rejected")

    third = crypto.derive_keypair(seed_third, 0)
    state, index = ledger.state, ledger.index
    receiver_rejected = 0
    third_rejected = 0
    transfer_sender_rejected = 0
    sender_reversals = []
    for i in range(cases):
        stub = delegation_stubs[i]
        descendant = stub.delegated_output  # no re-delegation in this game
        # Delegation receiver: right hashes, own key.
        r_nonce = crypto.gen_nonce(rng, profile)
        _, _, r_new = compute_stage(r_nonce, receiver_keys[i].public_key, descendant)
        attempt = _build_reversal_entry(stub, r_new, receiver_keys[i])
        if not validate_reversal(attempt, state, index).accepted:
            receiver_rejected += 1
        # Third party with intercepted hashes.
        attempt = _build_reversal_entry(stub, rng.randbytes(32), third)
        if not validate_reversal(attempt, state, index).accepted:
            third_rejected += 1
        # Transfer sender: never saw separable hashes, guesses them.
        j = cases + i
        guessed = Reversal(
            nonce_hash=rng.randbytes(32),
            pubkey_hash=rng.randbytes(32),
            sender_pk=sender_keys[j].public_key,
            delegated_input=sender_records[j].unit,
            delegated_output=index.child[sender_records[j].unit],
            new_output=rng.randbytes(32),
            signature=b"\x00" * 64,
        )
        guessed = Reversal(
            nonce_hash=guessed.nonce_hash,
            pubkey_hash=guessed.pubkey_hash,
            sender_pk=guessed.sender_pk,
            delegated_input=guessed.delegated_input,
            delegated_output=guessed.delegated_output,
            new_output=guessed.new_output,
            signature=crypto.sign(sender_keys[j].secret, signing_payload(guessed)),
        )
        if not validate_reversal(guessed, state, index).accepted:
            transfer_sender_rejected += 1
        # Legitimate sender reversal, appended at the end.
        s_nonce = crypto.gen_nonce(rng, profile)
        s_kp = crypto.derive_keypair(seed_senders, 2 * cases + i)
        _, _, s_new = compute_stage(s_nonce, s_kp.public_key, descendant)
        sender_reversals.append(_build_reversal_entry(stub, s_new, sender_keys[i]))
    sender_accepted = sum(
        1 for v in ledger.append_slot(sender_reversals) if v.accepted
    )

    matrix_holds = (
        sender_accepted == cases
        and receiver_rejected == cases
        and third_rejected == cases
        and transfer_sender_rejected == cases
    )
    return GameReport(
        game="reversal_rights",
        trials=4 * cases,
        successes=sender_accepted + receiver_rejected + third_rejected + transfer_sender_rejected,
        baseline=1.0,
        verdict="rights_matrix_holds" if matrix_holds else "rights_matrix_violated",
        detail={
            "cases": cases,
            "sender_accepted": sender_accepted,
            "receiver_rejected": receiver_rejected,
            "third_party_rejected": third_rejected,
            "transfer_sender_rejected": transfer_sender_rejected,
        },
    )


# --- bulk ledger synthesis (fixtures, performance floor) -----------------------------


def synthesize_ledger(
    n_entries: int,
    seed: int = 0,
    holders: int = 50,
    slot_size: int = 250,
    profile: Profile = LLV1,
) -> Ledger:
    """Build a ledger with `holders` genesis units and `n_entries`
    random hand-to-hand transitions, batched into slots. Wallet-free and
    deterministic; used for golden fixtures and the performance floor."""
    rng = random.Random(seed)
    master = crypto.new_seed(rng)
    placeholder = genesis_placeholder()
    next_key = 0

    def fresh_key():
        nonlocal next_key
        kp = crypto.derive_keypair(master, next_key)
        next_key += 1
        return kp

    registrations = []
    pool: list[tuple[OwnershipRecord, crypto.KeyPair]] = []
    for _ in range(holders):
        kp = fresh_key()
        nonce = crypto.gen_nonce(rng, profile)
        secrets, _, unit = compute_stage(nonce, kp.public_key, placeholder)
        unsigned = GenesisRegistration(
            nonce_hash=secrets.nonce_hash,
            sender_pk=kp.public_key,
            output_unit=unit,
            signature=b"\x00" * 64,
        )
        registrations.append(
            GenesisRegistration(
                nonce_hash=unsigned.nonce_hash,
                sender_pk=unsigned.sender_pk,
                output_unit=unsigned.output_unit,
                signature=crypto.sign(kp.secret, signing_payload(unsigned)),
            )
        )
        pool.append(
            (
                OwnershipRecord(
                    nonce=nonce, key_index=kp.index, prev_unit=placeholder, unit=unit
                ),
                kp,
            )
        )
    ledger = Ledger.genesis_init(registrations, profile=profile)

    built = 0
    while built < n_entries:
        batch = []
        for _ in range(min(slot_size, n_entries - built)):
            idx = rng.randrange(len(pool))
            record, kp = pool[idx]
            new_kp = fresh_key()
            new_nonce = crypto.gen_nonce(rng, profile)
            _, _, output = compute_stage(new_nonce, new_kp.public_key, record.unit)
            batch.append(_build_transition_entry(record, output, kp))
            pool[idx] = (
                OwnershipRecord(
                    nonce=new_nonce,
                    key_index=new_kp.index,
                    prev_unit=record.unit,
                    unit=output,
                ),
                new_kp,
            )
            built += 1
        verdicts = ledger.append_slot(batch)
        if not all(v.accepted for v in verdicts):
            raise ScenarioError("synthesized entry rejected")
    return ledger


# --- scenario-file driver -------------------------------------------------------------


def run_scenario_file(path) -> dict:
    """Execute a scenario file and its configured games; returns the
    JSON-ready report."""
    scenario = Scenario.from_file(path)
    sim_run = run(scenario)
    report = {"metrics": sim_run.metrics, "games": []}
    games = scenario.games or {}
    if "linker" in games:
        cfg = games["linker"] or {}
        view = build_adversary_view(
            sim_run, intercept=False, leak_nonces=bool(cfg.get("leak_nonces", False))
        )
        report["games"].append(
            game_linker(
                view,
                sim_run.receiver_truth,
                budget=int(cfg.get("budget", 2**20)),
                trials=int(cfg.get("trials", 16)),
                game_seed=int(cfg.get("seed", 0)),
            ).to_json()
        )
    if "mitm" in games:
        cfg = games["mitm"] or {}
        view = build_adversary_view(sim_run, intercept=True)
        report["games"].append(
            game_mitm(
                view,
                attempts=int(cfg.get("attempts", 10_000)),
                game_seed=int(cfg.get("seed", 0)),
            ).to_json()
        )
    if "reversal_rights" in games:
        cfg = games["reversal_rights"] or {}
        report["games"].append(
            game_reversal_rights(
                cases=int(cfg.get("cases", 1000)),
                game_seed=int(cfg.get("seed", 0)),
                profile=scenario.profile,
            ).to_json()
        )
    return report
