"""Regenerate the golden fixture files.

Run from the repository root after an intentional change to any
bit-exact encoding:

    python tests/fixtures/make_golden.py

The frozen values pin key derivation, the commitment composition, the
signing payloads and the canonical ledger serialization; unintentional
drift in any of them is a compatibility break and must fail tests.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from liquidledger import crypto, sim
from liquidledger.commitment import (
    compute_stage,
    genesis_placeholder,
    inner_commitment,
    unit_id,
)
from liquidledger.entries import Reversal, Transition, signing_payload

HERE = Path(__file__).parent
TEST_SEED = bytes(range(32))


def _fixed(n: int, length: int = 32) -> bytes:
    return bytes((n + i) % 256 for i in range(length))


def golden_keys() -> dict:
    pairs = [crypto.derive_keypair(TEST_SEED, i) for i in range(4)]
    return {
        "seed": TEST_SEED.hex(),
        "public_keys": [kp.public_key.hex() for kp in pairs],
    }


def golden_commitment() -> dict:
    h_n, h_p = _fixed(1), _fixed(2)
    prev = _fixed(3)
    inner = inner_commitment(h_n, h_p)
    doc = {
        "h_n": h_n.hex(),
        "h_p": h_p.hex(),
        "prev": prev.hex(),
        "inner": inner.hex(),
        "unit": unit_id(inner, prev).hex(),
        "placeholder": genesis_placeholder().hex(),
    }
    # Three-stage chain from fixed nonces and derived keys.
    chain = []
    prev_unit = genesis_placeholder()
    for stage in range(3):
        nonce = _fixed(10 + stage)
        kp = crypto.derive_keypair(TEST_SEED, stage)
        _, inner, prev_unit = compute_stage(nonce, kp.public_key, prev_unit)
        chain.append({"nonce": nonce.hex(), "key_index": stage, "unit": prev_unit.hex()})
    doc["chain"] = chain
    return doc


def golden_payloads() -> dict:
    transition = Transition(
        nonce_hash=_fixed(1),
        sender_pk=crypto.derive_keypair(TEST_SEED, 0).public_key,
        prev_unit=_fixed(3),
        input_unit=_fixed(4),
        output_unit=_fixed(5),
        signature=bytes(64),
    )
    reversal = Reversal(
        nonce_hash=_fixed(1),
        pubkey_hash=_fixed(2),
        sender_pk=crypto.derive_keypair(TEST_SEED, 1).public_key,
        delegated_input=_fixed(4),
        delegated_output=_fixed(5),
        new_output=_fixed(6),
        signature=bytes(64),
    )
    return {
        "transition_payload": signing_payload(transition).hex(),
        "reversal_payload": signing_payload(reversal).hex(),
    }


def golden_runs() -> dict:
    genesis_scenario = sim.Scenario(seed=1000, voters=100, options=[], actions=[])
    genesis_run = sim.run(genesis_scenario)

    workload = sim.Scenario(
        seed=42,
        voters=100,
        options=["alpha", "beta", "gamma"],
        units_per_voter=1,
        actions=[{"op": "random", "count": 500}],
    )
    workload_run = sim.run(workload)
    ledger_path = HERE / "_tmp_ledger.jsonl"
    workload_run.ledger.save(ledger_path)
    ledger_sha = hashlib.sha256(ledger_path.read_bytes()).hexdigest()
    ledger_path.unlink()

    big = sim.synthesize_ledger(10_000, seed=9, holders=50)
    return {
        "genesis_100": {
            "seed": 1000,
            "state_hash": genesis_run.ledger.state.snapshot_hash().hex(),
        },
        "run_100v500a": {
            "seed": 42,
            "state_hash": workload_run.ledger.state.snapshot_hash().hex(),
            "ledger_sha256": ledger_sha,
            "entries": workload_run.metrics["entries"],
        },
        "ledger_10k": {
            "seed": 9,
            "state_hash": big.state.snapshot_hash().hex(),
        },
    }


def main() -> None:
    for name, doc in (
        ("keys.json", golden_keys()),
        ("commitment.json", golden_commitment()),
        ("payloads.json", golden_payloads()),
        ("runs.json", golden_runs()),
    ):
        with open(HERE / name, "w", encoding="ascii") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
