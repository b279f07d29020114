from __future__ import annotations

import json
import time
from pathlib import Path

import pytest

from liquidledger import sim

FIXTURES = Path(__file__).parent / "fixtures"

# Fixed wallet seed used by the golden-key and commitment fixtures.
TEST_SEED = bytes(range(32))


def load_fixture(name: str) -> dict:
    with open(FIXTURES / name, "r", encoding="ascii") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def run_100v500a():
    """The canonical randomized workload: 100 voters, 3 options, 500
    actions, seed 42. Shared by conservation, determinism and game
    tests; `elapsed` is the wall-clock build time."""
    scenario = sim.Scenario(
        seed=42,
        voters=100,
        options=["alpha", "beta", "gamma"],
        units_per_voter=1,
        actions=[{"op": "random", "count": 500}],
    )
    t0 = time.perf_counter()
    result = sim.run(scenario)
    elapsed = time.perf_counter() - t0
    return result, elapsed


@pytest.fixture(scope="session")
def ledger_10k():
    """10,000-entry synthesized ledger for replay and performance tests."""
    return sim.synthesize_ledger(10_000, seed=9, holders=50)
