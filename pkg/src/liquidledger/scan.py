"""Backend selection for the stage-search kernel.

Prefers the compiled extension when it was built; falls back to the
pure-Python implementation otherwise. Set LIQUIDLEDGER_PURE=1 to force
the fallback (used by the equivalence tests and the benchmark).
"""

from __future__ import annotations

import os
from collections.abc import Sequence

if os.environ.get("LIQUIDLEDGER_PURE"):
    from . import _scan_py as _backend

    BACKEND = "python"
else:
    try:
        from . import _scan as _backend  # type: ignore[no-redef]

        BACKEND = "c"
    except ImportError:
        from . import _scan_py as _backend  # type: ignore[no-redef]

        BACKEND = "python"


def _as_blob(pubkey_hashes: Sequence[bytes] | bytes) -> bytes:
    if isinstance(pubkey_hashes, (bytes, bytearray)):
        return bytes(pubkey_hashes)
    return b"".join(pubkey_hashes)


def scan_stage(
    prev: bytes,
    target: bytes,
    pubkey_hashes: Sequence[bytes] | bytes,
    nonce_len: int,
    max_pairs: int,
    start_counter: int = 0,
) -> tuple[int, int] | None:
    """Brute-force a stage preimage: find (nonce, key) with
    unit_id(inner(H(nonce), hp[k]), prev) == target.

    Nonce guesses are counter encodings; the budget is counted in
    (nonce, key) pairs. Returns (counter, key_index) or None.
    """
    return _backend.scan_stage(
        prev, target, _as_blob(pubkey_hashes), nonce_len, max_pairs, start_counter
    )


def count_matches(
    prev: bytes,
    target: bytes,
    pubkey_hashes: Sequence[bytes] | bytes,
    nonce_len: int,
    max_pairs: int,
) -> int:
    """Count all matching pairs within the budget."""
    return _backend.count_matches(
        prev, target, _as_blob(pubkey_hashes), nonce_len, max_pairs
    )
