"""Pure-Python stage-search kernel.

Fallback for the compiled extension in `_scan.pyx`; both must produce
bit-identical results for the same arguments. Candidate nonces are the
big-endian encodings of an incrementing counter, so a search with enough
budget covers a small nonce space exhaustively (the TOY8 positive
control) and a bounded search over a 256-bit space is as good as any
other fixed guess set.
"""

from __future__ import annotations

from hashlib import sha256

HP_LEN = 32


def scan_stage(
    prev: bytes,
    target: bytes,
    hp_blob: bytes,
    nonce_len: int,
    max_pairs: int,
    start_counter: int = 0,
) -> tuple[int, int] | None:
    """Search for (nonce counter, key index) with
    H(H(H(nonce) || hp[k]) || prev) == target.

    Tries pairs in (counter, key) lexicographic order, spending at most
    `max_pairs` guesses. Returns the first match or None.
    """
    n_keys = len(hp_blob) // HP_LEN
    if n_keys == 0 or max_pairs <= 0:
        return None
    hps = [hp_blob[i * HP_LEN : (i + 1) * HP_LEN] for i in range(n_keys)]
    pairs = 0
    counter = start_counter
    while True:
        try:
            nonce = counter.to_bytes(nonce_len, "big")
        except OverflowError:
            return None  # nonce space exhausted
        hn = sha256(nonce).digest()
        for k, hp in enumerate(hps):
            inner = sha256(hn + hp).digest()
            if sha256(inner + prev).digest() == target:
                return counter, k
            pairs += 1
            if pairs >= max_pairs:
                return None
        counter += 1


def count_matches(
    prev: bytes,
    target: bytes,
    hp_blob: bytes,
    nonce_len: int,
    max_pairs: int,
) -> int:
    """Number of matching pairs within the budget (binding checks)."""
    n_keys = len(hp_blob) // HP_LEN
    if n_keys == 0 or max_pairs <= 0:
        return 0
    hps = [hp_blob[i * HP_LEN : (i + 1) * HP_LEN] for i in range(n_keys)]
    found = 0
    pairs = 0
    counter = 0
    while True:
        try:
            nonce = counter.to_bytes(nonce_len, "big")
        except OverflowError:
            return found
        hn = sha256(nonce).digest()
        for hp in hps:
            inner = sha256(hn + hp).digest()
            if sha256(inner + prev).digest() == target:
                found += 1
            pairs += 1
            if pairs >= max_pairs:
                return found
        counter += 1
