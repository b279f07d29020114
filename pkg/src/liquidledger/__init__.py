"""Privacy-preserving voting-power ledger.

Units of voting power are hash-chain commitments; transfers, reversible
delegations, reversals and votes are publicly validated transitions that
never disclose the receiver.
"""

__version__ = "0.1.0"

from .profiles import LLV1, TOY8, Profile, profile_by_name

__all__ = ["LLV1", "TOY8", "Profile", "profile_by_name", "__version__"]
