"""Token-ballot voting on a permissioned, quorum-finalized blockchain.

Each verified voter is granted a one-unit token balance; transferring it to
a candidate (or abstain) address is the vote.  Blocks are finalized by a
majority of roster nodes and the chain is fully replayable and auditable.
"""

__version__ = "0.1.0"
