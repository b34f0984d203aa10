"""Proof-of-work gating, the hardening difficulty schedule and fork choice.

The write challenge is a leading-zero-bit puzzle over the block hash. The
required bit count grows stepwise with chain height so that writing becomes
gradually more expensive, up to a fixed cap.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

from .blocks import BlockHeader, block_hash, encode_header
from .errors import EmptyCandidateSet, NonceExhausted

if TYPE_CHECKING:
    from .store import ChainStore

MAX_NONCE = 2**64 - 1


@dataclass(frozen=True)
class DifficultySchedule:
    base_bits: int = 8
    step_every: int = 1000
    cap_bits: int = 24

    def __post_init__(self):
        if not (1 <= self.base_bits <= self.cap_bits <= 32):
            raise ValueError("schedule requires 1 <= base_bits <= cap_bits <= 32")
        if self.step_every < 1:
            raise ValueError("step_every must be >= 1")


def difficulty_at(schedule: DifficultySchedule, height: int) -> int:
    """Required leading zero bits at a given height."""
    if height < 0:
        raise ValueError("height must be non-negative")
    return min(schedule.cap_bits, schedule.base_bits + height // schedule.step_every)


def leading_zero_bits(digest: bytes) -> int:
    value = int.from_bytes(digest, "big")
    if value == 0:
        return len(digest) * 8
    return len(digest) * 8 - value.bit_length()


def solve_challenge(header_template: BlockHeader, bits: int, nonce_start: int = 0) -> int:
    """Smallest nonce >= nonce_start whose block hash has >= bits leading
    zero bits. Deterministic linear search."""
    prefix = encode_header(header_template.with_nonce(0))[:-8]
    sha256 = hashlib.sha256
    pack = struct.pack
    nonce = nonce_start
    while nonce <= MAX_NONCE:
        digest = sha256(prefix + pack(">Q", nonce)).digest()
        if leading_zero_bits(digest) >= bits:
            return nonce
        nonce += 1
    raise NonceExhausted("no nonce in the 64-bit space satisfies the challenge")


def verify_pow(header: BlockHeader, schedule: DifficultySchedule) -> bool:
    """True iff the header claims the scheduled difficulty for its height and
    its hash meets that difficulty."""
    if header.difficulty != difficulty_at(schedule, header.height):
        return False
    return leading_zero_bits(block_hash(header)) >= header.difficulty


def chain_work(store: "ChainStore") -> int:
    """Total expected hash attempts: sum of 2^difficulty over all blocks."""
    return sum(2 ** b.header.difficulty for b in store.blocks())


def fork_choice(candidates: Sequence["ChainStore"]) -> "ChainStore":
    """Pick the chain with maximum total work; ties break toward the
    lexicographically smaller head digest. Candidates are assumed to be
    internally valid and to share a genesis block."""
    if not candidates:
        raise EmptyCandidateSet("fork choice over an empty candidate set")
    return max(candidates, key=lambda c: (chain_work(c), _inverted(c.head_hash())))


def _inverted(digest: bytes) -> bytes:
    # max() must prefer the smaller digest on equal work
    return bytes(255 - b for b in digest)


@dataclass(frozen=True)
class WritePermission:
    allowed: bool
    reason: Optional[str] = None  # "unregistered" | "banned"

    DENIED_UNREGISTERED = "unregistered"
    DENIED_BANNED = "banned"


def write_permission(store: "ChainStore", issuer: str, at_height: int) -> WritePermission:
    """Allowed iff the issuer registered before at_height and is not banned
    by any sanction contract active at at_height."""
    org = store.org(issuer)
    if org is None or org.height >= at_height:
        return WritePermission(False, WritePermission.DENIED_UNREGISTERED)
    ban_height = store.ban_height(issuer)
    if ban_height is not None and ban_height < at_height:
        return WritePermission(False, WritePermission.DENIED_BANNED)
    return WritePermission(True)
