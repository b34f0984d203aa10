"""Append-only validated block store with full tamper detection.

Every peer holds one ChainStore. Appends re-run the complete validation
(linkage, proof-of-work, canonical payload form, signature, write
permission, payload semantics) so replaying a chain file reproduces exactly
the same derived state on every peer. Stored blocks are never mutated.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional, Type

from . import dsl
from .blocks import (
    GENESIS_PREV_HASH,
    Block,
    BlockHeader,
    block_hash,
    decode_block,
    encode_block,
    payload_hash,
    sign_block,
    verify_block_signature,
)
from .consensus import DifficultySchedule, difficulty_at, solve_challenge, verify_pow, write_permission
from .encoding import canonical_decode, canonical_encode
from .errors import (
    LedgerError,
    LinkageMismatch,
    PayloadInvalid,
    PowInvalid,
    SignatureInvalid,
    UnknownIssuer,
    WritePermissionDenied,
)
from .identity import KeyPair, OrgIdentity
from .payloads import (
    AchievementRecord,
    ContractPayload,
    CorrectionAction,
    CorrectionRecord,
    DegreeAward,
    OrgRegistration,
    Payload,
    RecognizedAchievement,
)
from .transcript import validate_correction


@dataclass(frozen=True)
class StoredBlock:
    block: Block
    payload: Payload
    hash: bytes


@dataclass(frozen=True)
class RegisteredOrg:
    identity: OrgIdentity
    height: int


@dataclass
class OriginState:
    """Current effective view of one achievement block."""

    origin_hash: bytes
    height: int
    original: AchievementRecord
    current: Optional[AchievementRecord]  # None once invalidated
    trail: list[bytes] = field(default_factory=list)  # correction block hashes


@dataclass(frozen=True)
class ContractEntry:
    block_hash: bytes
    height: int
    issuer: str
    source: str
    ast: dsl.ContractAst  # org references resolved to hex ids


class ReplicaStatus(Enum):
    MATCH = "match"
    MISMATCH = "mismatch"


def verify_replica(local_head: bytes, remote_head: bytes) -> ReplicaStatus:
    """Cheap divergence check between two replicas' head digests."""
    return ReplicaStatus.MATCH if local_head == remote_head else ReplicaStatus.MISMATCH


class ChainStore:
    """Single-writer, multi-reader replica of the chain plus derived state."""

    def __init__(self, schedule: DifficultySchedule | None = None):
        self.schedule = schedule or DifficultySchedule()
        self._lock = threading.Lock()
        self._blocks: list[StoredBlock] = []
        self._index: dict[bytes, int] = {}
        self._orgs: dict[str, RegisteredOrg] = {}
        self._names: dict[str, str] = {}
        self._banned: dict[str, int] = {}
        self._origins: dict[bytes, OriginState] = {}
        self._origin_order: list[bytes] = []
        self._recognized: list[tuple[int, bytes, AchievementRecord]] = []
        self._contracts: dict[bytes, ContractEntry] = {}
        self._contract_order: list[bytes] = []
        self._recognition_pairs: set[tuple[bytes, bytes]] = set()
        self._award_pairs: set[tuple[bytes, str]] = set()
        self._corrections: list[tuple[int, str]] = []

    # -- read access ------------------------------------------------------------

    def height(self) -> int:
        """Head height; -1 for an empty store."""
        return len(self._blocks) - 1

    def head_hash(self) -> bytes:
        return self._blocks[-1].hash if self._blocks else GENESIS_PREV_HASH

    def blocks(self) -> Iterator[Block]:
        return (s.block for s in self._blocks)

    def stored(self) -> Iterator[StoredBlock]:
        return iter(self._blocks)

    def block_at(self, height: int) -> Optional[StoredBlock]:
        if 0 <= height < len(self._blocks):
            return self._blocks[height]
        return None

    def block_hash_at(self, height: int) -> bytes:
        return self._blocks[height].hash

    def block_by_hash(self, digest: bytes) -> Optional[StoredBlock]:
        height = self._index.get(digest)
        return self._blocks[height] if height is not None else None

    def org(self, org_id: str) -> Optional[RegisteredOrg]:
        return self._orgs.get(org_id)

    def org_id_by_name(self, display_name: str) -> Optional[str]:
        return self._names.get(display_name)

    def orgs(self) -> list[RegisteredOrg]:
        return sorted(self._orgs.values(), key=lambda o: o.height)

    def ban_height(self, org_id: str) -> Optional[int]:
        return self._banned.get(org_id)

    def banned_orgs(self) -> dict[str, int]:
        return dict(self._banned)

    def origin(self, origin_hash: bytes) -> Optional[OriginState]:
        return self._origins.get(origin_hash)

    def origins(self) -> Iterator[OriginState]:
        return (self._origins[h] for h in self._origin_order)

    def recognized_records(self) -> Iterator[tuple[int, bytes, AchievementRecord]]:
        return iter(self._recognized)

    def contract(self, digest: bytes) -> Optional[ContractEntry]:
        return self._contracts.get(digest)

    def contracts(self) -> Iterator[ContractEntry]:
        return (self._contracts[h] for h in self._contract_order)

    def contracts_of(self, kind: Type) -> Iterator[ContractEntry]:
        return (e for e in self.contracts() if isinstance(e.ast, kind))

    def has_recognition(self, contract_block: bytes, source_block: bytes) -> bool:
        return (contract_block, source_block) in self._recognition_pairs

    def has_award(self, contract_block: bytes, student: str) -> bool:
        return (contract_block, student) in self._award_pairs

    def corrections(self) -> Iterator[tuple[int, str]]:
        return iter(self._corrections)

    def students(self) -> list[str]:
        seen: set[str] = set()
        for origin in self.origins():
            if origin.current is not None:
                seen.add(origin.current.student)
        for _, _, derived in self._recognized:
            seen.add(derived.student)
        return sorted(seen)

    # -- appending ---------------------------------------------------------------

    def append(self, block: Block) -> int:
        """Validate and append a block; returns the new chain height.
        Raises a typed LedgerError and leaves the store untouched on any
        violation."""
        with self._lock:
            return self._append_locked(block)

    def _append_locked(self, block: Block) -> int:
        header = block.header
        height = len(self._blocks)
        if header.height != height:
            raise LinkageMismatch(f"expected height {height}, got {header.height}")
        expected_prev = self._blocks[-1].hash if self._blocks else GENESIS_PREV_HASH
        if header.prev_hash != expected_prev:
            raise LinkageMismatch("prev_hash does not match the current head")
        if not verify_pow(header, self.schedule):
            raise PowInvalid(f"hash does not meet difficulty at height {height}")

        payload = canonical_decode(block.payload_bytes)
        if canonical_encode(payload) != block.payload_bytes:
            raise PayloadInvalid("payload bytes are not in canonical form")
        if payload_hash(block.payload_bytes) != header.payload_hash:
            raise PayloadInvalid("payload_hash does not match payload bytes")

        public_key = self._issuer_public_key(header, payload, height)
        if not verify_block_signature(header, block.signature, public_key):
            raise SignatureInvalid("signature does not verify under the issuer key")

        self._check_semantics(header, payload)

        stored = StoredBlock(block=block, payload=payload, hash=block_hash(header))
        self._blocks.append(stored)
        self._index[stored.hash] = height
        self._apply(stored)
        self._update_bans(height)
        return height

    def _issuer_public_key(self, header: BlockHeader, payload: Payload, height: int) -> bytes:
        if isinstance(payload, OrgRegistration):
            identity = payload.identity
            if header.issuer != identity.org_id:
                raise PayloadInvalid("registration blocks are self-signed by the new org")
            ban = self._banned.get(identity.org_id)
            if ban is not None:
                raise WritePermissionDenied("banned org may not re-register")
            if identity.org_id in self._orgs:
                raise PayloadInvalid("org is already registered")
            if identity.display_name in self._names:
                raise PayloadInvalid("display_name is already taken")
            return identity.public_key
        permission = write_permission(self, header.issuer, height)
        if not permission.allowed:
            if permission.reason == permission.DENIED_BANNED:
                raise WritePermissionDenied(f"org {header.issuer} is banned from writing")
            raise UnknownIssuer(f"issuer {header.issuer} is not a registered org")
        return self._orgs[header.issuer].identity.public_key

    def _check_semantics(self, header: BlockHeader, payload: Payload) -> None:
        if isinstance(payload, AchievementRecord):
            if payload.issuer != header.issuer:
                raise PayloadInvalid("achievement issuer must match the block issuer")
        elif isinstance(payload, CorrectionRecord):
            validate_correction(self, payload, header.issuer)
        elif isinstance(payload, ContractPayload):
            ast = dsl.parse(payload.source)
            if dsl.print_contract(ast) != payload.source:
                raise PayloadInvalid("contract source is not in canonical form")
            dsl.static_check(ast, self, publishing_issuer=header.issuer)
        elif isinstance(payload, (RecognizedAchievement, DegreeAward)):
            from .engine import validate_fulfillment

            validate_fulfillment(self, payload, header.issuer)

    def _apply(self, stored: StoredBlock) -> None:
        payload = stored.payload
        height = stored.block.header.height
        if isinstance(payload, OrgRegistration):
            self._orgs[payload.identity.org_id] = RegisteredOrg(payload.identity, height)
            self._names[payload.identity.display_name] = payload.identity.org_id
        elif isinstance(payload, AchievementRecord):
            state = OriginState(
                origin_hash=stored.hash, height=height, original=payload, current=payload
            )
            self._origins[stored.hash] = state
            self._origin_order.append(stored.hash)
        elif isinstance(payload, CorrectionRecord):
            origin = self._origins[payload.target_block_hash]
            origin.trail.append(stored.hash)
            if payload.action is CorrectionAction.REPLACE:
                origin.current = payload.replacement
            else:
                origin.current = None
            self._corrections.append((height, stored.block.header.issuer))
        elif isinstance(payload, ContractPayload):
            ast = dsl.resolve_contract(dsl.parse(payload.source), self)
            entry = ContractEntry(
                block_hash=stored.hash,
                height=height,
                issuer=stored.block.header.issuer,
                source=payload.source,
                ast=ast,
            )
            self._contracts[stored.hash] = entry
            self._contract_order.append(stored.hash)
        elif isinstance(payload, RecognizedAchievement):
            self._recognition_pairs.add((payload.contract_block, payload.source_achievement_block))
            self._recognized.append((height, stored.hash, payload.derived))
        elif isinstance(payload, DegreeAward):
            self._award_pairs.add((payload.contract_block, payload.student))

    def _update_bans(self, head_height: int) -> None:
        for entry in self.contracts_of(dsl.Sanction):
            if entry.height > head_height:
                continue
            lo = head_height - entry.ast.window + 1
            counts: dict[str, int] = {}
            for height, issuer in self._corrections:
                if lo <= height <= head_height:
                    counts[issuer] = counts.get(issuer, 0) + 1
            for org, count in counts.items():
                if count >= entry.ast.threshold and org not in self._banned:
                    self._banned[org] = head_height

    # -- serialization ---------------------------------------------------------------

    def to_records(self) -> list[bytes]:
        return [encode_block(s.block) for s in self._blocks]

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            for record in self.to_records():
                fh.write(struct.pack(">I", len(record)))
                fh.write(record)


def read_records(path: str | Path) -> list[bytes]:
    """Read length-prefixed block records from a chain file."""
    data = Path(path).read_bytes()
    records: list[bytes] = []
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise PayloadInvalid("truncated record length prefix")
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        pos += 4
        if pos + length > len(data):
            raise PayloadInvalid("truncated block record")
        records.append(data[pos : pos + length])
        pos += length
    return records


def replay_records(
    records: list[bytes], schedule: DifficultySchedule | None = None
) -> tuple[ChainStore, Optional[int]]:
    """Rebuild a store by re-validating every record from genesis. Returns
    the partial store plus the first invalid height, if any."""
    store = ChainStore(schedule)
    for height, record in enumerate(records):
        try:
            block = decode_block(record)
            if encode_block(block) != record:
                raise PayloadInvalid("record bytes are not canonical")
            store.append(block)
        except LedgerError:
            return store, height
    return store, None


def validate_chain(store: ChainStore) -> Optional[int]:
    """Replay the full chain, applying every append check; returns the first
    invalid height or None when the chain is sound."""
    _, first_invalid = replay_records(store.to_records(), store.schedule)
    return first_invalid


def load_store(path: str | Path, schedule: DifficultySchedule | None = None) -> ChainStore:
    """Load and fully validate a chain file."""
    store, first_invalid = replay_records(read_records(path), schedule)
    if first_invalid is not None:
        raise PayloadInvalid(f"chain file invalid at height {first_invalid}")
    return store


# -- block forging ----------------------------------------------------------------------

def forge_block(
    store: ChainStore,
    payload: Payload,
    key: KeyPair,
    timestamp: Optional[int] = None,
    issuer: Optional[str] = None,
) -> Block:
    """Mine and sign the next block for this store. The caller's key must
    belong to the issuing org (or be the fresh org for registrations)."""
    payload_bytes = canonical_encode(payload)
    height = store.height() + 1
    header = BlockHeader(
        height=height,
        prev_hash=store.head_hash(),
        payload_hash=payload_hash(payload_bytes),
        issuer=issuer or key.org_id,
        timestamp=height if timestamp is None else timestamp,
        difficulty=difficulty_at(store.schedule, height),
        nonce=0,
    )
    nonce = solve_challenge(header, header.difficulty)
    header = header.with_nonce(nonce)
    return Block(header=header, payload_bytes=payload_bytes, signature=sign_block(header, key))
