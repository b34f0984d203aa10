"""A proof-of-work ledger for student achievements.

Achievements, corrections and formal contracts (recognition agreements,
degree requirements, write sanctions) live in an append-only signed chain;
contracts fulfill themselves as matching data arrives.
"""

from .blocks import Block, BlockHeader, block_hash, sign_block, verify_block_signature
from .consensus import (
    DifficultySchedule,
    WritePermission,
    difficulty_at,
    fork_choice,
    solve_challenge,
    verify_pow,
    write_permission,
)
from .encoding import canonical_decode, canonical_encode
from .identity import KeyPair, OrgIdentity, new_student_id
from .payloads import (
    AchievementRecord,
    ContractPayload,
    CorrectionAction,
    CorrectionRecord,
    DegreeAward,
    OrgRegistration,
    RecognizedAchievement,
    Result,
    SourceKind,
)
from .store import (
    ChainStore,
    ReplicaStatus,
    forge_block,
    load_store,
    replay_records,
    validate_chain,
    verify_replica,
)
from .transcript import EffectiveTranscript, TranscriptEntry, effective_transcript

__all__ = [
    "AchievementRecord",
    "Block",
    "BlockHeader",
    "ChainStore",
    "ContractPayload",
    "CorrectionAction",
    "CorrectionRecord",
    "DegreeAward",
    "DifficultySchedule",
    "EffectiveTranscript",
    "KeyPair",
    "OrgIdentity",
    "OrgRegistration",
    "RecognizedAchievement",
    "ReplicaStatus",
    "Result",
    "SourceKind",
    "TranscriptEntry",
    "WritePermission",
    "block_hash",
    "canonical_decode",
    "canonical_encode",
    "difficulty_at",
    "effective_transcript",
    "fork_choice",
    "forge_block",
    "load_store",
    "new_student_id",
    "replay_records",
    "sign_block",
    "solve_challenge",
    "validate_chain",
    "verify_block_signature",
    "verify_pow",
    "verify_replica",
    "write_permission",
]
