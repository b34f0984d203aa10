"""Pydantic response models for the public read-only explorer.

The chain is publicly readable but stores data anonymously: the only
student identifier anywhere in these schemas is the random UUIDv4. No
response field carries a personal name or any other personal identifier.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel

from .blocks import Block
from .payloads import (
    AchievementRecord,
    ContractPayload,
    CorrectionRecord,
    DegreeAward,
    OrgRegistration,
    Payload,
    RecognizedAchievement,
)
from .store import ContractEntry, RegisteredOrg, StoredBlock
from .transcript import EffectiveTranscript


class HeadOut(BaseModel):
    height: int
    head_hash: str


class HeaderOut(BaseModel):
    height: int
    prev_hash: str
    payload_hash: str
    issuer: str
    timestamp: int
    difficulty: int
    nonce: int


class OrgRegistrationOut(BaseModel):
    kind: Literal["org_registration"] = "org_registration"
    org_id: str
    display_name: str
    public_key: str


class AchievementOut(BaseModel):
    kind: Literal["achievement"] = "achievement"
    student: str
    course_id: str
    title: str
    credit_points: float
    workload_hours: int
    issuer: str
    topics: list[str]
    result: str
    grade: Optional[float] = None
    assessment_tick: int
    source_kind: str


class CorrectionOut(BaseModel):
    kind: Literal["correction"] = "correction"
    target_block_hash: str
    action: str
    reason: str
    replacement: Optional[AchievementOut] = None


class ContractSourceOut(BaseModel):
    kind: Literal["contract"] = "contract"
    source: str


class RecognizedOut(BaseModel):
    kind: Literal["recognized_achievement"] = "recognized_achievement"
    contract_block: str
    source_achievement_block: str
    derived: AchievementOut


class AwardOut(BaseModel):
    kind: Literal["degree_award"] = "degree_award"
    contract_block: str
    student: str
    degree_name: str
    evidence: list[str]


PayloadOut = Union[
    OrgRegistrationOut, AchievementOut, CorrectionOut, ContractSourceOut, RecognizedOut, AwardOut
]


class BlockOut(BaseModel):
    hash: str
    header: HeaderOut
    payload: PayloadOut
    signature: str


class OrgOut(BaseModel):
    org_id: str
    display_name: str
    public_key: str
    registered_height: int
    banned_height: Optional[int] = None


class TranscriptEntryOut(BaseModel):
    origin_block: str
    correction_trail: list[str]
    achievement: AchievementOut


class TranscriptOut(BaseModel):
    student: str
    entries: list[TranscriptEntryOut]


class ProgressOut(BaseModel):
    student: str
    contract_block: str
    fulfilled: bool
    fraction: float
    missing: list[str]


class ContractListItemOut(BaseModel):
    block_hash: str
    height: int
    issuer: str
    contract_kind: str
    source: str


# -- converters -------------------------------------------------------------------

def achievement_out(a: AchievementRecord) -> AchievementOut:
    return AchievementOut(
        student=a.student,
        course_id=a.course_id,
        title=a.title,
        credit_points=float(a.credit_points),
        workload_hours=a.workload_hours,
        issuer=a.issuer,
        topics=list(a.topics),
        result=a.result.name.lower(),
        grade=None if a.grade is None else float(a.grade),
        assessment_tick=a.assessment_tick,
        source_kind=a.source_kind.name.lower(),
    )


def payload_out(payload: Payload) -> PayloadOut:
    if isinstance(payload, OrgRegistration):
        return OrgRegistrationOut(
            org_id=payload.identity.org_id,
            display_name=payload.identity.display_name,
            public_key=payload.identity.public_key.hex(),
        )
    if isinstance(payload, AchievementRecord):
        return achievement_out(payload)
    if isinstance(payload, CorrectionRecord):
        return CorrectionOut(
            target_block_hash=payload.target_block_hash.hex(),
            action=payload.action.name.lower(),
            reason=payload.reason,
            replacement=None if payload.replacement is None else achievement_out(payload.replacement),
        )
    if isinstance(payload, ContractPayload):
        return ContractSourceOut(source=payload.source)
    if isinstance(payload, RecognizedAchievement):
        return RecognizedOut(
            contract_block=payload.contract_block.hex(),
            source_achievement_block=payload.source_achievement_block.hex(),
            derived=achievement_out(payload.derived),
        )
    return AwardOut(
        contract_block=payload.contract_block.hex(),
        student=payload.student,
        degree_name=payload.degree_name,
        evidence=[d.hex() for d in payload.evidence],
    )


def block_out(stored: StoredBlock) -> BlockOut:
    header = stored.block.header
    return BlockOut(
        hash=stored.hash.hex(),
        header=HeaderOut(
            height=header.height,
            prev_hash=header.prev_hash.hex(),
            payload_hash=header.payload_hash.hex(),
            issuer=header.issuer,
            timestamp=header.timestamp,
            difficulty=header.difficulty,
            nonce=header.nonce,
        ),
        payload=payload_out(stored.payload),
        signature=stored.block.signature.hex(),
    )


def org_out(org: RegisteredOrg, banned_height: Optional[int]) -> OrgOut:
    return OrgOut(
        org_id=org.identity.org_id,
        display_name=org.identity.display_name,
        public_key=org.identity.public_key.hex(),
        registered_height=org.height,
        banned_height=banned_height,
    )


def transcript_out(transcript: EffectiveTranscript) -> TranscriptOut:
    return TranscriptOut(
        student=transcript.student,
        entries=[
            TranscriptEntryOut(
                origin_block=e.origin_block_hash.hex(),
                correction_trail=[h.hex() for h in e.correction_trail],
                achievement=achievement_out(e.achievement),
            )
            for e in transcript.entries
        ],
    )


def contract_item_out(entry: ContractEntry) -> ContractListItemOut:
    return ContractListItemOut(
        block_hash=entry.block_hash.hex(),
        height=entry.height,
        issuer=entry.issuer,
        contract_kind=type(entry.ast).__name__.lower(),
        source=entry.source,
    )
