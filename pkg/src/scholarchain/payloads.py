"""Block payload variants and their field invariants.

Every block carries exactly one payload: an organization registration, an
achievement, a correction of an earlier achievement, a contract source text,
or an automatically derived fulfillment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Optional, Union

from .errors import PayloadInvalid
from .identity import OrgIdentity, is_hex_digest, is_valid_student_id

MAX_CREDIT_POINTS = Decimal(60)

_TAG_RE = re.compile(r"^[a-z0-9][a-z0-9_-]*$")


class Result(Enum):
    FAILED = 0
    PASSED = 1


class SourceKind(Enum):
    UNIVERSITY_EXAM = 1
    MOOC = 2
    OPEN_BADGE = 3


def _require_tag(tag: str) -> None:
    if not _TAG_RE.match(tag):
        raise PayloadInvalid(f"topic tag must be a lowercase slug: {tag!r}")


def _require_decimal(value: Decimal, what: str) -> None:
    if not isinstance(value, Decimal) or not value.is_finite():
        raise PayloadInvalid(f"{what} must be a finite decimal")


@dataclass(frozen=True)
class AchievementRecord:
    """One assessment result, keyed by the anonymous student id."""

    student: str
    course_id: str
    title: str
    credit_points: Decimal
    workload_hours: int
    issuer: str
    topics: tuple[str, ...]
    result: Result
    grade: Optional[Decimal] = None
    assessment_tick: int = 0
    source_kind: SourceKind = SourceKind.UNIVERSITY_EXAM

    def validate(self) -> None:
        if not is_valid_student_id(self.student):
            raise PayloadInvalid(f"student is not a lowercase UUIDv4: {self.student!r}")
        if not self.course_id:
            raise PayloadInvalid("course_id must be non-empty")
        _require_decimal(self.credit_points, "credit_points")
        if self.credit_points < 0 or self.credit_points > MAX_CREDIT_POINTS:
            raise PayloadInvalid("credit_points must lie in [0, 60]")
        if self.workload_hours < 0:
            raise PayloadInvalid("workload_hours must be non-negative")
        if not is_hex_digest(self.issuer):
            raise PayloadInvalid("issuer must be a 64-char hex org id")
        if not self.topics:
            raise PayloadInvalid("topics must be non-empty")
        for tag in self.topics:
            _require_tag(tag)
        if self.grade is not None:
            _require_decimal(self.grade, "grade")
            if self.grade < 0:
                raise PayloadInvalid("grade must be non-negative")
        if self.assessment_tick < 0:
            raise PayloadInvalid("assessment_tick must be non-negative")


class CorrectionAction(Enum):
    REPLACE = 1
    INVALIDATE = 2


@dataclass(frozen=True)
class CorrectionRecord:
    """Replaces or invalidates an earlier achievement block; the original
    block stays in the chain untouched."""

    target_block_hash: bytes
    action: CorrectionAction
    reason: str
    replacement: Optional[AchievementRecord] = None

    def validate(self) -> None:
        if len(self.target_block_hash) != 32:
            raise PayloadInvalid("target_block_hash must be 32 bytes")
        if not self.reason:
            raise PayloadInvalid("reason must be non-empty")
        if self.action is CorrectionAction.REPLACE:
            if self.replacement is None:
                raise PayloadInvalid("Replace correction requires a replacement record")
            self.replacement.validate()
        elif self.replacement is not None:
            raise PayloadInvalid("Invalidate correction carries no replacement")


@dataclass(frozen=True)
class OrgRegistration:
    """Self-signed public identity of a writing organization."""

    identity: OrgIdentity

    def validate(self) -> None:
        self.identity.validate()


@dataclass(frozen=True)
class ContractPayload:
    """Canonical source text of a recognition, degree or sanction contract."""

    source: str

    def validate(self) -> None:
        if not self.source:
            raise PayloadInvalid("contract source must be non-empty")


@dataclass(frozen=True)
class RecognizedAchievement:
    """Derived achievement produced by a recognition contract."""

    contract_block: bytes
    source_achievement_block: bytes
    derived: AchievementRecord

    def validate(self) -> None:
        if len(self.contract_block) != 32 or len(self.source_achievement_block) != 32:
            raise PayloadInvalid("fulfillment block references must be 32 bytes")
        self.derived.validate()


@dataclass(frozen=True)
class DegreeAward:
    """Automatic degree award once a degree contract's requirement holds."""

    contract_block: bytes
    student: str
    degree_name: str
    evidence: tuple[bytes, ...]

    def validate(self) -> None:
        if len(self.contract_block) != 32:
            raise PayloadInvalid("contract_block must be 32 bytes")
        if not is_valid_student_id(self.student):
            raise PayloadInvalid("student is not a lowercase UUIDv4")
        if not self.degree_name:
            raise PayloadInvalid("degree_name must be non-empty")
        for digest in self.evidence:
            if len(digest) != 32:
                raise PayloadInvalid("evidence digests must be 32 bytes")


Fulfillment = Union[RecognizedAchievement, DegreeAward]

Payload = Union[
    OrgRegistration,
    AchievementRecord,
    CorrectionRecord,
    ContractPayload,
    RecognizedAchievement,
    DegreeAward,
]


def validate_payload(payload: Payload) -> None:
    payload.validate()
