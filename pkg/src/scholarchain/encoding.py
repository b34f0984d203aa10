"""Canonical byte encoding of payloads.

Hashes and signatures are computed over these bytes, so the encoding must be
bit-stable: one leading variant tag byte, fixed field order per variant,
big-endian fixed-width integers, UTF-8 text with a 4-byte length prefix and
lists with a 4-byte count prefix. Decimals are encoded as their normalized
plain-text form, which is injective on values.
"""

from __future__ import annotations

import struct
from decimal import Decimal, InvalidOperation
from typing import Optional

from .errors import PayloadInvalid
from .identity import OrgIdentity, org_id_from_public_key
from .payloads import (
    AchievementRecord,
    ContractPayload,
    CorrectionAction,
    CorrectionRecord,
    DegreeAward,
    OrgRegistration,
    Payload,
    RecognizedAchievement,
    Result,
    SourceKind,
    validate_payload,
)

TAG_ORG_REGISTRATION = 1
TAG_ACHIEVEMENT = 2
TAG_CORRECTION = 3
TAG_CONTRACT = 4
TAG_FULFILLMENT = 5

SUBTAG_RECOGNIZED = 1
SUBTAG_DEGREE_AWARD = 2


def decimal_text(value: Decimal) -> str:
    """Normalized plain-decimal text: no exponent, no trailing zeros."""
    if value == 0:
        return "0"
    return format(value.normalize(), "f")


def _u8(n: int) -> bytes:
    return struct.pack(">B", n)


def _u32(n: int) -> bytes:
    return struct.pack(">I", n)


def _u64(n: int) -> bytes:
    return struct.pack(">Q", n)


def _text(s: str) -> bytes:
    raw = s.encode("utf-8")
    return _u32(len(raw)) + raw


def _blob(b: bytes) -> bytes:
    return _u32(len(b)) + b


def _decimal(value: Decimal) -> bytes:
    return _text(decimal_text(value))


def _digest(b: bytes) -> bytes:
    if len(b) != 32:
        raise PayloadInvalid("digest fields must be 32 bytes")
    return b


def _org_id_bytes(org_id: str) -> bytes:
    try:
        raw = bytes.fromhex(org_id)
    except ValueError:
        raise PayloadInvalid(f"org id is not hex: {org_id!r}") from None
    return _digest(raw)


def _achievement_fields(a: AchievementRecord) -> bytes:
    parts = [
        _text(a.student),
        _text(a.course_id),
        _text(a.title),
        _decimal(a.credit_points),
        _u32(a.workload_hours),
        _org_id_bytes(a.issuer),
        _u32(len(a.topics)),
    ]
    parts.extend(_text(t) for t in a.topics)
    parts.append(_u8(a.result.value))
    if a.grade is None:
        parts.append(_u8(0))
    else:
        parts.append(_u8(1))
        parts.append(_decimal(a.grade))
    parts.append(_u64(a.assessment_tick))
    parts.append(_u8(a.source_kind.value))
    return b"".join(parts)


def canonical_encode(payload: Payload) -> bytes:
    """Deterministic bytes for a payload; raises PayloadInvalid if any field
    invariant is violated."""
    validate_payload(payload)
    if isinstance(payload, OrgRegistration):
        ident = payload.identity
        return b"".join(
            [_u8(TAG_ORG_REGISTRATION), _text(ident.display_name), _blob(ident.public_key)]
        )
    if isinstance(payload, AchievementRecord):
        return _u8(TAG_ACHIEVEMENT) + _achievement_fields(payload)
    if isinstance(payload, CorrectionRecord):
        parts = [_u8(TAG_CORRECTION), _digest(payload.target_block_hash), _u8(payload.action.value)]
        if payload.action is CorrectionAction.REPLACE:
            parts.append(_achievement_fields(payload.replacement))
        parts.append(_text(payload.reason))
        return b"".join(parts)
    if isinstance(payload, ContractPayload):
        return _u8(TAG_CONTRACT) + _text(payload.source)
    if isinstance(payload, RecognizedAchievement):
        return b"".join(
            [
                _u8(TAG_FULFILLMENT),
                _u8(SUBTAG_RECOGNIZED),
                _digest(payload.contract_block),
                _digest(payload.source_achievement_block),
                _achievement_fields(payload.derived),
            ]
        )
    if isinstance(payload, DegreeAward):
        parts = [
            _u8(TAG_FULFILLMENT),
            _u8(SUBTAG_DEGREE_AWARD),
            _digest(payload.contract_block),
            _text(payload.student),
            _text(payload.degree_name),
            _u32(len(payload.evidence)),
        ]
        parts.extend(_digest(d) for d in payload.evidence)
        return b"".join(parts)
    raise PayloadInvalid(f"unknown payload type {type(payload).__name__}")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise PayloadInvalid("truncated payload bytes")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def text(self) -> str:
        raw = self.take(self.u32())
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise PayloadInvalid("text field is not valid UTF-8") from None

    def blob(self) -> bytes:
        return self.take(self.u32())

    def decimal(self) -> Decimal:
        try:
            return Decimal(self.text())
        except InvalidOperation:
            raise PayloadInvalid("malformed decimal text") from None

    def digest(self) -> bytes:
        return self.take(32)

    def done(self) -> None:
        if self.pos != len(self.data):
            raise PayloadInvalid("trailing bytes after payload")


def _read_achievement(r: _Reader) -> AchievementRecord:
    student = r.text()
    course_id = r.text()
    title = r.text()
    credits = r.decimal()
    hours = r.u32()
    issuer = r.digest().hex()
    topics = tuple(r.text() for _ in range(r.u32()))
    try:
        result = Result(r.u8())
    except ValueError:
        raise PayloadInvalid("unknown result code") from None
    grade: Optional[Decimal] = None
    flag = r.u8()
    if flag == 1:
        grade = r.decimal()
    elif flag != 0:
        raise PayloadInvalid("malformed optional-grade flag")
    tick = r.u64()
    try:
        kind = SourceKind(r.u8())
    except ValueError:
        raise PayloadInvalid("unknown source kind") from None
    return AchievementRecord(
        student=student,
        course_id=course_id,
        title=title,
        credit_points=credits,
        workload_hours=hours,
        issuer=issuer,
        topics=topics,
        result=result,
        grade=grade,
        assessment_tick=tick,
        source_kind=kind,
    )


def canonical_decode(data: bytes) -> Payload:
    """Inverse of canonical_encode; raises PayloadInvalid on malformed bytes."""
    r = _Reader(data)
    tag = r.u8()
    payload: Payload
    if tag == TAG_ORG_REGISTRATION:
        display_name = r.text()
        public_key = r.blob()
        payload = OrgRegistration(
            OrgIdentity(
                org_id=org_id_from_public_key(public_key),
                display_name=display_name,
                public_key=public_key,
            )
        )
    elif tag == TAG_ACHIEVEMENT:
        payload = _read_achievement(r)
    elif tag == TAG_CORRECTION:
        target = r.digest()
        try:
            action = CorrectionAction(r.u8())
        except ValueError:
            raise PayloadInvalid("unknown correction action") from None
        replacement = _read_achievement(r) if action is CorrectionAction.REPLACE else None
        reason = r.text()
        payload = CorrectionRecord(
            target_block_hash=target, action=action, reason=reason, replacement=replacement
        )
    elif tag == TAG_CONTRACT:
        payload = ContractPayload(source=r.text())
    elif tag == TAG_FULFILLMENT:
        subtag = r.u8()
        if subtag == SUBTAG_RECOGNIZED:
            payload = RecognizedAchievement(
                contract_block=r.digest(),
                source_achievement_block=r.digest(),
                derived=_read_achievement(r),
            )
        elif subtag == SUBTAG_DEGREE_AWARD:
            contract = r.digest()
            student = r.text()
            degree_name = r.text()
            evidence = tuple(r.digest() for _ in range(r.u32()))
            payload = DegreeAward(
                contract_block=contract,
                student=student,
                degree_name=degree_name,
                evidence=evidence,
            )
        else:
            raise PayloadInvalid("unknown fulfillment subtag")
    else:
        raise PayloadInvalid(f"unknown payload tag {tag}")
    r.done()
    return payload
