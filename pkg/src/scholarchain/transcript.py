"""Derivation of a student's effective transcript from the raw chain.

Achievements are never edited in place: corrections are later blocks that
replace or invalidate an earlier entry, and the effective transcript is the
fold of those corrections in chain order (later wins). The original blocks
stay byte-identical and reconstructable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import (
    AlreadyInvalidated,
    IssuerMismatch,
    TargetNotAchievement,
    UnknownTarget,
)
from .payloads import AchievementRecord, CorrectionAction, CorrectionRecord

if TYPE_CHECKING:
    from .store import ChainStore


@dataclass(frozen=True)
class TranscriptEntry:
    achievement: AchievementRecord
    origin_block_hash: bytes
    correction_trail: tuple[bytes, ...]


@dataclass(frozen=True)
class EffectiveTranscript:
    student: str
    entries: tuple[TranscriptEntry, ...]


def effective_transcript(store: "ChainStore", student: str) -> EffectiveTranscript:
    """All effective entries whose current record belongs to the student,
    in origin-block order. Unknown students yield an empty transcript."""
    rows: list[tuple[int, TranscriptEntry]] = []
    for origin in store.origins():
        if origin.current is None or origin.current.student != student:
            continue
        rows.append(
            (
                origin.height,
                TranscriptEntry(
                    achievement=origin.current,
                    origin_block_hash=origin.origin_hash,
                    correction_trail=tuple(origin.trail),
                ),
            )
        )
    for height, block_hash, derived in store.recognized_records():
        if derived.student != student:
            continue
        rows.append(
            (height, TranscriptEntry(achievement=derived, origin_block_hash=block_hash, correction_trail=()))
        )
    rows.sort(key=lambda item: item[0])
    return EffectiveTranscript(student=student, entries=tuple(entry for _, entry in rows))


def validate_correction(store: "ChainStore", correction: CorrectionRecord, issuer: str) -> None:
    """Enforce correction invariants against the current chain state."""
    origin = store.origin(correction.target_block_hash)
    if origin is None:
        if store.block_by_hash(correction.target_block_hash) is None:
            raise UnknownTarget("correction target is not a known block")
        raise TargetNotAchievement("correction target does not hold an achievement")
    if origin.original.issuer != issuer:
        raise IssuerMismatch("only the original issuing org may correct an achievement")
    if correction.action is CorrectionAction.INVALIDATE and origin.current is None:
        raise AlreadyInvalidated("target achievement is already invalidated")
    if correction.action is CorrectionAction.REPLACE:
        if correction.replacement.issuer != issuer:
            raise IssuerMismatch("replacement record must name the correcting org as issuer")


def correction_counts(store: "ChainStore", window: int) -> dict[str, int]:
    """Number of correction blocks per org within the last `window` block
    heights, counted from the current head."""
    if window < 1:
        raise ValueError("window must be >= 1")
    head = store.height()
    lo = head - window + 1
    counts: dict[str, int] = {}
    for height, issuer in store.corrections():
        if height >= lo:
            counts[issuer] = counts.get(issuer, 0) + 1
    return counts


def render_transcript_text(transcript: EffectiveTranscript) -> str:
    """Plain-text tabular dump, one entry per line, shared by CLI and HTTP."""
    lines = [f"student {transcript.student}"]
    for entry in transcript.entries:
        a = entry.achievement
        lines.append(
            "  ".join(
                [
                    entry.origin_block_hash.hex(),
                    a.course_id,
                    format(a.credit_points, "f"),
                    ",".join(a.topics),
                    a.result.name.lower(),
                ]
            )
        )
    return "\n".join(lines) + "\n"
