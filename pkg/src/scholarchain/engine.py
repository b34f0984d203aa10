"""Deterministic contract evaluation against the chain.

Contracts fulfill themselves: whenever the chain gains a block, every node
recomputes which recognition and degree fulfillments have become derivable
and the responsible org's node publishes them as new blocks. All peers
verify fulfillment blocks by recomputation, so the evaluation here must be a
pure function of chain state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import TYPE_CHECKING, Optional, Union

from .dsl import (
    AllOf,
    AnyOf,
    AtLeastNOf,
    Course,
    CreditsAtLeast,
    CreditsGe,
    Degree,
    IsPassed,
    IssuerIs,
    Predicate,
    Recognition,
    Requirement,
    Sanction,
    SourceIn,
    TopicContains,
    print_requirement,
)
from .errors import (
    DuplicateFulfillment,
    IssuerMismatch,
    NotADegreeContract,
    PayloadInvalid,
    UnknownBlock,
)
from .payloads import (
    MAX_CREDIT_POINTS,
    AchievementRecord,
    DegreeAward,
    Fulfillment,
    RecognizedAchievement,
    Result,
)
from .transcript import EffectiveTranscript, effective_transcript

if TYPE_CHECKING:
    from .store import ChainStore

CREDIT_STEP = Decimal("0.1")


# -- predicates and recognition ---------------------------------------------------

def eval_predicate(predicate: Predicate, a: AchievementRecord) -> bool:
    """Conjunction of the predicate's atoms over one achievement."""
    for atom in predicate.atoms:
        if isinstance(atom, IssuerIs):
            if a.issuer != atom.org:
                return False
        elif isinstance(atom, TopicContains):
            if atom.tag not in a.topics:
                return False
        elif isinstance(atom, CreditsGe):
            if a.credit_points < atom.amount:
                return False
        elif isinstance(atom, IsPassed):
            if a.result is not Result.PASSED:
                return False
        elif isinstance(atom, SourceIn):
            if a.source_kind not in atom.kinds:
                return False
        else:
            raise TypeError(f"unknown atom {atom!r}")
    return True


def recognized_credits(credit_points: Decimal, factor: Decimal) -> Decimal:
    """Credits carried over by a recognition: round-half-even, 1 decimal."""
    return (credit_points * factor).quantize(CREDIT_STEP, rounding=ROUND_HALF_EVEN)


def _remap_topics(topics: tuple[str, ...], topic_map: tuple[tuple[str, str], ...]) -> tuple[str, ...]:
    mapping = dict(topic_map)
    out: list[str] = []
    for tag in topics:
        mapped = mapping.get(tag, tag)
        if mapped not in out:
            out.append(mapped)
    return tuple(out)


def eval_recognition(contract: Recognition, a: AchievementRecord) -> Optional[AchievementRecord]:
    """Derived home-org achievement for a matching foreign achievement, or
    None. The input must be an effective (non-invalidated) record."""
    if a.issuer != contract.foreign:
        return None
    if not eval_predicate(contract.predicate, a):
        return None
    credits = recognized_credits(a.credit_points, contract.factor)
    if credits > MAX_CREDIT_POINTS:
        # the derived record would violate the credit cap and could never
        # be appended, so the contract does not apply
        return None
    return replace(
        a,
        issuer=contract.home,
        credit_points=credits,
        topics=_remap_topics(a.topics, contract.topic_map),
    )


# -- requirements ------------------------------------------------------------------

@dataclass(frozen=True)
class RequirementOutcome:
    fulfilled: bool
    fraction: Fraction  # exact, in [0, 1]
    missing: tuple[Requirement, ...]  # unmet leaves


def _passed(entry_achievement: AchievementRecord) -> bool:
    return entry_achievement.result is Result.PASSED


def eval_requirement(req: Requirement, transcript: EffectiveTranscript) -> RequirementOutcome:
    """Fulfillment flag, progress fraction and unmet leaves.

    Leaves score 1 when met; a credits leaf otherwise scores have/need.
    Composites: ALL is the mean of its children, ANY the max, and
    ATLEAST n OF the capped mean of the n best children.
    """
    if isinstance(req, CreditsAtLeast):
        have = sum(
            (e.achievement.credit_points for e in transcript.entries
             if _passed(e.achievement) and req.topic in e.achievement.topics),
            Decimal(0),
        )
        if req.amount <= 0 or have >= req.amount:
            return RequirementOutcome(True, Fraction(1), ())
        return RequirementOutcome(False, Fraction(have) / Fraction(req.amount), (req,))
    if isinstance(req, Course):
        met = any(
            _passed(e.achievement)
            and e.achievement.course_id == req.course_id
            and (req.issuer is None or e.achievement.issuer == req.issuer)
            for e in transcript.entries
        )
        if met:
            return RequirementOutcome(True, Fraction(1), ())
        return RequirementOutcome(False, Fraction(0), (req,))
    if isinstance(req, (AllOf, AnyOf, AtLeastNOf)):
        outcomes = [eval_requirement(c, transcript) for c in req.children]
        if isinstance(req, AllOf):
            fulfilled = all(o.fulfilled for o in outcomes)
            fraction = sum((o.fraction for o in outcomes), Fraction(0)) / len(outcomes)
        elif isinstance(req, AnyOf):
            fulfilled = any(o.fulfilled for o in outcomes)
            fraction = max(o.fraction for o in outcomes)
        else:
            fulfilled = sum(1 for o in outcomes if o.fulfilled) >= req.n
            best = sorted((o.fraction for o in outcomes), reverse=True)[: req.n]
            fraction = min(Fraction(1), sum(best, Fraction(0)) / req.n)
        if fulfilled:
            # the composite formulas yield exactly 1 whenever fulfilled
            return RequirementOutcome(True, Fraction(1), ())
        missing = tuple(m for o in outcomes for m in o.missing)
        return RequirementOutcome(False, fraction, missing)
    raise TypeError(f"unknown requirement {req!r}")


def requirement_witness(req: Requirement, transcript: EffectiveTranscript) -> frozenset[bytes]:
    """Origin blocks supporting a fulfilled requirement; empty if unmet."""
    outcome = eval_requirement(req, transcript)
    if not outcome.fulfilled:
        return frozenset()
    if isinstance(req, CreditsAtLeast):
        return frozenset(
            e.origin_block_hash for e in transcript.entries
            if _passed(e.achievement) and req.topic in e.achievement.topics
        )
    if isinstance(req, Course):
        return frozenset(
            e.origin_block_hash for e in transcript.entries
            if _passed(e.achievement)
            and e.achievement.course_id == req.course_id
            and (req.issuer is None or e.achievement.issuer == req.issuer)
        )
    return frozenset().union(
        *(requirement_witness(c, transcript) for c in req.children
          if eval_requirement(c, transcript).fulfilled),
        frozenset(),
    )


# -- sanctions ----------------------------------------------------------------------

def eval_sanction(store: "ChainStore", sanction: Sanction, from_height: int = 0) -> set[str]:
    """Orgs banned by the rule: at some height >= from_height their
    correction count within the trailing window reached the threshold.
    Bans are permanent once reached."""
    banned: set[str] = set()
    corrections = list(store.corrections())  # (height, issuer), chain order
    for h in range(from_height, store.height() + 1):
        lo = h - sanction.window + 1
        counts: dict[str, int] = {}
        for height, issuer in corrections:
            if lo <= height <= h:
                counts[issuer] = counts.get(issuer, 0) + 1
        for org, count in counts.items():
            if count >= sanction.threshold:
                banned.add(org)
    return banned


# -- fulfillment derivation and verification -------------------------------------------

def _fulfillment_sort_key(payload: Fulfillment) -> tuple[bytes, bytes]:
    if isinstance(payload, RecognizedAchievement):
        return (payload.contract_block, payload.source_achievement_block)
    return (payload.contract_block, payload.student.encode("utf-8"))


def pending_fulfillments(store: "ChainStore") -> list[Fulfillment]:
    """Every fulfillment derivable from the current chain that is not yet on
    it, sorted by (contract block digest, source digest). Recognized
    achievements may satisfy degree requirements but are never re-input to
    recognition contracts."""
    out: list[Fulfillment] = []
    for entry in store.contracts_of(Recognition):
        for origin in store.origins():
            if origin.current is None:
                continue
            if store.has_recognition(entry.block_hash, origin.origin_hash):
                continue
            derived = eval_recognition(entry.ast, origin.current)
            if derived is not None:
                out.append(
                    RecognizedAchievement(
                        contract_block=entry.block_hash,
                        source_achievement_block=origin.origin_hash,
                        derived=derived,
                    )
                )
    for entry in store.contracts_of(Degree):
        for student in store.students():
            if store.has_award(entry.block_hash, student):
                continue
            transcript = effective_transcript(store, student)
            outcome = eval_requirement(entry.ast.requirement, transcript)
            if outcome.fulfilled:
                witness = requirement_witness(entry.ast.requirement, transcript)
                out.append(
                    DegreeAward(
                        contract_block=entry.block_hash,
                        student=student,
                        degree_name=entry.ast.degree_name,
                        evidence=tuple(sorted(witness)),
                    )
                )
    out.sort(key=_fulfillment_sort_key)
    return out


def on_block_appended(store: "ChainStore", block) -> list[Fulfillment]:
    """Fulfillments to publish after a block was accepted. The block must be
    the current head; output is deterministic and deduplicated chain-wide."""
    if store.height() < 0 or store.head_hash() != store.block_hash_at(store.height()):
        raise ValueError("store head is inconsistent")
    if block.header.height != store.height():
        raise ValueError("on_block_appended expects the current head block")
    return pending_fulfillments(store)


def validate_fulfillment(store: "ChainStore", payload: Fulfillment, issuer: str) -> None:
    """Re-derive a fulfillment offered in a new block; peers accept only
    fulfillments they can recompute from their own replica."""
    entry = store.contract(payload.contract_block)
    if entry is None:
        raise PayloadInvalid("fulfillment references an unknown contract block")
    if isinstance(payload, RecognizedAchievement):
        if not isinstance(entry.ast, Recognition):
            raise PayloadInvalid("referenced contract is not a recognition contract")
        if issuer != entry.ast.home:
            raise IssuerMismatch("recognitions are published by the contract's home org")
        if store.has_recognition(payload.contract_block, payload.source_achievement_block):
            raise DuplicateFulfillment("this recognition already exists on chain")
        origin = store.origin(payload.source_achievement_block)
        if origin is None or origin.current is None:
            raise PayloadInvalid("source achievement is unknown or invalidated")
        derived = eval_recognition(entry.ast, origin.current)
        if derived != payload.derived:
            raise PayloadInvalid("derived record does not match contract evaluation")
        return
    if not isinstance(entry.ast, Degree):
        raise PayloadInvalid("referenced contract is not a degree contract")
    if issuer != entry.ast.issuer:
        raise IssuerMismatch("degree awards are published by the degree's issuing org")
    if store.has_award(payload.contract_block, payload.student):
        raise DuplicateFulfillment("this degree was already awarded to the student")
    if payload.degree_name != entry.ast.degree_name:
        raise PayloadInvalid("award degree name does not match the contract")
    transcript = effective_transcript(store, payload.student)
    outcome = eval_requirement(entry.ast.requirement, transcript)
    if not outcome.fulfilled:
        raise PayloadInvalid("degree requirement is not fulfilled for this student")
    witness = tuple(sorted(requirement_witness(entry.ast.requirement, transcript)))
    if witness != payload.evidence:
        raise PayloadInvalid("award evidence does not reproduce the witness set")


# -- progress reports ----------------------------------------------------------------

@dataclass(frozen=True)
class ProgressReport:
    student: str
    contract_block: bytes
    fulfilled: bool
    fraction: Fraction
    missing: tuple[Requirement, ...]

    def to_json_text(self) -> str:
        return json.dumps(
            {
                "student": self.student,
                "contract_block": self.contract_block.hex(),
                "fulfilled": self.fulfilled,
                "fraction": float(self.fraction),
                "missing": [print_requirement(leaf) for leaf in self.missing],
            },
            sort_keys=True,
        )


def progress_report(store: "ChainStore", student: str, contract_block: bytes) -> ProgressReport:
    """Read-only degree progress for a student under one degree contract."""
    entry = store.contract(contract_block)
    if entry is None:
        raise UnknownBlock("no contract at this block hash")
    if not isinstance(entry.ast, Degree):
        raise NotADegreeContract("referenced contract is not a degree contract")
    transcript = effective_transcript(store, student)
    outcome = eval_requirement(entry.ast.requirement, transcript)
    return ProgressReport(
        student=student,
        contract_block=contract_block,
        fulfilled=outcome.fulfilled,
        fraction=outcome.fraction,
        missing=outcome.missing,
    )
