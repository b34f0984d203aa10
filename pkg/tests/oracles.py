"""Independent reference implementations used only to check the product code.

Everything here is deliberately written from scratch against the data-format
description, not by calling into the package: a pure-Python SHA-256, a
second canonical encoder, naive replay/evaluation oracles. Tests compare the
two sides; the oracles never share code paths with the package.
"""

from __future__ import annotations

import struct
from decimal import Decimal

from scholarchain.payloads import (
    AchievementRecord,
    CorrectionAction,
    CorrectionRecord,
    OrgRegistration,
    RecognizedAchievement,
    Result,
)
from scholarchain.transcript import EffectiveTranscript, TranscriptEntry


# -- pure-Python SHA-256 ------------------------------------------------------------

def _icbrt(n: int) -> int:
    x = int(round(n ** (1.0 / 3.0)))
    while x * x * x > n:
        x -= 1
    while (x + 1) ** 3 <= n:
        x += 1
    return x


def _isqrt(n: int) -> int:
    x = int(n ** 0.5)
    while x * x > n:
        x -= 1
    while (x + 1) * (x + 1) <= n:
        x += 1
    return x


def _first_primes(count: int) -> list[int]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


_PRIMES = _first_primes(64)
# fractional parts of cube roots (round constants) and square roots (state)
_K = [_icbrt(p << 96) & 0xFFFFFFFF for p in _PRIMES]
_H0 = [_isqrt(p << 64) & 0xFFFFFFFF for p in _PRIMES[:8]]


def _rotr(x: int, n: int) -> int:
    return ((x >> n) | (x << (32 - n))) & 0xFFFFFFFF


def sha256_oracle(data: bytes) -> bytes:
    """Independent SHA-256 built from the specification constants."""
    h = list(_H0)
    bit_length = len(data) * 8
    data = data + b"\x80"
    data += b"\x00" * ((56 - len(data) % 64) % 64)
    data += struct.pack(">Q", bit_length)
    for start in range(0, len(data), 64):
        w = list(struct.unpack(">16I", data[start : start + 64]))
        for i in range(16, 64):
            s0 = _rotr(w[i - 15], 7) ^ _rotr(w[i - 15], 18) ^ (w[i - 15] >> 3)
            s1 = _rotr(w[i - 2], 17) ^ _rotr(w[i - 2], 19) ^ (w[i - 2] >> 10)
            w.append((w[i - 16] + s0 + w[i - 7] + s1) & 0xFFFFFFFF)
        a, b, c, d, e, f, g, hh = h
        for i in range(64):
            s1 = _rotr(e, 6) ^ _rotr(e, 11) ^ _rotr(e, 25)
            ch = (e & f) ^ (~e & g)
            temp1 = (hh + s1 + ch + _K[i] + w[i]) & 0xFFFFFFFF
            s0 = _rotr(a, 2) ^ _rotr(a, 13) ^ _rotr(a, 22)
            maj = (a & b) ^ (a & c) ^ (b & c)
            temp2 = (s0 + maj) & 0xFFFFFFFF
            hh, g, f, e, d, c, b, a = (
                g, f, e, (d + temp1) & 0xFFFFFFFF, c, b, a, (temp1 + temp2) & 0xFFFFFFFF,
            )
        h = [(x + y) & 0xFFFFFFFF for x, y in zip(h, (a, b, c, d, e, f, g, hh))]
    return b"".join(struct.pack(">I", x) for x in h)


# -- second, independently written canonical encoder ----------------------------------

def _enc_text(text: str) -> bytes:
    raw = text.encode("utf-8")
    return len(raw).to_bytes(4, "big") + raw


def _enc_decimal(value: Decimal) -> bytes:
    text = "0" if value == 0 else format(value.normalize(), "f")
    return _enc_text(text)


def encode_achievement_oracle(a: AchievementRecord) -> bytes:
    out = b"\x02"
    out += _enc_text(a.student)
    out += _enc_text(a.course_id)
    out += _enc_text(a.title)
    out += _enc_decimal(a.credit_points)
    out += a.workload_hours.to_bytes(4, "big")
    out += bytes.fromhex(a.issuer)
    out += len(a.topics).to_bytes(4, "big")
    for tag in a.topics:
        out += _enc_text(tag)
    out += bytes([1 if a.result is Result.PASSED else 0])
    if a.grade is None:
        out += b"\x00"
    else:
        out += b"\x01" + _enc_decimal(a.grade)
    out += a.assessment_tick.to_bytes(8, "big")
    out += bytes([a.source_kind.value])
    return out


def encode_registration_oracle(reg: OrgRegistration) -> bytes:
    out = b"\x01"
    out += _enc_text(reg.identity.display_name)
    out += len(reg.identity.public_key).to_bytes(4, "big") + reg.identity.public_key
    return out


def encode_header_oracle(header) -> bytes:
    out = header.height.to_bytes(8, "big")
    out += header.prev_hash
    out += header.payload_hash
    out += bytes.fromhex(header.issuer)
    out += header.timestamp.to_bytes(8, "big")
    out += header.difficulty.to_bytes(4, "big")
    out += header.nonce.to_bytes(8, "big")
    return out


# -- naive replay oracles ----------------------------------------------------------------

def transcript_oracle(store, student: str) -> EffectiveTranscript:
    """Re-reads the whole chain per query instead of using derived state."""
    per_origin: dict[bytes, list] = {}
    recognized: list[tuple[int, bytes, AchievementRecord]] = []
    for stored in store.stored():
        payload = stored.payload
        height = stored.block.header.height
        if isinstance(payload, AchievementRecord):
            per_origin[stored.hash] = [height, payload, []]
        elif isinstance(payload, CorrectionRecord):
            slot = per_origin[payload.target_block_hash]
            slot[2].append(stored.hash)
            slot[1] = payload.replacement if payload.action is CorrectionAction.REPLACE else None
        elif isinstance(payload, RecognizedAchievement):
            recognized.append((height, stored.hash, payload.derived))
    rows: list[tuple[int, TranscriptEntry]] = []
    for origin_hash, (height, current, trail) in per_origin.items():
        if current is not None and current.student == student:
            rows.append(
                (height, TranscriptEntry(current, origin_hash, tuple(trail)))
            )
    for height, block_digest, derived in recognized:
        if derived.student == student:
            rows.append((height, TranscriptEntry(derived, block_digest, ())))
    rows.sort(key=lambda row: row[0])
    return EffectiveTranscript(student=student, entries=tuple(e for _, e in rows))


def correction_counts_oracle(store, window: int) -> dict[str, int]:
    head = store.height()
    counts: dict[str, int] = {}
    for stored in store.stored():
        if isinstance(stored.payload, CorrectionRecord):
            height = stored.block.header.height
            if head - window + 1 <= height <= head:
                issuer = stored.block.header.issuer
                counts[issuer] = counts.get(issuer, 0) + 1
    return counts


def banned_orgs_oracle(store, threshold: int, window: int, from_height: int = 0) -> set[str]:
    """Sliding-window scan over correction blocks, one window per height."""
    events = [
        (s.block.header.height, s.block.header.issuer)
        for s in store.stored()
        if isinstance(s.payload, CorrectionRecord)
    ]
    banned: set[str] = set()
    for h in range(from_height, store.height() + 1):
        counts: dict[str, int] = {}
        for height, org in events:
            if h - window + 1 <= height <= h:
                counts[org] = counts.get(org, 0) + 1
        banned.update(org for org, n in counts.items() if n >= threshold)
    return banned


# -- naive contract evaluation oracles ------------------------------------------------------

def predicate_oracle(predicate, achievement) -> bool:
    from scholarchain.dsl import CreditsGe, IsPassed, IssuerIs, SourceIn, TopicContains

    verdicts = []
    for atom in predicate.atoms:
        if isinstance(atom, IssuerIs):
            verdicts.append(achievement.issuer == atom.org)
        elif isinstance(atom, TopicContains):
            verdicts.append(atom.tag in achievement.topics)
        elif isinstance(atom, CreditsGe):
            verdicts.append(achievement.credit_points >= atom.amount)
        elif isinstance(atom, IsPassed):
            verdicts.append(achievement.result is Result.PASSED)
        elif isinstance(atom, SourceIn):
            verdicts.append(achievement.source_kind in atom.kinds)
    return all(verdicts)


def requirement_met_oracle(req, achievements) -> bool:
    """Truth-table style evaluation over a plain list of achievements."""
    from scholarchain.dsl import AllOf, AnyOf, AtLeastNOf, Course, CreditsAtLeast

    if isinstance(req, CreditsAtLeast):
        total = Decimal(0)
        for a in achievements:
            if a.result is Result.PASSED and req.topic in a.topics:
                total += a.credit_points
        return total >= req.amount
    if isinstance(req, Course):
        for a in achievements:
            if (
                a.result is Result.PASSED
                and a.course_id == req.course_id
                and (req.issuer is None or a.issuer == req.issuer)
            ):
                return True
        return False
    child_flags = [requirement_met_oracle(c, achievements) for c in req.children]
    if isinstance(req, AllOf):
        return all(child_flags)
    if isinstance(req, AnyOf):
        return any(child_flags)
    if isinstance(req, AtLeastNOf):
        return sum(child_flags) >= req.n
    raise TypeError(req)


def witness_oracle(req, entries) -> frozenset:
    """Supporting origin blocks for a met requirement, accumulated naively.
    ``entries`` is a list of (achievement, origin_hash) pairs."""
    from scholarchain.dsl import AllOf, AnyOf, AtLeastNOf, Course, CreditsAtLeast

    achievements = [a for a, _ in entries]
    if not requirement_met_oracle(req, achievements):
        return frozenset()
    if isinstance(req, CreditsAtLeast):
        return frozenset(
            origin for a, origin in entries
            if a.result is Result.PASSED and req.topic in a.topics
        )
    if isinstance(req, Course):
        return frozenset(
            origin for a, origin in entries
            if a.result is Result.PASSED
            and a.course_id == req.course_id
            and (req.issuer is None or a.issuer == req.issuer)
        )
    out: set = set()
    for child in req.children:
        if requirement_met_oracle(child, achievements):
            out |= witness_oracle(child, entries)
    return frozenset(out)
