"""Shared fixtures: fast-PoW stores, registered orgs and the block 101-104
style end-to-end chain used across test modules."""

from __future__ import annotations

import random
from decimal import Decimal

import pytest

from scholarchain import dsl
from scholarchain.consensus import DifficultySchedule
from scholarchain.engine import pending_fulfillments
from scholarchain.identity import KeyPair, OrgIdentity, new_student_id
from scholarchain.payloads import (
    AchievementRecord,
    ContractPayload,
    CorrectionAction,
    CorrectionRecord,
    OrgRegistration,
    RecognizedAchievement,
    Result,
    SourceKind,
)
from scholarchain.store import ChainStore, forge_block

# one leading zero bit: ~2 hash attempts per block keeps suites fast
FAST = DifficultySchedule(base_bits=1, step_every=1000, cap_bits=24)

STUDENT = "00000000-0000-4000-8000-000000000000"
OTHER_STUDENT = "11111111-2222-4333-8444-555555555555"


def org_key(name: str) -> KeyPair:
    return KeyPair.from_string_seed(name)


def registration(key: KeyPair, name: str) -> OrgRegistration:
    return OrgRegistration(OrgIdentity(key.org_id, name, key.public_key))


def submit(store: ChainStore, payload, key: KeyPair, tick=None) -> bytes:
    """Forge, append and return the new block's hash."""
    block = forge_block(store, payload, key, timestamp=tick)
    store.append(block)
    return store.head_hash()


def achievement(
    key: KeyPair,
    student: str = STUDENT,
    course: str = "algebra-1",
    credits: str = "5.0",
    topics: tuple[str, ...] = ("math",),
    result: Result = Result.PASSED,
    title: str | None = None,
    grade: str | None = None,
    tick: int = 0,
    kind: SourceKind = SourceKind.UNIVERSITY_EXAM,
    hours: int = 150,
) -> AchievementRecord:
    return AchievementRecord(
        student=student,
        course_id=course,
        title=title or course.replace("-", " ").title(),
        credit_points=Decimal(credits),
        workload_hours=hours,
        issuer=key.org_id,
        topics=topics,
        result=result,
        grade=None if grade is None else Decimal(grade),
        assessment_tick=tick,
        source_kind=kind,
    )


def store_with_orgs(*names: str, schedule: DifficultySchedule = FAST):
    store = ChainStore(schedule)
    keys = {}
    for name in names:
        key = org_key(name)
        keys[name] = key
        submit(store, registration(key, name), key)
    return store, keys


def publish_owned(store: ChainStore, key: KeyPair, tick=None) -> list[bytes]:
    """Publish pending fulfillments owed by this key's org; returns hashes."""
    added = []
    while True:
        mine = [
            p
            for p in pending_fulfillments(store)
            if (p.derived.issuer if isinstance(p, RecognizedAchievement)
                else store.contract(p.contract_block).ast.issuer) == key.org_id
        ]
        if not mine:
            return added
        added.append(submit(store, mine[0], key, tick=tick))


@pytest.fixture
def two_orgs():
    return store_with_orgs("home-u", "abroad-u")


RECOGNITION_FIXTURE_SOURCE = (
    "RECOGNITION BETWEEN home-u AND abroad-u WHERE ISSUER = abroad-u"
    " AND TOPIC CONTAINS math AND PASSED MAP FACTOR 1.0"
)

DEGREE_FIXTURE_SOURCE = (
    'DEGREE "BSc Mathematics" BY home-u REQUIRES ALL ('
    'COURSE "algebra-1" FROM home-u, '
    'COURSE "programming-1" FROM home-u, '
    'COURSE "analysis-1" FROM home-u)'
)


def contract_payload(source: str) -> ContractPayload:
    return ContractPayload(source=dsl.print_contract(dsl.parse(source)))


def build_figure1_chain(schedule: DifficultySchedule = FAST):
    """The paper-style scenario: two home achievements, a recognition
    agreement, a degree contract, then a foreign exam that triggers exactly
    one recognition and one degree award."""
    store, keys = store_with_orgs("home-u", "abroad-u", schedule=schedule)
    home, abroad = keys["home-u"], keys["abroad-u"]
    hashes = {}
    hashes["algebra"] = submit(
        store, achievement(home, course="algebra-1", topics=("math", "algebra"), grade="1.7"), home
    )
    hashes["programming"] = submit(
        store, achievement(home, course="programming-1", topics=("cs", "programming")), home
    )
    hashes["recognition"] = submit(store, contract_payload(RECOGNITION_FIXTURE_SOURCE), home)
    hashes["degree"] = submit(store, contract_payload(DEGREE_FIXTURE_SOURCE), home)
    hashes["foreign"] = submit(
        store, achievement(abroad, course="analysis-1", topics=("math", "analysis")), abroad
    )
    fulfillment_hashes = publish_owned(store, home)
    return store, keys, hashes, fulfillment_hashes


@pytest.fixture
def figure1_chain():
    return build_figure1_chain()


def build_random_chain(seed: int, max_blocks: int = 50, students: int = 5):
    """Random but always-valid chain with achievements, replacements and
    invalidations from two orgs."""
    rng = random.Random(seed)
    store, keys = store_with_orgs("rand-a", "rand-b")
    key_list = list(keys.values())
    pool = [new_student_id(rng) for _ in range(students)]
    origins: list[tuple[bytes, KeyPair]] = []
    invalidated: set[bytes] = set()
    courses = ["c1", "c2", "c3", "c4"]
    topics_pool = [("math",), ("cs",), ("math", "stats"), ("arts",)]
    for _ in range(rng.randrange(1, max_blocks - 1)):
        if store.height() + 1 >= max_blocks:
            break
        choice = rng.random()
        if choice < 0.6 or not origins:
            key = rng.choice(key_list)
            record = achievement(
                key,
                student=rng.choice(pool),
                course=rng.choice(courses),
                credits=str(rng.choice(["2", "3.5", "5", "7.5"])),
                topics=rng.choice(topics_pool),
                result=Result.PASSED if rng.random() < 0.8 else Result.FAILED,
                tick=store.height() + 1,
            )
            origins.append((submit(store, record, key), key))
        else:
            origin_hash, key = rng.choice(origins)
            if rng.random() < 0.5 and origin_hash not in invalidated:
                submit(
                    store,
                    CorrectionRecord(
                        target_block_hash=origin_hash,
                        action=CorrectionAction.INVALIDATE,
                        reason="entry found invalid",
                    ),
                    key,
                )
                invalidated.add(origin_hash)
            else:
                replacement = achievement(
                    key,
                    student=rng.choice(pool),
                    course=rng.choice(courses),
                    credits=str(rng.choice(["1", "4.5", "6"])),
                    topics=rng.choice(topics_pool),
                    result=Result.PASSED if rng.random() < 0.8 else Result.FAILED,
                    tick=store.height() + 1,
                )
                submit(
                    store,
                    CorrectionRecord(
                        target_block_hash=origin_hash,
                        action=CorrectionAction.REPLACE,
                        reason="grade fixed after review",
                        replacement=replacement,
                    ),
                    key,
                )
                invalidated.discard(origin_hash)
    return store, pool
