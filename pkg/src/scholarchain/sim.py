"""Deterministic in-process multi-peer simulation.

Peers are isolated state machines exchanging immutable chain snapshots on a
logical clock: a single-threaded tick loop delivers gossip after a fixed
latency, applies scenario events (submissions, partitions, byte tampering,
queries) and lets light clients follow a trusted full peer's header chain.
Two runs with the same scenario and seed produce byte-identical reports.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Optional, Union

from .blocks import HEADER_SIZE, SIGNATURE_SIZE, Block, BlockHeader, block_hash
from .consensus import DifficultySchedule, difficulty_at, fork_choice, leading_zero_bits
from .encoding import canonical_decode
from .engine import pending_fulfillments, progress_report
from .errors import (
    HeaderChainInvalid,
    LedgerError,
    PayloadInvalid,
    ScenarioInvalid,
)
from .identity import KeyPair, OrgIdentity, is_valid_student_id
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
)
from . import dsl
from .store import ChainStore, forge_block, replay_records
from .transcript import effective_transcript

_KIND_BY_NAME = {"exam": SourceKind.UNIVERSITY_EXAM, "mooc": SourceKind.MOOC, "badge": SourceKind.OPEN_BADGE}

MAX_PUBLISH_CASCADE = 1000


# -- scenario model -----------------------------------------------------------------

@dataclass(frozen=True)
class SubmitPayload:
    kind: str  # REGISTER | ACHIEVEMENT | CORRECTION | CONTRACT
    args: tuple[tuple[str, str], ...]
    label: Optional[str] = None


@dataclass(frozen=True)
class Partition:
    groups: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Heal:
    pass


@dataclass(frozen=True)
class TamperByte:
    height: int
    offset: int  # into the block's canonical payload bytes


@dataclass(frozen=True)
class Query:
    kind: str  # HEAD | TRANSCRIPT | PROGRESS
    args: tuple[str, ...]


Action = Union[SubmitPayload, Partition, Heal, TamperByte, Query]


@dataclass(frozen=True)
class SimEvent:
    tick: int
    actor: int
    action: Action


@dataclass(frozen=True)
class SimScenario:
    peer_count: int
    light_client_ids: tuple[int, ...]
    seed: int
    gossip_latency_ticks: int
    max_ticks: int
    events: tuple[SimEvent, ...]
    pow: DifficultySchedule = field(default_factory=lambda: DifficultySchedule())

    def full_peers(self) -> list[int]:
        return [p for p in range(self.peer_count) if p not in self.light_client_ids]

    def validate(self) -> None:
        if self.peer_count < 1:
            raise ScenarioInvalid(-1, "peer count must be >= 1")
        if self.gossip_latency_ticks < 1:
            raise ScenarioInvalid(-1, "gossip latency must be >= 1")
        for cid in self.light_client_ids:
            if not (0 <= cid < self.peer_count):
                raise ScenarioInvalid(-1, f"light client {cid} does not exist")
        if not self.full_peers():
            raise ScenarioInvalid(-1, "at least one full peer is required")
        last_tick = 0
        for i, event in enumerate(self.events):
            if event.tick < last_tick:
                raise ScenarioInvalid(i, "event ticks must be nondecreasing")
            last_tick = event.tick
            if event.tick >= self.max_ticks:
                raise ScenarioInvalid(i, "event tick beyond max_ticks")
            if not (0 <= event.actor < self.peer_count):
                raise ScenarioInvalid(i, f"actor {event.actor} does not exist")
            if isinstance(event.action, (SubmitPayload, TamperByte)):
                if event.actor in self.light_client_ids:
                    raise ScenarioInvalid(i, "light clients cannot submit or tamper")
            if isinstance(event.action, Partition):
                members = [p for group in event.action.groups for p in group]
                if sorted(members) != list(range(self.peer_count)):
                    raise ScenarioInvalid(i, "partition groups must cover every peer exactly once")
            if isinstance(event.action, Query):
                if event.action.kind in ("TRANSCRIPT", "PROGRESS") and event.actor in self.light_client_ids:
                    raise ScenarioInvalid(i, "payload queries need a full peer")


# -- scenario text format --------------------------------------------------------------
#
#   PEERS <n> LIGHT <ids|-> SEED <s> LATENCY <l> MAXTICKS <m> [POW <base>,<step>,<cap>]
#   TICK <n> PEER <id> SUBMIT REGISTER name=<slug>
#   TICK <n> PEER <id> SUBMIT ACHIEVEMENT student=<uuid> course=<id> title=<text>
#                       credits=<dec> hours=<int> topics=<a,b> result=<passed|failed>
#                       [grade=<dec>] [kind=<exam|mooc|badge>] [as=<label>]
#   TICK <n> PEER <id> SUBMIT CORRECTION target=@<label> action=<invalidate|replace>
#                       reason=<text> [replacement fields as above]
#   TICK <n> PEER <id> SUBMIT CONTRACT text=<source> [as=<label>]
#   TICK <n> PEER <id> PARTITION <g0,g1|g2,...>
#   TICK <n> PEER <id> HEAL
#   TICK <n> PEER <id> TAMPER height=<h> offset=<o>
#   TICK <n> PEER <id> QUERY HEAD | TRANSCRIPT <uuid> | PROGRESS <uuid> @<label>

def _parse_kv(tokens: list[str], index: int) -> tuple[tuple[str, str], ...]:
    pairs = []
    for token in tokens:
        if "=" not in token:
            raise ScenarioInvalid(index, f"expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        pairs.append((key, value))
    return tuple(pairs)


def parse_scenario(text: str) -> SimScenario:
    header: Optional[dict] = None
    events: list[SimEvent] = []
    index = 0
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = shlex.split(line)
        if header is None:
            if tokens[0] != "PEERS":
                raise ScenarioInvalid(-1, "scenario must start with a PEERS header line")
            fields = dict(zip(tokens[0::2], tokens[1::2]))
            try:
                lights: tuple[int, ...] = ()
                if fields.get("LIGHT", "-") != "-":
                    lights = tuple(int(x) for x in fields["LIGHT"].split(","))
                pow_schedule = DifficultySchedule()
                if "POW" in fields:
                    base, step, cap = (int(x) for x in fields["POW"].split(","))
                    pow_schedule = DifficultySchedule(base, step, cap)
                header = {
                    "peer_count": int(fields["PEERS"]),
                    "light_client_ids": lights,
                    "seed": int(fields.get("SEED", "0")),
                    "gossip_latency_ticks": int(fields.get("LATENCY", "1")),
                    "max_ticks": int(fields["MAXTICKS"]),
                    "pow": pow_schedule,
                }
            except (KeyError, ValueError) as exc:
                raise ScenarioInvalid(-1, f"malformed header: {exc}") from None
            continue
        if tokens[0] != "TICK" or len(tokens) < 5 or tokens[2] != "PEER":
            raise ScenarioInvalid(index, "event lines look like: TICK <n> PEER <id> <ACTION> ...")
        try:
            tick = int(tokens[1])
            actor = int(tokens[3])
        except ValueError:
            raise ScenarioInvalid(index, "tick and peer id must be integers") from None
        word = tokens[4]
        rest = tokens[5:]
        action: Action
        if word == "SUBMIT":
            if not rest:
                raise ScenarioInvalid(index, "SUBMIT requires a payload kind")
            kind = rest[0]
            if kind not in ("REGISTER", "ACHIEVEMENT", "CORRECTION", "CONTRACT"):
                raise ScenarioInvalid(index, f"unknown payload kind {kind!r}")
            pairs = _parse_kv(rest[1:], index)
            label = dict(pairs).get("as")
            action = SubmitPayload(kind=kind, args=pairs, label=label)
        elif word == "PARTITION":
            if len(rest) != 1:
                raise ScenarioInvalid(index, "PARTITION takes one group spec like 0,1|2,3")
            try:
                groups = tuple(
                    tuple(int(x) for x in group.split(",")) for group in rest[0].split("|")
                )
            except ValueError:
                raise ScenarioInvalid(index, "partition groups must be integers") from None
            action = Partition(groups=groups)
        elif word == "HEAL":
            action = Heal()
        elif word == "TAMPER":
            fields = dict(_parse_kv(rest, index))
            try:
                action = TamperByte(height=int(fields["height"]), offset=int(fields["offset"]))
            except (KeyError, ValueError):
                raise ScenarioInvalid(index, "TAMPER requires height=<int> offset=<int>") from None
        elif word == "QUERY":
            if not rest:
                raise ScenarioInvalid(index, "QUERY requires a kind")
            action = Query(kind=rest[0], args=tuple(rest[1:]))
        else:
            raise ScenarioInvalid(index, f"unknown action {word!r}")
        events.append(SimEvent(tick=tick, actor=actor, action=action))
        index += 1
    if header is None:
        raise ScenarioInvalid(-1, "scenario has no header line")
    scenario = SimScenario(events=tuple(events), **header)
    scenario.validate()
    return scenario


# -- light clients ---------------------------------------------------------------------

@dataclass
class LightClientState:
    """Headers only; verifies linkage and proof-of-work, never payloads."""

    trusted_peer: int
    headers: list[BlockHeader] = field(default_factory=list)

    def head_hash(self) -> bytes:
        return block_hash(self.headers[-1]) if self.headers else bytes(32)


def _verify_header_chain(headers: list[BlockHeader], schedule: DifficultySchedule) -> None:
    prev = bytes(32)
    for height, header in enumerate(headers):
        if header.height != height:
            raise HeaderChainInvalid(height, "non-consecutive height")
        if header.prev_hash != prev:
            raise HeaderChainInvalid(height, "broken linkage")
        if header.difficulty != difficulty_at(schedule, height):
            raise HeaderChainInvalid(height, "difficulty does not match the schedule")
        digest = block_hash(header)
        if leading_zero_bits(digest) < header.difficulty:
            raise HeaderChainInvalid(height, "proof of work not satisfied")
        prev = digest
    return None


def light_client_sync(client: LightClientState, peer_store: ChainStore) -> LightClientState:
    """Adopt the peer's header chain after verifying linkage and PoW for
    every header. Storage stays headers-only."""
    headers = [stored.block.header for stored in peer_store.stored()]
    _verify_header_chain(headers, peer_store.schedule)
    return LightClientState(trusted_peer=client.trusted_peer, headers=headers)


def light_client_fetch_payload(client: LightClientState, peer_store: ChainStore, height: int) -> Payload:
    """Ask the full peer for one payload and check it against the header's
    payload hash before accepting it."""
    if not (0 <= height < len(client.headers)):
        raise HeaderChainInvalid(height, "height beyond the synced header chain")
    stored = peer_store.block_at(height)
    if stored is None:
        raise PayloadInvalid("peer does not have the requested block")
    payload_bytes = stored.block.payload_bytes
    from .blocks import payload_hash as payload_digest

    if payload_digest(payload_bytes) != client.headers[height].payload_hash:
        raise PayloadInvalid("peer served payload bytes that do not match the header")
    return canonical_decode(payload_bytes)


# -- report ------------------------------------------------------------------------------

@dataclass
class SimReport:
    heads: list[tuple[int, str, str]]  # (peer id, role, head digest hex)
    convergence_tick: Optional[int]
    detected_tampers: list[tuple[int, int, int]]  # (tick, detector, offender)
    fulfillment_blocks: list[str]
    query_results: list[str]
    rejected_submits: list[tuple[int, int, str]]  # (tick, peer, error name)

    def render(self) -> str:
        lines = ["HEADS"]
        for peer_id, role, digest in self.heads:
            lines.append(f"peer {peer_id} {role} {digest}")
        lines.append(
            "CONVERGENCE " + ("never" if self.convergence_tick is None else str(self.convergence_tick))
        )
        lines.append("TAMPERS")
        for tick, detector, offender in self.detected_tampers:
            lines.append(f"tick {tick} detector {detector} offender {offender}")
        lines.append("FULFILLMENTS")
        lines.extend(self.fulfillment_blocks)
        lines.append("REJECTED")
        for tick, peer, error in self.rejected_submits:
            lines.append(f"tick {tick} peer {peer} {error}")
        lines.append("QUERIES")
        lines.extend(self.query_results)
        return "\n".join(lines) + "\n"


# -- the simulator -------------------------------------------------------------------------

@dataclass
class _Announce:
    seq: int
    deliver_tick: int
    sender: int
    receiver: int
    records: tuple[bytes, ...]


class _FullPeer:
    def __init__(self, peer_id: int, key: KeyPair, store: ChainStore):
        self.id = peer_id
        self.key = key
        self.store = store
        self.dirty = False
        self.corrupted = False
        self.tampered_records: Optional[list[bytes]] = None

    def gossip_records(self) -> list[bytes]:
        if self.corrupted and self.tampered_records is not None:
            return list(self.tampered_records)
        return self.store.to_records()


class Simulator:
    def __init__(self, scenario: SimScenario):
        scenario.validate()
        self.scenario = scenario
        self.schedule = scenario.pow
        seed = scenario.seed
        self.genesis_key = KeyPair.from_string_seed(f"sim-genesis-{seed}")
        genesis_store = ChainStore(self.schedule)
        genesis_block = forge_block(
            genesis_store,
            OrgRegistration(
                OrgIdentity(self.genesis_key.org_id, "genesis", self.genesis_key.public_key)
            ),
            self.genesis_key,
            timestamp=0,
        )
        genesis_store.append(genesis_block)
        self.genesis_records = genesis_store.to_records()

        self.peers: dict[int, _FullPeer] = {}
        self.lights: dict[int, LightClientState] = {}
        full_ids = scenario.full_peers()
        for pid in range(scenario.peer_count):
            if pid in scenario.light_client_ids:
                self.lights[pid] = LightClientState(trusted_peer=full_ids[0])
            else:
                key = KeyPair.from_string_seed(f"sim-peer-{pid}-{seed}")
                store, bad = replay_records(self.genesis_records, self.schedule)
                assert bad is None
                self.peers[pid] = _FullPeer(pid, key, store)

        self.groups: list[set[int]] = [set(range(scenario.peer_count))]
        self.queue: list[_Announce] = []
        self.seq = 0
        self.labels: dict[str, bytes] = {}
        self.report = SimReport(
            heads=[], convergence_tick=None, detected_tampers=[],
            fulfillment_blocks=[], query_results=[], rejected_submits=[],
        )
        self.head_history: list[dict[int, bytes]] = []

    # topology

    def _same_group(self, a: int, b: int) -> bool:
        return any(a in group and b in group for group in self.groups)

    def _neighbors(self, peer_id: int) -> list[int]:
        return sorted(
            other
            for other in self.peers
            if other != peer_id and self._same_group(peer_id, other)
        )

    # fulfillment publication

    def _owner_org(self, payload, store: ChainStore) -> str:
        if isinstance(payload, RecognizedAchievement):
            return payload.derived.issuer
        entry = store.contract(payload.contract_block)
        return entry.ast.issuer

    def _publish_fulfillments(self, peer: _FullPeer, tick: int) -> None:
        for _ in range(MAX_PUBLISH_CASCADE):
            mine = [
                p
                for p in pending_fulfillments(peer.store)
                if self._owner_org(p, peer.store) == peer.key.org_id
            ]
            if not mine:
                return
            block = forge_block(peer.store, mine[0], peer.key, timestamp=tick)
            peer.store.append(block)
            peer.dirty = True
        raise RuntimeError("fulfillment cascade did not terminate")

    # gossip

    def _announce(self, peer: _FullPeer, tick: int) -> None:
        records = tuple(peer.gossip_records())
        for neighbor in self._neighbors(peer.id):
            self.queue.append(
                _Announce(
                    seq=self.seq,
                    deliver_tick=tick + self.scenario.gossip_latency_ticks,
                    sender=peer.id,
                    receiver=neighbor,
                    records=records,
                )
            )
            self.seq += 1

    def _receive(self, message: _Announce, tick: int) -> None:
        if not self._same_group(message.sender, message.receiver):
            return  # link was cut while the message was in flight
        peer = self.peers[message.receiver]
        offered, bad_height = replay_records(list(message.records), self.schedule)
        if bad_height is not None:
            self.report.detected_tampers.append((tick, message.receiver, message.sender))
            return
        if peer.corrupted:
            peer.store = offered
            peer.corrupted = False
            peer.tampered_records = None
            peer.dirty = True
            self._publish_fulfillments(peer, tick)
            return
        if offered.head_hash() == peer.store.head_hash():
            return
        chosen = fork_choice([peer.store, offered])
        if chosen is offered:
            peer.store = offered
            peer.dirty = True
            self._publish_fulfillments(peer, tick)

    # events

    def _build_payload(self, peer: _FullPeer, action: SubmitPayload, tick: int, index: int) -> Payload:
        args = dict(action.args)
        try:
            if action.kind == "REGISTER":
                return OrgRegistration(
                    OrgIdentity(peer.key.org_id, args["name"], peer.key.public_key)
                )
            if action.kind == "ACHIEVEMENT":
                return self._achievement_from_args(args, peer.key.org_id, tick)
            if action.kind == "CORRECTION":
                target = self._resolve_label(args["target"], index)
                action_name = args["action"]
                if action_name == "invalidate":
                    return CorrectionRecord(
                        target_block_hash=target,
                        action=CorrectionAction.INVALIDATE,
                        reason=args["reason"],
                    )
                if action_name == "replace":
                    return CorrectionRecord(
                        target_block_hash=target,
                        action=CorrectionAction.REPLACE,
                        reason=args["reason"],
                        replacement=self._achievement_from_args(args, peer.key.org_id, tick),
                    )
                raise ScenarioInvalid(index, f"unknown correction action {action_name!r}")
            if action.kind == "CONTRACT":
                ast = dsl.parse(args["text"])
                return ContractPayload(source=dsl.print_contract(ast))
        except KeyError as exc:
            raise ScenarioInvalid(index, f"missing submit field {exc.args[0]!r}") from None
        except (InvalidOperation, ValueError) as exc:
            raise ScenarioInvalid(index, f"malformed submit field: {exc}") from None
        raise ScenarioInvalid(index, f"unknown payload kind {action.kind!r}")

    def _achievement_from_args(self, args: dict, issuer: str, tick: int) -> AchievementRecord:
        if not is_valid_student_id(args["student"]):
            raise ValueError(f"student is not a UUIDv4: {args['student']!r}")
        grade = args.get("grade")
        return AchievementRecord(
            student=args["student"],
            course_id=args["course"],
            title=args.get("title", args["course"]),
            credit_points=Decimal(args["credits"]),
            workload_hours=int(args.get("hours", "0")),
            issuer=issuer,
            topics=tuple(args["topics"].split(",")),
            result=Result.PASSED if args.get("result", "passed") == "passed" else Result.FAILED,
            grade=None if grade is None else Decimal(grade),
            assessment_tick=tick,
            source_kind=_KIND_BY_NAME[args.get("kind", "exam")],
        )

    def _resolve_label(self, ref: str, index: int) -> bytes:
        if not ref.startswith("@"):
            try:
                return bytes.fromhex(ref)
            except ValueError:
                raise ScenarioInvalid(index, f"target must be @label or hex digest: {ref!r}") from None
        label = ref[1:]
        if label not in self.labels:
            raise ScenarioInvalid(index, f"label @{label} is not bound to a block yet")
        return self.labels[label]

    def _apply_event(self, event: SimEvent, index: int, tick: int) -> None:
        action = event.action
        if isinstance(action, SubmitPayload):
            peer = self.peers[event.actor]
            payload = self._build_payload(peer, action, tick, index)
            try:
                block = forge_block(peer.store, payload, peer.key, timestamp=tick)
                peer.store.append(block)
            except LedgerError as exc:
                self.report.rejected_submits.append((tick, event.actor, type(exc).__name__))
                return
            if action.label:
                self.labels[action.label] = block_hash(block.header)
            peer.dirty = True
            self._publish_fulfillments(peer, tick)
        elif isinstance(action, Partition):
            self.groups = [set(group) for group in action.groups]
        elif isinstance(action, Heal):
            self.groups = [set(range(self.scenario.peer_count))]
            for peer in self.peers.values():
                peer.dirty = True
        elif isinstance(action, TamperByte):
            peer = self.peers[event.actor]
            records = peer.gossip_records()
            if not (0 <= action.height < len(records)):
                raise ScenarioInvalid(index, "tamper height out of range")
            record = bytearray(records[action.height])
            absolute = HEADER_SIZE + SIGNATURE_SIZE + action.offset
            if not (HEADER_SIZE + SIGNATURE_SIZE <= absolute < len(record)):
                raise ScenarioInvalid(index, "tamper offset beyond payload bytes")
            record[absolute] ^= 0xFF
            records[action.height] = bytes(record)
            peer.tampered_records = records
            peer.corrupted = True
            peer.dirty = True
        elif isinstance(action, Query):
            self._run_query(event.actor, action, tick, index)

    def _run_query(self, actor: int, query: Query, tick: int, index: int) -> None:
        n = len(self.report.query_results)
        prefix = f"[{n}] tick {tick} peer {actor}"
        if query.kind == "HEAD":
            if actor in self.lights:
                client = self.lights[actor]
                height = len(client.headers) - 1
                digest = client.head_hash().hex()
            else:
                store = self.peers[actor].store
                height = store.height()
                digest = store.head_hash().hex()
            self.report.query_results.append(f"{prefix} HEAD height={height} hash={digest}")
        elif query.kind == "TRANSCRIPT":
            store = self.peers[actor].store
            transcript = effective_transcript(store, query.args[0])
            courses = ";".join(
                f"{e.achievement.course_id}:{e.achievement.credit_points}" for e in transcript.entries
            )
            self.report.query_results.append(
                f"{prefix} TRANSCRIPT {query.args[0]} entries={len(transcript.entries)} [{courses}]"
            )
        elif query.kind == "PROGRESS":
            store = self.peers[actor].store
            contract = self._resolve_label(query.args[1], index)
            try:
                report = progress_report(store, query.args[0], contract)
                self.report.query_results.append(f"{prefix} PROGRESS {report.to_json_text()}")
            except LedgerError as exc:
                self.report.query_results.append(f"{prefix} PROGRESS error={type(exc).__name__}")
        else:
            raise ScenarioInvalid(index, f"unknown query kind {query.kind!r}")

    # main loop

    def run(self) -> SimReport:
        events = list(enumerate(self.scenario.events))
        cursor = 0
        for tick in range(self.scenario.max_ticks):
            due = sorted(
                (m for m in self.queue if m.deliver_tick == tick), key=lambda m: m.seq
            )
            self.queue = [m for m in self.queue if m.deliver_tick > tick]
            for message in due:
                self._receive(message, tick)

            while cursor < len(events) and events[cursor][1].tick == tick:
                index, event = events[cursor]
                self._apply_event(event, index, tick)
                cursor += 1

            for client_id in sorted(self.lights):
                client = self.lights[client_id]
                trusted = self.peers[client.trusted_peer]
                if self._same_group(client_id, client.trusted_peer) and not trusted.corrupted:
                    try:
                        self.lights[client_id] = light_client_sync(client, trusted.store)
                    except HeaderChainInvalid:
                        self.report.detected_tampers.append((tick, client_id, client.trusted_peer))

            for peer_id in sorted(self.peers):
                peer = self.peers[peer_id]
                if peer.dirty:
                    self._announce(peer, tick)
                    peer.dirty = False

            self.head_history.append(
                {pid: self.peers[pid].store.head_hash() for pid in sorted(self.peers)}
            )

        self._finalize()
        return self.report

    def _finalize(self) -> None:
        for pid in range(self.scenario.peer_count):
            if pid in self.lights:
                self.report.heads.append((pid, "light", self.lights[pid].head_hash().hex()))
            else:
                self.report.heads.append((pid, "full", self.peers[pid].store.head_hash().hex()))

        if self.head_history:
            final = self.head_history[-1]
            final_values = set(final.values())
            if len(final_values) == 1:
                target = final_values.pop()
                convergence = None
                for tick in range(len(self.head_history) - 1, -1, -1):
                    heads = self.head_history[tick]
                    if set(heads.values()) == {target}:
                        convergence = tick
                    else:
                        break
                self.report.convergence_tick = convergence

        reference = self.peers[min(self.peers)].store
        for stored in reference.stored():
            if isinstance(stored.payload, (RecognizedAchievement, DegreeAward)):
                self.report.fulfillment_blocks.append(stored.hash.hex())

        self.report.detected_tampers.sort()
        self.report.rejected_submits.sort()


def run(scenario: SimScenario) -> SimReport:
    """Execute a scenario; deterministic for equal (scenario, seed)."""
    return Simulator(scenario).run()


def run_text(scenario_text: str) -> SimReport:
    return run(parse_scenario(scenario_text))
