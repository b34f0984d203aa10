"""Operator command line.

Submissions, key management and mining work directly on a local chain file;
the public HTTP explorer is read-only by design, so writes never travel over
the web interface. Exit codes: 0 success, 1 domain error (the typed error
name is printed), 2 usage error.
"""

from __future__ import annotations

import dataclasses
import random
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional

import click

from . import dsl, sim as simulation
from .consensus import DifficultySchedule
from .engine import pending_fulfillments, progress_report
from .errors import LedgerError, PayloadInvalid
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
from .store import ChainStore, forge_block, load_store, replay_records, read_records
from .transcript import effective_transcript, render_transcript_text

_SOURCE_KINDS = {
    "exam": SourceKind.UNIVERSITY_EXAM,
    "mooc": SourceKind.MOOC,
    "badge": SourceKind.OPEN_BADGE,
}


@dataclasses.dataclass
class NodeConfig:
    chain_path: Path
    key_path: Path
    schedule: DifficultySchedule
    port: int = 8080
    seed: Optional[int] = None

    def __post_init__(self):
        if not str(self.chain_path) or not str(self.key_path):
            raise ValueError("chain and key paths must be non-empty")
        if not (1024 <= self.port <= 65535):
            raise ValueError("port must lie in [1024, 65535]")


def _fail(exc: Exception) -> None:
    click.echo(f"{type(exc).__name__}: {exc}", err=True)
    sys.exit(1)


def _load_chain(cfg: NodeConfig) -> ChainStore:
    if not cfg.chain_path.exists():
        raise PayloadInvalid(f"chain file not found: {cfg.chain_path}")
    return load_store(cfg.chain_path, cfg.schedule)


def _load_key(cfg: NodeConfig) -> KeyPair:
    if not cfg.key_path.exists():
        raise PayloadInvalid(f"key file not found: {cfg.key_path}")
    return KeyPair.load(cfg.key_path)


def _parse_decimal(text: str, what: str) -> Decimal:
    try:
        return Decimal(text)
    except InvalidOperation:
        raise PayloadInvalid(f"{what} is not a decimal: {text!r}") from None


def _publish_owned(store: ChainStore, key: KeyPair, tick: Optional[int]) -> list[str]:
    """Mine every pending fulfillment this key's org is responsible for."""
    published = []
    while True:
        mine = [
            p
            for p in pending_fulfillments(store)
            if (p.derived.issuer if isinstance(p, RecognizedAchievement)
                else store.contract(p.contract_block).ast.issuer) == key.org_id
        ]
        if not mine:
            return published
        block = forge_block(store, mine[0], key, timestamp=tick)
        store.append(block)
        kind = "recognition" if isinstance(mine[0], RecognizedAchievement) else "degree-award"
        published.append(f"{kind} {store.head_hash().hex()}")


@click.group()
@click.option("--chain", "chain_path", default="ledger.chain", show_default=True,
              type=click.Path(path_type=Path), help="Chain file.")
@click.option("--key", "key_path", default="org.key", show_default=True,
              type=click.Path(path_type=Path), help="Org key file.")
@click.option("--pow-base", default=8, show_default=True, type=int,
              help="Base difficulty bits of the write challenge.")
@click.option("--pow-step", default=1000, show_default=True, type=int,
              help="Heights between difficulty increments.")
@click.option("--pow-cap", default=24, show_default=True, type=int,
              help="Difficulty cap in bits.")
@click.pass_context
def main(ctx, chain_path, key_path, pow_base, pow_step, pow_cap):
    """Ledger for student achievements with self-fulfilling contracts."""
    try:
        schedule = DifficultySchedule(pow_base, pow_step, pow_cap)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    ctx.obj = NodeConfig(chain_path=chain_path, key_path=key_path, schedule=schedule)


@main.command()
@click.option("--out", default=None, type=click.Path(path_type=Path),
              help="Where to write the key file (defaults to --key).")
@click.option("--seed-hex", default=None, help="32-byte hex seed for reproducible keys.")
@click.pass_obj
def keygen(cfg: NodeConfig, out, seed_hex):
    """Generate an Ed25519 org key."""
    try:
        key = KeyPair(bytes.fromhex(seed_hex)) if seed_hex else KeyPair.generate()
        path = out or cfg.key_path
        key.save(path)
    except (ValueError, OSError) as exc:
        _fail(exc)
        return
    click.echo(f"org_id {key.org_id}")
    click.echo(f"key file {path}")


@main.command("register-org")
@click.option("--name", required=True, help="Public display name of the organization.")
@click.option("--tick", default=None, type=int, help="Logical timestamp for the block.")
@click.pass_obj
def register_org(cfg: NodeConfig, name, tick):
    """Register this key's org on chain (creates the chain file if absent)."""
    try:
        key = _load_key(cfg)
        if cfg.chain_path.exists():
            store = load_store(cfg.chain_path, cfg.schedule)
        else:
            store = ChainStore(cfg.schedule)
        payload = OrgRegistration(OrgIdentity(key.org_id, name, key.public_key))
        block = forge_block(store, payload, key, timestamp=tick)
        height = store.append(block)
        store.save(cfg.chain_path)
    except LedgerError as exc:
        _fail(exc)
        return
    click.echo(f"registered {key.org_id} at height {height} block {store.head_hash().hex()}")


@main.command("new-student")
@click.option("--seed", default=None, type=int, help="Seed for a reproducible id.")
def new_student(seed):
    """Print a fresh anonymous student id (UUIDv4)."""
    rng = random.Random(seed) if seed is not None else None
    click.echo(new_student_id(rng))


def _achievement_from_options(key, student, course, title, credits, hours, topics,
                              result, grade, tick, source) -> AchievementRecord:
    topic_tuple = tuple(t for t in topics.split(",") if t)
    return AchievementRecord(
        student=student,
        course_id=course,
        title=title or course,
        credit_points=_parse_decimal(credits, "credits"),
        workload_hours=hours,
        issuer=key.org_id,
        topics=topic_tuple,
        result=Result.PASSED if result == "passed" else Result.FAILED,
        grade=None if grade is None else _parse_decimal(grade, "grade"),
        assessment_tick=tick if tick is not None else 0,
        source_kind=_SOURCE_KINDS[source],
    )


_achievement_options = [
    click.option("--student", required=True, help="Anonymous student id (UUIDv4)."),
    click.option("--course", required=True, help="Course identifier."),
    click.option("--title", default=None, help="Course title (defaults to the course id)."),
    click.option("--credits", required=True, help="Credit points (ECTS-style, <= 60)."),
    click.option("--hours", default=0, type=int, help="Workload hours."),
    click.option("--topics", required=True, help="Comma-separated lowercase topic tags."),
    click.option("--result", default="passed", type=click.Choice(["passed", "failed"]),
                 show_default=True),
    click.option("--grade", default=None, help="Optional grade (scale is org-specific)."),
    click.option("--source", default="exam", type=click.Choice(sorted(_SOURCE_KINDS)),
                 show_default=True, help="Kind of achievement source."),
]


def _with_achievement_options(fn):
    for option in reversed(_achievement_options):
        fn = option(fn)
    return fn


@main.command("submit-achievement")
@_with_achievement_options
@click.option("--tick", default=None, type=int, help="Logical timestamp.")
@click.pass_obj
def submit_achievement(cfg: NodeConfig, student, course, title, credits, hours,
                       topics, result, grade, source, tick):
    """Publish one assessment result to the chain."""
    try:
        key = _load_key(cfg)
        store = _load_chain(cfg)
        record = _achievement_from_options(
            key, student, course, title, credits, hours, topics, result, grade,
            tick if tick is not None else store.height() + 1, source,
        )
        block = forge_block(store, record, key, timestamp=tick)
        height = store.append(block)
        origin = store.head_hash().hex()
        published = _publish_owned(store, key, tick)
        store.save(cfg.chain_path)
    except LedgerError as exc:
        _fail(exc)
        return
    click.echo(f"achievement at height {height} block {origin}")
    for line in published:
        click.echo(f"published {line}")


@main.command("submit-correction")
@click.option("--target", required=True, help="Hex hash of the achievement block to correct.")
@click.option("--invalidate", "mode", flag_value="invalidate", default=True,
              help="Declare the target invalid.")
@click.option("--replace", "mode", flag_value="replace",
              help="Replace the target with corrected data (requires achievement flags).")
@click.option("--reason", required=True, help="Why the original entry is wrong.")
@click.option("--student", default=None)
@click.option("--course", default=None)
@click.option("--title", default=None)
@click.option("--credits", default=None)
@click.option("--hours", default=0, type=int)
@click.option("--topics", default=None)
@click.option("--result", default="passed", type=click.Choice(["passed", "failed"]))
@click.option("--grade", default=None)
@click.option("--source", default="exam", type=click.Choice(sorted(_SOURCE_KINDS)))
@click.option("--tick", default=None, type=int, help="Logical timestamp.")
@click.pass_obj
def submit_correction(cfg: NodeConfig, target, mode, reason, student, course, title,
                      credits, hours, topics, result, grade, source, tick):
    """Correct an earlier achievement with a new block; history is kept."""
    try:
        key = _load_key(cfg)
        store = _load_chain(cfg)
        try:
            target_hash = bytes.fromhex(target)
        except ValueError:
            raise PayloadInvalid(f"target is not a hex digest: {target!r}") from None
        if mode == "replace":
            for name, value in (("student", student), ("course", course),
                                ("credits", credits), ("topics", topics)):
                if value is None:
                    raise PayloadInvalid(f"--replace requires --{name}")
            replacement = _achievement_from_options(
                key, student, course, title, credits, hours, topics, result, grade,
                tick if tick is not None else store.height() + 1, source,
            )
            payload = CorrectionRecord(
                target_block_hash=target_hash, action=CorrectionAction.REPLACE,
                reason=reason, replacement=replacement,
            )
        else:
            payload = CorrectionRecord(
                target_block_hash=target_hash, action=CorrectionAction.INVALIDATE, reason=reason
            )
        block = forge_block(store, payload, key, timestamp=tick)
        height = store.append(block)
        correction_hash = store.head_hash().hex()
        published = _publish_owned(store, key, tick)
        store.save(cfg.chain_path)
    except LedgerError as exc:
        _fail(exc)
        return
    click.echo(f"correction at height {height} block {correction_hash}")
    for line in published:
        click.echo(f"published {line}")


@main.command()
@click.option("--tick", default=None, type=int, help="Logical timestamp.")
@click.pass_obj
def mine(cfg: NodeConfig, tick):
    """Publish every pending contract fulfillment owed by this org."""
    try:
        key = _load_key(cfg)
        store = _load_chain(cfg)
        published = _publish_owned(store, key, tick)
        if published:
            store.save(cfg.chain_path)
    except LedgerError as exc:
        _fail(exc)
        return
    if not published:
        click.echo("nothing to publish")
    for line in published:
        click.echo(f"published {line}")


@main.command("submit-contract")
@click.option("--file", "source_file", required=True, type=click.Path(path_type=Path),
              help="File holding the contract source text.")
@click.option("--tick", default=None, type=int, help="Logical timestamp.")
@click.pass_obj
def submit_contract(cfg: NodeConfig, source_file, tick):
    """Publish a recognition, degree or sanction contract."""
    try:
        key = _load_key(cfg)
        store = _load_chain(cfg)
        try:
            source = source_file.read_text(encoding="utf-8")
        except OSError as exc:
            raise PayloadInvalid(f"cannot read contract file: {exc}") from None
        ast = dsl.parse(source)
        payload = ContractPayload(source=dsl.print_contract(ast))
        block = forge_block(store, payload, key, timestamp=tick)
        height = store.append(block)
        contract_hash = store.head_hash().hex()
        published = _publish_owned(store, key, tick)
        store.save(cfg.chain_path)
    except LedgerError as exc:
        _fail(exc)
        return
    click.echo(f"contract at height {height} block {contract_hash}")
    for line in published:
        click.echo(f"published {line}")


@main.group()
def query():
    """Read-only chain queries."""


@query.command("transcript")
@click.argument("student")
@click.pass_obj
def query_transcript(cfg: NodeConfig, student):
    """Effective transcript of a student (corrections applied)."""
    try:
        store = _load_chain(cfg)
    except LedgerError as exc:
        _fail(exc)
        return
    click.echo(render_transcript_text(effective_transcript(store, student)), nl=False)


@query.command("progress")
@click.argument("student")
@click.argument("contract_hash")
@click.pass_obj
def query_progress(cfg: NodeConfig, student, contract_hash):
    """Degree progress of a student under a degree contract."""
    try:
        store = _load_chain(cfg)
        digest = bytes.fromhex(contract_hash)
        report = progress_report(store, student, digest)
    except ValueError:
        _fail(PayloadInvalid(f"contract hash is not hex: {contract_hash!r}"))
        return
    except LedgerError as exc:
        _fail(exc)
        return
    click.echo(report.to_json_text())


@main.command()
@click.pass_obj
def validate(cfg: NodeConfig):
    """Replay the chain file and report the first invalid height, if any."""
    try:
        if not cfg.chain_path.exists():
            raise PayloadInvalid(f"chain file not found: {cfg.chain_path}")
        records = read_records(cfg.chain_path)
        store, first_invalid = replay_records(records, cfg.schedule)
    except LedgerError as exc:
        _fail(exc)
        return
    if first_invalid is None:
        click.echo(f"OK height={store.height()} head={store.head_hash().hex()}")
    else:
        click.echo(f"INVALID at height {first_invalid}")
        sys.exit(1)


@main.group("sim")
def sim_group():
    """Deterministic multi-peer network simulation."""


@sim_group.command("run")
@click.option("--scenario", required=True, type=click.Path(path_type=Path),
              help="Scenario text file.")
@click.option("--seed", default=None, type=int, help="Override the scenario seed.")
def sim_run(scenario, seed):
    """Execute a scenario and print its deterministic report."""
    try:
        text = scenario.read_text(encoding="utf-8")
    except OSError as exc:
        _fail(PayloadInvalid(f"cannot read scenario: {exc}"))
        return
    try:
        parsed = simulation.parse_scenario(text)
        if seed is not None:
            parsed = dataclasses.replace(parsed, seed=seed)
        report = simulation.run(parsed)
    except LedgerError as exc:
        _fail(exc)
        return
    click.echo(report.render(), nl=False)


@main.command()
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
def serve(cfg: NodeConfig, port, host):
    """Serve the read-only public explorer over HTTP."""
    import uvicorn

    from .api import make_app_for_file

    try:
        cfg.port = port
        if not (1024 <= port <= 65535):
            raise PayloadInvalid("port must lie in [1024, 65535]")
        if not cfg.chain_path.exists():
            raise PayloadInvalid(f"chain file not found: {cfg.chain_path}")
        app = make_app_for_file(cfg.chain_path, cfg.schedule)
    except LedgerError as exc:
        _fail(exc)
        return
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
