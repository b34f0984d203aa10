"""Read-only public explorer service.

Anyone may read the chain; nothing may write through this interface. The
service answers from immutable store snapshots and reloads the chain file
atomically when it changes on disk. Unknown students deliberately return an
empty transcript instead of 404 so that readers cannot probe which student
ids exist.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, HTTPException

from . import schemas
from .consensus import DifficultySchedule
from .dsl import Degree, print_requirement
from .engine import progress_report
from .errors import LedgerError
from .store import ChainStore, load_store
from .transcript import effective_transcript


class SnapshotProvider:
    """Serves the latest loaded chain; swap is atomic (plain rebind)."""

    def __init__(self, path: str | Path, schedule: Optional[DifficultySchedule] = None):
        self.path = Path(path)
        self.schedule = schedule
        self._stamp: Optional[tuple[float, int]] = None
        self._store: Optional[ChainStore] = None

    def __call__(self) -> ChainStore:
        stat = os.stat(self.path)
        stamp = (stat.st_mtime, stat.st_size)
        if self._store is None or stamp != self._stamp:
            store = load_store(self.path, self.schedule)
            self._store = store
            self._stamp = stamp
        return self._store


def make_app(provider: Callable[[], ChainStore]) -> FastAPI:
    app = FastAPI(title="scholarchain explorer", docs_url=None, redoc_url=None)

    @app.get("/head", response_model=schemas.HeadOut)
    def head() -> schemas.HeadOut:
        store = provider()
        return schemas.HeadOut(height=store.height(), head_hash=store.head_hash().hex())

    @app.get("/blocks/{block_hash}", response_model=schemas.BlockOut)
    def block(block_hash: str) -> schemas.BlockOut:
        store = provider()
        try:
            digest = bytes.fromhex(block_hash)
        except ValueError:
            raise HTTPException(status_code=404, detail="unknown block") from None
        stored = store.block_by_hash(digest)
        if stored is None:
            raise HTTPException(status_code=404, detail="unknown block")
        return schemas.block_out(stored)

    @app.get("/orgs", response_model=list[schemas.OrgOut])
    def orgs() -> list[schemas.OrgOut]:
        store = provider()
        return [
            schemas.org_out(org, store.ban_height(org.identity.org_id)) for org in store.orgs()
        ]

    @app.get("/students/{student}/transcript", response_model=schemas.TranscriptOut)
    def transcript(student: str) -> schemas.TranscriptOut:
        store = provider()
        return schemas.transcript_out(effective_transcript(store, student))

    @app.get(
        "/students/{student}/progress/{contract_hash}", response_model=schemas.ProgressOut
    )
    def progress(student: str, contract_hash: str) -> schemas.ProgressOut:
        store = provider()
        try:
            digest = bytes.fromhex(contract_hash)
        except ValueError:
            raise HTTPException(status_code=404, detail="unknown contract") from None
        if store.contract(digest) is None or not isinstance(store.contract(digest).ast, Degree):
            raise HTTPException(status_code=404, detail="unknown contract")
        try:
            report = progress_report(store, student, digest)
        except LedgerError as exc:
            raise HTTPException(status_code=404, detail=type(exc).__name__) from None
        return schemas.ProgressOut(
            student=report.student,
            contract_block=report.contract_block.hex(),
            fulfilled=report.fulfilled,
            fraction=float(report.fraction),
            missing=[print_requirement(leaf) for leaf in report.missing],
        )

    @app.get("/contracts", response_model=list[schemas.ContractListItemOut])
    def contracts() -> list[schemas.ContractListItemOut]:
        store = provider()
        return [schemas.contract_item_out(entry) for entry in store.contracts()]

    return app


def make_app_for_file(
    path: str | Path, schedule: Optional[DifficultySchedule] = None
) -> FastAPI:
    return make_app(SnapshotProvider(path, schedule))
