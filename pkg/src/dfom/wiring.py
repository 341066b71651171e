"""Composition root: wire the store, registry, services, scheduler, and HTTP
app together for one deployment directory."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .accounts import AccountService, MailSink, log_mail_sink
from .api import create_app
from .ingestion import IngestionService
from .registry import DetectorRegistry, load_catalog
from .scheduler import (
    DEFAULT_POLL_INTERVAL,
    DEFAULT_POOL_SIZE,
    DEFAULT_WINDOW_HOURS,
    SchedulerService,
)
from .store import Store


@dataclass
class Platform:
    store: Store
    registry: DetectorRegistry
    accounts: AccountService
    ingestion: IngestionService
    scheduler: SchedulerService
    app: "object"

    def start(self) -> None:
        self.scheduler.start()

    def stop(self) -> None:
        self.scheduler.stop()
        self.store.close()


def build_platform(
    data_dir="data",
    catalog_dir=None,
    pool_size: int = DEFAULT_POOL_SIZE,
    fairness_window_hours: float = DEFAULT_WINDOW_HOURS,
    poll_interval_ms: float = DEFAULT_POLL_INTERVAL * 1000,
    mail_sink: MailSink = log_mail_sink,
    executor=None,
    max_upload_bytes: Optional[int] = None,
) -> Platform:
    root = Path(data_dir)
    store = Store(root / "store.db")
    registry = load_catalog(catalog_dir)
    accounts = AccountService(store, mail_sink)
    ingestion = IngestionService(store, registry, upload_root=root / "uploads")
    scheduler = SchedulerService(
        store, registry,
        pool_size=pool_size,
        window_hours=fairness_window_hours,
        poll_interval=poll_interval_ms / 1000.0,
        executor=executor,
        work_root=str(root / "work"),
    )
    app = create_app(store, registry, accounts, ingestion,
                     scheduler=scheduler, max_upload_bytes=max_upload_bytes)
    return Platform(store, registry, accounts, ingestion, scheduler, app)
